//! The five subcommands. Each returns a [`Report`]; nothing here touches stdout.

use djm_core::boussinesq::{
    build_example1, build_general, calibrate_example1, error_table, figure_data, reference_general,
    BoussinesqProblem, Calibration, CalibrationSettings, Provenance, Reading, ReferenceSolution,
};
use djm_core::oracle::{pde_residual_with, ResidualPolicy};
use djm_core::pointwise::{expr_fn, zero_fn};
use djm_core::{
    BoussinesqParams, Error, Example1Params, Expr, Method, PointFn, PrecisionConfig, Real,
    SeriesSolution, SolitaryWaveParams,
};

use crate::config::{ProblemKind, ReferenceChoice, RunConfig, Subject};
use crate::error::CliError;
use crate::grid::{parse_grid, GridPoint};
use crate::output::{sci, sci_f64, Report};

pub const TABLE_X_SPEC: &str = "20:40:5";
pub const TABLE_T_SPEC: &str = "0.1:1:0.1";
pub const PLOT_X_SPEC: &str = "-10:10:0.5";
pub const PLOT_T_SPEC: &str = "1";
pub const RESIDUAL_X_SPEC: &str = "1";
pub const RESIDUAL_T_SPEC: &str = "0.1";

/// Where `compare` counts the terms needed to reach [`TERM_TARGET`].
pub const TERM_PROBE: (&str, &str) = ("20", "0.5");
pub const TERM_TARGET: f64 = 1e-10;
pub const TERM_SEARCH_LIMIT: usize = 6;
/// Points where `compare` checks that the error falls with every added term.
pub const DECAY_SAMPLES: [(&str, &str); 4] =
    [("1", "0.1"), ("5", "0.5"), ("10", "0.5"), ("10", "1")];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Series,
    Table,
    Compare,
    Residual,
    Plotdata,
}

impl Command {
    fn default_grids(self) -> (&'static str, &'static str) {
        match self {
            Command::Series => ("", ""),
            Command::Table | Command::Compare => (TABLE_X_SPEC, TABLE_T_SPEC),
            Command::Residual => (RESIDUAL_X_SPEC, RESIDUAL_T_SPEC),
            Command::Plotdata => (PLOT_X_SPEC, PLOT_T_SPEC),
        }
    }
}

enum Kind {
    Example1(Example1Params),
    General {
        params: BoussinesqParams,
        wave: SolitaryWaveParams,
    },
}

/// A parsed problem at working precision.
pub struct Setup {
    pub cfg: PrecisionConfig,
    pub problem: BoussinesqProblem,
    kind: Kind,
}

impl Setup {
    pub fn new(rc: &RunConfig) -> Result<Self, CliError> {
        let cfg = PrecisionConfig::new(rc.digits)?;
        let (problem, kind) = match rc.problem {
            ProblemKind::Example1 => {
                let c = Example1Params::new(cfg.parse(&rc.c)?)?.with_velocity(rc.velocity);
                (build_example1(&c, &cfg)?, Kind::Example1(c))
            }
            ProblemKind::General => {
                let params =
                    BoussinesqParams::new(cfg.parse(&rc.p)?, cfg.parse(&rc.q)?, cfg.parse(&rc.r)?)?;
                let wave = SolitaryWaveParams::new(cfg.parse(&rc.alpha)?, cfg.parse(&rc.beta)?)
                    .with_direction(rc.sign)
                    .with_amplitude(rc.amplitude);
                (
                    build_general(&params, &wave, &cfg)?,
                    Kind::General { params, wave },
                )
            }
        };
        Ok(Self { cfg, problem, kind })
    }

    pub fn series(&self, method: Method, terms: usize) -> Result<SeriesSolution<Expr>, CliError> {
        Ok(self.problem.series(method, terms)?)
    }

    /// Builds the requested reference and notes how it was chosen.
    pub fn reference(
        &self,
        choice: ReferenceChoice,
        report: &mut Report,
    ) -> Result<ReferenceSolution, CliError> {
        let reference = match (&self.kind, choice) {
            (Kind::Example1(c), ReferenceChoice::Calibrated) => {
                let cal = calibrate_example1(
                    &self.problem,
                    c,
                    &CalibrationSettings::default(),
                    &self.cfg,
                )?;
                describe_calibration(&cal, report);
                cal.chosen
            }
            (Kind::Example1(c), ReferenceChoice::Literal) => {
                ReferenceSolution::closed_form(&c.c, Reading::Literal)
            }
            (Kind::Example1(c), ReferenceChoice::LinearTime) => {
                ReferenceSolution::closed_form(&c.c, Reading::LinearTime)
            }
            (Kind::General { params, wave }, ReferenceChoice::Calibrated) => reference_general(
                &self.problem,
                params,
                wave,
                &CalibrationSettings::default(),
                &self.cfg,
            )?,
            (Kind::General { .. }, other) => {
                return Err(CliError::Config(format!(
                    "reference {other} is only defined for example1"
                )))
            }
        };
        report.info(format!("reference = {}", reference.provenance()));
        Ok(reference)
    }

    fn grid(&self, spec: &str) -> Result<Vec<GridPoint>, CliError> {
        parse_grid(spec, &self.cfg)
    }
}

fn describe_calibration(cal: &Calibration, report: &mut Report) {
    let f = |v: &Real| sci_f64(v.to_f64());
    for v in &cal.candidates {
        report.info(format!(
            "candidate {}: ic_error = {}, velocity_error = {}, residual = {}, floor = {}, pass = {}",
            v.reading.name(),
            f(&v.ic_error),
            f(&v.velocity_error),
            f(&v.residual),
            f(&v.floor),
            v.passes()
        ));
    }
    if let Some(fb) = &cal.fallback {
        report.info(format!(
            "fallback numeric: ic_error = {}, residual = {}, floor = {}, tolerance = {}, pass = {}",
            f(&fb.ic_error),
            f(&fb.residual),
            f(&fb.floor),
            sci_f64(fb.tolerance),
            fb.passes
        ));
    }
    report.info(format!("calibration unique = {}", cal.unique()));
}

fn specs(rc: &RunConfig, command: Command) -> (String, String) {
    let (x, t) = command.default_grids();
    (
        rc.x.clone().unwrap_or_else(|| x.to_string()),
        rc.t.clone().unwrap_or_else(|| t.to_string()),
    )
}

fn values(grid: &[GridPoint]) -> Vec<Real> {
    grid.iter().map(|g| g.value.clone()).collect()
}

fn check_finite(v: &Real, x: &GridPoint, t: &GridPoint) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "reference undefined at x = {}, t = {}",
            x.label, t.label
        ))
        .into())
    }
}

pub fn run(command: Command, rc: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Series => series(rc),
        Command::Table => table(rc),
        Command::Compare => compare(rc),
        Command::Residual => residual(rc),
        Command::Plotdata => plotdata(rc),
    }
}

pub fn series(rc: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(rc)?;
    let (x, t) = specs(rc, Command::Series);
    let sol = setup.series(rc.method, rc.terms)?;
    let mut report = Report::new(rc.echo(&x, &t), vec!["term", "coef", "k", "m", "n"]);
    for (i, u) in sol.terms().iter().enumerate() {
        report.info(format!("u_{i} = {}", u.render(12)));
        for m in u.terms() {
            report.rows.push(vec![
                i.to_string(),
                sci(&m.coef, rc.digits),
                m.t.to_string(),
                m.sech.to_string(),
                m.tanh.to_string(),
            ]);
        }
    }
    Ok(report)
}

pub fn table(rc: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(rc)?;
    let (xs_spec, ts_spec) = specs(rc, Command::Table);
    let (xs, ts) = (setup.grid(&xs_spec)?, setup.grid(&ts_spec)?);
    let mut report = Report::new(
        rc.echo(&xs_spec, &ts_spec),
        vec!["x", "t", "approx", "reference", "abs_error"],
    );
    let sol = setup.series(rc.method, rc.terms)?;
    let reference = setup.reference(rc.reference, &mut report)?;
    let table = error_table(&sol, &reference, &values(&xs), &values(&ts), &setup.cfg)?;
    let cells = ts.iter().flat_map(|t| xs.iter().map(move |x| (x, t)));
    for (row, (x, t)) in table.rows.iter().zip(cells) {
        check_finite(&row.reference, x, t)?;
        report.rows.push(vec![
            x.label.clone(),
            t.label.clone(),
            sci(&row.approx, rc.digits),
            sci(&row.reference, rc.digits),
            sci(&row.abs_error, rc.digits),
        ]);
    }
    Ok(report)
}

/// `djm / mdjm`, with `0/0 = 1`.
fn error_ratio(djm: &Real, mdjm: &Real, bits: u32) -> Real {
    if djm.is_zero() && mdjm.is_zero() {
        Real::with_val(bits, 1)
    } else {
        Real::with_val(bits, djm / mdjm)
    }
}

/// Errors `|S_(k-1) - reference|` for `k = 1 … len` at one point.
fn errors_by_terms(
    sol: &SeriesSolution<Expr>,
    reference: &PointFn,
    x: &Real,
    t: &Real,
    cfg: &PrecisionConfig,
) -> Vec<Real> {
    let exact = reference(x, t, cfg);
    sol.partial_sums()
        .iter()
        .map(|s| Real::with_val(cfg.bits(), s.eval(x, t, cfg) - &exact).abs())
        .collect()
}

fn terms_to_target(errors: &[Real]) -> String {
    errors
        .iter()
        .position(|e| *e < TERM_TARGET)
        .map(|i| (i + 1).to_string())
        .unwrap_or_else(|| format!("> {TERM_SEARCH_LIMIT}"))
}

pub fn compare(rc: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(rc)?;
    let cfg = &setup.cfg;
    let (xs_spec, ts_spec) = specs(rc, Command::Compare);
    let (xs, ts) = (setup.grid(&xs_spec)?, setup.grid(&ts_spec)?);
    let mut report = Report::new(
        rc.echo(&xs_spec, &ts_spec),
        vec!["x", "t", "djm_error", "mdjm_error", "ratio"],
    );
    let reference = setup.reference(rc.reference, &mut report)?;
    let limit = TERM_SEARCH_LIMIT.max(rc.terms);
    let long_djm = setup.series(Method::Djm, limit)?;
    let long_mdjm = setup.series(Method::Mdjm, limit)?;
    let djm = SeriesSolution::from_terms(Method::Djm, long_djm.terms()[..rc.terms].to_vec())?;
    let mdjm = SeriesSolution::from_terms(Method::Mdjm, long_mdjm.terms()[..rc.terms].to_vec())?;
    let (x_values, t_values) = (values(&xs), values(&ts));
    let djm_table = error_table(&djm, &reference, &x_values, &t_values, cfg)?;
    let mdjm_table = error_table(&mdjm, &reference, &x_values, &t_values, cfg)?;

    let mut ratios = Vec::new();
    let mut mdjm_not_worse = 0;
    let cells = ts.iter().flat_map(|t| xs.iter().map(move |x| (x, t)));
    for ((d, m), (x, t)) in djm_table.rows.iter().zip(&mdjm_table.rows).zip(cells) {
        check_finite(&d.reference, x, t)?;
        let ratio = error_ratio(&d.abs_error, &m.abs_error, cfg.bits());
        if m.abs_error <= d.abs_error {
            mdjm_not_worse += 1;
        }
        ratios.push(ratio.to_f64());
        report.rows.push(vec![
            x.label.clone(),
            t.label.clone(),
            sci(&d.abs_error, rc.digits),
            sci(&m.abs_error, rc.digits),
            sci(&ratio, rc.digits),
        ]);
    }
    ratios.sort_by(f64::total_cmp);
    report.info(format!("terms = {} for both methods", rc.terms));
    report.info(format!(
        "mdjm <= djm in {mdjm_not_worse} of {} cells",
        ratios.len()
    ));
    report.info(format!(
        "ratio djm/mdjm: min = {}, median = {}, max = {}",
        sci_f64(ratios[0]),
        sci_f64(ratios[ratios.len() / 2]),
        sci_f64(ratios[ratios.len() - 1])
    ));

    let evaluator = reference.evaluator();
    let (px, pt) = (cfg.parse(TERM_PROBE.0)?, cfg.parse(TERM_PROBE.1)?);
    report.info(format!(
        "terms to reach {} at (x = {}, t = {}): djm = {}, mdjm = {}",
        sci_f64(TERM_TARGET),
        TERM_PROBE.0,
        TERM_PROBE.1,
        terms_to_target(&errors_by_terms(&long_djm, evaluator, &px, &pt, cfg)),
        terms_to_target(&errors_by_terms(&long_mdjm, evaluator, &px, &pt, cfg)),
    ));
    for (sx, st) in DECAY_SAMPLES {
        let (x, t) = (cfg.parse(sx)?, cfg.parse(st)?);
        for sol in [&djm, &mdjm] {
            let errors = errors_by_terms(sol, evaluator, &x, &t, cfg);
            let finite = errors.iter().all(|e| e.is_finite());
            let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
            let listed: Vec<String> = errors.iter().map(|e| sci_f64(e.to_f64())).collect();
            report.info(format!(
                "errors by k at (x = {sx}, t = {st}) {}: [{}] finite = {finite}, decreasing = {decreasing}",
                sol.method(),
                listed.join(", ")
            ));
        }
    }
    Ok(report)
}

pub fn residual(rc: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(rc)?;
    let cfg = &setup.cfg;
    let (xs_spec, ts_spec) = specs(rc, Command::Residual);
    let (xs, ts) = (setup.grid(&xs_spec)?, setup.grid(&ts_spec)?);
    let mut report = Report::new(
        rc.echo(&xs_spec, &ts_spec),
        vec!["subject", "k", "x", "t", "residual", "floor", "verdict"],
    );
    let cells: Vec<(&GridPoint, &GridPoint)> = ts
        .iter()
        .flat_map(|t| xs.iter().map(move |x| (x, t)))
        .collect();
    let points: Vec<(Real, Real)> = cells
        .iter()
        .map(|(x, t)| (x.value.clone(), t.value.clone()))
        .collect();

    let subjects: Vec<(String, PointFn, ResidualPolicy)> = match rc.subject {
        Subject::Series => {
            let sol = setup.series(rc.method, rc.terms)?;
            sol.partial_sums()
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    (
                        (i + 1).to_string(),
                        expr_fn(s),
                        ResidualPolicy::for_precision(cfg),
                    )
                })
                .collect()
        }
        Subject::Reference => {
            let reference = setup.reference(rc.reference, &mut report)?;
            let policy = match reference.provenance() {
                Provenance::Numeric { .. } => {
                    ResidualPolicy::double_precision(cfg, &setup.problem.initial_amplitude())
                }
                _ => ResidualPolicy::for_precision(cfg),
            };
            vec![(String::new(), reference.evaluator().clone(), policy)]
        }
        Subject::Zero => vec![(String::new(), zero_fn(), ResidualPolicy::for_precision(cfg))],
    };

    for (k, f, policy) in &subjects {
        let res = pde_residual_with(f, setup.problem.params(), &points, cfg, policy);
        for (p, (x, t)) in res.points.iter().zip(&cells) {
            check_finite(&p.residual, x, t)?;
            report.rows.push(vec![
                rc.subject.to_string(),
                k.clone(),
                x.label.clone(),
                t.label.clone(),
                sci(&p.residual, rc.digits),
                sci(&p.floor, rc.digits),
                p.verdict(),
            ]);
        }
    }
    Ok(report)
}

pub fn plotdata(rc: &RunConfig) -> Result<Report, CliError> {
    let setup = Setup::new(rc)?;
    let (xs_spec, ts_spec) = specs(rc, Command::Plotdata);
    let (xs, ts) = (setup.grid(&xs_spec)?, setup.grid(&ts_spec)?);
    let [t] = ts.as_slice() else {
        return Err(CliError::Config(
            "plotdata takes exactly one t value".into(),
        ));
    };
    let mut report = Report::new(
        rc.echo(&xs_spec, &ts_spec),
        vec!["x", "approx", "reference"],
    );
    let sol = setup.series(rc.method, rc.terms)?;
    let reference = setup.reference(rc.reference, &mut report)?;
    let curve = figure_data(&sol, &reference, &values(&xs), &t.value, &setup.cfg)?;
    for (s, x) in curve.iter().zip(&xs) {
        check_finite(&s.reference, x, t)?;
        report.rows.push(vec![
            x.label.clone(),
            sci(&s.approx, rc.digits),
            sci(&s.reference, rc.digits),
        ]);
    }
    Ok(report)
}
