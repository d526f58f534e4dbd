//! Boussinesq problems `u_tt + p·u_xx + q·(u²)_xx + r·u_xxxx = 0` in integral form
//!
//! ```text
//! u = u(x,0) + t·u_t(x,0) + L(u) + N(u)
//! L(u) = -I2(p·u_xx + r·u_xxxx),   N(u) = -q·I2((u²)_xx)
//! ```
//!
//! where `I2` is the double time integral from 0. Also provides reference
//! solutions for the `c`-family example and the calibration that picks one.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rug::ops::Pow;

use crate::algebra::{Expr, Phase, Space};
use crate::error::{Error, Result};
use crate::iterate::{series, IterationProblem, Method, Operator, SeriesOptions, SeriesSolution};
use crate::oracle::fd::{CentralStencil, FD_ORDER};
use crate::oracle::residual::{pde_residual, pde_residual_with, ResidualPolicy};
use crate::oracle::spectral::{numeric_reference, SpectralConfig};
use crate::pointwise::{expr_fn, PointFn};
use crate::precision::{PrecisionConfig, Real};

/// x-columns of the published error tables.
pub const TABLE_XS: [f64; 5] = [20.0, 25.0, 30.0, 35.0, 40.0];
/// t-rows of the published error tables.
pub const TABLE_TS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Clone, Debug)]
pub struct BoussinesqParams {
    p: Real,
    q: Real,
    r: Real,
}

impl BoussinesqParams {
    pub fn new(p: Real, q: Real, r: Real) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::Domain("q must be nonzero".into()));
        }
        Ok(Self { p, q, r })
    }

    /// `u_tt - u_xx + 3(u²)_xx + u_xxxx = 0`.
    pub fn example1(cfg: &PrecisionConfig) -> Self {
        Self {
            p: cfg.int(-1),
            q: cfg.int(3),
            r: cfg.int(1),
        }
    }

    pub fn p(&self) -> &Real {
        &self.p
    }

    pub fn q(&self) -> &Real {
        &self.q
    }

    pub fn r(&self) -> &Real {
        &self.r
    }
}

/// Direction of travel, the `±` in `x ± αt`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Direction {
    #[default]
    Plus,
    Minus,
}

impl Direction {
    pub fn sigma(self) -> i32 {
        match self {
            Direction::Plus => 1,
            Direction::Minus => -1,
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Direction::Plus),
            "-" | "-1" | "minus" => Ok(Direction::Minus),
            other => Err(Error::Parse(format!("unknown sign {other:?}"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Plus => "+",
            Direction::Minus => "-",
        })
    }
}

/// Choice of amplitude and velocity data for the general solitary wave.
///
/// `Printed` uses `A = 3(α²+p)^(1/2)/(2q)` and `u_t(x,0) = ∓3α(α²+p)^(3/2)/(2q(-r)^(1/2))·s²τ`;
/// `PrintedNegated` flips the sign of `A` only. `Exact` uses the amplitude that makes
/// `A·sech²(κ(x ± αt) + β)` an actual solution, `A = -3(α²+p)/(2q)`, with the
/// velocity obtained by differentiating it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AmplitudeForm {
    #[default]
    Printed,
    PrintedNegated,
    Exact,
}

impl FromStr for AmplitudeForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "printed" => Ok(AmplitudeForm::Printed),
            "negated" | "printed-negated" => Ok(AmplitudeForm::PrintedNegated),
            "exact" => Ok(AmplitudeForm::Exact),
            other => Err(Error::Parse(format!("unknown amplitude form {other:?}"))),
        }
    }
}

impl fmt::Display for AmplitudeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AmplitudeForm::Printed => "printed",
            AmplitudeForm::PrintedNegated => "negated",
            AmplitudeForm::Exact => "exact",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolitaryWaveParams {
    pub alpha: Real,
    pub beta: Real,
    pub direction: Direction,
    pub amplitude: AmplitudeForm,
}

impl SolitaryWaveParams {
    pub fn new(alpha: Real, beta: Real) -> Self {
        Self {
            alpha,
            beta,
            direction: Direction::default(),
            amplitude: AmplitudeForm::default(),
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_amplitude(mut self, amplitude: AmplitudeForm) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Initial velocity coefficient `V` in `u_t(x,0) = V·s²τ` for the `c`-family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Example1Velocity {
    /// `V = -c^(5/2)/4`, the coefficient carried by the displayed first iterate.
    #[default]
    SeriesDisplay,
    /// `V = -c^(5/2)/2`, as written in the initial condition.
    PrintedInitialCondition,
}

impl FromStr for Example1Velocity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "series" | "quarter" => Ok(Example1Velocity::SeriesDisplay),
            "printed" | "half" => Ok(Example1Velocity::PrintedInitialCondition),
            other => Err(Error::Parse(format!(
                "unknown velocity convention {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Example1Velocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example1Velocity::SeriesDisplay => "series",
            Example1Velocity::PrintedInitialCondition => "printed",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Example1Params {
    pub c: Real,
    pub velocity: Example1Velocity,
}

impl Example1Params {
    pub fn new(c: Real) -> Result<Self> {
        if c.is_nan() || c <= 0 {
            return Err(Error::Domain(format!("c must be positive, got {c}")));
        }
        Ok(Self {
            c,
            velocity: Example1Velocity::default(),
        })
    }

    pub fn with_velocity(mut self, velocity: Example1Velocity) -> Self {
        self.velocity = velocity;
        self
    }

    /// `V` in `u_t(x,0) = V·s²τ`.
    pub fn velocity_coefficient(&self, bits: u32) -> Real {
        let c52 = Real::with_val(bits, (&self.c).pow(2.5f64));
        match self.velocity {
            Example1Velocity::SeriesDisplay => -c52 / 4u32,
            Example1Velocity::PrintedInitialCondition => -c52 / 2u32,
        }
    }
}

/// A Boussinesq initial-value problem together with its iteration form.
#[derive(Clone, Debug)]
pub struct BoussinesqProblem {
    params: BoussinesqParams,
    iteration: IterationProblem<Expr>,
    initial: Expr,
    velocity: Expr,
}

impl BoussinesqProblem {
    fn assemble(params: BoussinesqParams, initial: Expr, velocity: Expr) -> Result<Self> {
        let f2 = velocity.mul(&initial.space().t())?;
        let iteration = IterationProblem::new(
            initial.clone(),
            f2,
            linear_operator(&params),
            nonlinear_operator(&params),
        )?;
        Ok(Self {
            params,
            iteration,
            initial,
            velocity,
        })
    }

    pub fn params(&self) -> &BoussinesqParams {
        &self.params
    }

    pub fn iteration(&self) -> &IterationProblem<Expr> {
        &self.iteration
    }

    pub fn space(&self) -> &Space {
        self.initial.space()
    }

    /// `u(x, 0)`.
    pub fn initial(&self) -> &Expr {
        &self.initial
    }

    /// `u_t(x, 0)`.
    pub fn velocity(&self) -> &Expr {
        &self.velocity
    }

    pub fn initial_fn(&self) -> PointFn {
        expr_fn(&self.initial)
    }

    pub fn velocity_fn(&self) -> PointFn {
        expr_fn(&self.velocity)
    }

    /// `max |u(x, 0)|` sampled on `[-20, 20]` with step 1/8.
    pub fn initial_amplitude(&self) -> Real {
        let cfg = self.space().precision();
        let t = Real::new(cfg.bits());
        let f = self.initial_fn();
        let mut best = Real::new(cfg.bits());
        for i in -160..=160 {
            let v = f(&cfg.real(f64::from(i) / 8.0), &t, cfg).abs();
            if v > best {
                best = v;
            }
        }
        best
    }

    pub fn series(&self, method: Method, terms: usize) -> Result<SeriesSolution<Expr>> {
        series(&self.iteration, SeriesOptions::terms(terms), method)
    }
}

/// `L(u) = -I2(p·u_xx + r·u_xxxx)`.
pub fn linear_operator(params: &BoussinesqParams) -> Operator<Expr> {
    let p = params.p.clone();
    let r = params.r.clone();
    Operator::linear("-I2(p u_xx + r u_xxxx)", move |u: &Expr| {
        let uxx = u.diff_x_n(2);
        let uxxxx = uxx.diff_x_n(2);
        Ok(uxx
            .scale(&p)
            .add(&uxxxx.scale(&r))?
            .double_integral_t()
            .neg())
    })
}

/// `N(u) = -q·I2((u²)_xx)`.
pub fn nonlinear_operator(params: &BoussinesqParams) -> Operator<Expr> {
    let minus_q = Real::with_val(params.q.prec(), -&params.q);
    Operator::nonlinear("-q I2((u^2)_xx)", move |u: &Expr| {
        Ok(u.square().diff_x_n(2).double_integral_t().scale(&minus_q))
    })
}

/// Example problem with `u(x,0) = (c/2)·sech²(√c/2·(x+1))` and `u_t(x,0) = V·s²τ`.
pub fn build_example1(params: &Example1Params, cfg: &PrecisionConfig) -> Result<BoussinesqProblem> {
    let bits = cfg.bits();
    let half_root = Real::with_val(bits, params.c.sqrt_ref()) / 2u32;
    let space = Space::new(Phase::new(half_root.clone(), half_root), cfg.clone());
    let s2 = space.sech().square();
    let initial = s2.scale(&(Real::with_val(bits, &params.c) / 2u32));
    let velocity = s2
        .mul(&space.tanh())?
        .scale(&params.velocity_coefficient(bits));
    BoussinesqProblem::assemble(BoussinesqParams::example1(cfg), initial, velocity)
}

struct WaveData {
    scale: Real,
    amplitude: Real,
    velocity: Real,
}

fn wave_data(params: &BoussinesqParams, wave: &SolitaryWaveParams, bits: u32) -> Result<WaveData> {
    let (p, q, r) = (&params.p, &params.q, &params.r);
    if r.is_zero() {
        return Err(Error::Domain(
            "r must be nonzero for a solitary wave".into(),
        ));
    }
    let a2p = Real::with_val(bits, wave.alpha.square_ref()) + p;
    let minus_r = Real::with_val(bits, -r);
    let ratio = Real::with_val(bits, &a2p / &minus_r);
    if ratio.is_nan() || ratio <= 0 {
        return Err(Error::Domain(format!(
            "(alpha^2 + p) / (-r) = {} is not positive; the wave scale is not real",
            ratio.to_f64()
        )));
    }
    let scale = ratio.sqrt() / 2u32;
    let sigma = wave.direction.sigma();
    let two_q = Real::with_val(bits, q * 2u32);
    let (amplitude, velocity) = match wave.amplitude {
        AmplitudeForm::Printed | AmplitudeForm::PrintedNegated => {
            if a2p < 0 {
                return Err(Error::Domain(
                    "alpha^2 + p is negative; the printed amplitude needs its square root".into(),
                ));
            }
            let mut amp = Real::with_val(bits, a2p.sqrt_ref()) * 3u32 / &two_q;
            if wave.amplitude == AmplitudeForm::PrintedNegated {
                amp = -amp;
            }
            let num = Real::with_val(bits, (&a2p).pow(1.5f64)) * &wave.alpha * 3u32;
            let den = Real::with_val(bits, minus_r.sqrt_ref()) * &two_q;
            (amp, -(num / den) * sigma)
        }
        AmplitudeForm::Exact => {
            let amp = -(Real::with_val(bits, &a2p * 3u32) / &two_q);
            let vel = -(Real::with_val(bits, &wave.alpha * &scale) * &amp * 2u32) * sigma;
            (amp, vel)
        }
    };
    Ok(WaveData {
        scale,
        amplitude,
        velocity,
    })
}

/// Solitary-wave problem for arbitrary `(p, q, r)` with phase `κx + β`.
pub fn build_general(
    params: &BoussinesqParams,
    wave: &SolitaryWaveParams,
    cfg: &PrecisionConfig,
) -> Result<BoussinesqProblem> {
    let data = wave_data(params, wave, cfg.bits())?;
    let space = Space::new(Phase::new(data.scale, wave.beta.clone()), cfg.clone());
    let s2 = space.sech().square();
    let initial = s2.scale(&data.amplitude);
    let velocity = s2.mul(&space.tanh())?.scale(&data.velocity);
    BoussinesqProblem::assemble(params.clone(), initial, velocity)
}

fn sech_squared(theta: &Real, bits: u32) -> Real {
    // 4 / (e^θ + e^-θ)², kept apart from the algebra's evaluator
    let e = Real::with_val(bits, theta.exp_ref());
    let inv = Real::with_val(bits, 1u32 / &e);
    let sum = e + inv;
    Real::with_val(bits, 4u32) / Real::with_val(bits, sum.square_ref())
}

/// `A·sech²(κ(x ± αt) + β)` from the same data as [`build_general`].
pub fn general_travelling_wave(
    params: &BoussinesqParams,
    wave: &SolitaryWaveParams,
    cfg: &PrecisionConfig,
) -> Result<PointFn> {
    let data = wave_data(params, wave, cfg.bits())?;
    let alpha = Real::with_val(cfg.bits(), &wave.alpha * wave.direction.sigma());
    let beta = wave.beta.clone();
    Ok(Arc::new(move |x, t, cfg| {
        let bits = cfg.bits();
        let moving = Real::with_val(bits, x + Real::with_val(bits, &alpha * t));
        let theta = Real::with_val(bits, &data.scale * &moving) + &beta;
        sech_squared(&theta, bits) * &data.amplitude
    }))
}

/// Readings of the closed-form `(c/2)·sech²(√c/2·x + φ(t))`.
#[derive(Clone, Debug)]
pub enum Reading {
    /// `φ = √c/2·√(1 + c·t)`.
    Literal,
    /// `φ = √c/2·√(1 + c)·t + √c/2`.
    LinearTime,
    /// `φ = √c/2·(1 + v·t)` with `v` fitted to the residual.
    Fitted { speed: Real },
}

impl Reading {
    pub fn name(&self) -> &'static str {
        match self {
            Reading::Literal => "literal",
            Reading::LinearTime => "linear-time",
            Reading::Fitted { .. } => "fitted-speed",
        }
    }

    fn phase_shift(&self, c: &Real, t: &Real, bits: u32) -> Real {
        let half_root = Real::with_val(bits, c.sqrt_ref()) / 2u32;
        let inner = match self {
            Reading::Literal => {
                let ct = Real::with_val(bits, c * t) + 1u32;
                ct.sqrt()
            }
            Reading::LinearTime => {
                let root = (Real::with_val(bits, c + 1u32)).sqrt();
                root * t + 1u32
            }
            Reading::Fitted { speed } => Real::with_val(bits, speed * t) + 1u32,
        };
        half_root * inner
    }
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reading::Literal => f.write_str("literal: sqrt(c)/2*x + sqrt(c)/2*sqrt(1+c*t)"),
            Reading::LinearTime => {
                f.write_str("linear-time: sqrt(c)/2*x + sqrt(c)/2*sqrt(1+c)*t + sqrt(c)/2")
            }
            Reading::Fitted { speed } => {
                write!(
                    f,
                    "fitted-speed: sqrt(c)/2*(x + 1 + v*t), v = {:.6e}",
                    speed.to_f64()
                )
            }
        }
    }
}

/// Evaluator for one reading of the closed form.
pub fn closed_form(c: &Real, reading: &Reading) -> PointFn {
    let c = c.clone();
    let reading = reading.clone();
    Arc::new(move |x, t, cfg| {
        let bits = cfg.bits();
        let half_root = Real::with_val(bits, c.sqrt_ref()) / 2u32;
        let theta = Real::with_val(bits, &half_root * x) + reading.phase_shift(&c, t, bits);
        sech_squared(&theta, bits) * Real::with_val(bits, &c / 2u32)
    })
}

#[derive(Clone, Debug)]
pub enum Provenance {
    ClosedForm(Reading),
    TravellingWave,
    Numeric {
        modes: usize,
        half_width: f64,
        dt: f64,
    },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::ClosedForm(_) => "closed-form",
            Provenance::TravellingWave => "exact-travelling-wave",
            Provenance::Numeric { .. } => "oracle-calibrated",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::ClosedForm(r) => write!(f, "{} ({})", self.tag(), r),
            Provenance::TravellingWave => f.write_str(self.tag()),
            Provenance::Numeric {
                modes,
                half_width,
                dt,
            } => write!(
                f,
                "{} (spectral, {} modes on [-{}, {}), dt = {:e})",
                self.tag(),
                modes,
                half_width,
                half_width,
                dt
            ),
        }
    }
}

#[derive(Clone)]
pub struct ReferenceSolution {
    evaluator: PointFn,
    provenance: Provenance,
}

impl fmt::Debug for ReferenceSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReferenceSolution")
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl ReferenceSolution {
    pub fn new(evaluator: PointFn, provenance: Provenance) -> Self {
        Self {
            evaluator,
            provenance,
        }
    }

    pub fn closed_form(c: &Real, reading: Reading) -> Self {
        Self::new(closed_form(c, &reading), Provenance::ClosedForm(reading))
    }

    pub fn eval(&self, x: &Real, t: &Real, cfg: &PrecisionConfig) -> Real {
        (self.evaluator)(x, t, cfg)
    }

    pub fn evaluator(&self) -> &PointFn {
        &self.evaluator
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Acceptance data for the double-precision numeric reference.
pub const NUMERIC_RESIDUAL_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct CalibrationSettings {
    /// `(x, t)` points for the residual test.
    pub residual_points: Vec<(f64, f64)>,
    /// Subset used while fitting the speed.
    pub fit_points: Vec<(f64, f64)>,
    /// x samples for the `t = 0` checks.
    pub ic_xs: Vec<f64>,
    pub speed_bracket: (f64, f64),
    pub speed_scan: usize,
    pub spectral: SpectralConfig,
    pub numeric_t_end: f64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        let mut residual_points = Vec::new();
        for &t in &[0.2, 0.5, 0.9] {
            for &x in &[-4.0, -1.0, 0.5, 2.0, 5.0] {
                residual_points.push((x, t));
            }
        }
        Self {
            fit_points: vec![(-2.0, 0.3), (0.0, 0.6), (1.5, 0.9), (4.0, 0.5)],
            residual_points,
            ic_xs: (0..20).map(|i| -9.5 + i as f64).collect(),
            speed_bracket: (-3.0, 3.0),
            speed_scan: 61,
            spectral: SpectralConfig {
                max_t_end: 1.2,
                ..SpectralConfig::default()
            },
            numeric_t_end: 1.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CandidateVerdict {
    pub reading: Reading,
    /// `max |u(x,0) - initial|`.
    pub ic_error: Real,
    /// `max |u_t(x,0) - velocity|` by finite differences in t.
    pub velocity_error: Real,
    pub residual: Real,
    pub floor: Real,
    pub ic_ok: bool,
    pub velocity_ok: bool,
    pub residual_ok: bool,
}

impl CandidateVerdict {
    pub fn passes(&self) -> bool {
        self.ic_ok && self.velocity_ok && self.residual_ok
    }
}

#[derive(Clone, Debug)]
pub struct FallbackVerdict {
    pub ic_error: Real,
    pub residual: Real,
    pub floor: Real,
    pub tolerance: f64,
    pub passes: bool,
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub candidates: Vec<CandidateVerdict>,
    pub fallback: Option<FallbackVerdict>,
    pub chosen: ReferenceSolution,
    pub residual_tolerance: Real,
}

impl Calibration {
    /// Number of closed-form readings that passed every check.
    pub fn passing_candidates(&self) -> usize {
        self.candidates.iter().filter(|c| c.passes()).count()
    }

    /// Exactly one source (a single reading, or the fallback alone) was accepted.
    pub fn unique(&self) -> bool {
        match &self.fallback {
            Some(f) => f.passes && self.passing_candidates() == 0,
            None => self.passing_candidates() == 1,
        }
    }
}

fn points(list: &[(f64, f64)], cfg: &PrecisionConfig) -> Vec<(Real, Real)> {
    list.iter()
        .map(|&(x, t)| (cfg.real(x), cfg.real(t)))
        .collect()
}

fn max_abs_diff(a: &PointFn, b: &PointFn, xs: &[f64], t: &Real, cfg: &PrecisionConfig) -> Real {
    let mut worst = Real::new(cfg.bits());
    for &x in xs {
        let x = cfg.real(x);
        let d = Real::with_val(cfg.bits(), a(&x, t, cfg) - b(&x, t, cfg)).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}

fn velocity_error(u: &PointFn, velocity: &PointFn, xs: &[f64], cfg: &PrecisionConfig) -> Real {
    let bits = cfg.bits();
    let stencil = CentralStencil::new(1, FD_ORDER, bits);
    let h = cfg.pow10(-((cfg.digits() / 10) as i32));
    let zero = Real::new(bits);
    let mut worst = Real::new(bits);
    for &x in xs {
        let x = cfg.real(x);
        let ut = stencil.apply(|t: &Real| u(&x, t, cfg), &zero, &h, bits);
        let d = Real::with_val(bits, ut - velocity(&x, &zero, cfg)).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}

fn fit_speed(
    c: &Real,
    params: &BoussinesqParams,
    settings: &CalibrationSettings,
    cfg: &PrecisionConfig,
) -> Real {
    let fit = points(&settings.fit_points, cfg);
    let objective = |v: &Real| -> Real {
        let f = closed_form(c, &Reading::Fitted { speed: v.clone() });
        pde_residual(&f, params, &fit, cfg).max_abs()
    };
    let (lo, hi) = settings.speed_bracket;
    let n = settings.speed_scan.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (0usize, None::<Real>);
    for i in 0..n {
        let val = objective(&cfg.real(lo + step * i as f64));
        if best.1.as_ref().is_none_or(|b| val < *b) {
            best = (i, Some(val));
        }
    }
    let centre = lo + step * best.0 as f64;
    // golden-section refinement at working precision
    let bits = cfg.bits();
    let inv_phi = (Real::with_val(bits, 5u32).sqrt() - 1u32) / 2u32;
    let mut a = cfg.real(centre - step);
    let mut b = cfg.real(centre + step);
    let stop = cfg.pow10(-((cfg.digits() / 2) as i32));
    let mut x1 = Real::with_val(
        bits,
        &b - Real::with_val(bits, &inv_phi * Real::with_val(bits, &b - &a)),
    );
    let mut x2 = Real::with_val(
        bits,
        &a + Real::with_val(bits, &inv_phi * Real::with_val(bits, &b - &a)),
    );
    let mut f1 = objective(&x1);
    let mut f2 = objective(&x2);
    while Real::with_val(bits, &b - &a) > stop {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = Real::with_val(
                bits,
                &b - Real::with_val(bits, &inv_phi * Real::with_val(bits, &b - &a)),
            );
            f1 = objective(&x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = Real::with_val(
                bits,
                &a + Real::with_val(bits, &inv_phi * Real::with_val(bits, &b - &a)),
            );
            f2 = objective(&x2);
        }
    }
    (a + b) / 2u32
}

/// Tests each closed-form reading against the problem's initial data and the PDE
/// residual, and falls back to the numeric integrator when none survives.
pub fn calibrate_example1(
    problem: &BoussinesqProblem,
    c: &Example1Params,
    settings: &CalibrationSettings,
    cfg: &PrecisionConfig,
) -> Result<Calibration> {
    let tolerance = cfg.pow10(-((cfg.digits() / 3) as i32));
    let ic_tolerance = cfg.loose_epsilon();
    let zero = Real::new(cfg.bits());
    let initial = problem.initial_fn();
    let velocity = problem.velocity_fn();
    let residual_points = points(&settings.residual_points, cfg);

    let speed = fit_speed(&c.c, problem.params(), settings, cfg);
    let readings = [
        Reading::Literal,
        Reading::LinearTime,
        Reading::Fitted { speed },
    ];
    let candidates: Vec<CandidateVerdict> = readings
        .into_iter()
        .map(|reading| {
            let f = closed_form(&c.c, &reading);
            let ic_error = max_abs_diff(&f, &initial, &settings.ic_xs, &zero, cfg);
            let velocity_error = velocity_error(&f, &velocity, &settings.ic_xs, cfg);
            let report = pde_residual(&f, problem.params(), &residual_points, cfg);
            let residual = report.max_abs();
            let floor = report.max_floor();
            CandidateVerdict {
                ic_ok: ic_error <= ic_tolerance,
                velocity_ok: velocity_error <= tolerance,
                residual_ok: report.all_below(&tolerance),
                reading,
                ic_error,
                velocity_error,
                residual,
                floor,
            }
        })
        .collect();

    let passing: Vec<&CandidateVerdict> = candidates.iter().filter(|v| v.passes()).collect();
    if let Some(best) = passing.iter().min_by(|a, b| {
        a.residual
            .partial_cmp(&b.residual)
            .expect("finite residuals")
    }) {
        let chosen = ReferenceSolution::closed_form(&c.c, best.reading.clone());
        return Ok(Calibration {
            candidates,
            fallback: None,
            chosen,
            residual_tolerance: tolerance,
        });
    }

    let numeric = numeric_reference(
        problem.params(),
        initial.clone(),
        velocity,
        settings.numeric_t_end,
        &settings.spectral,
        cfg,
    )?;
    let evaluator = numeric.evaluator();
    let ic_error = max_abs_diff(&evaluator, &initial, &settings.ic_xs, &zero, cfg);
    let report = pde_residual_with(
        &evaluator,
        problem.params(),
        &residual_points,
        cfg,
        &ResidualPolicy::double_precision(cfg, &problem.initial_amplitude()),
    );
    let residual = report.max_abs();
    let passes = ic_error <= ic_tolerance && residual < NUMERIC_RESIDUAL_TOLERANCE;
    let fallback = FallbackVerdict {
        ic_error,
        floor: report.max_floor(),
        residual,
        tolerance: NUMERIC_RESIDUAL_TOLERANCE,
        passes,
    };
    if !passes {
        return Err(Error::Calibration(format!(
            "no closed-form reading passed and the numeric reference residual is {:.3e}",
            fallback.residual.to_f64()
        )));
    }
    let spectral = numeric.config();
    let chosen = ReferenceSolution::new(
        evaluator,
        Provenance::Numeric {
            modes: spectral.modes,
            half_width: spectral.half_width,
            dt: spectral.dt,
        },
    );
    Ok(Calibration {
        candidates,
        fallback: Some(fallback),
        chosen,
        residual_tolerance: tolerance,
    })
}

/// Calibrated reference for the `c`-family with default settings.
pub fn reference_example1(c: &Example1Params, cfg: &PrecisionConfig) -> Result<ReferenceSolution> {
    let problem = build_example1(c, cfg)?;
    Ok(calibrate_example1(&problem, c, &CalibrationSettings::default(), cfg)?.chosen)
}

/// Reference for a general solitary-wave problem: the travelling wave itself when
/// its data are exact, otherwise the numeric integrator.
pub fn reference_general(
    problem: &BoussinesqProblem,
    params: &BoussinesqParams,
    wave: &SolitaryWaveParams,
    settings: &CalibrationSettings,
    cfg: &PrecisionConfig,
) -> Result<ReferenceSolution> {
    if wave.amplitude == AmplitudeForm::Exact {
        return Ok(ReferenceSolution::new(
            general_travelling_wave(params, wave, cfg)?,
            Provenance::TravellingWave,
        ));
    }
    let numeric = numeric_reference(
        params,
        problem.initial_fn(),
        problem.velocity_fn(),
        settings.numeric_t_end,
        &settings.spectral,
        cfg,
    )
    .map_err(|e| Error::Calibration(e.to_string()))?;
    let spectral = numeric.config();
    Ok(ReferenceSolution::new(
        numeric.evaluator(),
        Provenance::Numeric {
            modes: spectral.modes,
            half_width: spectral.half_width,
            dt: spectral.dt,
        },
    ))
}

#[derive(Clone, Debug)]
pub struct ErrorRow {
    pub x: Real,
    pub t: Real,
    pub approx: Real,
    pub reference: Real,
    pub abs_error: Real,
}

/// Rows ordered by `t`, then `x`.
#[derive(Clone, Debug)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
    pub method: Method,
    pub terms: usize,
    pub provenance: String,
}

impl ErrorTable {
    pub fn cell(&self, x: f64, t: f64) -> Option<&ErrorRow> {
        self.rows
            .iter()
            .find(|r| (r.x.to_f64() - x).abs() < 1e-12 && (r.t.to_f64() - t).abs() < 1e-12)
    }
}

pub fn error_table(
    sol: &SeriesSolution<Expr>,
    reference: &ReferenceSolution,
    xs: &[Real],
    ts: &[Real],
    cfg: &PrecisionConfig,
) -> Result<ErrorTable> {
    if xs.is_empty() || ts.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let cells: Vec<(&Real, &Real)> = ts
        .iter()
        .flat_map(|t| xs.iter().map(move |x| (x, t)))
        .collect();
    let approx = sol.approximation();
    let rows = cells
        .par_iter()
        .map(|&(x, t)| {
            let a = approx.eval(x, t, cfg);
            let r = reference.eval(x, t, cfg);
            let abs_error = Real::with_val(cfg.bits(), &a - &r).abs();
            ErrorRow {
                x: x.clone(),
                t: t.clone(),
                approx: a,
                reference: r,
                abs_error,
            }
        })
        .collect();
    Ok(ErrorTable {
        rows,
        method: sol.method(),
        terms: sol.len(),
        provenance: reference.provenance().to_string(),
    })
}

/// Builds the problem, runs `k`-term MDJM and tabulates against the calibrated reference.
pub fn example1_error_table(
    c: &Example1Params,
    k: usize,
    xs: &[Real],
    ts: &[Real],
    cfg: &PrecisionConfig,
) -> Result<ErrorTable> {
    let problem = build_example1(c, cfg)?;
    let sol = problem.series(Method::Mdjm, k)?;
    let reference = calibrate_example1(&problem, c, &CalibrationSettings::default(), cfg)?.chosen;
    error_table(&sol, &reference, xs, ts, cfg)
}

#[derive(Clone, Debug)]
pub struct CurveSample {
    pub x: Real,
    pub approx: Real,
    pub reference: Real,
}

pub fn figure_data(
    sol: &SeriesSolution<Expr>,
    reference: &ReferenceSolution,
    xs: &[Real],
    t: &Real,
    cfg: &PrecisionConfig,
) -> Result<Vec<CurveSample>> {
    if xs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let approx = sol.approximation();
    Ok(xs
        .par_iter()
        .map(|x| CurveSample {
            x: x.clone(),
            approx: approx.eval(x, t, cfg),
            reference: reference.eval(x, t, cfg),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterate::mdjm_series;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig::new(60).unwrap()
    }

    fn c_params(c: f64, cfg: &PrecisionConfig) -> Example1Params {
        Example1Params::new(cfg.real(c)).unwrap()
    }

    #[test]
    fn rejects_nonpositive_c_and_zero_q() {
        let cfg = cfg();
        assert!(Example1Params::new(cfg.real(0.0)).is_err());
        assert!(Example1Params::new(cfg.real(-1.0)).is_err());
        assert!(BoussinesqParams::new(cfg.real(1.0), cfg.real(0.0), cfg.real(1.0)).is_err());
    }

    #[test]
    fn example1_source_values() {
        let cfg = cfg();
        let p = build_example1(&c_params(1.0, &cfg), &cfg).unwrap();
        let v = p.iteration().f1().eval_f64(0.0, 0.0, &cfg).to_f64();
        // (1/2)·sech²(1/2) from exp directly
        let e = 0.5f64.exp();
        let expect = 0.5 * (2.0 / (e + 1.0 / e)).powi(2);
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.3932238).abs() < 1e-7);
        for x in [-3.0, 0.0, 4.0] {
            assert!(p.iteration().f2().eval_f64(x, 0.0, &cfg).is_zero());
        }
    }

    #[test]
    fn first_iterate_has_quarter_velocity_term() {
        let cfg = PrecisionConfig::new(100).unwrap();
        for c in [1.0, 2.0] {
            let p = build_example1(&c_params(c, &cfg), &cfg).unwrap();
            let sol = p.series(Method::Mdjm, 2).unwrap();
            let coef = sol.term(1).unwrap().coefficient(1, 2, 1).unwrap();
            let expect = -c.powf(2.5) / 4.0;
            assert!((coef.to_f64() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn printed_velocity_convention_is_available() {
        let cfg = cfg();
        let params = c_params(2.0, &cfg).with_velocity(Example1Velocity::PrintedInitialCondition);
        let p = build_example1(&params, &cfg).unwrap();
        let coef = p.velocity().coefficient(0, 2, 1).unwrap().to_f64();
        assert!((coef + 2f64.powf(2.5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn later_terms_vanish_at_t_zero() {
        let cfg = cfg();
        let p = build_example1(&c_params(1.0, &cfg), &cfg).unwrap();
        let sol = p.series(Method::Mdjm, 4).unwrap();
        for u in &sol.terms()[1..] {
            assert!(u.t_coefficient(0).is_zero());
        }
    }

    #[test]
    fn general_with_zero_alpha_has_no_split() {
        let cfg = cfg();
        let params = BoussinesqParams::new(cfg.real(1.0), cfg.real(3.0), cfg.real(-1.0)).unwrap();
        let wave = SolitaryWaveParams::new(cfg.real(0.0), cfg.real(0.3));
        let p = build_general(&params, &wave, &cfg).unwrap();
        assert!(p.iteration().f2().is_zero());
        let m = p.series(Method::Mdjm, 3).unwrap();
        let d = p.series(Method::Djm, 3).unwrap();
        for (a, b) in m.terms().iter().zip(d.terms()) {
            assert!(a.identical(b));
        }
    }

    #[test]
    fn general_domain_error() {
        let cfg = cfg();
        let params = BoussinesqParams::new(cfg.real(-1.0), cfg.real(3.0), cfg.real(-1.0)).unwrap();
        let wave = SolitaryWaveParams::new(cfg.real(0.5), cfg.real(0.0));
        assert!(matches!(
            build_general(&params, &wave, &cfg),
            Err(Error::Domain(_))
        ));
        let wave = SolitaryWaveParams::new(cfg.real(2.0), cfg.real(0.0));
        assert!(build_general(&params, &wave, &cfg).is_ok());
    }

    #[test]
    fn doubling_q_halves_amplitude() {
        let cfg = cfg();
        let wave = SolitaryWaveParams::new(cfg.real(2.0), cfg.real(0.1));
        let amp = |q: f64| {
            let params =
                BoussinesqParams::new(cfg.real(-1.0), cfg.real(q), cfg.real(-1.0)).unwrap();
            let p = build_general(&params, &wave, &cfg).unwrap();
            p.initial().coefficient(0, 2, 0).unwrap().to_f64()
        };
        assert!((amp(3.0) / amp(6.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hand_written_recurrence_matches_engine() {
        // u_(n+1) = L(S_n) - L(S_(n-1)) + N(S_n) - N(S_(n-1)), written out directly
        let cfg = cfg();
        let params = BoussinesqParams::new(cfg.real(-1.0), cfg.real(3.0), cfg.real(-1.0)).unwrap();
        let wave = SolitaryWaveParams::new(cfg.real(1.5), cfg.real(0.2));
        let problem = build_general(&params, &wave, &cfg).unwrap();
        let sol = mdjm_series(problem.iteration(), SeriesOptions::terms(4)).unwrap();
        let s = problem.space().clone();
        let (p, q, r) = (params.p().clone(), params.q().clone(), params.r().clone());
        let spatial = |u: &Expr| -> Expr {
            let uxx = u.diff_x().diff_x();
            let uxxxx = uxx.diff_x().diff_x();
            let sq = u.square().diff_x().diff_x();
            uxx.scale(&p)
                .add(&uxxxx.scale(&r))
                .unwrap()
                .add(&sq.scale(&q))
                .unwrap()
        };
        let l_only = |u: &Expr| -> Expr {
            let uxx = u.diff_x().diff_x();
            uxx.scale(&p).add(&uxx.diff_x().diff_x().scale(&r)).unwrap()
        };
        let u1 = problem
            .iteration()
            .f2()
            .sub(&spatial(sol.term(0).unwrap()).double_integral_t())
            .unwrap();
        assert!(u1.approx_eq(sol.term(1).unwrap(), &cfg.loose_epsilon()));
        for n in 1..3 {
            let sn = sol.partial_sum(n).unwrap();
            let prev = sol.partial_sum(n - 1).unwrap();
            let sq_now = sn.square().diff_x().diff_x().scale(&q);
            let sq_prev = prev.square().diff_x().diff_x().scale(&q);
            let lin = l_only(sol.term(n).unwrap());
            let next = lin
                .add(&sq_now)
                .unwrap()
                .sub(&sq_prev)
                .unwrap()
                .double_integral_t()
                .neg();
            assert!(
                next.approx_eq(sol.term(n + 1).unwrap(), &cfg.loose_epsilon()),
                "n = {n}"
            );
        }
        let _ = s;
    }

    #[test]
    fn exact_general_wave_has_negligible_residual() {
        let cfg = cfg();
        let params = BoussinesqParams::new(cfg.real(-1.0), cfg.real(3.0), cfg.real(-1.0)).unwrap();
        let wave = SolitaryWaveParams::new(cfg.real(1.5), cfg.real(0.2))
            .with_amplitude(AmplitudeForm::Exact);
        let u = general_travelling_wave(&params, &wave, &cfg).unwrap();
        let rep = pde_residual(&u, &params, &points(&[(0.0, 0.2), (2.0, 0.7)], &cfg), &cfg);
        assert!(rep.all_below(&cfg.pow10(-20)));
        // the series built from the same data starts on this wave
        let problem = build_general(&params, &wave, &cfg).unwrap();
        let x = cfg.real(0.7);
        let z = Real::new(cfg.bits());
        let diff = Real::with_val(
            cfg.bits(),
            problem.initial().eval(&x, &z, &cfg) - u(&x, &z, &cfg),
        );
        assert!(diff.abs() < 1e-50);
    }

    #[test]
    fn operator_sign_audit() {
        // ∂tt(u - L(u) - N(u)) equals the PDE residual of u for any u in the algebra
        let cfg = cfg();
        let p = build_example1(&c_params(1.0, &cfg), &cfg).unwrap();
        let u = p.series(Method::Mdjm, 2).unwrap().approximation().clone();
        let it = p.iteration();
        let lhs = u
            .sub(&it.linear().apply(&u).unwrap())
            .unwrap()
            .sub(&it.nonlinear().apply(&u).unwrap())
            .unwrap()
            .diff_t()
            .diff_t();
        let pts = points(&[(0.3, 0.2), (-2.0, 0.5), (3.0, 0.8)], &cfg);
        let rep = pde_residual(&expr_fn(&u), p.params(), &pts, &cfg);
        for (pt, (x, t)) in rep.points.iter().zip(&pts) {
            let sym = lhs.eval(x, t, &cfg);
            let d = Real::with_val(cfg.bits(), &sym - &pt.residual).abs();
            assert!(d <= pt.floor, "{d} > {}", pt.floor);
            assert!(sym.clone().abs() > 1e-6);
        }
    }

    #[test]
    fn readings_match_initial_profile() {
        let cfg = cfg();
        let c = cfg.real(2.0);
        let p = build_example1(&Example1Params::new(c.clone()).unwrap(), &cfg).unwrap();
        let zero = Real::new(cfg.bits());
        for reading in [
            Reading::Literal,
            Reading::LinearTime,
            Reading::Fitted {
                speed: cfg.real(0.3),
            },
        ] {
            let f = closed_form(&c, &reading);
            for x in [-5.0, 0.0, 3.0] {
                let x = cfg.real(x);
                let d = Real::with_val(
                    cfg.bits(),
                    f(&x, &zero, &cfg) - p.initial().eval(&x, &zero, &cfg),
                );
                assert!(d.abs() < cfg.loose_epsilon(), "{reading}");
            }
        }
    }

    #[test]
    fn error_table_zero_at_initial_time() {
        let cfg = cfg();
        let params = c_params(1.0, &cfg);
        let p = build_example1(&params, &cfg).unwrap();
        let sol = p.series(Method::Mdjm, 3).unwrap();
        let reference = ReferenceSolution::closed_form(&params.c, Reading::Literal);
        let xs = [cfg.real(-1.0), cfg.real(20.0)];
        let table =
            error_table(&sol, &reference, &xs, &[cfg.real(0.0), cfg.real(0.1)], &cfg).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert!(table.rows[..2]
            .iter()
            .all(|r| r.abs_error < cfg.loose_epsilon()));
        assert!(table.cell(20.0, 0.1).unwrap().abs_error > 0);
        assert!(table.provenance.starts_with("closed-form"));
        let curve = figure_data(&sol, &reference, &xs, &cfg.real(0.0), &cfg).unwrap();
        for s in curve {
            assert!(
                Real::with_val(cfg.bits(), &s.approx - &s.reference).abs() < cfg.loose_epsilon()
            );
        }
    }
}
