//! DJM and modified DJM (MDJM) series generation for `u = f1 + f2 + L(u) + N(u)`.
//!
//! The nonlinear operator is expanded telescopically over partial sums
//! `S_i = u_0 + … + u_i`:
//!
//! ```text
//! G_0 = N(S_0),    G_i = N(S_i) - N(S_(i-1))
//! ```
//!
//! DJM seeds `u_0 = f` and sets `u_(m+1) = L(u_m) + G_m`. MDJM seeds with the
//! simpler part only, `u_0 = f1`, injects the rest at the first step,
//! `u_1 = f2 + L(u_0) + G_0`, and continues as DJM afterwards.

use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::algebra::Expr;
use crate::error::{Error, Result};
use crate::pointwise::PointFn;
use crate::precision::{PrecisionConfig, Real};

/// Number of random pairs used by the linearity audit.
pub const LINEARITY_AUDIT_PAIRS: usize = 20;
const AUDIT_SEED: u64 = 0x5eed_0d15;

/// A vector space the iteration can run over.
pub trait SeriesSpace: Clone + Send + Sync + Sized + 'static {
    /// The additive identity of the space `self` belongs to.
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn scaled(&self, factor: f64) -> Self;
    fn is_zero(&self) -> bool;
    /// Equality up to the space's rounding tolerance.
    fn approx_eq(&self, other: &Self) -> bool;
    /// Cheap size measure for the optional stopping rule.
    fn norm(&self) -> f64;
    /// A random element of the same space, for operator audits.
    fn sample(&self, rng: &mut StdRng) -> Self;
}

impl SeriesSpace for Expr {
    fn zero_like(&self) -> Self {
        self.space().zero()
    }

    fn add(&self, other: &Self) -> Result<Self> {
        Expr::add(self, other)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        Expr::sub(self, other)
    }

    fn scaled(&self, factor: f64) -> Self {
        self.scale_f64(factor)
    }

    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        Expr::approx_eq(self, other, &self.space().precision().loose_epsilon())
    }

    fn norm(&self) -> f64 {
        self.max_abs_coef().to_f64()
    }

    fn sample(&self, rng: &mut StdRng) -> Self {
        self.space().random_expr(rng, 6)
    }
}

impl SeriesSpace for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }

    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self - other)
    }

    fn scaled(&self, factor: f64) -> Self {
        self * factor
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * self.abs().max(other.abs()).max(1.0)
    }

    fn norm(&self) -> f64 {
        self.abs()
    }

    fn sample(&self, rng: &mut StdRng) -> Self {
        rng.gen_range(-1.0..1.0)
    }
}

type ApplyFn<E> = dyn Fn(&E) -> Result<E> + Send + Sync;

/// An operator on a series space, tagged with whether it claims linearity.
pub struct Operator<E> {
    name: String,
    apply: Arc<ApplyFn<E>>,
    linear: bool,
}

impl<E> Clone for Operator<E> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            apply: Arc::clone(&self.apply),
            linear: self.linear,
        }
    }
}

impl<E> fmt::Debug for Operator<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("name", &self.name)
            .field("linear", &self.linear)
            .finish()
    }
}

impl<E: SeriesSpace> Operator<E> {
    pub fn linear<F>(name: impl Into<String>, apply: F) -> Self
    where
        F: Fn(&E) -> Result<E> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            apply: Arc::new(apply),
            linear: true,
        }
    }

    pub fn nonlinear<F>(name: impl Into<String>, apply: F) -> Self
    where
        F: Fn(&E) -> Result<E> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            apply: Arc::new(apply),
            linear: false,
        }
    }

    pub fn zero() -> Self {
        Self::linear("0", |u: &E| Ok(u.zero_like()))
    }

    pub fn identity() -> Self {
        Self::linear("id", |u: &E| Ok(u.clone()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_declared_linear(&self) -> bool {
        self.linear
    }

    pub fn apply(&self, u: &E) -> Result<E> {
        (self.apply)(u)
    }

    /// Checks `A(2u + 3v) = 2A(u) + 3A(v)` on random pairs drawn from the space of `probe`.
    pub fn audit_linearity(&self, probe: &E, pairs: usize) -> Result<()> {
        let mut rng = StdRng::seed_from_u64(AUDIT_SEED);
        for _ in 0..pairs {
            let u = probe.sample(&mut rng);
            let v = probe.sample(&mut rng);
            let lhs = self.apply(&u.scaled(2.0).add(&v.scaled(3.0))?)?;
            let rhs = self
                .apply(&u)?
                .scaled(2.0)
                .add(&self.apply(&v)?.scaled(3.0))?;
            if !lhs.approx_eq(&rhs) {
                return Err(Error::NotLinear(self.name.clone()));
            }
        }
        Ok(())
    }
}

/// `u = f1 + f2 + L(u) + N(u)` with `L` audited for linearity at construction.
#[derive(Clone, Debug)]
pub struct IterationProblem<E> {
    f1: E,
    f2: E,
    linear: Operator<E>,
    nonlinear: Operator<E>,
}

impl<E: SeriesSpace> IterationProblem<E> {
    pub fn new(f1: E, f2: E, linear: Operator<E>, nonlinear: Operator<E>) -> Result<Self> {
        if !linear.is_declared_linear() {
            return Err(Error::LinearityRequired(linear.name().to_string()));
        }
        linear.audit_linearity(&f1, LINEARITY_AUDIT_PAIRS)?;
        if nonlinear.is_declared_linear() {
            nonlinear.audit_linearity(&f1, LINEARITY_AUDIT_PAIRS)?;
        }
        // catch f1/f2 from different spaces up front
        f1.add(&f2)?;
        Ok(Self {
            f1,
            f2,
            linear,
            nonlinear,
        })
    }

    /// Plain DJM form: the whole source in `f1`, `f2 = 0`.
    pub fn unsplit(&self) -> Result<Self> {
        Ok(Self {
            f1: self.f1.add(&self.f2)?,
            f2: self.f2.zero_like(),
            linear: self.linear.clone(),
            nonlinear: self.nonlinear.clone(),
        })
    }

    pub fn f1(&self) -> &E {
        &self.f1
    }

    pub fn f2(&self) -> &E {
        &self.f2
    }

    pub fn source(&self) -> Result<E> {
        self.f1.add(&self.f2)
    }

    pub fn linear(&self) -> &Operator<E> {
        &self.linear
    }

    pub fn nonlinear(&self) -> &Operator<E> {
        &self.nonlinear
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Djm,
    Mdjm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Djm => "djm",
            Method::Mdjm => "mdjm",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "djm" => Ok(Method::Djm),
            "mdjm" => Ok(Method::Mdjm),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

/// Truncation control. A fixed term count is the default; the
/// norm-based early stop is opt-in.
#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub terms: usize,
    pub stop_below: Option<f64>,
}

impl SeriesOptions {
    pub fn terms(terms: usize) -> Self {
        Self {
            terms,
            stop_below: None,
        }
    }
}

/// Terms `u_0 … u_(k-1)` and their partial sums.
#[derive(Clone, Debug)]
pub struct SeriesSolution<E> {
    method: Method,
    terms: Vec<E>,
    partial_sums: Vec<E>,
}

impl<E: SeriesSpace> SeriesSolution<E> {
    /// Wraps externally produced terms, recomputing the partial sums.
    pub fn from_terms(method: Method, terms: Vec<E>) -> Result<Self> {
        let first = terms.first().ok_or(Error::NoTerms)?.clone();
        let mut partial_sums = vec![first];
        for u in &terms[1..] {
            let next = partial_sums.last().expect("nonempty").add(u)?;
            partial_sums.push(next);
        }
        Ok(Self {
            method,
            terms,
            partial_sums,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn terms(&self) -> &[E] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> Result<&E> {
        self.terms.get(i).ok_or(Error::Index {
            index: i,
            len: self.terms.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn partial_sums(&self) -> &[E] {
        &self.partial_sums
    }

    /// `S_i = u_0 + … + u_i`.
    pub fn partial_sum(&self, i: usize) -> Result<&E> {
        self.partial_sums.get(i).ok_or(Error::Index {
            index: i,
            len: self.partial_sums.len(),
        })
    }

    /// The full truncated sum.
    pub fn approximation(&self) -> &E {
        self.partial_sums.last().expect("at least one term")
    }
}

/// `G_i` from the partial sums `S_0 … S_i`.
pub fn g_term<E: SeriesSpace>(nonlinear: &Operator<E>, partial_sums: &[E], i: usize) -> Result<E> {
    let current = partial_sums.get(i).ok_or(Error::Index {
        index: i,
        len: partial_sums.len(),
    })?;
    let n_i = nonlinear.apply(current)?;
    if i == 0 {
        return Ok(n_i);
    }
    n_i.sub(&nonlinear.apply(&partial_sums[i - 1])?)
}

pub fn djm_series<E: SeriesSpace>(
    problem: &IterationProblem<E>,
    options: SeriesOptions,
) -> Result<SeriesSolution<E>> {
    if !problem.f2.is_zero() {
        return Err(Error::SplitSource);
    }
    generate(problem, options, Method::Djm)
}

pub fn mdjm_series<E: SeriesSpace>(
    problem: &IterationProblem<E>,
    options: SeriesOptions,
) -> Result<SeriesSolution<E>> {
    generate(problem, options, Method::Mdjm)
}

/// Runs `method` on `problem`; DJM uses the unsplit source.
pub fn series<E: SeriesSpace>(
    problem: &IterationProblem<E>,
    options: SeriesOptions,
    method: Method,
) -> Result<SeriesSolution<E>> {
    match method {
        Method::Djm => djm_series(&problem.unsplit()?, options),
        Method::Mdjm => mdjm_series(problem, options),
    }
}

fn generate<E: SeriesSpace>(
    problem: &IterationProblem<E>,
    options: SeriesOptions,
    method: Method,
) -> Result<SeriesSolution<E>> {
    if options.terms == 0 {
        return Err(Error::NoTerms);
    }
    let u0 = problem.f1.clone();
    let mut terms = vec![u0.clone()];
    let mut partial_sums = vec![u0];
    // N(S_(m-1)) carried over so each step costs one new N application
    let mut previous_n: Option<E> = None;

    for m in 0..options.terms - 1 {
        let n_m = problem.nonlinear.apply(&partial_sums[m])?;
        let g_m = match &previous_n {
            None => n_m.clone(),
            Some(prev) => n_m.sub(prev)?,
        };
        let mut next = problem.linear.apply(&terms[m])?.add(&g_m)?;
        if m == 0 {
            next = problem.f2.add(&next)?;
        }
        let stop = options.stop_below.is_some_and(|tol| next.norm() < tol);
        partial_sums.push(partial_sums[m].add(&next)?);
        terms.push(next);
        previous_n = Some(n_m);
        if stop {
            break;
        }
    }

    Ok(SeriesSolution {
        method,
        terms,
        partial_sums,
    })
}

/// Grid diagnostics for a symbolic series.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub method: Method,
    /// `max over the grid of |u_i|` for each term.
    pub sup_norms: Vec<f64>,
    /// `sup_norms[i + 1] / sup_norms[i]`; `0/0` is reported as 0.
    pub ratios: Vec<f64>,
    /// Per point, `|S_(k-1) - reference|` for `k = 1 … len`, when a reference was given.
    pub errors: Option<Vec<PointErrors>>,
}

#[derive(Clone, Debug)]
pub struct PointErrors {
    pub x: f64,
    pub t: f64,
    pub by_terms: Vec<f64>,
}

impl PointErrors {
    /// True when every additional term lowers the error.
    pub fn strictly_decreasing(&self) -> bool {
        self.by_terms.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn convergence_diagnostics(
    sol: &SeriesSolution<Expr>,
    grid: &[(Real, Real)],
    cfg: &PrecisionConfig,
    reference: Option<&PointFn>,
) -> Result<ConvergenceReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let per_point: Vec<(Vec<f64>, Option<PointErrors>)> = grid
        .par_iter()
        .map(|(x, t)| {
            let term_abs = sol
                .terms()
                .iter()
                .map(|u| u.eval(x, t, cfg).abs().to_f64())
                .collect::<Vec<_>>();
            let errs = reference.map(|r| {
                let exact = r(x, t, cfg);
                let by_terms = sol
                    .partial_sums()
                    .iter()
                    .map(|s| {
                        Real::with_val(cfg.bits(), s.eval(x, t, cfg) - &exact)
                            .abs()
                            .to_f64()
                    })
                    .collect();
                PointErrors {
                    x: x.to_f64(),
                    t: t.to_f64(),
                    by_terms,
                }
            });
            (term_abs, errs)
        })
        .collect();

    let mut sup_norms = vec![0.0f64; sol.len()];
    for (abs, _) in &per_point {
        for (s, v) in sup_norms.iter_mut().zip(abs) {
            *s = s.max(*v);
        }
    }
    let ratios = sup_norms
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (_, 0.0) => 0.0,
            (0.0, _) => f64::INFINITY,
            (d, n) => n / d,
        })
        .collect();
    let errors = reference.map(|_| per_point.into_iter().filter_map(|(_, e)| e).collect());

    Ok(ConvergenceReport {
        method: sol.method(),
        sup_norms,
        ratios,
        errors,
    })
}
