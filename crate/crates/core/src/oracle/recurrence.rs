//! Numeric re-derivation of `u_(m+1) = [m = 0]·f2 + L(u_m) + G_m` for Boussinesq problems.
//!
//! Spatial derivatives come from finite differences of point evaluations and the
//! double time integral from `∫_0^t (t - σ) g(σ) dσ` by Gauss–Legendre quadrature.

use rayon::prelude::*;

use super::fd::{CentralStencil, FdEstimate, FD_ORDER};
use super::quadrature::integrate_adaptive;
use super::residual::{ResidualPolicy, FLOOR_SAFETY};
use crate::algebra::{Expr, Monomial};
use crate::boussinesq::BoussinesqProblem;
use crate::error::{Error, Result};
use crate::iterate::SeriesSolution;
use crate::precision::{PrecisionConfig, Real};

#[derive(Clone, Debug)]
pub struct RecurrencePoint {
    pub x: Real,
    pub t: Real,
    pub symbolic: Real,
    pub numeric: Real,
    /// Absolute error budget of `numeric`.
    pub floor: Real,
}

#[derive(Clone, Debug)]
pub struct RecurrenceReport {
    pub m: usize,
    pub points: Vec<RecurrencePoint>,
    /// `max |symbolic - numeric| / max |symbolic|`.
    pub max_deviation: f64,
    /// `max floor / max |symbolic|`.
    pub floor: f64,
}

impl RecurrenceReport {
    pub fn passes(&self) -> bool {
        self.max_deviation <= self.floor
    }
}

fn largest(values: impl Iterator<Item = Real>, bits: u32) -> Real {
    values.fold(Real::new(bits), |acc, v| if v > acc { v } else { acc })
}

pub fn verify_term_recurrence(
    sol: &SeriesSolution<Expr>,
    problem: &BoussinesqProblem,
    m: usize,
    points: &[(Real, Real)],
    cfg: &PrecisionConfig,
) -> Result<RecurrenceReport> {
    if m + 1 >= sol.len() {
        return Err(Error::Index {
            index: m + 1,
            len: sol.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let bits = cfg.bits();
    let policy = ResidualPolicy::for_precision(cfg);
    let d2 = CentralStencil::new(2, FD_ORDER, bits);
    let d4 = CentralStencil::new(4, FD_ORDER, bits);
    let params = problem.params();
    let um = sol.term(m)?;
    let next = sol.term(m + 1)?;
    let sm = sol.partial_sum(m)?;
    let prev = if m > 0 {
        Some(sol.partial_sum(m - 1)?)
    } else {
        None
    };
    let quad_tol = cfg.pow10(-((cfg.digits() / 2) as i32));

    // g(x, σ) = -p·(u_m)_xx - r·(u_m)_xxxx - q·((S_m)² - (S_(m-1))²)_xx, with its FD budget
    let g = |x: &Real, s: &Real| -> (Real, Real) {
        let eval_sq = |e: &Expr, y: &Real| Real::with_val(bits, e.eval(y, s, cfg).square_ref());
        let along = |e: &Expr, y: &Real| e.eval(y, s, cfg);
        let uxx: FdEstimate =
            d2.estimate(|y: &Real| along(um, y), x, &policy.h_x, &policy.noise, bits);
        let uxxxx = d4.estimate(|y: &Real| along(um, y), x, &policy.h_x, &policy.noise, bits);
        let sq = d2.estimate(
            |y: &Real| {
                let now = eval_sq(sm, y);
                match prev {
                    Some(p) => now - eval_sq(p, y),
                    None => now,
                }
            },
            x,
            &policy.h_x,
            &policy.noise,
            bits,
        );
        let mut value = Real::with_val(bits, params.p() * &uxx.value);
        value += Real::with_val(bits, params.r() * &uxxxx.value);
        value += Real::with_val(bits, params.q() * &sq.value);
        let mut floor = Real::with_val(bits, params.p().abs_ref()) * uxx.floor();
        floor += Real::with_val(bits, params.r().abs_ref()) * uxxxx.floor();
        floor += Real::with_val(bits, params.q().abs_ref()) * sq.floor();
        (-value, floor)
    };

    let pts: Vec<RecurrencePoint> = points
        .par_iter()
        .map(|(x, t)| {
            let zero = Real::new(bits);
            let kernel = |s: &Real| Real::with_val(bits, t - s);
            let integral = integrate_adaptive(
                |s: &Real| kernel(s) * g(x, s).0,
                &zero,
                t,
                &quad_tol,
                8,
                64,
                bits,
            );
            // FD budget of g is smooth in σ; bound it by its largest value on a few nodes
            let fd_floor = largest(
                (0..=4).map(|i| {
                    let s = Real::with_val(bits, t * i) / 4u32;
                    g(x, &s).1
                }),
                bits,
            ) * Real::with_val(bits, t.square_ref())
                / 2u32;
            let mut numeric = integral.value;
            if m == 0 {
                numeric += problem.iteration().f2().eval(x, t, cfg);
            }
            let floor = (fd_floor + integral.error) * FLOOR_SAFETY;
            RecurrencePoint {
                x: x.clone(),
                t: t.clone(),
                symbolic: next.eval(x, t, cfg),
                numeric,
                floor,
            }
        })
        .collect();

    let scale = largest(
        pts.iter()
            .map(|p| Real::with_val(bits, p.symbolic.abs_ref())),
        bits,
    );
    let worst = largest(
        pts.iter()
            .map(|p| Real::with_val(bits, &p.symbolic - &p.numeric).abs()),
        bits,
    );
    let floor = largest(pts.iter().map(|p| p.floor.clone()), bits);
    let (max_deviation, floor) = if scale.is_zero() {
        (worst.to_f64(), floor.to_f64())
    } else {
        ((worst / &scale).to_f64(), (floor / &scale).to_f64())
    };
    Ok(RecurrenceReport {
        m,
        points: pts,
        max_deviation,
        floor,
    })
}

/// Copy of `e` with its largest-magnitude coefficient scaled by `1 + relative`.
pub fn perturb_dominant_coefficient(e: &Expr, relative: f64) -> Expr {
    let bits = e.space().bits();
    let idx = e
        .terms()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.coef.cmp_abs(&b.1.coef).expect("finite coefficients"))
        .map(|(i, _)| i);
    let terms = e.terms().iter().enumerate().map(|(i, mono)| {
        if Some(i) == idx {
            let factor = Real::with_val(bits, 1) + relative;
            Monomial::new(
                Real::with_val(bits, &mono.coef * factor),
                mono.t,
                mono.sech,
                mono.tanh,
            )
        } else {
            mono.clone()
        }
    });
    e.space().from_terms(terms.collect::<Vec<_>>())
}
