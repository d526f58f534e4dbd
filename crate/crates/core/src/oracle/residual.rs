//! Finite-difference residual of `u_tt + p·u_xx + q·(u²)_xx + r·u_xxxx`.

use rayon::prelude::*;

use super::fd::{CentralStencil, FD_ORDER};
use crate::boussinesq::BoussinesqParams;
use crate::pointwise::PointFn;
use crate::precision::{PrecisionConfig, Real};

/// Multiplier applied to the summed stencil error budgets.
pub const FLOOR_SAFETY: u32 = 4;

/// Rounding level of spectral evaluators, in units of `f64::EPSILON` times the amplitude.
pub const SPECTRAL_NOISE_ULPS: f64 = 16.0;

/// Steps and sample-noise level for the difference quotients.
#[derive(Clone, Debug)]
pub struct ResidualPolicy {
    pub h_x: Real,
    pub h_t: Real,
    /// Relative noise of the evaluator's output.
    pub noise: Real,
    /// Magnitude the noise is relative to; `None` uses the local sample size.
    pub noise_scale: Option<Real>,
}

impl ResidualPolicy {
    /// `h = 10^(-digits/10)` in both variables, for full-precision evaluators.
    pub fn for_precision(cfg: &PrecisionConfig) -> Self {
        let h = cfg.pow10(-((cfg.digits() / 10) as i32));
        Self {
            h_x: h.clone(),
            h_t: h,
            noise: cfg.pow10(-(cfg.digits() as i32)),
            noise_scale: None,
        }
    }

    /// Steps for double-precision spectral evaluators. Their rounding comes from
    /// summing every mode, so it tracks the wave `amplitude`, not the local value;
    /// measured second differences put it near 12 ulps of the amplitude.
    pub fn double_precision(cfg: &PrecisionConfig, amplitude: &Real) -> Self {
        Self {
            h_x: cfg.real(0.02),
            h_t: cfg.real(0.005),
            noise: cfg.real(SPECTRAL_NOISE_ULPS * f64::EPSILON),
            noise_scale: Some(Real::with_val(cfg.bits(), amplitude.abs_ref())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidualPoint {
    pub x: Real,
    pub t: Real,
    pub residual: Real,
    /// Estimated truncation plus roundoff bound of the difference quotients.
    pub floor: Real,
}

impl ResidualPoint {
    pub fn below_floor(&self) -> bool {
        self.residual.cmp_abs(&self.floor) != Some(std::cmp::Ordering::Greater)
    }

    /// Human-readable verdict, reporting the floor instead of an unresolvable value.
    pub fn verdict(&self) -> String {
        if self.below_floor() {
            format!("residual <= FD floor ({:.3e})", self.floor.to_f64())
        } else {
            format!("{:.6e}", self.residual.to_f64())
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub points: Vec<ResidualPoint>,
    pub h_x: Real,
    pub h_t: Real,
}

impl ResidualReport {
    pub fn max_abs(&self) -> Real {
        max_of(self.points.iter().map(|p| &p.residual))
    }

    pub fn max_floor(&self) -> Real {
        max_of(self.points.iter().map(|p| &p.floor))
    }

    pub fn all_below_floor(&self) -> bool {
        self.points.iter().all(ResidualPoint::below_floor)
    }

    /// Every residual is under `tol` and every floor is too, so the check could resolve it.
    pub fn all_below(&self, tol: &Real) -> bool {
        self.max_abs() < *tol && self.max_floor() < *tol
    }
}

fn max_of<'a>(values: impl Iterator<Item = &'a Real>) -> Real {
    let mut best = Real::new(64);
    for v in values {
        if v.cmp_abs(&best) == Some(std::cmp::Ordering::Greater) {
            best = Real::with_val(v.prec(), v.abs_ref());
        }
    }
    best
}

pub fn pde_residual(
    u: &PointFn,
    params: &BoussinesqParams,
    points: &[(Real, Real)],
    cfg: &PrecisionConfig,
) -> ResidualReport {
    pde_residual_with(u, params, points, cfg, &ResidualPolicy::for_precision(cfg))
}

pub fn pde_residual_with(
    u: &PointFn,
    params: &BoussinesqParams,
    points: &[(Real, Real)],
    cfg: &PrecisionConfig,
    policy: &ResidualPolicy,
) -> ResidualReport {
    let bits = cfg.bits();
    let d2 = CentralStencil::new(2, FD_ORDER, bits);
    let d4 = CentralStencil::new(4, FD_ORDER, bits);
    let points = points
        .par_iter()
        .map(|(x, t)| {
            let in_t = |s: &Real| u(x, s, cfg);
            let in_x = |y: &Real| u(y, t, cfg);
            let sq_x = |y: &Real| Real::with_val(bits, u(y, t, cfg).square_ref());
            // δ(u²) ≈ 2|u|δu, so squared samples see twice the scale squared
            let scale = policy.noise_scale.as_ref();
            let sq_scale = scale.map(|s| Real::with_val(bits, s.square_ref()) * 2u32);
            let noise = &policy.noise;
            let tt = d2.estimate_scaled(in_t, t, &policy.h_t, noise, scale, bits);
            let xx = d2.estimate_scaled(in_x, x, &policy.h_x, noise, scale, bits);
            let sq = d2.estimate_scaled(sq_x, x, &policy.h_x, noise, sq_scale.as_ref(), bits);
            let x4 = d4.estimate_scaled(in_x, x, &policy.h_x, noise, scale, bits);

            let mut residual = tt.value.clone();
            residual += Real::with_val(bits, params.p() * &xx.value);
            residual += Real::with_val(bits, params.q() * &sq.value);
            residual += Real::with_val(bits, params.r() * &x4.value);

            let mut floor = tt.floor();
            floor += Real::with_val(bits, params.p().abs_ref()) * xx.floor();
            floor += Real::with_val(bits, params.q().abs_ref()) * sq.floor();
            floor += Real::with_val(bits, params.r().abs_ref()) * x4.floor();
            floor *= FLOOR_SAFETY;
            ResidualPoint {
                x: x.clone(),
                t: t.clone(),
                residual,
                floor,
            }
        })
        .collect();
    ResidualReport {
        points,
        h_x: policy.h_x.clone(),
        h_t: policy.h_t.clone(),
    }
}
