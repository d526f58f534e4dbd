//! Gauss–Legendre quadrature at working precision.

use std::f64::consts::PI;

use crate::precision::Real;

/// Nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<Real>,
    weights: Vec<Real>,
}

impl GaussLegendre {
    pub fn new(n: usize, bits: u32) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let tol = Real::with_val(bits, Real::i_exp(1, -(bits as i32) + 8));
        for i in 0..n {
            let guess = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = Real::with_val(bits, guess);
            let deriv = loop {
                let (p, dp) = legendre(n, &x, bits);
                let step = Real::with_val(bits, &p / &dp);
                x -= &step;
                if step.abs() <= tol {
                    break legendre(n, &x, bits).1;
                }
            };
            let one_minus = Real::with_val(bits, 1 - Real::with_val(bits, x.square_ref()));
            let w =
                Real::with_val(bits, 2) / (one_minus * Real::with_val(bits, deriv.square_ref()));
            nodes.push(x);
            weights.push(w);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: Fn(&Real) -> Real>(&self, f: F, a: &Real, b: &Real, bits: u32) -> Real {
        let half = Real::with_val(bits, b - a) / 2u32;
        let mid = Real::with_val(bits, b + a) / 2u32;
        let mut acc = Real::new(bits);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let at = Real::with_val(bits, &mid + Real::with_val(bits, &half * x));
            acc += Real::with_val(bits, w * f(&at));
        }
        acc * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Real, bits: u32) -> (Real, Real) {
    let mut p0 = Real::with_val(bits, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let a = Real::with_val(bits, x * &p1) * (2 * k - 1) as u32;
        let b = Real::with_val(bits, &p0 * (k - 1) as u32);
        let p2 = (a - b) / k as u32;
        p0 = p1;
        p1 = p2;
    }
    // (1 - x²) P_n' = n (P_(n-1) - x P_n)
    let num = Real::with_val(bits, &p0 - Real::with_val(bits, x * &p1)) * n as u32;
    let den = Real::with_val(bits, 1 - Real::with_val(bits, x.square_ref()));
    (p1, num / den)
}

/// Result of an order-doubling quadrature.
#[derive(Clone, Debug)]
pub struct QuadratureEstimate {
    pub value: Real,
    /// `|Q_2n - Q_n|` at the accepted order.
    pub error: Real,
    pub nodes: usize,
}

/// Doubles the Gauss–Legendre order from `start` until successive results
/// agree to `tol` (absolute) or `max_nodes` is reached.
pub fn integrate_adaptive<F: Fn(&Real) -> Real>(
    f: F,
    a: &Real,
    b: &Real,
    tol: &Real,
    start: usize,
    max_nodes: usize,
    bits: u32,
) -> QuadratureEstimate {
    let mut n = start.max(1);
    let mut prev = GaussLegendre::new(n, bits).integrate(&f, a, b, bits);
    loop {
        let m = n * 2;
        let next = GaussLegendre::new(m, bits).integrate(&f, a, b, bits);
        let error = Real::with_val(bits, &next - &prev).abs();
        if error <= *tol || m >= max_nodes {
            return QuadratureEstimate {
                value: next,
                error,
                nodes: m,
            };
        }
        prev = next;
        n = m;
    }
}
