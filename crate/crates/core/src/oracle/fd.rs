//! Central finite-difference stencils with Fornberg weights at working precision.

use rug::ops::Pow;

use crate::precision::Real;

/// Order of accuracy of every stencil used by the oracle.
pub const FD_ORDER: usize = 6;

/// Fornberg weights on nodes `xs` around `z` for derivatives `0..=max_deriv`.
///
/// Returns `w[d][j]`, the weight of node `j` in the `d`-th derivative.
pub fn fornberg_weights(z: &Real, xs: &[Real], max_deriv: usize, bits: u32) -> Vec<Vec<Real>> {
    let n = xs.len();
    let zero = || Real::new(bits);
    let mut c = vec![vec![zero(); max_deriv + 1]; n];
    let mut c1 = Real::with_val(bits, 1);
    let mut c4 = Real::with_val(bits, &xs[0] - z);
    c[0][0] = Real::with_val(bits, 1);
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = Real::with_val(bits, 1);
        let c5 = c4.clone();
        c4 = Real::with_val(bits, &xs[i] - z);
        for j in 0..i {
            let c3 = Real::with_val(bits, &xs[i] - &xs[j]);
            c2 *= &c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let a = Real::with_val(bits, &c[i - 1][k - 1] * k as u32);
                    let b = Real::with_val(bits, &c5 * &c[i - 1][k]);
                    c[i][k] = Real::with_val(bits, &c1 * (a - b)) / &c2;
                }
                c[i][0] = -Real::with_val(bits, &c1 * &c5) * &c[i - 1][0] / &c2;
            }
            for k in (1..=mn).rev() {
                let a = Real::with_val(bits, &c4 * &c[j][k]);
                let b = Real::with_val(bits, &c[j][k - 1] * k as u32);
                c[j][k] = (a - b) / &c3;
            }
            c[j][0] = Real::with_val(bits, &c4 * &c[j][0]) / &c3;
        }
        c1 = c2;
    }
    (0..=max_deriv)
        .map(|d| c.iter().map(|row| row[d].clone()).collect())
        .collect()
}

/// A symmetric stencil on integer offsets `-half..=half` for one derivative.
#[derive(Clone, Debug)]
pub struct CentralStencil {
    derivative: usize,
    offsets: Vec<i32>,
    weights: Vec<Real>,
}

/// A derivative value with its error budget.
#[derive(Clone, Debug)]
pub struct FdEstimate {
    pub value: Real,
    /// Richardson estimate from steps `h` and `2h`.
    pub truncation: Real,
    /// Relative noise of the samples amplified by the stencil.
    pub roundoff: Real,
}

impl FdEstimate {
    pub fn floor(&self) -> Real {
        Real::with_val(self.value.prec(), &self.truncation + &self.roundoff)
    }
}

impl CentralStencil {
    /// Smallest central stencil with the requested accuracy order.
    pub fn new(derivative: usize, order: usize, bits: u32) -> Self {
        assert!(derivative >= 1 && order.is_multiple_of(2));
        let half = (derivative.div_ceil(2) - 1 + order / 2) as i32;
        let offsets: Vec<i32> = (-half..=half).collect();
        let nodes: Vec<Real> = offsets.iter().map(|&o| Real::with_val(bits, o)).collect();
        let weights =
            fornberg_weights(&Real::new(bits), &nodes, derivative, bits).swap_remove(derivative);
        Self {
            derivative,
            offsets,
            weights,
        }
    }

    pub fn derivative(&self) -> usize {
        self.derivative
    }

    pub fn offsets(&self) -> &[i32] {
        &self.offsets
    }

    pub fn weights(&self) -> &[Real] {
        &self.weights
    }

    fn combine(&self, samples: &[Real], h: &Real, bits: u32) -> Real {
        let mut acc = Real::new(bits);
        for (w, f) in self.weights.iter().zip(samples) {
            acc += Real::with_val(bits, w * f);
        }
        let hd = Real::with_val(bits, h.pow(self.derivative as u32));
        acc / hd
    }

    fn samples<F: Fn(&Real) -> Real>(&self, f: &F, x: &Real, h: &Real, bits: u32) -> Vec<Real> {
        self.offsets
            .iter()
            .map(|&o| f(&Real::with_val(bits, x + Real::with_val(bits, h * o))))
            .collect()
    }

    /// Plain stencil application with step `h`.
    pub fn apply<F: Fn(&Real) -> Real>(&self, f: F, x: &Real, h: &Real, bits: u32) -> Real {
        let s = self.samples(&f, x, h, bits);
        self.combine(&s, h, bits)
    }

    /// Stencil value at `h` with a Richardson (`h` vs `2h`) truncation estimate and a
    /// roundoff estimate for sample noise of relative size `noise`.
    pub fn estimate<F: Fn(&Real) -> Real>(
        &self,
        f: F,
        x: &Real,
        h: &Real,
        noise: &Real,
        bits: u32,
    ) -> FdEstimate {
        self.estimate_scaled(f, x, h, noise, None, bits)
    }

    /// As [`estimate`](Self::estimate), with the noise measured against a fixed
    /// magnitude `scale` instead of the largest sample.
    pub fn estimate_scaled<F: Fn(&Real) -> Real>(
        &self,
        f: F,
        x: &Real,
        h: &Real,
        noise: &Real,
        scale: Option<&Real>,
        bits: u32,
    ) -> FdEstimate {
        let fine = self.samples(&f, x, h, bits);
        let h2 = Real::with_val(bits, h * 2u32);
        let coarse = self.samples(&f, x, &h2, bits);
        let value = self.combine(&fine, h, bits);
        let coarse_value = self.combine(&coarse, &h2, bits);
        let richardson_den = (1u64 << FD_ORDER) - 1;
        let truncation = Real::with_val(bits, &value - &coarse_value).abs() / richardson_den;
        let mut weight_sum = Real::new(bits);
        for w in &self.weights {
            weight_sum += Real::with_val(bits, w.abs_ref());
        }
        let scale = match scale {
            Some(s) => Real::with_val(bits, s.abs_ref()),
            None => {
                let mut largest = Real::new(bits);
                for s in &fine {
                    if s.cmp_abs(&largest) == Some(std::cmp::Ordering::Greater) {
                        largest = Real::with_val(bits, s.abs_ref());
                    }
                }
                largest
            }
        };
        let hd = Real::with_val(bits, h.pow(self.derivative as u32));
        let roundoff = Real::with_val(bits, noise * &scale) * weight_sum / hd;
        FdEstimate {
            value,
            truncation,
            roundoff,
        }
    }
}
