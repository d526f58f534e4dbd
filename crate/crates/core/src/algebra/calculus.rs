use super::{Expr, Monomial};
use crate::precision::Real;

impl Expr {
    /// Exact x-derivative:
    /// `t^k s^m τ^n ↦ a·t^k (-m s^m τ^(n+1) + n s^(m+2) τ^(n-1))`.
    pub fn diff_x(&self) -> Expr {
        let bits = self.space.bits();
        let a = &self.space.phase().scale;
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for m in &self.terms {
            let base = Real::with_val(bits, &m.coef * a);
            if m.sech > 0 {
                let c = Real::with_val(bits, &base * m.sech);
                out.push(Monomial::new(-c, m.t, m.sech, m.tanh + 1));
            }
            if m.tanh > 0 {
                let c = Real::with_val(bits, &base * m.tanh);
                out.push(Monomial::new(c, m.t, m.sech + 2, m.tanh - 1));
            }
        }
        self.space.from_terms(out)
    }

    /// `n`-fold x-derivative.
    pub fn diff_x_n(&self, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff_x())
    }

    /// `t^k ↦ k·t^(k-1)`.
    pub fn diff_t(&self) -> Expr {
        let bits = self.space.bits();
        let out =
            self.terms.iter().filter(|m| m.t > 0).map(|m| {
                Monomial::new(Real::with_val(bits, &m.coef * m.t), m.t - 1, m.sech, m.tanh)
            });
        self.space.from_terms(out.collect::<Vec<_>>())
    }

    /// `∫₀ᵗ e dσ`: `t^k ↦ t^(k+1)/(k+1)`.
    pub fn integral_t(&self) -> Expr {
        let bits = self.space.bits();
        let out = self.terms.iter().map(|m| {
            Monomial::new(
                Real::with_val(bits, &m.coef / (m.t + 1)),
                m.t + 1,
                m.sech,
                m.tanh,
            )
        });
        self.space.from_terms(out.collect::<Vec<_>>())
    }

    /// `∫₀ᵗ∫₀^σ e dσ' dσ`: `t^k ↦ t^(k+2)/((k+1)(k+2))`.
    pub fn double_integral_t(&self) -> Expr {
        let bits = self.space.bits();
        let out = self.terms.iter().map(|m| {
            let denom = (u64::from(m.t) + 1) * (u64::from(m.t) + 2);
            Monomial::new(
                Real::with_val(bits, &m.coef / denom),
                m.t + 2,
                m.sech,
                m.tanh,
            )
        });
        self.space.from_terms(out.collect::<Vec<_>>())
    }

    /// The `t^k` slice, with `t` removed: `Σ coef · s^m τ^n` over terms with `t` power `k`.
    pub fn t_coefficient(&self, k: u32) -> Expr {
        let out = self
            .terms
            .iter()
            .filter(|m| m.t == k)
            .map(|m| Monomial::new(m.coef.clone(), 0, m.sech, m.tanh));
        self.space.from_terms(out.collect::<Vec<_>>())
    }
}
