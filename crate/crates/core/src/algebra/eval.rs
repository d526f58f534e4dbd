use rug::Assign;

use super::{Expr, Phase};
use crate::precision::{PrecisionConfig, Real};

/// Powers of `t`, `sech θ` and `tanh θ` at one point, reusable across expressions.
#[derive(Clone, Debug)]
pub struct PowerCache {
    bits: u32,
    t: Vec<Real>,
    sech: Vec<Real>,
    tanh: Vec<Real>,
}

impl PowerCache {
    pub fn new(phase: &Phase, x: &Real, t: &Real, cfg: &PrecisionConfig) -> Self {
        let bits = cfg.bits();
        let theta = phase.at(x, bits);
        let sech = Real::with_val(bits, theta.sech_ref());
        let tanh = Real::with_val(bits, theta.tanh_ref());
        Self {
            bits,
            t: vec![Real::with_val(bits, 1), Real::with_val(bits, t)],
            sech: vec![Real::with_val(bits, 1), sech],
            tanh: vec![Real::with_val(bits, 1), tanh],
        }
    }

    fn ensure(table: &mut Vec<Real>, n: usize, bits: u32) {
        while table.len() <= n {
            let next = Real::with_val(bits, &table[table.len() - 1] * &table[1]);
            table.push(next);
        }
    }

    fn reserve(&mut self, expr: &Expr) {
        for m in expr.terms() {
            Self::ensure(&mut self.t, m.t as usize, self.bits);
            Self::ensure(&mut self.sech, m.sech as usize, self.bits);
            Self::ensure(&mut self.tanh, m.tanh as usize, self.bits);
        }
    }

    pub fn eval(&mut self, expr: &Expr) -> Real {
        self.reserve(expr);
        let mut sum = Real::new(self.bits);
        let mut term = Real::new(self.bits);
        for m in expr.terms() {
            term.assign(&m.coef);
            term *= &self.t[m.t as usize];
            term *= &self.sech[m.sech as usize];
            term *= &self.tanh[m.tanh as usize];
            sum += &term;
        }
        sum
    }
}

impl Expr {
    /// `Σ coef · t^k · sech^m(θ) · tanh^n(θ)` at `(x, t)` with `cfg` working precision.
    pub fn eval(&self, x: &Real, t: &Real, cfg: &PrecisionConfig) -> Real {
        PowerCache::new(self.space.phase(), x, t, cfg).eval(self)
    }

    pub fn eval_f64(&self, x: f64, t: f64, cfg: &PrecisionConfig) -> Real {
        self.eval(&cfg.real(x), &cfg.real(t), cfg)
    }

    /// Human-readable rendering with `sig` significant digits per coefficient.
    pub fn render(&self, sig: usize) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, m) in self.terms.iter().enumerate() {
            let neg = m.coef.is_sign_negative();
            let mag = m.coef.as_abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&format!("{:.*e}", sig.max(1), *mag));
            for (sym, p) in [("t", m.t), ("sech", m.sech), ("tanh", m.tanh)] {
                match p {
                    0 => {}
                    1 => out.push_str(&format!("·{sym}")),
                    _ => out.push_str(&format!("·{sym}^{p}")),
                }
            }
        }
        out
    }
}
