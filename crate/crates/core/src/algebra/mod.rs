//! Closed term algebra over a single phase `θ = a·x + b`.
//!
//! Every expression is a finite sum of monomials `coef · t^k · sech^m(θ) · tanh^n(θ)`.
//! The set is closed under addition, multiplication, x-differentiation
//! (`d sech/dx = -a·sech·tanh`, `d tanh/dx = a·sech²`) and integration in `t`
//! from zero, which is everything the DJM recurrences need.
//!
//! In the canonical form `tanh` powers are reduced to `{0, 1}` with
//! `tanh² = 1 - sech²`, duplicate keys are merged, keys are sorted by
//! `(k, m, n)` and coefficients below the pruning threshold are dropped.

mod calculus;
mod eval;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rug::Assign;

use crate::error::{Error, Result};
use crate::precision::{PrecisionConfig, Real};

pub use eval::PowerCache;

/// `θ = scale·x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Phase {
    pub scale: Real,
    pub offset: Real,
}

impl Phase {
    pub fn new(scale: Real, offset: Real) -> Self {
        Self { scale, offset }
    }

    /// `θ(x)` at `bits` of precision.
    pub fn at(&self, x: &Real, bits: u32) -> Real {
        let mut theta = Real::with_val(bits, &self.scale * x);
        theta += &self.offset;
        theta
    }
}

/// How `tanh` powers are normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TanhPowers {
    /// `tanh^n` with `n >= 2` rewritten through `tanh² = 1 - sech²`.
    #[default]
    Reduced,
    /// Powers kept as produced by the derivative rules. Display form only; two
    /// unreduced expressions can be equal as functions without being equal
    /// term-for-term.
    Unreduced,
}

#[derive(Debug)]
struct Context {
    phase: Phase,
    precision: PrecisionConfig,
    tanh: TanhPowers,
}

/// A shared expression universe: one phase, one working precision, one
/// normal form. All expressions combined arithmetically must come from the
/// same space.
#[derive(Clone, Debug)]
pub struct Space(Arc<Context>);

impl Space {
    pub fn new(phase: Phase, precision: PrecisionConfig) -> Self {
        Self::with_normal_form(phase, precision, TanhPowers::Reduced)
    }

    pub fn with_normal_form(phase: Phase, precision: PrecisionConfig, tanh: TanhPowers) -> Self {
        let bits = precision.bits();
        let phase = Phase::new(
            Real::with_val(bits, &phase.scale),
            Real::with_val(bits, &phase.offset),
        );
        Space(Arc::new(Context {
            phase,
            precision,
            tanh,
        }))
    }

    pub fn phase(&self) -> &Phase {
        &self.0.phase
    }

    pub fn precision(&self) -> &PrecisionConfig {
        &self.0.precision
    }

    pub fn normal_form(&self) -> TanhPowers {
        self.0.tanh
    }

    pub fn bits(&self) -> u32 {
        self.0.precision.bits()
    }

    /// Same phase, precision and normal form.
    pub fn compatible(&self, other: &Space) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.phase == other.0.phase
                && self.bits() == other.bits()
                && self.0.tanh == other.0.tanh)
    }

    /// The same phase and precision under a different normal form.
    pub fn renormalized(&self, tanh: TanhPowers) -> Space {
        Space::with_normal_form(self.0.phase.clone(), self.0.precision.clone(), tanh)
    }

    pub fn zero(&self) -> Expr {
        Expr {
            space: self.clone(),
            terms: Vec::new(),
        }
    }

    pub fn constant(&self, value: Real) -> Expr {
        self.monomial(value, 0, 0, 0)
    }

    /// `coef · t^t_pow · sech^sech_pow · tanh^tanh_pow`, canonicalized.
    pub fn monomial(&self, coef: Real, t_pow: u32, sech_pow: u32, tanh_pow: u32) -> Expr {
        self.from_terms([Monomial::new(coef, t_pow, sech_pow, tanh_pow)])
    }

    pub fn sech(&self) -> Expr {
        self.monomial(self.real(1.0), 0, 1, 0)
    }

    pub fn tanh(&self) -> Expr {
        self.monomial(self.real(1.0), 0, 0, 1)
    }

    pub fn t(&self) -> Expr {
        self.monomial(self.real(1.0), 1, 0, 0)
    }

    pub fn real(&self, value: f64) -> Real {
        Real::with_val(self.bits(), value)
    }

    /// Builds the canonical sum of arbitrary (possibly duplicated or unreduced) terms.
    pub fn from_terms<I>(&self, terms: I) -> Expr
    where
        I: IntoIterator<Item = Monomial>,
    {
        let mut acc = Accumulator::new(self);
        for m in terms {
            acc.push(m.key(), &m.coef);
        }
        acc.finish()
    }

    /// Random expression for property tests and operator audits: up to
    /// `max_terms` monomials with coefficients in `[-1, 1]`, `t` powers up to 3
    /// and `sech` powers up to 6.
    pub fn random_expr<R: Rng + ?Sized>(&self, rng: &mut R, max_terms: usize) -> Expr {
        let count = rng.gen_range(1..=max_terms.max(1));
        let terms = (0..count).map(|_| {
            let coef = rng.gen_range(-1.0..=1.0);
            Monomial::new(
                self.real(coef),
                rng.gen_range(0..=3),
                rng.gen_range(0..=6),
                rng.gen_range(0..=1),
            )
        });
        self.from_terms(terms.collect::<Vec<_>>())
    }
}

/// `coef · t^t · sech^sech · tanh^tanh`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coef: Real,
    pub t: u32,
    pub sech: u32,
    pub tanh: u32,
}

impl Monomial {
    pub fn new(coef: Real, t: u32, sech: u32, tanh: u32) -> Self {
        Self {
            coef,
            t,
            sech,
            tanh,
        }
    }

    pub fn key(&self) -> Key {
        (self.t, self.sech, self.tanh)
    }
}

/// Sort key `(t power, sech power, tanh power)`.
pub type Key = (u32, u32, u32);

/// Canonical sum of monomials over one [`Space`].
#[derive(Clone, Debug)]
pub struct Expr {
    space: Space,
    terms: Vec<Monomial>,
}

impl Expr {
    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, t: u32, sech: u32, tanh: u32) -> Option<&Real> {
        self.terms
            .binary_search_by(|m| m.key().cmp(&(t, sech, tanh)))
            .ok()
            .map(|i| &self.terms[i].coef)
    }

    /// Highest power of `t` present (0 for the zero expression).
    pub fn t_degree(&self) -> u32 {
        self.terms.iter().map(|m| m.t).max().unwrap_or(0)
    }

    /// Re-runs canonicalization. A no-op on anything built through this module.
    pub fn canonicalize(&self) -> Expr {
        self.space.from_terms(self.terms.iter().cloned())
    }

    pub fn add(&self, other: &Expr) -> Result<Expr> {
        self.check(other)?;
        let mut acc = Accumulator::new(&self.space);
        acc.extend(&self.terms);
        acc.extend(&other.terms);
        Ok(acc.finish())
    }

    pub fn sub(&self, other: &Expr) -> Result<Expr> {
        self.check(other)?;
        let mut acc = Accumulator::new(&self.space);
        acc.extend(&self.terms);
        for m in &other.terms {
            let neg = Real::with_val(self.space.bits(), -&m.coef);
            acc.push(m.key(), &neg);
        }
        Ok(acc.finish())
    }

    pub fn scale(&self, factor: &Real) -> Expr {
        let bits = self.space.bits();
        let terms = self
            .terms
            .iter()
            .map(|m| Monomial::new(Real::with_val(bits, &m.coef * factor), m.t, m.sech, m.tanh));
        self.space.from_terms(terms.collect::<Vec<_>>())
    }

    pub fn scale_f64(&self, factor: f64) -> Expr {
        self.scale(&self.space.real(factor))
    }

    pub fn neg(&self) -> Expr {
        let bits = self.space.bits();
        Expr {
            space: self.space.clone(),
            terms: self
                .terms
                .iter()
                .map(|m| Monomial::new(Real::with_val(bits, -&m.coef), m.t, m.sech, m.tanh))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Expr) -> Result<Expr> {
        self.check(other)?;
        let bits = self.space.bits();
        let mut acc = Accumulator::new(&self.space);
        let mut prod = Real::new(bits);
        for a in &self.terms {
            for b in &other.terms {
                prod.assign(&a.coef * &b.coef);
                acc.push((a.t + b.t, a.sech + b.sech, a.tanh + b.tanh), &prod);
            }
        }
        Ok(acc.finish())
    }

    pub fn square(&self) -> Expr {
        self.mul(self).expect("same space")
    }

    /// Largest absolute coefficient (0 for the zero expression).
    pub fn max_abs_coef(&self) -> Real {
        let mut best = Real::new(self.space.bits());
        for m in &self.terms {
            let a = Real::with_val(self.space.bits(), m.coef.abs_ref());
            if a > best {
                best = a;
            }
        }
        best
    }

    /// Same keys and every coefficient within `tol · max(1, |coef|)`.
    pub fn approx_eq(&self, other: &Expr, tol: &Real) -> bool {
        if !self.space.compatible(&other.space) || self.terms.len() != other.terms.len() {
            return false;
        }
        self.terms.iter().zip(&other.terms).all(|(a, b)| {
            if a.key() != b.key() {
                return false;
            }
            let bits = self.space.bits();
            let diff = Real::with_val(bits, &a.coef - &b.coef).abs();
            let mut scale = Real::with_val(bits, a.coef.abs_ref());
            if scale < 1 {
                scale = Real::with_val(bits, 1);
            }
            diff <= Real::with_val(bits, tol * &scale)
        })
    }

    /// Bitwise equal keys and coefficients.
    pub fn identical(&self, other: &Expr) -> bool {
        self.space.compatible(&other.space) && self.terms == other.terms
    }

    /// The same function re-expressed under another normal form of the same phase.
    pub fn in_space(&self, space: &Space) -> Result<Expr> {
        if self.space.phase() != space.phase() {
            return Err(Error::PhaseMismatch);
        }
        let bits = space.bits();
        Ok(space.from_terms(
            self.terms
                .iter()
                .map(|m| Monomial::new(Real::with_val(bits, &m.coef), m.t, m.sech, m.tanh))
                .collect::<Vec<_>>(),
        ))
    }

    fn check(&self, other: &Expr) -> Result<()> {
        if self.space.compatible(&other.space) {
            Ok(())
        } else {
            Err(Error::PhaseMismatch)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(16))
    }
}

/// Merges terms by key, applying tanh reduction and pruning on `finish`.
struct Accumulator<'a> {
    space: &'a Space,
    map: BTreeMap<Key, Real>,
}

impl<'a> Accumulator<'a> {
    fn new(space: &'a Space) -> Self {
        Self {
            space,
            map: BTreeMap::new(),
        }
    }

    fn extend(&mut self, terms: &[Monomial]) {
        for m in terms {
            self.push(m.key(), &m.coef);
        }
    }

    fn push(&mut self, key: Key, coef: &Real) {
        let (t, sech, tanh) = key;
        if tanh >= 2 && self.space.normal_form() == TanhPowers::Reduced {
            // tanh^n = tanh^(n mod 2) · (1 - sech²)^(n / 2), expanded binomially
            let half = tanh / 2;
            let odd = tanh % 2;
            let bits = self.space.bits();
            let mut binom = Real::with_val(bits, 1);
            for j in 0..=half {
                let mut c = Real::with_val(bits, coef * &binom);
                if j % 2 == 1 {
                    c = -c;
                }
                self.add_raw((t, sech + 2 * j, odd), &c);
                binom *= half - j;
                binom /= j + 1;
            }
        } else {
            self.add_raw(key, coef);
        }
    }

    fn add_raw(&mut self, key: Key, coef: &Real) {
        match self.map.get_mut(&key) {
            Some(acc) => *acc += coef,
            None => {
                self.map
                    .insert(key, Real::with_val(self.space.bits(), coef));
            }
        }
    }

    fn finish(self) -> Expr {
        let threshold = self.space.precision().prune_threshold();
        let terms = self
            .map
            .into_iter()
            .filter(|(_, c)| !c.is_zero() && c.cmp_abs(threshold) != Some(Ordering::Less))
            .map(|((t, sech, tanh), coef)| Monomial::new(coef, t, sech, tanh))
            .collect();
        Expr {
            space: self.space.clone(),
            terms,
        }
    }
}
