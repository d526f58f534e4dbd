//! Point evaluators `(x, t) ↦ u(x, t)` shared by references, oracles and tables.

use std::sync::Arc;

use crate::algebra::Expr;
use crate::precision::{PrecisionConfig, Real};

pub type PointFn = Arc<dyn Fn(&Real, &Real, &PrecisionConfig) -> Real + Send + Sync>;

/// Wraps a symbolic expression as a point evaluator.
pub fn expr_fn(expr: &Expr) -> PointFn {
    let expr = expr.clone();
    Arc::new(move |x, t, cfg| expr.eval(x, t, cfg))
}

pub fn zero_fn() -> PointFn {
    Arc::new(|_, _, cfg| Real::new(cfg.bits()))
}
