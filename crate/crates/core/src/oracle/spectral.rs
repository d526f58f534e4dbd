//! Double-precision pseudo-spectral integrator for
//! `u_tt = -p·u_xx - r·u_xxxx - q·(u²)_xx` on a periodic window.
//!
//! The linear part is propagated exactly per Fourier mode (integrating factor),
//! the nonlinear part by classical RK4 in the rotated frame (Lawson RK4). Modes
//! above the dealiasing fraction of the grid's Nyquist wavenumber are zeroed.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::boussinesq::BoussinesqParams;
use crate::error::{Error, Result};
use crate::pointwise::PointFn;
use crate::precision::{PrecisionConfig, Real};

#[derive(Clone, Debug)]
pub struct SpectralConfig {
    /// The window is `[-half_width, half_width)`.
    pub half_width: f64,
    pub modes: usize,
    pub dt: f64,
    /// Fraction of the Nyquist wavenumber kept after each step.
    pub dealias: f64,
    /// Abort when the largest Fourier amplitude grows by more than this factor.
    pub growth_limit: f64,
    /// Steps between stored states.
    pub snapshot_stride: usize,
    pub max_t_end: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            half_width: 64.0,
            modes: 2048,
            dt: 1e-3,
            dealias: 2.0 / 3.0,
            growth_limit: 1e3,
            snapshot_stride: 10,
            max_t_end: 1.0,
        }
    }
}

type Spectrum = Vec<Complex64>;

#[derive(Clone)]
struct State {
    u: Spectrum,
    v: Spectrum,
}

struct Propagator {
    // [[a, b], [c, d]] per mode
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

struct Solver {
    config: SpectralConfig,
    q: f64,
    k: Vec<f64>,
    lambda: Vec<f64>,
    keep: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Solver {
    fn propagator(&self, tau: f64) -> Propagator {
        let n = self.k.len();
        let mut p = Propagator {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
            d: vec![0.0; n],
        };
        for (j, &lam) in self.lambda.iter().enumerate() {
            let (a, b, c, d) = if lam < 0.0 {
                let w = (-lam).sqrt();
                let (s, co) = (w * tau).sin_cos();
                (co, s / w, -w * s, co)
            } else if lam > 0.0 {
                let m = lam.sqrt();
                let (s, co) = ((m * tau).sinh(), (m * tau).cosh());
                (co, s / m, m * s, co)
            } else {
                (1.0, tau, 0.0, 1.0)
            };
            p.a[j] = a;
            p.b[j] = b;
            p.c[j] = c;
            p.d[j] = d;
        }
        p
    }

    fn propagate(&self, p: &Propagator, y: &State) -> State {
        let n = y.u.len();
        let mut u = vec![Complex64::default(); n];
        let mut v = vec![Complex64::default(); n];
        for j in 0..n {
            u[j] = y.u[j] * p.a[j] + y.v[j] * p.b[j];
            v[j] = y.u[j] * p.c[j] + y.v[j] * p.d[j];
        }
        State { u, v }
    }

    /// `(0, q·k²·FFT(u²))`, truncated to the kept modes.
    fn forcing(&self, y: &State) -> State {
        let n = y.u.len();
        let mut phys = y.u.clone();
        self.inverse.process(&mut phys);
        let scale = 1.0 / n as f64;
        for z in phys.iter_mut() {
            let re = z.re * scale;
            *z = Complex64::new(re * re, 0.0);
        }
        self.forward.process(&mut phys);
        for (j, z) in phys.iter_mut().enumerate() {
            *z = if self.keep[j] {
                *z * (self.q * self.k[j] * self.k[j])
            } else {
                Complex64::default()
            };
        }
        State {
            u: vec![Complex64::default(); n],
            v: phys,
        }
    }

    fn axpy(y: &State, h: f64, k: &State) -> State {
        State {
            u: y.u.iter().zip(&k.u).map(|(a, b)| a + b * h).collect(),
            v: y.v.iter().zip(&k.v).map(|(a, b)| a + b * h).collect(),
        }
    }

    fn step(&self, y: &State, dt: f64, full: &Propagator, half: &Propagator) -> State {
        let k1 = self.forcing(y);
        let k2 = self.forcing(&self.propagate(half, &Self::axpy(y, dt / 2.0, &k1)));
        let y_half = self.propagate(half, y);
        let k3 = self.forcing(&Self::axpy(&y_half, dt / 2.0, &k2));
        let k4 = self.forcing(&self.propagate(half, &Self::axpy(&y_half, dt, &k3)));
        let e_y = self.propagate(full, y);
        let e_k1 = self.propagate(full, &k1);
        let h_k23 = self.propagate(half, &Self::axpy(&k2, 1.0, &k3));
        let mut out = e_y;
        for j in 0..out.u.len() {
            let du = e_k1.u[j] + h_k23.u[j] * 2.0 + k4.u[j];
            let dv = e_k1.v[j] + h_k23.v[j] * 2.0 + k4.v[j];
            if self.keep[j] {
                out.u[j] += du * (dt / 6.0);
                out.v[j] += dv * (dt / 6.0);
            } else {
                out.u[j] = Complex64::default();
                out.v[j] = Complex64::default();
            }
        }
        out
    }

    fn advance(&self, y: &State, tau: f64) -> State {
        self.step(y, tau, &self.propagator(tau), &self.propagator(tau / 2.0))
    }
}

fn peak(y: &State) -> f64 {
    y.u.iter().chain(&y.v).map(|z| z.norm()).fold(0.0, f64::max)
}

struct Inner {
    solver: Solver,
    snapshots: Vec<State>,
    t_end: f64,
    initial: PointFn,
    cfg: PrecisionConfig,
    cache: Mutex<HashMap<u64, Arc<Spectrum>>>,
}

/// Time-stepped solution from given `u(x, 0)` and `u_t(x, 0)`.
#[derive(Clone)]
pub struct NumericReference(Arc<Inner>);

impl std::fmt::Debug for NumericReference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NumericReference")
            .field("config", &self.0.solver.config)
            .field("t_end", &self.0.t_end)
            .finish()
    }
}

pub fn numeric_reference(
    params: &BoussinesqParams,
    initial: PointFn,
    velocity: PointFn,
    t_end: f64,
    config: &SpectralConfig,
    cfg: &PrecisionConfig,
) -> Result<NumericReference> {
    if !(0.0..=config.max_t_end).contains(&t_end) {
        return Err(Error::Domain(format!(
            "t_end = {t_end} outside [0, {}]",
            config.max_t_end
        )));
    }
    if config.modes < 8 || !config.modes.is_power_of_two() {
        return Err(Error::Domain(
            "mode count must be a power of two ≥ 8".into(),
        ));
    }
    let n = config.modes;
    let width = 2.0 * config.half_width;
    let (p, q, r) = (
        params.p().to_f64(),
        params.q().to_f64(),
        params.r().to_f64(),
    );
    let k: Vec<f64> = (0..n)
        .map(|j| {
            let m = if j < n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            };
            2.0 * PI * m / width
        })
        .collect();
    let k_cut = config.dealias * PI * n as f64 / width;
    let keep = k.iter().map(|kk| kk.abs() < k_cut).collect();
    let lambda = k.iter().map(|kk| p * kk * kk - r * kk.powi(4)).collect();
    let mut planner = FftPlanner::new();
    let solver = Solver {
        config: config.clone(),
        q,
        k,
        lambda,
        keep,
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    };

    let sample = |f: &PointFn| -> Spectrum {
        let t0 = Real::new(cfg.bits());
        let mut s: Spectrum = (0..n)
            .map(|j| {
                let x = cfg.real(-config.half_width + width * j as f64 / n as f64);
                Complex64::new(f(&x, &t0, cfg).to_f64(), 0.0)
            })
            .collect();
        solver.forward.process(&mut s);
        for (z, kept) in s.iter_mut().zip(&solver.keep) {
            if !kept {
                *z = Complex64::default();
            }
        }
        s
    };
    let mut y = State {
        u: sample(&initial),
        v: sample(&velocity),
    };
    let start_peak = peak(&y).max(f64::MIN_POSITIVE);

    let steps = (t_end / config.dt).round() as usize;
    let full = solver.propagator(config.dt);
    let half = solver.propagator(config.dt / 2.0);
    let mut snapshots = vec![y.clone()];
    for i in 1..=steps {
        y = solver.step(&y, config.dt, &full, &half);
        let pk = peak(&y);
        if !pk.is_finite() || pk > config.growth_limit * start_peak {
            return Err(Error::Unstable(format!(
                "spectral amplitude grew by {:.3e} at t = {:.4}",
                pk / start_peak,
                i as f64 * config.dt
            )));
        }
        if i % config.snapshot_stride == 0 {
            snapshots.push(y.clone());
        }
    }

    Ok(NumericReference(Arc::new(Inner {
        solver,
        snapshots,
        t_end: steps as f64 * config.dt,
        initial,
        cfg: cfg.clone(),
        cache: Mutex::new(HashMap::new()),
    })))
}

impl NumericReference {
    pub fn t_end(&self) -> f64 {
        self.0.t_end
    }

    pub fn config(&self) -> &SpectralConfig {
        &self.0.solver.config
    }

    fn spectrum_at(&self, t: f64) -> Arc<Spectrum> {
        if let Some(s) = self.0.cache.lock().expect("cache lock").get(&t.to_bits()) {
            return Arc::clone(s);
        }
        let cfg = &self.0.solver.config;
        let span = cfg.dt * cfg.snapshot_stride as f64;
        let idx = ((t / span).floor() as usize).min(self.0.snapshots.len() - 1);
        let mut y = self.0.snapshots[idx].clone();
        let mut now = idx as f64 * span;
        let full = self.0.solver.propagator(cfg.dt);
        let half = self.0.solver.propagator(cfg.dt / 2.0);
        while now + cfg.dt <= t + 1e-12 {
            y = self.0.solver.step(&y, cfg.dt, &full, &half);
            now += cfg.dt;
        }
        if t - now > 1e-15 {
            y = self.0.solver.advance(&y, t - now);
        }
        let spectrum = Arc::new(y.u);
        self.0
            .cache
            .lock()
            .expect("cache lock")
            .insert(t.to_bits(), Arc::clone(&spectrum));
        spectrum
    }

    /// `u(x, t)` for `0 ≤ t ≤ t_end`; the initial condition itself at `t = 0`.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            let cfg = &self.0.cfg;
            return Ok((self.0.initial)(&cfg.real(x), &cfg.real(0.0), cfg).to_f64());
        }
        if !(0.0..=self.0.t_end + 1e-12).contains(&t) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {}]",
                self.0.t_end
            )));
        }
        let spectrum = self.spectrum_at(t);
        let shift = x + self.0.solver.config.half_width;
        let n = spectrum.len();
        let sum: f64 = spectrum
            .iter()
            .zip(&self.0.solver.k)
            .map(|(z, k)| {
                let (s, c) = (k * shift).sin_cos();
                z.re * c - z.im * s
            })
            .sum();
        Ok(sum / n as f64)
    }

    /// Point evaluator; NaN outside the integrated time range.
    pub fn evaluator(&self) -> PointFn {
        let me = self.clone();
        Arc::new(move |x, t, cfg| {
            if t.is_zero() {
                return (me.0.initial)(x, t, cfg);
            }
            let v = me.eval(x.to_f64(), t.to_f64()).unwrap_or(f64::NAN);
            Real::with_val(cfg.bits(), v)
        })
    }
}
