//! Deterministic time integration with uniform output sampling.
//!
//! Two explicit schemes are available: classical fixed-step RK4 and the
//! adaptive Dormand–Prince 5(4) pair. Output samples are placed on a uniform
//! grid starting at `t_transient` and are obtained from the accepted steps by
//! cubic Hermite interpolation using the derivatives at both step ends.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, IntegrationFailure, Result};
use crate::model::{BlochVector, Flow, ModelParams, ModelVariant, SystemState, VectorField};

/// Slack on the spin norm accepted for initial states.
pub const UNIT_BALL_SLACK: f64 = 1e-6;

/// Magnitude of the `s_{x,+}` kick used by [`InitialCondition::PerturbedNp`].
pub const NP_PERTURBATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_final: f64,
    /// Samples before this time are discarded.
    pub t_transient: f64,
    pub sample_dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45,
            dt: 0.01,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            t_final: 2000.0,
            t_transient: 1000.0,
            sample_dt: 0.01,
        }
    }
}

impl IntegratorConfig {
    pub fn validated(self) -> Result<Self> {
        let finite = [
            ("dt", self.dt),
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("t_final", self.t_final),
            ("t_transient", self.t_transient),
            ("sample_dt", self.sample_dt),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.dt <= 0.0 {
            return Err(invalid("dt", "must be > 0"));
        }
        if self.t_transient < 0.0 || self.t_transient >= self.t_final {
            return Err(invalid("t_transient", "must satisfy 0 <= t_transient < t_final"));
        }
        if self.sample_dt < self.dt {
            return Err(invalid("sample_dt", "must be >= dt"));
        }
        if self.abs_tol <= 0.0 {
            return Err(invalid("abs_tol", "must be > 0"));
        }
        if self.rel_tol <= 0.0 {
            return Err(invalid("rel_tol", "must be > 0"));
        }
        Ok(self)
    }

    /// Same config with a different time window.
    pub fn with_window(mut self, t_transient: f64, t_final: f64) -> Self {
        self.t_transient = t_transient;
        self.t_final = t_final;
        self
    }

    /// Number of output samples on `[t_transient, t_final]`.
    pub fn sample_count(&self) -> usize {
        let span = (self.t_final - self.t_transient) / self.sample_dt;
        (span * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn sample_time(&self, k: usize) -> f64 {
        self.t_transient + k as f64 * self.sample_dt
    }
}

/// Uniformly sampled post-transient time series of one integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub variant: ModelVariant,
    pub initial_state: SystemState,
    pub config: IntegratorConfig,
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn sample_dt(&self) -> f64 {
        self.config.sample_dt
    }

    pub fn last(&self) -> Option<&SystemState> {
        self.states.last()
    }

    /// Time series of coordinate `index` in the 8-number state layout.
    pub fn coordinate(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.to_array()[index]).collect()
    }

    /// Half the peak-to-peak excursion of each of the 8 coordinates.
    pub fn half_ranges(&self) -> [f64; 8] {
        let mut lo = [f64::INFINITY; 8];
        let mut hi = [f64::NEG_INFINITY; 8];
        for s in &self.states {
            for (i, v) in s.to_array().into_iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        let mut out = [0.0; 8];
        for i in 0..8 {
            out[i] = if self.states.is_empty() { 0.0 } else { 0.5 * (hi[i] - lo[i]) };
        }
        out
    }

    pub fn mean(&self) -> [f64; 8] {
        let mut acc = [0.0; 8];
        for s in &self.states {
            for (a, v) in acc.iter_mut().zip(s.to_array()) {
                *a += v;
            }
        }
        let n = self.states.len().max(1) as f64;
        acc.map(|a| a / n)
    }
}

/// Integrates `variant` from `x0` and returns the samples on
/// `[t_transient, t_final]`.
pub fn integrate(
    variant: ModelVariant,
    x0: &SystemState,
    p: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let cfg = cfg.validated()?;
    if !x0.is_finite() {
        return Err(Error::Domain("non-finite initial state".into()));
    }
    if !x0.within_unit_ball(UNIT_BALL_SLACK) {
        return Err(Error::Domain("initial spins outside the unit ball".into()));
    }
    let flow = Flow::new(variant, p)?;
    let n = cfg.sample_count();
    let mut times = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let y0 = flow.pack(x0);
    integrate_field(&flow, &y0, &cfg, |t, y| {
        times.push(t);
        states.push(flow.unpack(y, p, x0));
    })?;
    Ok(Trajectory {
        params: *p,
        variant,
        initial_state: *x0,
        config: cfg,
        times,
        states,
    })
}

/// Runs the integrator on an arbitrary vector field, calling `sink` once per
/// output sample in time order.
pub fn integrate_field<F, S>(field: &F, y0: &[f64], cfg: &IntegratorConfig, mut sink: S) -> Result<()>
where
    F: VectorField + ?Sized,
    S: FnMut(f64, &[f64]),
{
    let n = field.dim();
    assert_eq!(y0.len(), n, "initial state has wrong dimension");
    let mut sampler = Sampler::new(cfg);
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut f = vec![0.0; n];
    field.eval(&y, &mut f);
    sampler.emit_until(0.0, &y, &f, 0.0, &y, &f, &mut sink);

    let mut ws = Workspace::new(n);
    let mut h = cfg.dt;
    while t < cfg.t_final && !sampler.done() {
        let remaining = cfg.t_final - t;
        let last = remaining <= h * (1.0 + 1e-12);
        let step = if last { remaining } else { h };
        let accepted = match cfg.method {
            Method::Rk4 => {
                rk4_step(field, &y, &f, step, &mut ws);
                Some(step)
            }
            Method::Rk45 => {
                let err = dopri_step(field, &y, &f, step, cfg, &mut ws);
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    0.2
                };
                if err <= 1.0 {
                    // keep the untruncated step size after a clipped final step
                    if !last || factor < 1.0 {
                        h = step * factor;
                    }
                    Some(step)
                } else {
                    h = step * factor.min(1.0);
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::Integration { time: t, kind: IntegrationFailure::StepUnderflow });
                    }
                    None
                }
            }
        };
        let Some(step) = accepted else { continue };
        let t_new = if last { cfg.t_final } else { t + step };
        if ws.y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration { time: t, kind: IntegrationFailure::NonFinite });
        }
        if cfg.method == Method::Rk4 {
            field.eval(&ws.y_new, &mut ws.f_new);
        }
        sampler.emit_until(t, &y, &f, t_new, &ws.y_new, &ws.f_new, &mut sink);
        t = t_new;
        std::mem::swap(&mut y, &mut ws.y_new);
        std::mem::swap(&mut f, &mut ws.f_new);
    }
    Ok(())
}

struct Sampler {
    next: usize,
    count: usize,
    start: f64,
    dt: f64,
    buf: Vec<f64>,
}

impl Sampler {
    fn new(cfg: &IntegratorConfig) -> Self {
        Self {
            next: 0,
            count: cfg.sample_count(),
            start: cfg.t_transient,
            dt: cfg.sample_dt,
            buf: Vec::new(),
        }
    }

    fn done(&self) -> bool {
        self.next >= self.count
    }

    /// Emits every pending sample with time in `[t0, t1]`.
    #[allow(clippy::too_many_arguments)]
    fn emit_until<S: FnMut(f64, &[f64])>(
        &mut self,
        t0: f64,
        y0: &[f64],
        f0: &[f64],
        t1: f64,
        y1: &[f64],
        f1: &[f64],
        sink: &mut S,
    ) {
        let h = t1 - t0;
        while self.next < self.count {
            let ts = self.start + self.next as f64 * self.dt;
            // the final sample may sit a rounding error past t_final
            let tol = 1e-9 * self.dt;
            if ts > t1 + tol {
                break;
            }
            if h <= 0.0 || ts >= t1 {
                sink(ts, y1);
            } else {
                let theta = ((ts - t0) / h).clamp(0.0, 1.0);
                hermite(theta, h, y0, f0, y1, f1, &mut self.buf);
                sink(ts, &self.buf);
            }
            self.next += 1;
        }
    }
}

fn hermite(theta: f64, h: f64, y0: &[f64], f0: &[f64], y1: &[f64], f1: &[f64], out: &mut Vec<f64>) {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    out.clear();
    out.extend(
        (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]),
    );
}

struct Workspace {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    f_new: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
            f_new: vec![0.0; n],
        }
    }
}

fn rk4_step<F: VectorField + ?Sized>(field: &F, y: &[f64], f: &[f64], h: f64, ws: &mut Workspace) {
    let n = y.len();
    let [k2, k3, k4, ..] = &mut ws.k;
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * f[i];
    }
    field.eval(&ws.tmp, k2);
    for i in 0..n {
        ws.tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    field.eval(&ws.tmp, k3);
    for i in 0..n {
        ws.tmp[i] = y[i] + h * k3[i];
    }
    field.eval(&ws.tmp, k4);
    for i in 0..n {
        ws.y_new[i] = y[i] + h / 6.0 * (f[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step; fills `y_new`/`f_new` and returns the scaled
/// RMS error estimate.
fn dopri_step<F: VectorField + ?Sized>(
    field: &F,
    y: &[f64],
    k1: &[f64],
    h: f64,
    cfg: &IntegratorConfig,
    ws: &mut Workspace,
) -> f64 {
    let n = y.len();
    let [k2, k3, k4, k5, k6, ..] = &mut ws.k;
    let tmp = &mut ws.tmp;
    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    field.eval(tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    field.eval(tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    field.eval(tmp, k4);
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    field.eval(tmp, k5);
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    field.eval(tmp, k6);
    for i in 0..n {
        ws.y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    field.eval(&ws.y_new, &mut ws.f_new);
    let mut acc = 0.0;
    for i in 0..n {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * ws.f_new[i]);
        let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(ws.y_new[i].abs());
        acc += (e / scale) * (e / scale);
    }
    (acc / n as f64).sqrt()
}

/// Kinds of canonical initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Normal phase with `s_{x,+} = 1e-3`.
    PerturbedNp,
    /// Both Bloch vectors uniform on the unit sphere, empty field.
    RandomBloch,
}

/// Reproducible initial state of the requested kind.
pub fn default_initial_conditions(kind: InitialCondition, seed: u64) -> SystemState {
    match kind {
        InitialCondition::PerturbedNp => {
            let mut s = SystemState::normal_phase();
            s.spin_plus.sx = NP_PERTURBATION;
            s
        }
        InitialCondition::RandomBloch => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plus = random_unit_vector(&mut rng);
            let minus = random_unit_vector(&mut rng);
            SystemState::new(plus, minus, Default::default())
        }
    }
}

/// Uniform point on the unit sphere (Archimedes' projection).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let azimuth: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    let v = BlochVector::new(r * azimuth.cos(), r * azimuth.sin(), z);
    let n = v.norm();
    BlochVector::new(v.sx / n, v.sy / n, v.sz / n)
}
