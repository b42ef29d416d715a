//! Steady states by damped Newton iteration from a structured seed set.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::random_unit_vector;
use crate::error::{Error, Result};
use crate::model::{
    adiabatic_coefficients, enslaved_field_unchecked, BlochVector, Flow, ModelParams, ModelVariant,
    SystemState, VectorField,
};
use crate::stability::{jacobian, StabilityClass};

/// Newton stops once the max-norm of the vector field is below this.
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 200;
/// Largest residual of an accepted fixed point.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Fixed points closer than this (max-norm) are merged.
pub const DEDUP_TOL: f64 = 1e-6;
/// Transverse amplitude below which a point counts as unpolarized.
pub const CLASSIFY_TOL: f64 = 1e-6;
/// Norm slack for accepting a converged point as physical.
const BALL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FixedPointLabel {
    #[serde(rename = "NP")]
    Np,
    SpAligned,
    SpAntialigned,
    Other,
}

impl FixedPointLabel {
    pub fn is_superradiant(&self) -> bool {
        matches!(self, FixedPointLabel::SpAligned | FixedPointLabel::SpAntialigned)
    }
}

/// An accepted steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "FixedPointRecord", from = "FixedPointRecord")]
pub struct FixedPoint {
    pub state: SystemState,
    pub residual_norm: f64,
    pub label: FixedPointLabel,
    /// Filled by [`crate::stability::spectrum_at`].
    pub stability: Option<StabilityClass>,
}

impl FixedPoint {
    /// `Some(max_real < ε_stab)` once the spectrum has been computed.
    pub fn stable(&self) -> Option<bool> {
        self.stability.map(|s| s.is_stable())
    }
}

#[derive(Serialize, Deserialize)]
struct FixedPointRecord {
    state: SystemState,
    residual: f64,
    label: FixedPointLabel,
    stable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stability: Option<StabilityClass>,
}

impl From<FixedPoint> for FixedPointRecord {
    fn from(fp: FixedPoint) -> Self {
        Self {
            state: fp.state,
            residual: fp.residual_norm,
            label: fp.label,
            stable: fp.stable(),
            stability: fp.stability,
        }
    }
}

impl From<FixedPointRecord> for FixedPoint {
    fn from(r: FixedPointRecord) -> Self {
        let stability = r.stability.or(match r.stable {
            Some(true) => Some(StabilityClass::Stable),
            Some(false) => Some(StabilityClass::Unstable),
            None => None,
        });
        Self { state: r.state, residual_norm: r.residual, label: r.label, stability }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub params: ModelParams,
    pub variant: ModelVariant,
    pub points: Vec<FixedPoint>,
    pub seeds_used: usize,
}

impl FixedPointSet {
    pub fn normal_phase(&self) -> Option<&FixedPoint> {
        self.points.iter().find(|f| f.label == FixedPointLabel::Np)
    }

    pub fn count(&self, label: FixedPointLabel) -> usize {
        self.points.iter().filter(|f| f.label == label).count()
    }
}

/// Seeds used by [`find_all`] besides the normal phase and the
/// superradiant ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedStrategy {
    pub n_random: usize,
}

impl Default for SeedStrategy {
    fn default() -> Self {
        Self { n_random: 32 }
    }
}

/// Max-norm of the variant's vector field at `state`.
pub fn residual(state: &SystemState, p: &ModelParams, variant: ModelVariant) -> Result<f64> {
    let flow = Flow::new(variant, p)?;
    let x = flow.pack(state);
    let mut dx = vec![0.0; x.len()];
    flow.eval(&x, &mut dx);
    Ok(max_norm(&dx))
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// Labels a steady state by its spin polarization.
pub fn classify(fp: &FixedPoint) -> FixedPointLabel {
    classify_state(&fp.state)
}

pub fn classify_state(s: &SystemState) -> FixedPointLabel {
    let (a, b) = (s.spin_plus, s.spin_minus);
    let transverse = [a.sx, a.sy, b.sx, b.sy, s.field.norm()]
        .into_iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    if transverse < CLASSIFY_TOL {
        // inverted, unpolarized states are steady when Γ↓ = 0
        return if a.sz < 0.0 && b.sz < 0.0 { FixedPointLabel::Np } else { FixedPointLabel::Other };
    }
    let product = a.sx * b.sx;
    if product > 0.0 {
        FixedPointLabel::SpAligned
    } else if product < 0.0 {
        FixedPointLabel::SpAntialigned
    } else {
        FixedPointLabel::Other
    }
}

/// Damped Newton iteration from `seed`.
///
/// Steps are least-squares solutions of `J dx = −f`; for `Γ↓ = 0` each spin
/// norm is conserved by the flow, making `J` singular along the radial
/// directions, so iterates are projected back onto the seed's spin norms.
pub fn newton_solve(seed: &SystemState, p: &ModelParams, variant: ModelVariant) -> Result<FixedPoint> {
    if !seed.is_finite() {
        return Err(Error::Domain("non-finite seed".into()));
    }
    let flow = Flow::new(variant, p)?;
    let mut x = flow.pack(seed);
    let n = x.len();
    let conserve = p.gamma_down == 0.0;
    let radii: Vec<f64> = x.chunks(3).take(n / 3).map(norm3).collect();
    let project = |x: &mut [f64]| {
        if conserve {
            for (chunk, &r) in x.chunks_mut(3).take(n / 3).zip(&radii) {
                let cur = norm3(chunk);
                if cur > 0.0 && r > 0.0 {
                    chunk.iter_mut().for_each(|c| *c *= r / cur);
                }
            }
        }
    };

    let mut f = vec![0.0; n];
    flow.eval(&x, &mut f);
    let mut res = max_norm(&f);
    let mut iterations = 0;
    while res > NEWTON_TOL {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::NoConvergence { iterations, residual: res });
        }
        iterations += 1;
        let state = flow.unpack(&x, p, seed);
        let j: DMatrix<f64> = jacobian(&state, p, variant)?;
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        if smax.is_nan() || smax <= 0.0 || !smax.is_finite() {
            return Err(Error::SingularJacobian);
        }
        let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
        let dx = svd
            .solve(&rhs, 1e-12 * smax)
            .map_err(|_| Error::SingularJacobian)?;
        if dx.iter().any(|v| !v.is_finite()) || dx.iter().all(|v| *v == 0.0) {
            return Err(Error::SingularJacobian);
        }
        let mut alpha = 1.0;
        let mut trial = vec![0.0; n];
        loop {
            for i in 0..n {
                trial[i] = x[i] + alpha * dx[i];
            }
            project(&mut trial);
            flow.eval(&trial, &mut f);
            let r = max_norm(&f);
            if r < res {
                res = r;
                std::mem::swap(&mut x, &mut trial);
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-10 {
                return Err(Error::NoConvergence { iterations, residual: res });
            }
        }
    }
    let state = flow.unpack(&x, p, seed);
    if !state.within_unit_ball(BALL_SLACK) {
        return Err(Error::Unphysical);
    }
    Ok(FixedPoint { state, residual_norm: res, label: classify_state(&state), stability: None })
}

fn norm3(v: &[f64]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Superradiant seeds: the `φ = 0` mean-field solution generalized with the
/// averaged effective couplings, for both alignment patterns and both parity
/// partners, with the field set to its slaved value (which carries the
/// `±φ` phase rotation).
pub fn superradiant_seeds(p: &ModelParams) -> Vec<SystemState> {
    let Ok(c) = adiabatic_coefficients(p) else {
        return Vec::new();
    };
    let chi = 0.5 * (c.chi_plus + c.chi_minus);
    let mut out = Vec::new();
    for alignment in [1.0, -1.0] {
        // ṡ_y = s_x (ω₀ − s_z(−ξ + σχ)) = 0
        let coupling = alignment * chi - c.xi;
        let analytic = if coupling != 0.0 { p.omega0 / coupling } else { f64::NAN };
        let mut heights = vec![-0.5, -0.9];
        if analytic.is_finite() && analytic > -1.0 && analytic < 0.0 {
            heights.insert(0, analytic);
        }
        for sz in heights {
            let sx = (1.0 - sz * sz).sqrt();
            for parity in [1.0, -1.0] {
                let plus = BlochVector::new(parity * sx, 0.0, sz);
                let minus = BlochVector::new(parity * alignment * sx, 0.0, sz);
                let field = enslaved_field_unchecked(plus.sx, minus.sx, p);
                out.push(SystemState::new(plus, minus, field));
            }
        }
    }
    out
}

/// All fixed points reachable from the normal phase, the superradiant
/// ansatz and `strategy.n_random` random Bloch seeds.
///
/// The result is deduplicated and sorted by label, then by `s_{x,+}`.
pub fn find_all(p: &ModelParams, variant: ModelVariant, strategy: &SeedStrategy, rng_seed: u64) -> FixedPointSet {
    let mut seeds = vec![SystemState::normal_phase()];
    seeds.extend(superradiant_seeds(p));
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..strategy.n_random {
        let plus = random_unit_vector(&mut rng);
        let minus = random_unit_vector(&mut rng);
        let field = enslaved_field_unchecked(plus.sx, minus.sx, p);
        seeds.push(SystemState::new(plus, minus, field));
    }
    let solved: Vec<Option<FixedPoint>> =
        seeds.par_iter().map(|s| newton_solve(s, p, variant).ok()).collect();

    let mut points: Vec<FixedPoint> = Vec::new();
    for fp in solved.into_iter().flatten() {
        if fp.residual_norm > ACCEPT_RESIDUAL {
            continue;
        }
        if points.iter().all(|q| q.state.distance(&fp.state) >= DEDUP_TOL) {
            points.push(fp);
        }
    }
    // the normal phase is an exact root for every parameter set
    if !points.iter().any(|f| f.label == FixedPointLabel::Np) {
        points.push(FixedPoint {
            state: SystemState::normal_phase(),
            residual_norm: 0.0,
            label: FixedPointLabel::Np,
            stability: None,
        });
    }
    points.sort_by(|a, b| {
        a.label.cmp(&b.label).then(a.state.spin_plus.sx.total_cmp(&b.state.spin_plus.sx))
    });
    FixedPointSet { params: *p, variant, points, seeds_used: seeds.len() }
}
