//! Reproducible protocols built on the lower layers: phase-diagram sweeps,
//! the `φ → −φ` quench, attractor census and the adiabatic-consistency
//! oracle.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    default_initial_conditions, integrate, random_unit_vector, InitialCondition, IntegratorConfig, Trajectory,
};
use crate::error::{invalid, Error, Result};
use crate::fixed_points::{classify_state, find_all, FixedPointLabel, SeedStrategy};
use crate::model::{
    adiabatic_rhs, enslaved_field, full_rhs, pt_transform, BlochVector, ModelParams, ModelVariant, SystemState,
};
use crate::spectral::{classify_regime, mean_intensity, phase_locking_angle, LockingAngle, RegimeLabel, RegimeReport};
use crate::stability::{np_spectrum, np_transverse_report, spectrum_at, StabilityClass};

/// Orbit distance below which two attractors are identified.
pub const EPS_ORBIT: f64 = 1e-2;
/// Single-linkage tolerance on orbit signatures.
pub const EPS_CLUSTER: f64 = 1e-2;
/// Transverse excursion below which a perturbed normal phase is taken to
/// have stayed put.
const NP_ESCAPE: f64 = 1e-2;
/// Points kept from the source cloud of each directed Hausdorff distance.
const HAUSDORFF_POINTS: usize = 1000;

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sweep cell `(row, col)`; independent of scheduling.
pub fn cell_seed(seed: u64, row: usize, col: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ row as u64) ^ col as u64)
}

/// Parameters that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Lambda,
    Phi,
    Kappa,
    Delta,
    GammaDown,
    OmegaL,
}

impl SweepParameter {
    pub fn apply(&self, p: ModelParams, value: f64) -> ModelParams {
        match self {
            SweepParameter::Lambda => p.with_lambda(value),
            SweepParameter::Phi => p.with_phi(value),
            SweepParameter::Kappa => p.with_kappa(value),
            SweepParameter::Delta => p.with_delta(value),
            SweepParameter::GammaDown => p.with_gamma_down(value),
            SweepParameter::OmegaL => p.with_omega_l(value),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Lambda => "lambda",
            SweepParameter::Phi => "phi",
            SweepParameter::Kappa => "kappa",
            SweepParameter::Delta => "delta",
            SweepParameter::GammaDown => "gamma_down",
            SweepParameter::OmegaL => "omega_l",
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown sweep parameter `{s}`")))
    }
}

/// One axis of a sweep: `count` equally spaced values on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(name: SweepParameter, min: f64, max: f64, count: usize) -> Self {
        Self { name, min, max, count }
    }

    pub fn validated(self) -> Result<Self> {
        if self.count == 0 {
            return Err(invalid("count", "axis needs at least one point"));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(invalid("min", "axis bounds must be finite with min <= max"));
        }
        Ok(self)
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseLabel {
    #[serde(rename = "NP")]
    Np,
    SpAligned,
    SpAntialigned,
    SpCoex,
    #[serde(rename = "DP")]
    Dp,
    #[serde(rename = "DSR")]
    Dsr,
    Broadband,
    /// The cell could not be evaluated; see [`PhaseCell::error`].
    Failed,
}

impl PhaseLabel {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseLabel::Np => "NP",
            PhaseLabel::SpAligned => "SP_ALIGNED",
            PhaseLabel::SpAntialigned => "SP_ANTIALIGNED",
            PhaseLabel::SpCoex => "SP_COEX",
            PhaseLabel::Dp => "DP",
            PhaseLabel::Dsr => "DSR",
            PhaseLabel::Broadband => "BROADBAND",
            PhaseLabel::Failed => "FAILED",
        }
    }

    pub const ALL: [PhaseLabel; 8] = [
        PhaseLabel::Np,
        PhaseLabel::SpAligned,
        PhaseLabel::SpAntialigned,
        PhaseLabel::SpCoex,
        PhaseLabel::Dp,
        PhaseLabel::Dsr,
        PhaseLabel::Broadband,
        PhaseLabel::Failed,
    ];
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PhaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PhaseLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown phase label `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub row: usize,
    pub col: usize,
    /// Values of the two sweep axes.
    pub coords: [f64; 2],
    pub label: PhaseLabel,
    /// Largest real part of the normal-phase spectrum.
    #[serde(with = "crate::io::nonfinite")]
    pub max_growth: f64,
    #[serde(with = "crate::io::nonfinite")]
    pub mean_intensity: f64,
    /// Distinct attractors reached by the integrated initial conditions.
    pub n_attractors: Option<usize>,
    pub regime: Option<RegimeLabel>,
    pub error: Option<String>,
}

/// Knobs of [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub integrator: IntegratorConfig,
    pub seeds: SeedStrategy,
    /// Random Bloch initial conditions integrated besides the perturbed
    /// normal phase when no fixed point is stable.
    pub n_random_ic: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig { sample_dt: 0.05, ..IntegratorConfig::default() }.with_window(2000.0, 3000.0),
            seeds: SeedStrategy { n_random: 16 },
            n_random_ic: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub axes: [AxisSpec; 2],
    pub params: ModelParams,
    pub variant: ModelVariant,
    pub seed: u64,
    /// Row-major: `row` indexes the first axis, `col` the second.
    pub cells: Vec<PhaseCell>,
}

impl PhaseDiagram {
    pub fn cell(&self, row: usize, col: usize) -> &PhaseCell {
        &self.cells[row * self.axes[1].count + col]
    }

    pub fn count(&self, label: PhaseLabel) -> usize {
        self.cells.iter().filter(|c| c.label == label).count()
    }
}

/// Labels every cell of a two-axis grid.
///
/// Per cell: stable (or marginal) superradiant fixed points decide first;
/// otherwise a linearly stable normal phase gives NP; otherwise the flow is
/// integrated from the perturbed normal phase (and random initial
/// conditions) and the orbit is classified. Cell failures are recorded, not
/// propagated.
pub fn sweep(
    template: &ModelParams,
    axes: [AxisSpec; 2],
    variant: ModelVariant,
    seed: u64,
    cfg: &SweepConfig,
) -> Result<PhaseDiagram> {
    let axes = [axes[0].validated()?, axes[1].validated()?];
    if axes[0].name == axes[1].name {
        return Err(invalid("axes", "the two axes must differ"));
    }
    cfg.integrator.validated()?;
    let (rows, cols) = (axes[0].count, axes[1].count);
    let cells = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let (row, col) = (idx / cols, idx % cols);
            let coords = [axes[0].value(row), axes[1].value(col)];
            let p = axes[1].name.apply(axes[0].name.apply(*template, coords[0]), coords[1]);
            let mut cell = PhaseCell {
                row,
                col,
                coords,
                label: PhaseLabel::Failed,
                max_growth: f64::NAN,
                mean_intensity: f64::NAN,
                n_attractors: None,
                regime: None,
                error: None,
            };
            if let Err(e) = evaluate_cell(&mut cell, &p, variant, cell_seed(seed, row, col), cfg) {
                cell.label = PhaseLabel::Failed;
                cell.error = Some(e.to_string());
            }
            cell
        })
        .collect();
    Ok(PhaseDiagram { axes, params: *template, variant, seed, cells })
}

fn evaluate_cell(cell: &mut PhaseCell, p: &ModelParams, variant: ModelVariant, seed: u64, cfg: &SweepConfig) -> Result<()> {
    let p = p.validated()?;
    cell.max_growth = np_spectrum(&p, variant)?.max_real;

    let mut set = find_all(&p, variant, &cfg.seeds, seed);
    let (mut aligned, mut anti) = (None, None);
    for fp in set.points.iter_mut().filter(|f| f.label.is_superradiant()) {
        spectrum_at(fp, &p, variant)?;
        if fp.stable() == Some(true) {
            let slot = if fp.label == FixedPointLabel::SpAligned { &mut aligned } else { &mut anti };
            slot.get_or_insert(fp.state.intensity());
        }
    }
    match (aligned, anti) {
        (Some(_), Some(_)) => {
            cell.label = PhaseLabel::SpCoex;
            cell.mean_intensity = aligned.unwrap();
            cell.n_attractors = Some(4);
            return Ok(());
        }
        (Some(i), None) | (None, Some(i)) => {
            cell.label = if aligned.is_some() { PhaseLabel::SpAligned } else { PhaseLabel::SpAntialigned };
            cell.mean_intensity = i;
            cell.n_attractors = Some(2);
            return Ok(());
        }
        (None, None) => {}
    }

    let np = np_transverse_report(&p, variant)?.stability();
    if np == StabilityClass::Stable {
        cell.label = PhaseLabel::Np;
        cell.mean_intensity = 0.0;
        cell.n_attractors = Some(1);
        return Ok(());
    }

    let kicked = default_initial_conditions(InitialCondition::PerturbedNp, 0);
    let traj = integrate(variant, &kicked, &p, &cfg.integrator)?;
    if np == StabilityClass::Marginal {
        cell.regime = Some(RegimeLabel::Marginal);
        if transverse_excursion(&traj) < NP_ESCAPE {
            cell.label = PhaseLabel::Np;
            cell.mean_intensity = mean_intensity(&traj);
            cell.n_attractors = Some(1);
            return Ok(());
        }
    }
    let report = classify_regime(&traj)?;
    cell.regime = Some(report.label);
    cell.mean_intensity = mean_intensity(&traj);
    cell.label = regime_phase(report.label, &traj)?;

    let mut signatures = vec![OrbitSignature::of(&traj)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.n_random_ic {
        let x0 = default_initial_conditions(InitialCondition::RandomBloch, rng.random());
        signatures.push(OrbitSignature::of(&integrate(variant, &x0, &p, &cfg.integrator)?));
    }
    cell.n_attractors = Some(single_linkage(&signatures, EPS_CLUSTER).len());
    Ok(())
}

fn transverse_excursion(traj: &Trajectory) -> f64 {
    traj.states
        .iter()
        .map(|s| {
            [s.spin_plus.sx, s.spin_plus.sy, s.spin_minus.sx, s.spin_minus.sy, s.field.re, s.field.im]
                .into_iter()
                .fold(0.0, |m: f64, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max)
}

fn regime_phase(regime: RegimeLabel, traj: &Trajectory) -> Result<PhaseLabel> {
    Ok(match regime {
        RegimeLabel::LimitCycle => PhaseLabel::Dp,
        RegimeLabel::Dsr => PhaseLabel::Dsr,
        RegimeLabel::Broadband => PhaseLabel::Broadband,
        RegimeLabel::Stationary | RegimeLabel::Marginal => {
            let last = traj.last().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
            match classify_state(last) {
                FixedPointLabel::Np => PhaseLabel::Np,
                FixedPointLabel::SpAligned => PhaseLabel::SpAligned,
                FixedPointLabel::SpAntialigned => PhaseLabel::SpAntialigned,
                FixedPointLabel::Other => {
                    return Err(Error::Domain("orbit settled on an unclassified stationary state".into()))
                }
            }
        }
    })
}

/// Coarse description of a post-transient orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub mean: SystemState,
    pub half_ranges: [f64; 8],
    pub mean_intensity: f64,
    pub regime: Option<RegimeReport>,
    pub locking: Option<LockingAngle>,
    pub final_state: SystemState,
}

impl OrbitSummary {
    pub fn of(traj: &Trajectory) -> Self {
        Self {
            mean: SystemState::from_array(&traj.mean()),
            half_ranges: traj.half_ranges(),
            mean_intensity: mean_intensity(traj),
            regime: classify_regime(traj).ok(),
            locking: phase_locking_angle(traj).ok(),
            final_state: traj.last().copied().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QuenchVerdict {
    #[serde(rename = "PT_BROKEN")]
    PtBroken,
    #[serde(rename = "PT_INVARIANT")]
    PtInvariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchReport {
    pub params: ModelParams,
    pub pre: OrbitSummary,
    pub post: OrbitSummary,
    /// Symmetric Hausdorff distance between the PT image of the post-quench
    /// orbit and the pre-quench orbit (max-norm).
    pub distance: f64,
    pub eps_orbit: f64,
    pub verdict: QuenchVerdict,
}

/// Relaxes the full model from the perturbed normal phase with `relax`,
/// flips `φ → −φ`, continues from the last state with `post`, and compares
/// the species-swapped post-quench orbit with the pre-quench orbit.
pub fn quench_phi(p: &ModelParams, relax: &IntegratorConfig, post: &IntegratorConfig) -> Result<QuenchReport> {
    quench_phi_orbits(p, relax, post).map(|(report, _, _)| report)
}

/// [`quench_phi`] that also returns the sampled pre- and post-quench orbits.
pub fn quench_phi_orbits(
    p: &ModelParams,
    relax: &IntegratorConfig,
    post: &IntegratorConfig,
) -> Result<(QuenchReport, Trajectory, Trajectory)> {
    let p = p.validated()?;
    let kicked = default_initial_conditions(InitialCondition::PerturbedNp, 0);
    let pre = integrate(ModelVariant::Full, &kicked, &p, relax)?;
    let start = *pre.last().ok_or_else(|| Error::Domain("empty relaxation window".into()))?;
    let quenched = p.with_phi(-p.phi).validated()?;
    let after = integrate(ModelVariant::Full, &start, &quenched, post)?;
    let image: Vec<SystemState> = after.states.iter().map(pt_transform).collect();
    let distance = hausdorff(&image, &pre.states);
    let report = QuenchReport {
        params: p,
        pre: OrbitSummary::of(&pre),
        post: OrbitSummary::of(&after),
        distance,
        eps_orbit: EPS_ORBIT,
        verdict: if distance < EPS_ORBIT { QuenchVerdict::PtInvariant } else { QuenchVerdict::PtBroken },
    };
    Ok((report, pre, after))
}

/// Symmetric Hausdorff distance between two point clouds in the max-norm.
///
/// Each directed distance takes at most [`HAUSDORFF_POINTS`] evenly strided
/// source points against the complete target cloud.
pub fn hausdorff(a: &[SystemState], b: &[SystemState]) -> f64 {
    directed(a, b).max(directed(b, a))
}

fn directed(from: &[SystemState], to: &[SystemState]) -> f64 {
    if from.is_empty() || to.is_empty() {
        return if from.is_empty() && to.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let targets: Vec<[f64; 8]> = to.iter().map(|s| s.to_array()).collect();
    let stride = from.len().div_ceil(HAUSDORFF_POINTS);
    from.par_iter()
        .step_by(stride)
        .map(|s| {
            let x = s.to_array();
            targets
                .iter()
                .map(|t| x.iter().zip(t).fold(0.0, |m: f64, (u, v)| m.max((u - v).abs())))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Parameterization-free fingerprint of a post-transient orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSignature {
    /// Field locking angle in `[0, π)`, absent when the field is unlocked.
    pub locking_angle: Option<f64>,
    pub mean_sz_plus: f64,
    pub mean_sz_minus: f64,
    pub amp_sz_plus: f64,
    pub amp_sz_minus: f64,
    /// Half peak-to-peak excursion of `|β|`.
    pub field_amplitude: f64,
}

impl OrbitSignature {
    pub fn of(traj: &Trajectory) -> Self {
        let mean = traj.mean();
        let ranges = traj.half_ranges();
        let (lo, hi) = traj
            .states
            .iter()
            .map(|s| s.field.norm())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        Self {
            locking_angle: phase_locking_angle(traj).ok().map(|l| l.angle),
            mean_sz_plus: mean[2],
            mean_sz_minus: mean[5],
            amp_sz_plus: ranges[2],
            amp_sz_minus: ranges[5],
            field_amplitude: if hi >= lo { 0.5 * (hi - lo) } else { 0.0 },
        }
    }

    /// Image under the species swap combined with `φ → −φ`: the locking
    /// axis `π/2 ± φ` is mirrored to `π − θ`.
    pub fn pt_image(&self) -> Self {
        Self {
            locking_angle: self.locking_angle.map(|a| (PI - a).rem_euclid(PI)),
            mean_sz_plus: self.mean_sz_minus,
            mean_sz_minus: self.mean_sz_plus,
            amp_sz_plus: self.amp_sz_minus,
            amp_sz_minus: self.amp_sz_plus,
            field_amplitude: self.field_amplitude,
        }
    }

    /// Max-norm distance; angles compare on the circle of period `π`.
    pub fn distance(&self, other: &Self) -> f64 {
        let angle = match (self.locking_angle, other.locking_angle) {
            (Some(a), Some(b)) => {
                let d = (a - b).rem_euclid(PI);
                d.min(PI - d)
            }
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        [
            angle,
            (self.mean_sz_plus - other.mean_sz_plus).abs(),
            (self.mean_sz_minus - other.mean_sz_minus).abs(),
            (self.amp_sz_plus - other.amp_sz_plus).abs(),
            (self.amp_sz_minus - other.amp_sz_minus).abs(),
            (self.field_amplitude - other.field_amplitude).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Single-linkage clusters (lists of member indices, ordered by first
/// member).
pub fn single_linkage(signatures: &[OrbitSignature], eps: f64) -> Vec<Vec<usize>> {
    let n = signatures.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if signatures[i].distance(&signatures[j]) < eps {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut index_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if index_of[r] == usize::MAX {
            index_of[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[index_of[r]].push(i);
    }
    clusters
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorCluster {
    pub members: Vec<usize>,
    /// Signature of the first member.
    pub signature: OrbitSignature,
    /// Largest signature distance within the cluster.
    pub diameter: f64,
    /// Index of the cluster whose signature is the PT image of this one.
    pub pt_partner: Option<usize>,
    /// Chained so widely that its members may belong to distinct attractors.
    pub unresolved: bool,
}

/// Knobs of [`attractor_census`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CensusConfig {
    pub integrator: IntegratorConfig,
    pub eps_cluster: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig { sample_dt: 0.05, ..IntegratorConfig::default() }.with_window(19000.0, 20000.0),
            eps_cluster: EPS_CLUSTER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub params: ModelParams,
    pub n_ic: usize,
    pub seed: u64,
    pub eps_cluster: f64,
    pub signatures: Vec<OrbitSignature>,
    pub clusters: Vec<AttractorCluster>,
    /// Every cluster has a PT partner.
    pub pt_paired: bool,
    /// Some cluster is wider than ten cluster tolerances.
    pub unresolved: bool,
}

impl CensusReport {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }
}

/// Integrates the full model from `n_ic` random Bloch states and groups the
/// resulting orbits by signature.
pub fn attractor_census(p: &ModelParams, n_ic: usize, seed: u64, cfg: &CensusConfig) -> Result<CensusReport> {
    if n_ic < 2 {
        return Err(invalid("n_ic", "census needs at least two initial conditions"));
    }
    let p = p.validated()?;
    let integrator = cfg.integrator.validated()?;
    let signatures = (0..n_ic)
        .into_par_iter()
        .map(|i| {
            let x0 = default_initial_conditions(InitialCondition::RandomBloch, splitmix64(seed.wrapping_add(i as u64)));
            integrate(ModelVariant::Full, &x0, &p, &integrator).map(|t| OrbitSignature::of(&t))
        })
        .collect::<Result<Vec<_>>>()?;

    let groups = single_linkage(&signatures, cfg.eps_cluster);
    let mut clusters: Vec<AttractorCluster> = groups
        .into_iter()
        .map(|members| {
            let mut diameter: f64 = 0.0;
            for (k, &i) in members.iter().enumerate() {
                for &j in &members[k + 1..] {
                    diameter = diameter.max(signatures[i].distance(&signatures[j]));
                }
            }
            AttractorCluster {
                signature: signatures[members[0]],
                members,
                diameter,
                pt_partner: None,
                unresolved: diameter > 10.0 * cfg.eps_cluster,
            }
        })
        .collect();
    for i in 0..clusters.len() {
        let image = clusters[i].signature.pt_image();
        clusters[i].pt_partner = (0..clusters.len())
            .map(|j| (j, image.distance(&clusters[j].signature)))
            .filter(|(_, d)| *d < cfg.eps_cluster)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j);
    }
    let pt_paired = clusters.iter().all(|c| c.pt_partner.is_some());
    let unresolved = clusters.iter().any(|c| c.unresolved);
    Ok(CensusReport { params: p, n_ic, seed, eps_cluster: cfg.eps_cluster, signatures, clusters, pt_paired, unresolved })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub scale: f64,
    pub max_real_full: f64,
    pub max_real_adiabatic: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub params: ModelParams,
    pub n_samples: usize,
    /// Largest relative deviation between the adiabatic flow and the full
    /// flow evaluated at the slaved field.
    pub identity_deviation: f64,
    pub scaling: Vec<ScalePoint>,
    /// Growth-rate deviation strictly decreases with scale.
    pub monotone: bool,
    /// At `κ = 0`, `φ = 0`, `δ = 0` both normal-phase spectra contain the
    /// decoupled pair `−Γ↓/2 ± iω₀`.
    pub reciprocal_modes_agree: bool,
}

/// Scale factors applied jointly to `ω_l` and `κ`.
pub const CONSISTENCY_SCALES: [f64; 5] = [1.0, 2.0, 3.0, 5.0, 10.0];

/// Checks the adiabatic reduction against the full model: exactly, through
/// the slaved field, and asymptotically, through normal-phase growth rates
/// as the cavity becomes fast.
pub fn adiabatic_consistency_check(p: &ModelParams, n_samples: usize, seed: u64) -> Result<ConsistencyReport> {
    let p = p.validated()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity_deviation: f64 = 0.0;
    for _ in 0..n_samples {
        let ball = |rng: &mut ChaCha8Rng| {
            let v = random_unit_vector(rng);
            let r: f64 = rng.random::<f64>().cbrt();
            BlochVector::new(r * v.sx, r * v.sy, r * v.sz)
        };
        let spins = (ball(&mut rng), ball(&mut rng));
        let field = enslaved_field(spins, &p)?;
        let full = full_rhs(&SystemState::new(spins.0, spins.1, field), &p)?;
        let (a_plus, a_minus) = adiabatic_rhs(spins, &p)?;
        let f = full.to_array();
        let a = SystemState::new(a_plus, a_minus, Complex64::new(0.0, 0.0)).to_array();
        let scale = f.iter().fold(0.0, |m: f64, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let dev = f.iter().zip(&a).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()));
        identity_deviation = identity_deviation.max(dev / scale);
    }

    let scaling = CONSISTENCY_SCALES
        .iter()
        .map(|&s| {
            let q = p.with_omega_l(s * p.omega_l).with_kappa(s * p.kappa);
            let full = np_spectrum(&q, ModelVariant::Full)?.max_real;
            let adiabatic = np_spectrum(&q, ModelVariant::Adiabatic)?.max_real;
            Ok(ScalePoint { scale: s, max_real_full: full, max_real_adiabatic: adiabatic, deviation: (full - adiabatic).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = scaling.windows(2).all(|w| w[1].deviation < w[0].deviation);

    let reciprocal = p.with_kappa(0.0).with_phi(0.0).with_delta(0.0);
    // the antisymmetric spin mode decouples from the field
    let target = Complex64::new(-0.5 * reciprocal.gamma_down, reciprocal.omega0);
    let has_mode = |variant| -> Result<bool> {
        let r = np_spectrum(&reciprocal, variant)?;
        Ok(r.eigenvalues.iter().any(|v| (v - target).norm() < 1e-9)
            && r.eigenvalues.iter().any(|v| (v - target.conj()).norm() < 1e-9))
    };
    let reciprocal_modes_agree = has_mode(ModelVariant::Full)? && has_mode(ModelVariant::Adiabatic)?;
    Ok(ConsistencyReport { params: p, n_samples, identity_deviation, scaling, monotone, reciprocal_modes_agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn axis_values_inclusive() {
        let a = AxisSpec::new(SweepParameter::Lambda, 0.0, 6.0, 4);
        assert_eq!(a.values(), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(AxisSpec::new(SweepParameter::Phi, 0.3, 0.3, 1).values(), vec![0.3]);
        assert!(AxisSpec::new(SweepParameter::Phi, 1.0, 0.0, 3).validated().is_err());
        assert!(AxisSpec::new(SweepParameter::Phi, 0.0, 1.0, 0).validated().is_err());
    }

    #[test]
    fn cell_seeds_differ() {
        let s: Vec<u64> = [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(r, c)| cell_seed(7, r, c)).collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(cell_seed(7, 3, 5), cell_seed(7, 3, 5));
    }

    #[test]
    fn labels_round_trip() {
        for l in PhaseLabel::ALL {
            assert_eq!(l.name().parse::<PhaseLabel>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{}\"", l.name()));
        }
        assert_eq!("kappa".parse::<SweepParameter>().unwrap(), SweepParameter::Kappa);
    }

    fn sig(angle: Option<f64>, szp: f64, szm: f64) -> OrbitSignature {
        OrbitSignature {
            locking_angle: angle,
            mean_sz_plus: szp,
            mean_sz_minus: szm,
            amp_sz_plus: 0.1,
            amp_sz_minus: 0.0,
            field_amplitude: 0.05,
        }
    }

    #[test]
    fn signature_distance_wraps_angle() {
        let a = sig(Some(0.001), -0.5, -0.9);
        let b = sig(Some(PI - 0.001), -0.5, -0.9);
        assert!((a.distance(&b) - 0.002).abs() < 1e-12);
        assert_eq!(a.distance(&sig(None, -0.5, -0.9)), f64::INFINITY);
        let image = a.pt_image();
        assert_eq!(image.mean_sz_plus, -0.9);
        assert_eq!(image.amp_sz_minus, 0.1);
        assert!((image.locking_angle.unwrap() - (PI - 0.001)).abs() < 1e-15);
    }

    #[test]
    fn single_linkage_chains() {
        let s = [sig(None, 0.0, 0.0), sig(None, 0.008, 0.0), sig(None, 0.016, 0.0), sig(None, 0.5, 0.0)];
        assert_eq!(single_linkage(&s, 1e-2), vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn hausdorff_of_shifted_clouds() {
        let cloud: Vec<SystemState> = (0..50)
            .map(|k| {
                let mut s = SystemState::normal_phase();
                s.spin_plus.sx = 0.01 * k as f64;
                s
            })
            .collect();
        assert_eq!(hausdorff(&cloud, &cloud), 0.0);
        let shorter = &cloud[..40];
        assert!((hausdorff(&cloud, shorter) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn normal_phase_quench_is_invariant() {
        let p = ModelParams::default().with_lambda(1.0).with_phi(FRAC_PI_4 / 4.0).with_gamma_down(0.05);
        let cfg = IntegratorConfig::default().with_window(800.0, 850.0);
        let r = quench_phi(&p, &cfg, &cfg).unwrap();
        assert_eq!(r.verdict, QuenchVerdict::PtInvariant);
        assert!(r.distance < 1e-6);
    }

    #[test]
    fn consistency_identity() {
        let p = ModelParams::default().with_lambda(2.5).with_phi(FRAC_PI_4).with_gamma_down(0.1).with_delta(0.2);
        let r = adiabatic_consistency_check(&p, 200, 1).unwrap();
        assert!(r.identity_deviation <= 1e-12, "{}", r.identity_deviation);
        assert!(r.reciprocal_modes_agree);
        assert_eq!(r.scaling.len(), CONSISTENCY_SCALES.len());
    }

    #[test]
    fn tiny_sweep_below_threshold_is_normal() {
        let axes = [
            AxisSpec::new(SweepParameter::Lambda, 0.5, 1.0, 2),
            AxisSpec::new(SweepParameter::Phi, 0.0, 0.1, 2),
        ];
        let p = ModelParams::default().with_gamma_down(0.05);
        let d = sweep(&p, axes, ModelVariant::Adiabatic, 1, &SweepConfig::default()).unwrap();
        assert_eq!(d.cells.len(), 4);
        assert!(d.cells.iter().all(|c| c.label == PhaseLabel::Np), "{:?}", d.cells);
        assert_eq!(d.cell(1, 0).coords, [1.0, 0.0]);
    }
}
