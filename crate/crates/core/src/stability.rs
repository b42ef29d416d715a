//! Linear stability: analytic Jacobians of every variant, eigen-reports with
//! coalescence diagnostics, the closed-form normal-phase spectrum of the
//! adiabatic flow and exceptional-point search along `φ`.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_points::FixedPoint;
use crate::model::{
    adiabatic_coefficients, AdiabaticFlow, FullFlow, ModelParams, ModelVariant, ReducedFlow,
    SystemState,
};

/// Growth rates with `|Re η|` below this are treated as zero.
pub const EPS_STAB: f64 = 1e-8;

/// Eigenvalue gap below which a pair counts as coalesced.
pub const EP_GAP_TOL: f64 = 1e-6;

/// Eigenvector angle (radians) below which a pair counts as coalesced.
pub const EP_ANGLE_TOL: f64 = 1e-3;

/// Bisection tolerance on `φ` for exceptional points.
pub const EP_PHI_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
}

impl StabilityClass {
    pub fn from_max_real(max_real: f64) -> Self {
        if max_real.abs() <= EPS_STAB {
            StabilityClass::Marginal
        } else if max_real < 0.0 {
            StabilityClass::Stable
        } else {
            StabilityClass::Unstable
        }
    }

    /// `max_real < ε_stab`, i.e. stable or marginal.
    pub fn is_stable(&self) -> bool {
        !matches!(self, StabilityClass::Unstable)
    }
}

/// Eigenvalues and eigenvectors of a dynamical matrix.
///
/// Eigenvalues are sorted by descending real part, ties by descending
/// imaginary part. Eigenvectors are unit vectors with their largest
/// component rotated onto the positive real axis; a defective cluster repeats
/// its single eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub max_real: f64,
    pub min_pair_gap: f64,
    /// Angle between the eigenvectors of the closest pair, if vectors were computed.
    pub min_vector_angle: Option<f64>,
}

impl EigenReport {
    pub fn stability(&self) -> StabilityClass {
        StabilityClass::from_max_real(self.max_real)
    }

    fn from_values(mut values: Vec<Complex64>) -> Self {
        sort_spectrum(&mut values);
        let (gap, _) = closest_pair(&values);
        EigenReport {
            max_real: values.first().map_or(f64::NEG_INFINITY, |v| v.re),
            eigenvalues: values,
            eigenvectors: Vec::new(),
            min_pair_gap: gap,
            min_vector_angle: None,
        }
    }
}

fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

fn closest_pair(values: &[Complex64]) -> (f64, Option<(usize, usize)>) {
    let mut best = (f64::INFINITY, None);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if d < best.0 {
                best = (d, Some((i, j)));
            }
        }
    }
    best
}

/// Principal angle between two complex unit vectors.
pub fn vector_angle(u: &[Complex64], v: &[Complex64]) -> f64 {
    let inner: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    inner.norm().min(1.0).acos()
}

/// Eigenvalues via real Schur form. The unshifted QR sweep can stall on
/// matrices with symmetric spectra, so on failure the iteration is retried on
/// fixed Householder similarity transforms of `m`.
fn schur_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        return Ok(s.complex_eigenvalues().iter().copied().collect());
    }
    for k in 1..=4 {
        let v = DVector::from_fn(n, |i, _| 1.0 + ((i * (k + 2) + k) % (n + 1)) as f64);
        let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared());
        if let Some(s) = Schur::try_new(&h * m * &h, f64::EPSILON, 10_000) {
            return Ok(s.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::Eigen("Schur iteration did not converge".into()))
}

/// Numeric eigendecomposition of a real square matrix.
pub fn eigen_report(m: &DMatrix<f64>) -> Result<EigenReport> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Eigen("matrix is not square".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let mut values = schur_eigenvalues(m)?;
    sort_spectrum(&mut values);

    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let cluster_tol = 1e-7 * scale;
    let null_tol = 1e-6 * scale;
    let mc = m.map(|v| Complex64::new(v, 0.0));

    // group eigenvalues closer than cluster_tol (transitively)
    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![i];
        cluster_of[i] = id;
        let mut k = 0;
        while k < members.len() {
            let a = values[members[k]];
            for j in 0..n {
                if cluster_of[j] == usize::MAX && (values[j] - a).norm() < cluster_tol {
                    cluster_of[j] = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        clusters.push(members);
    }

    let mut vectors: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    for members in &clusters {
        let centre = members.iter().map(|&i| values[i]).sum::<Complex64>() / members.len() as f64;
        let mut shifted = mc.clone();
        for d in 0..n {
            shifted[(d, d)] -= centre;
        }
        let svd = SVD::try_new(shifted, false, true, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Eigen("SVD did not converge".into()))?;
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        let sv = &svd.singular_values;
        // singular values are sorted descending; the null space sits at the end
        let multiplicity = members.len();
        let geometric = (0..multiplicity)
            .filter(|k| sv[n - 1 - k] <= null_tol)
            .count()
            .max(1);
        for (slot, &i) in members.iter().enumerate() {
            let row = n - 1 - slot.min(geometric - 1);
            let v: Vec<Complex64> = v_t.row(row).iter().map(|c| c.conj()).collect();
            vectors[i] = canonical_phase(v);
        }
    }

    let (gap, pair) = closest_pair(&values);
    let angle = pair.map(|(i, j)| vector_angle(&vectors[i], &vectors[j]));
    Ok(EigenReport {
        max_real: values.first().map_or(f64::NEG_INFINITY, |v| v.re),
        eigenvalues: values,
        eigenvectors: vectors,
        min_pair_gap: gap,
        min_vector_angle: angle,
    })
}

fn canonical_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let rot = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
    for c in v.iter_mut() {
        *c = *c * rot / norm;
    }
    v
}

/// Analytic Jacobian of the variant's vector field at `state`.
///
/// Coordinates follow the packing of [`crate::model::Flow`]: 8 for FULL
/// (`…, Re β, Im β`), 6 spin coordinates for ADIABATIC and the `+` spin for
/// REDUCED_PLUS.
pub fn jacobian(state: &SystemState, p: &ModelParams, variant: ModelVariant) -> Result<DMatrix<f64>> {
    let x = state.to_array();
    Ok(match variant {
        ModelVariant::Full => full_jacobian(&x, p),
        ModelVariant::Adiabatic => adiabatic_jacobian(&x[..6], p)?,
        ModelVariant::ReducedPlus => reduced_jacobian(&x[..3], p),
    })
}

pub(crate) fn full_jacobian(x: &[f64], p: &ModelParams) -> DMatrix<f64> {
    let flow = FullFlow::new(p);
    let mut j = DMatrix::zeros(8, 8);
    let (f_plus, f_minus) = flow.quadratures(x[6], x[7]);
    let (c2, s2) = (2.0 * flow.cos_phi, 2.0 * flow.sin_phi);
    let lam = flow.lambda;
    let g = flow.gamma;
    // (offset, ω, F, ∂F/∂Re β, ∂F/∂Im β)
    let blocks = [(0, flow.omega_plus, f_plus, c2, s2), (3, flow.omega_minus, f_minus, c2, -s2)];
    for (o, w, f, dre, dim) in blocks {
        let (sy, sz) = (x[o + 1], x[o + 2]);
        j[(o, o)] = -0.5 * g;
        j[(o, o + 1)] = -w;
        j[(o + 1, o)] = w;
        j[(o + 1, o + 1)] = -0.5 * g;
        j[(o + 1, o + 2)] = -lam * f;
        j[(o + 1, 6)] = -lam * sz * dre;
        j[(o + 1, 7)] = -lam * sz * dim;
        j[(o + 2, o + 1)] = lam * f;
        j[(o + 2, o + 2)] = -g;
        j[(o + 2, 6)] = lam * sy * dre;
        j[(o + 2, 7)] = lam * sy * dim;
    }
    let hl = 0.5 * lam;
    j[(6, 6)] = -flow.half_kappa;
    j[(6, 7)] = flow.omega_l;
    j[(6, 0)] = hl * flow.sin_phi;
    j[(6, 3)] = -hl * flow.sin_phi;
    j[(7, 6)] = -flow.omega_l;
    j[(7, 7)] = -flow.half_kappa;
    j[(7, 0)] = -hl * flow.cos_phi;
    j[(7, 3)] = -hl * flow.cos_phi;
    j
}

pub(crate) fn adiabatic_jacobian(x: &[f64], p: &ModelParams) -> Result<DMatrix<f64>> {
    let flow = AdiabaticFlow::new(p)?;
    let c = flow.coefficients;
    let g = flow.gamma;
    let (h_plus, h_minus) = flow.drives(x[0], x[3]);
    let mut j = DMatrix::zeros(6, 6);
    // (own offset, other offset, ω, drive, χ)
    let blocks = [(0, 3, flow.omega_plus, h_plus, c.chi_plus), (3, 0, flow.omega_minus, h_minus, c.chi_minus)];
    for (o, q, w, h, chi) in blocks {
        let (sy, sz) = (x[o + 1], x[o + 2]);
        j[(o, o)] = -0.5 * g;
        j[(o, o + 1)] = -w;
        j[(o + 1, o)] = w + c.xi * sz;
        j[(o + 1, o + 1)] = -0.5 * g;
        j[(o + 1, o + 2)] = -h;
        j[(o + 1, q)] = -sz * chi;
        j[(o + 2, o)] = -c.xi * sy;
        j[(o + 2, o + 1)] = h;
        j[(o + 2, o + 2)] = -g;
        j[(o + 2, q)] = sy * chi;
    }
    Ok(j)
}

pub(crate) fn reduced_jacobian(x: &[f64], p: &ModelParams) -> DMatrix<f64> {
    let flow = ReducedFlow::new(p);
    let (w, g) = (flow.omega0, flow.nonlinearity);
    DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -w, 0.0, w + g * x[2], 0.0, g * x[0], -g * x[1], -g * x[0], 0.0],
    )
}

/// Coefficients of the normal-phase spectrum in the form
/// `η = −Γ↓/2 ± √(−ω₀(ω₀+ξ_s) − δ² ± √(δ²(2ω₀+ξ_s)² + (ω₀²−δ²)χ₊χ₋))`.
///
/// `ξ_s = −ξ`; only the product `χ₊χ₋` enters, which is the same for the
/// anchored couplings and their sign-flipped, label-swapped counterparts.
fn closed_form_terms(p: &ModelParams) -> Result<(f64, f64)> {
    let c = adiabatic_coefficients(p)?;
    let xi_s = -c.xi;
    let w = p.omega0;
    let d2 = p.delta * p.delta;
    let disc = d2 * (2.0 * w + xi_s).powi(2) + (w * w - d2) * c.chi_plus * c.chi_minus;
    Ok((-w * (w + xi_s) - d2, disc))
}

/// Inner discriminant of the closed-form spectrum; exceptional points of the
/// adiabatic normal phase sit at its zeros.
pub fn np_discriminant(p: &ModelParams) -> Result<f64> {
    Ok(closed_form_terms(p)?.1)
}

/// Closed-form normal-phase spectrum of the adiabatic flow (6 eigenvalues).
///
/// Square roots are taken on the principal branch; the outer `±` supplies
/// the other branch, so the multiset does not depend on the branch cut.
pub fn np_spectrum_closed_form(p: &ModelParams) -> Result<EigenReport> {
    let (base, disc) = closed_form_terms(p)?;
    let inner = Complex64::new(disc, 0.0).sqrt();
    let half_gamma = Complex64::new(-0.5 * p.gamma_down, 0.0);
    let mut values = Vec::with_capacity(6);
    for u in [base + inner, base - inner] {
        let r = u.sqrt();
        values.push(half_gamma + r);
        values.push(half_gamma - r);
    }
    values.push(Complex64::new(-p.gamma_down, 0.0));
    values.push(Complex64::new(-p.gamma_down, 0.0));
    Ok(EigenReport::from_values(values))
}

/// Numeric normal-phase spectrum of `variant`.
pub fn np_spectrum(p: &ModelParams, variant: ModelVariant) -> Result<EigenReport> {
    eigen_report(&jacobian(&SystemState::normal_phase(), p, variant)?)
}

/// Numeric spectrum of the full 8×8 dynamical matrix at the normal phase.
pub fn np_spectrum_full(p: &ModelParams) -> Result<EigenReport> {
    np_spectrum(p, ModelVariant::Full)
}

/// Normal-phase spectrum restricted to the transverse coordinates
/// (`s_x`, `s_y` of both species, plus the field for FULL). The `s_z`
/// fluctuations decouple at the normal phase, so this block carries every
/// eigenvalue that can coalesce.
pub fn np_transverse_report(p: &ModelParams, variant: ModelVariant) -> Result<EigenReport> {
    let j = jacobian(&SystemState::normal_phase(), p, variant)?;
    let keep: &[usize] = match variant {
        ModelVariant::Full => &[0, 1, 3, 4, 6, 7],
        ModelVariant::Adiabatic => &[0, 1, 3, 4],
        ModelVariant::ReducedPlus => &[0, 1],
    };
    let sub = DMatrix::from_fn(keep.len(), keep.len(), |r, c| j[(keep[r], keep[c])]);
    eigen_report(&sub)
}

/// Linearizes `variant` at `fp`, records its stability class and returns the
/// spectrum.
pub fn spectrum_at(fp: &mut FixedPoint, p: &ModelParams, variant: ModelVariant) -> Result<EigenReport> {
    let report = eigen_report(&jacobian(&fp.state, p, variant)?)?;
    fp.stability = Some(report.stability());
    Ok(report)
}

/// One exceptional point of the adiabatic normal-phase spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalPoint {
    pub phi: f64,
    /// Closest eigenvalue gap of the transverse block at `phi`.
    pub gap: f64,
    pub vector_angle: f64,
    /// Both coalescence thresholds met.
    pub confirmed: bool,
}

/// Locates zeros of the closed-form discriminant in `[phi_min, phi_max]` and
/// confirms each by numeric eigenvalue/eigenvector coalescence.
pub fn find_exceptional_points(template: &ModelParams, phi_min: f64, phi_max: f64) -> Result<Vec<ExceptionalPoint>> {
    if phi_min.is_nan() || phi_max.is_nan() || phi_min >= phi_max {
        return Err(Error::Domain("empty phi interval".into()));
    }
    let disc = |phi: f64| np_discriminant(&template.with_phi(phi));
    // disc(φ) is a trigonometric polynomial in 2φ; 4096 cells resolve its roots
    const CELLS: usize = 4096;
    let step = (phi_max - phi_min) / CELLS as f64;
    let mut out = Vec::new();
    let mut a = phi_min;
    let mut fa = disc(a)?;
    for k in 1..=CELLS {
        let b = if k == CELLS { phi_max } else { phi_min + k as f64 * step };
        let fb = disc(b)?;
        // zeros count as positive, so a tangential touch is not a root
        let root = if (fa < 0.0) != (fb < 0.0) { Some(bisect(&disc, a, b, fa)?) } else { None };
        if let Some(phi) = root {
            if out.last().is_none_or(|e: &ExceptionalPoint| (e.phi - phi).abs() > 10.0 * EP_PHI_TOL) {
                out.push(confirm_exceptional_point(template, phi)?);
            }
        }
        a = b;
        fa = fb;
    }
    Ok(out)
}

/// Bisects down to adjacent doubles: the eigenvalue gap scales as the
/// square root of the distance to the root, so `EP_PHI_TOL` alone leaves a
/// gap of order 1e-6.
fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    // endpoint with the smaller residual
    let (fa, fb) = (f(a)?.abs(), f(b)?.abs());
    Ok(if fa <= fb { a } else { b })
}

fn confirm_exceptional_point(template: &ModelParams, phi: f64) -> Result<ExceptionalPoint> {
    let report = np_transverse_report(&template.with_phi(phi), ModelVariant::Adiabatic)?;
    let angle = report.min_vector_angle.unwrap_or(f64::INFINITY);
    Ok(ExceptionalPoint {
        phi,
        gap: report.min_pair_gap,
        vector_angle: angle,
        confirmed: report.min_pair_gap < EP_GAP_TOL && angle < EP_ANGLE_TOL,
    })
}

/// Transverse normal-phase coalescence diagnostics `(φ, gap, angle)` along a
/// `φ` grid.
pub fn coalescence_scan(
    template: &ModelParams,
    variant: ModelVariant,
    phis: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    phis.iter()
        .map(|&phi| {
            let r = np_transverse_report(&template.with_phi(phi), variant)?;
            Ok((phi, r.min_pair_gap, r.min_vector_angle.unwrap_or(f64::NAN)))
        })
        .collect()
}

/// Eigenvalues as a dense vector, for callers that want nalgebra types.
pub fn eigenvalue_vector(report: &EigenReport) -> DVector<Complex64> {
    DVector::from_vec(report.eigenvalues.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BlochVector;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn fig2() -> ModelParams {
        ModelParams::default()
    }

    fn contains(values: &[Complex64], target: Complex64, tol: f64) -> bool {
        values.iter().any(|v| (v - target).norm() < tol)
    }

    #[test]
    fn decoupled_full_jacobian() {
        let p = fig2().with_gamma_down(0.1).with_delta(0.2);
        let j = jacobian(&SystemState::normal_phase(), &p, ModelVariant::Full).unwrap();
        for r in 0..6 {
            for c in 6..8 {
                assert_eq!(j[(r, c)], 0.0);
                assert_eq!(j[(c, r)], 0.0);
            }
        }
        let report = eigen_report(&j).unwrap();
        let ev = &report.eigenvalues;
        assert!(contains(ev, Complex64::new(-6.25, 20.0), 1e-10));
        assert!(contains(ev, Complex64::new(-6.25, -20.0), 1e-10));
        assert!(contains(ev, Complex64::new(-0.05, 1.2), 1e-10));
        assert!(contains(ev, Complex64::new(-0.05, -0.8), 1e-10));
        assert_eq!(ev.iter().filter(|v| (*v - Complex64::new(-0.1, 0.0)).norm() < 1e-10).count(), 2);
    }

    #[test]
    fn normal_phase_s5_entries() {
        // field rows in (Re β, Im β) coordinates, spin rows at s_z = -1
        let p = fig2().with_lambda(2.0).with_phi(0.3);
        let j = jacobian(&SystemState::normal_phase(), &p, ModelVariant::Full).unwrap();
        let (s, c) = 0.3f64.sin_cos();
        assert!((j[(1, 6)] - 2.0 * 2.0 * c).abs() < 1e-15);
        assert!((j[(1, 7)] - 2.0 * 2.0 * s).abs() < 1e-15);
        assert!((j[(4, 7)] + 2.0 * 2.0 * s).abs() < 1e-15);
        assert!((j[(6, 0)] - s).abs() < 1e-15);
        assert!((j[(7, 3)] + c).abs() < 1e-15);
    }

    #[test]
    fn adiabatic_sz_fluctuations_decouple() {
        let p = fig2().with_lambda(2.0).with_phi(0.7).with_gamma_down(0.05);
        let j = jacobian(&SystemState::normal_phase(), &p, ModelVariant::Adiabatic).unwrap();
        for k in [2, 5] {
            for m in 0..6 {
                if m != k {
                    assert_eq!(j[(k, m)], 0.0);
                    assert_eq!(j[(m, k)], 0.0);
                }
            }
            assert_eq!(j[(k, k)], -0.05);
        }
    }

    #[test]
    fn growth_rate_spot_value() {
        let p = fig2().with_lambda(2.5).with_phi(FRAC_PI_4);
        let closed = np_spectrum_closed_form(&p).unwrap();
        assert!((closed.max_real - 0.0525).abs() < 1e-4, "{}", closed.max_real);
        let numeric = np_spectrum(&p, ModelVariant::Adiabatic).unwrap();
        assert!((numeric.max_real - closed.max_real).abs() < 1e-10);
    }

    #[test]
    fn free_spins_closed_form() {
        let p = fig2().with_delta(0.1).with_gamma_down(0.04);
        let ev = np_spectrum_closed_form(&p).unwrap().eigenvalues;
        for target in [
            Complex64::new(-0.02, 1.1),
            Complex64::new(-0.02, -1.1),
            Complex64::new(-0.02, 0.9),
            Complex64::new(-0.02, -0.9),
        ] {
            assert!(contains(&ev, target, 1e-12), "{target} missing from {ev:?}");
        }
        assert_eq!(ev.iter().filter(|v| v.re == -0.04 && v.im == 0.0).count(), 2);
    }

    #[test]
    fn reduced_center_at_bottom() {
        let p = fig2().with_lambda(3.0).with_phi(FRAC_PI_4);
        let s = SystemState::new(BlochVector::DOWN, BlochVector::DOWN, Default::default());
        let r = eigen_report(&jacobian(&s, &p, ModelVariant::ReducedPlus).unwrap()).unwrap();
        let g = 9.0 / 40.0;
        let w = (1.0f64 - g).sqrt();
        assert!(contains(&r.eigenvalues, Complex64::new(0.0, w), 1e-12));
        assert!(contains(&r.eigenvalues, Complex64::new(0.0, -w), 1e-12));
        assert!(r.max_real.abs() < 1e-12);
    }

    #[test]
    fn semisimple_degeneracy_is_not_coalescence() {
        let m = DMatrix::from_diagonal_element(3, 3, -1.0);
        let r = eigen_report(&m).unwrap();
        assert_eq!(r.min_pair_gap, 0.0);
        assert!((r.min_vector_angle.unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn jordan_block_coalesces() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        let r = eigen_report(&m).unwrap();
        assert!(r.min_pair_gap < 1e-6);
        assert!(r.min_vector_angle.unwrap() < 1e-6);
    }

    #[test]
    fn stability_classes() {
        assert_eq!(StabilityClass::from_max_real(-1e-3), StabilityClass::Stable);
        assert_eq!(StabilityClass::from_max_real(5e-9), StabilityClass::Marginal);
        assert_eq!(StabilityClass::from_max_real(1e-3), StabilityClass::Unstable);
        assert!(StabilityClass::Marginal.is_stable());
    }

    #[test]
    fn no_exceptional_points_without_loss() {
        let p = fig2().with_kappa(0.0).with_lambda(2.5);
        assert!(find_exceptional_points(&p, 0.0, PI / 2.0).unwrap().is_empty());
    }
}
