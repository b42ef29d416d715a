//! Parameters, state types and vector fields of the two-species open Dicke
//! model in the thermodynamic limit.
//!
//! The light field is carried as the rescaled amplitude `β = α/√N`, which
//! makes every equation independent of the particle number. Time is measured
//! in units of `1/ω₀`.
//!
//! Three model variants share the same state type:
//!
//! * [`ModelVariant::Full`]: spins and light field, 8 real coordinates.
//! * [`ModelVariant::Adiabatic`]: the field is slaved to its instantaneous
//!   steady state, leaving 6 spin coordinates.
//! * [`ModelVariant::ReducedPlus`]: the phase-locked reduction for the `+`
//!   species, 3 coordinates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Number of real coordinates in a [`SystemState`].
pub const STATE_DIM: usize = 8;

/// Physical rates and angles of one model instance, all in units of `ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub omega_l: f64,
    pub omega0: f64,
    /// Half the frequency splitting between the species.
    pub delta: f64,
    pub lambda: f64,
    /// Coupling phase in radians, kept in `[-π, π)` by [`ModelParams::validated`].
    pub phi: f64,
    pub kappa: f64,
    pub gamma_down: f64,
}

impl Default for ModelParams {
    /// Cavity parameters used throughout the reference study: `ω_l = 20`,
    /// `κ = 12.5`, no coupling.
    fn default() -> Self {
        Self {
            omega_l: 20.0,
            omega0: 1.0,
            delta: 0.0,
            lambda: 0.0,
            phi: 0.0,
            kappa: 12.5,
            gamma_down: 0.0,
        }
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(phi: f64) -> f64 {
    // in-range angles pass through bit-exactly so that φ → −φ stays exact
    if (-PI..PI).contains(&phi) {
        return phi;
    }
    let wrapped = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

impl ModelParams {
    /// Checks the physical constraints and normalizes `phi`.
    pub fn validated(mut self) -> Result<Self> {
        let fields = [
            ("omega_l", self.omega_l),
            ("omega0", self.omega0),
            ("delta", self.delta),
            ("lambda", self.lambda),
            ("phi", self.phi),
            ("kappa", self.kappa),
            ("gamma_down", self.gamma_down),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.omega_l <= 0.0 {
            return Err(invalid("omega_l", "must be > 0"));
        }
        if self.omega0 <= 0.0 {
            return Err(invalid("omega0", "must be > 0"));
        }
        if self.kappa < 0.0 {
            return Err(invalid("kappa", "must be >= 0"));
        }
        if self.lambda < 0.0 {
            return Err(invalid("lambda", "must be >= 0"));
        }
        if self.gamma_down < 0.0 {
            return Err(invalid("gamma_down", "must be >= 0"));
        }
        self.phi = normalize_angle(self.phi);
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = normalize_angle(phi);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_gamma_down(mut self, gamma_down: f64) -> Self {
        self.gamma_down = gamma_down;
        self
    }

    pub fn with_omega_l(mut self, omega_l: f64) -> Self {
        self.omega_l = omega_l;
        self
    }

    /// Parameter half of the PT map: `(φ, δ) → (−φ, −δ)`.
    pub fn pt_image(self) -> Self {
        Self { phi: normalize_angle(-self.phi), delta: -self.delta, ..self }
    }

    /// `ω_l² + κ²/4`, the squared modulus of the inverse field response.
    pub fn response_denominator(&self) -> f64 {
        self.omega_l * self.omega_l + 0.25 * self.kappa * self.kappa
    }

    /// Reciprocal superradiant threshold of the `φ = 0`, `δ = Γ↓ = 0` model,
    /// `λ_c = √(ω₀ (ω_l² + κ²/4) / (2 ω_l))`.
    pub fn reciprocal_threshold(&self) -> f64 {
        (self.omega0 * self.response_denominator() / (2.0 * self.omega_l)).sqrt()
    }
}

/// Expectation values `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of one spin species.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochVector {
    pub const DOWN: BlochVector = BlochVector { sx: 0.0, sy: 0.0, sz: -1.0 };

    pub const fn new(sx: f64, sy: f64, sz: f64) -> Self {
        Self { sx, sy, sz }
    }

    pub fn norm_sq(&self) -> f64 {
        self.sx * self.sx + self.sy * self.sy + self.sz * self.sz
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.sx * other.sx + self.sy * other.sy + self.sz * other.sz
    }

    pub fn is_finite(&self) -> bool {
        self.sx.is_finite() && self.sy.is_finite() && self.sz.is_finite()
    }

    pub fn component(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.sx,
            Axis::Y => self.sy,
            Axis::Z => self.sz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Two Bloch vectors and the rescaled field amplitude `β`.
///
/// Serializes as the 8 numbers `(sx₊, sy₊, sz₊, sx₋, sy₋, sz₋, Re β, Im β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 8]", from = "[f64; 8]")]
pub struct SystemState {
    pub spin_plus: BlochVector,
    pub spin_minus: BlochVector,
    pub field: Complex64,
}

impl Default for SystemState {
    fn default() -> Self {
        Self::normal_phase()
    }
}

impl From<SystemState> for [f64; 8] {
    fn from(s: SystemState) -> Self {
        s.to_array()
    }
}

impl From<[f64; 8]> for SystemState {
    fn from(x: [f64; 8]) -> Self {
        SystemState::from_array(&x)
    }
}

impl SystemState {
    /// Empty field, both species pointing down.
    pub const fn normal_phase() -> Self {
        Self {
            spin_plus: BlochVector::DOWN,
            spin_minus: BlochVector::DOWN,
            field: Complex64::new(0.0, 0.0),
        }
    }

    pub const fn new(spin_plus: BlochVector, spin_minus: BlochVector, field: Complex64) -> Self {
        Self { spin_plus, spin_minus, field }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.spin_plus.sx,
            self.spin_plus.sy,
            self.spin_plus.sz,
            self.spin_minus.sx,
            self.spin_minus.sy,
            self.spin_minus.sz,
            self.field.re,
            self.field.im,
        ]
    }

    pub fn from_array(x: &[f64; 8]) -> Self {
        Self {
            spin_plus: BlochVector::new(x[0], x[1], x[2]),
            spin_minus: BlochVector::new(x[3], x[4], x[5]),
            field: Complex64::new(x[6], x[7]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.spin_plus.is_finite() && self.spin_minus.is_finite() && self.field.is_finite()
    }

    pub fn spin(&self, species: Species) -> &BlochVector {
        match species {
            Species::Plus => &self.spin_plus,
            Species::Minus => &self.spin_minus,
        }
    }

    pub fn spins(&self) -> (BlochVector, BlochVector) {
        (self.spin_plus, self.spin_minus)
    }

    /// Per-spin photon number `|β|² = n_ph / N`.
    pub fn intensity(&self) -> f64 {
        self.field.norm_sqr()
    }

    /// Max-norm distance over the 8 coordinates.
    pub fn distance(&self, other: &SystemState) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
    }

    /// `true` if both spins lie inside the unit ball up to `slack`.
    pub fn within_unit_ball(&self, slack: f64) -> bool {
        self.spin_plus.norm() <= 1.0 + slack && self.spin_minus.norm() <= 1.0 + slack
    }
}

/// Which set of equations to evolve or linearize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelVariant {
    Full,
    Adiabatic,
    ReducedPlus,
}

impl ModelVariant {
    /// Number of dynamical coordinates.
    pub fn dim(&self) -> usize {
        match self {
            ModelVariant::Full => 8,
            ModelVariant::Adiabatic => 6,
            ModelVariant::ReducedPlus => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelVariant::Full => "FULL",
            ModelVariant::Adiabatic => "ADIABATIC",
            ModelVariant::ReducedPlus => "REDUCED_PLUS",
        }
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "full" => Ok(ModelVariant::Full),
            "adiabatic" => Ok(ModelVariant::Adiabatic),
            "reduced_plus" | "reduced" => Ok(ModelVariant::ReducedPlus),
            other => Err(Error::Parse(format!("unknown model variant `{other}`"))),
        }
    }
}

/// Effective spin couplings obtained by slaving the field to the spins.
///
/// In the adiabatic flow the field quadrature seen by species `±` is
/// `λF± = −ξ s_{x,±} + χ± s_{x,∓}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstants {
    /// Field response `G = 1/(iω_l + κ/2)`.
    pub response: Complex64,
    /// Light phase shift `arctan(2ω_l/κ)`.
    pub phi_l: f64,
    /// Intra-species coupling.
    pub xi: f64,
    pub chi_plus: f64,
    pub chi_minus: f64,
}

fn check_response(p: &ModelParams) -> Result<()> {
    if p.response_denominator() > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain("field response undefined for omega_l = kappa = 0".into()))
    }
}

/// Couplings of the adiabatic flow, anchored to the exact field steady state.
///
/// With `D = ω_l² + κ²/4`: `ξ = λ²ω_l/D` and
/// `χ± = −λ²(ω_l cos 2φ ± (κ/2) sin 2φ)/D`.
pub fn adiabatic_coefficients(p: &ModelParams) -> Result<CouplingConstants> {
    check_response(p)?;
    let d = p.response_denominator();
    let l2 = p.lambda * p.lambda;
    let response = Complex64::new(0.5 * p.kappa, p.omega_l).inv();
    let (s2, c2) = (2.0 * p.phi).sin_cos();
    let half_kappa = 0.5 * p.kappa;
    Ok(CouplingConstants {
        response,
        phi_l: (2.0 * p.omega_l).atan2(p.kappa),
        xi: l2 * p.omega_l / d,
        chi_plus: -l2 * (p.omega_l * c2 + half_kappa * s2) / d,
        chi_minus: -l2 * (p.omega_l * c2 - half_kappa * s2) / d,
    })
}

/// Exact steady state of the field equation at frozen spins.
pub fn enslaved_field(spins: (BlochVector, BlochVector), p: &ModelParams) -> Result<Complex64> {
    check_response(p)?;
    let (plus, minus) = spins;
    if !plus.is_finite() || !minus.is_finite() {
        return Err(Error::Domain("non-finite spin state".into()));
    }
    Ok(enslaved_field_unchecked(plus.sx, minus.sx, p))
}

pub(crate) fn enslaved_field_unchecked(sx_plus: f64, sx_minus: f64, p: &ModelParams) -> Complex64 {
    let e = Complex64::from_polar(1.0, p.phi);
    let drive = Complex64::new(0.0, -0.5 * p.lambda) * (e * sx_plus + e.conj() * sx_minus);
    drive / Complex64::new(0.5 * p.kappa, p.omega_l)
}

/// Time derivative of all 8 coordinates of the full semiclassical flow.
pub fn full_rhs(state: &SystemState, p: &ModelParams) -> Result<SystemState> {
    if !state.is_finite() {
        return Err(Error::Domain("non-finite state".into()));
    }
    let flow = FullFlow::new(p);
    let mut dx = [0.0; 8];
    flow.eval(&state.to_array(), &mut dx);
    Ok(SystemState::from_array(&dx))
}

/// Spin derivatives of the adiabatically eliminated flow.
pub fn adiabatic_rhs(
    spins: (BlochVector, BlochVector),
    p: &ModelParams,
) -> Result<(BlochVector, BlochVector)> {
    let (plus, minus) = spins;
    if !plus.is_finite() || !minus.is_finite() {
        return Err(Error::Domain("non-finite spin state".into()));
    }
    let flow = AdiabaticFlow::new(p)?;
    let x = [plus.sx, plus.sy, plus.sz, minus.sx, minus.sy, minus.sz];
    let mut dx = [0.0; 6];
    flow.eval(&x, &mut dx);
    Ok((BlochVector::new(dx[0], dx[1], dx[2]), BlochVector::new(dx[3], dx[4], dx[5])))
}

/// Derivative of the phase-locked `+` species.
pub fn reduced_plus_rhs(spin: &BlochVector, p: &ModelParams) -> Result<BlochVector> {
    if !spin.is_finite() {
        return Err(Error::Domain("non-finite spin state".into()));
    }
    let flow = ReducedFlow::new(p);
    let mut dx = [0.0; 3];
    flow.eval(&[spin.sx, spin.sy, spin.sz], &mut dx);
    Ok(BlochVector::new(dx[0], dx[1], dx[2]))
}

/// Ratio `|β| / |s_{x,+}| = λ |sin 2φ| / (2ω_l)` of the phase-locked field.
pub fn reduced_amplitude_ratio(p: &ModelParams) -> f64 {
    p.lambda * (2.0 * p.phi).sin().abs() / (2.0 * p.omega_l)
}

/// Field of the phase-locked reduction: amplitude `−λ sin(2φ) s_{x,+}/(2ω_l)`
/// along the axis `π/2 − φ`.
pub fn reduced_locked_field(spin: &BlochVector, p: &ModelParams) -> Complex64 {
    let amplitude = -p.lambda * (2.0 * p.phi).sin() * spin.sx / (2.0 * p.omega_l);
    Complex64::from_polar(amplitude, 0.5 * PI - p.phi)
}

/// Parity map: negates the field and the `x`, `y` spin components.
pub fn parity_transform(state: &SystemState) -> SystemState {
    let flip = |s: &BlochVector| BlochVector::new(-s.sx, -s.sy, s.sz);
    SystemState {
        spin_plus: flip(&state.spin_plus),
        spin_minus: flip(&state.spin_minus),
        field: -state.field,
    }
}

/// State half of the PT map: swaps the species, leaves the field unchanged.
/// Pair with [`ModelParams::pt_image`].
pub fn pt_transform(state: &SystemState) -> SystemState {
    SystemState {
        spin_plus: state.spin_minus,
        spin_minus: state.spin_plus,
        field: state.field,
    }
}

/// A vector field on `R^n`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], dx: &mut [f64]);
}

/// Precomputed coefficients of the full flow.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FullFlow {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub omega_l: f64,
    pub half_kappa: f64,
}

impl FullFlow {
    pub fn new(p: &ModelParams) -> Self {
        let (sin_phi, cos_phi) = p.phi.sin_cos();
        Self {
            omega_plus: p.omega0 + p.delta,
            omega_minus: p.omega0 - p.delta,
            gamma: p.gamma_down,
            lambda: p.lambda,
            cos_phi,
            sin_phi,
            omega_l: p.omega_l,
            half_kappa: 0.5 * p.kappa,
        }
    }

    /// Field quadratures `F± = 2 Re(β e^{∓iφ})`.
    #[inline]
    pub fn quadratures(&self, re: f64, im: f64) -> (f64, f64) {
        let a = 2.0 * re * self.cos_phi;
        let b = 2.0 * im * self.sin_phi;
        (a + b, a - b)
    }
}

#[inline]
fn spin_block(
    s: &[f64],
    omega: f64,
    gamma: f64,
    drive: f64,
    ds: &mut [f64],
) {
    ds[0] = -omega * s[1] - 0.5 * gamma * s[0];
    ds[1] = omega * s[0] - 0.5 * gamma * s[1] - drive * s[2];
    ds[2] = -gamma * (s[2] + 1.0) + drive * s[1];
}

impl VectorField for FullFlow {
    fn dim(&self) -> usize {
        8
    }

    #[inline]
    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        let (f_plus, f_minus) = self.quadratures(x[6], x[7]);
        spin_block(&x[0..3], self.omega_plus, self.gamma, self.lambda * f_plus, &mut dx[0..3]);
        spin_block(&x[3..6], self.omega_minus, self.gamma, self.lambda * f_minus, &mut dx[3..6]);
        let half_lambda = 0.5 * self.lambda;
        dx[6] = self.omega_l * x[7] - self.half_kappa * x[6]
            + half_lambda * self.sin_phi * (x[0] - x[3]);
        dx[7] = -self.omega_l * x[6] - self.half_kappa * x[7]
            - half_lambda * self.cos_phi * (x[0] + x[3]);
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AdiabaticFlow {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub gamma: f64,
    pub coefficients: CouplingConstants,
}

impl AdiabaticFlow {
    pub fn new(p: &ModelParams) -> Result<Self> {
        Ok(Self {
            omega_plus: p.omega0 + p.delta,
            omega_minus: p.omega0 - p.delta,
            gamma: p.gamma_down,
            coefficients: adiabatic_coefficients(p)?,
        })
    }

    /// Effective drives `λF±` produced by the slaved field.
    #[inline]
    pub fn drives(&self, sx_plus: f64, sx_minus: f64) -> (f64, f64) {
        let c = &self.coefficients;
        (-c.xi * sx_plus + c.chi_plus * sx_minus, -c.xi * sx_minus + c.chi_minus * sx_plus)
    }
}

impl VectorField for AdiabaticFlow {
    fn dim(&self) -> usize {
        6
    }

    #[inline]
    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        let (h_plus, h_minus) = self.drives(x[0], x[3]);
        spin_block(&x[0..3], self.omega_plus, self.gamma, h_plus, &mut dx[0..3]);
        spin_block(&x[3..6], self.omega_minus, self.gamma, h_minus, &mut dx[3..6]);
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ReducedFlow {
    pub omega0: f64,
    /// `λ² sin²(2φ) / (2ω_l)`.
    pub nonlinearity: f64,
}

impl ReducedFlow {
    pub fn new(p: &ModelParams) -> Self {
        let s = (2.0 * p.phi).sin();
        Self { omega0: p.omega0, nonlinearity: p.lambda * p.lambda * s * s / (2.0 * p.omega_l) }
    }
}

impl VectorField for ReducedFlow {
    fn dim(&self) -> usize {
        3
    }

    #[inline]
    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        let g = self.nonlinearity;
        dx[0] = -self.omega0 * x[1];
        dx[1] = self.omega0 * x[0] + g * x[0] * x[2];
        dx[2] = -g * x[0] * x[1];
    }
}

/// The vector field of one [`ModelVariant`] with its coordinate packing.
#[derive(Debug, Clone, Copy)]
pub enum Flow {
    Full(FullFlowHandle),
    Adiabatic(AdiabaticFlowHandle),
    ReducedPlus(ReducedFlowHandle),
}

// Opaque wrappers keep the coefficient structs crate-private.
#[derive(Debug, Clone, Copy)]
pub struct FullFlowHandle(pub(crate) FullFlow);
#[derive(Debug, Clone, Copy)]
pub struct AdiabaticFlowHandle(pub(crate) AdiabaticFlow);
#[derive(Debug, Clone, Copy)]
pub struct ReducedFlowHandle(pub(crate) ReducedFlow);

impl Flow {
    /// Builds the flow; fails for adiabatic elimination without a field response.
    pub fn new(variant: ModelVariant, p: &ModelParams) -> Result<Self> {
        Ok(match variant {
            ModelVariant::Full => Flow::Full(FullFlowHandle(FullFlow::new(p))),
            ModelVariant::Adiabatic => Flow::Adiabatic(AdiabaticFlowHandle(AdiabaticFlow::new(p)?)),
            ModelVariant::ReducedPlus => Flow::ReducedPlus(ReducedFlowHandle(ReducedFlow::new(p))),
        })
    }

    pub fn variant(&self) -> ModelVariant {
        match self {
            Flow::Full(_) => ModelVariant::Full,
            Flow::Adiabatic(_) => ModelVariant::Adiabatic,
            Flow::ReducedPlus(_) => ModelVariant::ReducedPlus,
        }
    }

    /// Extracts the dynamical coordinates of this variant.
    pub fn pack(&self, s: &SystemState) -> Vec<f64> {
        let x = s.to_array();
        match self {
            Flow::Full(_) => x.to_vec(),
            Flow::Adiabatic(_) => x[..6].to_vec(),
            Flow::ReducedPlus(_) => x[..3].to_vec(),
        }
    }

    /// Rebuilds a full state from variant coordinates.
    ///
    /// Adiabatic states carry the slaved field; reduced states carry the
    /// phase-locked field and keep the `−` species of `template`.
    pub fn unpack(&self, x: &[f64], p: &ModelParams, template: &SystemState) -> SystemState {
        match self {
            Flow::Full(_) => {
                let mut a = [0.0; 8];
                a.copy_from_slice(&x[..8]);
                SystemState::from_array(&a)
            }
            Flow::Adiabatic(_) => {
                let field = enslaved_field_unchecked(x[0], x[3], p);
                SystemState::new(
                    BlochVector::new(x[0], x[1], x[2]),
                    BlochVector::new(x[3], x[4], x[5]),
                    field,
                )
            }
            Flow::ReducedPlus(_) => {
                let spin = BlochVector::new(x[0], x[1], x[2]);
                SystemState::new(spin, template.spin_minus, reduced_locked_field(&spin, p))
            }
        }
    }
}

impl VectorField for Flow {
    fn dim(&self) -> usize {
        match self {
            Flow::Full(f) => f.0.dim(),
            Flow::Adiabatic(f) => f.0.dim(),
            Flow::ReducedPlus(f) => f.0.dim(),
        }
    }

    #[inline]
    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        match self {
            Flow::Full(f) => f.0.eval(x, dx),
            Flow::Adiabatic(f) => f.0.eval(x, dx),
            Flow::ReducedPlus(f) => f.0.eval(x, dx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn fig2() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn normal_phase_is_fixed() {
        for (lambda, phi) in [(0.0, 0.0), (3.0, 0.7), (5.5, -2.0)] {
            let p = fig2().with_lambda(lambda).with_phi(phi).with_gamma_down(0.3).with_delta(0.1);
            let d = full_rhs(&SystemState::normal_phase(), &p).unwrap();
            assert_eq!(d.to_array(), [0.0; 8]);
        }
    }

    #[test]
    fn hand_substituted_derivative() {
        let p = fig2().with_lambda(1.7).with_phi(0.4);
        let s = BlochVector::new(1.0, 0.0, 0.0);
        let d = full_rhs(&SystemState::new(s, s, Complex64::new(0.0, 0.0)), &p).unwrap();
        assert_eq!(d.spin_plus.sy, 1.0);
        assert_eq!(d.spin_minus.sy, 1.0);
        assert!((d.field - Complex64::new(0.0, -1.7 * 0.4f64.cos())).norm() < 1e-15);
    }

    #[test]
    fn non_finite_state_rejected() {
        let mut s = SystemState::normal_phase();
        s.field.re = f64::NAN;
        assert!(matches!(full_rhs(&s, &fig2()), Err(Error::Domain(_))));
    }

    #[test]
    fn coefficients_at_fig2_parameters() {
        let c = adiabatic_coefficients(&fig2().with_lambda(1.0).with_phi(FRAC_PI_4)).unwrap();
        let d = 20.0 * 20.0 + 6.25 * 6.25;
        assert!((c.xi - 20.0 / d).abs() < 1e-15);
        assert!((c.xi - 0.045551).abs() < 1e-6);
        assert!((c.chi_plus + 0.014235).abs() < 1e-6);
        assert!((c.chi_minus - 0.014235).abs() < 1e-6);
        assert!((c.phi_l - 1.267911).abs() < 1e-6);
        assert!((c.response.norm() - 1.0 / d.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_limits() {
        for phi in [0.0, 0.3, 1.1, -0.8] {
            let c = adiabatic_coefficients(&fig2().with_lambda(2.0).with_kappa(0.0).with_phi(phi)).unwrap();
            assert_eq!(c.chi_plus, c.chi_minus);
        }
        let c = adiabatic_coefficients(&fig2().with_lambda(2.0)).unwrap();
        assert_eq!(c.chi_plus, -c.xi);
        assert_eq!(c.chi_minus, -c.xi);
        let c = adiabatic_coefficients(&fig2().with_lambda(2.0).with_phi(FRAC_PI_4)).unwrap();
        assert!((c.chi_plus + c.chi_minus).abs() < 1e-15);
    }

    #[test]
    fn degenerate_response_is_domain_error() {
        let p = ModelParams { omega_l: 0.0, kappa: 0.0, ..fig2() };
        assert!(adiabatic_coefficients(&p).is_err());
        assert!(enslaved_field((BlochVector::DOWN, BlochVector::DOWN), &p).is_err());
        // the full flow is still defined
        assert!(full_rhs(&SystemState::normal_phase(), &p).is_ok());
    }

    #[test]
    fn enslaved_field_single_species() {
        let p = fig2().with_lambda(1.0);
        let beta =
            enslaved_field((BlochVector::new(1.0, 0.0, 0.0), BlochVector::new(0.0, 0.0, -1.0)), &p)
                .unwrap();
        // -0.5i / (20i + 6.25) by direct complex division
        let expected = Complex64::new(0.0, -0.5) / Complex64::new(6.25, 20.0);
        assert!((beta - expected).norm() < 1e-16);
        assert!((beta.re + 0.0227758).abs() < 1e-6);
        assert!((beta.im + 0.0071174).abs() < 1e-6);
        let zero = enslaved_field((BlochVector::DOWN, BlochVector::DOWN), &p).unwrap();
        assert_eq!(zero, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn enslaved_field_zeroes_field_derivative() {
        let p = fig2().with_lambda(2.3).with_phi(0.9);
        let plus = BlochVector::new(0.3, -0.2, 0.5);
        let minus = BlochVector::new(-0.6, 0.1, -0.7);
        let beta = enslaved_field((plus, minus), &p).unwrap();
        let d = full_rhs(&SystemState::new(plus, minus, beta), &p).unwrap();
        assert!(d.field.norm() < 1e-15);
    }

    #[test]
    fn adiabatic_symmetric_species_at_zero_phase() {
        let p = fig2().with_lambda(2.0);
        let s = BlochVector::new(0.4, 0.3, -0.5);
        let (a, b) = adiabatic_rhs((s, s), &p).unwrap();
        assert_eq!(a, b);
        let (a, b) = adiabatic_rhs((BlochVector::DOWN, BlochVector::DOWN), &p).unwrap();
        assert_eq!(a, BlochVector::default());
        assert_eq!(b, BlochVector::default());
    }

    #[test]
    fn parity_map() {
        let np = SystemState::normal_phase();
        assert_eq!(parity_transform(&np), np);
        let s = SystemState::new(
            BlochVector::new(0.3, 0.1, -0.2),
            BlochVector::new(-0.5, 0.2, 0.4),
            Complex64::new(0.01, -0.02),
        );
        let ps = parity_transform(&s);
        assert_eq!(ps.spin_plus.sx, -0.3);
        assert_eq!(ps.spin_plus.sz, -0.2);
        assert_eq!(parity_transform(&ps), s);
    }

    #[test]
    fn pt_map_is_involution() {
        let np = SystemState::normal_phase();
        assert_eq!(pt_transform(&np), np);
        let s = SystemState::new(
            BlochVector::new(0.3, 0.1, -0.2),
            BlochVector::new(-0.5, 0.2, 0.4),
            Complex64::new(0.01, -0.02),
        );
        assert_eq!(pt_transform(&pt_transform(&s)), s);
        let p = fig2().with_phi(0.3).with_delta(0.05);
        assert_eq!(p.pt_image().pt_image(), p);
    }

    #[test]
    fn reduced_model() {
        let s = BlochVector::new(0.3, 0.4, -0.5);
        let d = reduced_plus_rhs(&s, &fig2().with_lambda(3.0)).unwrap();
        assert_eq!(d, BlochVector::new(-0.4, 0.3, 0.0));
        let p = fig2().with_lambda(3.0).with_phi(FRAC_PI_4);
        assert!((reduced_amplitude_ratio(&p) - 0.075).abs() < 1e-15);
        let field = reduced_locked_field(&BlochVector::new(0.5, 0.0, 0.0), &p);
        assert!((field.norm() - 0.0375).abs() < 1e-15);
    }

    #[test]
    fn phi_normalization() {
        assert_eq!(normalize_angle(PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(normalize_angle(0.5), 0.5);
        let p = ModelParams { phi: 7.0, ..fig2() }.validated().unwrap();
        assert!(p.phi >= -PI && p.phi < PI);
    }

    #[test]
    fn validation_names_field() {
        let err = ModelParams { kappa: -1.0, ..fig2() }.validated().unwrap_err();
        assert!(matches!(err, Error::InvalidField { ref field, .. } if field == "kappa"));
        assert!(ModelParams { omega_l: 0.0, ..fig2() }.validated().is_err());
        assert!(ModelParams { lambda: f64::NAN, ..fig2() }.validated().is_err());
    }

    #[test]
    fn state_serializes_as_eight_numbers() {
        let s = SystemState::new(
            BlochVector::new(1.0, 2.0, 3.0),
            BlochVector::new(4.0, 5.0, 6.0),
            Complex64::new(7.0, 8.0),
        );
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, "[1.0,2.0,3.0,4.0,5.0,6.0,7.0,8.0]");
        let back: SystemState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
