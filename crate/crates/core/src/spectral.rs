//! Fourier analysis of post-transient trajectories and regime classification.
//!
//! Spectra are Hann-windowed DFTs without zero padding. Frequencies are
//! angular, `2πk/(N·Δt)`, in units of `ω₀`. Amplitudes are normalized by the
//! window sum so a tone of amplitude `a` shows up with height `a` (one-sided)
//! or `a/2` per side (two-sided).

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::{Axis, Species, SystemState};

/// Shortest trajectory accepted by [`fft_spectrum`].
pub const MIN_SAMPLES: usize = 1 << 12;
/// Oscillation amplitude below which a trajectory is stationary.
pub const EPS_OSC: f64 = 1e-6;
/// Relative DC field level separating dynamical superradiance from a
/// parity-symmetric limit cycle.
pub const EPS_SR: f64 = 1e-3;
/// Maximum number of discrete peaks of a regular orbit.
pub const N_PEAK: usize = 8;
/// Fraction of AC power the peaks must capture.
pub const AC_CAPTURE: f64 = 0.95;
/// Bins on each side of a peak attributed to it.
const PEAK_HALF_WIDTH: usize = 2;
/// Minor/major axis ratio above which the field phase counts as unlocked.
pub const UNLOCKED_RATIO: f64 = 0.9;
/// Relative threshold of the peaks listed in a [`RegimeReport`].
const REPORT_THRESHOLD: f64 = 1e-2;

/// A scalar or complex projection of the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// Complex `β`, giving two-sided spectra.
    Beta,
    ReBeta,
    ImBeta,
    AbsBeta,
    Spin(Species, Axis),
}

impl Observable {
    pub fn is_complex(&self) -> bool {
        matches!(self, Observable::Beta)
    }

    pub fn eval(&self, s: &SystemState) -> Complex64 {
        match *self {
            Observable::Beta => s.field,
            Observable::ReBeta => s.field.re.into(),
            Observable::ImBeta => s.field.im.into(),
            Observable::AbsBeta => s.field.norm().into(),
            Observable::Spin(species, axis) => s.spin(species).component(axis).into(),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Observable::Beta => "beta".into(),
            Observable::ReBeta => "re_beta".into(),
            Observable::ImBeta => "im_beta".into(),
            Observable::AbsBeta => "abs_beta".into(),
            Observable::Spin(species, axis) => {
                let a = match axis {
                    Axis::X => "x",
                    Axis::Y => "y",
                    Axis::Z => "z",
                };
                let s = match species {
                    Species::Plus => "p",
                    Species::Minus => "m",
                };
                format!("s{a}_{s}")
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let obs = match s {
            "beta" => Observable::Beta,
            "re_beta" => Observable::ReBeta,
            "im_beta" => Observable::ImBeta,
            "abs_beta" => Observable::AbsBeta,
            _ => {
                let b = s.as_bytes();
                if b.len() != 4 || b[0] != b's' || b[2] != b'_' {
                    return Err(Error::Parse(format!("unknown observable `{s}`")));
                }
                let axis = match b[1] {
                    b'x' => Axis::X,
                    b'y' => Axis::Y,
                    b'z' => Axis::Z,
                    _ => return Err(Error::Parse(format!("unknown observable `{s}`"))),
                };
                let species = match b[3] {
                    b'p' => Species::Plus,
                    b'm' => Species::Minus,
                    _ => return Err(Error::Parse(format!("unknown observable `{s}`"))),
                };
                Observable::Spin(species, axis)
            }
        };
        Ok(obs)
    }
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    pub observable: String,
    /// Ascending angular frequencies.
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Bin spacing `2π/(N·Δt)`.
    pub resolution: f64,
    pub two_sided: bool,
    pub n_samples: usize,
    pub window_sum: f64,
    /// `Σ|w·x|²` of the windowed input.
    pub signal_power: f64,
}

impl FrequencySpectrum {
    /// `Σ|w·x|²` reconstructed from the amplitudes via Parseval's identity.
    pub fn parseval_power(&self) -> f64 {
        let n = self.n_samples;
        let mut acc = 0.0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            let weight = if self.two_sided || k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 0.5 };
            acc += weight * a * a;
        }
        acc * self.window_sum * self.window_sum / n as f64
    }

    /// Relative violation of Parseval's identity.
    pub fn parseval_error(&self) -> f64 {
        let p = self.signal_power;
        if p == 0.0 {
            self.parseval_power()
        } else {
            (self.parseval_power() - p).abs() / p
        }
    }

    /// Index of the bin nearest to `frequency`.
    pub fn bin_of(&self, frequency: f64) -> usize {
        let first = self.frequencies[0];
        let k = ((frequency - first) / self.resolution).round();
        k.clamp(0.0, (self.frequencies.len() - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    #[serde(rename = "f")]
    pub frequency: f64,
    #[serde(rename = "amp")]
    pub amplitude: f64,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|j| 0.5 - 0.5 * (TAU * j as f64 / n as f64).cos()).collect()
}

/// Hann-windowed spectrum of uniformly sampled data.
///
/// Complex input gives a two-sided spectrum over `[-π/Δt, π/Δt)`; real input
/// (`two_sided = false`) a one-sided spectrum over `[0, π/Δt]`.
pub fn spectrum_of_samples(observable: &str, samples: &[Complex64], dt: f64, two_sided: bool) -> Result<FrequencySpectrum> {
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooShort { len: n, min: MIN_SAMPLES });
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Domain("sample spacing must be positive".into()));
    }
    let w = hann(n);
    let window_sum: f64 = w.iter().sum();
    let mut buf: Vec<Complex64> = samples.iter().zip(&w).map(|(x, w)| x * w).collect();
    let signal_power = buf.iter().map(|z| z.norm_sqr()).sum();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let resolution = TAU / (n as f64 * dt);
    let (frequencies, amplitudes) = if two_sided {
        let start = n.div_ceil(2);
        (start..n)
            .chain(0..start)
            .map(|k| {
                let signed = if k >= start { k as f64 - n as f64 } else { k as f64 };
                (signed * resolution, buf[k].norm() / window_sum)
            })
            .unzip()
    } else {
        (0..=n / 2)
            .map(|k| {
                let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
                let scale = if edge { 1.0 } else { 2.0 };
                (k as f64 * resolution, scale * buf[k].norm() / window_sum)
            })
            .unzip()
    };
    Ok(FrequencySpectrum {
        observable: observable.to_string(),
        frequencies,
        amplitudes,
        resolution,
        two_sided,
        n_samples: n,
        window_sum,
        signal_power,
    })
}

/// Spectrum of one observable along a trajectory.
pub fn fft_spectrum(traj: &Trajectory, observable: Observable) -> Result<FrequencySpectrum> {
    let samples: Vec<Complex64> = traj.states.iter().map(|s| observable.eval(s)).collect();
    spectrum_of_samples(&observable.name(), &samples, traj.sample_dt(), observable.is_complex())
}

/// Local maxima above `rel_threshold` times the global maximum, sorted by
/// frequency. Peak positions and heights are refined by a parabola through
/// the log-amplitudes of the three bins around each maximum.
pub fn dominant_peaks(spec: &FrequencySpectrum, rel_threshold: f64) -> Vec<Peak> {
    let a = &spec.amplitudes;
    let n = a.len();
    let global = a.iter().cloned().fold(0.0, f64::max);
    if n == 0 || global <= 0.0 {
        return Vec::new();
    }
    let cut = rel_threshold * global;
    let mut peaks = Vec::new();
    for k in 0..n {
        let left = if k > 0 { a[k - 1] } else { f64::NEG_INFINITY };
        let right = if k + 1 < n { a[k + 1] } else { f64::NEG_INFINITY };
        if a[k] < cut || a[k] <= left || a[k] < right || a[k] <= 0.0 {
            continue;
        }
        let mut peak = Peak { frequency: spec.frequencies[k], amplitude: a[k] };
        if k > 0 && k + 1 < n && left > 0.0 && right > 0.0 {
            let (l, c, r) = (left.ln(), a[k].ln(), right.ln());
            let denom = l - 2.0 * c + r;
            if denom < 0.0 {
                let offset = 0.5 * (l - r) / denom;
                peak.frequency += offset * spec.resolution;
                peak.amplitude = (c - 0.25 * (l - r) * offset).exp();
            }
        }
        peaks.push(peak);
    }
    peaks
}

/// Time average of `|β|²`.
pub fn mean_intensity(traj: &Trajectory) -> f64 {
    if traj.is_empty() {
        return 0.0;
    }
    traj.states.iter().map(|s| s.intensity()).sum::<f64>() / traj.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockingAngle {
    /// Principal-axis angle of the field cloud in `[0, π)`.
    pub angle: f64,
    /// Minor/major axis ratio.
    pub residual: f64,
}

/// Principal axis of the `(Re β, Im β)` point cloud from its second moments
/// about the origin.
pub fn phase_locking_angle(traj: &Trajectory) -> Result<LockingAngle> {
    locking_angle_of(traj.states.iter().map(|s| s.field))
}

pub fn locking_angle_of(field: impl IntoIterator<Item = Complex64>) -> Result<LockingAngle> {
    let (mut xx, mut yy, mut xy, mut n) = (0.0, 0.0, 0.0, 0usize);
    for b in field {
        xx += b.re * b.re;
        yy += b.im * b.im;
        xy += b.re * b.im;
        n += 1;
    }
    if n == 0 || xx + yy == 0.0 {
        return Err(Error::Unlocked { ratio: f64::NAN });
    }
    let (xx, yy, xy) = (xx / n as f64, yy / n as f64, xy / n as f64);
    let mean = 0.5 * (xx + yy);
    let split = (0.25 * (xx - yy) * (xx - yy) + xy * xy).sqrt();
    let major = mean + split;
    let minor = (mean - split).max(0.0);
    let residual = (minor / major).sqrt();
    if residual >= UNLOCKED_RATIO {
        return Err(Error::Unlocked { ratio: residual });
    }
    let angle = (0.5 * f64::atan2(2.0 * xy, xx - yy)).rem_euclid(PI);
    Ok(LockingAngle { angle: if angle >= PI { 0.0 } else { angle }, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeLabel {
    Stationary,
    LimitCycle,
    #[serde(rename = "DSR")]
    Dsr,
    Broadband,
    Marginal,
}

impl RegimeLabel {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeLabel::Stationary => "STATIONARY",
            RegimeLabel::LimitCycle => "LIMIT_CYCLE",
            RegimeLabel::Dsr => "DSR",
            RegimeLabel::Broadband => "BROADBAND",
            RegimeLabel::Marginal => "MARGINAL",
        }
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegimeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            RegimeLabel::Stationary,
            RegimeLabel::LimitCycle,
            RegimeLabel::Dsr,
            RegimeLabel::Broadband,
            RegimeLabel::Marginal,
        ]
        .into_iter()
        .find(|l| l.name() == s)
        .ok_or_else(|| Error::Parse(format!("unknown regime `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub label: RegimeLabel,
    /// Window-weighted `|⟨β⟩|` relative to `max |β|`.
    pub dc_amplitude: f64,
    /// Strongest peaks of the analysed observable, sorted by frequency.
    pub peaks: Vec<Peak>,
    /// Largest half peak-to-peak excursion over all coordinates.
    pub osc_amplitude: f64,
    pub observable: Option<Observable>,
    /// Fraction of AC power within the strongest peaks.
    pub ac_capture: f64,
}

/// Labels a post-transient trajectory as stationary, a parity-symmetric
/// limit cycle, dynamical superradiance or broadband.
pub fn classify_regime(traj: &Trajectory) -> Result<RegimeReport> {
    let osc_amplitude = traj.half_ranges().into_iter().fold(0.0, f64::max);
    let max_field = traj.states.iter().map(|s| s.field.norm()).fold(0.0, f64::max);
    let weighted_mean = window_mean(traj.states.iter().map(|s| s.field));
    let dc_amplitude = if max_field > 0.0 { weighted_mean.norm() / max_field } else { 0.0 };
    if osc_amplitude < EPS_OSC {
        return Ok(RegimeReport {
            label: RegimeLabel::Stationary,
            dc_amplitude,
            peaks: Vec::new(),
            osc_amplitude,
            observable: None,
            ac_capture: 1.0,
        });
    }

    let ranges = traj.half_ranges();
    let observable = if ranges[6].max(ranges[7]) >= EPS_OSC {
        Observable::Beta
    } else {
        let species = [Species::Plus, Species::Minus];
        let axes = [Axis::X, Axis::Y, Axis::Z];
        let (i, _) = ranges[..6]
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &r)| if r > best.1 { (i, r) } else { best });
        Observable::Spin(species[i / 3], axes[i % 3])
    };
    let samples: Vec<Complex64> = traj.states.iter().map(|s| observable.eval(s)).collect();
    let full = spectrum_of_samples(&observable.name(), &samples, traj.sample_dt(), observable.is_complex())?;
    let mean = samples.iter().sum::<Complex64>() / samples.len() as f64;
    let ac: Vec<Complex64> = samples.iter().map(|z| z - mean).collect();
    let ac_spec = spectrum_of_samples(&observable.name(), &ac, traj.sample_dt(), observable.is_complex())?;
    let ac_capture = peak_capture(&ac_spec);

    let label = if ac_capture < AC_CAPTURE {
        RegimeLabel::Broadband
    } else if dc_amplitude >= EPS_SR {
        RegimeLabel::Dsr
    } else {
        RegimeLabel::LimitCycle
    };
    Ok(RegimeReport {
        label,
        dc_amplitude,
        peaks: strongest(dominant_peaks(&full, REPORT_THRESHOLD), N_PEAK),
        osc_amplitude,
        observable: Some(observable),
        ac_capture,
    })
}

fn window_mean(values: impl ExactSizeIterator<Item = Complex64>) -> Complex64 {
    let w = hann(values.len());
    let sum: f64 = w.iter().sum();
    if sum == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    values.zip(&w).map(|(v, w)| v * w).sum::<Complex64>() / sum
}

/// The `count` highest peaks, re-sorted by frequency.
pub fn strongest(mut peaks: Vec<Peak>, count: usize) -> Vec<Peak> {
    peaks.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    peaks.truncate(count);
    peaks.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    peaks
}

/// Share of spectral power in the bins around the `N_PEAK` strongest local
/// maxima.
fn peak_capture(spec: &FrequencySpectrum) -> f64 {
    let a = &spec.amplitudes;
    let weight = |k: usize| {
        let n = spec.n_samples;
        if spec.two_sided || k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 0.5 }
    };
    let total: f64 = a.iter().enumerate().map(|(k, v)| weight(k) * v * v).sum();
    if total == 0.0 {
        return 1.0;
    }
    let mut maxima: Vec<usize> = (0..a.len())
        .filter(|&k| {
            let left = if k > 0 { a[k - 1] } else { f64::NEG_INFINITY };
            let right = if k + 1 < a.len() { a[k + 1] } else { f64::NEG_INFINITY };
            a[k] > left && a[k] >= right
        })
        .collect();
    maxima.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
    maxima.truncate(N_PEAK);
    let mut taken = vec![false; a.len()];
    for k in maxima {
        let lo = k.saturating_sub(PEAK_HALF_WIDTH);
        let hi = (k + PEAK_HALF_WIDTH).min(a.len() - 1);
        taken[lo..=hi].iter_mut().for_each(|t| *t = true);
    }
    let captured: f64 = a.iter().enumerate().filter(|(k, _)| taken[*k]).map(|(k, v)| weight(k) * v * v).sum();
    captured / total
}
