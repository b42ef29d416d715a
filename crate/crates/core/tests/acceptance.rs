//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so that every line is printed. The exit status is
//! zero unless `NRDICKE_ACCEPTANCE_STRICT=1` is set and some criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::time::Instant;

use nalgebra::DMatrix;
use nrdicke::dynamics::{default_initial_conditions, integrate, random_unit_vector, InitialCondition, IntegratorConfig};
use nrdicke::experiments::{
    attractor_census, quench_phi, sweep, AxisSpec, CensusConfig, PhaseLabel, QuenchVerdict, SweepConfig,
    SweepParameter, EPS_CLUSTER, EPS_ORBIT,
};
use nrdicke::fixed_points::{classify_state, FixedPointLabel};
use nrdicke::io::write_phase_diagram_csv;
use nrdicke::model::{adiabatic_rhs, enslaved_field, full_rhs, parity_transform, pt_transform, reduced_plus_rhs};
use nrdicke::spectral::{classify_regime, dominant_peaks, fft_spectrum, mean_intensity, Observable, RegimeLabel};
use nrdicke::stability::{
    coalescence_scan, find_exceptional_points, jacobian, np_spectrum, np_spectrum_closed_form, np_transverse_report,
    EPS_STAB,
};
use nrdicke::{BlochVector, ModelParams, ModelVariant, SystemState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// ω_l = 20, κ = 12.5, δ = Γ↓ = 0.
fn fig2() -> ModelParams {
    ModelParams::default()
}

fn threshold_oracle(p: &ModelParams) -> f64 {
    (p.omega0 * (p.omega_l * p.omega_l + p.kappa * p.kappa / 4.0) / (2.0 * p.omega_l)).sqrt()
}

fn crossing(variant: ModelVariant) -> f64 {
    let growth = |lambda: f64| np_spectrum(&fig2().with_lambda(lambda), variant).unwrap().max_real;
    let (mut lo, mut hi) = (1.0, 5.0);
    assert!(growth(lo) <= EPS_STAB && growth(hi) > EPS_STAB);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if growth(mid) > EPS_STAB {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1() -> Outcome {
    let oracle = threshold_oracle(&fig2());
    let full = crossing(ModelVariant::Full);
    let adiabatic = crossing(ModelVariant::Adiabatic);
    let pass = (oracle - 3.3131).abs() < 5e-4 && (full - 3.3131).abs() <= 0.005 && (adiabatic - 3.3131).abs() <= 0.005;
    outcome(pass, format!("lambda_c: oracle {oracle:.5}, FULL {full:.5}, ADIABATIC {adiabatic:.5} (target 3.3131 +- 0.005)"))
}

fn criterion_2() -> Outcome {
    let p = fig2().with_lambda(2.5);
    let a = (2.0 * p.omega_l / p.kappa).atan();
    let oracle = [0.5 * a / PI, 0.5 * (PI - a) / PI];
    let eps = find_exceptional_points(&p, 0.0, FRAC_PI_2).unwrap();
    let found: Vec<f64> = eps.iter().map(|e| e.phi / PI).collect();
    let located = eps.len() == 2
        && eps.iter().zip(oracle).all(|(e, o)| (e.phi / PI - o).abs() <= 1e-4)
        && eps.iter().zip([0.20180, 0.29820]).all(|(e, o)| (e.phi / PI - o).abs() <= 1e-4);
    let confirmed = eps.iter().all(|e| e.confirmed && e.gap < 1e-6 && e.vector_angle < 1e-3);

    let mut phis: Vec<f64> = (1..4000).map(|k| FRAC_PI_2 * k as f64 / 4000.0).collect();
    phis.extend(eps.iter().map(|e| e.phi));
    let full_gap = coalescence_scan(&p, ModelVariant::Full, &phis)
        .unwrap()
        .iter()
        .map(|&(_, gap, _)| gap)
        .fold(f64::INFINITY, f64::min);
    let pass = located && confirmed && full_gap > 1e-2;
    outcome(
        pass,
        format!(
            "EPs at {:?} pi (oracle {:.5}, {:.5}), confirmed {confirmed}; FULL min gap {full_gap:.3e} (> 1e-2)",
            found.iter().map(|v| format!("{v:.5}")).collect::<Vec<_>>(),
            oracle[0],
            oracle[1]
        ),
    )
}

fn criterion_3() -> Outcome {
    let p = fig2().with_lambda(2.5).with_phi(FRAC_PI_4);
    // η² = −ω₀(ω₀ − ξ) ± ω₀ √(χ₊χ₋) for the δ = Γ↓ = 0 normal phase
    let d = p.omega_l * p.omega_l + p.kappa * p.kappa / 4.0;
    let l2 = p.lambda * p.lambda;
    let xi = l2 * p.omega_l / d;
    let (s2, c2) = (2.0 * p.phi).sin_cos();
    let chi_p = -l2 * (p.omega_l * c2 + 0.5 * p.kappa * s2) / d;
    let chi_m = -l2 * (p.omega_l * c2 - 0.5 * p.kappa * s2) / d;
    let root = Complex64::new(chi_p * chi_m, 0.0).sqrt();
    let oracle = [1.0, -1.0]
        .into_iter()
        .map(|s| Complex64::new(-p.omega0 * (p.omega0 - xi), 0.0) + s * p.omega0 * root)
        .map(|e2| e2.sqrt().re.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let closed = np_spectrum_closed_form(&p).unwrap().max_real;
    let numeric = np_spectrum(&p, ModelVariant::Adiabatic).unwrap().max_real;
    let pass = (oracle - 0.0525).abs() <= 1e-4
        && (closed - 0.0525).abs() <= 1e-4
        && (numeric - 0.0525).abs() <= 1e-4
        && (closed - numeric).abs() <= 1e-10;
    outcome(pass, format!("max Re eta: oracle {oracle:.6}, closed form {closed:.6}, 6x6 numeric {numeric:.6} (0.0525 +- 1e-4)"))
}

fn criterion_4() -> Outcome {
    let p = fig2().with_lambda(2.5);
    let interior: Vec<f64> = (1..=101).map(|k| FRAC_PI_2 * k as f64 / 102.0).collect();
    let growth = |phi: f64| np_transverse_report(&p.with_phi(phi), ModelVariant::Full).unwrap().max_real;
    let min_interior = interior.iter().map(|&phi| growth(phi)).fold(f64::INFINITY, f64::min);
    let ends = [growth(0.0), growth(FRAC_PI_2)];
    let full_ends = [
        np_spectrum(&p.with_phi(0.0), ModelVariant::Full).unwrap().max_real,
        np_spectrum(&p.with_phi(FRAC_PI_2), ModelVariant::Full).unwrap().max_real,
    ];
    let pass = min_interior > 0.0 && ends.iter().chain(&full_ends).all(|&g| g <= EPS_STAB);
    outcome(
        pass,
        format!(
            "FULL max Re eta: min over 101 interior phi {min_interior:.3e} (> 0); at phi = 0, pi/2: {:.3e}, {:.3e} (<= {EPS_STAB:e})",
            full_ends[0], full_ends[1]
        ),
    )
}

fn criterion_5() -> Outcome {
    let p = fig2().with_lambda(3.0).with_phi(FRAC_PI_4);
    let report = attractor_census(&p, 64, 2024, &CensusConfig::default()).unwrap();
    let angles: Vec<f64> = report.clusters.iter().filter_map(|c| c.signature.locking_angle).collect();
    let mapped = report.clusters.len() == 2
        && report.clusters.iter().enumerate().all(|(i, c)| {
            c.pt_partner == Some(1 - i) && c.signature.pt_image().distance(&report.clusters[1 - i].signature) < EPS_CLUSTER
        });
    let near = |target: f64| angles.iter().any(|a| (a - target).abs() <= 1e-2);
    let pass = report.cluster_count() == 2 && mapped && angles.len() == 2 && near(FRAC_PI_4) && near(3.0 * FRAC_PI_4);
    outcome(
        pass,
        format!(
            "{} clusters, PT-paired {mapped}, locking angles {:?} (targets 0.78540, 2.35619 +- 1e-2)",
            report.cluster_count(),
            angles.iter().map(|a| format!("{a:.5}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = fig2().with_lambda(3.0).with_phi(FRAC_PI_4);
    let cfg = IntegratorConfig { sample_dt: 0.05, ..IntegratorConfig::default() }.with_window(19000.0, 20000.0);
    let kick = default_initial_conditions(InitialCondition::PerturbedNp, 0);
    let mut traj = integrate(ModelVariant::Full, &kick, &p, &cfg).unwrap();
    // the attractor whose + species oscillates along z; its PT partner is
    // reached from the mirrored kick
    if traj.half_ranges()[2] < traj.half_ranges()[5] {
        traj = integrate(ModelVariant::Full, &pt_transform(&kick), &p, &cfg).unwrap();
    }
    let window = cfg.t_final - cfg.t_transient;
    let beta = fft_spectrum(&traj, Observable::Beta).unwrap();
    let sz = fft_spectrum(&traj, "sz_p".parse().unwrap()).unwrap();
    let bin = beta.resolution;
    let strongest = |spec: &nrdicke::spectral::FrequencySpectrum, keep: &dyn Fn(f64) -> bool| {
        dominant_peaks(spec, 0.0)
            .into_iter()
            .filter(|pk| keep(pk.frequency))
            .max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
            .map(|pk| pk.frequency)
            .unwrap_or(f64::NAN)
    };
    let f_pos = strongest(&beta, &|f| f > bin);
    let f_neg = strongest(&beta, &|f| f < -bin);
    let f_sz = strongest(&sz, &|f| f > bin);
    let pass = window >= 628.0
        && bin <= 0.01
        && (f_pos - 1.0).abs() <= bin
        && (f_neg + 1.0).abs() <= bin
        && (f_sz - 2.0).abs() <= bin;
    outcome(
        pass,
        format!("bin {bin:.5} (window {window}); beta peaks {f_pos:.5}, {f_neg:.5} (+-1); sz_p peak {f_sz:.5} (2)"),
    )
}

fn criterion_7() -> Outcome {
    let relax = IntegratorConfig::default().with_window(4800.0, 5000.0);
    let post = IntegratorConfig::default().with_window(9800.0, 10000.0);
    let broken = quench_phi(&fig2().with_lambda(2.5).with_phi(FRAC_PI_4), &relax, &post).unwrap();
    let unbroken = quench_phi(&fig2().with_lambda(5.5).with_phi(FRAC_PI_8), &relax, &post).unwrap();
    let pass = broken.verdict == QuenchVerdict::PtBroken
        && broken.distance >= 10.0 * EPS_ORBIT
        && unbroken.verdict == QuenchVerdict::PtInvariant;
    outcome(
        pass,
        format!(
            "lambda=2.5, phi=pi/4: {:?} (d = {:.3e}, margin needs >= {:.1e}); lambda=5.5, phi=pi/8: {:?} (d = {:.3e})",
            broken.verdict,
            broken.distance,
            10.0 * EPS_ORBIT,
            unbroken.verdict,
            unbroken.distance
        ),
    )
}

fn criterion_8() -> Outcome {
    let p = fig2().with_delta(0.05);
    let axes = [
        AxisSpec::new(SweepParameter::Lambda, 0.0, 6.0, 32),
        AxisSpec::new(SweepParameter::Phi, 0.0, FRAC_PI_2, 32),
    ];
    let d = sweep(&p, axes, ModelVariant::Full, 7, &SweepConfig::default()).unwrap();
    let (np, dp) = (d.count(PhaseLabel::Np), d.count(PhaseLabel::Dp));
    // small λ near φ = 0: lowest quarter of the λ axis, first φ column
    let np_corner = (0..8).all(|r| d.cell(r, 0).label == PhaseLabel::Np);
    let topology = np > 0 && dp > 0 && np_corner;

    let census = attractor_census(&p.with_lambda(3.0).with_phi(FRAC_PI_4), 64, 2024, &CensusConfig::default()).unwrap();
    let summary: Vec<String> = census
        .clusters
        .iter()
        .map(|c| {
            format!(
                "[{} ICs, angle {:.3}, sz {:.3}/{:.3}]",
                c.members.len(),
                c.signature.locking_angle.unwrap_or(f64::NAN),
                c.signature.mean_sz_plus,
                c.signature.mean_sz_minus
            )
        })
        .collect();
    let pass = topology && census.cluster_count() == 1;
    outcome(
        pass,
        format!(
            "sweep 32x32: NP {np}, DP {dp}, NP at small lambda near phi=0 {np_corner}; census lambda=3, phi=pi/4: {} cluster(s) (need 1) {}",
            census.cluster_count(),
            summary.join(" ")
        ),
    )
}

struct ScanPoint {
    lambda: f64,
    label: RegimeLabel,
    state_label: FixedPointLabel,
    intensity: f64,
    /// Strongest positive- and negative-frequency peaks of β.
    peaks: Option<((f64, f64), (f64, f64))>,
    dc: f64,
}

fn criterion_9() -> Outcome {
    let template = ModelParams { gamma_down: 0.02, phi: PI / 5.0, ..fig2() };
    let cfg = IntegratorConfig { sample_dt: 0.05, ..IntegratorConfig::default() }.with_window(5000.0, 6000.0);
    let kick = default_initial_conditions(InitialCondition::PerturbedNp, 0);
    use rayon::prelude::*;
    let scan: Vec<ScanPoint> = (0..121)
        .into_par_iter()
        .map(|k| {
            let lambda = 0.05 * k as f64;
            let traj = integrate(ModelVariant::Full, &kick, &template.with_lambda(lambda), &cfg).unwrap();
            let regime = classify_regime(&traj).unwrap();
            let beta = fft_spectrum(&traj, Observable::Beta).unwrap();
            let bin = beta.resolution;
            let top = |sign: f64| {
                dominant_peaks(&beta, 0.0)
                    .into_iter()
                    .filter(|pk| sign * pk.frequency > bin)
                    .max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))
                    .map(|pk| (pk.frequency, pk.amplitude))
            };
            ScanPoint {
                lambda,
                label: regime.label,
                state_label: classify_state(traj.last().unwrap()),
                intensity: mean_intensity(&traj),
                peaks: top(1.0).zip(top(-1.0)),
                dc: regime.dc_amplitude,
            }
        })
        .collect();

    let band = |pred: &dyn Fn(&ScanPoint) -> bool| -> Vec<usize> { (0..scan.len()).filter(|&i| pred(&scan[i])).collect() };
    let lc = band(&|s| s.label == RegimeLabel::LimitCycle);
    let dsr = band(&|s| s.label == RegimeLabel::Dsr);
    let sp = band(&|s| s.label == RegimeLabel::Stationary && s.state_label == FixedPointLabel::SpAligned);

    let asymmetric = |s: &ScanPoint| {
        s.peaks.is_some_and(|((_, a), (_, b))| (a - b).abs() > 1e-3 * a.max(b))
    };
    let lc_ok = !lc.is_empty() && lc.iter().all(|&i| asymmetric(&scan[i]));
    let separation = |s: &ScanPoint| s.peaks.map(|((fp, _), (fm, _))| fp - fm).unwrap_or(f64::NAN);
    let repelling = dsr.len() >= 2 && dsr.windows(2).all(|w| separation(&scan[w[1]]) > separation(&scan[w[0]]));
    let dsr_ok = !dsr.is_empty() && dsr.iter().all(|&i| scan[i].dc >= 1e-3) && repelling;
    let ordered = match (lc.last(), dsr.first(), dsr.last(), sp.first()) {
        (Some(&l), Some(&d0), Some(&d1), Some(&s)) => l < d0 && d1 < s,
        _ => false,
    };
    let increments: Vec<f64> = scan.windows(2).map(|w| (w[1].intensity - w[0].intensity).abs()).collect();
    let mut sorted = increments.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let jump = sp.first().filter(|&&s| s > 0).map(|&s| increments[s - 1]).unwrap_or(0.0);
    let jump_ok = jump >= 10.0 * median;

    let span = |idx: &[usize]| match (idx.first(), idx.last()) {
        (Some(&a), Some(&b)) => format!("{:.2}..{:.2} ({} pts)", scan[a].lambda, scan[b].lambda, idx.len()),
        _ => "none".to_string(),
    };
    let pass = lc_ok && dsr_ok && ordered && !sp.is_empty() && jump_ok;
    outcome(
        pass,
        format!(
            "LIMIT_CYCLE {} asymmetric {lc_ok}; DSR {} (repelling, DC >= 1e-3: {dsr_ok}); SP_ALIGNED {}; ordered {ordered}; intensity jump {jump:.3e} vs 10x median {:.3e}",
            span(&lc),
            span(&dsr),
            span(&sp),
            10.0 * median
        ),
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> SystemState {
    let mut ball = || {
        let v = random_unit_vector(rng);
        let r: f64 = rng.random::<f64>().cbrt();
        BlochVector::new(r * v.sx, r * v.sy, r * v.sz)
    };
    let (a, b) = (ball(), ball());
    SystemState::new(a, b, Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams {
        omega_l: rng.random_range(1.0..30.0),
        omega0: rng.random_range(0.5..2.0),
        delta: rng.random_range(-0.3..0.3),
        lambda: rng.random_range(0.0..6.0),
        phi: rng.random_range(-3.0..3.0),
        kappa: rng.random_range(0.1..20.0),
        gamma_down: rng.random_range(0.0..0.2),
    }
}

fn fd_deviation(analytic: &DMatrix<f64>, f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut dev: f64 = 0.0;
    for c in 0..n {
        let h = 1e-6 * x[c].abs().max(1.0);
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[c] += h;
        xm[c] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        for r in 0..n {
            dev = dev.max((analytic[(r, c)] - (fp[r] - fm[r]) / (2.0 * h)).abs());
        }
    }
    dev / analytic.amax().max(1.0)
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut equivariance_exact = true;
    let mut identity: f64 = 0.0;
    let mut jac: f64 = 0.0;
    for _ in 0..2000 {
        let (x, p) = (random_state(&mut rng), random_params(&mut rng));
        let dx = full_rhs(&x, &p).unwrap().to_array();
        let parity = full_rhs(&parity_transform(&x), &p).unwrap().to_array();
        let negated = [-dx[0], -dx[1], dx[2], -dx[3], -dx[4], dx[5], -dx[6], -dx[7]];
        let pt = full_rhs(&pt_transform(&x), &p.pt_image()).unwrap();
        equivariance_exact &= parity == negated && pt == pt_transform(&SystemState::from_array(&dx));

        let (a, b) = x.spins();
        let full = full_rhs(&SystemState::new(a, b, enslaved_field((a, b), &p).unwrap()), &p).unwrap().to_array();
        let (da, db) = adiabatic_rhs((a, b), &p).unwrap();
        for (k, v) in [da.sx, da.sy, da.sz, db.sx, db.sy, db.sz].into_iter().enumerate() {
            identity = identity.max((full[k] - v).abs() / full[k].abs().max(v.abs()).max(1.0));
        }

        let xa = x.to_array();
        jac = jac.max(fd_deviation(
            &jacobian(&x, &p, ModelVariant::Full).unwrap(),
            |y| full_rhs(&SystemState::from_array(y.try_into().unwrap()), &p).unwrap().to_array().to_vec(),
            &xa,
        ));
        jac = jac.max(fd_deviation(
            &jacobian(&x, &p, ModelVariant::Adiabatic).unwrap(),
            |y| {
                let (a, b) = adiabatic_rhs((BlochVector::new(y[0], y[1], y[2]), BlochVector::new(y[3], y[4], y[5])), &p).unwrap();
                vec![a.sx, a.sy, a.sz, b.sx, b.sy, b.sz]
            },
            &xa[..6],
        ));
        jac = jac.max(fd_deviation(
            &jacobian(&x, &p, ModelVariant::ReducedPlus).unwrap(),
            |y| {
                let d = reduced_plus_rhs(&BlochVector::new(y[0], y[1], y[2]), &p).unwrap();
                vec![d.sx, d.sy, d.sz]
            },
            &xa[..3],
        ));
    }

    // the default 1e-10 step control accumulates ~6e-8 of norm error by t = 1000
    let norm_cfg = IntegratorConfig { t_final: 1000.0, t_transient: 0.0, sample_dt: 0.1, abs_tol: 1e-12, rel_tol: 1e-12, ..Default::default() };
    let mut drift: f64 = 0.0;
    let mut parseval: f64 = 0.0;
    for (lambda, phi) in [(3.0, FRAC_PI_4), (2.5, PI / 5.0), (5.5, FRAC_PI_8)] {
        let p = fig2().with_lambda(lambda).with_phi(phi);
        let x0 = SystemState::from_array(&[0.6, 0.0, -0.8, 0.0, 0.6, -0.8, 0.0, 0.0]);
        let traj = integrate(ModelVariant::Full, &x0, &p, &norm_cfg).unwrap();
        for s in &traj.states {
            drift = drift.max((s.spin_plus.norm() - 1.0).abs()).max((s.spin_minus.norm() - 1.0).abs());
        }
        for obs in ["beta", "abs_beta", "re_beta", "im_beta", "sx_p", "sy_p", "sz_p", "sx_m", "sy_m", "sz_m"] {
            parseval = parseval.max(fft_spectrum(&traj, obs.parse().unwrap()).unwrap().parseval_error());
        }
    }

    let p = fig2().with_delta(0.05);
    let axes = [
        AxisSpec::new(SweepParameter::Lambda, 1.0, 5.0, 6),
        AxisSpec::new(SweepParameter::Phi, 0.1, 1.4, 6),
    ];
    let cfg = SweepConfig { n_random_ic: 2, ..SweepConfig::default() };
    let csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let d = pool.install(|| sweep(&p, axes, ModelVariant::Full, 99, &cfg).unwrap());
        let mut buf = Vec::new();
        write_phase_diagram_csv(&mut buf, &d).unwrap();
        buf
    };
    let reference = csv(1);
    let deterministic = [2, 4, 7].into_iter().all(|t| csv(t) == reference);

    let pass = equivariance_exact && identity <= 1e-12 && jac <= 1e-6 && drift <= 1e-8 && parseval <= 1e-10 && deterministic;
    outcome(
        pass,
        format!(
            "parity/PT exact {equivariance_exact}; identity {identity:.1e} (<= 1e-12); Jacobian FD {jac:.1e} (<= 1e-6); norm drift {drift:.1e} (<= 1e-8); Parseval {parseval:.1e} (<= 1e-10); sweep byte-identical across 1/2/4/7 threads {deterministic}"
        ),
    )
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("reciprocal threshold", criterion_1),
        ("exceptional-point pair", criterion_2),
        ("growth-rate spot check", criterion_3),
        ("full-model NP erasure", criterion_4),
        ("two PT-paired attractors", criterion_5),
        ("frequency locking and doubling", criterion_6),
        ("quench verdicts", criterion_7),
        ("explicit PT breaking", criterion_8),
        ("dynamical superradiance scan", criterion_9),
        ("property suites", criterion_10),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {} [{:.1}s]", k + 1, result.detail, start.elapsed().as_secs_f64());
        if !result.pass {
            failed.push(k + 1);
        }
    }
    println!("acceptance: {}/{} criteria pass; failing: {failed:?}", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() && std::env::var("NRDICKE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
