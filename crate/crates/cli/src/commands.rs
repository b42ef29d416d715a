//! Subcommand implementations. Each writes its artifacts through an
//! [`Emitter`] and reports numerical failures after partial output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nrdicke::dynamics::{default_initial_conditions, integrate, Trajectory};
use nrdicke::experiments::{
    adiabatic_consistency_check, attractor_census, quench_phi_orbits, sweep, AxisSpec, PhaseLabel,
};
use nrdicke::fixed_points::find_all;
use nrdicke::io::{self as nio, SpectrumSweepRow};
use nrdicke::spectral::{classify_regime, fft_spectrum, mean_intensity, Observable};
use nrdicke::stability::{coalescence_scan, find_exceptional_points, np_spectrum, spectrum_at};
use nrdicke::{Error as CoreError, SystemState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::{plot, CliError, FailedCell};

/// Writes files into the output directory and remembers their names.
pub struct Emitter {
    dir: PathBuf,
    pub written: Vec<String>,
}

impl Emitter {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn file<F>(&mut self, name: &str, write: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> nrdicke::Result<()>,
    {
        let path = self.dir.join(name);
        let io_err = |e: String| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = BufWriter::new(File::create(&path).map_err(|e| io_err(e.to_string()))?);
        write(&mut w).map_err(|e| io_err(e.to_string()))?;
        w.flush().map_err(|e| io_err(e.to_string()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.file(name, |w| nio::write_json(w, value))
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.file(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub format: Format,
    pub plot: bool,
}

impl Context<'_> {
    /// CSV is written for the csv format and whenever a plot script needs it.
    fn wants_csv(&self) -> bool {
        self.format == Format::Csv || self.plot
    }

    fn wants_json(&self) -> bool {
        self.format == Format::Json
    }
}

fn numerical(e: CoreError) -> CliError {
    match e {
        CoreError::InvalidField { .. } => CliError::Config(e.to_string()),
        other => CliError::Numerical { message: other.to_string(), failed_cells: Vec::new() },
    }
}

/// Series written as `<stem>.csv` and/or `<stem>.json` depending on the format.
fn series<T, F>(ctx: &Context, em: &mut Emitter, stem: &str, value: &T, csv: F) -> Result<String, CliError>
where
    T: Serialize + ?Sized,
    F: FnOnce(&mut BufWriter<File>) -> nrdicke::Result<()>,
{
    let csv_name = format!("{stem}.csv");
    if ctx.wants_csv() {
        em.file(&csv_name, csv)?;
    }
    if ctx.wants_json() {
        em.json(&format!("{stem}.json"), value)?;
    }
    Ok(csv_name)
}

fn initial_state(cfg: &RunConfig) -> SystemState {
    match cfg.simulate.state {
        Some(x) => SystemState::from_array(&x),
        None => default_initial_conditions(cfg.simulate.initial, cfg.seed),
    }
}

pub fn simulate(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let traj = integrate(cfg.variant, &initial_state(cfg), &cfg.model, &cfg.integrator).map_err(numerical)?;
    let csv = series(ctx, em, "trajectory", &traj, |w| nio::write_trajectory_csv(w, &traj))?;
    if ctx.plot {
        em.text("simulate.gp", &plot::simulate(&csv))?;
    }
    Ok(())
}

pub fn fixed_points(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let mut set = find_all(&cfg.model, cfg.variant, &cfg.fixed_points, cfg.seed);
    for fp in &mut set.points {
        spectrum_at(fp, &cfg.model, cfg.variant).map_err(numerical)?;
    }
    em.json("fixed_points.json", &set)?;
    if ctx.plot {
        eprintln!("fixed-points: report only, no plot script");
    }
    Ok(())
}

/// JSON form of an eigenvalue sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweep {
    pub parameter: String,
    pub rows: Vec<SpectrumSweepRow>,
}

pub fn np_spectrum_sweep(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let axis = cfg.np_spectrum.sweep;
    let rows = axis
        .values()
        .into_iter()
        .map(|v| {
            let p = axis.name.apply(cfg.model, v);
            let report = np_spectrum(&p, cfg.variant)?;
            Ok(SpectrumSweepRow { value: v, eigenvalues: report.eigenvalues })
        })
        .collect::<nrdicke::Result<Vec<_>>>()
        .map_err(numerical)?;
    let parameter = axis.name.name().to_string();
    let width = rows.first().map_or(0, |r| r.eigenvalues.len());
    let doc = SpectrumSweep { parameter: parameter.clone(), rows };
    let csv = series(ctx, em, "np_spectrum", &doc, |w| nio::write_spectrum_sweep_csv(w, &parameter, &doc.rows))?;
    if ctx.plot {
        em.text("np_spectrum.gp", &plot::np_spectrum(&csv, &parameter, width))?;
    }
    Ok(())
}

/// One point of the coalescence scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceRow {
    pub phi: f64,
    pub gap: f64,
    #[serde(with = "nrdicke::io::nonfinite")]
    pub vector_angle: f64,
}

pub const COALESCENCE_HEADER: [&str; 3] = ["phi", "gap", "vector_angle"];

pub fn ep_scan(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let scan = &cfg.ep_scan;
    let eps = find_exceptional_points(&cfg.model, scan.phi_min, scan.phi_max).map_err(numerical)?;
    em.json("exceptional_points.json", &eps)?;
    let phis = AxisSpec::new(nrdicke::experiments::SweepParameter::Phi, scan.phi_min, scan.phi_max, scan.count).values();
    let rows: Vec<CoalescenceRow> = coalescence_scan(&cfg.model, cfg.variant, &phis)
        .map_err(numerical)?
        .into_iter()
        .map(|(phi, gap, vector_angle)| CoalescenceRow { phi, gap, vector_angle })
        .collect();
    let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.phi, r.gap, r.vector_angle]).collect();
    let csv = series(ctx, em, "coalescence", &rows, |w| nio::write_table_csv(w, &COALESCENCE_HEADER, &table))?;
    if ctx.plot {
        let located: Vec<f64> = eps.iter().map(|e| e.phi).collect();
        em.text("ep_scan.gp", &plot::ep_scan(&csv, &located))?;
    }
    Ok(())
}

pub fn phase_diagram(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let pd = &cfg.phase_diagram;
    let diagram = sweep(&cfg.model, pd.axes, cfg.variant, cfg.seed, &pd.sweep).map_err(numerical)?;
    let csv = series(ctx, em, "phase_diagram", &diagram, |w| nio::write_phase_diagram_csv(w, &diagram))?;
    if ctx.plot {
        let [x, y] = pd.axes.map(|a| a.name.name());
        if pd.axes[1].count == 1 {
            em.text("intensity.gp", &plot::intensity(&csv, x))?;
        } else {
            em.text("phase_diagram.gp", &plot::phase_diagram(&csv, x, y))?;
        }
    }
    let failed: Vec<FailedCell> = diagram
        .cells
        .iter()
        .filter(|c| c.label == PhaseLabel::Failed)
        .map(|c| FailedCell {
            row: c.row,
            col: c.col,
            coords: c.coords,
            error: c.error.clone().unwrap_or_default(),
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical {
            message: format!("{} of {} cells failed", failed.len(), diagram.cells.len()),
            failed_cells: failed,
        })
    }
}

pub const SCAN_HEADER: [&str; 3] = ["parameter", "frequency", "amplitude"];
pub const SCAN_INTENSITY_HEADER: [&str; 2] = ["parameter", "mean_intensity"];

/// Spectrogram rows `[value, frequency, amplitude]` within the band, and the
/// mean intensity, for one scanned value.
fn scan_point(ctx: &Context, axis: &AxisSpec, value: f64) -> nrdicke::Result<(Vec<Vec<f64>>, f64)> {
    let cfg = ctx.cfg;
    let p = axis.name.apply(cfg.model, value);
    let x0 = default_initial_conditions(cfg.spectrum.initial, cfg.seed);
    let traj = integrate(cfg.variant, &x0, &p, &cfg.integrator)?;
    let spec = fft_spectrum(&traj, Observable::Beta)?;
    let rows = spec
        .frequencies
        .iter()
        .zip(&spec.amplitudes)
        .filter(|(f, _)| f.abs() <= cfg.spectrum.scan_band)
        .map(|(f, a)| vec![value, *f, *a])
        .collect();
    Ok((rows, mean_intensity(&traj)))
}

pub fn spectrum(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let x0 = default_initial_conditions(cfg.spectrum.initial, cfg.seed);
    let traj: Trajectory = integrate(cfg.variant, &x0, &cfg.model, &cfg.integrator).map_err(numerical)?;
    let mut files = Vec::new();
    for obs in &cfg.spectrum.observables {
        let spec = fft_spectrum(&traj, *obs).map_err(numerical)?;
        let name = obs.name();
        let csv = series(ctx, em, &format!("spectrum_{name}"), &spec, |w| nio::write_spectrum_csv(w, &spec))?;
        files.push((name, csv));
    }
    let regime = classify_regime(&traj).map_err(numerical)?;
    em.json("regime.json", &regime)?;
    if ctx.plot {
        em.text("spectrum.gp", &plot::spectra(&files))?;
    }
    if let Some(axis) = cfg.spectrum.scan {
        let points = axis
            .values()
            .into_par_iter()
            .map(|v| scan_point(ctx, &axis, v))
            .collect::<nrdicke::Result<Vec<_>>>()
            .map_err(numerical)?;
        let values = axis.values();
        let spectrogram: Vec<Vec<f64>> = points.iter().flat_map(|(rows, _)| rows.iter().cloned()).collect();
        let intensity: Vec<Vec<f64>> = values.iter().zip(&points).map(|(v, (_, i))| vec![*v, *i]).collect();
        em.file("spectrum_scan.csv", |w| nio::write_table_csv(w, &SCAN_HEADER, &spectrogram))?;
        em.file("spectrum_scan_intensity.csv", |w| nio::write_table_csv(w, &SCAN_INTENSITY_HEADER, &intensity))?;
        if ctx.plot {
            em.text(
                "spectrum_scan.gp",
                &plot::spectrum_scan("spectrum_scan.csv", "spectrum_scan_intensity.csv", axis.name.name()),
            )?;
        }
    }
    Ok(())
}

pub fn quench(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (report, pre, post) = quench_phi_orbits(&cfg.model, &cfg.quench.relax, &cfg.quench.post).map_err(numerical)?;
    em.json("quench.json", &report)?;
    if ctx.plot {
        em.file("quench_pre.csv", |w| nio::write_trajectory_csv(w, &pre))?;
        em.file("quench_post.csv", |w| nio::write_trajectory_csv(w, &post))?;
        em.text("quench.gp", &plot::quench("quench_pre.csv", "quench_post.csv", cfg.quench.relax.t_final))?;
    }
    Ok(())
}

pub const SIGNATURE_HEADER: [&str; 8] = [
    "ic",
    "locking_angle",
    "mean_sz_plus",
    "mean_sz_minus",
    "amp_sz_plus",
    "amp_sz_minus",
    "field_amplitude",
    "cluster",
];

pub fn census(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let report =
        attractor_census(&cfg.model, cfg.census.n_ic, cfg.seed, &cfg.census.census_config()).map_err(numerical)?;
    em.json("census.json", &report)?;
    if ctx.wants_csv() {
        let mut cluster = vec![-1.0; report.signatures.len()];
        for (k, c) in report.clusters.iter().enumerate() {
            for &m in &c.members {
                cluster[m] = k as f64;
            }
        }
        let rows: Vec<Vec<f64>> = report
            .signatures
            .iter()
            .enumerate()
            .map(|(i, s)| {
                vec![
                    i as f64,
                    s.locking_angle.unwrap_or(f64::NAN),
                    s.mean_sz_plus,
                    s.mean_sz_minus,
                    s.amp_sz_plus,
                    s.amp_sz_minus,
                    s.field_amplitude,
                    cluster[i],
                ]
            })
            .collect();
        em.file("census_signatures.csv", |w| nio::write_table_csv(w, &SIGNATURE_HEADER, &rows))?;
    }
    if ctx.plot {
        em.text("census.gp", &plot::census("census_signatures.csv"))?;
    }
    Ok(())
}

pub const SCALING_HEADER: [&str; 4] = ["scale", "max_real_full", "max_real_adiabatic", "deviation"];

pub fn consistency(ctx: &Context, em: &mut Emitter) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let report = adiabatic_consistency_check(&cfg.model, cfg.consistency.n_samples, cfg.seed).map_err(numerical)?;
    em.json("consistency.json", &report)?;
    if ctx.wants_csv() {
        let rows: Vec<Vec<f64>> = report
            .scaling
            .iter()
            .map(|s| vec![s.scale, s.max_real_full, s.max_real_adiabatic, s.deviation])
            .collect();
        em.file("consistency_scaling.csv", |w| nio::write_table_csv(w, &SCALING_HEADER, &rows))?;
    }
    if ctx.plot {
        em.text("consistency.gp", &plot::consistency("consistency_scaling.csv"))?;
    }
    Ok(())
}
