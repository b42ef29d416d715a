//! Text formats for trajectories, spectra, sweeps and reports.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! re-parses to the identical `f64`. Non-finite values are written as
//! `NaN`, `inf` or `-inf`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::experiments::{PhaseCell, PhaseDiagram};
use crate::model::SystemState;
use crate::spectral::FrequencySpectrum;

pub const TRAJECTORY_HEADER: [&str; 9] =
    ["t", "sx_p", "sy_p", "sz_p", "sx_m", "sy_m", "sz_m", "re_beta", "im_beta"];

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(column: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("column `{column}`: cannot parse `{s}` as a number")))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected header `{}`, expected `{}`",
            header.iter().collect::<Vec<_>>().join(","),
            expected.join(",")
        )));
    }
    Ok(())
}

/// Sampled times and states as read back from a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
}

pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    write_samples_csv(w, &traj.times, &traj.states)
}

pub fn write_samples_csv<W: Write>(w: W, times: &[f64], states: &[SystemState]) -> Result<()> {
    if times.len() != states.len() {
        return Err(Error::Domain("times and states differ in length".into()));
    }
    let mut wtr = writer(w);
    wtr.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for (t, s) in times.iter().zip(states) {
        let row = std::iter::once(*t).chain(s.to_array()).map(format_f64);
        wtr.write_record(row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(r: R) -> Result<TrajectoryTable> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &TRAJECTORY_HEADER)?;
    let mut table = TrajectoryTable::default();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let mut v = [0.0; 9];
        for (k, (slot, name)) in v.iter_mut().zip(TRAJECTORY_HEADER).enumerate() {
            *slot = parse_f64(name, &rec[k])?;
        }
        table.times.push(v[0]);
        let mut x = [0.0; 8];
        x.copy_from_slice(&v[1..]);
        table.states.push(SystemState::from_array(&x));
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumTable {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

pub fn write_spectrum_csv<W: Write>(w: W, spec: &FrequencySpectrum) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["frequency", "amplitude"]).map_err(csv_err)?;
    for (f, a) in spec.frequencies.iter().zip(&spec.amplitudes) {
        wtr.write_record([format_f64(*f), format_f64(*a)]).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_spectrum_csv<R: Read>(r: R) -> Result<SpectrumTable> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &["frequency", "amplitude"])?;
    let mut table = SpectrumTable::default();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        table.frequencies.push(parse_f64("frequency", &rec[0])?);
        table.amplitudes.push(parse_f64("amplitude", &rec[1])?);
    }
    Ok(table)
}

/// One row of an eigenvalue sweep: the swept value and the sorted spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweepRow {
    pub value: f64,
    pub eigenvalues: Vec<Complex64>,
}

/// Columns: the swept parameter, then `re_k,im_k` for each eigenvalue.
pub fn write_spectrum_sweep_csv<W: Write>(w: W, parameter: &str, rows: &[SpectrumSweepRow]) -> Result<()> {
    let width = rows.first().map_or(0, |r| r.eigenvalues.len());
    if rows.iter().any(|r| r.eigenvalues.len() != width) {
        return Err(Error::Domain("spectrum sweep rows differ in width".into()));
    }
    let mut wtr = writer(w);
    let mut header = vec![parameter.to_string()];
    for k in 0..width {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![format_f64(row.value)];
        for z in &row.eigenvalues {
            rec.push(format_f64(z.re));
            rec.push(format_f64(z.im));
        }
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Returns the swept parameter name and the rows.
pub fn read_spectrum_sweep_csv<R: Read>(r: R) -> Result<(String, Vec<SpectrumSweepRow>)> {
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() % 2 != 1 {
        return Err(Error::Parse("spectrum sweep needs one parameter column plus re/im pairs".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let value = parse_f64(&header[0], &rec[0])?;
        let eigenvalues = (1..rec.len())
            .step_by(2)
            .map(|k| Ok(Complex64::new(parse_f64(&header[k], &rec[k])?, parse_f64(&header[k + 1], &rec[k + 1])?)))
            .collect::<Result<_>>()?;
        rows.push(SpectrumSweepRow { value, eigenvalues });
    }
    Ok((header[0].to_string(), rows))
}

const CELL_COLUMNS: [&str; 6] = ["label", "max_growth", "mean_intensity", "n_attractors", "regime", "error"];

/// One row per cell in row-major order; the first two columns are named
/// after the sweep axes. Empty fields stand for absent optional values.
pub fn write_phase_diagram_csv<W: Write>(w: W, diagram: &PhaseDiagram) -> Result<()> {
    let mut wtr = writer(w);
    let header: Vec<&str> = [diagram.axes[0].name.name(), diagram.axes[1].name.name()]
        .into_iter()
        .chain(CELL_COLUMNS)
        .collect();
    wtr.write_record(&header).map_err(csv_err)?;
    for c in &diagram.cells {
        wtr.write_record([
            format_f64(c.coords[0]),
            format_f64(c.coords[1]),
            c.label.name().to_string(),
            format_f64(c.max_growth),
            format_f64(c.mean_intensity),
            c.n_attractors.map(|n| n.to_string()).unwrap_or_default(),
            c.regime.map(|r| r.name().to_string()).unwrap_or_default(),
            c.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads cells back; `row`/`col` are recovered from the row-major order
/// given the number of points on the second axis.
pub fn read_phase_diagram_csv<R: Read>(r: R, n_cols: usize) -> Result<Vec<PhaseCell>> {
    if n_cols == 0 {
        return Err(Error::Domain("second axis needs at least one point".into()));
    }
    let mut rdr = reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() != 8 || header.iter().skip(2).ne(CELL_COLUMNS) {
        return Err(Error::Parse("unexpected phase diagram header".into()));
    }
    let optional = |s: &str| if s.is_empty() { None } else { Some(s.to_string()) };
    let mut cells = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let n_attractors = optional(&rec[5])
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("column `n_attractors`: `{s}`"))))
            .transpose()?;
        let regime = optional(&rec[6]).map(|s| s.parse()).transpose()?;
        cells.push(PhaseCell {
            row: i / n_cols,
            col: i % n_cols,
            coords: [parse_f64(&header[0], &rec[0])?, parse_f64(&header[1], &rec[1])?],
            label: rec[2].parse()?,
            max_growth: parse_f64("max_growth", &rec[3])?,
            mean_intensity: parse_f64("mean_intensity", &rec[4])?,
            n_attractors,
            regime,
            error: optional(&rec[7]),
        });
    }
    Ok(cells)
}

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn write_table_csv<W: Write, S: AsRef<str>>(w: W, header: &[S], rows: &[Vec<f64>]) -> Result<()> {
    if rows.iter().any(|r| r.len() != header.len()) {
        return Err(Error::Domain("table row width differs from header".into()));
    }
    let mut wtr = writer(w);
    wtr.write_record(header.iter().map(AsRef::as_ref)).map_err(csv_err)?;
    for row in rows {
        wtr.write_record(row.iter().map(|x| format_f64(*x))).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_table_csv<R: Read>(r: R) -> Result<NumericTable> {
    let mut rdr = reader(r);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(rec.iter().zip(&header).map(|(s, name)| parse_f64(name, s)).collect::<Result<_>>()?);
    }
    Ok(NumericTable { header, rows })
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(r: R) -> Result<T> {
    serde_json::from_reader(r).map_err(|e| Error::Parse(e.to_string()))
}

/// Serde adapter writing non-finite floats as the strings `NaN`, `inf` and
/// `-inf`, which plain JSON numbers cannot represent.
pub mod nonfinite {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::format_f64(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("expected a number, found `{other}`"))),
            },
        }
    }
}
