//! Gnuplot scripts for the emitted CSV files.
//!
//! Each script is run from the output directory (`gnuplot <name>.gp`) and
//! renders `<name>.png` next to it.

use nrdicke::experiments::PhaseLabel;

fn preamble(name: &str, width: u32, height: u32) -> String {
    format!(
        "set terminal pngcairo size {width},{height} enhanced\n\
         set output '{name}.png'\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set grid\n"
    )
}

/// Time series of both inversions, the field plane and the Bloch spheres.
pub fn simulate(data: &str) -> String {
    let mut s = preamble("simulate", 1200, 900);
    s.push_str(&format!(
        "set multiplot layout 2,2\n\
         set xlabel 't'\nset ylabel 's_z'\n\
         plot '{data}' using 1:4 with lines title 's_{{z,+}}', '' using 1:7 with lines title 's_{{z,-}}'\n\
         set xlabel 'Re {{/Symbol b}}'\nset ylabel 'Im {{/Symbol b}}'\nset size ratio -1\n\
         plot '{data}' using 8:9 with lines notitle\n\
         set size noratio\n\
         set xlabel 's_x'\nset ylabel 's_y'\nset zlabel 's_z'\n\
         set view equal xyz\n\
         set xrange [-1:1]\nset yrange [-1:1]\nset zrange [-1:1]\n\
         set parametric\nset isosamples 13,13\nset urange [0:2*pi]\nset vrange [-pi/2:pi/2]\n\
         splot cos(u)*cos(v),sin(u)*cos(v),sin(v) with lines lc rgb '#dddddd' notitle, \
         '{data}' using 2:3:4 with lines title '+', '' using 5:6:7 with lines title '-'\n\
         unset parametric\n\
         unset multiplot\n"
    ));
    s
}

/// Real parts of all normal-phase eigenvalues against the swept parameter.
pub fn np_spectrum(data: &str, parameter: &str, n_eigenvalues: usize) -> String {
    let mut s = preamble("np_spectrum", 900, 600);
    s.push_str(&format!(
        "set xlabel '{parameter}'\nset ylabel 'Re {{/Symbol l}}'\n\
         plot for [k=0:{last}] '{data}' using 1:(column(2+2*k)) with lines lc rgb '#1f77b4' notitle, \
         0 with lines dt 2 lc rgb 'black' notitle\n",
        last = n_eigenvalues.saturating_sub(1),
    ));
    s
}

/// Eigenvalue gap and eigenvector angle of the transverse block, with the
/// located exceptional points marked.
pub fn ep_scan(data: &str, eps: &[f64]) -> String {
    let mut s = preamble("ep_scan", 900, 600);
    for phi in eps {
        s.push_str(&format!("set arrow from {phi:.16e}, graph 0 to {phi:.16e}, graph 1 nohead lc rgb '#9467bd'\n"));
    }
    s.push_str(&format!(
        "set xlabel '{{/Symbol f}}'\nset logscale y\n\
         plot '{data}' using 1:2 with lines title 'eigenvalue gap', '' using 1:3 with lines title 'eigenvector angle'\n"
    ));
    s
}

/// Colour map of the phase labels.
pub fn phase_diagram(data: &str, x: &str, y: &str) -> String {
    let labels: Vec<&str> = PhaseLabel::ALL.iter().map(|l| l.name()).collect();
    let mut code = String::from("code(s) = ");
    for (k, name) in labels.iter().enumerate() {
        code.push_str(&format!("s eq '{name}' ? {k} : "));
    }
    code.push_str("-1\n");
    let tics: Vec<String> = labels.iter().enumerate().map(|(k, n)| format!("'{}' {k}", n.replace('_', "\\_"))).collect();
    let mut s = preamble("phase_diagram", 1000, 800);
    s.push_str(&code);
    s.push_str(&format!(
        "set xlabel '{x}'\nset ylabel '{y}'\n\
         set cbrange [-0.5:{top}.5]\nset palette maxcolors {n}\nset cbtics ({tics})\n\
         plot '{data}' using 1:2:(code(strcol(3))) with points pt 5 ps 1 palette notitle\n",
        top = labels.len() - 1,
        n = labels.len(),
        tics = tics.join(", "),
    ));
    s
}

/// Mean intensity along a one-dimensional sweep.
pub fn intensity(data: &str, x: &str) -> String {
    let mut s = preamble("intensity", 900, 600);
    s.push_str(&format!(
        "set xlabel '{x}'\nset ylabel '|{{/Symbol b}}|^2'\n\
         plot '{data}' using 1:5 with linespoints notitle\n"
    ));
    s
}

/// Amplitude spectra, one panel per observable.
pub fn spectra(files: &[(String, String)]) -> String {
    let mut s = preamble("spectrum", 900, 300 * files.len().max(1) as u32);
    s.push_str(&format!("set multiplot layout {},1\nset logscale y\nset xlabel 'frequency'\n", files.len()));
    for (name, file) in files {
        s.push_str(&format!("plot '{file}' using 1:2 with lines title '{}'\n", name.replace('_', "\\_")));
    }
    s.push_str("unset multiplot\n");
    s
}

/// Spectrogram of `β` against the scanned parameter, plus mean intensity.
pub fn spectrum_scan(data: &str, intensity: &str, parameter: &str) -> String {
    let mut s = preamble("spectrum_scan", 900, 1000);
    s.push_str(&format!(
        "set multiplot layout 2,1\n\
         set xlabel '{parameter}'\nset ylabel 'frequency'\nset logscale cb\n\
         plot '{data}' using 1:2:3 with points pt 5 ps 0.5 palette notitle\n\
         unset logscale cb\n\
         set ylabel '|{{/Symbol b}}|^2'\n\
         plot '{intensity}' using 1:2 with linespoints notitle\n\
         unset multiplot\n"
    ));
    s
}

/// Inversions before and after the `φ → −φ` quench at `t_quench`.
pub fn quench(pre: &str, post: &str, t_quench: f64) -> String {
    let mut s = preamble("quench", 1000, 500);
    s.push_str(&format!(
        "set xlabel 't'\nset ylabel 's_z'\n\
         set arrow from {t_quench:.16e}, graph 0 to {t_quench:.16e}, graph 1 nohead dt 2\n\
         plot '{pre}' using 1:4 with lines lc 1 title 's_{{z,+}}', '' using 1:7 with lines lc 2 title 's_{{z,-}}', \
         '{post}' using ($1+{t_quench:.16e}):4 with lines lc 1 notitle, '' using ($1+{t_quench:.16e}):7 with lines lc 2 notitle\n"
    ));
    s
}

/// Orbit signatures coloured by cluster.
pub fn census(data: &str) -> String {
    let mut s = preamble("census", 800, 700);
    s.push_str(&format!(
        "set xlabel '<s_{{z,+}}>'\nset ylabel '<s_{{z,-}}>'\n\
         plot '{data}' using 3:4:8 with points pt 7 ps 1.5 palette notitle\n"
    ));
    s
}

/// Deviation of the adiabatic from the full spectrum as the cavity scale grows.
pub fn consistency(data: &str) -> String {
    let mut s = preamble("consistency", 800, 600);
    s.push_str(&format!(
        "set xlabel 'cavity scale'\nset ylabel 'max Re deviation'\nset logscale xy\n\
         plot '{data}' using 1:4 with linespoints notitle\n"
    ));
    s
}
