//! Sweep rows, CSV and plot files.

use std::fmt::Write as _;
use std::path::Path;

use qtm_core::thermo::sweep::{MaxPower, SweepPoint};
use qtm_core::thermo::CURRENT_FLOOR;

pub const HEADER: [&str; 16] = [
    "scenario",
    "omega_ratio",
    "w_loc",
    "w_nonloc",
    "q_h_loc",
    "q_h_nonloc",
    "q_c_loc",
    "q_c_nonloc",
    "c_loc",
    "c_nonloc",
    "c_nonloc_factored",
    "regime",
    "figure_of_merit",
    "first_law_residual",
    "entropy_production",
    "error",
];

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row_error(p: &SweepPoint) -> String {
    let mut notes: Vec<String> = p.error.iter().cloned().collect();
    if p.error.is_none() {
        if !p.currents.first_law_holds() {
            notes.push(format!("first-law residual {:.3e}", p.first_law_residual));
        }
        if !(p.entropy_production >= -1e-12) {
            notes.push(format!("negative entropy production {:.3e}", p.entropy_production));
        }
    }
    notes.join("; ")
}

pub fn sweep_row(tag: &str, p: &SweepPoint) -> Vec<String> {
    let c = &p.currents;
    let (cl, cn, cf) = p
        .coherence
        .as_ref()
        .map_or((f64::NAN, f64::NAN, f64::NAN), |m| (m.c_loc, m.c_nonloc, m.c_nonloc_factored));
    vec![
        tag.to_string(),
        num(p.ratio),
        num(c.w_loc),
        num(c.w_nonloc),
        num(c.q_h_loc),
        num(c.q_h_nonloc),
        num(c.q_c_loc),
        num(c.q_c_nonloc),
        num(cl),
        num(cn),
        num(cf),
        p.regime.regime.label().to_string(),
        p.regime.figure_of_merit.map_or(String::new(), num),
        num(p.first_law_residual),
        num(p.entropy_production),
        row_error(p),
    ]
}

fn writer(path: &Path) -> std::io::Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(std::fs::File::create(path)?))
}

pub fn write_sweep_csv(path: &Path, tag: &str, points: &[SweepPoint]) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(HEADER)?;
    for p in points {
        w.write_record(sweep_row(tag, p))?;
    }
    w.flush()
}

pub fn write_summary_csv(path: &Path, rows: &[(String, Result<MaxPower, String>)]) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["scenario", "eta_max", "power_max", "omega_ratio", "refined", "error"])?;
    for (tag, r) in rows {
        match r {
            Ok(m) => w.write_record([
                tag.clone(),
                num(m.eta_max),
                num(m.power_max),
                num(m.ratio),
                m.refined.to_string(),
                String::new(),
            ])?,
            Err(e) => w.write_record([tag.clone(), String::new(), String::new(), String::new(), String::new(), e.clone()])?,
        }
    }
    w.flush()
}

/// Whitespace-separated columns under a `#` header line.
pub fn write_dat(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut out = format!("# {}\n", columns.join(" "));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| num(x)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out)
}

pub fn currents_table(points: &[SweepPoint]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            let c = &p.currents;
            let cl = p.coherence.as_ref().map_or(f64::NAN, |m| m.c_loc);
            vec![p.ratio, c.w(), c.q_h(), c.q_c(), c.w_loc, cl]
        })
        .collect()
}

pub const CURRENT_COLUMNS: [&str; 6] = ["omega_ratio", "w", "q_h", "q_c", "w_loc", "c_loc"];

const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// Extracted power against efficiency, one polyline per scenario.
pub fn power_efficiency_svg(curves: &[(String, Vec<(f64, f64)>)], carnot: f64) -> String {
    let (width, height, pad) = (640.0, 420.0, 50.0);
    let x_max = curves
        .iter()
        .flat_map(|c| c.1.iter().map(|p| p.0))
        .fold(carnot, f64::max);
    let y_max = curves
        .iter()
        .flat_map(|c| c.1.iter().map(|p| -p.1))
        .fold(CURRENT_FLOOR, f64::max);
    let sx = |x: f64| pad + x / x_max * (width - 2.0 * pad);
    let sy = |y: f64| height - pad - y / y_max * (height - 2.0 * pad);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{:.2} {:.2} H{:.2} M{:.2} {:.2} V{:.2}" stroke="black" fill="none"/>"#,
        pad,
        height - pad,
        width - pad,
        pad,
        height - pad,
        pad
    );
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">efficiency</text>"#, width / 2.0, height - 12.0);
    let _ = writeln!(svg, r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">-W</text>"#, height / 2.0, height / 2.0);
    let _ = writeln!(
        svg,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        sx(carnot),
        height - pad,
        pad
    );
    for (i, (tag, pts)) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(eta, w)| format!("{:.2},{:.2}", sx(eta), sy(-w))).collect();
        let _ = writeln!(svg, r#"<polyline points="{}" stroke="{colour}" fill="none"/>"#, path.join(" "));
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="{colour}">{tag}</text>"#,
            width - pad - 40.0,
            pad + 16.0 * i as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}
