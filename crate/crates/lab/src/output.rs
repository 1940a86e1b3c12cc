//! CSV and SVG writers. Numbers are printed with the shortest round-trip
//! representation, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use harmext_core::covering::CylinderReport;

use crate::LabError;

/// Plain decimal in `[1e-4, 1e15)`, exponent notation outside.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes a CSV file with a header row and `\n` line endings.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<PathBuf, LabError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Cross-section of one cylinder's stack at the chart coordinate
/// `u₂ = offset`: chart coordinate `u₁` across, `ρ` upwards.
pub fn stack_svg(report: &CylinderReport, r0: f64, offset: f64) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 40.0;
    let c = &report.cylinder;
    let a = c.disk.radius();
    let x = |u: f64| PAD + (u + a) / (2.0 * a) * (W - 2.0 * PAD);
    let y = |rho: f64| H - PAD - (rho - c.r_in) / (c.r_out - c.r_in) * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    // Whole cylinder; whatever stays grey is leftover.
    let _ = writeln!(
        svg,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#e0e0e0" stroke="black"/>"##,
        x(-a),
        y(c.r_out),
        x(a) - x(-a),
        y(c.r_in) - y(c.r_out)
    );
    for s in &report.sectors {
        if !(s.rect.lo[1] <= offset && offset < s.rect.hi[1]) {
            continue;
        }
        let fill = if s.good { "#9ecae1" } else { "#fc9272" };
        let _ = writeln!(
            svg,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}" stroke="#08306b" stroke-width="0.5"/>"##,
            x(s.rect.lo[0]),
            y(s.rho_max()),
            x(s.rect.hi[0]) - x(s.rect.lo[0]),
            y(s.rho_min) - y(s.rho_max())
        );
    }
    let stop = c.r_out - r0;
    if stop > c.r_in {
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{:.3}" x2="{}" y2="{:.3}" stroke="black" stroke-dasharray="4 3"/>"#,
            x(-a),
            y(stop),
            x(a),
            y(stop)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{:.3}" font-size="12" font-family="sans-serif">ρ = {:.3}</text>"#,
        H - 0.3 * PAD,
        c.r_in
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{:.3}" font-size="12" font-family="sans-serif">ρ = {:.3}</text>"#,
        0.7 * PAD,
        c.r_out
    );
    svg.push_str("</svg>\n");
    svg
}
