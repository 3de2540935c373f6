use std::fmt::Write as _;
use std::io::Write;

use super::sim::BifurcationResult;
use super::HarnessError;

pub const CSV_HEADER: [&str; 8] = [
    "epsilon",
    "agent_id",
    "proposition",
    "limit_mass",
    "cluster_id",
    "cluster_count",
    "consensus",
    "iterations",
];

/// One row per agent per grid point; agent and cluster ids are 1-based.
pub fn emit_csv<W: Write>(result: &BifurcationResult, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| HarnessError::Runtime(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for p in &result.points {
        for (agent, (&mass, &cluster)) in p.limit_mass.iter().zip(&p.cluster_ids).enumerate() {
            w.write_record([
                p.epsilon.to_string(),
                (agent + 1).to_string(),
                result.proposition.clone(),
                mass.to_string(),
                (cluster + 1).to_string(),
                p.cluster_count.to_string(),
                p.consensus.to_string(),
                p.iterations.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    Ok(())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Scatter of limit mass against ε, one mark per agent per grid point.
pub fn emit_bifurcation_svg<W: Write>(
    result: &BifurcationResult,
    mut out: W,
) -> Result<(), HarnessError> {
    let (lo, hi) = match (result.points.first(), result.points.last()) {
        (Some(a), Some(b)) if b.epsilon > a.epsilon => (a.epsilon, b.epsilon),
        (Some(a), _) => (a.epsilon - 0.5, a.epsilon + 0.5),
        _ => (0.0, 1.0),
    };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |e: f64| MARGIN + (e - lo) / (hi - lo) * plot_w;
    let y = |m: f64| HEIGHT - MARGIN - m.clamp(0.0, 1.0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}"/></g>"#,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="11" fill="black">"#
    );
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let e = lo + t * (hi - lo);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#,
            x(e),
            HEIGHT - MARGIN + 16.0,
            e
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.1}</text>"#,
            MARGIN - 6.0,
            y(t) + 4.0,
            t
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">ε</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">m({})</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        result.proposition
    );
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r##"<g fill="#1f4e9c" fill-opacity="0.7">"##);
    for p in &result.points {
        for &m in &p.limit_mass {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#,
                x(p.epsilon),
                y(m)
            );
        }
    }
    let _ = writeln!(svg, "</g>\n</svg>");
    out.write_all(svg.as_bytes())
        .map_err(|e| HarnessError::Runtime(e.to_string()))
}
