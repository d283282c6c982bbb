//! File emission: deterministic CSV floats, atomic writes, the JSON
//! manifest that accompanies every artifact, and the standalone SVG chart
//! for the deformation scan.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use ssh_emergence_core::homotopy::GapScanRow;

use crate::{CliError, ParameterMap};

/// 15-significant-digit scientific notation: enough that re-parsing and
/// re-emitting reproduces the same bytes, compact enough to stay readable.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.14e}")
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    parameters: &'a ParameterMap,
    version: &'a str,
    duration_seconds: f64,
    output: String,
    sha256: String,
}

/// Everything needed to stamp output files with their provenance.
pub struct Artifacts {
    pub command: &'static str,
    pub parameters: ParameterMap,
    pub started: Instant,
}

impl Artifacts {
    /// Writes `bytes` to `path` (atomically: temp file in the same
    /// directory, then rename) and a `<path>.manifest.json` next to it
    /// carrying the resolved parameters and a SHA-256 of the bytes.
    pub fn write(&self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(path, bytes)?;

        let digest = Sha256::digest(bytes);
        let manifest = RunManifest {
            command: self.command,
            parameters: &self.parameters,
            version: env!("CARGO_PKG_VERSION"),
            duration_seconds: self.started.elapsed().as_secs_f64(),
            output: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: format!("{digest:x}"),
        };
        let mut json = serde_json::to_string_pretty(&manifest)
            .expect("manifest serialization cannot fail");
        json.push('\n');

        let mut manifest_name = path.as_os_str().to_owned();
        manifest_name.push(".manifest.json");
        write_atomic(Path::new(&manifest_name), json.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = Path::new(&tmp);
    std::fs::write(tmp, bytes)?;
    std::fs::rename(tmp, path).map_err(CliError::Io)
}

/// Self-contained line chart of the four band-edge curves against the
/// deformation parameter: solid for the zone-center pair, dashed for the
/// zone-edge pair whose gap the deformation is designed to keep open.
pub fn homotopy_svg(rows: &[GapScanRow]) -> String {
    const WIDTH: f64 = 720.0;
    const HEIGHT: f64 = 480.0;
    const LEFT: f64 = 72.0;
    const RIGHT: f64 = 24.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 48.0;

    // Legend label, stroke colour, extra stroke attributes, row accessor.
    type Curve = (&'static str, &'static str, &'static str, fn(&GapScanRow) -> f64);
    let curves: [Curve; 4] = [
        ("mu1(0)", "#1f77b4", "", |r| r.mu1_0),
        ("mu2(0)", "#1f77b4", "stroke-dasharray=\"6 3\" ", |r| r.mu2_0),
        ("mu1(pi)", "#d62728", "", |r| r.mu1_pi),
        ("mu2(pi)", "#d62728", "stroke-dasharray=\"6 3\" ", |r| r.mu2_pi),
    ];

    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        for (_, _, _, get) in &curves {
            y_min = y_min.min(get(r));
            y_max = y_max.max(get(r));
        }
    }
    let pad = 0.05 * (y_max - y_min).max(1e-12);
    let (y_min, y_max) = (y_min - pad, y_max + pad);

    let x_of = |eps: f64| LEFT + (eps + 1.0) / 2.0 * (WIDTH - LEFT - RIGHT);
    let y_of = |v: f64| HEIGHT - BOTTOM - (v - y_min) / (y_max - y_min) * (HEIGHT - TOP - BOTTOM);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\">lowest band edges along the \
         deformation</text>\n",
        0.5 * WIDTH
    );

    // Axes with end labels.
    svg.push_str(&format!(
        "<line x1=\"{LEFT}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{0}\" stroke=\"black\"/>\n",
        HEIGHT - BOTTOM,
        WIDTH - RIGHT
    ));
    for eps in [-1.0, 0.0, 1.0] {
        let x = x_of(eps);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{0}\" x2=\"{x:.2}\" y2=\"{1}\" stroke=\"black\"/>\n\
             <text x=\"{x:.2}\" y=\"{2}\" text-anchor=\"middle\">{eps}</text>\n",
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 6.0,
            HEIGHT - BOTTOM + 22.0
        ));
    }
    for v in [y_min, y_max] {
        let y = y_of(v);
        svg.push_str(&format!(
            "<text x=\"{0}\" y=\"{y:.2}\" text-anchor=\"end\" dominant-baseline=\"middle\">\
             {v:.3}</text>\n",
            LEFT - 8.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">eps</text>\n",
        0.5 * WIDTH,
        HEIGHT - 8.0
    ));

    for (label, color, extra, get) in &curves {
        let mut points = String::new();
        for r in rows {
            points.push_str(&format!("{:.2},{:.2} ", x_of(r.eps), y_of(get(r))));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" {extra}\
             points=\"{}\"><title>{label}</title></polyline>\n",
            points.trim_end()
        ));
    }

    // Legend, top-left inside the plot area.
    for (i, (label, color, extra, _)) in curves.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{y:.2}\" x2=\"{1}\" y2=\"{y:.2}\" stroke=\"{color}\" \
             stroke-width=\"1.5\" {extra}/>\n\
             <text x=\"{2}\" y=\"{3:.2}\">{label}</text>\n",
            LEFT + 12.0,
            LEFT + 44.0,
            LEFT + 52.0,
            y + 4.0
        ));
    }

    svg.push_str("</svg>\n");
    svg
}
