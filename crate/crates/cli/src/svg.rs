//! Minimal hand-rolled SVG: the transfer projected onto its own plane as a
//! polyline, with the primary and both endpoints marked. No drawing stack —
//! the output is a few dozen elements of static markup.

use nalgebra::Vector3;
use tfc_lambert::TransferFrame;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN: f64 = 40.0;

/// Renders trajectory positions into an SVG document. Points are projected
/// onto the transfer plane spanned by the departure radial and transverse
/// directions; out-of-plane motion is flattened.
pub fn transfer_plane_plot(track: &[Vector3<f64>], frame: &TransferFrame) -> String {
    let project = |r: &Vector3<f64>| (r.dot(&frame.r_hat0), r.dot(&frame.t_hat0));
    let points: Vec<(f64, f64)> = track.iter().map(project).collect();

    // Fit the track and the primary (at the origin) into the viewport.
    let mut min_x: f64 = 0.0;
    let mut max_x: f64 = 0.0;
    let mut min_y: f64 = 0.0;
    let mut max_y: f64 = 0.0;
    for &(x, y) in &points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(f64::MIN_POSITIVE);
    let scale = (WIDTH - 2.0 * MARGIN).min(HEIGHT - 2.0 * MARGIN) / span;
    let to_px = |(x, y): (f64, f64)| {
        (
            MARGIN + (x - min_x) * scale,
            // SVG y grows downward; flip so the transverse direction
            // points up.
            HEIGHT - MARGIN - (y - min_y) * scale,
        )
    };

    let polyline: Vec<String> = points
        .iter()
        .map(|&p| {
            let (x, y) = to_px(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let (origin_x, origin_y) = to_px((0.0, 0.0));
    let (start_x, start_y) = to_px(points[0]);
    let (end_x, end_y) = to_px(*points.last().expect("track is never empty"));

    format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
  <rect width="100%" height="100%" fill="white"/>
  <polyline points="{points}" fill="none" stroke="#336699" stroke-width="1.5"/>
  <circle cx="{origin_x:.2}" cy="{origin_y:.2}" r="6" fill="#222222"/>
  <circle cx="{start_x:.2}" cy="{start_y:.2}" r="4" fill="#2a9d2a"/>
  <circle cx="{end_x:.2}" cy="{end_y:.2}" r="4" fill="#d65f1e"/>
  <text x="{start_x:.2}" y="{start_ly:.2}" font-family="sans-serif" font-size="12">r0</text>
  <text x="{end_x:.2}" y="{end_ly:.2}" font-family="sans-serif" font-size="12">rf</text>
</svg>
"##,
        points = polyline.join(" "),
        start_ly = start_y - 8.0,
        end_ly = end_y - 8.0,
    )
}
