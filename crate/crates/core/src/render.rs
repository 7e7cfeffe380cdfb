//! SVG output: phases as HSV hue at full saturation and value, real fields on a fixed
//! blue to red gradient.

use std::fmt::Write;

use crate::field::{nearest_rep, wrap};
use crate::graph::{FractalGraph, FractalKind};

const SIZE: f64 = 512.0;
const MARGIN: f64 = 16.0;
const LOW: [f64; 3] = [44.0, 123.0, 182.0];
const HIGH: [f64; 3] = [215.0, 25.0, 28.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ColorScheme {
    Phase,
    Real { min: f64, max: f64 },
}

impl ColorScheme {
    pub fn real_for(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ColorScheme::Real { min, max }
    }

    pub fn color(&self, v: f64) -> String {
        let rgb = match *self {
            ColorScheme::Phase => hsv_to_rgb(wrap(v), 1.0, 1.0),
            ColorScheme::Real { min, max } => {
                let t = if max > min {
                    ((v - min) / (max - min)).clamp(0.0, 1.0)
                } else {
                    0.5
                };
                [0, 1, 2].map(|k| LOW[k] + t * (HIGH[k] - LOW[k]))
            }
        };
        format!(
            "#{:02x}{:02x}{:02x}",
            rgb[0].round() as u8,
            rgb[1].round() as u8,
            rgb[2].round() as u8
        )
    }

    fn mean(&self, vals: &[f64]) -> f64 {
        match self {
            ColorScheme::Phase => {
                let base = vals[0];
                base + vals.iter().map(|&v| nearest_rep(v - base)).sum::<f64>() / vals.len() as f64
            }
            ColorScheme::Real { .. } => vals.iter().sum::<f64>() / vals.len() as f64,
        }
    }
}

/// `h`, `s`, `v` in `[0, 1]`; returns RGB in `[0, 255]`.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h6 = (h * 6.0).rem_euclid(6.0);
    let c = v * s;
    let x = c * (1.0 - ((h6 % 2.0) - 1.0).abs());
    let (r, g, b) = match h6 as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [(r + m) * 255.0, (g + m) * 255.0, (b + m) * 255.0]
}

fn place(g: &FractalGraph, p: [f64; 2]) -> (f64, f64) {
    let span = SIZE - 2.0 * MARGIN;
    match g.kind() {
        FractalKind::Sg => {
            let top = MARGIN + (span - span * 0.866_025_403_784_438_6) / 2.0;
            (MARGIN + p[0] * span, top + (0.866_025_403_784_438_6 - p[1]) * span)
        }
        FractalKind::Ring => {
            let a = std::f64::consts::TAU * p[0];
            (SIZE / 2.0 + span / 2.0 * a.cos(), SIZE / 2.0 - span / 2.0 * a.sin())
        }
    }
}

/// Cells filled with the mean corner colour and vertices drawn as dots.
pub fn render_svg(g: &FractalGraph, values: &[f64], scheme: ColorScheme) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let dot = (SIZE / (g.len() as f64).sqrt() / 6.0).clamp(0.6, 5.0);
    let stroke = (dot * 0.8).max(0.5);
    for (_, ids) in g.cells() {
        let vals: Vec<f64> = ids.iter().map(|&i| values[i]).collect();
        let color = scheme.color(scheme.mean(&vals));
        let pts: Vec<(f64, f64)> = ids.iter().map(|&i| place(g, g.vertices()[i].coords)).collect();
        match g.kind() {
            FractalKind::Sg => {
                let s: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
                let _ = writeln!(out, r#"<polygon points="{}" fill="{color}"/>"#, s.join(" "));
            }
            FractalKind::Ring => {
                let ((x1, y1), (x2, y2)) = (pts[0], pts[1]);
                let _ = writeln!(
                    out,
                    r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{color}" stroke-width="{stroke:.3}"/>"#
                );
            }
        }
    }
    for v in g.vertices() {
        let (x, y) = place(g, v.coords);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{dot:.3}" fill="{}"/>"#,
            scheme.color(values[v.id])
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_ring_graph, build_sg_graph};

    #[test]
    fn hue_wheel() {
        assert_eq!(ColorScheme::Phase.color(0.0), "#ff0000");
        assert_eq!(ColorScheme::Phase.color(1.0 / 3.0), "#00ff00");
        assert_eq!(ColorScheme::Phase.color(2.0 / 3.0), "#0000ff");
        assert_eq!(ColorScheme::Phase.color(1.0), "#ff0000");
    }

    #[test]
    fn gradient_ends() {
        let s = ColorScheme::Real { min: 0.0, max: 1.0 };
        assert_eq!(s.color(0.0), "#2c7bb6");
        assert_eq!(s.color(1.0), "#d7191c");
    }

    #[test]
    fn element_counts() {
        let g = build_sg_graph(2).unwrap();
        let svg = render_svg(&g, &vec![0.0; g.len()], ColorScheme::Phase);
        assert_eq!(svg.matches("<polygon").count(), 9);
        assert_eq!(svg.matches("<circle").count(), g.len());
        let r = build_ring_graph(3).unwrap();
        let svg = render_svg(&r, &vec![0.0; r.len()], ColorScheme::real_for(&[0.0]));
        assert_eq!(svg.matches("<line").count(), 8);
    }
}
