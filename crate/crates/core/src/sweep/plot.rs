//! Self-contained SVG plots with fixed-precision coordinates, so identical
//! sweeps give identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;

use super::config::RunConfig;
use super::run::SweepResult;
use crate::audit::{fit_line, theory_rate, ClaimReport};
use crate::dispersion::{asymptotic_sigma, cutoff_wavenumbers, Branch};
use crate::grid::Spacing;
use crate::model::PhysicalParams;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 56.0;

const COLOR_A: &str = "#1f5fa8";
const COLOR_B: &str = "#c0392b";

fn branch_color(branch: Branch) -> &'static str {
    match branch {
        Branch::A => COLOR_A,
        Branch::B => COLOR_B,
    }
}

/// Maps data to pixels.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if lo == hi {
                (lo - 1.0, hi + 1.0)
            } else {
                (lo, hi)
            }
        };
        let x = range(&mut xs.clone());
        let (ylo, yhi) = range(&mut ys.clone());
        let pad = 0.05 * (yhi - ylo);
        Frame {
            x,
            y: (ylo - pad, yhi + pad),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str, hash: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<!-- config-sha256: {hash} -->");
    let _ = writeln!(out, "<metadata>config-sha256 {hash}</metadata>");
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axes(
    out: &mut String,
    frame: &Frame,
    x_ticks: &[(f64, String)],
    y_ticks: &[(f64, String)],
    x_label: &str,
    y_label: &str,
) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (v, label) in x_ticks {
        let x = frame.px(*v);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="#dddddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            y0 + 16.0,
            escape(label)
        );
    }
    for (v, label) in y_ticks {
        let y = frame.py(*v);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            y + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

/// Polylines through consecutive defined points; `None` breaks the line.
fn polylines(
    out: &mut String,
    frame: &Frame,
    points: &[Option<(f64, f64)>],
    color: &str,
    dashed: bool,
) {
    let dash = if dashed {
        r#" stroke-dasharray="6 4""#
    } else {
        ""
    };
    for run in points.split(|p| p.is_none()) {
        if run.len() < 2 {
            continue;
        }
        let coords: Vec<String> = run
            .iter()
            .flatten()
            .map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#,
            coords.join(" ")
        );
    }
}

fn legend(out: &mut String, entries: &[(&str, &str, bool)]) {
    for (i, (label, color, dashed)) in entries.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * i as f64;
        let x = LEFT + 12.0;
        let dash = if *dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.6"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 28.0,
            x + 34.0,
            y + 4.0,
            escape(label)
        );
    }
}

fn symlog(v: f64) -> f64 {
    v.signum() * v.abs().ln_1p() / std::f64::consts::LN_10
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let span = hi - lo;
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut ticks = Vec::new();
    let mut v = (lo / step).ceil() * step;
    while v <= hi + 1e-9 * span {
        let label = if step >= 1.0 {
            format!("{v:.0}")
        } else {
            format!("{v:.*}", (-step.log10().floor()) as usize)
        };
        ticks.push((v, label));
        v += step;
    }
    ticks
}

/// Growth-rate branches against `k` on a symmetric-log axis, with the
/// asymptotes dashed.
pub fn render_dispersion(result: &SweepResult) -> String {
    let params: Option<PhysicalParams> = result.params.validate().ok();
    let log_x = result.k_grid.spacing() == Spacing::Log;
    let xmap = |k: f64| if log_x { k.log10() } else { k };
    let series = |branch: Branch| -> Vec<Option<(f64, f64)>> {
        result
            .rows
            .iter()
            .map(|r| r.branch(branch).map(|c| (xmap(r.k), symlog(c.sigma_re))))
            .collect()
    };
    let asymptote = |branch: Branch| -> Vec<Option<(f64, f64)>> {
        result
            .rows
            .iter()
            .map(|r| {
                let p = params.as_ref()?;
                (r.k > 0.0).then(|| {
                    let (sa, sb) = asymptotic_sigma(p, r.k);
                    let s = if branch == Branch::A { sa } else { sb };
                    (xmap(r.k), symlog(s))
                })
            })
            .collect()
    };
    let curves = [
        (series(Branch::A), COLOR_A, false),
        (series(Branch::B), COLOR_B, false),
        (asymptote(Branch::A), COLOR_A, true),
        (asymptote(Branch::B), COLOR_B, true),
    ];
    let all = curves
        .iter()
        .flat_map(|(c, _, _)| c.iter().flatten().copied());
    let frame = Frame::new(all.clone().map(|p| p.0), all.map(|p| p.1));

    let mut out = String::new();
    header(&mut out, "Growth-rate branches", &result.config_hash);
    let x_ticks: Vec<(f64, String)> = if log_x {
        let (lo, hi) = (frame.x.0.floor() as i32, frame.x.1.ceil() as i32);
        (lo..=hi)
            .map(|e| (e as f64, format!("1e{e}")))
            .filter(|(v, _)| *v >= frame.x.0 && *v <= frame.x.1)
            .collect()
    } else {
        linear_ticks(frame.x.0, frame.x.1)
    };
    let y_ticks: Vec<(f64, String)> = (-12..=12)
        .map(|e: i32| {
            let mag = e.unsigned_abs() as i32 - 1;
            match e.signum() {
                0 => (0.0, "0".to_string()),
                s => (
                    symlog(s as f64 * 10f64.powi(mag)),
                    format!("{}1e{mag}", if s < 0 { "-" } else { "" }),
                ),
            }
        })
        .filter(|(v, _)| *v >= frame.y.0 && *v <= frame.y.1)
        .collect();
    axes(
        &mut out,
        &frame,
        &x_ticks,
        &y_ticks,
        if log_x { "k (log scale)" } else { "k" },
        "Re sigma (symmetric log)",
    );
    for (points, color, dashed) in &curves {
        polylines(&mut out, &frame, points, color, *dashed);
    }
    legend(
        &mut out,
        &[
            ("A-side branch", COLOR_A, false),
            ("B-side branch", COLOR_B, false),
            ("E_a/(mu_L+mu)", COLOR_A, true),
            ("E_b/(mu_R+mu)", COLOR_B, true),
        ],
    );
    out.push_str("</svg>\n");
    out
}

/// `log|f(a, k)|` along `branch` with the fitted slope over the upper
/// `fit_fraction` of the points past both cutoffs and the expected slope.
pub fn render_boundedness(
    result: &SweepResult,
    branch: Branch,
    fit_fraction: f64,
    audit: &[ClaimReport],
) -> String {
    let params = result.params.validate().ok();
    let cutoff = params.as_ref().map_or(0.0, |p| {
        let (ka, kb) = cutoff_wavenumbers(p);
        ka.max(kb)
    });
    let points: Vec<Option<(f64, f64)>> = result
        .rows
        .iter()
        .map(|r| r.branch(branch).and_then(|c| c.log_f_a).map(|v| (r.k, v)))
        .collect();
    let past: Vec<(f64, f64)> = points
        .iter()
        .flatten()
        .copied()
        .filter(|(k, _)| *k > cutoff)
        .collect();
    let keep = ((past.len() as f64 * fit_fraction.clamp(0.0, 1.0)).ceil() as usize).min(past.len());
    let window = &past[past.len() - keep..];
    let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.1).collect();
    let fit = fit_line(&xs, &ys);
    let theory = params
        .as_ref()
        .map(|p| theory_rate(p, result.normalization, branch));

    let mut lines: Vec<(Vec<Option<(f64, f64)>>, &str, bool)> =
        vec![(points.clone(), branch_color(branch), false)];
    if let (Some(f), Some(&(k0, _)), Some(&(k1, y1))) = (fit, window.first(), window.last()) {
        lines.push((
            vec![
                Some((k0, f.intercept + f.slope * k0)),
                Some((k1, f.intercept + f.slope * k1)),
            ],
            "#222222",
            true,
        ));
        if let Some(t) = theory {
            lines.push((
                vec![Some((k0, y1 - t * (k1 - k0))), Some((k1, y1))],
                "#2e8b57",
                true,
            ));
        }
    }
    let all = lines
        .iter()
        .flat_map(|(c, _, _)| c.iter().flatten().copied());
    let frame = Frame::new(all.clone().map(|p| p.0), all.map(|p| p.1));

    let mut out = String::new();
    header(
        &mut out,
        &format!("log|f(a,k)| along the {branch} branch"),
        &result.config_hash,
    );
    axes(
        &mut out,
        &frame,
        &linear_ticks(frame.x.0, frame.x.1),
        &linear_ticks(frame.y.0, frame.y.1),
        "k",
        "log|f(a,k)|",
    );
    for (pts, color, dashed) in &lines {
        polylines(&mut out, &frame, pts, color, *dashed);
    }
    legend(
        &mut out,
        &[
            ("log|f(a,k)|", branch_color(branch), false),
            ("least-squares fit", "#222222", true),
            ("expected slope", "#2e8b57", true),
        ],
    );
    let mut notes = Vec::new();
    if let Some(f) = fit {
        notes.push(format!(
            "fitted slope {:.4} +- {:.1e}",
            f.slope, f.slope_stderr
        ));
    }
    if let Some(t) = theory {
        notes.push(format!("expected slope {t:.4}"));
    }
    for r in audit.iter().take(16) {
        notes.push(format!("{}: {:?}", r.claim_id, r.status).to_lowercase());
    }
    for (i, note) in notes.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            WIDTH - RIGHT - 10.0,
            TOP + 16.0 + 15.0 * i as f64,
            escape(note)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes whichever plots the configuration names.
pub fn emit_plots(
    result: &SweepResult,
    audit: &[ClaimReport],
    config: &RunConfig,
) -> io::Result<()> {
    if let Some(path) = &config.outputs.svg_dispersion {
        fs::write(path, render_dispersion(result))?;
    }
    if let Some(path) = &config.outputs.svg_boundedness {
        fs::write(
            path,
            render_boundedness(
                result,
                config.branch.primary(),
                config.tolerances.fit_window_fraction,
                audit,
            ),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{parse_config, run_sweep};

    #[test]
    fn dispersion_plot_embeds_hash() {
        let config = parse_config("normalization = constant\nk_count = 40\n").unwrap();
        let result = run_sweep(&config).unwrap();
        let svg = render_dispersion(&result);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(&config.config_hash));
        assert_eq!(svg.matches("stroke-dasharray").count(), 4);
        assert_eq!(svg, render_dispersion(&result));
    }

    #[test]
    fn boundedness_plot_reports_slopes() {
        let text = "normalization = constant\na = -10\nb = -1\nk_min = 2\nk_max = 22\nk_count = 40\nk_spacing = linear\n";
        let result = run_sweep(&parse_config(text).unwrap()).unwrap();
        let svg = render_boundedness(&result, Branch::A, 0.5, &[]);
        assert!(svg.contains("expected slope 8.0000"));
        let fitted: f64 = svg
            .split("fitted slope ")
            .nth(1)
            .and_then(|s| s.split_whitespace().next())
            .unwrap()
            .parse()
            .unwrap();
        assert!((fitted - 8.0).abs() < 0.4, "{fitted}");

        let narrow = "normalization = constant\na = -2\nb = -1.5\nk_min = 2\nk_max = 82\nk_count = 40\nk_spacing = linear\n";
        let result = run_sweep(&parse_config(narrow).unwrap()).unwrap();
        let svg = render_boundedness(&result, Branch::A, 0.5, &[]);
        assert!(svg.contains("expected slope -1.0000"));
    }

    #[test]
    fn ticks_are_round() {
        let t = linear_ticks(0.0, 10.0);
        assert_eq!(t.first().unwrap().1, "0");
        assert_eq!(t.last().unwrap().1, "10");
        assert_eq!(symlog(0.0), 0.0);
        assert!((symlog(9.0) - 1.0).abs() < 1e-15);
    }
}
