//! Hand-rolled standalone SVG figures. Output is built in a fixed order
//! with fixed-precision coordinates, so identical inputs give identical
//! bytes — the figures are diff-able in CI.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::CliError;
use crate::sweep::SweepRows;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 720.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 470.0;

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Pixel coordinate with two decimals; `-0.00` is normalized away.
fn c2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.xmin) / (self.xmax - self.xmin).max(1e-12) * (RIGHT - LEFT)
    }

    fn py(&self, y: f64) -> f64 {
        BOTTOM - (y - self.ymin) / (self.ymax - self.ymin).max(1e-12) * (BOTTOM - TOP)
    }
}

struct Series<'a> {
    label: String,
    points: Vec<(f64, f64)>,
    color: &'a str,
    width: f64,
    dash: Option<&'a str>,
}

fn render(title: &str, x_label: &str, y_label: &str, frame: &Frame, series: &[Series]) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"15\" \
         text-anchor=\"middle\">{title}</text>\n",
        (LEFT + RIGHT) / 2.0
    );

    // Axes, ticks, grid.
    let _ = write!(
        out,
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = c2(LEFT),
        r = c2(RIGHT),
        t = c2(TOP),
        b = c2(BOTTOM)
    );
    for i in 0..=5u32 {
        let fx = frame.xmin + f64::from(i) * (frame.xmax - frame.xmin) / 5.0;
        let fy = frame.ymin + f64::from(i) * (frame.ymax - frame.ymin) / 5.0;
        let px = c2(frame.px(fx));
        let py = c2(frame.py(fy));
        let _ = write!(
            out,
            "<line x1=\"{px}\" y1=\"{b}\" x2=\"{px}\" y2=\"{b2}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{ly}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"middle\">{lx}</text>\n\
             <line x1=\"{l}\" y1=\"{py}\" x2=\"{l2}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{tx}\" y=\"{tyy}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"end\">{lyv}</text>\n",
            b = c2(BOTTOM),
            b2 = c2(BOTTOM + 6.0),
            ly = c2(BOTTOM + 20.0),
            lx = tick_label(fx),
            l = c2(LEFT),
            l2 = c2(LEFT - 6.0),
            tx = c2(LEFT - 10.0),
            tyy = c2(frame.py(fy) + 4.0),
            lyv = tick_label(fy),
        );
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"18\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{y_label}</text>\n",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 42.0,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    for s in series {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", c2(frame.px(x)), c2(frame.py(y))))
            .collect();
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = write!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{} points=\"{}\"/>\n",
            s.color,
            s.width,
            dash,
            pts.join(" ")
        );
    }

    // Legend, top-right inside the frame.
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 16.0 + 18.0 * i as f64;
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = write!(
            out,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{}\" \
             stroke-width=\"{}\"{}/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
            c2(RIGHT - 190.0),
            c2(RIGHT - 160.0),
            s.color,
            s.width,
            dash,
            c2(RIGHT - 152.0),
            c2(y + 4.0),
            s.label
        );
    }

    out.push_str("</svg>\n");
    out
}

/// Renders the figure matching the sweep kind; `verify` has none.
pub fn emit_svg(rows: &SweepRows) -> Result<String, CliError> {
    match rows {
        SweepRows::QubitBounds(rows) => {
            if rows.is_empty() {
                return Err(CliError::usage("no rows to plot"));
            }
            let frame = Frame {
                xmin: rows.first().unwrap().theta,
                xmax: rows.last().unwrap().theta,
                ymin: 0.0,
                ymax: 1.02,
            };
            let series = vec![
                Series {
                    label: "lower_epr2".into(),
                    points: rows.iter().map(|r| (r.theta, r.lower_epr2)).collect(),
                    color: PALETTE[0],
                    width: 1.2,
                    dash: None,
                },
                Series {
                    label: "lower_improved".into(),
                    points: rows.iter().map(|r| (r.theta, r.lower_improved)).collect(),
                    color: PALETTE[1],
                    width: 2.4,
                    dash: None,
                },
                Series {
                    label: "upper_chained".into(),
                    points: rows.iter().map(|r| (r.theta, r.upper_chained)).collect(),
                    color: PALETTE[2],
                    width: 1.6,
                    dash: Some("7 4"),
                },
            ];
            Ok(render(
                "Local-content bounds",
                "theta (rad)",
                "local weight",
                &frame,
                &series,
            ))
        }
        SweepRows::Chained(rows) => {
            let n = rows.iter().map(|r| r.n).max().ok_or_else(|| {
                CliError::usage("no rows to plot")
            })?;
            let of_n: Vec<_> = rows.iter().filter(|r| r.n == n && !r.alphas.is_empty()).collect();
            if of_n.is_empty() {
                return Err(CliError::usage("no angle series to plot"));
            }
            // At most five theta profiles, spread across the sweep.
            let mut picks = Vec::new();
            let m = of_n.len();
            for j in 0..5usize.min(m) {
                let idx = if m == 1 { 0 } else { j * (m - 1) / 4.min(m - 1) };
                if !picks.contains(&idx) {
                    picks.push(idx);
                }
            }
            let frame = Frame {
                xmin: 1.0,
                xmax: n as f64,
                ymin: 0.0,
                ymax: TAU,
            };
            let series: Vec<Series> = picks
                .iter()
                .enumerate()
                .map(|(ci, &idx)| {
                    let r = of_n[idx];
                    Series {
                        label: format!("theta={}", tick_label(r.theta)),
                        points: r
                            .alphas
                            .iter()
                            .enumerate()
                            .map(|(k, &a)| (k as f64 + 1.0, a))
                            .collect(),
                        color: PALETTE[ci % PALETTE.len()],
                        width: 1.6,
                        dash: None,
                    }
                })
                .collect();
            Ok(render(
                &format!("Optimal chained settings, N={n}"),
                "setting index k",
                "alpha_k (rad)",
                &frame,
                &series,
            ))
        }
        SweepRows::Qutrit {
            rows,
            threshold_estimate,
        } => {
            if rows.is_empty() {
                return Err(CliError::usage("no rows to plot"));
            }
            let frame = Frame {
                xmin: rows.first().unwrap().gamma,
                xmax: rows.last().unwrap().gamma,
                ymin: 0.0,
                ymax: 1.0,
            };
            let mut series = vec![
                Series {
                    label: "lower_bound".into(),
                    points: rows.iter().map(|r| (r.gamma, r.lower_bound)).collect(),
                    color: PALETTE[0],
                    width: 2.0,
                    dash: None,
                },
                Series {
                    label: "envelope g^2/(2+g^2)".into(),
                    points: rows
                        .iter()
                        .map(|r| (r.gamma, r.gamma * r.gamma / (2.0 + r.gamma * r.gamma)))
                        .collect(),
                    color: PALETTE[3],
                    width: 1.2,
                    dash: Some("5 4"),
                },
            ];
            if let Some(t) = threshold_estimate {
                series.push(Series {
                    label: format!("threshold={}", tick_label(*t)),
                    points: vec![(*t, 0.0), (*t, 1.0)],
                    color: "#777777",
                    width: 1.0,
                    dash: Some("2 4"),
                });
            }
            Ok(render(
                "Qutrit deterministic-weight lower bound",
                "gamma",
                "weight",
                &frame,
                &series,
            ))
        }
        SweepRows::Verify(_) => Err(CliError::usage("verify produces no figure")),
    }
}
