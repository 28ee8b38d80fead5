use std::fmt::Write as _;

use super::config::Method;
use super::sweep::SummaryRow;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const GAP: f64 = 70.0;

fn color(m: Method) -> &'static str {
    match m {
        Method::DoFinetti => "#1f77b4",
        Method::Iid => "#d62728",
        Method::DoFinettiTrueDag => "#2ca02c",
        Method::IidTrueDag => "#ff7f0e",
    }
}

fn dash(m: Method) -> &'static str {
    if m.uses_true_dag() {
        "6,4"
    } else {
        "none"
    }
}

struct Panel {
    x0: f64,
    width: f64,
    log_x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Panel {
    fn px(&self, envs: f64) -> f64 {
        let (lo, hi) = self.log_x;
        let span = (hi - lo).max(1e-12);
        self.x0 + (envs.log10() - lo) / span * self.width
    }

    fn py(&self, v: f64) -> f64 {
        let (lo, hi) = self.y;
        let v = if self.log_y { v.max(1e-300).log10() } else { v };
        let t = ((v - lo) / (hi - lo).max(1e-12)).clamp(0.0, 1.0);
        HEIGHT - MARGIN - t * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Two panels: MSE with one-standard-deviation bands (log axes), and
/// DAG accuracy (log-x), one line per method.
pub fn render_svg(summary: &[SummaryRow]) -> String {
    let finite = |v: f64| v.is_finite() && v > 0.0;
    let envs: Vec<f64> = summary.iter().map(|r| r.num_envs as f64).collect();
    let ex = envs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
    let log_x = if ex.0.is_finite() {
        (ex.0.log10(), ex.1.log10())
    } else {
        (0.0, 1.0)
    };
    let mse_vals: Vec<f64> = summary
        .iter()
        .flat_map(|r| [r.mse_mean, r.mse_mean - r.mse_std, r.mse_mean + r.mse_std])
        .filter(|&v| finite(v))
        .collect();
    let my = mse_vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
        (a.min(v.log10()), b.max(v.log10()))
    });
    let my = if my.0.is_finite() {
        (my.0.floor(), my.1.ceil().max(my.0.floor() + 1.0))
    } else {
        (-6.0, 0.0)
    };

    let panel_w = (WIDTH - 2.0 * MARGIN - GAP) / 2.0;
    let left = Panel {
        x0: MARGIN,
        width: panel_w,
        log_x,
        y: my,
        log_y: true,
    };
    let right = Panel {
        x0: MARGIN + panel_w + GAP,
        width: panel_w,
        log_x,
        y: (0.0, 1.0),
        log_y: false,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    axes(
        &mut s,
        &left,
        "MSE",
        &envs,
        |v| format!("1e{v:.0}"),
        (my.0 as i32..=my.1 as i32).map(f64::from).collect(),
    );
    axes(
        &mut s,
        &right,
        "DAG accuracy",
        &envs,
        |v| format!("{v:.1}"),
        (0..=5).map(|k| k as f64 / 5.0).collect(),
    );

    let mut methods: Vec<Method> = Vec::new();
    for r in summary {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for (i, &m) in methods.iter().enumerate() {
        let rows: Vec<&SummaryRow> = summary.iter().filter(|r| r.method == m).collect();
        let ok: Vec<&&SummaryRow> = rows.iter().filter(|r| finite(r.mse_mean)).collect();
        if !ok.is_empty() {
            let upper: Vec<String> = ok
                .iter()
                .map(|r| {
                    format!(
                        "{:.1},{:.1}",
                        left.px(r.num_envs as f64),
                        left.py(r.mse_mean + r.mse_std)
                    )
                })
                .collect();
            let lower: Vec<String> = ok
                .iter()
                .rev()
                .map(|r| {
                    let lo = r.mse_mean - r.mse_std;
                    let lo = if lo > 0.0 { lo } else { r.mse_mean / 10.0 };
                    format!("{:.1},{:.1}", left.px(r.num_envs as f64), left.py(lo))
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polygon points="{} {}" fill="{}" fill-opacity="0.15" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" "),
                color(m)
            );
            polyline(
                &mut s,
                m,
                ok.iter().map(|r| (left.px(r.num_envs as f64), left.py(r.mse_mean))),
            );
        }
        polyline(
            &mut s,
            m,
            rows.iter()
                .map(|r| (right.px(r.num_envs as f64), right.py(r.dag_accuracy))),
        );
        let ly = MARGIN + 16.0 * i as f64;
        let lx = right.x0 + 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2" stroke-dasharray="{}"/><text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            color(m),
            dash(m),
            lx + 30.0,
            ly + 4.0,
            m.as_str()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn polyline(s: &mut String, m: Method, pts: impl Iterator<Item = (f64, f64)>) {
    let pts: Vec<String> = pts.map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2" stroke-dasharray="{}"/>"#,
        pts.join(" "),
        color(m),
        dash(m)
    );
}

fn axes(s: &mut String, p: &Panel, title: &str, envs: &[f64], label: impl Fn(f64) -> String, ticks: Vec<f64>) {
    let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        p.x0,
        p.width,
        bottom - top
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{title}</text>"#,
        p.x0 + p.width / 2.0,
        top - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">environments</text>"#,
        p.x0 + p.width / 2.0,
        bottom + 36.0
    );
    let mut seen: Vec<f64> = Vec::new();
    for &e in envs {
        if seen.contains(&e) {
            continue;
        }
        seen.push(e);
        let x = p.px(e);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{bottom}" x2="{x:.1}" y2="{}" stroke="black"/><text x="{x:.1}" y="{}" text-anchor="middle">{e}</text>"#,
            bottom + 4.0,
            bottom + 18.0
        );
    }
    for v in ticks {
        let y = if p.log_y { p.py(10f64.powf(v)) } else { p.py(v) };
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
            p.x0,
            p.x0 + p.width,
            p.x0 - 4.0,
            y + 4.0,
            label(v)
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: Method, num_envs: usize, mse: f64, acc: f64) -> SummaryRow {
        SummaryRow {
            method,
            num_envs,
            mse_mean: mse,
            mse_std: mse / 2.0,
            dag_accuracy: acc,
            failures: 0,
        }
    }

    #[test]
    fn renders_every_method() {
        let rows = vec![
            row(Method::DoFinetti, 50, 1e-2, 0.6),
            row(Method::DoFinetti, 500, 1e-3, 0.9),
            row(Method::Iid, 50, 5e-2, 0.4),
            row(Method::Iid, 500, 4e-2, 0.5),
        ];
        let svg = render_svg(&rows);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("do-finetti") && svg.contains("iid"));
        assert_eq!(svg.matches("<polyline").count(), 4);
    }

    #[test]
    fn tolerates_empty_and_nan() {
        assert!(render_svg(&[]).contains("</svg>"));
        let svg = render_svg(&[row(Method::Iid, 10, f64::NAN, 0.0)]);
        assert!(!svg.contains("NaN"));
    }
}
