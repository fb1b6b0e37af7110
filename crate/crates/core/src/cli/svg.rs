//! Minimal SVG line chart for log-prevalence curves.

use std::fmt::Write as _;

use chrono::NaiveDate;

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 40.0;

/// Plots `points` with an optional vertical marker at `marker`.
pub fn line_chart(title: &str, points: &[(NaiveDate, f64)], marker: Option<NaiveDate>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    if let (Some(first), Some(last)) = (points.first(), points.last()) {
        let span = ((last.0 - first.0).num_days() as f64).max(1.0);
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
        let range = (hi - lo).max(1e-9);
        let x = |d: NaiveDate| PAD + (W - 2.0 * PAD) * (d - first.0).num_days() as f64 / span;
        let y = |v: f64| H - PAD - (H - 2.0 * PAD) * (v - lo) / range;
        let _ = writeln!(
            s,
            r#"<line x1="{PAD}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#,
            y0 = H - PAD,
            x1 = W - PAD
        );
        let _ = writeln!(
            s,
            r#"<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{y0}" stroke="black"/>"#,
            y0 = H - PAD
        );
        let path: Vec<String> = points
            .iter()
            .map(|&(d, v)| format!("{:.2},{:.2}", x(d), y(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        if let Some(m) = marker {
            let mx = x(m);
            let _ = writeln!(
                s,
                r#"<line x1="{mx:.2}" y1="{PAD}" x2="{mx:.2}" y2="{y0}" stroke="firebrick" stroke-dasharray="4 3"/>"#,
                y0 = H - PAD
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{} .. {}</text>"#,
            H - 12.0,
            first.0,
            last.0
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{PAD}" font-family="sans-serif" font-size="11">{hi:.2}</text>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="4" y="{}" font-family="sans-serif" font-size="11">{lo:.2}</text>"#,
            H - PAD
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_polyline_and_marker() {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 22).unwrap();
        let pts: Vec<_> = (0..10).map(|i| (d0 + chrono::Duration::days(i), i as f64)).collect();
        let svg = line_chart("A & B", &pts, Some(d0 + chrono::Duration::days(4)));
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("firebrick"));
        assert!(svg.contains("A &amp; B"));
    }

    #[test]
    fn empty_chart_is_valid() {
        let svg = line_chart("x", &[], None);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
