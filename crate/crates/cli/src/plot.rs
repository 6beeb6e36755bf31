//! Privacy-utility scatter plot as a standalone SVG.

use std::fmt::Write;

use serde::Deserialize;
use tvinesynth::evaluation::{PrivacyMetric, SweepRecord};

/// Extra labelled point, e.g. another generator's result.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Competitor {
    pub name: String,
    pub utility: f64,
    pub privacy: f64,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn axis_label(metric: PrivacyMetric) -> &'static str {
    match metric {
        PrivacyMetric::Mab => "privacy (median MAB)",
        PrivacyMetric::Pg => "privacy (median PG)",
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.1).max(0.01);
    (lo - pad, hi + pad)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One circle per truncation level (with interquartile whiskers) labelled
/// `t=…`, one square per competitor.
pub fn privacy_utility_svg(records: &[SweepRecord], competitors: &[Competitor]) -> String {
    let metric = records.first().map_or(PrivacyMetric::Mab, |r| r.privacy_metric);
    let (x0, x1) = range(
        records
            .iter()
            .flat_map(|r| [r.utility_q25, r.utility_q75, r.utility_median])
            .chain(competitors.iter().map(|c| c.utility)),
    );
    let (y0, y1) = range(
        records
            .iter()
            .flat_map(|r| [r.privacy_q25, r.privacy_q75, r.privacy_median])
            .chain(competitors.iter().map(|c| c.privacy)),
    );
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let sy = |v: f64| H - BOTTOM - (v - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" style="font-family:sans-serif;font-size:12px">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" style="fill:white"/>"#);
    let (bx, by) = (LEFT, H - BOTTOM);
    let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}" style="stroke:black"/>"#, W - RIGHT);
    let _ = writeln!(s, r#"<line x1="{bx}" y1="{by}" x2="{bx}" y2="{TOP}" style="stroke:black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" style="text-anchor:middle">{xv:.3}</text>"#,
            sx(xv),
            by + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" style="text-anchor:end">{yv:.3}</text>"#,
            bx - 6.0,
            sy(yv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" style="text-anchor:middle">utility (AUC)</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" transform="rotate(-90 20 {:.1})" style="text-anchor:middle">{}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        axis_label(metric)
    );
    for r in records {
        let (cx, cy) = (sx(r.utility_median), sy(r.privacy_median));
        if !(cx.is_finite() && cy.is_finite()) {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<g class="level"><line x1="{:.1}" y1="{cy:.1}" x2="{:.1}" y2="{cy:.1}" style="stroke:steelblue"/><line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" style="stroke:steelblue"/><circle cx="{cx:.1}" cy="{cy:.1}" r="5" style="fill:steelblue"/><text x="{:.1}" y="{:.1}">t={}</text></g>"#,
            sx(r.utility_q25),
            sx(r.utility_q75),
            sy(r.privacy_q25),
            sy(r.privacy_q75),
            cx + 7.0,
            cy - 7.0,
            r.truncation
        );
    }
    for c in competitors {
        let (cx, cy) = (sx(c.utility), sy(c.privacy));
        let _ = writeln!(
            s,
            r#"<g class="competitor"><rect x="{:.1}" y="{:.1}" width="9" height="9" style="fill:darkorange"/><text x="{:.1}" y="{:.1}">{}</text></g>"#,
            cx - 4.5,
            cy - 4.5,
            cx + 7.0,
            cy + 14.0,
            esc(&c.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: usize, u: f64, p: f64) -> SweepRecord {
        SweepRecord {
            truncation: t,
            utility_median: u,
            utility_q25: u - 0.01,
            utility_q75: u + 0.01,
            privacy_metric: PrivacyMetric::Mab,
            privacy_median: p,
            privacy_q25: p - 0.01,
            privacy_q75: p + 0.01,
        }
    }

    #[test]
    fn one_labelled_marker_per_level() {
        let svg = privacy_utility_svg(&[rec(1, 0.8, 0.02), rec(12, 0.9, 0.1), rec(20, 0.91, 0.2)], &[]);
        assert_eq!(svg.matches("<circle").count(), 3);
        for t in [1, 12, 20] {
            assert!(svg.contains(&format!(">t={t}<")));
        }
        assert!(svg.contains("utility (AUC)") && svg.contains("median MAB"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn competitors_are_squares_with_escaped_names() {
        let c = Competitor {
            name: "gan<eps=1>".into(),
            utility: 0.7,
            privacy: 0.3,
        };
        let svg = privacy_utility_svg(&[rec(1, 0.8, 0.02)], &[c]);
        assert_eq!(svg.matches("class=\"competitor\"").count(), 1);
        assert!(svg.contains("gan&lt;eps=1&gt;"));
    }

    #[test]
    fn degenerate_ranges_still_render() {
        let svg = privacy_utility_svg(&[rec(3, f64::NAN, f64::NAN)], &[]);
        assert!(!svg.contains("NaN"));
        let single = privacy_utility_svg(&[rec(3, 0.5, 0.5)], &[]);
        assert_eq!(single.matches("<circle").count(), 1);
    }
}
