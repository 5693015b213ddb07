//! Minimal log-log scatter plots with a fitted line, emitted as SVG text.

use std::fmt::Write as _;
use std::path::Path;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 56.0;

pub struct LogLogPlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Natural logarithms of the data.
    pub ln_x: &'a [f64],
    pub ln_y: &'a [f64],
    pub slope: f64,
}

fn range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

impl LogLogPlot<'_> {
    pub fn render(&self) -> String {
        let (x0, x1) = range(self.ln_x);
        let (y0, y1) = range(self.ln_y);
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let n = self.ln_x.len() as f64;
        let mx = self.ln_x.iter().sum::<f64>() / n;
        let my = self.ln_y.iter().sum::<f64>() / n;
        let line = |x: f64| my + self.slope * (x - mx);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#,
            W / 2.0,
            self.title
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">ln {}</text>"#,
            W / 2.0,
            H - 16.0,
            self.x_label
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">ln {}</text>"#,
            H / 2.0,
            H / 2.0,
            self.y_label
        );
        for (v, anchor_x) in [(x0, sx(x0)), (x1, sx(x1))] {
            let _ = writeln!(
                s,
                r#"<text x="{anchor_x:.1}" y="{}" text-anchor="middle">{v:.2}</text>"#,
                H - PAD + 16.0
            );
        }
        for (v, anchor_y) in [(y0, sy(y0)), (y1, sy(y1))] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{anchor_y:.1}" text-anchor="end">{v:.2}</text>"#,
                PAD - 4.0
            );
        }
        for (&x, &y) in self.ln_x.iter().zip(self.ln_y) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
                sx(x),
                sy(y)
            );
        }
        let a = self.ln_x.iter().copied().fold(f64::INFINITY, f64::min);
        let b = self.ln_x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick"/>"#,
            sx(a),
            sy(line(a)),
            sx(b),
            sy(line(b))
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="firebrick">slope {:.4}</text>"#,
            PAD + 8.0,
            PAD + 16.0,
            self.slope
        );
        s.push_str("</svg>\n");
        s
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }
}
