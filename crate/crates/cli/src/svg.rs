//! Minimal hand-rolled SVG output for the alpha-rho phase diagram.

use nestperc::analysis::PhaseClass;

const W: f64 = 640.0;
const H: f64 = 480.0;
const ML: f64 = 70.0;
const MB: f64 = 60.0;
const MT: f64 = 30.0;
const MR: f64 = 30.0;

pub struct PhaseDiagram {
    pub z: i64,
    pub d: u32,
    pub alpha_max: f64,
    pub cells: Vec<(f64, f64, PhaseClass)>,
    pub p: f64,
}

impl PhaseDiagram {
    fn x(&self, alpha: f64) -> f64 {
        ML + (alpha - 1.0) / (self.alpha_max - 1.0) * (W - ML - MR)
    }

    fn y(&self, rho: f64) -> f64 {
        H - MB - rho * (H - MB - MT)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
             viewBox=\"0 0 {W} {H}\">\n"
        ));
        s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        // axes
        s.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            W - MR,
            H - MB
        ));
        s.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{}\" x2=\"{ML}\" y2=\"{MT}\" stroke=\"black\"/>\n",
            H - MB
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"14\">alpha</text>\n",
            (W - MR + ML) / 2.0,
            H - MB / 3.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"14\" transform=\"rotate(-90 {} {})\">rho</text>\n",
            ML / 3.0,
            (H - MB + MT) / 2.0,
            ML / 3.0,
            (H - MB + MT) / 2.0
        ));
        s.push_str(&format!(
            "<text x=\"{ML}\" y=\"{}\" font-size=\"12\">p = {:.4}; line: rho = alpha/z^d; \
             above it the threshold is trivial</text>\n",
            MT - 10.0,
            self.p
        ));
        // tick labels at the corners
        for (alpha, label) in [(1.0, "1"), (self.alpha_max, "")] {
            let _ = label;
            s.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"11\">{alpha:.2}</text>\n",
                self.x(alpha) - 8.0,
                H - MB + 16.0
            ));
        }
        for rho in [0.0, 0.5, 1.0] {
            s.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"11\">{rho:.1}</text>\n",
                ML - 30.0,
                self.y(rho) + 4.0
            ));
        }
        // boundary curve rho = alpha / z^d, clipped at rho = 1
        let zd = (self.z as f64).powi(self.d as i32);
        let mut pts = Vec::new();
        let steps = 64;
        for i in 0..=steps {
            let alpha = 1.0 + (self.alpha_max - 1.0) * i as f64 / steps as f64;
            let rho = alpha / zd;
            if rho <= 1.0 {
                pts.push(format!("{:.2},{:.2}", self.x(alpha), self.y(rho)));
            }
        }
        if pts.len() >= 2 {
            s.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"6 3\"/>\n",
                pts.join(" ")
            ));
        }
        // cells
        for &(alpha, rho, class) in &self.cells {
            let (color, shape) = match class {
                PhaseClass::CertifiedSubcritical => ("#2166ac", "circle"),
                PhaseClass::Percolating => ("#b2182b", "square"),
                PhaseClass::Unclassified => ("#999999", "diamond"),
            };
            let (cx, cy) = (self.x(alpha), self.y(rho));
            match shape {
                "circle" => s.push_str(&format!(
                    "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"5\" fill=\"{color}\"/>\n"
                )),
                "square" => s.push_str(&format!(
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
                    cx - 5.0,
                    cy - 5.0
                )),
                _ => s.push_str(&format!(
                    "<path d=\"M {cx:.2} {:.2} L {:.2} {cy:.2} L {cx:.2} {:.2} L {:.2} {cy:.2} Z\" \
                     fill=\"{color}\"/>\n",
                    cy - 6.0,
                    cx + 6.0,
                    cy + 6.0,
                    cx - 6.0
                )),
            }
        }
        // legend
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"#2166ac\"/>\
             <text x=\"{}\" y=\"{}\" font-size=\"11\">certified subcritical</text>\n",
            W - 200.0,
            MT + 14.0,
            W - 190.0,
            MT + 18.0
        ));
        s.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"#b2182b\"/>\
             <text x=\"{}\" y=\"{}\" font-size=\"11\">percolating</text>\n",
            W - 205.0,
            MT + 26.0,
            W - 190.0,
            MT + 36.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#555\">grey: unclassified \
             (incl. rho = alpha/z^d line)</text>\n",
            W - 205.0,
            MT + 54.0
        ));
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_still_valid_axes() {
        let svg = PhaseDiagram {
            z: 2,
            d: 2,
            alpha_max: 5.0,
            cells: Vec::new(),
            p: 0.1,
        }
        .render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("polyline")); // boundary curve present
    }

    #[test]
    fn cells_rendered() {
        let svg = PhaseDiagram {
            z: 2,
            d: 2,
            alpha_max: 4.0,
            cells: vec![
                (2.0, 0.9, PhaseClass::Percolating),
                (2.0, 0.2, PhaseClass::CertifiedSubcritical),
                (2.0, 0.5, PhaseClass::Unclassified),
            ],
            p: 0.05,
        }
        .render();
        assert!(svg.contains("#b2182b"));
        assert!(svg.contains("#2166ac"));
        assert!(svg.matches("<circle").count() >= 2);
    }
}
