//! Figure data: SVG drawings and the affine-coordinate grid.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thimble_core::affine_syz::{chart_sample, find_triple_point, trace_ray, AffineRay, Grid, RayKind};
use thimble_core::cps_model::{build_atlas, Point, Q};
use thimble_core::fibration::critical_values;
use thimble_core::mirror_atlas::{critical_values_of_w_atlas, eval_w, torus_to_immersed, ChartPoint, NovikovScale};
use thimble_core::numkernel::ZETA;
use thimble_core::Complex64;

use crate::commands::{sample_torus_points, CommandOutput};
use crate::output::{complex, document, num, to_text};
use crate::{Format, LabError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Orientation,
    Cps,
    AffineGrid,
    Atlas,
}

impl std::str::FromStr for Figure {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "orientation" => Ok(Figure::Orientation),
            "cps" => Ok(Figure::Cps),
            "affine-grid" => Ok(Figure::AffineGrid),
            "atlas" => Ok(Figure::Atlas),
            _ => Err(LabError::BadInput(format!(
                "unknown figure {s:?} (orientation, cps, affine-grid or atlas)"
            ))),
        }
    }
}

/// Minimal SVG builder over a world window `[x0, x1] x [y0, y1]`, y pointing up.
struct Svg {
    body: String,
    x0: f64,
    y1: f64,
    k: f64,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(x: [f64; 2], y: [f64; 2], width: f64) -> Self {
        let k = width / (x[1] - x[0]);
        Svg {
            body: String::new(),
            x0: x[0],
            y1: y[1],
            k,
            width,
            height: k * (y[1] - y[0]),
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.k, (self.y1 - y) * self.k)
    }

    fn open(&mut self, id: &str) {
        let _ = writeln!(self.body, "<g id=\"{id}\">");
    }

    fn close(&mut self) {
        self.body.push_str("</g>\n");
    }

    fn polyline(&mut self, pts: &[(f64, f64)], style: &str, data: &str) {
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let (u, v) = self.px(x, y);
            let _ = write!(d, "{}{u:.3},{v:.3}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(self.body, "<polyline points=\"{d}\" fill=\"none\" {style}{data}/>");
    }

    fn dot(&mut self, x: f64, y: f64, r: f64, fill: &str, data: &str) {
        let (u, v) = self.px(x, y);
        let _ = writeln!(self.body, "<circle cx=\"{u:.3}\" cy=\"{v:.3}\" r=\"{r}\" fill=\"{fill}\"{data}/>");
    }

    fn label(&mut self, x: f64, y: f64, text: &str) {
        let (u, v) = self.px(x, y);
        let _ = writeln!(
            self.body,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\" font-family=\"sans-serif\">{text}</text>",
            u + 5.0,
            v - 5.0
        );
    }

    fn polygon(&mut self, pts: &[(f64, f64)], fill: &str, data: &str) {
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let (u, v) = self.px(x, y);
            let _ = write!(d, "{}{u:.3},{v:.3}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(self.body, "<polygon points=\"{d}\" fill=\"{fill}\"{data}/>");
    }

    fn finish(self, title: &str) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<title>{title}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height,
        )
    }
}

fn xy(z: Complex64) -> (f64, f64) {
    (z.re, z.im)
}

fn to_f(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn ray_points(r: &AffineRay, rot: Complex64) -> Vec<(f64, f64)> {
    r.trace.iter().map(|z| xy(z * rot)).collect()
}

fn orientation_svg(cfg: &RunConfig) -> Result<String, LabError> {
    let pc = cfg.period_config();
    let tp = find_triple_point(&pc)?;
    let l1 = trace_ray(RayKind::MinusCMinusD, &pc)?;
    let l2 = trace_ray(RayKind::MinusTwoCPlusD, &pc)?;
    let axis = trace_ray(RayKind::NegativeRealAxis, &pc)?;
    let mut s = Svg::new([-8.0, 8.0], [-8.0, 8.0], 640.0);
    s.open("cuts");
    for (k, lam) in critical_values().iter().enumerate() {
        let u = lam / lam.norm();
        s.polyline(&[xy(*lam), xy(u * 11.4)], "stroke=\"gray\" stroke-dasharray=\"4 3\"", &format!(" data-cut=\"{k}\""));
    }
    s.close();
    s.open("rays");
    let rots = [Complex64::new(1.0, 0.0), ZETA, ZETA * ZETA];
    for (k, rot) in rots.iter().enumerate() {
        for (name, r, color) in [("l-c-d", &l1, "crimson"), ("l-2c+d", &l2, "royalblue"), ("axis", &axis, "darkgreen")] {
            s.polyline(
                &ray_points(r, *rot),
                &format!("stroke=\"{color}\" stroke-width=\"1.5\""),
                &format!(" data-ray=\"{name}\" data-rotation=\"{k}\""),
            );
        }
    }
    s.close();
    s.open("singular-points");
    for (name, lam) in ["A", "B", "C"].iter().zip(critical_values()) {
        s.dot(lam.re, lam.im, 4.0, "black", &format!(" data-name=\"{name}\""));
        s.label(lam.re, lam.im, name);
    }
    s.close();
    s.open("triple-points");
    for (k, v) in [Complex64::new(tp.v1, 0.0), tp.v2, tp.v3].iter().enumerate() {
        s.dot(v.re, v.im, 3.5, "darkorange", &format!(" data-name=\"v{}\" data-re=\"{:.16e}\" data-im=\"{:.16e}\"", k + 1, v.re, v.im));
        s.label(v.re, v.im, &format!("v{}", k + 1));
    }
    s.close();
    Ok(s.finish("critical values, cuts, affine rays and triple points in the q-plane"))
}

fn cps_svg() -> String {
    let at = build_atlas();
    let fp = |p: Point| (to_f(p[0]), to_f(p[1]));
    let mut s = Svg::new([-3.0, 3.0], [-3.0, 3.0], 600.0);
    let far = Q::from_integer(8);
    s.open("removed-sectors");
    for sp in &at.points {
        let pts = [fp(sp.position), fp(sp.cut_plus.point(far)), fp(sp.cut_minus.point(far))];
        s.polygon(&pts, "#eeeeee", &format!(" data-at=\"{}\"", sp.name));
    }
    s.close();
    s.open("cuts");
    for sp in &at.points {
        for c in [sp.cut_plus, sp.cut_minus] {
            let data = format!(
                " data-cut=\"{}\" data-origin=\"{},{}\" data-direction=\"{},{}\"",
                c.name, c.origin[0], c.origin[1], c.direction[0], c.direction[1]
            );
            s.polyline(&[fp(c.origin), fp(c.point(far))], "stroke=\"black\"", &data);
        }
    }
    s.close();
    s.open("invariant-lines");
    let dirs = at.invariant_directions();
    for (sp, d) in at.points.iter().zip(dirs) {
        let (x, y) = fp(sp.position);
        let (dx, dy) = (d[0] as f64, d[1] as f64);
        s.polyline(
            &[(x - 3.0 * dx, y - 3.0 * dy), (x + 3.0 * dx, y + 3.0 * dy)],
            "stroke=\"steelblue\" stroke-dasharray=\"3 3\"",
            &format!(" data-direction=\"{},{}\"", d[0], d[1]),
        );
    }
    s.close();
    s.open("singular-points");
    for sp in &at.points {
        let (x, y) = fp(sp.position);
        s.dot(x, y, 4.0, "black", &format!(" data-name=\"{}\" data-x=\"{}\" data-y=\"{}\"", sp.name, sp.position[0], sp.position[1]));
        s.label(x, y, sp.name);
    }
    s.close();
    s.open("triple-points");
    for (k, v) in at.triangle_vertices().iter().enumerate() {
        let (x, y) = fp(*v);
        s.dot(x, y, 3.5, "darkorange", &format!(" data-name=\"v{}'\" data-x=\"{}\" data-y=\"{}\"", k + 1, v[0], v[1]));
        s.label(x, y, &format!("v{}'", k + 1));
    }
    s.close();
    s.finish("singular points, cuts and removed sectors of the glued affine plane")
}

fn atlas_svg(cfg: &RunConfig, samples: usize) -> Result<String, LabError> {
    let pts = sample_torus_points(cfg.seed, samples);
    let mut s = Svg::new([-6.0, 6.0], [-6.0, 6.0], 600.0);
    let colors = ["black", "crimson", "royalblue", "darkgreen"];
    for chart in 0..4u8 {
        s.open(&format!("chart-{chart}"));
        for p in &pts {
            let w = if chart == 0 {
                eval_w(&ChartPoint::Torus(*p), NovikovScale::ONE)
            } else {
                let m = torus_to_immersed(p, chart).expect("chart index");
                eval_w(&ChartPoint::Immersed(m), NovikovScale::ONE)
            };
            if let Ok(w) = w {
                s.dot(w.re, w.im, (4 - chart) as f64, colors[chart as usize], "");
            }
        }
        s.close();
    }
    s.open("critical-values");
    let cf = critical_values_of_w_atlas().map_err(|e| LabError::Numeric(e.to_string()))?;
    for f in &cf {
        s.dot(
            f.value.re,
            f.value.im,
            5.0,
            "darkorange",
            &format!(" data-double-root=\"{:.16e},{:.16e}\"", f.double_root.re, f.double_root.im),
        );
    }
    s.close();
    Ok(s.finish("values of the potential on seeded points in the torus and the three immersed charts"))
}

/// Default grid for `affine-grid`.
pub const DEFAULT_GRID: Grid = Grid {
    re: [-6.0, 6.0],
    im: [-6.0, 6.0],
    nx: 25,
    ny: 25,
};

fn affine_grid(cfg: &RunConfig, grid: &Grid, format: Format) -> Result<String, LabError> {
    if grid.nx == 0 || grid.ny == 0 || grid.nx * grid.ny > 1_000_000 {
        return Err(LabError::BadInput("grid must have between 1 and 10^6 points".into()));
    }
    let pc = cfg.period_config();
    let rows: Vec<_> = grid.points().into_par_iter().map(|q| (q, chart_sample(q, &pc))).collect();
    match format {
        Format::Csv => {
            let mut out = String::from("re,im,chamber,f_c,f_d,status\n");
            for (q, r) in &rows {
                match r {
                    Ok(s) => {
                        let _ = writeln!(out, "{:.16e},{:.16e},{},{:.16e},{:.16e},ok", q.re, q.im, s.chamber_id, s.f[0], s.f[1]);
                    }
                    Err(e) => {
                        let msg = e.to_string().replace(',', ";");
                        let _ = writeln!(out, "{:.16e},{:.16e},,,,{msg}", q.re, q.im);
                    }
                }
            }
            Ok(out)
        }
        Format::Json => {
            let samples: Vec<Value> = rows
                .iter()
                .map(|(q, r)| match r {
                    Ok(s) => json!({ "q": complex(*q), "chamber": s.chamber_id, "f": [num(s.f[0]), num(s.f[1])] }),
                    Err(e) => json!({ "q": complex(*q), "error": e.to_string() }),
                })
                .collect();
            let mut m = Map::new();
            m.insert("figure".into(), json!("affine-grid"));
            m.insert("grid".into(), json!({
                "re": [num(grid.re[0]), num(grid.re[1])],
                "im": [num(grid.im[0]), num(grid.im[1])],
                "nx": grid.nx,
                "ny": grid.ny,
            }));
            m.insert("samples".into(), Value::Array(samples));
            Ok(to_text(&document("figure", m)))
        }
        Format::Svg => Err(LabError::BadInput("affine-grid is written as csv or json".into())),
    }
}

pub fn cmd_figure(cfg: &RunConfig, figure: Figure, grid: &Grid, samples: usize) -> Result<CommandOutput, LabError> {
    cfg.validate()?;
    let format = cfg.format.unwrap_or(match figure {
        Figure::AffineGrid => Format::Csv,
        _ => Format::Svg,
    });
    if figure != Figure::AffineGrid && format != Format::Svg {
        return Err(LabError::BadInput("this figure is written as svg".into()));
    }
    let text = match figure {
        Figure::Orientation => orientation_svg(cfg)?,
        Figure::Cps => cps_svg(),
        Figure::Atlas => atlas_svg(cfg, samples)?,
        Figure::AffineGrid => affine_grid(cfg, grid, format)?,
    };
    Ok(CommandOutput {
        text,
        log: Vec::new(),
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cps_figure_has_exact_points() {
        let svg = cps_svg();
        assert!(svg.contains("data-name=\"A'\" data-x=\"0\" data-y=\"-1/2\""));
        assert!(svg.contains("data-name=\"B'\" data-x=\"1/2\" data-y=\"1/2\""));
        assert_eq!(svg.matches("data-cut=").count(), 6);
        assert_eq!(svg, cps_svg());
    }

    #[test]
    fn unknown_figure() {
        assert!(matches!("mandala".parse::<Figure>(), Err(LabError::BadInput(_))));
    }
}
