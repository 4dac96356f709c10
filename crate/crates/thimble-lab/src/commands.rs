//! The `periods`, `monodromy` and `verify` subcommands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thimble_core::affine_syz::{chart_sample, find_triple_point};
use thimble_core::cps_model::{build_atlas, verify_isomorphism};
use thimble_core::mirror_atlas::{
    cubic_relation, eval_w, fiber_equation_check, immersed_to_torus, torus_to_immersed, ChartPoint, ImmersedChartPoint,
    NovikovScale, TorusChartPoint, CUBIC_RELATION_CONSTANT,
};
use thimble_core::periods::{default_thimble_path, numeric_monodromy, thimble_integral, verify_appendix_contours, Around};
use thimble_core::Complex64;

use crate::output::{complex, document, matrix, num, point, real_matrix, to_text};
use crate::{LabError, RunConfig};

/// What a subcommand produced: the document, log lines for stderr, and the
/// first failed assertion for `verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub text: String,
    pub log: Vec<String>,
    pub failure: Option<String>,
}

impl CommandOutput {
    fn document(text: String) -> Self {
        CommandOutput {
            text,
            log: Vec::new(),
            failure: None,
        }
    }
}

/// Parses `"re,im"`.
pub fn parse_complex(s: &str) -> Result<Complex64, LabError> {
    let bad = || LabError::BadInput(format!("expected re,im but got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = a.trim().parse().map_err(|_| bad())?;
    let im: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

pub fn parse_around(s: &str) -> Result<Around, LabError> {
    match s {
        "A" | "a" => Ok(Around::A),
        "B" | "b" => Ok(Around::B),
        "C" | "c" => Ok(Around::C),
        "inf" | "infinity" => Ok(Around::Infinity),
        _ => Err(LabError::BadInput(format!("unknown loop {s:?} (A, B, C or inf)"))),
    }
}

fn around_name(a: Around) -> &'static str {
    match a {
        Around::A => "A",
        Around::B => "B",
        Around::C => "C",
        Around::Infinity => "inf",
    }
}

fn require_json(cfg: &RunConfig) -> Result<(), LabError> {
    match cfg.format {
        None | Some(crate::Format::Json) => Ok(()),
        Some(f) => Err(LabError::BadInput(format!("this command writes JSON, not {f:?}"))),
    }
}

pub fn cmd_periods(cfg: &RunConfig, j: usize, q: Complex64) -> Result<CommandOutput, LabError> {
    cfg.validate()?;
    require_json(cfg)?;
    if j > 2 {
        return Err(LabError::BadInput("--j must be 0, 1 or 2".into()));
    }
    let path = default_thimble_path(j, q);
    let g = thimble_integral(j, q, Some(&path), &cfg.period_config())?;
    let mut m = Map::new();
    m.insert("j".into(), json!(j));
    m.insert("q".into(), complex(q));
    m.insert("value".into(), complex(g.value));
    m.insert("error".into(), num(g.error));
    m.insert("n_evals".into(), json!(g.n_evaluations));
    m.insert("path".into(), Value::Array(g.path.nodes().iter().map(|z| complex(*z)).collect()));
    m.insert("tol".into(), num(cfg.tol));
    Ok(CommandOutput::document(to_text(&document("periods", m))))
}

pub fn cmd_monodromy(cfg: &RunConfig, around: Around) -> Result<CommandOutput, LabError> {
    cfg.validate()?;
    require_json(cfg)?;
    let r = numeric_monodromy(around, &cfg.period_config())?;
    let n = r.matrix.minus_identity();
    let nn = [
        [n[0][0] * n[0][0] + n[0][1] * n[1][0], n[0][0] * n[0][1] + n[0][1] * n[1][1]],
        [n[1][0] * n[0][0] + n[1][1] * n[1][0], n[1][0] * n[0][1] + n[1][1] * n[1][1]],
    ];
    let mut m = Map::new();
    m.insert("around".into(), json!(around_name(around)));
    m.insert("basis".into(), json!("c,d"));
    m.insert("matrix".into(), matrix(&r.matrix));
    m.insert("raw".into(), real_matrix(r.raw));
    m.insert("residual".into(), num(r.uncertainty));
    m.insert("trace".into(), json!(r.matrix.trace()));
    m.insert("det".into(), json!(r.matrix.det()));
    m.insert("content".into(), json!(r.matrix.content_minus_identity()));
    m.insert("unipotent".into(), json!(nn == [[0, 0], [0, 0]]));
    m.insert("tol".into(), num(cfg.tol));
    Ok(CommandOutput::document(to_text(&document("monodromy", m))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Appendix,
    Gluing,
    Iso,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Suite::All),
            "appendix" => Ok(Suite::Appendix),
            "gluing" => Ok(Suite::Gluing),
            "iso" => Ok(Suite::Iso),
            _ => Err(format!("unknown suite {s:?} (all, appendix, gluing or iso)")),
        }
    }
}

struct Checks {
    list: Vec<Value>,
    log: Vec<String>,
    failure: Option<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            list: Vec::new(),
            log: Vec::new(),
            failure: None,
        }
    }

    fn record(&mut self, name: &str, pass: bool, detail: String) {
        self.log.push(format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
        if !pass && self.failure.is_none() {
            self.failure = Some(format!("{name}: {detail}"));
        }
        self.list.push(json!({ "name": name, "pass": pass, "detail": detail }));
    }
}

fn appendix_suite(cfg: &RunConfig, ch: &mut Checks) -> Value {
    let mut out = Vec::new();
    for q in [1.5, -2.0] {
        match verify_appendix_contours(q, cfg.tol) {
            Ok(r) => {
                let samples = r.arc_samples + r.segment_samples;
                ch.record(
                    &format!("appendix q={q} sign conditions"),
                    samples >= 200,
                    format!("{samples} samples, min Im on arcs {:.3e}", r.min_im_on_arcs),
                );
                ch.record(
                    &format!("appendix q={q} deformed contour"),
                    r.relative_difference <= 1e-8,
                    format!("relative difference {:.3e}", r.relative_difference),
                );
                out.push(json!({
                    "q": num(q),
                    "direct": complex(r.direct),
                    "deformed": complex(r.deformed),
                    "relative_difference": num(r.relative_difference),
                    "arc_samples": r.arc_samples,
                    "segment_samples": r.segment_samples,
                    "min_im_on_arcs": num(r.min_im_on_arcs),
                    "min_re_on_segment": r.min_re_on_segment.map(num),
                }));
            }
            Err(e) => ch.record(&format!("appendix q={q}"), false, e.to_string()),
        }
    }
    Value::Array(out)
}

/// Seeded torus points with `|z| in [1/2, 2]`.
pub fn sample_torus_points(seed: u64, n: usize) -> Vec<TorusChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut z = || {
                let r = 2f64.powf(rng.gen_range(-1.0..1.0));
                Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            };
            TorusChartPoint::new(z(), z()).expect("nonzero by construction")
        })
        .collect()
}

#[derive(Default, Clone, Copy)]
struct GluingStats {
    chart_agreement: f64,
    round_trip: f64,
    gluing_relation: f64,
    fiber_residual: f64,
    p_min: f64,
    p_max: f64,
    p_spread: f64,
    rotation: f64,
}

fn gluing_stats(p: &TorusChartPoint) -> GluingStats {
    let one = NovikovScale::ONE;
    let wt = eval_w(&ChartPoint::Torus(*p), one).expect("torus chart");
    let scale = p.z(1).norm() + p.z(2).norm() + p.z(3).norm();
    let mut s = GluingStats::default();
    let mut u = [Complex64::new(0.0, 0.0); 3];
    for i in 1..=3u8 {
        let m = torus_to_immersed(p, i).expect("chart index");
        u[i as usize - 1] = m.u;
        let wi = eval_w(&ChartPoint::Immersed(m), one).map(|w| (w - wt).norm() / scale).unwrap_or(f64::INFINITY);
        s.chart_agreement = s.chart_agreement.max(wi);
        let back = immersed_to_torus(&m).expect("v is nonzero");
        let rt = (1..=2).map(|k| (back.z(k) - p.z(k)).norm() / p.z(k).norm()).fold(0.0, f64::max);
        s.round_trip = s.round_trip.max(rt);
        let rel = (m.u * m.v - 1.0 - p.w(i as i64 + 1)).norm() / (1.0 + p.w(i as i64 + 1).norm());
        s.gluing_relation = s.gluing_relation.max(rel);
        let e = (m.u * m.v - 1.0).norm();
        let fr = fiber_equation_check(wt, &m) / (m.u.norm() * e + m.v.norm_sqr() + wt.norm() * e);
        s.fiber_residual = s.fiber_residual.max(fr);
    }
    let pv = cubic_relation(u[0], u[1], u[2]);
    s.p_min = pv.re;
    s.p_max = pv.re;
    s.p_spread = (pv - CUBIC_RELATION_CONSTANT).norm() / CUBIC_RELATION_CONSTANT.abs();
    let r = p.rotated();
    let ur: Vec<Complex64> = (1..=3u8).map(|i| torus_to_immersed(&r, i).expect("chart index").u).collect();
    let cyc = (0..3).map(|k| (ur[k] - u[(k + 1) % 3]).norm()).fold(0.0, f64::max);
    let wr = eval_w(&ChartPoint::Torus(r), one).expect("torus chart");
    s.rotation = cyc.max((wr - wt).norm()) / scale;
    s
}

fn gluing_suite(cfg: &RunConfig, samples: usize, ch: &mut Checks) -> Value {
    let pts = sample_torus_points(cfg.seed, samples);
    let stats: Vec<GluingStats> = pts.par_iter().map(gluing_stats).collect();
    let fold = |f: fn(&GluingStats) -> f64| stats.iter().map(f).fold(0.0, f64::max);
    let agree = fold(|s| s.chart_agreement);
    let rt = fold(|s| s.round_trip);
    let rel = fold(|s| s.gluing_relation);
    let fr = fold(|s| s.fiber_residual);
    let spread = fold(|s| s.p_spread);
    let rot = fold(|s| s.rotation);
    let p_min = stats.iter().map(|s| s.p_min).fold(f64::INFINITY, f64::min);
    let p_max = stats.iter().map(|s| s.p_max).fold(f64::NEG_INFINITY, f64::max);
    // sections v = 0 over a grid of c
    let mut section = 0.0f64;
    for k in 0..100 {
        let c = Complex64::new(-5.0 + 0.1 * k as f64, 0.37 * (k % 7) as f64 - 1.0);
        for i in 1..=3u8 {
            let m = ImmersedChartPoint::new(i, c, Complex64::new(0.0, 0.0)).expect("chart index");
            section = section.max(fiber_equation_check(c, &m));
            let w = eval_w(&ChartPoint::Immersed(m), NovikovScale::ONE).expect("uv = 0");
            section = section.max((w - c).norm());
        }
    }
    let n = pts.len();
    ch.record("charts agree on W", agree <= 1e-12, format!("{n} samples, max relative difference {agree:.3e}"));
    ch.record("overlap inverse", rt <= 1e-12, format!("max relative defect {rt:.3e}"));
    ch.record("uv = 1 + w", rel <= 1e-12, format!("max relative defect {rel:.3e}"));
    ch.record("fiber equation on W = c", fr <= 1e-12, format!("max scaled residual {fr:.3e}"));
    ch.record("sections v = 0", section == 0.0, format!("100 values of c, max residual {section:.3e}"));
    ch.record(
        "cubic relation constant",
        spread <= 1e-10,
        format!("P in [{p_min:.15}, {p_max:.15}], constant {CUBIC_RELATION_CONSTANT}, max relative spread {spread:.3e}"),
    );
    ch.record("rotation cycles the charts", rot <= 1e-12, format!("max defect {rot:.3e}"));
    json!({
        "samples": n,
        "seed": cfg.seed,
        "chart_agreement": num(agree),
        "overlap_inverse": num(rt),
        "gluing_relation": num(rel),
        "fiber_residual": num(fr),
        "section_residual": num(section),
        "cubic_constant": num(CUBIC_RELATION_CONSTANT),
        "cubic_min": num(p_min),
        "cubic_max": num(p_max),
        "cubic_relative_spread": num(spread),
        "rotation_defect": num(rot),
    })
}

fn iso_suite(cfg: &RunConfig, ch: &mut Checks) -> Value {
    let atlas = build_atlas();
    let pc = cfg.period_config();
    let triangle = find_triple_point(&pc).ok().and_then(|tp| {
        let vs = [Complex64::new(tp.v1, 0.0), tp.v2, tp.v3];
        let mut out = [[0.0; 2]; 3];
        for (k, v) in vs.iter().enumerate() {
            out[k] = chart_sample(*v, &pc).ok()?.f;
        }
        Some(out)
    });
    if triangle.is_none() {
        ch.record("affine coordinates of v1, v2, v3", false, "triple point computation failed".into());
    }
    match verify_isomorphism(&atlas, triangle) {
        Ok(r) => {
            for t in &r.transposes {
                ch.record(
                    &format!("transpose at {}", t.at),
                    t.picard_lefschetz.transpose() == t.glue,
                    format!("{}^T = {} = glue({})", t.picard_lefschetz, t.picard_lefschetz.transpose(), t.at),
                );
            }
            ch.record(
                "invariant directions",
                true,
                format!("{:?} fixed by glue maps and by the transposed monodromies", r.invariant_directions),
            );
            let fit = r.fit.map(|f| {
                json!({
                    "linear": real_matrix(f.linear),
                    "translation": [num(f.translation[0]), num(f.translation[1])],
                    "determinant": num(f.determinant),
                })
            });
            json!({
                "transposes": r.transposes.iter().map(|t| json!({
                    "at": t.at,
                    "picard_lefschetz": matrix(&t.picard_lefschetz),
                    "glue": matrix(&t.glue),
                })).collect::<Vec<_>>(),
                "invariant_directions": r.invariant_directions,
                "triangle_cps": r.triangle.iter().map(|p| point(*p)).collect::<Vec<_>>(),
                "triangle_syz": triangle.map(|t| t.iter().map(|p| [num(p[0]), num(p[1])]).collect::<Vec<_>>()),
                "fit": fit,
            })
        }
        Err(e) => {
            ch.record("affine isomorphism", false, e.to_string());
            Value::Null
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite, samples: usize) -> Result<CommandOutput, LabError> {
    cfg.validate()?;
    require_json(cfg)?;
    if samples == 0 {
        return Err(LabError::BadInput("--samples must be positive".into()));
    }
    let mut ch = Checks::new();
    let mut m = Map::new();
    if matches!(suite, Suite::All | Suite::Appendix) {
        m.insert("appendix".into(), appendix_suite(cfg, &mut ch));
    }
    if matches!(suite, Suite::All | Suite::Gluing) {
        m.insert("gluing".into(), gluing_suite(cfg, samples, &mut ch));
    }
    if matches!(suite, Suite::All | Suite::Iso) {
        m.insert("iso".into(), iso_suite(cfg, &mut ch));
    }
    let pass = ch.failure.is_none();
    m.insert("checks".into(), Value::Array(ch.list));
    m.insert("pass".into(), json!(pass));
    Ok(CommandOutput {
        text: to_text(&document("verify", m)),
        log: ch.log,
        failure: ch.failure,
    })
}
