//! Complex affine structure on the base: coordinates from cylinder integrals,
//! the level function `F1`, the triple point and traced affine rays.
//!
//! Multivalued data is resolved by one fixed path schema: radial paths from
//! `q = 0`, bent around a critical value on the side of the cut the target lies
//! on (points exactly on a cut count as below it).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::fibration::critical_values;
use crate::homology::{conjugation_action, HomologyClass};
use crate::numkernel::{find_root_1d, NumError, ZETA};
use crate::periods::{
    segment_distance, thimble_integral, BasePath, CylinderWalker, PeriodConfig, PeriodError, ThimbleWalker,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AffineError {
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error("F1 keeps its sign down to q = {scanned_to}")]
    BracketNotFound { scanned_to: f64 },
    #[error("corrector lost the level set after {last}")]
    TraceLost { last: C64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

impl From<NumError> for AffineError {
    fn from(e: NumError) -> Self {
        AffineError::Period(PeriodError::Num(e))
    }
}

/// Radius of the detour around a critical value.
pub const DETOUR_RADIUS: f64 = 0.3;

/// Path from `0` to `q` under the fixed schema.
pub fn export_path(q: C64) -> BasePath {
    let origin = C64::new(0.0, 0.0);
    if q == origin {
        return BasePath::new(vec![origin]).expect("single node");
    }
    for lam in critical_values() {
        let u = lam / lam.norm();
        let rel = q / u;
        if segment_distance(origin, q, lam) >= DETOUR_RADIUS || (rel.im == 0.0 && rel.re <= 3.0) {
            continue;
        }
        let above = rel.im > 0.0;
        let inside = (q - lam).norm() < DETOUR_RADIUS;
        // angle about lam measured from the outward direction u
        let psi_end = if inside {
            let a = ((q - lam) / u).arg();
            if above {
                a
            } else if a <= 0.0 {
                a + 2.0 * PI
            } else {
                a
            }
        } else if above {
            0.0
        } else {
            2.0 * PI
        };
        let sweep = psi_end - PI;
        let pieces = ((sweep.abs() / (PI / 16.0)).ceil() as usize).max(1);
        let mut nodes = vec![origin];
        for k in 0..=pieces {
            let psi = PI + sweep * k as f64 / pieces as f64;
            nodes.push(lam + u * C64::from_polar(DETOUR_RADIUS, psi));
        }
        nodes.push(q);
        return BasePath::new(nodes).expect("nonempty");
    }
    BasePath::radial(q)
}

/// 0 inside `|q| < 3`, otherwise `1 + k` for the sector `120k < arg q <= 120(k+1)` degrees.
pub fn chamber_id(q: C64) -> u32 {
    if q.norm() < 3.0 {
        return 0;
    }
    let mut a = q.arg();
    if a <= 0.0 {
        a += 2.0 * PI;
    }
    let k = ((a - 1e-15) / (2.0 * PI / 3.0)).floor() as u32;
    1 + k.min(2)
}

/// `(Im of integral of period(c), Im of integral of period(d))` along `path` from `0`.
pub fn affine_coordinates(path: &BasePath, cfg: &PeriodConfig) -> Result<[f64; 2], AffineError> {
    let r = crate::periods::cylinder_integrals(path, cfg)?;
    Ok([r.c.im, r.d.im])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineChartSample {
    pub q: C64,
    pub f: [f64; 2],
    pub chamber_id: u32,
}

/// Affine coordinates at `q` along [`export_path`].
pub fn chart_sample(q: C64, cfg: &PeriodConfig) -> Result<AffineChartSample, AffineError> {
    let f = affine_coordinates(&export_path(q), cfg)?;
    Ok(AffineChartSample {
        q,
        f,
        chamber_id: chamber_id(q),
    })
}

/// Rectangle `[re0, re1] x [im0, im1]` sampled at `nx * ny` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    /// Row-major points, bottom row first.
    pub fn points(&self) -> Vec<C64> {
        let coord = |r: [f64; 2], n: usize, k: usize| {
            if n <= 1 {
                r[0]
            } else {
                r[0] + (r[1] - r[0]) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(C64::new(coord(self.re, self.nx, ix), coord(self.im, self.ny, iy)));
            }
        }
        out
    }
}

/// One grid point of [`export_chart`]; failures are kept rather than aborting the grid.
pub type ChartEntry = (C64, Result<AffineChartSample, AffineError>);

/// Sequential grid sampling. Points closer than the clearance to a critical
/// value are reported as failures.
pub fn export_chart(grid: &Grid, cfg: &PeriodConfig) -> Vec<ChartEntry> {
    grid.points().into_iter().map(|q| (q, chart_sample(q, cfg))).collect()
}

/// Action of complex conjugation on affine coordinates: `f(conj q) = S f(q)`.
///
/// Conjugation reverses the orientation of the fibers, so `S` is minus the
/// transpose of the action on `H1(E0)`.
pub fn conjugation_on_coordinates() -> [[i64; 2]; 2] {
    let t = conjugation_action().transpose().entries();
    [[-t[0][0], -t[0][1]], [-t[1][0], -t[1][1]]]
}

/// Samples at `q` and `conj q` and the defect of the conjugation relation.
pub fn conjugation_defect(q: C64, cfg: &PeriodConfig) -> Result<(AffineChartSample, AffineChartSample, f64), AffineError> {
    let a = chart_sample(q, cfg)?;
    let b = chart_sample(q.conj(), cfg)?;
    let s = conjugation_on_coordinates();
    let pred = [
        s[0][0] as f64 * a.f[0] + s[0][1] as f64 * a.f[1],
        s[1][0] as f64 * a.f[0] + s[1][1] as f64 * a.f[1],
    ];
    let defect = (pred[0] - b.f[0]).abs().max((pred[1] - b.f[1]).abs());
    Ok((a, b, defect))
}

/// `|G_0(0)|`, the unit for relative tolerances.
pub fn scale(cfg: &PeriodConfig) -> Result<f64, AffineError> {
    Ok(thimble_integral(0, C64::new(0.0, 0.0), None, cfg)?.value.norm())
}

/// `F1(q) = -Im G_0(q) / 2 + 3 Im G_0(0) / 2` on the negative real axis, with `G_0(0)` cached.
#[derive(Debug, Clone)]
pub struct F1 {
    im_g0_at_0: f64,
    cfg: PeriodConfig,
}

impl F1 {
    pub fn new(cfg: &PeriodConfig) -> Result<Self, AffineError> {
        let g = thimble_integral(0, C64::new(0.0, 0.0), None, cfg)?;
        Ok(F1 {
            im_g0_at_0: g.value.im,
            cfg: *cfg,
        })
    }

    pub fn at_zero(&self) -> f64 {
        self.im_g0_at_0
    }

    pub fn from_g(&self, g: C64) -> f64 {
        -0.5 * g.im + 1.5 * self.im_g0_at_0
    }

    pub fn eval(&self, q: f64) -> Result<f64, AffineError> {
        if !(q <= 0.0) {
            return Err(AffineError::InvalidInput("F1 is evaluated on q <= 0"));
        }
        let g = thimble_integral(0, C64::new(q, 0.0), None, &self.cfg)?;
        Ok(self.from_g(g.value))
    }
}

pub fn compute_f1(q: f64, cfg: &PeriodConfig) -> Result<f64, AffineError> {
    F1::new(cfg)?.eval(q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriplePoint {
    pub v1: f64,
    pub v2: C64,
    pub v3: C64,
    /// `F1(v1)`.
    pub residual: f64,
    pub bisection_steps: u32,
    /// `|G_0(0)|`.
    pub scale: f64,
    /// `Im G_1(v1)` and `Im G_2(v1)`.
    pub im_g1: f64,
    pub im_g2: f64,
}

/// Zero of `F1` on the negative real axis.
pub fn find_triple_point(cfg: &PeriodConfig) -> Result<TriplePoint, AffineError> {
    let f1 = F1::new(cfg)?;
    let scale = f1.at_zero().abs();
    let mut w = ThimbleWalker::start(0, C64::new(0.0, 0.0), cfg)?;
    let (mut hi, mut lo) = (0.0, -1.0);
    loop {
        w.advance(C64::new(lo, 0.0))?;
        if f1.from_g(w.value()) < 0.0 {
            break;
        }
        if lo < -1e4 {
            return Err(AffineError::BracketNotFound { scanned_to: lo });
        }
        hi = lo;
        lo *= 2.0;
    }
    // bisect with probes from the far end of the bracket
    let mut failure = None;
    let root = find_root_1d(
        |x| match w.probe(C64::new(x, 0.0)) {
            Ok((g, _)) => f1.from_g(g),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-12 * scale.max(1.0),
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    let root = root?;
    let v1 = root.x;
    let at = C64::new(v1, 0.0);
    let g1 = thimble_integral(1, at, None, cfg)?.value;
    let g2 = thimble_integral(2, at, None, cfg)?.value;
    Ok(TriplePoint {
        v1,
        v2: ZETA * v1,
        v3: ZETA * ZETA * v1,
        residual: root.g,
        bisection_steps: root.steps,
        scale,
        im_g1: g1.im,
        im_g2: g2.im,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RayKind {
    /// From `B`, where `G_1` is real and positive.
    MinusCMinusD,
    /// From `C`, where `G_2` is real and negative.
    MinusTwoCPlusD,
    /// From `0` along the fixed line of conjugation, where `G_1 - G_2` is real.
    NegativeRealAxis,
    /// From `A` outwards, where the cylinder integral of `c - d` is real.
    PositiveRealCut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineRay {
    pub kind: RayKind,
    pub direction_class: HomologyClass,
    pub origin: Origin,
    pub trace: Vec<C64>,
    /// Largest `|Im|` of the level function over the trace.
    pub max_residual: f64,
}

impl AffineRay {
    /// Distance from `p` to the polygonal trace.
    pub fn distance_to(&self, p: C64) -> f64 {
        match self.trace.len() {
            0 => f64::INFINITY,
            1 => (self.trace[0] - p).norm(),
            _ => self
                .trace
                .windows(2)
                .map(|w| segment_distance(w[0], w[1], p))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Holomorphic function whose imaginary part is traced.
trait Level: Clone {
    fn q(&self) -> C64;
    fn value(&self) -> C64;
    fn derivative(&self) -> Result<C64, PeriodError>;
    fn advance(&mut self, to: C64) -> Result<(), PeriodError>;
}

#[derive(Debug, Clone)]
struct Thimbles(Vec<(f64, ThimbleWalker)>);

impl Level for Thimbles {
    fn q(&self) -> C64 {
        self.0[0].1.q()
    }

    fn value(&self) -> C64 {
        self.0.iter().map(|(a, w)| w.value() * *a).sum()
    }

    fn derivative(&self) -> Result<C64, PeriodError> {
        let mut d = C64::new(0.0, 0.0);
        for (a, w) in &self.0 {
            d += w.period()? * *a;
        }
        Ok(d)
    }

    fn advance(&mut self, to: C64) -> Result<(), PeriodError> {
        for (_, w) in &mut self.0 {
            w.advance(to)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Cylinder {
    walker: CylinderWalker,
    coeffs: [f64; 2],
    offset: C64,
}

impl Level for Cylinder {
    fn q(&self) -> C64 {
        self.walker.q()
    }

    fn value(&self) -> C64 {
        let v = self.walker.values();
        v[0] * self.coeffs[0] + v[1] * self.coeffs[1] - self.offset
    }

    fn derivative(&self) -> Result<C64, PeriodError> {
        let p = self.walker.periods()?;
        Ok(p[0] * self.coeffs[0] + p[1] * self.coeffs[1])
    }

    fn advance(&mut self, to: C64) -> Result<(), PeriodError> {
        self.walker.advance(to)
    }
}

const RAY_STEP: f64 = 0.02;
const MIN_RAY_STEP: f64 = 1e-7;

enum Stop {
    /// Stop on reaching the real axis.
    RealAxis,
    /// Stop once `Re q` passes the bound, in the direction of travel.
    Re(f64),
}

struct Tracer {
    tol: f64,
    max_length: f64,
}

impl Tracer {
    /// Newton iteration along the normal `i * tau` so that `Im` of the level vanishes.
    fn correct<L: Level>(&self, lv: &mut L, sign: f64) -> Result<bool, PeriodError> {
        for _ in 0..8 {
            let im = lv.value().im;
            if im.abs() <= self.tol {
                return Ok(true);
            }
            let p = lv.derivative()?;
            let tau = p.conj() * sign / p.norm();
            let t = -im / (sign * p.norm());
            let to = lv.q() + C64::new(0.0, 1.0) * tau * t;
            lv.advance(to)?;
        }
        Ok(lv.value().im.abs() <= self.tol)
    }

    /// One predictor-corrector step of length about `h`; `None` if the corrector fails.
    fn step<L: Level>(&self, lv: &L, sign: f64, h: f64) -> Option<L> {
        let p = lv.derivative().ok()?;
        let tau = p.conj() * sign / p.norm();
        let mut next = lv.clone();
        next.advance(lv.q() + tau * h).ok()?;
        match self.correct(&mut next, sign) {
            Ok(true) => Some(next),
            _ => None,
        }
    }

    fn trace<L: Level>(&self, mut lv: L, sign: f64, stop: Stop) -> Result<(Vec<C64>, f64), AffineError> {
        let mut pts = vec![lv.q()];
        let mut worst = lv.value().im.abs();
        let mut h = RAY_STEP;
        let mut length = 0.0;
        let side = lv.q().im.signum();
        let travel = {
            let p = lv.derivative()?;
            (p.conj() * sign).re.signum()
        };
        while length < self.max_length {
            let Some(next) = self.step(&lv, sign, h) else {
                h *= 0.5;
                if h < MIN_RAY_STEP {
                    return Err(AffineError::TraceLost { last: lv.q() });
                }
                continue;
            };
            let q = next.q();
            let crossed = match stop {
                Stop::RealAxis => q.im * side <= 0.0,
                Stop::Re(bound) => (q.re - bound) * travel >= 0.0,
            };
            if crossed {
                let (gap, over) = match stop {
                    Stop::RealAxis => (lv.q().im.abs(), q.im.abs()),
                    Stop::Re(bound) => ((bound - lv.q().re).abs(), (q.re - bound).abs()),
                };
                if over <= 1e-10 || h <= MIN_RAY_STEP {
                    worst = worst.max(next.value().im.abs());
                    pts.push(q);
                    return Ok((pts, worst));
                }
                // shorten the step so that it lands on the stopping line
                h = (h * gap / (gap + over)).max(MIN_RAY_STEP);
                continue;
            }
            length += (q - lv.q()).norm();
            worst = worst.max(next.value().im.abs());
            pts.push(q);
            lv = next;
            h = (h * 1.5).min(RAY_STEP);
        }
        Ok((pts, worst))
    }
}

/// Traces one of the four affine lines through the singular points.
pub fn trace_ray(kind: RayKind, cfg: &PeriodConfig) -> Result<AffineRay, AffineError> {
    let sc = scale(cfg)?;
    let tracer = Tracer {
        tol: 1e-9 * sc,
        max_length: 20.0,
    };
    let lams = critical_values();
    let (class, origin, (trace, worst)) = match kind {
        RayKind::MinusCMinusD | RayKind::MinusTwoCPlusD => {
            let (j, sign, class, origin) = if kind == RayKind::MinusCMinusD {
                (1, 1.0, HomologyClass::cd(-1, -1), Origin::B)
            } else {
                (2, -1.0, HomologyClass::cd(-2, 1), Origin::C)
            };
            let lam = lams[j];
            // leave the critical value in the direction where G_j has the requested sign
            let probe = ThimbleWalker::start(j, lam * 0.98, cfg)?;
            let p = probe.period()?;
            let dir = p.conj() * sign / p.norm();
            let w = ThimbleWalker::start(j, lam + dir * 0.05, cfg)?;
            let mut lv = Thimbles(vec![(1.0, w)]);
            if !tracer.correct(&mut lv, sign)? {
                return Err(AffineError::TraceLost { last: lv.q() });
            }
            (class, origin, tracer.trace(lv, sign, Stop::RealAxis)?)
        }
        RayKind::NegativeRealAxis => {
            let zero = C64::new(0.0, 0.0);
            let w1 = ThimbleWalker::start(1, zero, cfg)?;
            let w2 = ThimbleWalker::start(2, zero, cfg)?;
            let lv = Thimbles(vec![(1.0, w1), (-1.0, w2)]);
            // travel towards negative real q
            let p = lv.derivative()?;
            let sign = if p.conj().re < 0.0 { 1.0 } else { -1.0 };
            (HomologyClass::cd(1, 0), Origin::A, tracer.trace(lv, sign, Stop::Re(-6.0))?)
        }
        RayKind::PositiveRealCut => {
            let start = C64::new(3.0 + DETOUR_RADIUS, 0.0);
            let mut walker = CylinderWalker::new(cfg)?;
            for z in &export_path(start).nodes()[1..] {
                walker.advance(*z)?;
            }
            let [c, d] = walker.values();
            let lv = Cylinder {
                walker,
                coeffs: [1.0, -1.0],
                offset: c - d,
            };
            let p = lv.derivative()?;
            let sign = if p.conj().re > 0.0 { 1.0 } else { -1.0 };
            (HomologyClass::cd(1, -1), Origin::A, tracer.trace(lv, sign, Stop::Re(8.0))?)
        }
    };
    Ok(AffineRay {
        kind,
        direction_class: class,
        origin,
        trace,
        max_residual: worst,
    })
}

/// Checks the defining condition of a traced ray after rotating it by `zeta`:
/// the largest `|Im G_{j+1}|` over the rotated trace.
pub fn rotated_ray_residual(ray: &AffineRay, cfg: &PeriodConfig) -> Result<f64, AffineError> {
    let j = match ray.origin {
        Origin::B => 1,
        Origin::C => 2,
        Origin::A => return Err(AffineError::InvalidInput("rotation check applies to rays from B or C")),
    };
    let k = (j + 1) % 3;
    let lam = critical_values()[k];
    let mut pts = ray.trace.iter().map(|z| z * ZETA);
    let first = pts.next().ok_or(AffineError::InvalidInput("empty trace"))?;
    let mut w = ThimbleWalker::start(k, first, cfg)?;
    let mut worst = w.value().im.abs();
    for z in pts {
        if (z - lam).norm() <= cfg.clearance {
            continue;
        }
        w.advance(z)?;
        worst = worst.max(w.value().im.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn chambers() {
        assert_eq!(chamber_id(c(0.0, 0.0)), 0);
        assert_eq!(chamber_id(c(2.9, 0.0)), 0);
        assert_eq!(chamber_id(c(4.0, 1.0)), 1);
        assert_eq!(chamber_id(c(4.0, 0.0)), 3);
        assert_eq!(chamber_id(c(4.0, -1.0)), 3);
        assert_eq!(chamber_id(c(-4.0, 0.0)), 2);
        assert_eq!(chamber_id(ZETA * 4.0), 1);
    }

    #[test]
    fn detours_keep_their_side() {
        let p = export_path(c(5.0, 0.0));
        assert!(p.nodes().len() > 4);
        assert!(p.nodes().iter().all(|z| z.im <= 1e-12));
        let p = export_path(c(5.0, 0.1));
        assert!(p.nodes()[1..p.nodes().len() - 1].iter().all(|z| z.im >= -1e-12));
        assert_eq!(export_path(c(2.0, 0.0)).nodes().len(), 2);
        assert_eq!(export_path(c(1.0, 2.0)).nodes().len(), 2);
        let inside = export_path(c(3.1, -0.05));
        assert_eq!(inside.end(), c(3.1, -0.05));
        for w in inside.nodes().windows(2) {
            assert!(segment_distance(w[0], w[1], c(3.0, 0.0)) > 0.05);
        }
    }

    #[test]
    fn conjugation_matrix() {
        assert_eq!(conjugation_on_coordinates(), [[-1, 0], [-1, 1]]);
    }

    #[test]
    fn coordinates_vanish_at_base() {
        let s = chart_sample(c(0.0, 0.0), &PeriodConfig::default()).unwrap();
        assert_eq!(s.f, [0.0, 0.0]);
    }

    #[test]
    fn f1_positive_at_zero() {
        let f = F1::new(&PeriodConfig::default()).unwrap();
        assert!(f.eval(0.0).unwrap() > 0.0);
        assert!((f.eval(0.0).unwrap() - f.at_zero()).abs() < 1e-12);
        assert!(f.eval(1.0).is_err());
    }
}
