//! Numeric substrate: adaptive Gauss–Kronrod contour quadrature, cubic roots,
//! bisection and square-root branch tracking.
//!
//! All routines are pure functions of their inputs.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

/// `exp(2 pi i / 3)`.
pub const ZETA: C64 = C64 {
    re: -0.5,
    im: 0.866_025_403_784_438_6,
};

/// Errors raised by the numeric kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("quadrature did not converge (partial {partial}, estimate {error_estimate:e})")]
    NonConvergence { partial: C64, error_estimate: f64 },
    #[error("integrand is not finite at {at}")]
    SingularityOnPath { at: C64 },
    #[error("leading coefficient vanishes")]
    DegenerateLeadingCoefficient,
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("radicand vanishes on the path near {at}")]
    RadicandVanishesOnPath { at: C64 },
    #[error("invalid contour: {0}")]
    InvalidContour(&'static str),
}

/// `value` of a quadrature together with its error estimate and cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: C64,
    pub abs_error_estimate: f64,
    pub n_evaluations: usize,
}

impl QuadratureResult {
    fn zero() -> Self {
        QuadratureResult {
            value: C64::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            n_evaluations: 0,
        }
    }

    fn add(self, o: Self) -> Self {
        QuadratureResult {
            value: self.value + o.value,
            abs_error_estimate: self.abs_error_estimate + o.abs_error_estimate,
            n_evaluations: self.n_evaluations + o.n_evaluations,
        }
    }

    fn neg(self) -> Self {
        QuadratureResult {
            value: -self.value,
            ..self
        }
    }
}

// Kronrod abscissae, descending; the odd entries are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
pub(crate) const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
pub(crate) const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_485_970,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
pub(crate) const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Subdivision budget per call, in panels.
const MAX_PANELS: usize = 1000;

/// QUADPACK-style error estimate from the Kronrod/Gauss difference.
pub(crate) fn gk_error(diff: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = diff;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

struct Panel {
    value: C64,
    err: f64,
    resabs: f64,
}

fn gk21<G: FnMut(f64) -> C64>(g: &mut G, a: f64, b: f64) -> Result<Panel, f64> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);
    if !(fc.re.is_finite() && fc.im.is_finite()) {
        return Err(center);
    }
    let mut vals = [(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); 10];
    let mut resk = fc * WGK[10];
    let mut resg = C64::new(0.0, 0.0);
    let mut resabs = fc.norm() * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        if !(f1.re.is_finite() && f1.im.is_finite()) {
            return Err(center - dx);
        }
        if !(f2.re.is_finite() && f2.im.is_finite()) {
            return Err(center + dx);
        }
        vals[j] = (f1, f2);
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((vals[j].0 - mean).norm() + (vals[j].1 - mean).norm());
    }
    let h = half.abs();
    Ok(Panel {
        value: resk * half,
        err: gk_error(((resk - resg) * half).norm(), resabs * h, resasc * h),
        resabs: resabs * h,
    })
}

/// Adaptive Gauss–Kronrod (10/21) integration of `g` over the real interval `[a, b]`.
///
/// Global strategy: the panel with the largest error estimate is bisected until
/// the summed estimate meets `tol` (or the round-off limit of the integrand).
pub fn integrate_interval<G: FnMut(f64) -> C64>(
    mut g: G,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadratureResult, NumError> {
    if a == b {
        return Ok(QuadratureResult {
            n_evaluations: 1,
            ..QuadratureResult::zero()
        });
    }
    let bad = |x: f64| NumError::SingularityOnPath { at: C64::new(x, 0.0) };
    let mut panels: Vec<(f64, f64, Panel)> = alloc::vec![(a, b, gk21(&mut g, a, b).map_err(bad)?)];
    let mut evals = 21;
    loop {
        let err: f64 = panels.iter().map(|p| p.2.err).sum();
        let resabs: f64 = panels.iter().map(|p| p.2.resabs).sum();
        let done = err <= tol.max(100.0 * f64::EPSILON * resabs);
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.2.err > best.1 { (i, p.2.err) } else { best });
        let (lo, hi, _) = panels[worst];
        let mid = 0.5 * (lo + hi);
        let too_narrow = mid <= lo.min(hi) || mid >= lo.max(hi);
        if done || panels.len() >= MAX_PANELS || too_narrow {
            let value = panels.iter().fold(C64::new(0.0, 0.0), |s, p| s + p.2.value);
            if !done {
                return Err(NumError::NonConvergence {
                    partial: value,
                    error_estimate: err,
                });
            }
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: err,
                n_evaluations: evals,
            });
        }
        let left = gk21(&mut g, lo, mid).map_err(bad)?;
        let right = gk21(&mut g, mid, hi).map_err(bad)?;
        evals += 42;
        panels[worst] = (lo, mid, left);
        panels.insert(worst + 1, (mid, hi, right));
    }
}

/// One piece of a [`Contour`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line,
    /// Circular arc about `center` turning through `sweep` radians (positive is counterclockwise).
    Arc { center: C64, sweep: f64 },
}

/// Piecewise path in the complex plane made of straight segments and circular arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    nodes: Vec<C64>,
    segments: Vec<Segment>,
}

impl Contour {
    pub fn new(start: C64) -> Self {
        Contour {
            nodes: alloc::vec![start],
            segments: Vec::new(),
        }
    }

    pub fn polyline(points: &[C64]) -> Result<Self, NumError> {
        let (first, rest) = points
            .split_first()
            .ok_or(NumError::InvalidContour("empty"))?;
        let mut c = Contour::new(*first);
        for p in rest {
            c = c.line_to(*p);
        }
        c.validate()?;
        Ok(c)
    }

    /// Closed circle through `center + radius`, counterclockwise when `ccw`.
    pub fn circle(center: C64, radius: f64, ccw: bool) -> Self {
        let s = if ccw { PI } else { -PI };
        Contour::new(center + radius)
            .arc_to(center, s)
            .arc_to(center, s)
    }

    pub fn line_to(mut self, z: C64) -> Self {
        self.nodes.push(z);
        self.segments.push(Segment::Line);
        self
    }

    pub fn arc_to(mut self, center: C64, sweep: f64) -> Self {
        let last = *self.nodes.last().unwrap_or(&center);
        let end = center + (last - center) * C64::from_polar(1.0, sweep);
        self.nodes.push(end);
        self.segments.push(Segment::Arc { center, sweep });
        self
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> C64 {
        self.nodes[0]
    }

    pub fn end(&self) -> C64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn validate(&self) -> Result<(), NumError> {
        if self.nodes.len() < 2 {
            return Err(NumError::InvalidContour("fewer than two nodes"));
        }
        for w in self.nodes.windows(2) {
            if w[0] == w[1] {
                return Err(NumError::InvalidContour("repeated node"));
            }
        }
        for s in &self.segments {
            if let Segment::Arc { sweep, .. } = s {
                if !(sweep.is_finite() && *sweep != 0.0 && sweep.abs() <= TAU) {
                    return Err(NumError::InvalidContour("bad arc sweep"));
                }
            }
        }
        Ok(())
    }

    /// Same nodes in the opposite order.
    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| match *s {
                Segment::Line => Segment::Line,
                Segment::Arc { center, sweep } => Segment::Arc {
                    center,
                    sweep: -sweep,
                },
            })
            .collect();
        Contour { nodes, segments }
    }

    /// `other` appended; its start must coincide with this contour's end.
    pub fn concat(&self, other: &Contour) -> Self {
        let mut c = self.clone();
        c.nodes.extend_from_slice(&other.nodes[1..]);
        c.segments.extend_from_slice(&other.segments);
        c
    }

    /// Point at local parameter `s` in `[0, 1]` of segment `k`.
    pub fn point(&self, k: usize, s: f64) -> C64 {
        let (a, b) = (self.nodes[k], self.nodes[k + 1]);
        match self.segments[k] {
            Segment::Line => a + (b - a) * s,
            Segment::Arc { center, sweep } => center + (a - center) * C64::from_polar(1.0, sweep * s),
        }
    }

    pub fn length(&self) -> f64 {
        let mut l = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            l += match *s {
                Segment::Line => (self.nodes[k + 1] - self.nodes[k]).norm(),
                Segment::Arc { center, sweep } => (self.nodes[k] - center).norm() * sweep.abs(),
            };
        }
        l
    }
}

/// Which end of a segment carries an inverse-square-root singularity.
#[derive(Clone, Copy, PartialEq)]
enum Ends {
    None,
    Start,
    End,
}

fn line_integral<F: FnMut(C64) -> C64>(
    f: &mut F,
    a: C64,
    b: C64,
    ends: Ends,
    tol: f64,
) -> Result<QuadratureResult, NumError> {
    match ends {
        Ends::None => {
            let mid = (a + b) * 0.5;
            let half = (b - a) * 0.5;
            integrate_interval(|x| f(mid + half * x) * half, -1.0, 1.0, tol)
        }
        Ends::Start => {
            let d = b - a;
            integrate_interval(|w| f(a + d * (w * w)) * d * (2.0 * w), 0.0, 1.0, tol)
        }
        Ends::End => {
            let d = a - b;
            integrate_interval(|w| f(b + d * (w * w)) * d * (2.0 * w), 0.0, 1.0, tol).map(QuadratureResult::neg)
        }
    }
}

fn arc_integral<F: FnMut(C64) -> C64>(
    f: &mut F,
    a: C64,
    center: C64,
    sweep: f64,
    ends: Ends,
    tol: f64,
) -> Result<QuadratureResult, NumError> {
    let r0 = a - center;
    let at = |phi: f64| r0 * C64::from_polar(1.0, phi);
    let i = C64::new(0.0, 1.0);
    match ends {
        Ends::None => integrate_interval(
            |s| {
                let v = at(sweep * s);
                f(center + v) * i * v * sweep
            },
            0.0,
            1.0,
            tol,
        ),
        Ends::Start => integrate_interval(
            |w| {
                let v = at(sweep * w * w);
                f(center + v) * i * v * (sweep * 2.0 * w)
            },
            0.0,
            1.0,
            tol,
        ),
        Ends::End => integrate_interval(
            |w| {
                let v = at(sweep * (1.0 - w * w));
                f(center + v) * i * v * (sweep * 2.0 * w)
            },
            0.0,
            1.0,
            tol,
        ),
    }
}

fn piece<F: FnMut(C64) -> C64>(
    f: &mut F,
    c: &Contour,
    k: usize,
    ends: Ends,
    tol: f64,
) -> Result<QuadratureResult, NumError> {
    let (a, b) = (c.nodes[k], c.nodes[k + 1]);
    let r = match c.segments[k] {
        Segment::Line => line_integral(f, a, b, ends, tol),
        Segment::Arc { center, sweep } => arc_integral(f, a, center, sweep, ends, tol),
    };
    r.map_err(|e| match e {
        NumError::SingularityOnPath { .. } => NumError::SingularityOnPath { at: (a + b) * 0.5 },
        other => other,
    })
}

fn segment_with_ends<F: FnMut(C64) -> C64>(
    f: &mut F,
    c: &Contour,
    k: usize,
    tol: f64,
) -> Result<QuadratureResult, NumError> {
    let n = c.segments.len();
    let first = k == 0;
    let last = k + 1 == n;
    if first && last {
        // singular at both ends: split at the midpoint
        let a = c.nodes[0];
        let b = c.nodes[1];
        match c.segments[0] {
            Segment::Line => {
                let m = (a + b) * 0.5;
                let l = line_integral(f, a, m, Ends::Start, 0.5 * tol)?;
                let r = line_integral(f, m, b, Ends::End, 0.5 * tol)?;
                Ok(l.add(r))
            }
            Segment::Arc { center, sweep } => {
                let l = arc_integral(f, a, center, 0.5 * sweep, Ends::Start, 0.5 * tol)?;
                let m = center + (a - center) * C64::from_polar(1.0, 0.5 * sweep);
                let r = arc_integral(f, m, center, 0.5 * sweep, Ends::End, 0.5 * tol)?;
                Ok(l.add(r))
            }
        }
    } else if first {
        piece(f, c, k, Ends::Start, tol)
    } else if last {
        piece(f, c, k, Ends::End, tol)
    } else {
        piece(f, c, k, Ends::None, tol)
    }
}

fn sum_segments<F: FnMut(C64) -> C64>(
    f: &mut F,
    c: &Contour,
    lo: usize,
    hi: usize,
    tol: f64,
) -> Result<QuadratureResult, NumError> {
    // symmetric pairwise sum so that a reversed contour gives the exact negative
    let n = hi - lo;
    match n {
        0 => Ok(QuadratureResult::zero()),
        1 => segment_with_ends(f, c, lo, tol),
        _ => {
            let h = n / 2;
            let left = sum_segments(f, c, lo, lo + h, tol)?;
            let right = sum_segments(f, c, hi - h, hi, tol)?;
            let outer = left.add(right);
            if n % 2 == 1 {
                Ok(outer.add(sum_segments(f, c, lo + h, lo + h + 1, tol)?))
            } else {
                Ok(outer)
            }
        }
    }
}

/// Integrates `f` along `c` to absolute tolerance `tol`.
///
/// The first and last segments use the substitution `t = end + d w^2`, so an
/// inverse-square-root singularity at either end of the contour is harmless.
pub fn integrate_contour<F: FnMut(C64) -> C64>(
    mut f: F,
    c: &Contour,
    tol: f64,
) -> Result<QuadratureResult, NumError> {
    c.validate()?;
    if !(tol > 0.0) {
        return Err(NumError::InvalidContour("tolerance must be positive"));
    }
    let n = c.segments.len();
    sum_segments(&mut f, c, 0, n, tol / n as f64)
}

/// Roots of a cubic together with multiplicity flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub roots: [C64; 3],
    /// Multiplicity of the cluster each root belongs to (1, 2 or 3).
    pub multiplicity: [u8; 3],
}

fn cbrt_c(z: C64) -> C64 {
    if z == C64::new(0.0, 0.0) {
        return z;
    }
    C64::from_polar(z.norm().cbrt(), z.arg() / 3.0)
}

fn horner(c: &[C64; 4], t: C64) -> (C64, C64, C64) {
    let p = ((c[0] * t + c[1]) * t + c[2]) * t + c[3];
    let dp = (c[0] * 3.0 * t + c[1] * 2.0) * t + c[2];
    let ddp = c[0] * 6.0 * t + c[1] * 2.0;
    (p, dp, ddp)
}

/// Roots of `c[0] t^3 + c[1] t^2 + c[2] t + c[3]`.
///
/// Cardano's formula followed by Newton polishing. Roots closer than
/// `sqrt(tol)` (relative to the root scale) are flagged as a multiple root and
/// replaced by the refined root of the derivative.
pub fn solve_cubic(coeffs: [C64; 4], tol: f64) -> Result<CubicRoots, NumError> {
    solve_cubic_with_threshold(coeffs, tol.sqrt())
}

/// [`solve_cubic`] with an explicit double-root separation threshold.
pub fn solve_cubic_with_threshold(
    coeffs: [C64; 4],
    threshold: f64,
) -> Result<CubicRoots, NumError> {
    let a = coeffs[0];
    if a.norm() == 0.0 || !a.norm().is_finite() {
        return Err(NumError::DegenerateLeadingCoefficient);
    }
    let m = [C64::new(1.0, 0.0), coeffs[1] / a, coeffs[2] / a, coeffs[3] / a];
    let (b, c, d) = (m[1], m[2], m[3]);
    let d0 = b * b - c * 3.0;
    let d1 = b * b * b * 2.0 - b * c * 9.0 + d * 27.0;
    let disc = (d1 * d1 - d0 * d0 * d0 * 4.0).sqrt();
    let big = if (d1 + disc).norm() >= (d1 - disc).norm() {
        d1 + disc
    } else {
        d1 - disc
    };
    let cc = cbrt_c(big * 0.5);
    let mut roots = [C64::new(0.0, 0.0); 3];
    let mut rot = C64::new(1.0, 0.0);
    for r in roots.iter_mut() {
        let ck = cc * rot;
        *r = if ck.norm() == 0.0 {
            -b / 3.0
        } else {
            -(b + ck + d0 / ck) / 3.0
        };
        rot *= ZETA;
    }
    for r in roots.iter_mut() {
        for _ in 0..6 {
            let (p, dp, _) = horner(&m, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *r - p / dp;
            if horner(&m, next).0.norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }
    let scale = roots.iter().fold(1.0f64, |s, r| s.max(r.norm()));
    let close = |i: usize, j: usize, r: &[C64; 3]| (r[i] - r[j]).norm() < threshold * scale;
    let mut mult = [1u8; 3];
    if close(0, 1, &roots) && close(1, 2, &roots) && close(0, 2, &roots) {
        let t = -b / 3.0;
        roots = [t, t, t];
        mult = [3, 3, 3];
    } else {
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if close(i, j, &roots) && mult[i] == 1 && mult[j] == 1 {
                let mut t = (roots[i] + roots[j]) * 0.5;
                for _ in 0..6 {
                    let (_, dp, ddp) = horner(&m, t);
                    if ddp.norm() == 0.0 {
                        break;
                    }
                    let next = t - dp / ddp;
                    if horner(&m, next).1.norm() < dp.norm() {
                        t = next;
                    } else {
                        break;
                    }
                }
                roots[i] = t;
                roots[j] = t;
                mult[i] = 2;
                mult[j] = 2;
            }
        }
    }
    Ok(CubicRoots {
        roots,
        multiplicity: mult,
    })
}

/// Result of [`find_root_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root1d {
    pub x: f64,
    pub g: f64,
    pub steps: u32,
}

/// Bisection on `[lo, hi]`; stops once `|g(x)| <= tol` or the bracket is narrower than `tol`.
pub fn find_root_1d<G: FnMut(f64) -> f64>(
    mut g: G,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Root1d, NumError> {
    let (mut lo, mut hi) = (lo, hi);
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo == 0.0 {
        return Ok(Root1d { x: lo, g: 0.0, steps: 0 });
    }
    if ghi == 0.0 {
        return Ok(Root1d { x: hi, g: 0.0, steps: 0 });
    }
    if !(glo.signum() != ghi.signum()) || glo.is_nan() || ghi.is_nan() {
        return Err(NumError::NoSignChange { lo, hi });
    }
    let mut steps = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        steps += 1;
        if gm.abs() <= tol || (hi - lo).abs() <= tol || steps >= 200 {
            return Ok(Root1d { x: mid, g: gm, steps });
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
}

/// `sqrt` with the argument taken in `[cut, cut + 2 pi)`.
///
/// With `cut = 0` this is the convention `sqrt(z) = exp(log(z) / 2)`, `arg z in [0, 2 pi)`,
/// which has non-negative imaginary part.
pub fn branch_sqrt(z: C64, cut: f64) -> C64 {
    let mut th = z.arg();
    while th < cut {
        th += TAU;
    }
    while th >= cut + TAU {
        th -= TAU;
    }
    C64::from_polar(z.norm().sqrt(), 0.5 * th)
}

/// Continuous square root along a sequence of radicand values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchTracker {
    pub current_sheet: i8,
    pub last_point: Option<C64>,
    pub base_cut_angle: f64,
}

impl BranchTracker {
    pub fn new(base_cut_angle: f64) -> Self {
        BranchTracker {
            current_sheet: 1,
            last_point: None,
            base_cut_angle: base_cut_angle - TAU * (base_cut_angle / TAU).floor(),
        }
    }

    /// Tracker whose first value will be `sheet * branch_sqrt(z, cut)`.
    pub fn with_sheet(base_cut_angle: f64, sheet: i8) -> Self {
        BranchTracker {
            current_sheet: if sheet < 0 { -1 } else { 1 },
            ..BranchTracker::new(base_cut_angle)
        }
    }

    /// Square root of `z` continuing the previous value; the sheet flips when
    /// the radicand crosses the cut ray between consecutive calls.
    pub fn update(&mut self, z: C64) -> C64 {
        if let Some(prev) = self.last_point {
            if prev.norm() > 0.0 && z.norm() > 0.0 {
                let unwrap = |t: f64| {
                    let mut t = t;
                    while t < self.base_cut_angle {
                        t += TAU;
                    }
                    while t >= self.base_cut_angle + TAU {
                        t -= TAU;
                    }
                    t
                };
                let raw = unwrap(z.arg()) - unwrap(prev.arg());
                let true_step = (z / prev).arg();
                if (raw - true_step).abs() > PI {
                    self.current_sheet = -self.current_sheet;
                }
            }
        }
        self.last_point = Some(z);
        branch_sqrt(z, self.base_cut_angle) * f64::from(self.current_sheet)
    }
}

#[derive(Debug, Clone, Copy)]
struct SqrtSample {
    t: f64,
    r: C64,
    sq: C64,
}

/// A square root of `radicand` continued along a contour.
///
/// Evaluation uses `sqrt_k * sqrt(R(z) / R_k)` from the nearest sample below,
/// with samples dense enough that the principal root of the ratio never wraps.
#[derive(Debug, Clone)]
pub struct TrackedSqrt<F> {
    radicand: F,
    contour: Contour,
    samples: Vec<SqrtSample>,
}

const TRACK_ARG: f64 = 0.3;

/// Continues `initial` (a square root of `radicand(start)`) along `path`.
pub fn track_sqrt<F: Fn(C64) -> C64>(
    radicand: F,
    path: &Contour,
    initial: C64,
) -> Result<TrackedSqrt<F>, NumError> {
    path.validate()?;
    let r0 = radicand(path.start());
    if r0.norm() == 0.0 {
        return Err(NumError::RadicandVanishesOnPath { at: path.start() });
    }
    let scale = r0.norm();
    if (initial * initial - r0).norm() > 1e-8 * scale {
        return Err(NumError::InvalidContour("initial value does not square to the radicand"));
    }
    let nseg = path.segments().len();
    let mut samples = alloc::vec![SqrtSample { t: 0.0, r: r0, sq: initial }];
    for k in 0..nseg {
        let last_seg = k + 1 == nseg;
        let mut stack: Vec<(f64, f64, u32)> = alloc::vec![(0.0, 1.0, 0)];
        while let Some((a, b, depth)) = stack.pop() {
            let prev = *samples.last().unwrap();
            let zb = path.point(k, b);
            let rb = radicand(zb);
            let at_end = last_seg && b == 1.0;
            let end_zero = at_end && rb.norm() <= 1e-13 * scale;
            let probe = if end_zero {
                radicand(path.point(k, b - 1e-9 * (b - a)))
            } else {
                rb
            };
            let rm = radicand(path.point(k, 0.5 * (a + b)));
            let ok = probe.norm() > 0.0
                && rm.norm() > 0.0
                && (probe / prev.r).arg().abs() <= TRACK_ARG
                && (rm / prev.r).arg().abs() <= TRACK_ARG;
            if ok || (end_zero && depth > 40) {
                let sq = if end_zero {
                    C64::new(0.0, 0.0)
                } else {
                    prev.sq * (rb / prev.r).sqrt()
                };
                samples.push(SqrtSample { t: k as f64 + b, r: rb, sq });
            } else {
                if depth > 48 || rb.norm() == 0.0 || rm.norm() == 0.0 {
                    return Err(NumError::RadicandVanishesOnPath {
                        at: path.point(k, 0.5 * (a + b)),
                    });
                }
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
    }
    Ok(TrackedSqrt {
        radicand,
        contour: path.clone(),
        samples,
    })
}

impl<F: Fn(C64) -> C64> TrackedSqrt<F> {
    /// Value at global parameter `t` in `[0, number of segments]`.
    pub fn eval(&self, t: f64) -> C64 {
        let n = self.contour.segments().len();
        let t = t.clamp(0.0, n as f64);
        let k = self.samples.partition_point(|s| s.t <= t).saturating_sub(1);
        let s = self.samples[k];
        if t == s.t {
            return s.sq;
        }
        let seg = (t.floor() as usize).min(n - 1);
        let z = self.contour.point(seg, t - seg as f64);
        let r = (self.radicand)(z);
        if s.r.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        s.sq * (r / s.r).sqrt()
    }

    /// Point of the contour at global parameter `t`.
    pub fn point(&self, t: f64) -> C64 {
        let n = self.contour.segments().len();
        let t = t.clamp(0.0, n as f64);
        let seg = (t.floor() as usize).min(n - 1);
        self.contour.point(seg, t - seg as f64)
    }

    pub fn end_value(&self) -> C64 {
        self.samples[self.samples.len() - 1].sq
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    /// Continued value for a point `z` that lies on segment `seg` at local parameter `s`.
    pub fn eval_on(&self, seg: usize, s: f64) -> C64 {
        self.eval(seg as f64 + s)
    }
}
