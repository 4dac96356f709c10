//! Cycle periods, thimble integrals and numeric monodromy.
//!
//! The period of `V_j` over `q` is `2 * integral of i dt1 / (t1 sqrt(R))` along a
//! contour joining the two branch points of the cycle. The thimble integral
//! `G_j(q)` is the integral of that period along a base path from `3 zeta^j`.
//! Everything is anchored at the reference fiber over `q = 0`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::fibration::{branch_points, critical_values, radicand};
use crate::homology::{Basis, HomologyClass, HomologyError, MonodromyMatrix};
use crate::numkernel::{gk_error, integrate_interval, track_sqrt, Contour, NumError, Segment, TrackedSqrt, WG, WGK, XGK};
use crate::transport::{FiberState, TransportFailure};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PeriodError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("path comes within {clearance} of the critical value {lambda} near {q}")]
    NearCriticalValue { q: C64, lambda: C64, clearance: f64 },
    #[error("path leaves the domain of thimble {j} at {at}")]
    OutsideDomain { j: usize, at: C64 },
    #[error("transport of the cycles stalled at q = {at}")]
    TransportFailed { at: C64 },
    #[error("lattice recognition failed: uncertainty {uncertainty:e}")]
    LatticeRecognitionFailed { uncertainty: f64, raw: [[f64; 2]; 2] },
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error("sign condition violated: {what} at t1 = {at}")]
    SignConditionViolated { what: &'static str, at: C64 },
    #[error("deformed and direct contour integrals differ by {relative:e} (relative)")]
    ContourMismatch { relative: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

impl From<TransportFailure> for PeriodError {
    fn from(f: TransportFailure) -> Self {
        PeriodError::TransportFailed { at: f.at }
    }
}

/// Tolerances shared by the continuation routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodConfig {
    /// Absolute tolerance on integrals along base paths.
    pub tol: f64,
    /// Minimal distance of base paths to the critical values.
    pub clearance: f64,
}

impl Default for PeriodConfig {
    fn default() -> Self {
        PeriodConfig {
            tol: 1e-9,
            clearance: 1e-3,
        }
    }
}

impl PeriodConfig {
    fn check(&self) -> Result<(), PeriodError> {
        if !(self.tol > 0.0) || !(self.clearance > 0.0) {
            return Err(PeriodError::InvalidInput("tolerance and clearance must be positive"));
        }
        Ok(())
    }
}

/// Piecewise-linear path in the `q`-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePath {
    nodes: Vec<C64>,
}

impl BasePath {
    pub fn new(nodes: Vec<C64>) -> Result<Self, PeriodError> {
        if nodes.is_empty() {
            return Err(PeriodError::InvalidInput("empty base path"));
        }
        if nodes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(PeriodError::InvalidInput("non-finite base path node"));
        }
        let mut out: Vec<C64> = Vec::with_capacity(nodes.len());
        for z in nodes {
            if out.last() != Some(&z) {
                out.push(z);
            }
        }
        Ok(BasePath { nodes: out })
    }

    /// The segment from `0` to `q`.
    pub fn radial(q: C64) -> Self {
        BasePath {
            nodes: if q == C64::new(0.0, 0.0) {
                vec![q]
            } else {
                vec![C64::new(0.0, 0.0), q]
            },
        }
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn start(&self) -> C64 {
        self.nodes[0]
    }

    pub fn end(&self) -> C64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.nodes.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Rotated copy `zeta^k * path`.
    pub fn rotated(&self, k: u32) -> Self {
        let r = crate::numkernel::ZETA.powu(k % 3);
        BasePath {
            nodes: self.nodes.iter().map(|z| z * r).collect(),
        }
    }
}

pub(crate) fn segment_distance(a: C64, b: C64, p: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (a + d * s - p).norm()
}

/// First point where the segment meets the ray `{r u : r >= 3}`, if any.
pub(crate) fn ray_hit(a: C64, b: C64, u: C64) -> Option<C64> {
    let (a1, b1) = (a * u.conj(), b * u.conj());
    if a1.im == 0.0 && a1.re >= 3.0 {
        return Some(a);
    }
    if (a1.im > 0.0 && b1.im > 0.0) || (a1.im < 0.0 && b1.im < 0.0) {
        return None;
    }
    if a1.im == b1.im {
        // segment on the line of the ray
        return if a1.re.max(b1.re) >= 3.0 { Some(a) } else { None };
    }
    let s = a1.im / (a1.im - b1.im);
    let x = a1.re + (b1.re - a1.re) * s;
    if x >= 3.0 {
        Some(a + (b - a) * s)
    } else {
        None
    }
}

fn check_clearance(a: C64, b: C64, skip: Option<usize>, clearance: f64) -> Result<(), PeriodError> {
    for (k, lam) in critical_values().iter().enumerate() {
        if Some(k) == skip {
            continue;
        }
        if segment_distance(a, b, *lam) <= clearance {
            return Err(PeriodError::NearCriticalValue {
                q: if (a - lam).norm() < (b - lam).norm() { a } else { b },
                lambda: *lam,
                clearance,
            });
        }
    }
    Ok(())
}

fn check_domain(j: usize, a: C64, b: C64) -> Result<(), PeriodError> {
    for k in 0..3 {
        if k == j {
            continue;
        }
        if let Some(at) = ray_hit(a, b, crate::numkernel::ZETA.powu(k as u32)) {
            return Err(PeriodError::OutsideDomain { j, at });
        }
    }
    Ok(())
}

/// Parametrization of one leg of a base path by `s` in `[0, 1]`.
#[derive(Debug, Clone, Copy)]
enum Leg {
    Line { a: C64, b: C64 },
    /// `q = lam + (p - lam) (1 - s)^2`, ending at the critical value `lam`.
    Into { p: C64, lam: C64 },
}

impl Leg {
    fn q(&self, s: f64) -> C64 {
        match *self {
            Leg::Line { a, b } => a + (b - a) * s,
            Leg::Into { p, lam } => lam + (p - lam) * ((1.0 - s) * (1.0 - s)),
        }
    }

    fn dq(&self, s: f64) -> C64 {
        match *self {
            Leg::Line { a, b } => b - a,
            Leg::Into { p, lam } => (p - lam) * (-2.0 * (1.0 - s)),
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Leg::Line { a, b } => (b - a).norm(),
            Leg::Into { p, lam } => (p - lam).norm(),
        }
    }
}

struct LegResult {
    values: Vec<C64>,
    error: f64,
    evals: usize,
}

const MAX_PANEL_DEPTH: u32 = 30;

/// Adaptive Gauss–Kronrod integration of the carried periods along a leg.
///
/// The fiber state is transported through the Kronrod nodes in increasing order,
/// so a panel costs 21 transports and 21 period evaluations.
struct Marcher {
    leg: Leg,
    tol_density: f64,
    period_tol: f64,
    evals: usize,
    failed: bool,
}

impl Marcher {
    fn panel(
        &mut self,
        state: &FiberState,
        s0: f64,
        s1: f64,
        depth: u32,
        need_end: bool,
    ) -> Result<(Vec<C64>, f64, Option<FiberState>), PeriodError> {
        let mid = 0.5 * (s0 + s1);
        let half = 0.5 * (s1 - s0);
        let mut ss = [0.0f64; 21];
        for j in 0..10 {
            ss[j] = mid - half * XGK[j];
            ss[20 - j] = mid + half * XGK[j];
        }
        ss[10] = mid;
        let m = state.cycles.len();
        let mut f = vec![vec![C64::new(0.0, 0.0); m]; 21];
        let mut ferr = [0.0f64; 21];
        let mut walk = state.clone();
        for (k, &s) in ss.iter().enumerate() {
            walk.advance_to(self.leg.q(s))?;
            let dq = self.leg.dq(s);
            let ps = walk.periods(self.period_tol)?;
            for (c, p) in ps.iter().enumerate() {
                f[k][c] = p.value * dq;
                ferr[k] += p.abs_error_estimate * dq.norm();
                self.evals += p.n_evaluations;
            }
        }
        let weight = |k: usize| if k <= 10 { WGK[k] } else { WGK[20 - k] };
        let gauss = |k: usize| {
            // Gauss nodes sit at odd Kronrod indices on either side
            let j = if k <= 10 { k } else { 20 - k };
            if j % 2 == 1 && j < 10 {
                WG[j / 2]
            } else {
                0.0
            }
        };
        let mut values = vec![C64::new(0.0, 0.0); m];
        let mut err = 0.0f64;
        let mut floor = 0.0f64;
        for c in 0..m {
            let mut resk = C64::new(0.0, 0.0);
            let mut resg = C64::new(0.0, 0.0);
            let mut resabs = 0.0;
            for k in 0..21 {
                resk += f[k][c] * weight(k);
                resg += f[k][c] * gauss(k);
                resabs += f[k][c].norm() * weight(k);
            }
            let mean = resk * 0.5;
            let resasc: f64 = (0..21).map(|k| weight(k) * (f[k][c] - mean).norm()).sum();
            values[c] = resk * half;
            let e = gk_error(((resk - resg) * half).norm(), resabs * half, resasc * half);
            err = err.max(e);
            floor = floor.max(100.0 * f64::EPSILON * resabs * half);
        }
        let tquad: f64 = (0..21).map(|k| weight(k) * ferr[k]).sum::<f64>() * half;
        let local = (self.tol_density * (s1 - s0)).max(floor);
        if err <= local || depth >= MAX_PANEL_DEPTH {
            if err > local {
                self.failed = true;
            }
            let end = if need_end {
                walk.advance_to(self.leg.q(s1))?;
                Some(walk)
            } else {
                None
            };
            return Ok((values, err + tquad, end));
        }
        let (lv, le, ls) = self.panel(state, s0, mid, depth + 1, true)?;
        let ls = ls.expect("left panel returns its end state");
        let (rv, re, rs) = self.panel(&ls, mid, s1, depth + 1, need_end)?;
        let values = lv.iter().zip(&rv).map(|(a, b)| a + b).collect();
        Ok((values, le + re, rs))
    }
}

/// Integrates the periods carried by `state` along `leg`; `state` is moved to
/// the end of the leg when `need_end` is set.
fn march(state: &mut FiberState, leg: Leg, tol: f64, need_end: bool) -> Result<LegResult, PeriodError> {
    let len = leg.length();
    let mut m = Marcher {
        leg,
        tol_density: tol,
        period_tol: (0.01 * tol / (1.0 + len)).max(1e-13),
        evals: 0,
        failed: false,
    };
    let (values, error, end) = m.panel(state, 0.0, 1.0, 0, need_end)?;
    if m.failed {
        return Err(PeriodError::Num(NumError::NonConvergence {
            partial: values.first().copied().unwrap_or_default(),
            error_estimate: error,
        }));
    }
    if let Some(s) = end {
        *state = s;
    }
    Ok(LegResult {
        values,
        error,
        evals: m.evals,
    })
}

/// Period of a cycle over `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclePeriod {
    pub q: C64,
    pub cycle: HomologyClass,
    pub value: C64,
    pub error: f64,
}

fn transport_along(which: &[usize], path: &BasePath, clearance: f64) -> Result<FiberState, PeriodError> {
    if path.start() != C64::new(0.0, 0.0) {
        return Err(PeriodError::InvalidInput("continuation paths start at q = 0"));
    }
    let mut state = FiberState::reference(which);
    for w in path.nodes().windows(2) {
        check_clearance(w[0], w[1], None, clearance)?;
        state.advance_to(w[1])?;
    }
    Ok(state)
}

/// Period of `V_j` over the end point of `path`, continued along `path` from `0`.
pub fn cycle_period(j: usize, path: &BasePath, cfg: &PeriodConfig) -> Result<CyclePeriod, PeriodError> {
    cfg.check()?;
    if j > 2 {
        return Err(PeriodError::InvalidInput("cycle index must be 0, 1 or 2"));
    }
    let state = transport_along(&[j], path, cfg.clearance)?;
    let p = state.periods(cfg.tol)?;
    Ok(CyclePeriod {
        q: path.end(),
        cycle: crate::homology::vanishing_cycle(j, Basis::CD),
        value: p[0].value,
        error: p[0].abs_error_estimate,
    })
}

/// Periods of `c` and of `d` over `q` from the periods of `V0` and `V1`.
pub fn cd_from_vanishing(p0: C64, p1: C64) -> [C64; 2] {
    [(p0 + p1 * 2.0) / 3.0, (p1 - p0) / 3.0]
}

/// Period of an arbitrary class, continued along `path` from `0`.
pub fn class_period(class: HomologyClass, path: &BasePath, cfg: &PeriodConfig) -> Result<CyclePeriod, PeriodError> {
    cfg.check()?;
    let state = transport_along(&[0, 1], path, cfg.clearance)?;
    let p = state.periods(cfg.tol)?;
    let [pc, pd] = cd_from_vanishing(p[0].value, p[1].value);
    let cd = class.to_basis(Basis::CD);
    let k = (cd.p.abs() + cd.q.abs()) as f64;
    Ok(CyclePeriod {
        q: path.end(),
        cycle: class,
        value: pc * cd.p as f64 + pd * cd.q as f64,
        error: k * (p[0].abs_error_estimate + p[1].abs_error_estimate),
    })
}

/// `(integral of period(c) dq, integral of period(d) dq)` along `path` from `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderIntegrals {
    pub q: C64,
    pub c: C64,
    pub d: C64,
    pub error: f64,
    pub n_evaluations: usize,
}

pub fn cylinder_integrals(path: &BasePath, cfg: &PeriodConfig) -> Result<CylinderIntegrals, PeriodError> {
    cfg.check()?;
    if path.start() != C64::new(0.0, 0.0) {
        return Err(PeriodError::InvalidInput("continuation paths start at q = 0"));
    }
    let legs = path.nodes().len().saturating_sub(1);
    let sub = PeriodConfig {
        tol: cfg.tol / (legs.max(1) as f64),
        ..*cfg
    };
    let mut w = CylinderWalker::new(&sub)?;
    for z in &path.nodes()[1..] {
        w.advance(*z)?;
    }
    let [c, d] = w.values();
    Ok(CylinderIntegrals {
        q: path.end(),
        c,
        d,
        error: w.error,
        n_evaluations: w.evals,
    })
}

/// Running cylinder integrals of `c` and `d` along a polygonal path from `0`.
#[derive(Debug, Clone)]
pub struct CylinderWalker {
    state: FiberState,
    v: [C64; 2],
    error: f64,
    evals: usize,
    cfg: PeriodConfig,
}

impl CylinderWalker {
    pub fn new(cfg: &PeriodConfig) -> Result<Self, PeriodError> {
        cfg.check()?;
        Ok(CylinderWalker {
            state: FiberState::reference(&[0, 1]),
            v: [C64::new(0.0, 0.0); 2],
            error: 0.0,
            evals: 0,
            cfg: *cfg,
        })
    }

    pub fn q(&self) -> C64 {
        self.state.q
    }

    /// Integrals of the periods of `c` and `d` so far.
    pub fn values(&self) -> [C64; 2] {
        cd_from_vanishing(self.v[0], self.v[1])
    }

    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn n_evaluations(&self) -> usize {
        self.evals
    }

    /// Periods of `c` and `d` over the current point.
    pub fn periods(&self) -> Result<[C64; 2], PeriodError> {
        let p = self.state.periods(0.01 * self.cfg.tol)?;
        Ok(cd_from_vanishing(p[0].value, p[1].value))
    }

    pub fn advance(&mut self, to: C64) -> Result<(), PeriodError> {
        let from = self.state.q;
        if to == from {
            return Ok(());
        }
        check_clearance(from, to, None, self.cfg.clearance)?;
        let r = march(&mut self.state, Leg::Line { a: from, b: to }, 0.5 * self.cfg.tol, true)?;
        self.v[0] += r.values[0];
        self.v[1] += r.values[1];
        self.error += r.error;
        self.evals += r.evals;
        Ok(())
    }
}

/// `G_j` at the end of a base path starting at `3 zeta^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThimbleIntegral {
    pub j: usize,
    pub path: BasePath,
    pub value: C64,
    pub error: f64,
    pub n_evaluations: usize,
}

/// `[lambda_j, 0, q]`, or `[lambda_j, q]` when `q` lies on the segment from `0` to `lambda_j`.
pub fn default_thimble_path(j: usize, q: C64) -> BasePath {
    let lam = critical_values()[j % 3];
    let u = q / lam;
    let nodes = if q == lam {
        vec![lam]
    } else if u.im == 0.0 && u.re >= 0.0 && u.re < 1.0 || q == C64::new(0.0, 0.0) {
        vec![lam, q]
    } else {
        vec![lam, C64::new(0.0, 0.0), q]
    };
    BasePath { nodes }
}

/// Incremental evaluation of `G_j` along a base path.
#[derive(Debug, Clone)]
pub struct ThimbleWalker {
    j: usize,
    state: FiberState,
    value: C64,
    error: f64,
    evals: usize,
    cfg: PeriodConfig,
}

impl ThimbleWalker {
    /// Starts at `3 zeta^j` heading towards `toward`; the walker then sits a short
    /// distance from the critical value on that segment.
    pub fn start(j: usize, toward: C64, cfg: &PeriodConfig) -> Result<Self, PeriodError> {
        cfg.check()?;
        if j > 2 {
            return Err(PeriodError::InvalidInput("thimble index must be 0, 1 or 2"));
        }
        let lam = critical_values()[j];
        let dist = (toward - lam).norm();
        if dist <= cfg.clearance {
            return Err(PeriodError::NearCriticalValue {
                q: toward,
                lambda: lam,
                clearance: cfg.clearance,
            });
        }
        check_domain(j, lam, toward)?;
        let e = (0.15f64).min(0.5 * dist);
        let dir = (toward - lam) / dist;
        let entry = lam * (1.0 - e / 3.0);
        let mut state = FiberState::reference(&[j]);
        state.advance_to(entry)?;
        // polygonal arc of radius e around lam, the short way round
        let a0 = (entry - lam).arg();
        let mut sweep = dir.arg() - a0;
        if sweep > PI {
            sweep -= TAU;
        } else if sweep < -PI {
            sweep += TAU;
        }
        let pieces = (sweep.abs() / (PI / 16.0)).ceil() as usize;
        for k in 1..=pieces {
            let a = a0 + sweep * k as f64 / pieces as f64;
            state.advance_to(lam + C64::from_polar(e, a))?;
        }
        let p = lam + dir * e;
        state.advance_to(p)?;
        let mut probe = state.clone();
        let tail = march(&mut probe, Leg::Into { p, lam }, 0.25 * cfg.tol, false)?;
        let mut w = ThimbleWalker {
            j,
            state,
            value: -tail.values[0],
            error: tail.error,
            evals: tail.evals,
            cfg: *cfg,
        };
        w.advance(toward)?;
        Ok(w)
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn q(&self) -> C64 {
        self.state.q
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn n_evaluations(&self) -> usize {
        self.evals
    }

    /// Period of `V_j` over the current point, the derivative of `G_j`.
    pub fn period(&self) -> Result<C64, PeriodError> {
        Ok(self.state.periods(0.01 * self.cfg.tol)?[0].value)
    }

    /// Moves along the straight segment to `to`.
    pub fn advance(&mut self, to: C64) -> Result<(), PeriodError> {
        let from = self.state.q;
        if to == from {
            return Ok(());
        }
        check_clearance(from, to, None, self.cfg.clearance)?;
        check_domain(self.j, from, to)?;
        let r = march(&mut self.state, Leg::Line { a: from, b: to }, 0.5 * self.cfg.tol, true)?;
        self.value += r.values[0];
        self.error += r.error;
        self.evals += r.evals;
        Ok(())
    }

    /// Value at `to` reached along a straight segment, leaving the walker in place.
    pub fn probe(&self, to: C64) -> Result<(C64, f64), PeriodError> {
        let mut w = self.clone();
        w.advance(to)?;
        Ok((w.value, w.error))
    }
}

/// `G_j(target)` along `path` (default: [`default_thimble_path`]).
pub fn thimble_integral(
    j: usize,
    target: C64,
    path: Option<&BasePath>,
    cfg: &PeriodConfig,
) -> Result<ThimbleIntegral, PeriodError> {
    cfg.check()?;
    if j > 2 {
        return Err(PeriodError::InvalidInput("thimble index must be 0, 1 or 2"));
    }
    let lam = critical_values()[j];
    let path = match path {
        Some(p) => p.clone(),
        None => default_thimble_path(j, target),
    };
    if (path.start() - lam).norm() > 1e-12 {
        return Err(PeriodError::InvalidInput("thimble paths start at the critical value"));
    }
    if path.end() != target {
        return Err(PeriodError::InvalidInput("thimble path does not end at the target"));
    }
    if path.nodes().len() == 1 {
        return Ok(ThimbleIntegral {
            j,
            path,
            value: C64::new(0.0, 0.0),
            error: 0.0,
            n_evaluations: 0,
        });
    }
    // validate everything before spending time on quadrature
    let nodes = path.nodes();
    for (k, w) in nodes.windows(2).enumerate() {
        check_domain(j, w[0], w[1])?;
        if k == 0 {
            check_clearance(w[0], w[1], Some(j), cfg.clearance)?;
            let back = segment_distance(w[0] + (w[1] - w[0]) * 0.5, w[1], lam);
            if back <= cfg.clearance {
                return Err(PeriodError::NearCriticalValue {
                    q: w[1],
                    lambda: lam,
                    clearance: cfg.clearance,
                });
            }
        } else {
            check_clearance(w[0], w[1], None, cfg.clearance)?;
        }
    }
    let legs = (nodes.len() - 1) as f64;
    let sub = PeriodConfig {
        tol: cfg.tol / legs,
        ..*cfg
    };
    let mut w = ThimbleWalker::start(j, nodes[1], &sub)?;
    for z in &nodes[2..] {
        w.advance(*z)?;
    }
    Ok(ThimbleIntegral {
        j,
        path,
        value: w.value,
        error: w.error,
        n_evaluations: w.evals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Around {
    A,
    B,
    C,
    Infinity,
}

/// Monodromy recovered from continued periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericMonodromy {
    pub around: Around,
    pub matrix: MonodromyMatrix,
    /// Unrounded matrix.
    pub raw: [[f64; 2]; 2],
    /// Bound on the distance of `raw` from the true integer matrix.
    pub uncertainty: f64,
}

/// Base point of the loop and the loop itself (closed polygon through the base point).
fn monodromy_loop(around: Around) -> (C64, Vec<C64>) {
    match around {
        Around::Infinity => {
            let start = C64::from_polar(5.0, -PI / 3.0);
            let n = 256;
            let pts = (1..=n)
                .map(|k| C64::from_polar(5.0, -PI / 3.0 - TAU * k as f64 / n as f64))
                .collect();
            (start, pts)
        }
        _ => {
            let j = match around {
                Around::A => 0,
                Around::B => 1,
                _ => 2,
            };
            let lam = critical_values()[j];
            let u = lam / lam.norm();
            let start = lam - u;
            let n = 128;
            let pts = (1..=n)
                .map(|k| lam - u * C64::from_polar(1.0, TAU * k as f64 / n as f64))
                .collect();
            (start, pts)
        }
    }
}

/// Monodromy on `H1(E0)` in the `{c, d}` basis.
///
/// The loop is a counterclockwise circle of radius 1 about the critical value,
/// joined to `q = 0` radially; for `Infinity` it is the clockwise circle of
/// radius 5 joined along the ray of argument `-pi/3`.
pub fn numeric_monodromy(around: Around, cfg: &PeriodConfig) -> Result<NumericMonodromy, PeriodError> {
    cfg.check()?;
    let (start, lp) = monodromy_loop(around);
    let mut state = FiberState::reference(&[0, 1]);
    state.advance_to(start)?;
    let tol = cfg.tol;
    let before = state.periods(tol)?;
    for z in &lp {
        state.advance_to(*z)?;
    }
    let after = state.periods(tol)?;
    let est = before.iter().chain(&after).map(|p| p.abs_error_estimate).fold(0.0, f64::max);
    let [pc, pd] = cd_from_vanishing(before[0].value, before[1].value);
    let [qc, qd] = cd_from_vanishing(after[0].value, after[1].value);
    // continued period of c is m00 pc + m10 pd, of d is m01 pc + m11 pd
    let a = [[pc.re, pd.re], [pc.im, pd.im]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-300 {
        return Err(PeriodError::InvalidInput("periods of c and d are real-proportional"));
    }
    let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
    let solve = |v: C64| [inv[0][0] * v.re + inv[0][1] * v.im, inv[1][0] * v.re + inv[1][1] * v.im];
    let col0 = solve(qc);
    let col1 = solve(qd);
    let raw = [[col0[0], col1[0]], [col0[1], col1[1]]];
    let norm_inv = inv.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let mut unc = 0.0f64;
    let mut rounded = [[0i64; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            rounded[i][k] = raw[i][k].round() as i64;
        }
    }
    for col in 0..2 {
        let xnorm = (raw[0][col] * raw[0][col] + raw[1][col] * raw[1][col]).sqrt();
        let residual = (0..2).map(|i| (raw[i][col] - rounded[i][col] as f64).abs()).fold(0.0, f64::max);
        let propagated = norm_inv * tol.max(est) * (1.0 + xnorm) * 2f64.sqrt();
        unc = unc.max(residual + propagated);
    }
    if unc >= 1e-6 {
        return Err(PeriodError::LatticeRecognitionFailed { uncertainty: unc, raw });
    }
    let matrix = MonodromyMatrix::new(rounded)?;
    Ok(NumericMonodromy {
        around,
        matrix,
        raw,
        uncertainty: unc,
    })
}

fn contour_derivative(seg: &Segment, z: C64, a: C64, b: C64) -> C64 {
    match *seg {
        Segment::Line => b - a,
        Segment::Arc { center, sweep } => C64::new(0.0, 1.0) * (z - center) * sweep,
    }
}

/// `integral of i dt / (t sqrt(R))` along a tracked contour whose last node is a root of `R`.
fn half_integral<F: Fn(C64) -> C64>(tr: &TrackedSqrt<F>, tol: f64) -> Result<C64, PeriodError> {
    let c = tr.contour();
    let n = c.segments().len();
    let i = C64::new(0.0, 1.0);
    let mut total = C64::new(0.0, 0.0);
    for k in 0..n {
        let (a, b) = (c.nodes()[k], c.nodes()[k + 1]);
        let seg = c.segments()[k];
        let r = if k + 1 == n {
            integrate_interval(
                |w| {
                    let s = 1.0 - w * w;
                    let z = c.point(k, s);
                    i * contour_derivative(&seg, z, a, b) * (2.0 * w) / (z * tr.eval_on(k, s))
                },
                0.0,
                1.0,
                tol / n as f64,
            )?
        } else {
            integrate_interval(
                |s| {
                    let z = c.point(k, s);
                    i * contour_derivative(&seg, z, a, b) / (z * tr.eval_on(k, s))
                },
                0.0,
                1.0,
                tol / n as f64,
            )?
        };
        total += r.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformationKind {
    /// A circular arc about `0` through `|x|`.
    Arc,
    /// Quarter arc, a segment of the imaginary axis, and an arc of radius `|x|`.
    Segments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub q: f64,
    pub kind: DeformationKind,
    pub x: C64,
    pub y: f64,
    /// `2 * integral` over the straight contour `x -> y/2 -> conj x`.
    pub direct: C64,
    pub deformed: C64,
    pub relative_difference: f64,
    pub arc_samples: usize,
    pub min_im_on_arcs: f64,
    pub segment_samples: usize,
    pub min_re_on_segment: Option<f64>,
    /// `|second half - conj(first half)|` on the deformed contour.
    pub mirror_defect: f64,
}

const SIGN_SAMPLES: usize = 240;

/// Builds the deformed contour for real `q < 3`, checks the sign conditions on
/// the continued root, and compares with the straight contour.
pub fn verify_appendix_contours(q: f64, tol: f64) -> Result<AppendixReport, PeriodError> {
    if !(q < 3.0) || q == 0.0 || !q.is_finite() {
        return Err(PeriodError::InvalidInput("appendix contours need real q < 3, q != 0"));
    }
    let qc = C64::new(q, 0.0);
    let bd = branch_points(qc).map_err(|_| PeriodError::InvalidInput("branch points"))?;
    let (x, _) = bd.conjugate_pair.ok_or(PeriodError::InvalidInput("no conjugate pair"))?;
    let y = bd.real_root.ok_or(PeriodError::InvalidInput("no real root"))?;
    let rad = move |t: C64| radicand(qc, t);
    let start_root = |t: C64| C64::new(0.0, (-rad(t).re).sqrt());
    let m = C64::new(0.5 * y, 0.0);
    let d1 = Contour::polyline(&[m, x])?;
    let d2 = Contour::polyline(&[m, x.conj()])?;
    let h1 = half_integral(&track_sqrt(rad, &d1, start_root(m))?, tol)?;
    let h2 = half_integral(&track_sqrt(rad, &d2, start_root(m))?, tol)?;
    let direct = (h2 - h1) * 2.0;
    let r = x.norm();
    let theta = x.arg();
    let (kind, first, second, arcs): (_, Contour, Contour, &[usize]) = if q > 0.0 {
        let s = C64::new(r, 0.0);
        (
            DeformationKind::Arc,
            Contour::new(s).arc_to(C64::new(0.0, 0.0), theta),
            Contour::new(s).arc_to(C64::new(0.0, 0.0), -theta),
            &[0],
        )
    } else {
        let e = 0.5 * y;
        let s = C64::new(e, 0.0);
        (
            DeformationKind::Segments,
            Contour::new(s)
                .arc_to(C64::new(0.0, 0.0), FRAC_PI_2)
                .line_to(C64::new(0.0, r))
                .arc_to(C64::new(0.0, 0.0), theta - FRAC_PI_2),
            Contour::new(s)
                .arc_to(C64::new(0.0, 0.0), -FRAC_PI_2)
                .line_to(C64::new(0.0, -r))
                .arc_to(C64::new(0.0, 0.0), FRAC_PI_2 - theta),
            &[0, 2],
        )
    };
    let s0 = first.start();
    let t1 = track_sqrt(rad, &first, start_root(s0))?;
    let t2 = track_sqrt(rad, &second, start_root(s0))?;
    let mut min_im = f64::INFINITY;
    let mut min_re: Option<f64> = None;
    let mut arc_samples = 0;
    let mut seg_samples = 0;
    // the segment condition is stated for t1 = i r, r > 0; the lower half is its mirror
    for (upper, tr) in [(true, &t1), (false, &t2)] {
        let nseg = tr.contour().segments().len();
        for k in 0..nseg {
            let on_arc = arcs.contains(&k);
            for i in 0..SIGN_SAMPLES {
                // stay off the terminal root where the root vanishes
                let s = (i as f64 + 0.5) / SIGN_SAMPLES as f64;
                let v = tr.eval_on(k, s);
                let z = tr.contour().point(k, s);
                if on_arc {
                    arc_samples += 1;
                    let rel = v.im / v.norm();
                    min_im = min_im.min(rel);
                    if v.im < -1e-12 * v.norm() {
                        return Err(PeriodError::SignConditionViolated {
                            what: "Im sqrt(R) >= 0 on an arc",
                            at: z,
                        });
                    }
                } else if upper {
                    seg_samples += 1;
                    let rel = v.re / v.norm();
                    min_re = Some(min_re.map_or(rel, |m: f64| m.min(rel)));
                    if !(v.re > 0.0) {
                        return Err(PeriodError::SignConditionViolated {
                            what: "Re sqrt(R) > 0 on the imaginary axis",
                            at: z,
                        });
                    }
                }
            }
        }
    }
    let a1 = half_integral(&t1, tol)?;
    let a2 = half_integral(&t2, tol)?;
    let deformed = (a2 - a1) * 2.0;
    let relative_difference = (deformed - direct).norm() / direct.norm();
    let mirror_defect = (a2 - a1.conj()).norm();
    let report = AppendixReport {
        q,
        kind,
        x,
        y,
        direct,
        deformed,
        relative_difference,
        arc_samples,
        min_im_on_arcs: min_im,
        segment_samples: seg_samples,
        min_re_on_segment: min_re,
        mirror_defect,
    };
    if relative_difference > 1e-8 {
        return Err(PeriodError::ContourMismatch {
            relative: relative_difference,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub q: Vec<f64>,
    pub im_g: Vec<f64>,
    pub re_g: Vec<f64>,
    /// `Im G` strictly increases along the (decreasing) samples.
    pub increasing: bool,
    /// Least-squares slope of `Im G` against `ln |q|`.
    pub log_slope: f64,
    /// Slopes against `ln |q|` between consecutive samples.
    pub window_slopes: Vec<f64>,
    /// Slope of `ln Im G` against `ln |q|` over the last two samples.
    pub power_exponent: f64,
}

/// `Im G_0` along negative, decreasing samples.
pub fn growth_at_minus_infinity(samples: &[f64], cfg: &PeriodConfig) -> Result<GrowthReport, PeriodError> {
    if samples.len() < 2 {
        return Err(PeriodError::InvalidInput("need at least two samples"));
    }
    if samples.iter().any(|&q| !(q < 0.0)) || samples.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(PeriodError::InvalidInput("samples must be negative and decreasing"));
    }
    let mut w = ThimbleWalker::start(0, C64::new(0.0, 0.0), cfg)?;
    let mut im = Vec::with_capacity(samples.len());
    let mut re = Vec::with_capacity(samples.len());
    for &q in samples {
        w.advance(C64::new(q, 0.0))?;
        im.push(w.value().im);
        re.push(w.value().re);
    }
    let increasing = im.windows(2).all(|p| p[1] > p[0]);
    let lx: Vec<f64> = samples.iter().map(|q| q.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = im.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&im).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let window_slopes = (1..im.len()).map(|k| (im[k] - im[k - 1]) / (lx[k] - lx[k - 1])).collect();
    let k = im.len() - 1;
    let power_exponent = if im[k] > 0.0 && im[k - 1] > 0.0 {
        (im[k].ln() - im[k - 1].ln()) / (lx[k] - lx[k - 1])
    } else {
        f64::NAN
    };
    Ok(GrowthReport {
        q: samples.to_vec(),
        im_g: im,
        re_g: re,
        increasing,
        log_slope: sxy / sxx,
        window_slopes,
        power_exponent,
    })
}
