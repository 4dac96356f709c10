//! Parallel transport of the cycles `V_j` as the base point `q` moves.
//!
//! A cycle is a polyline in the `t1`-plane joining two roots of the branch cubic,
//! with the value of `sqrt(R)` stored at every interior node. Moving `q` moves
//! the roots; the polyline is carried along by a compactly supported
//! displacement field that fixes `t1 = 0`, so its isotopy class in the punctured
//! plane is preserved.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fibration::raw_roots;
use crate::numkernel::{integrate_interval, NumError, QuadratureResult, ZETA};

/// Transport could not make progress at `at`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TransportFailure {
    pub at: C64,
}

#[derive(Debug, Clone)]
pub(crate) struct Cycle {
    pub nodes: Vec<C64>,
    /// `sqrt(R)` at each node; unused at the two endpoints.
    pub sq: Vec<C64>,
    /// Root labels at the first and the last node.
    pub ends: [usize; 2],
}

#[derive(Debug, Clone)]
pub(crate) struct FiberState {
    pub q: C64,
    /// Roots of the branch cubic with fixed labels.
    pub roots: [C64; 3],
    pub cycles: Vec<Cycle>,
    step: f64,
}

const SUBDIVIDE_ANGLE: f64 = 1.0;
const MERGE_ANGLE: f64 = 0.5;
const MIN_STEP: f64 = 1e-13;

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        let s = 1.0 - r2;
        s * s * s
    }
}

fn principal_sqrt(z: C64) -> C64 {
    z.sqrt()
}

/// `(t - r0)(t - r1)(t - r2) / t`.
pub(crate) fn radicand(roots: &[C64; 3], t: C64) -> C64 {
    (t - roots[0]) * (t - roots[1]) * (t - roots[2]) / t
}

/// The radicand with the factor of root `a` removed.
fn rest(roots: &[C64; 3], a: usize, t: C64) -> C64 {
    let mut p = t.inv();
    for (k, r) in roots.iter().enumerate() {
        if k != a {
            p *= t - r;
        }
    }
    p
}

/// Branch points: the three roots followed by `0`.
fn points(roots: &[C64; 3]) -> [C64; 4] {
    [roots[0], roots[1], roots[2], C64::new(0.0, 0.0)]
}

fn signed_angle(u: C64, v: C64, p: C64) -> f64 {
    ((v - p) / (u - p)).arg()
}

impl Cycle {
    fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Labels of branch points excluded when judging edge `k`.
    fn excluded(&self, k: usize) -> [Option<usize>; 2] {
        let first = if k == 0 { Some(self.ends[0]) } else { None };
        let last = if k + 2 == self.n() { Some(self.ends[1]) } else { None };
        [first, last]
    }

    fn edge_angle_sum(&self, roots: &[C64; 3], k: usize, u: C64, v: C64) -> f64 {
        let ex = self.excluded(k);
        points(roots)
            .iter()
            .enumerate()
            .filter(|(l, _)| !ex.contains(&Some(*l)))
            .map(|(_, p)| signed_angle(u, v, *p).abs())
            .sum()
    }

    /// Value of `sqrt(R)` at `t` continued along edge `k` from its interior end.
    fn continue_on_edge(&self, roots: &[C64; 3], k: usize, t: C64) -> C64 {
        let n = self.n();
        if k == 0 {
            let a = self.ends[0];
            let b = self.nodes[1];
            let s = self.sq[1] * principal_sqrt(rest(roots, a, t) / rest(roots, a, b));
            s * principal_sqrt((t - roots[a]) / (b - roots[a]))
        } else if k + 2 == n {
            let a = self.ends[1];
            let b = self.nodes[n - 2];
            let s = self.sq[n - 2] * principal_sqrt(rest(roots, a, t) / rest(roots, a, b));
            s * principal_sqrt((t - roots[a]) / (b - roots[a]))
        } else {
            let u = self.nodes[k];
            self.sq[k] * principal_sqrt(radicand(roots, t) / radicand(roots, u))
        }
    }

    /// Splits edges until every edge subtends at most `SUBDIVIDE_ANGLE` in total.
    fn subdivide(&mut self, roots: &[C64; 3]) -> bool {
        let mut k = 0;
        let mut guard = 0;
        while k + 1 < self.n() {
            let (u, v) = (self.nodes[k], self.nodes[k + 1]);
            if self.edge_angle_sum(roots, k, u, v) > SUBDIVIDE_ANGLE {
                guard += 1;
                if guard > 10_000 {
                    return false;
                }
                let m = (u + v) * 0.5;
                let s = self.continue_on_edge(roots, k, m);
                self.nodes.insert(k + 1, m);
                self.sq.insert(k + 1, s);
            } else {
                k += 1;
            }
        }
        true
    }

    /// Drops interior nodes whose removal keeps the isotopy class and a small angle.
    fn simplify(&mut self, roots: &[C64; 3]) {
        let pts = points(roots);
        let mut k = 1;
        while k + 1 < self.n() {
            if self.n() <= 3 {
                break;
            }
            let (a, b, c) = (self.nodes[k - 1], self.nodes[k], self.nodes[k + 1]);
            // the merged edge would have index k - 1 in a cycle one node shorter
            let ex0 = if k == 1 { Some(self.ends[0]) } else { None };
            let ex1 = if k + 2 == self.n() { Some(self.ends[1]) } else { None };
            let mut sum = 0.0;
            let mut inside = false;
            for (l, p) in pts.iter().enumerate() {
                if ex0 == Some(l) || ex1 == Some(l) {
                    continue;
                }
                sum += signed_angle(a, c, *p).abs();
                inside |= in_triangle(*p, a, b, c);
            }
            if sum <= MERGE_ANGLE && !inside {
                self.nodes.remove(k);
                self.sq.remove(k);
            } else {
                k += 1;
            }
        }
    }

    /// Propagates `sqrt(R)` along the interior edges and compares with the stored values.
    fn consistent(&self, roots: &[C64; 3]) -> bool {
        let n = self.n();
        for k in 1..n.saturating_sub(2) {
            let pred = self.continue_on_edge(roots, k, self.nodes[k + 1]);
            let s = self.sq[k + 1];
            if (pred - s).norm() > 1e-6 * s.norm() {
                return false;
            }
        }
        true
    }

    /// `2 * integral of i / (t1 sqrt(R)) dt1` along the cycle.
    pub fn period(&self, roots: &[C64; 3], tol: f64) -> Result<QuadratureResult, NumError> {
        let n = self.n();
        let edges = n - 1;
        let etol = tol / (2.0 * edges as f64);
        let i = C64::new(0.0, 1.0);
        let mut total = QuadratureResult {
            value: C64::new(0.0, 0.0),
            abs_error_estimate: 0.0,
            n_evaluations: 0,
        };
        for k in 0..edges {
            let r = if k == 0 || k + 1 == edges {
                let (a, node, s) = if k == 0 {
                    (self.ends[0], self.nodes[1], self.sq[1])
                } else {
                    (self.ends[1], self.nodes[n - 2], self.sq[n - 2])
                };
                let ra = roots[a];
                let rn = rest(roots, a, node);
                let f = |w: f64| {
                    let t = ra + (node - ra) * (w * w);
                    i * (node - ra) * 2.0 / (t * s * principal_sqrt(rest(roots, a, t) / rn))
                };
                let mut q = integrate_interval(f, 0.0, 1.0, etol)?;
                if k != 0 {
                    q.value = -q.value;
                }
                q
            } else {
                let (u, v, s) = (self.nodes[k], self.nodes[k + 1], self.sq[k]);
                let ru = radicand(roots, u);
                let f = |x: f64| {
                    let t = u + (v - u) * x;
                    i * (v - u) / (t * s * principal_sqrt(radicand(roots, t) / ru))
                };
                integrate_interval(f, 0.0, 1.0, etol)?
            };
            total.value += r.value;
            total.abs_error_estimate += r.abs_error_estimate;
            total.n_evaluations += r.n_evaluations;
        }
        total.value *= 2.0;
        total.abs_error_estimate *= 2.0;
        Ok(total)
    }
}

fn in_triangle(p: C64, a: C64, b: C64, c: C64) -> bool {
    let cross = |u: C64, v: C64, w: C64| (v - u).re * (w - u).im - (v - u).im * (w - u).re;
    let d1 = cross(a, b, p);
    let d2 = cross(b, c, p);
    let d3 = cross(c, a, p);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

/// Plateau bump: `1` out to half the radius, then a smooth decay to `0`.
fn plateau(r2: f64) -> f64 {
    let r = r2.sqrt();
    if r <= 0.5 {
        1.0
    } else {
        let s = 2.0 * (r - 0.5);
        bump(s * s)
    }
}

struct Term {
    center: C64,
    amp: C64,
    sigma: f64,
    flat: bool,
}

/// Displacement `z -> z + sum amp * bump(|z - center| / sigma)`.
///
/// Amplitudes are kept below a tenth of their radius, so the map is a
/// homeomorphism. Points that move almost rigidly together are translated by
/// one plateau bump and the small residuals are carried by individual bumps.
struct Field {
    terms: Vec<Term>,
}

impl Field {
    fn build(old: &[C64; 4], new: &[C64; 4]) -> Option<Field> {
        let mut delta = [C64::new(0.0, 0.0); 4];
        for k in 0..4 {
            delta[k] = new[k] - old[k];
        }
        let mut parent = [0usize, 1, 2, 3];
        fn find(p: &mut [usize; 4], k: usize) -> usize {
            let mut k = k;
            while p[k] != k {
                k = p[k];
            }
            k
        }
        for k in 0..4 {
            for l in k + 1..4 {
                if (delta[k] - delta[l]).norm() <= 0.05 * (old[k] - old[l]).norm() {
                    let (a, b) = (find(&mut parent, k), find(&mut parent, l));
                    parent[a] = b;
                }
            }
        }
        let mut amp = delta;
        let mut terms = Vec::new();
        for root in 0..4 {
            let members: Vec<usize> = (0..4).filter(|&k| find(&mut parent, k) == root).collect();
            if members.len() < 2 || members.len() > 3 {
                continue;
            }
            let m = members.len() as f64;
            let center = members.iter().map(|&k| old[k]).sum::<C64>() / m;
            let mean = members.iter().map(|&k| delta[k]).sum::<C64>() / m;
            let outside = (0..4)
                .filter(|k| !members.contains(k))
                .map(|k| (old[k] - center).norm())
                .fold(f64::INFINITY, f64::min);
            let sigma = 0.4 * outside;
            let radius = members.iter().map(|&k| (old[k] - center).norm()).fold(0.0, f64::max);
            if radius <= 0.25 * sigma && mean.norm() <= 0.1 * sigma {
                terms.push(Term {
                    center,
                    amp: mean,
                    sigma,
                    flat: true,
                });
                for &k in &members {
                    amp[k] = delta[k] - mean;
                }
            }
        }
        for k in 0..4 {
            if amp[k].norm() == 0.0 {
                continue;
            }
            let near = (0..4)
                .filter(|&l| l != k)
                .map(|l| (old[k] - old[l]).norm())
                .fold(f64::INFINITY, f64::min);
            let sigma = 0.4 * near;
            if amp[k].norm() > 0.1 * sigma {
                return None;
            }
            terms.push(Term {
                center: old[k],
                amp: amp[k],
                sigma,
                flat: false,
            });
        }
        Some(Field { terms })
    }

    fn apply(&self, z: C64) -> C64 {
        let mut w = z;
        for t in &self.terms {
            let r2 = (z - t.center).norm_sqr() / (t.sigma * t.sigma);
            let s = if t.flat { plateau(r2) } else { bump(r2) };
            w += t.amp * s;
        }
        w
    }
}

fn cubic_q_velocity(q: C64, t: C64) -> C64 {
    let dq = -t * t * 2.0 + q * t * 2.0;
    let dt = t * t * 3.0 - q * t * 4.0 + q * q;
    -dq / dt
}

impl FiberState {
    /// The fiber over `q = 0` carrying the requested cycles among `V0, V1, V2`.
    pub fn reference(which: &[usize]) -> Self {
        let rho = 4f64.cbrt();
        let roots = [C64::new(rho, 0.0), ZETA * rho, ZETA * ZETA * rho];
        let m = C64::new(rho / 2.0, 0.0);
        let sm = C64::new(0.0, (-radicand(&roots, m).re).sqrt());
        let mut cycles = Vec::with_capacity(which.len());
        for &j in which {
            let rot = ZETA.powu(j as u32);
            let mut c = Cycle {
                nodes: vec![roots[(1 + j) % 3], m * rot, roots[(2 + j) % 3]],
                sq: vec![C64::new(0.0, 0.0), sm * rot, C64::new(0.0, 0.0)],
                ends: [(1 + j) % 3, (2 + j) % 3],
            };
            c.subdivide(&roots);
            cycles.push(c);
        }
        FiberState {
            q: C64::new(0.0, 0.0),
            roots,
            cycles,
            step: 0.05,
        }
    }

    pub fn periods(&self, tol: f64) -> Result<Vec<QuadratureResult>, NumError> {
        self.cycles.iter().map(|c| c.period(&self.roots, tol)).collect()
    }

    fn max_step(q: C64) -> f64 {
        let d = crate::fibration::critical_values()
            .iter()
            .map(|l| (q - l).norm())
            .fold(f64::INFINITY, f64::min);
        (0.05 * d).min(0.25 * (1.0 + q.norm()).sqrt())
    }

    /// Moves the base point along the straight segment to `target`.
    pub fn advance_to(&mut self, target: C64) -> Result<(), TransportFailure> {
        loop {
            let rem = target - self.q;
            let dist = rem.norm();
            if dist == 0.0 {
                return Ok(());
            }
            let h = self.step.min(Self::max_step(self.q)).min(dist);
            let next = if h >= dist { target } else { self.q + rem * (h / dist) };
            match self.try_step(next) {
                Some(s) => {
                    *self = s;
                    self.step = 2.0 * h;
                }
                None => {
                    self.step = 0.5 * h;
                    if self.step < MIN_STEP * (1.0 + self.q.norm()) {
                        return Err(TransportFailure { at: self.q });
                    }
                }
            }
        }
    }

    fn try_step(&self, q1: C64) -> Option<FiberState> {
        let dq = q1 - self.q;
        let found = raw_roots(q1).ok()?;
        if found.multiplicity.iter().any(|&m| m != 1) {
            return None;
        }
        let new = found.roots;
        let mut dmin = f64::INFINITY;
        for a in 0..3 {
            for b in a + 1..3 {
                dmin = dmin.min((new[a] - new[b]).norm());
            }
        }
        let mut roots = [C64::new(0.0, 0.0); 3];
        let mut used = [false; 3];
        for k in 0..3 {
            let pred = self.roots[k] + cubic_q_velocity(self.q, self.roots[k]) * dq;
            let (best, err) = (0..3)
                .map(|l| (l, (new[l] - pred).norm()))
                .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(core::cmp::Ordering::Equal))?;
            if used[best] || err > 0.25 * dmin {
                return None;
            }
            used[best] = true;
            roots[k] = new[best];
        }

        let old_pts = points(&self.roots);
        let new_pts = points(&roots);
        let field = Field::build(&old_pts, &new_pts)?;

        let mut cycles = Vec::with_capacity(self.cycles.len());
        for c in &self.cycles {
            let n = c.n();
            let mut moved = c.clone();
            moved.nodes[0] = roots[c.ends[0]];
            moved.nodes[n - 1] = roots[c.ends[1]];
            for k in 1..n - 1 {
                let z = c.nodes[k];
                let z1 = field.apply(z);
                let ratio = radicand(&roots, z1) / radicand(&self.roots, z);
                if ratio.arg().abs() > 1.0 {
                    return None;
                }
                moved.nodes[k] = z1;
                moved.sq[k] = c.sq[k] * principal_sqrt(ratio);
            }
            // no branch point may sweep across an edge
            for k in 0..n - 1 {
                let ex = c.excluded(k);
                for l in 0..4 {
                    if ex.contains(&Some(l)) {
                        continue;
                    }
                    let before = signed_angle(c.nodes[k], c.nodes[k + 1], old_pts[l]);
                    let after = signed_angle(moved.nodes[k], moved.nodes[k + 1], new_pts[l]);
                    if (after - before).abs() > 0.5 {
                        return None;
                    }
                }
            }
            if !moved.consistent(&roots) {
                return None;
            }
            if !moved.subdivide(&roots) {
                return None;
            }
            moved.simplify(&roots);
            cycles.push(moved);
        }
        Some(FiberState {
            q: q1,
            roots,
            cycles,
            step: self.step,
        })
    }
}
