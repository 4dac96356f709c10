//! Exact model of the plane with three focus-focus points, six cut rays and
//! integral gluing maps, with path developing and loop holonomy.

use alloc::vec::Vec;
use core::fmt;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::homology::{local_monodromies, vanishing_cycle, Basis, MonodromyMatrix};

pub type Q = Rational64;
pub type Point = [Q; 2];

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpsError {
    #[error("path vertex or segment meets cut {cut} at a vertex; perturb the path")]
    LoopHitsCut { cut: &'static str },
    #[error("path passes through the singular point {0}")]
    HitsSingularPoint(&'static str),
    #[error("path is not closed")]
    NotClosed,
    #[error("glue matrix at {at} is {glue}, expected the transpose {expected}")]
    MatrixMismatch {
        at: &'static str,
        glue: MonodromyMatrix,
        expected: MonodromyMatrix,
    },
    #[error("cut pair at {0} is not carried onto itself by its glue map")]
    CutNotPreserved(&'static str),
}

/// Integral affine map `x -> M x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineMap {
    pub linear: MonodromyMatrix,
    pub translation: Point,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            linear: MonodromyMatrix::IDENTITY,
            translation: [Q::zero(), Q::zero()],
        }
    }

    /// The map with linear part `m` fixing `p`.
    pub fn fixing(m: MonodromyMatrix, p: Point) -> Self {
        let mp = apply_linear(&m, p);
        AffineMap {
            linear: m,
            translation: [p[0] - mp[0], p[1] - mp[1]],
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let l = apply_linear(&self.linear, p);
        [l[0] + self.translation[0], l[1] + self.translation[1]]
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            linear: self.linear * other.linear,
            translation: self.apply(other.translation),
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self.linear.inverse();
        let t = apply_linear(&inv, self.translation);
        AffineMap {
            linear: inv,
            translation: [-t[0], -t[1]],
        }
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({}, {})", self.linear, self.translation[0], self.translation[1])
    }
}

fn apply_linear(m: &MonodromyMatrix, p: Point) -> Point {
    let e = m.entries();
    [
        qi(e[0][0]) * p[0] + qi(e[0][1]) * p[1],
        qi(e[1][0]) * p[0] + qi(e[1][1]) * p[1],
    ]
}

/// Ray `origin + s * direction`, `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cut {
    pub name: &'static str,
    pub origin: Point,
    pub direction: [i64; 2],
}

impl Cut {
    pub fn point(&self, s: Q) -> Point {
        [
            self.origin[0] + s * qi(self.direction[0]),
            self.origin[1] + s * qi(self.direction[1]),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularPoint {
    pub name: &'static str,
    pub position: Point,
    /// Cut glued away from (`l+`) and onto (`l-`).
    pub cut_plus: Cut,
    pub cut_minus: Cut,
    /// Affine map carrying `l+` onto `l-`.
    pub glue: AffineMap,
}

impl SingularPoint {
    /// Strict interior of the sector between the two cuts that is cut out.
    pub fn in_removed_sector(&self, p: Point) -> bool {
        let d = [p[0] - self.position[0], p[1] - self.position[1]];
        let a = self.cut_plus.direction;
        let b = self.cut_minus.direction;
        let cr = |u: [i64; 2], v: Point| qi(u[0]) * v[1] - qi(u[1]) * v[0];
        // sectors are convex, bounded by a (clockwise side) ... b or b ... a
        let ab = a[0] * b[1] - a[1] * b[0];
        if ab > 0 {
            cr(a, d).is_positive() && (-cr(b, d)).is_positive()
        } else {
            cr(b, d).is_positive() && (-cr(a, d)).is_positive()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutAtlas {
    /// `A'`, `B'`, `C'` in this order.
    pub points: [SingularPoint; 3],
}

pub fn build_atlas() -> CutAtlas {
    let a = [qi(0), q(-1, 2)];
    let b = [q(1, 2), q(1, 2)];
    let c = [q(-1, 2), qi(0)];
    let m = |e| MonodromyMatrix::new(e).expect("glue matrices are unimodular");
    let sp = |name, position, plus: (&'static str, [i64; 2]), minus: (&'static str, [i64; 2]), e| SingularPoint {
        name,
        position,
        cut_plus: Cut {
            name: plus.0,
            origin: position,
            direction: plus.1,
        },
        cut_minus: Cut {
            name: minus.0,
            origin: position,
            direction: minus.1,
        },
        glue: AffineMap::fixing(m(e), position),
    };
    CutAtlas {
        points: [
            sp("A'", a, ("l2+", [1, 0]), ("l2-", [-1, -1]), [[-1, 4], [-1, 3]]),
            sp("B'", b, ("l1+", [0, 1]), ("l1-", [1, 0]), [[2, 1], [-1, 0]]),
            sp("C'", c, ("l3+", [-1, -1]), ("l3-", [0, 1]), [[-1, 1], [-4, 3]]),
        ],
    }
}

/// A path mapped through the glued charts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DevelopedPath {
    pub input: Vec<Point>,
    pub output: Vec<Point>,
    pub holonomy: AffineMap,
}

fn cross(u: [Q; 2], v: [Q; 2]) -> Q {
    u[0] * v[1] - u[1] * v[0]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Crossing of segment `a -> b` with a cut: `Some((parameter on the segment, +1 | -1))`,
/// `+1` when the crossing runs counterclockwise about the cut origin.
fn crossing(cut: &Cut, a: Point, b: Point, name: &'static str) -> Result<Option<(Q, i8)>, CpsError> {
    let d = [qi(cut.direction[0]), qi(cut.direction[1])];
    let ca = cross(d, sub(a, cut.origin));
    let cb = cross(d, sub(b, cut.origin));
    let on_ray = |p: Point| {
        let v = sub(p, cut.origin);
        v[0] * d[0] + v[1] * d[1]
    };
    if ca.is_zero() && cb.is_zero() {
        // collinear with the cut line
        let (sa, sb) = (on_ray(a), on_ray(b));
        if sa.is_negative() && sb.is_negative() {
            return Ok(None);
        }
        return Err(CpsError::LoopHitsCut { cut: cut.name });
    }
    if (ca.is_positive() && cb.is_positive()) || (ca.is_negative() && cb.is_negative()) {
        return Ok(None);
    }
    let lambda = ca / (ca - cb);
    let x = [a[0] + lambda * (b[0] - a[0]), a[1] + lambda * (b[1] - a[1])];
    let s = on_ray(x);
    if s.is_negative() {
        return Ok(None);
    }
    if s.is_zero() {
        return Err(CpsError::HitsSingularPoint(name));
    }
    if ca.is_zero() || cb.is_zero() {
        return Err(CpsError::LoopHitsCut { cut: cut.name });
    }
    Ok(Some((lambda, if ca.is_negative() { 1 } else { -1 })))
}

impl CutAtlas {
    /// Develops a polygonal path. Each sector is collapsed onto its `l+` ray;
    /// crossing that ray counterclockwise about its singular point applies the
    /// glue map, clockwise its inverse.
    pub fn develop(&self, path: &[Point]) -> Result<DevelopedPath, CpsError> {
        let mut h = AffineMap::identity();
        let mut out = Vec::with_capacity(path.len());
        if let Some(&p0) = path.first() {
            out.push(p0);
        }
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            for sp in &self.points {
                if a == sp.position || b == sp.position {
                    return Err(CpsError::HitsSingularPoint(sp.name));
                }
            }
            let mut hits = Vec::new();
            for sp in &self.points {
                if let Some((lambda, dir)) = crossing(&sp.cut_plus, a, b, sp.name)? {
                    hits.push((lambda, dir, sp.glue));
                }
            }
            hits.sort_by_key(|h| h.0);
            for (lambda, dir, g) in hits {
                let x = [a[0] + lambda * (b[0] - a[0]), a[1] + lambda * (b[1] - a[1])];
                out.push(h.apply(x));
                h = if dir > 0 { h.compose(&g) } else { h.compose(&g.inverse()) };
                out.push(h.apply(x));
            }
            out.push(h.apply(b));
        }
        Ok(DevelopedPath {
            input: path.to_vec(),
            output: out,
            holonomy: h,
        })
    }

    /// Holonomy of a closed polygonal loop.
    pub fn holonomy(&self, lp: &[Point]) -> Result<AffineMap, CpsError> {
        if lp.len() < 2 || lp.first() != lp.last() {
            return Err(CpsError::NotClosed);
        }
        Ok(self.develop(lp)?.holonomy)
    }

    /// Invariant direction of each glue map, primitive, first nonzero entry positive.
    pub fn invariant_directions(&self) -> [[i64; 2]; 3] {
        self.points.map(|sp| kernel_direction(sp.glue.linear))
    }

    /// Pairwise intersections of the invariant lines through the singular points:
    /// `v1'` from `B'` and `C'`, `v2'` from `C'` and `A'`, `v3'` from `A'` and `B'`.
    pub fn triangle_vertices(&self) -> [Point; 3] {
        let dirs = self.invariant_directions();
        let line = |k: usize| (self.points[k].position, [qi(dirs[k][0]), qi(dirs[k][1])]);
        let meet = |i: usize, j: usize| {
            let (p, u) = line(i);
            let (r, v) = line(j);
            // p + s u = r + t v
            let den = cross(u, v);
            let s = cross(sub(r, p), v) / den;
            [p[0] + s * u[0], p[1] + s * u[1]]
        };
        [meet(1, 2), meet(2, 0), meet(0, 1)]
    }
}

/// Primitive generator of `ker(M - I)` for a unipotent `M != I`.
pub fn kernel_direction(m: MonodromyMatrix) -> [i64; 2] {
    let n = m.minus_identity();
    let (a, b) = if n[0] != [0, 0] { (n[0][0], n[0][1]) } else { (n[1][0], n[1][1]) };
    // (x, y) with a x + b y = 0
    let (mut x, mut y) = (b, -a);
    let g = gcd(x.abs(), y.abs()).max(1);
    x /= g;
    y /= g;
    if x < 0 || (x == 0 && y < 0) {
        x = -x;
        y = -y;
    }
    [x, y]
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Real affine map `x -> L x + t` fitted through three point pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleFit {
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
    pub determinant: f64,
}

/// The affine map carrying `from[k]` to `to[k]`; `None` for a degenerate triangle.
pub fn fit_triangle(from: [[f64; 2]; 3], to: [[f64; 2]; 3]) -> Option<TriangleFit> {
    let e = |p: [[f64; 2]; 3]| [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
    let f = e(from);
    let g = e(to);
    let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    let fi = [[f[1][1] / det, -f[0][1] / det], [-f[1][0] / det, f[0][0] / det]];
    let mut l = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            l[i][j] = g[i][0] * fi[0][j] + g[i][1] * fi[1][j];
        }
    }
    let t = [
        to[0][0] - l[0][0] * from[0][0] - l[0][1] * from[0][1],
        to[0][1] - l[1][0] * from[0][0] - l[1][1] * from[0][1],
    ];
    Some(TriangleFit {
        linear: l,
        translation: t,
        determinant: l[0][0] * l[1][1] - l[0][1] * l[1][0],
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransposeCheck {
    pub at: &'static str,
    pub picard_lefschetz: MonodromyMatrix,
    pub glue: MonodromyMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsomorphismReport {
    pub transposes: [TransposeCheck; 3],
    /// `ker(glue - I)`, equal to `ker(PL^T - I)`.
    pub invariant_directions: [[i64; 2]; 3],
    pub triangle: [Point; 3],
    /// Fit from the affine coordinates of `v1, v2, v3`, when supplied.
    pub fit: Option<TriangleFit>,
}

/// Exact comparison of the two descriptions of the local monodromies.
///
/// `syz_triangle` holds the affine coordinates of `v1, v2, v3`.
pub fn verify_isomorphism(atlas: &CutAtlas, syz_triangle: Option<[[f64; 2]; 3]>) -> Result<IsomorphismReport, CpsError> {
    let pl = local_monodromies();
    let checks = core::array::from_fn(|k| TransposeCheck {
        at: atlas.points[k].name,
        picard_lefschetz: pl[k],
        glue: atlas.points[k].glue.linear,
    });
    for (k, c) in checks.iter().enumerate() {
        let sp = &atlas.points[k];
        if c.picard_lefschetz.transpose() != c.glue {
            return Err(CpsError::MatrixMismatch {
                at: sp.name,
                glue: c.glue,
                expected: c.picard_lefschetz.transpose(),
            });
        }
        // the vanishing class is fixed by its own monodromy
        let v = vanishing_cycle(k, Basis::CD);
        if c.picard_lefschetz.apply(v) != v {
            return Err(CpsError::CutNotPreserved(sp.name));
        }
        let g = sp.glue;
        if g.apply(sp.position) != sp.position {
            return Err(CpsError::CutNotPreserved(sp.name));
        }
        let d = sp.cut_plus.point(Q::one());
        if g.apply(d) != sp.cut_minus.point(Q::one()) {
            return Err(CpsError::CutNotPreserved(sp.name));
        }
        let inv = kernel_direction(g.linear);
        if kernel_direction(c.picard_lefschetz.transpose()) != inv {
            return Err(CpsError::CutNotPreserved(sp.name));
        }
    }
    let triangle = atlas.triangle_vertices();
    let fit = syz_triangle.and_then(|from| {
        let to = triangle.map(|p| p.map(|x| *x.numer() as f64 / *x.denom() as f64));
        fit_triangle(from, to)
    });
    Ok(IsomorphismReport {
        transposes: checks,
        invariant_directions: atlas.invariant_directions(),
        triangle,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(x: (i64, i64), y: (i64, i64)) -> Point {
        [q(x.0, x.1), q(y.0, y.1)]
    }

    fn square(center: Point, r: Q) -> Vec<Point> {
        let [x, y] = center;
        vec![[x + r, y - r], [x + r, y + r], [x - r, y + r], [x - r, y - r], [x + r, y - r]]
    }

    #[test]
    fn atlas_data() {
        let at = build_atlas();
        assert_eq!(at.points[0].position, p((0, 1), (-1, 2)));
        assert_eq!(at.points[1].glue.linear.entries(), [[2, 1], [-1, 0]]);
        for sp in &at.points {
            assert_eq!(sp.glue.linear.trace(), 2);
            assert_eq!(sp.glue.linear.det(), 1);
            assert_eq!(sp.glue.apply(sp.position), sp.position);
        }
    }

    #[test]
    fn small_loops() {
        let at = build_atlas();
        for sp in &at.points {
            // shift the square so no vertex sits on a cut
            let c = [sp.position[0] + q(1, 97), sp.position[1] + q(1, 89)];
            let h = at.holonomy(&square(c, q(1, 10))).unwrap();
            assert_eq!(h, sp.glue, "{}", sp.name);
        }
        let h = at.holonomy(&square(p((3, 1), (3, 1)), q(1, 3))).unwrap();
        assert_eq!(h, AffineMap::identity());
    }

    #[test]
    fn big_loop() {
        let at = build_atlas();
        let h = at.holonomy(&square(p((1, 7), (1, 11)), qi(5))).unwrap();
        let m = h.linear;
        assert_eq!(m.trace(), 2);
        let n = m.minus_identity();
        let sq = [
            [n[0][0] * n[0][0] + n[0][1] * n[1][0], n[0][0] * n[0][1] + n[0][1] * n[1][1]],
            [n[1][0] * n[0][0] + n[1][1] * n[1][0], n[1][0] * n[0][1] + n[1][1] * n[1][1]],
        ];
        assert_eq!(sq, [[0, 0], [0, 0]]);
        assert_eq!(m.content_minus_identity(), 9);
    }

    #[test]
    fn vertex_on_cut_rejected() {
        let at = build_atlas();
        let lp = vec![p((1, 2), (1, 1)), p((1, 1), (1, 1)), p((1, 1), (2, 1)), p((1, 2), (1, 1))];
        assert!(matches!(at.holonomy(&lp), Err(CpsError::LoopHitsCut { .. })));
        assert!(matches!(at.holonomy(&lp[..3]), Err(CpsError::NotClosed)));
    }

    #[test]
    fn sectors() {
        let at = build_atlas();
        assert!(at.points[1].in_removed_sector(p((1, 1), (1, 1))));
        assert!(!at.points[1].in_removed_sector(p((0, 1), (1, 1))));
        assert!(at.points[0].in_removed_sector(p((1, 10), (-2, 1))));
        assert!(at.points[2].in_removed_sector(p((-1, 1), (1, 10))));
    }

    #[test]
    fn isomorphism_and_triangle() {
        let at = build_atlas();
        let r = verify_isomorphism(&at, None).unwrap();
        assert_eq!(r.invariant_directions, [[2, 1], [1, -1], [1, 2]]);
        assert_eq!(r.triangle, [p((0, 1), (1, 1)), p((-1, 1), (-1, 1)), p((1, 1), (0, 1))]);
    }

    #[test]
    fn triangle_fit_recovers_map() {
        let from = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let to = [[1.0, 2.0], [3.0, 2.0], [1.0, 5.0]];
        let f = fit_triangle(from, to).unwrap();
        assert_eq!(f.linear, [[2.0, 0.0], [0.0, 3.0]]);
        assert_eq!(f.translation, [1.0, 2.0]);
        assert!(fit_triangle(from, [[0.0, 0.0]; 3]).unwrap().determinant == 0.0);
    }
}
