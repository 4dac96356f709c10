//! Exact integer model of `H1(E0, Z)`.
//!
//! Two bases are in use, `{a, b}` and `{c, d}`, related by `a = -c + d`, `b = c`.
//! Matrices act on column vectors of coefficients: the first column is the image
//! of the first basis vector.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HomologyError {
    #[error("classes are expressed in different bases")]
    BasisMismatch,
    #[error("matrix has determinant {0}, expected 1")]
    NotUnimodular(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    AB,
    CD,
}

/// `p e1 + q e2` in the basis `basis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HomologyClass {
    pub p: i64,
    pub q: i64,
    pub basis: Basis,
}

impl HomologyClass {
    pub const fn new(p: i64, q: i64, basis: Basis) -> Self {
        HomologyClass { p, q, basis }
    }

    pub const fn cd(p: i64, q: i64) -> Self {
        Self::new(p, q, Basis::CD)
    }

    pub const fn ab(p: i64, q: i64) -> Self {
        Self::new(p, q, Basis::AB)
    }

    pub fn to_basis(self, basis: Basis) -> Self {
        match (self.basis, basis) {
            (Basis::AB, Basis::CD) => Self::cd(self.q - self.p, self.p),
            (Basis::CD, Basis::AB) => Self::ab(self.q, self.p + self.q),
            _ => self,
        }
    }

    pub fn coeffs(self) -> [i64; 2] {
        [self.p, self.q]
    }

    pub fn is_zero(self) -> bool {
        self.p == 0 && self.q == 0
    }

    fn same(self, other: Self) -> Result<(), HomologyError> {
        if self.basis == other.basis {
            Ok(())
        } else {
            Err(HomologyError::BasisMismatch)
        }
    }

    pub fn checked_add(self, other: Self) -> Result<Self, HomologyError> {
        self.same(other)?;
        Ok(Self::new(self.p + other.p, self.q + other.q, self.basis))
    }

    pub fn scale(self, k: i64) -> Self {
        Self::new(k * self.p, k * self.q, self.basis)
    }
}

impl Add for HomologyClass {
    type Output = HomologyClass;
    /// Adds after converting `rhs` to the basis of `self`.
    fn add(self, rhs: Self) -> Self {
        let r = rhs.to_basis(self.basis);
        Self::new(self.p + r.p, self.q + r.q, self.basis)
    }
}

impl Sub for HomologyClass {
    type Output = HomologyClass;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for HomologyClass {
    type Output = HomologyClass;
    fn neg(self) -> Self {
        Self::new(-self.p, -self.q, self.basis)
    }
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (e1, e2) = match self.basis {
            Basis::AB => ("a", "b"),
            Basis::CD => ("c", "d"),
        };
        let term = |f: &mut fmt::Formatter<'_>, k: i64, e: &str, first: bool| -> fmt::Result {
            if k == 0 {
                return Ok(());
            }
            let sign = if k < 0 { "-" } else if first { "" } else { "+" };
            if k.abs() == 1 {
                write!(f, "{sign}{e}")
            } else {
                write!(f, "{sign}{}{e}", k.abs())
            }
        };
        if self.is_zero() {
            return write!(f, "0");
        }
        term(f, self.p, e1, true)?;
        term(f, self.q, e2, self.p == 0)
    }
}

/// A 2x2 integer matrix of determinant 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonodromyMatrix {
    entries: [[i64; 2]; 2],
}

impl MonodromyMatrix {
    pub const IDENTITY: MonodromyMatrix = MonodromyMatrix {
        entries: [[1, 0], [0, 1]],
    };

    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self, HomologyError> {
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        if det != 1 {
            return Err(HomologyError::NotUnimodular(det));
        }
        Ok(MonodromyMatrix { entries })
    }

    /// Used for products of matrices already known to be unimodular.
    const fn raw(entries: [[i64; 2]; 2]) -> Self {
        MonodromyMatrix { entries }
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.entries
    }

    pub fn trace(&self) -> i64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> i64 {
        let e = self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn inverse(&self) -> Self {
        let e = self.entries;
        Self::raw([[e[1][1], -e[0][1]], [-e[1][0], e[0][0]]])
    }

    pub fn transpose(&self) -> Self {
        let e = self.entries;
        Self::raw([[e[0][0], e[1][0]], [e[0][1], e[1][1]]])
    }

    /// `M - I`, not unimodular in general.
    pub fn minus_identity(&self) -> [[i64; 2]; 2] {
        let e = self.entries;
        [[e[0][0] - 1, e[0][1]], [e[1][0], e[1][1] - 1]]
    }

    /// gcd of the entries of `M - I`.
    pub fn content_minus_identity(&self) -> i64 {
        let m = self.minus_identity();
        m.iter().flatten().fold(0, |g, &x| gcd(g, x))
    }

    pub fn apply(&self, v: HomologyClass) -> HomologyClass {
        let e = self.entries;
        HomologyClass::new(e[0][0] * v.p + e[0][1] * v.q, e[1][0] * v.p + e[1][1] * v.q, v.basis)
    }

    pub fn pow(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut r = Self::IDENTITY;
        for _ in 0..n.unsigned_abs() {
            r = r * base;
        }
        r
    }
}

impl Mul for MonodromyMatrix {
    type Output = MonodromyMatrix;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.entries, rhs.entries);
        let mut out = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::raw(out)
    }
}

impl fmt::Display for MonodromyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.entries;
        write!(f, "[[{}, {}], [{}, {}]]", e[0][0], e[0][1], e[1][0], e[1][1])
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

const VANISHING_CD: [(i64, i64); 3] = [(1, -2), (1, 1), (-2, 1)];

/// Class of the cycle vanishing at `3 zeta^j`.
///
/// # Panics
/// If `j > 2`.
pub fn vanishing_cycle(j: usize, basis: Basis) -> HomologyClass {
    let (p, q) = VANISHING_CD[j];
    HomologyClass::cd(p, q).to_basis(basis)
}

/// Intersection pairing, normalized by `<d, c> = 1`.
pub fn intersection(x: HomologyClass, y: HomologyClass) -> Result<i64, HomologyError> {
    x.same(y)?;
    let (x, y) = (x.to_basis(Basis::CD), y.to_basis(Basis::CD));
    Ok(x.q * y.p - x.p * y.q)
}

/// Counterclockwise monodromy `v -> v + <delta, v> delta` in the `{c, d}` basis.
pub fn picard_lefschetz(delta: HomologyClass) -> MonodromyMatrix {
    let d = delta.to_basis(Basis::CD);
    let (p, q) = (d.p, d.q);
    MonodromyMatrix::raw([[1 + p * q, -p * p], [q * q, 1 - p * q]])
}

/// Monodromies around `3`, `3 zeta`, `3 zeta^2`.
pub fn local_monodromies() -> [MonodromyMatrix; 3] {
    [0, 1, 2].map(|j| picard_lefschetz(vanishing_cycle(j, Basis::CD)))
}

/// `M_C M_B M_A`: a large counterclockwise loop meeting `A`, then `B`, then `C`.
pub fn total_monodromy() -> MonodromyMatrix {
    let [a, b, c] = local_monodromies();
    c * b * a
}

/// Action of complex conjugation of the base on `H1(E0)` in the `{c, d}` basis.
pub fn conjugation_action() -> MonodromyMatrix {
    MonodromyMatrix::raw([[1, 1], [0, -1]])
}

/// The order-three rotation `V0 -> V1 -> V2`, `c -> -c + d`, `d -> -c`.
pub fn rotation_action() -> MonodromyMatrix {
    MonodromyMatrix::raw([[-1, -1], [1, 0]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn m(e: [[i64; 2]; 2]) -> MonodromyMatrix {
        MonodromyMatrix::new(e).unwrap()
    }

    #[test]
    fn vanishing_classes() {
        assert_eq!(vanishing_cycle(0, Basis::AB), HomologyClass::ab(-2, -1));
        assert_eq!(vanishing_cycle(1, Basis::AB), HomologyClass::ab(1, 2));
        assert_eq!(vanishing_cycle(2, Basis::AB), HomologyClass::ab(1, -1));
        assert_eq!(vanishing_cycle(0, Basis::CD), HomologyClass::cd(1, -2));
        assert_eq!(vanishing_cycle(0, Basis::CD).to_string(), "c-2d");
        assert_eq!(vanishing_cycle(2, Basis::CD).to_string(), "-2c+d");
        for basis in [Basis::AB, Basis::CD] {
            let s = vanishing_cycle(0, basis) + vanishing_cycle(1, basis) + vanishing_cycle(2, basis);
            assert!(s.is_zero());
        }
        assert_eq!(HomologyClass::ab(1, 2).to_basis(Basis::CD), HomologyClass::cd(1, 1));
    }

    #[test]
    fn pairing() {
        let c = HomologyClass::cd(1, 0);
        let d = HomologyClass::cd(0, 1);
        assert_eq!(intersection(d, c), Ok(1));
        assert_eq!(intersection(c, d), Ok(-1));
        assert_eq!(intersection(c, c), Ok(0));
        let v0 = vanishing_cycle(0, Basis::CD);
        let v1 = vanishing_cycle(1, Basis::CD);
        // bilinear expansion: <c,c> + <c,d> - 2<d,c> - 2<d,d>
        assert_eq!(intersection(v0, v1), Ok(-1 - 2));
        assert_eq!(intersection(v0, HomologyClass::ab(1, 2)), Err(HomologyError::BasisMismatch));
        let (a, b) = (vanishing_cycle(0, Basis::AB), vanishing_cycle(1, Basis::AB));
        assert_eq!(intersection(a, b), Ok(-3));
    }

    #[test]
    fn local_matrices() {
        let [a, b, c] = local_monodromies();
        assert_eq!(a, m([[-1, -1], [4, 3]]));
        assert_eq!(b, m([[2, -1], [1, 0]]));
        assert_eq!(c, m([[-1, -4], [1, 3]]));
        for (k, x) in [a, b, c].iter().enumerate() {
            let v = vanishing_cycle(k, Basis::CD);
            assert_eq!(x.apply(v), v);
            assert_eq!(x.trace(), 2);
            assert_eq!(x.det(), 1);
        }
    }

    #[test]
    fn global_monodromy() {
        let t = total_monodromy();
        assert_eq!(t, m([[10, 9], [-9, -8]]));
        assert_eq!(t.trace(), 2);
        let n = t.minus_identity();
        let sq = [
            [n[0][0] * n[0][0] + n[0][1] * n[1][0], n[0][0] * n[0][1] + n[0][1] * n[1][1]],
            [n[1][0] * n[0][0] + n[1][1] * n[1][0], n[1][0] * n[0][1] + n[1][1] * n[1][1]],
        ];
        assert_eq!(sq, [[0, 0], [0, 0]]);
        assert_eq!(t.content_minus_identity(), 9);
        // explicit conjugator to [[1, 9], [0, 1]]
        let g = m([[1, 0], [-1, 1]]);
        assert_eq!(g.inverse() * t * g, m([[1, 9], [0, 1]]));
    }

    #[test]
    fn conjugation() {
        let s = conjugation_action();
        assert_eq!(s.apply(HomologyClass::cd(1, -2)), HomologyClass::cd(-1, 2));
        assert_eq!(s.apply(HomologyClass::cd(1, 1)), HomologyClass::cd(2, -1));
        assert_eq!(s * s, MonodromyMatrix::IDENTITY);
    }

    #[test]
    fn rotation_permutes() {
        let r = rotation_action();
        let [a, b, c] = local_monodromies();
        for j in 0..3 {
            assert_eq!(r.apply(vanishing_cycle(j, Basis::CD)), vanishing_cycle((j + 1) % 3, Basis::CD));
        }
        assert_eq!(r * a * r.inverse(), b);
        assert_eq!(r * b * r.inverse(), c);
        assert_eq!(r * c * r.inverse(), a);
        assert_eq!(r.pow(3), MonodromyMatrix::IDENTITY);
    }

    #[test]
    fn rejects_non_unimodular() {
        assert_eq!(MonodromyMatrix::new([[2, 0], [0, 1]]), Err(HomologyError::NotUnimodular(2)));
    }
}
