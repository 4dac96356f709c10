//! The family `E_q = { t1 + t2 + 1/(t1 t2) = q }` seen through the projection to `t1`.
//!
//! Solving for `t2` gives `t2 = ((q - t1) +- sqrt(R)) / 2` with radicand
//! `R(t1) = (q - t1)^2 - 4 / t1 = (t1^3 - 2 q t1^2 + q^2 t1 - 4) / t1`.
//! The branch points are the roots of the cubic numerator together with `t1 = 0`.

use core::f64::consts::TAU;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::numkernel::{self, branch_sqrt, BranchTracker, NumError, ZETA};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FibrationError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("t1 = {t1} is a branch point of the fiber over q = {q}")]
    OnBranchPoint { q: C64, t1: C64 },
    #[error("the form is singular at t1 = {t1} (1 - t1 t2^2 vanishes)")]
    FormSingular { t1: C64 },
}

const ROOT_TOL: f64 = 1e-13;

/// Normalization record for the family. The form is fixed to
/// `i (dt1/t1) ^ (dt2/t2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    pub zeta: C64,
}

impl Default for Family {
    fn default() -> Self {
        Family { zeta: ZETA }
    }
}

/// `{3, 3 zeta, 3 zeta^2}`.
pub fn critical_values() -> [C64; 3] {
    [C64::new(3.0, 0.0), ZETA * 3.0, ZETA * ZETA * 3.0]
}

/// `W(t1, t2) = t1 + t2 + 1 / (t1 t2)`.
pub fn potential(t1: C64, t2: C64) -> C64 {
    t1 + t2 + (t1 * t2).inv()
}

/// Coefficients of `t^3 - 2q t^2 + q^2 t - 4`, leading first.
pub fn branch_cubic(q: C64) -> [C64; 4] {
    [C64::new(1.0, 0.0), -q * 2.0, q * q, C64::new(-4.0, 0.0)]
}

/// Radicand `(q - t1)^2 - 4 / t1`.
pub fn radicand(q: C64, t1: C64) -> C64 {
    (q - t1) * (q - t1) - t1.inv() * 4.0
}

/// Roots of `t1 (q - t1)^2 = 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchData {
    pub q: C64,
    /// Sorted by `(arg in [0, 2 pi), modulus)`.
    pub roots: [C64; 3],
    pub multiplicity: [u8; 3],
    /// `(x, conj x)` with `Im x >= 0`, populated for real `q <= 3`.
    pub conjugate_pair: Option<(C64, C64)>,
    /// The real root `y`, populated for real `q < 3`.
    pub real_root: Option<f64>,
}

fn arg_key(z: C64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Newton polish of a root of the branch cubic.
pub(crate) fn polish_root(q: C64, t: C64) -> C64 {
    let c = branch_cubic(q);
    let mut t = t;
    for _ in 0..4 {
        let p = ((t + c[1]) * t + c[2]) * t + c[3];
        let dp = (t * 3.0 + c[1] * 2.0) * t + c[2];
        if dp.norm() == 0.0 {
            break;
        }
        let next = t - p / dp;
        let pn = ((next + c[1]) * next + c[2]) * next + c[3];
        if pn.norm() < p.norm() {
            t = next;
        } else {
            break;
        }
    }
    t
}

/// Unsorted, polished roots of the branch cubic.
pub(crate) fn raw_roots(q: C64) -> Result<numkernel::CubicRoots, NumError> {
    let mut r = numkernel::solve_cubic(branch_cubic(q), ROOT_TOL)?;
    for k in 0..3 {
        if r.multiplicity[k] == 1 {
            r.roots[k] = polish_root(q, r.roots[k]);
        }
    }
    Ok(r)
}

/// Branch points of the `t1`-projection of `E_q`.
pub fn branch_points(q: C64) -> Result<BranchData, FibrationError> {
    let r = raw_roots(q)?;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| {
        let ka = (arg_key(r.roots[a]), r.roots[a].norm());
        let kb = (arg_key(r.roots[b]), r.roots[b].norm());
        ka.partial_cmp(&kb).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut roots = [r.roots[idx[0]], r.roots[idx[1]], r.roots[idx[2]]];
    let mut multiplicity = [r.multiplicity[idx[0]], r.multiplicity[idx[1]], r.multiplicity[idx[2]]];
    let mut conjugate_pair = None;
    let mut real_root = None;
    if q.im == 0.0 && q.re <= 3.0 {
        // the simple real root is the rightmost one; the other two are conjugate
        // (a double root at q = 3)
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| roots[a].re.partial_cmp(&roots[b].re).unwrap_or(core::cmp::Ordering::Equal));
        let (u, w) = (roots[order[0]], roots[order[1]]);
        let x = C64::new(0.5 * (u.re + w.re), 0.5 * (u.im - w.im).abs());
        let y = roots[order[2]].re;
        let (m_pair, m_real) = (multiplicity[order[0]], multiplicity[order[2]]);
        if q.re < 3.0 {
            real_root = Some(y);
        }
        conjugate_pair = Some((x, x.conj()));
        roots = [x, x.conj(), C64::new(y, 0.0)];
        roots.sort_by(|a, b| {
            (arg_key(*a), a.norm())
                .partial_cmp(&(arg_key(*b), b.norm()))
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        for k in 0..3 {
            multiplicity[k] = if roots[k] == C64::new(y, 0.0) { m_real } else { m_pair };
        }
    }
    Ok(BranchData {
        q,
        roots,
        multiplicity,
        conjugate_pair,
        real_root,
    })
}

/// The two solutions `t2^+-` of `t1 t2^2 + (t1^2 - q t1) t2 + 1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetValue {
    pub t2_plus: C64,
    pub t2_minus: C64,
}

fn sheets_from_root(q: C64, t1: C64, s: C64) -> SheetValue {
    let b = q - t1;
    let p = (b + s) * 0.5;
    let m = (b - s) * 0.5;
    // recover the smaller root from Vieta to avoid cancellation
    if p.norm() >= m.norm() {
        SheetValue {
            t2_plus: p,
            t2_minus: (t1 * p).inv(),
        }
    } else {
        SheetValue {
            t2_plus: (t1 * m).inv(),
            t2_minus: m,
        }
    }
}

/// Sheets at `t1` with `sqrt(R)` continued by `tracker`.
pub fn t2_sheets(q: C64, t1: C64, tracker: &mut BranchTracker) -> Result<SheetValue, FibrationError> {
    if t1.norm() == 0.0 {
        return Err(FibrationError::OnBranchPoint { q, t1 });
    }
    let r = radicand(q, t1);
    let scale = (q - t1).norm_sqr() + 4.0 / t1.norm();
    if r.norm() <= 1e-14 * scale {
        let s = (q - t1) * 0.5;
        return Ok(SheetValue {
            t2_plus: s,
            t2_minus: s,
        });
    }
    let s = tracker.update(r);
    Ok(sheets_from_root(q, t1, s))
}

/// Sheets at `t1` using `sqrt(R)` with argument in `[0, 2 pi)`.
pub fn t2_sheets_principal(q: C64, t1: C64) -> SheetValue {
    sheets_from_root(q, t1, branch_sqrt(radicand(q, t1), 0.0))
}

/// Which `t2`-sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Plus,
    Minus,
}

/// `i t2 / (1 - t1 t2^2)`, the `dq ^ dt1` density of the form on the given sheet.
///
/// The sheets are labelled with `sqrt(R)` taken on the `[0, 2 pi)` branch.
pub fn omega_density(q: C64, t1: C64, sheet: Sheet) -> Result<C64, FibrationError> {
    let s = t2_sheets_principal(q, t1);
    let t2 = match sheet {
        Sheet::Plus => s.t2_plus,
        Sheet::Minus => s.t2_minus,
    };
    density_at(t1, t2)
}

/// `i t2 / (1 - t1 t2^2)` for an explicit point of the fiber.
pub fn density_at(t1: C64, t2: C64) -> Result<C64, FibrationError> {
    let den = C64::new(1.0, 0.0) - t1 * t2 * t2;
    if den.norm() < 1e-13 * (1.0 + (t1 * t2 * t2).norm()) {
        return Err(FibrationError::FormSingular { t1 });
    }
    Ok(C64::new(0.0, 1.0) * t2 / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{integrate_contour, solve_cubic, track_sqrt, Contour};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn same_set(a: &[C64; 3], b: &[C64; 3], tol: f64) -> bool {
        a.iter().all(|z| b.iter().any(|w| (z - w).norm() < tol)) && b.iter().all(|z| a.iter().any(|w| (z - w).norm() < tol))
    }

    #[test]
    fn critical_values_closed_form() {
        let cv = critical_values();
        assert_eq!(cv[0], c(3.0, 0.0));
        assert!((cv[0] + cv[1] + cv[2]).norm() < 1e-15);
        // W at the critical points (zeta^-k, zeta^-k)
        for k in 0..3u32 {
            let t = ZETA.powu(k).inv();
            assert!((potential(t, t) - cv[(2 * k as usize) % 3]).norm() < 1e-14);
        }
        assert_eq!(potential(c(1.0, 0.0), c(1.0, 0.0)), c(3.0, 0.0));
    }

    #[test]
    fn branch_points_at_three() {
        let b = branch_points(c(3.0, 0.0)).unwrap();
        assert!(same_set(&b.roots, &[c(1.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)], 1e-9));
        assert_eq!(b.multiplicity.iter().filter(|&&m| m == 2).count(), 2);
        assert_eq!(b.conjugate_pair.map(|p| p.0.re.round()), Some(1.0));
    }

    #[test]
    fn branch_points_at_zero() {
        let b = branch_points(c(0.0, 0.0)).unwrap();
        let rho = 4f64.cbrt();
        assert!(same_set(&b.roots, &[c(rho, 0.0), ZETA * rho, ZETA * ZETA * rho], 1e-13));
        let (x, xb) = b.conjugate_pair.unwrap();
        assert!((x - ZETA * rho).norm() < 1e-13 && xb == x.conj());
        assert!((b.real_root.unwrap() - rho).abs() < 1e-13);
    }

    #[test]
    fn branch_points_at_three_zeta() {
        let b = branch_points(ZETA * 3.0).unwrap();
        assert!(same_set(&b.roots, &[ZETA, ZETA, ZETA * 4.0], 1e-7));
        assert_eq!(b.multiplicity.iter().filter(|&&m| m == 2).count(), 2);
    }

    #[test]
    fn real_q_has_one_real_root() {
        for q in [-50.0, -2.0, -0.3, 0.7, 1.5, 2.99] {
            let b = branch_points(c(q, 0.0)).unwrap();
            let y = b.real_root.unwrap();
            assert!(y > 0.0);
            let (x, xb) = b.conjugate_pair.unwrap();
            assert!(x.im > 0.0 && xb == x.conj());
            for r in b.roots {
                assert!((r * (c(q, 0.0) - r) * (c(q, 0.0) - r) - 4.0).norm() < 1e-11 * (1.0 + q * q));
            }
        }
    }

    #[test]
    fn collision_at_critical_values() {
        for j in 0..3u32 {
            let lam = ZETA.powu(j) * 3.0;
            let mut last = f64::INFINITY;
            for k in 2..=6 {
                let q = lam * (1.0 - 10f64.powi(-k));
                let b = branch_points(q).unwrap();
                let z = ZETA.powu(j);
                let mut near: alloc::vec::Vec<C64> = b.roots.iter().copied().filter(|r| (r - z).norm() < 0.5).collect();
                assert_eq!(near.len(), 2);
                let d = (near[0] - near[1]).norm();
                near.clear();
                assert!(d < last);
                assert!((d - 2.0 * (2.0 * 10f64.powi(-k) * 3.0 / 3.0).sqrt()).abs() < 0.3 * d, "{d}");
                last = d;
            }
        }
    }

    #[test]
    fn sheet_at_double_point() {
        let mut bt = BranchTracker::new(0.0);
        let s = t2_sheets(c(3.0, 0.0), c(1.0, 0.0), &mut bt).unwrap();
        assert!((s.t2_plus - 1.0).norm() < 1e-12 && (s.t2_minus - 1.0).norm() < 1e-12);
    }

    #[test]
    fn sheets_by_quadratic_formula() {
        let mut bt = BranchTracker::new(0.0);
        let s = t2_sheets(c(0.0, 0.0), c(-1.0, 0.0), &mut bt).unwrap();
        // -t2^2 + t2 + 1 = 0
        let r1 = c((1.0 + 5f64.sqrt()) / 2.0, 0.0);
        let r2 = c((1.0 - 5f64.sqrt()) / 2.0, 0.0);
        assert!(same_set(&[s.t2_plus, s.t2_minus, c(9.0, 0.0)], &[r1, r2, c(9.0, 0.0)], 1e-14));
    }

    #[test]
    fn density_identities() {
        let samples = [(c(0.3, 0.2), c(-1.2, 0.7)), (c(-2.0, 0.0), c(0.4, -1.1)), (c(1.0, 2.0), c(2.5, 0.1))];
        for (q, t1) in samples {
            let s = t2_sheets_principal(q, t1);
            let root = branch_sqrt(radicand(q, t1), 0.0);
            let i = c(0.0, 1.0);
            let plus = omega_density(q, t1, Sheet::Plus).unwrap();
            let minus = omega_density(q, t1, Sheet::Minus).unwrap();
            assert!((minus - i / (t1 * root)).norm() < 1e-12 * minus.norm());
            assert!((plus + i / (t1 * root)).norm() < 1e-12 * plus.norm());
            for t2 in [s.t2_plus, s.t2_minus] {
                let lhs = i * t2 / (q * t1 * t2 - t1 * t1 * t2 - t1 * t2 * t2 * 2.0);
                let rhs = i / (q - t1 - t2 * 2.0) / t1;
                assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
                assert!((t1 * t2 * t2 + (t1 * t1 - q * t1) * t2 + 1.0).norm() < 1e-12);
            }
            assert!((s.t2_plus * s.t2_minus * t1 - 1.0).norm() < 1e-13);
            assert!((s.t2_plus + s.t2_minus - (q - t1)).norm() < 1e-13);
        }
    }

    #[test]
    fn densities_conjugate_over_real_base() {
        for t1 in [-0.3, -1.0, -4.0] {
            let p = omega_density(c(0.0, 0.0), c(t1, 0.0), Sheet::Plus).unwrap();
            let m = omega_density(c(0.0, 0.0), c(t1, 0.0), Sheet::Minus).unwrap();
            assert!((p - m.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn tracked_root_is_difference_of_sheets() {
        // the cycle over q = 0: x -> m -> conj x, started from the real crossing
        let rho = 4f64.cbrt();
        let m = c(rho / 2.0, 0.0);
        let r0 = radicand(c(0.0, 0.0), m);
        let init = c(0.0, (-r0.re).sqrt());
        let half = Contour::polyline(&[m, ZETA * rho]).unwrap();
        let tr = track_sqrt(|t| radicand(c(0.0, 0.0), t), &half, init).unwrap();
        let mut prev = init;
        for k in 0..=100 {
            let t = k as f64 / 100.0 * 0.999;
            let z = tr.point(t);
            let s = tr.eval(t);
            let roots = solve_cubic([z, z * z, c(1.0, 0.0), c(0.0, 0.0)], 1e-14).unwrap();
            let nz: alloc::vec::Vec<C64> = roots.roots.iter().copied().filter(|r| r.norm() > 1e-9).collect();
            let d = nz[0] - nz[1];
            assert!((s - d).norm() < 1e-9 * (1.0 + s.norm()) || (s + d).norm() < 1e-9 * (1.0 + s.norm()));
            assert!((s - prev).norm() < 0.5);
            prev = s;
        }
        let _ = integrate_contour(|_| c(0.0, 0.0), &half, 1e-9);
    }
}
