use proptest::prelude::*;
use thimble_core::fibration::*;
use thimble_core::numkernel::*;
use thimble_core::Complex64 as C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn matched(a: [C64; 3], b: [C64; 3]) -> f64 {
    // smallest worst-case distance over the six pairings
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    perms
        .iter()
        .map(|p| (0..3).map(|k| (a[k] - b[p[k]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn branch_points_rotate_on_fifty_samples() {
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let q = C64::from_polar(0.2 + 0.13 * k as f64, 0.41 * k as f64 + 0.05);
        if critical_values().iter().any(|l| (q - l).norm() < 1e-2) {
            continue;
        }
        let a = branch_points(q).unwrap().roots.map(|t| t * ZETA);
        let b = branch_points(q * ZETA).unwrap().roots;
        worst = worst.max(matched(a, b));
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn double_root_at_critical_values() {
    for (k, lam) in critical_values().iter().enumerate() {
        let bd = branch_points(*lam).unwrap();
        assert_eq!(bd.multiplicity.iter().filter(|m| **m == 2).count(), 2, "k={k}");
    }
    let bd = branch_points(c(0.0, 0.0)).unwrap();
    assert_eq!(bd.multiplicity, [1, 1, 1]);
    let (x, xb) = bd.conjugate_pair.unwrap();
    assert_eq!(x.conj(), xb);
    assert!(bd.real_root.unwrap() > 0.0);
}

#[test]
fn quadrature_on_known_integrals() {
    let r = integrate_interval(|x| c(x.cos(), x * x), 0.0, 2.0, 1e-13).unwrap();
    assert!((r.value - c(2f64.sin(), 8.0 / 3.0)).norm() < 1e-12);
    // inverse square root endpoint handled by the contour substitution
    let k = Contour::polyline(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let r = integrate_contour(|z| z.sqrt().inv(), &k, 1e-11).unwrap();
    assert!((r.value - 2.0).norm() < 1e-9, "{}", r.value);
    // residue theorem
    let circ = Contour::circle(c(0.3, 0.1), 0.5, true);
    let r = integrate_contour(|z| (z - c(0.3, 0.2)).inv(), &circ, 1e-11).unwrap();
    assert!((r.value - c(0.0, std::f64::consts::TAU)).norm() < 1e-9);
}

proptest! {
    #[test]
    fn branch_points_solve_their_cubic(re in -8.0f64..8.0, im in -8.0f64..8.0) {
        let q = c(re, im);
        prop_assume!(critical_values().iter().all(|l| (q - l).norm() > 1e-2));
        let bd = branch_points(q).unwrap();
        for t in bd.roots {
            let r = t * (t - q) * (t - q) - 4.0;
            prop_assert!(r.norm() < 1e-11 * (1.0 + t.norm() * (t - q).norm_sqr()));
        }
        let rot = branch_points(q * ZETA).unwrap().roots;
        prop_assert!(matched(bd.roots.map(|t| t * ZETA), rot) <= 1e-10 * (1.0 + q.norm()));
    }

    #[test]
    fn cubic_solver_recovers_roots(a in (-3.0f64..3.0, -3.0f64..3.0), b in (-3.0f64..3.0, -3.0f64..3.0), d in (-3.0f64..3.0, -3.0f64..3.0)) {
        let r = [c(a.0, a.1), c(b.0, b.1), c(d.0, d.1)];
        prop_assume!((r[0] - r[1]).norm() > 0.1 && (r[1] - r[2]).norm() > 0.1 && (r[0] - r[2]).norm() > 0.1);
        let one = c(1.0, 0.0);
        let coeffs = [one, -(r[0] + r[1] + r[2]), r[0] * r[1] + r[1] * r[2] + r[0] * r[2], -(r[0] * r[1] * r[2])];
        let s = solve_cubic(coeffs, 1e-14).unwrap();
        prop_assert!(matched(s.roots, r) < 1e-9);
        prop_assert_eq!(s.multiplicity, [1, 1, 1]);
    }

    #[test]
    fn sqrt_branches(re in -10.0f64..10.0, im in -10.0f64..10.0, cut in -7.0f64..7.0) {
        let z = c(re, im);
        prop_assume!(z.norm() > 1e-9);
        let s = branch_sqrt(z, cut);
        prop_assert!((s * s - z).norm() < 1e-12 * z.norm());
        let th = cut + (z.arg() - cut).rem_euclid(std::f64::consts::TAU);
        prop_assert!((s - C64::from_polar(z.norm().sqrt(), 0.5 * th)).norm() < 1e-9 * (1.0 + s.norm()));
        prop_assert!(branch_sqrt(z, 0.0).im >= 0.0);
    }

    #[test]
    fn bisection_finds_simple_roots(r in -5.0f64..5.0, w in 0.1f64..3.0) {
        let root = find_root_1d(|x| (x - r).powi(3) + (x - r), r - w, r + 1.7 * w, 1e-12).unwrap();
        prop_assert!((root.x - r).abs() < 1e-11);
        prop_assert!(root.steps < 80);
    }

    #[test]
    fn fiber_points_satisfy_the_potential(re in -5.0f64..5.0, im in -5.0f64..5.0, tr in -3.0f64..3.0, ti in -3.0f64..3.0) {
        let q = c(re, im);
        let t1 = c(tr, ti);
        prop_assume!(t1.norm() > 0.1);
        let s = t2_sheets_principal(q, t1);
        for t2 in [s.t2_plus, s.t2_minus] {
            prop_assume!(t2.norm() > 1e-6);
            let w = potential(t1, t2);
            prop_assert!((w - q).norm() < 1e-9 * (1.0 + t1.norm() + t2.norm() + (t1 * t2).inv().norm()));
        }
    }
}
