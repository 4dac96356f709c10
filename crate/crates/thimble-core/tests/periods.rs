use thimble_core::homology::total_monodromy;
use thimble_core::numkernel::ZETA;
use thimble_core::periods::*;
use thimble_core::Complex64 as C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cfg() -> PeriodConfig {
    PeriodConfig::default()
}

fn g0(q: f64) -> C64 {
    thimble_integral(0, c(q, 0.0), None, &cfg()).unwrap().value
}

#[test]
fn local_monodromies_are_exact() {
    let expect = [
        (Around::A, [[-1, -1], [4, 3]]),
        (Around::B, [[2, -1], [1, 0]]),
        (Around::C, [[-1, -4], [1, 3]]),
    ];
    for (a, m) in expect {
        let r = numeric_monodromy(a, &cfg()).unwrap();
        assert_eq!(r.matrix.entries(), m, "{a:?}");
        assert!(r.uncertainty < 1e-6, "{a:?} residual {}", r.uncertainty);
    }
}

#[test]
fn loop_at_infinity_is_unipotent_of_content_nine() {
    let r = numeric_monodromy(Around::Infinity, &cfg()).unwrap();
    let m = r.matrix;
    assert_eq!(m.trace(), 2);
    let n = m.minus_identity();
    let sq = [
        [n[0][0] * n[0][0] + n[0][1] * n[1][0], n[0][0] * n[0][1] + n[0][1] * n[1][1]],
        [n[1][0] * n[0][0] + n[1][1] * n[1][0], n[1][0] * n[0][1] + n[1][1] * n[1][1]],
    ];
    assert_eq!(sq, [[0, 0], [0, 0]]);
    assert_eq!(m.content_minus_identity(), 9);
    // the loop around all three critical values undoes the large loop
    let [a, b, cc] = [Around::A, Around::B, Around::C].map(|x| numeric_monodromy(x, &cfg()).unwrap().matrix);
    assert_eq!(cc * b * a, m.inverse());
    assert_eq!(m, total_monodromy().inverse());
}

#[test]
fn loose_tolerance_fails_recognition() {
    let loose = PeriodConfig {
        tol: 1e-2,
        ..cfg()
    };
    assert!(matches!(
        numeric_monodromy(Around::A, &loose),
        Err(PeriodError::LatticeRecognitionFailed { .. })
    ));
}

#[test]
fn thimble_period_is_positive_imaginary() {
    let scale = g0(0.0).norm();
    for q in [-10.0, -5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 2.9] {
        let g = g0(q);
        assert!(g.im > 0.0, "q={q} G={g}");
        assert!(g.re.abs() <= 1e-6 * g.norm(), "q={q} G={g}");
    }
    assert!(g0(3.0).norm() <= 1e-8 * scale);
    assert!((g0(0.0).im - 13.159472534785834).abs() < 1e-7);
}

#[test]
fn growth_towards_minus_infinity() {
    let r = growth_at_minus_infinity(&[-1.0, -10.0, -100.0, -1000.0], &cfg()).unwrap();
    assert!(r.increasing, "{:?}", r.im_g);
    assert!(r.log_slope > 0.0);
    assert!(r.window_slopes.iter().all(|s| *s > 0.0));
}

#[test]
fn difference_of_side_thimbles_is_real() {
    let scale = g0(0.0).norm();
    for q in [-0.5, -1.0, -2.0, -5.0] {
        let g1 = thimble_integral(1, c(q, 0.0), None, &cfg()).unwrap().value;
        let g2 = thimble_integral(2, c(q, 0.0), None, &cfg()).unwrap().value;
        assert!((g1 - g2).im.abs() <= 1e-6 * scale, "q={q} {}", g1 - g2);
    }
}

#[test]
fn rotation_permutes_thimbles() {
    for q in [c(0.5, 0.2), c(-1.0, 0.0), c(1.0, -1.5)] {
        let a = thimble_integral(0, q, None, &cfg()).unwrap().value;
        let b = thimble_integral(1, q * ZETA, None, &cfg()).unwrap().value;
        let d = thimble_integral(2, q * ZETA * ZETA, None, &cfg()).unwrap().value;
        assert!((a - b).norm() < 1e-8, "{q}: {a} {b}");
        assert!((a - d).norm() < 1e-8, "{q}: {a} {d}");
    }
}

#[test]
fn appendix_contours() {
    for q in [1.5, -2.0] {
        let r = verify_appendix_contours(q, 1e-10).unwrap();
        assert!(r.arc_samples >= 200);
        assert!(r.min_im_on_arcs > 0.0, "q={q}");
        if let Some(m) = r.min_re_on_segment {
            assert!(m > 0.0, "q={q}");
        }
        assert!(r.relative_difference < 1e-8, "q={q} {}", r.relative_difference);
    }
}

#[test]
fn bad_inputs() {
    assert!(matches!(
        thimble_integral(0, c(5.0, 0.0), None, &cfg()),
        Err(PeriodError::NearCriticalValue { .. } | PeriodError::OutsideDomain { .. })
    ));
    assert!(thimble_integral(3, c(0.0, 0.0), None, &cfg()).is_err());
    let bad = PeriodConfig { tol: 0.0, ..cfg() };
    assert!(thimble_integral(0, c(0.0, 0.0), None, &bad).is_err());
    assert!(growth_at_minus_infinity(&[-1.0, -0.5], &cfg()).is_err());
}
