use thimble_core::affine_syz::*;
use thimble_core::homology::HomologyClass;
use thimble_core::numkernel::ZETA;
use thimble_core::periods::{class_period, cylinder_integrals, BasePath, PeriodConfig};
use thimble_core::Complex64 as C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cfg() -> PeriodConfig {
    PeriodConfig::default()
}

/// Value found by this implementation at the default tolerances; kept to catch regressions.
const V1_BASELINE: f64 = -4.3308219817699865;

#[test]
fn triple_point_and_rays() {
    let tp = find_triple_point(&cfg()).unwrap();
    assert!(tp.v1 < 0.0);
    assert!(tp.residual.abs() <= 1e-9 * tp.scale, "{}", tp.residual);
    assert!((tp.v1 - V1_BASELINE).abs() < 1e-8, "{}", tp.v1);
    // at v1 both side thimbles reach the same level as the central one
    assert!(tp.im_g1.abs() <= 1e-8 * tp.scale);
    assert!(tp.im_g2.abs() <= 1e-8 * tp.scale);
    assert!((tp.v2 - ZETA * tp.v1).norm() < 1e-12);

    let v1 = c(tp.v1, 0.0);
    for kind in [RayKind::MinusCMinusD, RayKind::MinusTwoCPlusD] {
        let ray = trace_ray(kind, &cfg()).unwrap();
        assert!(ray.distance_to(v1) <= 1e-4, "{kind:?} misses v1 by {}", ray.distance_to(v1));
        assert!(ray.max_residual <= 1e-6 * tp.scale);
        let rot = rotated_ray_residual(&ray, &cfg()).unwrap();
        assert!(rot <= 1e-6 * tp.scale, "{kind:?} rotated residual {rot}");
    }
    assert_eq!(
        trace_ray(RayKind::MinusCMinusD, &cfg()).unwrap().direction_class,
        HomologyClass::cd(-1, -1)
    );
}

#[test]
fn traced_lines_on_the_real_axis_stay_real() {
    for kind in [RayKind::NegativeRealAxis, RayKind::PositiveRealCut] {
        let ray = trace_ray(kind, &cfg()).unwrap();
        let off = ray.trace.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(off < 1e-8, "{kind:?} leaves the axis by {off}");
        assert!(ray.trace.len() > 10);
    }
}

#[test]
fn conjugate_points_related_by_integer_matrix() {
    let s = scale(&cfg()).unwrap();
    let mut pts = Vec::new();
    for k in 0..20 {
        let r = 0.5 + 0.3 * k as f64;
        let a = 0.15 + 2.9 * k as f64 / 19.0;
        pts.push(C64::from_polar(r, a));
    }
    for q in pts {
        if critical_values_near(q) {
            continue;
        }
        let (_, _, defect) = conjugation_defect(q, &cfg()).unwrap();
        assert!(defect <= 1e-7 * s, "q={q} defect {defect}");
    }
}

fn critical_values_near(q: C64) -> bool {
    (0..3).any(|k| (q - ZETA.powu(k) * 3.0).norm() < 0.05)
}

#[test]
fn coordinates_differentiate_to_periods() {
    let q = c(1.0, 1.0);
    let h = 1e-3;
    let f = |z: C64| chart_sample(z, &cfg()).unwrap().f;
    let path = BasePath::radial(q);
    let pc = class_period(HomologyClass::cd(1, 0), &path, &cfg()).unwrap().value;
    let pd = class_period(HomologyClass::cd(0, 1), &path, &cfg()).unwrap().value;
    let (xp, xm) = (f(q + h), f(q - h));
    let (yp, ym) = (f(q + c(0.0, h)), f(q - c(0.0, h)));
    let dx = [(xp[0] - xm[0]) / (2.0 * h), (xp[1] - xm[1]) / (2.0 * h)];
    let dy = [(yp[0] - ym[0]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)];
    assert!((dx[0] - pc.im).abs() < 1e-5 && (dx[1] - pd.im).abs() < 1e-5, "{dx:?} {pc} {pd}");
    assert!((dy[0] - pc.re).abs() < 1e-5 && (dy[1] - pd.re).abs() < 1e-5, "{dy:?} {pc} {pd}");
}

#[test]
fn inner_disc_is_path_independent() {
    let q = c(1.0, 1.5);
    let radial = cylinder_integrals(&BasePath::radial(q), &cfg()).unwrap();
    let bent = cylinder_integrals(&BasePath::new(vec![c(0.0, 0.0), c(-1.0, 0.5), c(0.5, 2.0), q]).unwrap(), &cfg()).unwrap();
    assert!((radial.c - bent.c).norm() < 1e-8);
    assert!((radial.d - bent.d).norm() < 1e-8);
}

#[test]
fn grid_reports_failures_in_place() {
    let g = Grid {
        re: [2.0, 4.0],
        im: [0.0, 0.0],
        nx: 3,
        ny: 1,
    };
    let rows = export_chart(&g, &cfg());
    assert_eq!(rows.len(), 3);
    assert!(rows[0].1.is_ok());
    assert!(rows[1].1.is_err(), "the critical value 3 is on the grid");
    let far = rows[2].1.as_ref().unwrap();
    assert_eq!(far.chamber_id, 3);
}

#[test]
fn four_chambers() {
    let mut seen = std::collections::BTreeSet::new();
    for k in 0..72 {
        for r in [1.0, 5.0] {
            seen.insert(chamber_id(C64::from_polar(r, k as f64 * 5.0_f64.to_radians())));
        }
    }
    assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
}
