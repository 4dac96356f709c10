use proptest::prelude::*;
use thimble_core::cps_model::*;
use thimble_core::homology::*;

fn m(e: [[i64; 2]; 2]) -> MonodromyMatrix {
    MonodromyMatrix::new(e).unwrap()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn local_monodromies_match_the_listed_matrices() {
    let [a, b, c] = local_monodromies();
    assert_eq!(a.entries(), [[-1, -1], [4, 3]]);
    assert_eq!(b.entries(), [[2, -1], [1, 0]]);
    // third one straight from v + <delta, v> delta with delta = -2c + d
    let delta = [-2i64, 1];
    let mut cols = [[0i64; 2]; 2];
    for (k, col) in cols.iter_mut().enumerate() {
        let v = [(k == 0) as i64, (k == 1) as i64];
        let pairing = delta[1] * v[0] - delta[0] * v[1];
        *col = [v[0] + pairing * delta[0], v[1] + pairing * delta[1]];
    }
    assert_eq!(c.entries(), [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]);
    assert_eq!(c.entries(), [[-1, -4], [1, 3]]);
    assert_eq!((c * b * a).entries(), [[10, 9], [-9, -8]]);
    assert_eq!(total_monodromy().entries(), [[10, 9], [-9, -8]]);
}

#[test]
fn glue_maps_are_transposed_monodromies() {
    let atlas = build_atlas();
    for (sp, mono) in atlas.points.iter().zip(local_monodromies()) {
        assert_eq!(sp.glue.linear, mono.transpose(), "{}", sp.name);
        assert_eq!(sp.glue.apply(sp.position), sp.position);
    }
    let r = verify_isomorphism(&atlas, None).unwrap();
    assert!(r.transposes.iter().all(|t| t.picard_lefschetz.transpose() == t.glue));
}

#[test]
fn conjugation_is_an_involution() {
    let s = conjugation_action();
    assert_eq!((s * s).entries(), [[1, 0], [0, 1]]);
    assert_eq!(s.apply(HomologyClass::cd(1, -2)), HomologyClass::cd(-1, 2));
    // conjugation fixes A and swaps B with C, reversing orientation
    let [a, b, c] = local_monodromies();
    assert_eq!(s * a * s, a.inverse());
    assert_eq!(s * b * s, c.inverse());
    assert_eq!((s * total_monodromy() * s).trace(), total_monodromy().trace());
}

#[test]
fn rotation_cycles_vanishing_classes() {
    let r = rotation_action();
    assert_eq!(r.pow(3), m([[1, 0], [0, 1]]));
    for j in 0..3 {
        assert_eq!(r.apply(vanishing_cycle(j, Basis::CD)), vanishing_cycle((j + 1) % 3, Basis::CD));
    }
}

#[test]
fn invariant_lines_and_triangle() {
    let atlas = build_atlas();
    assert_eq!(atlas.invariant_directions(), [[2, 1], [1, -1], [1, 2]]);
    let q = |n, d| Q::new(n, d);
    let v = atlas.triangle_vertices();
    assert_eq!(v, [[q(0, 1), q(1, 1)], [q(-1, 1), q(-1, 1)], [q(1, 1), q(0, 1)]]);
}

fn prim() -> impl Strategy<Value = (i64, i64)> {
    (-12i64..=12, -12i64..=12).prop_filter("primitive", |(p, q)| gcd(*p, *q) == 1)
}

fn small_point() -> impl Strategy<Value = Point> {
    (-24i64..=24, -24i64..=24, 1i64..=4).prop_map(|(a, b, d)| [Q::new(a, d), Q::new(b, d)])
}

fn inside(tri: &[Point; 3], p: Point) -> Option<bool> {
    let cr = |a: Point, b: Point, c: Point| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let s = [cr(tri[0], tri[1], p), cr(tri[1], tri[2], p), cr(tri[2], tri[0], p)];
    if s.iter().any(|x| *x == Q::from_integer(0)) {
        return None;
    }
    Some(s.iter().all(|x| *x > Q::from_integer(0)) || s.iter().all(|x| *x < Q::from_integer(0)))
}

proptest! {
    #[test]
    fn picard_lefschetz_fixes_its_cycle((p, q) in prim(), (x, y) in (-50i64..50, -50i64..50)) {
        let d = HomologyClass::cd(p, q);
        let t = picard_lefschetz(d);
        prop_assert_eq!(t.det(), 1);
        prop_assert_eq!(t.trace(), 2);
        prop_assert_eq!(t.apply(d), d);
        prop_assert_eq!(t.content_minus_identity(), 1);
        let v = HomologyClass::cd(x, y);
        let k = intersection(d, v).unwrap();
        prop_assert_eq!(t.apply(v), v + d.scale(k));
        prop_assert_eq!(picard_lefschetz(-d), t);
    }

    #[test]
    fn intersection_is_alternating(a in (-30i64..30, -30i64..30), b in (-30i64..30, -30i64..30), c in (-30i64..30, -30i64..30)) {
        let (a, b, c) = (HomologyClass::cd(a.0, a.1), HomologyClass::cd(b.0, b.1), HomologyClass::cd(c.0, c.1));
        prop_assert_eq!(intersection(a, a).unwrap(), 0);
        prop_assert_eq!(intersection(a, b).unwrap(), -intersection(b, a).unwrap());
        prop_assert_eq!(intersection(a + b, c).unwrap(), intersection(a, c).unwrap() + intersection(b, c).unwrap());
        let ab = a.to_basis(Basis::AB);
        prop_assert_eq!(ab.to_basis(Basis::CD), a);
        prop_assert_eq!(intersection(ab, b.to_basis(Basis::AB)).unwrap(), intersection(a, b).unwrap());
    }

    #[test]
    fn matrices_preserve_the_pairing(j in 0usize..3, a in (-30i64..30, -30i64..30), b in (-30i64..30, -30i64..30)) {
        let t = local_monodromies()[j];
        let (a, b) = (HomologyClass::cd(a.0, a.1), HomologyClass::cd(b.0, b.1));
        prop_assert_eq!(intersection(t.apply(a), t.apply(b)).unwrap(), intersection(a, b).unwrap());
        prop_assert_eq!(t * t.inverse(), m([[1, 0], [0, 1]]));
    }

    #[test]
    fn developing_is_functorial(p in prop::collection::vec(small_point(), 2..6), q in prop::collection::vec(small_point(), 1..6)) {
        let atlas = build_atlas();
        let mut joined = p.clone();
        joined.extend(q.iter().copied());
        let mut second = vec![*p.last().unwrap()];
        second.extend(q.iter().copied());
        let (d1, d2, d) = (atlas.develop(&p), atlas.develop(&second), atlas.develop(&joined));
        prop_assume!(d1.is_ok() && d2.is_ok() && d.is_ok());
        let (d1, d2, d) = (d1.unwrap(), d2.unwrap(), d.unwrap());
        prop_assert_eq!(d.holonomy, d1.holonomy.compose(&d2.holonomy));
        prop_assert_eq!(*d.output.last().unwrap(), d1.holonomy.compose(&d2.holonomy).apply(*joined.last().unwrap()));
    }

    #[test]
    fn triangle_loops(a in small_point(), b in small_point(), c in small_point()) {
        let atlas = build_atlas();
        let tri = [a, b, c];
        let flags: Vec<Option<bool>> = atlas.points.iter().map(|sp| inside(&tri, sp.position)).collect();
        prop_assume!(flags.iter().all(|f| f.is_some()));
        let h = atlas.holonomy(&[a, b, c, a]);
        prop_assume!(h.is_ok());
        let h = h.unwrap();
        let n = flags.iter().filter(|f| **f == Some(true)).count();
        match n {
            0 => prop_assert_eq!(h, AffineMap::identity()),
            1 => {
                prop_assert_eq!(h.linear.trace(), 2);
                prop_assert_eq!(h.linear.content_minus_identity(), 1);
            }
            2 => prop_assert_ne!(h.linear, m([[1, 0], [0, 1]])),
            _ => {
                prop_assert_eq!(h.linear.trace(), 2);
                prop_assert_eq!(h.linear.content_minus_identity(), 9);
            }
        }
    }

    #[test]
    fn affine_maps_invert(k in 0usize..3, p in small_point()) {
        let g = build_atlas().points[k].glue;
        prop_assert_eq!(g.inverse().apply(g.apply(p)), p);
        prop_assert_eq!(g.compose(&g.inverse()), AffineMap::identity());
    }
}
