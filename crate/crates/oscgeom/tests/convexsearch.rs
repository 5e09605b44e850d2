use oscgeom::convexsearch::{
    max_convex_exact, max_convex_exact_capped, max_convex_heuristic, max_convex_planar, Method,
};
use oscgeom::cupcap::{cupcap_decompose, is_regular, pi_boundary};
use oscgeom::denseset::build_perturbed_grid;
use oscgeom::exactgeom::{is_convex_independent, is_general_position, rat};
use oscgeom::{PointSet, RatPoint};
use proptest::prelude::*;

fn ints(d: usize, v: &[Vec<i64>]) -> PointSet {
    PointSet::from_ints(d, v).unwrap()
}

fn polygon(n: usize) -> PointSet {
    let v: Vec<Vec<i64>> = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            vec![(1e6 * t.cos()).round() as i64, (1e6 * t.sin()).round() as i64]
        })
        .collect();
    ints(2, &v)
}

#[test]
fn convex_position_keeps_everything() {
    let p = polygon(12);
    assert_eq!(max_convex_exact(&p).unwrap().size, 12);
    assert_eq!(max_convex_planar(&p).unwrap().size, 12);
    assert_eq!(max_convex_heuristic(&p, 2).unwrap().size, 12);
}

#[test]
fn square_with_center() {
    let mut v: Vec<RatPoint> = ints(2, &[vec![0, 0], vec![1, 0], vec![1, 1], vec![0, 1]]).into_points();
    v.push(RatPoint::new(vec![rat(1, 2), rat(1, 3)]));
    let p = PointSet::new(2, v).unwrap();
    let e = max_convex_exact(&p).unwrap();
    assert_eq!(e.size, 4);
    assert_eq!(e.indices, vec![0, 1, 2, 3]);
    assert!(e.exact);
    assert_eq!(max_convex_planar(&p).unwrap().size, 4);
}

#[test]
fn spatial_exact_search() {
    // Six points on the moment curve are in convex position; a seventh nearby may or may not be.
    let mut v: Vec<Vec<i64>> = (1..=6).map(|t| vec![2 * t, 2 * t * t, 2 * t * t * t]).collect();
    v.push(vec![8, 33, 160]);
    let p = ints(3, &v);
    assert!(is_general_position(&p));
    let e = max_convex_exact(&p).unwrap();
    assert_eq!(e.size, if is_convex_independent(&p) { 7 } else { 6 });
    assert_eq!(e.d, 3);
    let h = max_convex_heuristic(&p, 3).unwrap();
    assert!(h.size <= e.size && !h.exact);
}

#[test]
fn input_errors() {
    assert!(max_convex_exact_capped(&polygon(21), 20).is_err());
    assert!(max_convex_exact(&polygon(21)).is_err());
    let collinear = ints(2, &[vec![0, 0], vec![1, 1], vec![2, 2], vec![5, 0]]);
    assert!(max_convex_planar(&collinear).is_err());
    assert!(max_convex_exact(&collinear).is_err());
    assert!(max_convex_planar(&ints(3, &[vec![0, 0, 0], vec![1, 2, 3]])).is_err());
}

#[test]
fn report_json_shape() {
    let r = max_convex_planar(&polygon(5)).unwrap();
    assert_eq!(r.method, Method::PlanarDp);
    let j = serde_json::to_value(&r).unwrap();
    assert_eq!(j["method"], "planar-dp");
    assert_eq!(j["size"], 5);
}

#[test]
fn grid_subsets_decompose_consistently() {
    let g = build_perturbed_grid(2, 10, &rat(1, 4), 1).unwrap();
    for r in [max_convex_planar(&g.points).unwrap(), max_convex_heuristic(&g.points, 2).unwrap()] {
        let c = g.points.select(&r.indices);
        assert!(is_convex_independent(&c));
        if is_regular(&c).is_pass() {
            let dec = cupcap_decompose(&c).unwrap();
            assert_eq!(dec.c_a.len() + dec.c_b.len(), c.len() + pi_boundary(&c).unwrap().len());
        }
    }
}

#[test]
fn heuristic_on_a_spatial_grid() {
    let g = build_perturbed_grid(3, 4, &rat(1, 4), 1).unwrap();
    let one = max_convex_heuristic(&g.points, 1).unwrap();
    let three = max_convex_heuristic(&g.points, 3).unwrap();
    assert!(three.size >= one.size && one.size >= 8);
    assert!(is_convex_independent(&g.points.select(&three.indices)));
}

fn random_planar(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-1_000_000i64..=1_000_000, 2), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planar_dp_matches_exhaustive_search(v in random_planar(10..=16)) {
        let p = PointSet::from_ints(2, &v);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        prop_assume!(is_general_position(&p));
        let e = max_convex_exact(&p).unwrap();
        let d = max_convex_planar(&p).unwrap();
        prop_assert_eq!(e.size, d.size);
        prop_assert!(d.exact && e.exact);
        prop_assert!(is_convex_independent(&p.select(&d.indices)));
        prop_assert!(is_convex_independent(&p.select(&e.indices)));
    }

    #[test]
    fn heuristic_is_a_lower_bound_and_monotone(v in random_planar(8..=14), seeds in 1usize..=3) {
        let p = PointSet::from_ints(2, &v);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        prop_assume!(is_general_position(&p));
        let e = max_convex_exact(&p).unwrap();
        let h = max_convex_heuristic(&p, seeds).unwrap();
        let h2 = max_convex_heuristic(&p, seeds + 1).unwrap();
        prop_assert!(h.size <= e.size);
        prop_assert!(h2.size >= h.size);
        prop_assert!(is_convex_independent(&p.select(&h.indices)));
        prop_assert_eq!(&max_convex_heuristic(&p, seeds).unwrap().indices, &h.indices);
    }
}
