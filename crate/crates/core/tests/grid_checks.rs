//! Pipeline results against the independent grid, on systems where neither
//! side is trivial.

use cantor_forge_core::{
    grid_attractor, grid_minkowski, grid_second_gen, partial_geometric_sum, second_gen_attractor,
    Construction, ContractionMap, FirstGen, GridSet, Ifs, Interval, Scalar, SecondGenOptions,
};

fn symmetric_thirds_ifs() -> Ifs {
    Ifs::new(vec![
        ContractionMap::affine(Scalar::ratio(1, 3), Scalar::ratio(-2, 3)).unwrap(),
        ContractionMap::affine(Scalar::ratio(1, 3), Scalar::ratio(2, 3)).unwrap(),
    ])
    .unwrap()
}

fn symmetric_thirds() -> FirstGen {
    FirstGen::from_ifs(&symmetric_thirds_ifs(), &Scalar::ratio(1, 1024)).unwrap()
}

#[test]
fn partial_sum_witnesses_stay_inside() {
    let fg = symmetric_thirds();
    let alpha = Scalar::ratio(9, 20);
    let (outer, inner) = partial_geometric_sum(&fg, &alpha, 6, 6).unwrap();
    let hull = outer.hull().unwrap();
    // Head hull is (1 - alpha^6) scaled: +-(1 - (9/20)^6).
    let expected = &Scalar::one() - &Scalar::ratio(9, 20).powi(6);
    assert_eq!(hull.hi(), &expected);
    assert_eq!(hull.lo(), &-&expected);
    assert!(!inner.is_empty());
    for p in &inner {
        assert!(outer.contains_point(p));
    }
}

#[test]
fn fractal_second_stage_matches_grid() {
    let fg = symmetric_thirds();
    let alpha = Scalar::ratio(1, 10);
    let res = second_gen_attractor(&fg, &SecondGenOptions::new(alpha)).unwrap();
    assert!(res.set.count() > 1, "this case must stay fractal");
    let grid = grid_second_gen(&symmetric_thirds_ifs(), 0.1, 1e-4, 8, 10_000).unwrap();
    let d = res.set.hausdorff(&grid.to_union()).unwrap();
    assert!(d.to_f64() <= 1e-3, "grid distance {}", d.to_f64());
}

#[test]
fn grid_refinement_approaches_the_cover() {
    let ifs = Ifs::new(vec![
        ContractionMap::affine(Scalar::ratio(1, 3), Scalar::zero()).unwrap(),
        ContractionMap::affine(Scalar::ratio(1, 3), Scalar::ratio(2, 3)).unwrap(),
    ])
    .unwrap();
    let truth = Construction::middle_thirds(Interval::unit()).cover(10).unwrap();
    let mut last = f64::INFINITY;
    for k in 4..=7 {
        let h = 3f64.powi(-k);
        let grid = grid_attractor(&ifs, h, 10_000).unwrap();
        let d = truth.hausdorff(&grid.to_union()).unwrap().to_f64();
        assert!(d <= last + 1e-12, "refinement went backwards at 3^-{k}");
        last = d;
    }
    assert!(last <= 3f64.powi(-7));
}

#[test]
fn grid_sum_tracks_the_exact_sum() {
    let cover = Construction::middle_thirds(Interval::unit()).cover(6).unwrap();
    let exact = cover.minkowski(&cover);
    let h = 3f64.powi(-6);
    let raster = GridSet::rasterize(&cover, 0.0, h).unwrap();
    let grid = grid_minkowski(&raster, &raster).unwrap();
    let d = exact.hausdorff(&grid.to_union()).unwrap().to_f64();
    assert!(d <= 2.0 * h, "grid sum distance {d}");
}
