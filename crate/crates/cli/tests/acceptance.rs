//! End-to-end checks, one test per shipped guarantee. Each test prints a
//! single PASS line; a failed assertion is the FAIL signal.

use cantor_forge_core::{
    a_m, aprime, compose_phi, geometric_count, grid_minkowski, grid_second_gen, n_epsilon,
    sandwich_check, second_gen_attractor, sum_is_interval, union_construct, Construction,
    ContractionMap, FirstGen, GridSet, Ifs, Interval, IntervalUnion, Mode, Scalar,
    SecondGenOptions, TailCertificate,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn thirds(lo: i64, hi: i64) -> Construction {
    Construction::middle_thirds(Interval::make(
        Scalar::from_int(lo),
        Scalar::from_int(hi),
    ))
}

fn raster_thirds_depth8() -> GridSet {
    let h = 3f64.powi(-8);
    GridSet::rasterize(&thirds(0, 1).cover(8).unwrap(), 0.0, h).unwrap()
}

#[test]
fn criterion_1_triple_sum_certifies_interval() {
    let started = Instant::now();
    let cs = [thirds(0, 1), thirds(0, 1), thirds(0, 1)];
    let a = Scalar::ratio(1, 3);
    let cert = sum_is_interval(&cs, &a).unwrap();
    assert!(cert.certified);
    assert!(cert.exhaustive);
    assert_eq!(cert.value, Scalar::ratio(5, 4));
    assert_eq!(
        cert.interval,
        Some(Interval::make(Scalar::zero(), Scalar::from_int(3)))
    );

    // Grid route: three depth-8 covers sum without a single empty cell.
    let r = raster_thirds_depth8();
    let sum = grid_minkowski(&grid_minkowski(&r, &r).unwrap(), &r).unwrap();
    assert_eq!(sum.runs(), &[(0, 3 * 3i64.pow(8) - 1)]);

    assert!(started.elapsed().as_secs_f64() < 5.0);
    println!("criterion 1: PASS - triple thirds sum certified as [0, 3], value 5/4, grid full");
}

#[test]
fn criterion_2_double_sum_is_not_certified_yet_fills() {
    let cs = [thirds(0, 1), thirds(0, 1)];
    let a = Scalar::ratio(1, 3);
    let cert = sum_is_interval(&cs, &a).unwrap();
    assert!(!cert.certified);
    assert_eq!(cert.value, Scalar::ratio(7, 8));
    assert_eq!(cert.interval, None);

    // The criterion is sufficient, not necessary: the grid shows the sum
    // still fills [0, 2] without it.
    let r = raster_thirds_depth8();
    let sum = grid_minkowski(&r, &r).unwrap();
    assert_eq!(sum.runs(), &[(0, 2 * 3i64.pow(8) - 1)]);
    println!("criterion 2: PASS - two thirds refuse the certificate (7/8) but fill [0, 2]");
}

#[test]
fn criterion_3_floor_calculus_reference_values() {
    let third = Scalar::ratio(1, 3);
    assert_eq!(aprime(&third), Scalar::ratio(1, 12));
    assert_eq!(a_m(&third, 3).unwrap(), Scalar::ratio(1, 156));

    // Affine maps have no curvature penalty: the floor is the slope itself.
    let ifs = Ifs::new(vec![
        ContractionMap::affine(Scalar::ratio(1, 4), Scalar::zero()).unwrap(),
        ContractionMap::affine(Scalar::ratio(1, 4), Scalar::ratio(3, 4)).unwrap(),
    ])
    .unwrap();
    assert_eq!(ifs.ratio_floor().unwrap(), Scalar::ratio(1, 4));
    println!("criterion 3: PASS - aprime(1/3) = 1/12, a_3(1/3) = 1/156, affine floor = slope");
}

#[test]
fn criterion_4_composition_matches_literal_iteration() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        let alpha = Scalar::ratio(rng.gen_range(1..100), 100);
        let k = rng.gen_range(1..=8);
        let betas: Vec<Scalar> = (0..k)
            .map(|_| Scalar::ratio(rng.gen_range(-50..50), 50))
            .collect();
        let x = Scalar::ratio(rng.gen_range(-50..50), 50);

        let composed = compose_phi(&alpha, &betas, &x);
        // Literal iteration: betas are applied first to last.
        let mut y = x.clone();
        for b in &betas {
            y = &(&alpha * &y) + &(&(&Scalar::one() - &alpha) * b);
        }
        assert_eq!(composed, y);
        assert!((composed.to_f64() - y.to_f64()).abs() <= 1e-12);
    }
    assert!(started.elapsed().as_secs_f64() < 1.0);
    println!("criterion 4: PASS - 1000 random compositions agree exactly and in f64");
}

fn symmetric_thirds() -> (Ifs, FirstGen) {
    let ifs = Ifs::new(vec![
        ContractionMap::affine(Scalar::ratio(1, 3), Scalar::ratio(-2, 3)).unwrap(),
        ContractionMap::affine(Scalar::ratio(1, 3), Scalar::ratio(2, 3)).unwrap(),
    ])
    .unwrap();
    let fg = FirstGen::from_ifs(&ifs, &Scalar::ratio(1, 1024)).unwrap();
    (ifs, fg)
}

#[test]
fn criterion_5_symmetric_system_end_to_end() {
    let started = Instant::now();
    let (ifs, fg) = symmetric_thirds();
    let alpha = Scalar::ratio(9, 20);
    let opts = SecondGenOptions::new(alpha.clone());
    let res = second_gen_attractor(&fg, &opts).unwrap();
    let one = Scalar::one();
    assert_eq!(res.hull, Interval::make(-&one, one.clone()));

    let grid = grid_second_gen(&ifs, 0.45, 1e-4, 8, 10_000).unwrap();
    let d = res.set.hausdorff(&grid.to_union()).unwrap();
    assert!(d.to_f64() <= 5e-3, "grid disagrees by {}", d.to_f64());

    let sw = sandwich_check(&fg, &alpha, &res.set, 6).unwrap();
    assert!(sw.inner_ok && sw.outer_ok);

    let windows = n_epsilon(&fg, &alpha, &Scalar::ratio(1, 100)).unwrap();
    for w in &windows {
        assert!(!res.set.meets_open_interval(w));
    }

    // Same system through the binary.
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("job.json");
    std::fs::write(
        &spec,
        r#"{
  "system": { "kind": "maps", "maps": [
    { "kind": "affine", "slope": "1/3", "intercept": "-2/3" },
    { "kind": "affine", "slope": "1/3", "intercept": "2/3" }
  ] },
  "alpha": "9/20",
  "eps": "1/100"
}"#,
    )
    .unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_cantor-forge"))
        .args(["second-gen", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(dir.path())
        .arg("--svg")
        .status()
        .unwrap();
    assert!(status.success());
    for artifact in ["intervals.txt", "intervals.csv", "report.json", "plot.svg"] {
        assert!(dir.path().join(artifact).exists(), "missing {artifact}");
    }
    let text = std::fs::read_to_string(dir.path().join("intervals.txt")).unwrap();
    let cli_set = IntervalUnion::parse_text(&text, Scalar::zero()).unwrap();
    assert_eq!(cli_set.parts(), res.set.parts());

    assert!(started.elapsed().as_secs_f64() < 60.0);
    println!("criterion 5: PASS - alpha 9/20 attractor matches the grid and the binary");
}

#[test]
fn criterion_6_deeper_heads_do_not_move_the_answer() {
    let (_, fg) = symmetric_thirds();

    // Exact data: two extra head terms leave the set within 1e-9.
    let mut opts = SecondGenOptions::new(Scalar::ratio(9, 20));
    let auto = second_gen_attractor(&fg, &opts).unwrap();
    opts.n = Some(auto.n_used + 2);
    let deeper = second_gen_attractor(&fg, &opts).unwrap();
    let d = auto.set.hausdorff(&deeper.set).unwrap();
    assert!(d.to_f64() <= 1e-9, "exact drift {}", d.to_f64());

    // Float data: the same bound relaxes to 1e-6.
    let mut fopts = SecondGenOptions::new(Scalar::from_f64(0.45));
    let fauto = second_gen_attractor(&fg, &fopts).unwrap();
    fopts.n = Some(fauto.n_used + 2);
    let fdeeper = second_gen_attractor(&fg, &fopts).unwrap();
    let fd = fauto.set.hausdorff(&fdeeper.set).unwrap();
    assert!(fd.to_f64() <= 1e-6, "float drift {}", fd.to_f64());
    println!("criterion 6: PASS - head growth past stabilization moves nothing");
}

#[test]
fn criterion_7_smooth_floor_certified_and_respected() {
    let started = Instant::now();
    let unit = Interval::unit();
    let ifs = Ifs::new(vec![
        ContractionMap::quadratic(0.0, 0.3, 0.05, unit.clone()).unwrap(),
        ContractionMap::quadratic(0.65, 0.4, -0.05, unit).unwrap(),
    ])
    .unwrap();
    let c = ifs.ratio_floor().unwrap();
    let closed_form = 0.3 * f64::exp(-0.1 / (0.3 * (1.0 - 0.4)));
    assert!((c.to_f64() - closed_form).abs() <= 1e-12);

    let tree = match ifs.two_map_construction().unwrap() {
        cantor_forge_core::TwoMapOutcome::Cantor(t) => t,
        other => panic!("expected a separated system, got {other:?}"),
    };
    let bound = tree.ulbd_bound(10).unwrap();
    assert!(bound.bound >= c, "ratio {} fell below floor {c}", bound.bound);

    assert!(started.elapsed().as_secs_f64() < 5.0);
    println!(
        "criterion 7: PASS - smooth floor c = {closed_form:.5} holds for every ratio to depth 10"
    );
}

#[test]
fn criterion_8_union_tree_reproduces_both_inputs() {
    let left = thirds(0, 1);
    let right = thirds(2, 3);
    let (u, plan) = union_construct(&left, &right).unwrap();

    let shift = plan.n_bar + 1;
    for n in (plan.n_bar + 1)..=(plan.n_bar + 6) {
        let fine: Vec<Interval> = left
            .cover(n)
            .unwrap()
            .parts()
            .iter()
            .chain(right.cover(n).unwrap().parts())
            .cloned()
            .collect();
        let mid = u.cover(n).unwrap();
        assert!(IntervalUnion::exact(fine).subset_of(&mid));
        if n >= shift {
            let coarse: Vec<Interval> = left
                .cover(n - shift)
                .unwrap()
                .parts()
                .iter()
                .chain(right.cover(n - shift).unwrap().parts())
                .cloned()
                .collect();
            assert!(mid.subset_of(&IntervalUnion::exact(coarse)));
        }
    }

    let bound = u.ulbd_bound(10).unwrap();
    assert!(bound.bound >= Scalar::ratio(1, 12));

    // The union's gaps are exactly the separating gap plus both inputs'
    // gaps, level by level.
    let mut expected = vec![Interval::make(Scalar::one(), Scalar::from_int(2))];
    expected.extend(left.gaps_to_depth(4).unwrap());
    expected.extend(right.gaps_to_depth(4).unwrap());
    expected.sort_by(|p, q| p.lo().partial_cmp(q.lo()).unwrap());
    let mut got = u.gaps_to_depth(5).unwrap();
    got.sort_by(|p, q| p.lo().partial_cmp(q.lo()).unwrap());
    assert_eq!(got, expected);
    println!("criterion 8: PASS - union tree nests both inputs and keeps their gaps exactly");
}

#[test]
fn criterion_9_merging_count_reference() {
    let one = Scalar::one();
    let third = Scalar::ratio(1, 3);
    assert_eq!(geometric_count(&one, &one, &third).unwrap(), 204);
    println!("criterion 9: PASS - geometric head count for (1, 1, 1/3) is 204");
}

#[test]
fn certified_mode_reaches_the_fold_count() {
    // Companion to criterion 9: the certified pipeline actually grows the
    // head to the fold count and still lands on the exact interval.
    let fg = FirstGen::from_construction(thirds(0, 1));
    let mut opts = SecondGenOptions::new(Scalar::ratio(1, 2));
    opts.mode = Mode::Certified;
    let res = second_gen_attractor(&fg, &opts).unwrap();
    match res.certificate {
        TailCertificate::FoldCount { n_cert, .. } => assert_eq!(n_cert, 204),
        other => panic!("expected a fold-count certificate, got {other:?}"),
    }
    assert_eq!(res.set.parts(), &[Interval::unit()]);
}
