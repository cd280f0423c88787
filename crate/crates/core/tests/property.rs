use cantor_forge_core::{compose_phi, Construction, Interval, IntervalUnion, Scalar};
use proptest::prelude::*;

/// Two-ratio rule with left piece l% and right piece r% of the parent.
fn homogeneous(lo: i64, width: i64, l: i64, r: i64) -> Construction {
    Construction::homogeneous(
        Interval::make(Scalar::from_int(lo), Scalar::from_int(lo + width)),
        Scalar::ratio(l, 100),
        Scalar::ratio(100 - r, 100),
    )
    .unwrap()
}

fn union_from(parts: &[(i64, i64)]) -> IntervalUnion {
    let parts = parts
        .iter()
        .map(|(lo, w)| Interval::make(Scalar::ratio(*lo, 10), Scalar::ratio(lo + w, 10)))
        .collect();
    IntervalUnion::normalize(parts, Scalar::zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covers_nest(
        l in 1i64..=45,
        r in 1i64..=45,
        lo in -5i64..5,
        width in 1i64..=10,
        depth in 1u32..=6,
    ) {
        let c = homogeneous(lo, width, l, r);
        let fine = c.cover(depth + 1).unwrap();
        let coarse = c.cover(depth).unwrap();
        prop_assert!(fine.subset_of(&coarse));
    }

    #[test]
    fn cover_width_is_exact(
        l in 1i64..=45,
        r in 1i64..=45,
        lo in -5i64..5,
        width in 1i64..=10,
        depth in 1u32..=8,
    ) {
        let c = homogeneous(lo, width, l, r);
        let mut total = Scalar::zero();
        for p in c.cover(depth).unwrap().parts() {
            total = &total + &p.diameter();
        }
        let keep = Scalar::ratio(l + r, 100);
        let expected = &c.diameter() * &keep.powi(depth);
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec((-100i64..100, 1i64..=50), 1..5),
        b in prop::collection::vec((-100i64..100, 1i64..=50), 1..5),
        c in prop::collection::vec((-100i64..100, 1i64..=50), 1..5),
    ) {
        let a = union_from(&a);
        let b = union_from(&b);
        let c = union_from(&c);
        prop_assert!(a.hausdorff(&a).unwrap().is_zero());
        let ab = a.hausdorff(&b).unwrap();
        prop_assert_eq!(&ab, &b.hausdorff(&a).unwrap());
        let ac = a.hausdorff(&c).unwrap();
        let bc = b.hausdorff(&c).unwrap();
        prop_assert!(ac <= &ab + &bc);
        if a.parts() != b.parts() {
            prop_assert!(ab.is_positive());
        }
    }

    #[test]
    fn minkowski_matches_pairwise_sums(
        a in prop::collection::vec((-100i64..100, 1i64..=50), 1..5),
        b in prop::collection::vec((-100i64..100, 1i64..=50), 1..5),
    ) {
        let a = union_from(&a);
        let b = union_from(&b);
        let sum = a.minkowski(&b);
        let mut pairwise = Vec::new();
        for p in a.parts() {
            for q in b.parts() {
                pairwise.push(Interval::make(p.lo() + q.lo(), p.hi() + q.hi()));
            }
        }
        let brute = IntervalUnion::normalize(pairwise, Scalar::zero());
        prop_assert_eq!(sum.parts(), brute.parts());
        // Spot membership: every pair of part midpoints sums into the set.
        for p in a.parts() {
            for q in b.parts() {
                let half = Scalar::ratio(1, 2);
                let mid = &(&(p.lo() + p.hi()) + &(q.lo() + q.hi())) * &half;
                prop_assert!(sum.contains_point(&mid));
            }
        }
    }

    #[test]
    fn composition_is_iterated_application(
        num in 1i64..100,
        betas in prop::collection::vec(-50i64..50, 1..8),
        x in -50i64..50,
    ) {
        let alpha = Scalar::ratio(num, 100);
        let betas: Vec<Scalar> = betas.iter().map(|b| Scalar::ratio(*b, 50)).collect();
        let x = Scalar::ratio(x, 50);
        let composed = compose_phi(&alpha, &betas, &x);
        let mut y = x;
        for b in &betas {
            y = &(&alpha * &y) + &(&(&Scalar::one() - &alpha) * b);
        }
        prop_assert_eq!(composed, y);
    }

    #[test]
    fn gaps_partition_the_complement(
        l in 1i64..=45,
        r in 1i64..=45,
        depth in 1u32..=6,
    ) {
        let c = homogeneous(0, 1, l, r);
        let cover = c.cover(depth).unwrap();
        let gaps = c.gaps_to_depth(depth).unwrap();
        // Cover pieces and gaps tile the root exactly.
        let mut total = Scalar::zero();
        for p in cover.parts() {
            total = &total + &p.diameter();
        }
        for g in &gaps {
            total = &total + &g.diameter();
        }
        prop_assert_eq!(total, c.diameter());
        prop_assert_eq!(gaps.len(), cover.count() - 1);
    }
}
