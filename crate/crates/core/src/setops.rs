//! Set-level operations on Cantor constructions: disjoint unions, Minkowski
//! sums, and the constants that certify ratio floors for the results.

use crate::dissection::{build_sum, build_union, Construction, UnionPlan};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;

/// Floor inherited by a union or sum layer built over inputs of floor a:
/// min(a/2, a²/(a+1)).
pub fn aprime(a: &Scalar) -> Scalar {
    let sq = &(a * a) / &(a + &Scalar::one());
    Scalar::min_of(&a.half(), &sq)
}

/// Worst-case floor after stacking m layers: a₁ = a, a_{k+1} = a'(min(a, a_k)).
pub fn a_m(a: &Scalar, m: u32) -> Result<Scalar> {
    if m < 1 {
        return Err(Error::Input("layer count must be ≥ 1".into()));
    }
    if m > 32 {
        return Err(Error::Budget(format!("floor recursion depth {m} too deep")));
    }
    let mut cur = a.clone();
    for _ in 1..m {
        cur = aprime(&Scalar::min_of(a, &cur));
    }
    Ok(cur)
}

/// Separation constant for two disjoint certified sets laid out as
/// lo_root strictly left of hi_root with floors f_lo, f_hi:
/// min{d(lo)/(min hi − min lo), d(hi)/(max hi − max lo), f_lo, f_hi}.
pub(crate) fn separation_values(
    lo_root: &Interval,
    hi_root: &Interval,
    f_lo: &Scalar,
    f_hi: &Scalar,
) -> Scalar {
    let q1 = &lo_root.diameter() / &(hi_root.lo() - lo_root.lo());
    let q2 = &hi_root.diameter() / &(hi_root.hi() - lo_root.hi());
    Scalar::min_of(&Scalar::min_of(&q1, &q2), &Scalar::min_of(f_lo, f_hi))
}

/// Separation constant for c1 strictly left of c2, with caller-supplied
/// ratio floors a1, a2.
pub fn separation_constant_with_floors(
    c1: &Construction,
    c2: &Construction,
    a1: &Scalar,
    a2: &Scalar,
) -> Result<Scalar> {
    if !(c1.max() < c2.min()) {
        return Err(Error::Overlap(c1.root().to_string(), c2.root().to_string()));
    }
    Ok(separation_values(c1.root(), c2.root(), a1, a2))
}

/// The separation constant for two disjoint certified constructions,
/// ordered automatically.
pub fn separation_constant(c1: &Construction, c2: &Construction) -> Result<Scalar> {
    let f1 = c1
        .floor()
        .ok_or_else(|| Error::Certificate("input lacks a ratio floor".into()))?;
    let f2 = c2
        .floor()
        .ok_or_else(|| Error::Certificate("input lacks a ratio floor".into()))?;
    if c1.max() < c2.min() {
        Ok(separation_values(c1.root(), c2.root(), f1, f2))
    } else if c2.max() < c1.min() {
        Ok(separation_values(c2.root(), c1.root(), f2, f1))
    } else {
        Err(Error::Overlap(c1.root().to_string(), c2.root().to_string()))
    }
}

/// A single construction whose limit set is exactly the union of the two
/// disjoint inputs, with floor a' = aprime(separation constant).
pub fn union_construct(
    c1: &Construction,
    c2: &Construction,
) -> Result<(Construction, UnionPlan)> {
    build_union(c1.clone(), c2.clone())
}

/// A construction whose limit set is a subset of the Minkowski sum of the
/// inputs containing all endpoint sums. Each input must carry a ratio
/// floor ≥ a; the result floor is at least a_m(a, m).
pub fn sum_subset_construct(cs: &[Construction], a: &Scalar) -> Result<Construction> {
    if cs.is_empty() {
        return Err(Error::Input("sum needs at least one construction".into()));
    }
    for c in cs {
        let f = c
            .floor()
            .ok_or_else(|| Error::Certificate("sum input lacks a ratio floor".into()))?;
        if f < a {
            return Err(Error::Certificate(format!(
                "sum input floor {f} is below the claimed bound {a}"
            )));
        }
    }
    let mut acc = cs[0].clone();
    for c in &cs[1..] {
        acc = build_sum(acc, c.clone())?;
    }
    Ok(acc)
}

/// Exact value of the m-summand filling expression (m−1)·a²/(1−a)³ + a/(1−a).
pub fn filling_value(a: &Scalar, m: u32) -> Result<Scalar> {
    if !(a.is_positive() && a < &Scalar::one()) {
        return Err(Error::Input(format!("floor {a} outside (0, 1)")));
    }
    if m < 1 {
        return Err(Error::Input("summand count must be ≥ 1".into()));
    }
    let rem = &Scalar::one() - a;
    let lead = &(&Scalar::from_int((m - 1) as i64) * &(a * a)) / &rem.powi(3);
    Ok(&lead + &(a / &rem))
}

/// Sufficient filling test for a sum of m sets with ratio floor a. The
/// inequality is only valid for a ≤ 1/3, so larger floors are clamped
/// (a smaller certified floor stays a certified floor).
pub fn filling_check(a: &Scalar, m: u32) -> Result<bool> {
    let clamped = Scalar::min_of(a, &Scalar::ratio(1, 3));
    Ok(filling_value(&clamped, m)? >= Scalar::one())
}

/// Verdict on whether the Minkowski sum of the inputs fills the whole
/// interval between the summed endpoints. Certification needs the clamped
/// filling value ≥ 1 and every gap narrower than every diameter, searched
/// exhaustively; a false verdict is not a disproof.
#[derive(Clone, Debug)]
pub struct IntervalCertificate {
    pub certified: bool,
    pub a_used: Scalar,
    pub m: u32,
    pub value: Scalar,
    pub min_diameter: Scalar,
    pub max_gap: Scalar,
    pub exhaustive: bool,
    pub interval: Option<Interval>,
}

pub fn sum_is_interval(cs: &[Construction], a: &Scalar) -> Result<IntervalCertificate> {
    if cs.is_empty() {
        return Err(Error::Input("sum needs at least one construction".into()));
    }
    let m = u32::try_from(cs.len()).map_err(|_| Error::Input("too many summands".into()))?;
    for c in cs {
        let f = c
            .floor()
            .ok_or_else(|| Error::Certificate("sum input lacks a ratio floor".into()))?;
        if f < a {
            return Err(Error::Certificate(format!(
                "sum input floor {f} is below the claimed bound {a}"
            )));
        }
    }
    let mut min_diameter = cs[0].diameter();
    let mut max_gap = Scalar::zero();
    let mut exhaustive = true;
    for c in cs {
        min_diameter = Scalar::min_of(&min_diameter, &c.diameter());
        let (g, ex) = c.max_gap(64)?;
        max_gap = Scalar::max_of(&max_gap, &g);
        exhaustive = exhaustive && ex;
    }
    let a_used = Scalar::min_of(a, &Scalar::ratio(1, 3));
    let value = filling_value(&a_used, m)?;
    let certified = value >= Scalar::one() && min_diameter > max_gap && exhaustive;
    let interval = certified.then(|| {
        let mut lo = Scalar::zero();
        let mut hi = Scalar::zero();
        for c in cs {
            lo = &lo + &c.min();
            hi = &hi + &c.max();
        }
        Interval::make(lo, hi)
    });
    Ok(IntervalCertificate {
        certified,
        a_used,
        m,
        value,
        min_diameter,
        max_gap,
        exhaustive,
        interval,
    })
}

/// Number of consecutive geometric summands guaranteed to merge into an
/// interval, given that every piece diameter lies in [a1, a2] and every
/// summand is a-certified: bundle m pieces until m·a1 > a2, stack the
/// floor recursion to b = min(a_m, 1/3), then take the smallest H with
/// H·b²/(1−b)³ + b/(1−b) ≥ 1 and return m(H + 1).
pub fn geometric_count(a1: &Scalar, a2: &Scalar, a: &Scalar) -> Result<u32> {
    if !(a1.is_positive() && a2 >= a1) {
        return Err(Error::Input("need 0 < a1 ≤ a2".into()));
    }
    if !(a.is_positive() && a < &Scalar::one()) {
        return Err(Error::Input(format!("floor {a} outside (0, 1)")));
    }
    // Smallest m with m·a1 strictly above a2.
    let m64 = floor_to_u64(&(a2 / a1))? + 1;
    let m = u32::try_from(m64)
        .map_err(|_| Error::Budget("piece-diameter spread too wide".into()))?;
    let b = Scalar::min_of(&a_m(a, m)?, &Scalar::ratio(1, 3));
    let one = Scalar::one();
    let rem = &one - &b;
    let unit = &(&b * &b) / &rem.powi(3);
    let tail = &b / &rem;
    let need = &one - &tail;
    // Smallest H with H·unit ≥ need (0 when the tail term already fills).
    let h = if need.is_positive() {
        ceil_to_u64(&(&need / &unit))?
    } else {
        0
    };
    let total = (h + 1)
        .checked_mul(m64)
        .ok_or_else(|| Error::Budget("fold count overflow".into()))?;
    u32::try_from(total).map_err(|_| Error::Budget("fold count overflow".into()))
}

fn floor_to_u64(x: &Scalar) -> Result<u64> {
    use num_traits::ToPrimitive;
    match x.as_exact() {
        Some(r) => r
            .floor()
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::Budget("count does not fit in u64".into())),
        None => {
            let f = x.to_f64().floor();
            if f.is_finite() && (0.0..9.0e18).contains(&f) {
                Ok(f as u64)
            } else {
                Err(Error::Budget("count does not fit in u64".into()))
            }
        }
    }
}

fn ceil_to_u64(x: &Scalar) -> Result<u64> {
    use num_traits::ToPrimitive;
    match x.as_exact() {
        Some(r) => r
            .ceil()
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::Budget("count does not fit in u64".into())),
        None => {
            let f = x.to_f64().ceil();
            if f.is_finite() && (0.0..9.0e18).contains(&f) {
                Ok(f as u64)
            } else {
                Err(Error::Budget("count does not fit in u64".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::BinaryWord;

    fn thirds(lo: i64, hi: i64) -> Construction {
        Construction::middle_thirds(Interval::make(
            Scalar::from_int(lo),
            Scalar::from_int(hi),
        ))
    }

    #[test]
    fn floor_recursion_values() {
        let third = Scalar::ratio(1, 3);
        assert_eq!(aprime(&third), Scalar::ratio(1, 12));
        assert_eq!(aprime(&Scalar::ratio(1, 12)), Scalar::ratio(1, 156));
        assert_eq!(a_m(&third, 1).unwrap(), third);
        assert_eq!(a_m(&third, 2).unwrap(), Scalar::ratio(1, 12));
        assert_eq!(a_m(&third, 3).unwrap(), Scalar::ratio(1, 156));
    }

    #[test]
    fn separation_of_disjoint_thirds() {
        let a = separation_constant(&thirds(0, 1), &thirds(2, 3)).unwrap();
        assert_eq!(a, Scalar::ratio(1, 3));
        // Order independence.
        let b = separation_constant(&thirds(2, 3), &thirds(0, 1)).unwrap();
        assert_eq!(b, Scalar::ratio(1, 3));
    }

    #[test]
    fn separation_rejects_overlap() {
        assert!(matches!(
            separation_constant(&thirds(0, 2), &thirds(1, 3)),
            Err(Error::Overlap(_, _))
        ));
    }

    #[test]
    fn union_of_disjoint_thirds() {
        let (u, plan) = union_construct(&thirds(0, 1), &thirds(2, 3)).unwrap();
        assert_eq!(plan.n_bar, 0);
        assert!(!plan.reflected);
        assert_eq!(plan.a, Scalar::ratio(1, 3));
        assert_eq!(plan.a_prime, Scalar::ratio(1, 12));
        assert_eq!(u.floor(), Some(&Scalar::ratio(1, 12)));
        assert_eq!(u.root(), &Interval::make(Scalar::zero(), Scalar::from_int(3)));
        u.validate(5).unwrap();
        // With n̄ = 0 the children are exactly the two inputs, so deeper
        // covers are the unions of the input covers one level up.
        for n in 1..=5u32 {
            let got = u.cover(n).unwrap();
            let mut expect: Vec<Interval> =
                thirds(0, 1).cover(n - 1).unwrap().parts().to_vec();
            expect.extend_from_slice(thirds(2, 3).cover(n - 1).unwrap().parts());
            assert_eq!(got.parts(), &expect[..]);
        }
    }

    #[test]
    fn union_mirrors_when_wide_set_right() {
        let narrow = Construction::middle_thirds(Interval::make(
            Scalar::zero(),
            Scalar::ratio(1, 2),
        ));
        let wide = thirds(2, 3);
        let (u, plan) = union_construct(&narrow, &wide).unwrap();
        assert!(plan.reflected);
        u.validate(5).unwrap();
        assert_eq!(u.root(), &Interval::make(Scalar::zero(), Scalar::from_int(3)));
        // Both input covers embed in the union cover two levels down.
        let inputs: Vec<Interval> = narrow
            .cover(2)
            .unwrap()
            .parts()
            .iter()
            .chain(wide.cover(2).unwrap().parts())
            .cloned()
            .collect();
        let union_cover = u.cover(2 + plan.n_bar + 1).unwrap();
        let inner = crate::union::IntervalUnion::exact(inputs);
        assert!(inner.subset_of(&union_cover));
    }

    #[test]
    fn union_two_sided_inclusion() {
        // Wider left set with a nontrivial spine: left on [0,10], right on [11,12].
        let left = thirds(0, 10);
        let right = thirds(11, 12);
        let (u, plan) = union_construct(&left, &right).unwrap();
        // d(left spine at 1^n) = 10/3^n ≥ 1 up to n = 2.
        assert_eq!(plan.n_bar, 2);
        u.validate(6).unwrap();
        let shift = plan.n_bar + 1;
        for n in (shift + 1)..=6 {
            let coarse: Vec<Interval> = left
                .cover(n - shift)
                .unwrap()
                .parts()
                .iter()
                .chain(right.cover(n - shift).unwrap().parts())
                .cloned()
                .collect();
            let fine: Vec<Interval> = left
                .cover(n)
                .unwrap()
                .parts()
                .iter()
                .chain(right.cover(n).unwrap().parts())
                .cloned()
                .collect();
            let mid = u.cover(n).unwrap();
            assert!(crate::union::IntervalUnion::exact(fine).subset_of(&mid));
            assert!(mid.subset_of(&crate::union::IntervalUnion::exact(coarse)));
        }
    }

    #[test]
    fn sum_construction_shape() {
        let third = Scalar::ratio(1, 3);
        let s = sum_subset_construct(&[thirds(0, 1), thirds(0, 1)], &third).unwrap();
        assert_eq!(s.root(), &Interval::make(Scalar::zero(), Scalar::from_int(2)));
        assert_eq!(s.floor(), Some(&Scalar::ratio(1, 12)));
        s.validate(5).unwrap();
        let i0 = s.interval(&BinaryWord::from_letters(&[0])).unwrap();
        assert_eq!(i0, Interval::make(Scalar::zero(), Scalar::ratio(2, 3)));
        let i1 = s.interval(&BinaryWord::from_letters(&[1])).unwrap();
        assert_eq!(i1, Interval::make(Scalar::one(), Scalar::from_int(2)));
        // Every piece of the subset construction lies inside the sum of
        // matching-depth covers.
        for n in 1..=6u32 {
            let pieces = s.cover(n).unwrap();
            let budget = 1 << 14;
            let env = thirds(0, 1)
                .cover(n)
                .unwrap()
                .minkowski_capped(&thirds(0, 1).cover(n).unwrap(), budget)
                .unwrap();
            assert!(pieces.subset_of(&env));
        }
    }

    #[test]
    fn triple_thirds_sum_certified() {
        let third = Scalar::ratio(1, 3);
        let cs = [thirds(0, 1), thirds(0, 1), thirds(0, 1)];
        let cert = sum_is_interval(&cs, &third).unwrap();
        assert!(cert.certified);
        assert_eq!(cert.value, Scalar::ratio(5, 4));
        assert_eq!(cert.max_gap, Scalar::ratio(1, 3));
        assert!(cert.exhaustive);
        assert_eq!(
            cert.interval,
            Some(Interval::make(Scalar::zero(), Scalar::from_int(3)))
        );
    }

    #[test]
    fn two_thirds_sum_not_certified() {
        let third = Scalar::ratio(1, 3);
        let cs = [thirds(0, 1), thirds(0, 1)];
        let cert = sum_is_interval(&cs, &third).unwrap();
        assert!(!cert.certified);
        assert_eq!(cert.value, Scalar::ratio(7, 8));
        assert!(cert.interval.is_none());
    }

    #[test]
    fn wide_floor_is_clamped() {
        // Two halves-of-the-unit-interval pieces give floor 2/5; the test
        // value must be evaluated at 1/3, not 2/5.
        let dense = Construction::homogeneous(
            Interval::unit(),
            Scalar::ratio(2, 5),
            Scalar::ratio(3, 5),
        )
        .unwrap();
        let cert = sum_is_interval(&[dense.clone(), dense], &Scalar::ratio(2, 5)).unwrap();
        assert_eq!(cert.a_used, Scalar::ratio(1, 3));
        assert_eq!(cert.value, Scalar::ratio(7, 8));
        assert!(!cert.certified);
    }

    #[test]
    fn floor_below_claim_is_rejected() {
        let sparse = Construction::homogeneous(
            Interval::unit(),
            Scalar::ratio(1, 5),
            Scalar::ratio(4, 5),
        )
        .unwrap();
        assert!(matches!(
            sum_is_interval(&[sparse, thirds(0, 1)], &Scalar::ratio(1, 3)),
            Err(Error::Certificate(_))
        ));
    }

    #[test]
    fn filling_threshold() {
        let third = Scalar::ratio(1, 3);
        assert!(!filling_check(&third, 2).unwrap());
        assert!(filling_check(&third, 3).unwrap());
        assert_eq!(filling_value(&third, 3).unwrap(), Scalar::ratio(5, 4));
        // Clamping: a too-large floor is tested at 1/3.
        assert!(filling_check(&Scalar::ratio(1, 2), 3).unwrap());
        assert!(!filling_check(&Scalar::ratio(1, 2), 1).unwrap());
    }

    #[test]
    fn explicit_floors_match_separation() {
        let a = separation_constant_with_floors(
            &thirds(0, 1),
            &thirds(2, 3),
            &Scalar::ratio(1, 3),
            &Scalar::ratio(1, 3),
        )
        .unwrap();
        assert_eq!(a, Scalar::ratio(1, 3));
        assert!(matches!(
            separation_constant_with_floors(
                &thirds(2, 3),
                &thirds(0, 1),
                &Scalar::ratio(1, 3),
                &Scalar::ratio(1, 3)
            ),
            Err(Error::Overlap(_, _))
        ));
    }

    #[test]
    fn geometric_count_reference() {
        let n = geometric_count(&Scalar::one(), &Scalar::one(), &Scalar::ratio(1, 3)).unwrap();
        assert_eq!(n, 204);
    }
}
