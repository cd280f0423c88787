//! Sorted disjoint unions of closed intervals: the lingua franca between the
//! construction side, the geometric-series pipeline, and the grid oracle.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;

/// Union of closed intervals, sorted, with consecutive parts separated by
/// more than the merge tolerance `tau`. Gaps of positive width ≤ tau that
/// were absorbed during normalization are counted in `merged_gap_count`.
#[derive(Clone, Debug)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
    tau: Scalar,
    merged_gap_count: usize,
}

impl IntervalUnion {
    pub fn empty(tau: Scalar) -> Self {
        IntervalUnion { parts: Vec::new(), tau, merged_gap_count: 0 }
    }

    /// Exact mode: zero merge tolerance (touching intervals still coalesce).
    pub fn exact(parts: Vec<Interval>) -> Self {
        Self::normalize(parts, Scalar::zero())
    }

    pub fn normalize(mut parts: Vec<Interval>, tau: Scalar) -> Self {
        assert!(!tau.is_negative(), "negative merge tolerance");
        parts.sort_by(|a, b| a.lo().cmp(b.lo()).then_with(|| a.hi().cmp(b.hi())));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        let mut merged_gap_count = 0usize;
        for part in parts {
            match merged.last_mut() {
                Some(last) if part.lo() <= &(last.hi() + &tau) => {
                    if part.lo() > last.hi() {
                        merged_gap_count += 1;
                    }
                    if part.hi() > last.hi() {
                        *last = Interval::make(last.lo().clone(), part.hi().clone());
                    }
                }
                _ => merged.push(part),
            }
        }
        IntervalUnion { parts: merged, tau, merged_gap_count }
    }

    pub fn singleton(iv: Interval, tau: Scalar) -> Self {
        IntervalUnion { parts: vec![iv], tau, merged_gap_count: 0 }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Interval> {
        self.parts
    }

    pub fn count(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn tau(&self) -> &Scalar {
        &self.tau
    }

    pub fn merged_gap_count(&self) -> usize {
        self.merged_gap_count
    }

    pub fn hull(&self) -> Result<Interval> {
        let first = self.parts.first().ok_or(Error::EmptySet)?;
        let last = self.parts.last().unwrap();
        Ok(Interval::make(first.lo().clone(), last.hi().clone()))
    }

    /// Open gaps between consecutive parts, reported as (lo, hi) intervals.
    pub fn gaps(&self) -> Vec<Interval> {
        self.parts
            .windows(2)
            .map(|w| Interval::make(w[0].hi().clone(), w[1].lo().clone()))
            .collect()
    }

    pub fn smallest_gap(&self) -> Option<Scalar> {
        self.parts
            .windows(2)
            .map(|w| w[1].lo() - w[0].hi())
            .min()
    }

    pub fn affine(&self, s: &Scalar, t: &Scalar) -> IntervalUnion {
        let mut parts: Vec<Interval> = self.parts.iter().map(|p| p.affine(s, t)).collect();
        if s.is_negative() {
            parts.reverse();
        }
        IntervalUnion {
            parts,
            tau: &self.tau * &s.abs(),
            merged_gap_count: self.merged_gap_count,
        }
    }

    pub fn translate(&self, t: &Scalar) -> IntervalUnion {
        IntervalUnion {
            parts: self.parts.iter().map(|p| p.translate(t)).collect(),
            tau: self.tau.clone(),
            merged_gap_count: self.merged_gap_count,
        }
    }

    /// Minkowski sum with one closed interval, appended to `out` as sorted
    /// disjoint pieces. Pieces are the hull sum split by this union's gaps
    /// wider than the summand.
    pub fn minkowski_interval_into(&self, comp: &Interval, out: &mut Vec<Interval>) {
        if self.parts.is_empty() {
            return;
        }
        let w = comp.diameter();
        let (p, q) = (comp.lo(), comp.hi());
        let mut cur_lo = self.parts[0].lo() + p;
        for pair in self.parts.windows(2) {
            let g1 = pair[0].hi();
            let g2 = pair[1].lo();
            if &(g2 - g1) > &w {
                out.push(Interval::make(cur_lo, g1 + q));
                cur_lo = g2 + p;
            }
        }
        out.push(Interval::make(cur_lo, self.parts.last().unwrap().hi() + q));
    }

    /// Minkowski sum. Exact on the given parts: a gap survives exactly when
    /// it is wider than every component of the other summand.
    pub fn minkowski(&self, other: &IntervalUnion) -> IntervalUnion {
        self.minkowski_capped(other, usize::MAX)
            .expect("uncapped minkowski cannot exceed budget")
    }

    pub fn minkowski_capped(&self, other: &IntervalUnion, cap: usize) -> Result<IntervalUnion> {
        if self.is_empty() || other.is_empty() {
            return Ok(IntervalUnion::empty(Scalar::max_of(&self.tau, &other.tau)));
        }
        // Iterate over the side with fewer components; filter the other's gaps.
        let (base, comps) = if self.count() >= other.count() {
            (self, other)
        } else {
            (other, self)
        };
        let mut raw: Vec<Interval> = Vec::new();
        for comp in &comps.parts {
            base.minkowski_interval_into(comp, &mut raw);
            if raw.len() > cap {
                return Err(Error::Budget(format!(
                    "minkowski sum exceeded {cap} intervals before merging"
                )));
            }
        }
        let tau = Scalar::max_of(&self.tau, &other.tau);
        let mut result = IntervalUnion::normalize(raw, tau);
        result.merged_gap_count += self.merged_gap_count + other.merged_gap_count;
        Ok(result)
    }

    /// Widen every part by r ≥ 0 and re-merge: the closed r-neighborhood.
    pub fn neighborhood(&self, r: &Scalar) -> IntervalUnion {
        let widened = self.parts.iter().map(|p| p.widen(r)).collect();
        let mut result = IntervalUnion::normalize(widened, self.tau.clone());
        result.merged_gap_count = self.merged_gap_count;
        result
    }

    pub fn contains_point(&self, x: &Scalar) -> bool {
        let idx = self.parts.partition_point(|p| p.hi() < x);
        idx < self.parts.len() && self.parts[idx].lo() <= x
    }

    /// Distance from a point to the union (0 if inside).
    pub fn distance_to_point(&self, x: &Scalar) -> Result<Scalar> {
        if self.parts.is_empty() {
            return Err(Error::EmptySet);
        }
        let idx = self.parts.partition_point(|p| p.hi() < x);
        let mut best: Option<Scalar> = None;
        if idx < self.parts.len() {
            let d = self.parts[idx].distance_to_point(x);
            best = Some(d);
        }
        if idx > 0 {
            let d = self.parts[idx - 1].distance_to_point(x);
            best = Some(match best {
                Some(b) => Scalar::min_of(&b, &d),
                None => d,
            });
        }
        Ok(best.unwrap())
    }

    /// Set inclusion: every part of self lies inside a single part of other.
    pub fn subset_of(&self, other: &IntervalUnion) -> bool {
        self.parts.iter().all(|p| {
            let idx = other.parts.partition_point(|o| o.lo() <= p.lo());
            idx > 0 && other.parts[idx - 1].contains_interval(p)
        })
    }

    /// True when the open interval ]lo, hi[ meets this closed union.
    pub fn meets_open_interval(&self, open: &Interval) -> bool {
        self.parts
            .iter()
            .any(|p| p.lo() < open.hi() && open.lo() < p.hi())
    }

    /// Directed Hausdorff distance sup_{x in self} d(x, other). The supremum
    /// is attained at a part endpoint of self or at the midpoint of a gap of
    /// other, so it is computed exactly.
    pub fn directed_hausdorff(&self, other: &IntervalUnion) -> Result<Scalar> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut best = Scalar::zero();
        for p in &self.parts {
            for x in [p.lo(), p.hi()] {
                let d = other.distance_to_point(x)?;
                if d > best {
                    best = d;
                }
            }
        }
        for g in other.gaps() {
            let mid = g.midpoint();
            if self.contains_point(&mid) {
                let d = g.diameter().half();
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }

    pub fn hausdorff(&self, other: &IntervalUnion) -> Result<Scalar> {
        let a = self.directed_hausdorff(other)?;
        let b = other.directed_hausdorff(self)?;
        Ok(Scalar::max_of(&a, &b))
    }

    pub fn is_exact(&self) -> bool {
        self.parts.iter().all(|p| p.is_exact())
    }

    /// One interval per line, "[lo, hi]".
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.parts {
            let _ = writeln!(s, "{p}");
        }
        s
    }

    pub fn parse_text(text: &str, tau: Scalar) -> Result<IntervalUnion> {
        let mut parts = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let inner = line
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::Input(format!("line {}: expected [lo, hi]", ln + 1)))?;
            let (lo, hi) = inner
                .split_once(',')
                .ok_or_else(|| Error::Input(format!("line {}: missing comma", ln + 1)))?;
            parts.push(Interval::new(Scalar::parse(lo)?, Scalar::parse(hi)?)?);
        }
        Ok(IntervalUnion::normalize(parts, tau))
    }
}
