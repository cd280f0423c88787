//! Brute-force grid ground truth, independent of the interval pipeline:
//! occupancy iteration for map attractors, cell-sumset Minkowski sums, and
//! a beta-sweep for the second stage. All rounding is outward, so every
//! grid result is an outer approximation.

use crate::error::{Error, Result};
use crate::ifs::Ifs;
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::union::IntervalUnion;

/// Fraction of a cell below which boundary overlap is treated as touching,
/// not covering.
const SNAP: f64 = 1e-9;
const CELL_BUDGET: f64 = 5.0e7;

/// Occupied cells of a uniform grid, as sorted runs of inclusive indices;
/// cell i spans [origin + i·h, origin + (i+1)·h].
#[derive(Clone, Debug, PartialEq)]
pub struct GridSet {
    origin: f64,
    h: f64,
    runs: Vec<(i64, i64)>,
}

fn mark(lo: f64, hi: f64, origin: f64, h: f64) -> (i64, i64) {
    let t0 = (lo - origin) / h;
    let t1 = (hi - origin) / h;
    let i0 = (t0 + SNAP).floor() as i64;
    let i1 = (t1 - SNAP).ceil() as i64 - 1;
    (i0, i1.max(i0))
}

fn merge_runs(mut cand: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    cand.sort_unstable();
    let mut out: Vec<(i64, i64)> = Vec::with_capacity(cand.len());
    for (s, e) in cand {
        match out.last_mut() {
            // Adjacent runs share no empty cell, so they are one run.
            Some(last) if s <= last.1 + 1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

impl GridSet {
    pub fn rasterize(u: &IntervalUnion, origin: f64, h: f64) -> Result<GridSet> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Input(format!("grid step {h} must be positive")));
        }
        let mut cand = Vec::with_capacity(u.count());
        for part in u.parts() {
            let (lo, hi) = part.to_f64_pair();
            if !((hi - lo) / h < CELL_BUDGET) {
                return Err(Error::Budget("grid too fine for this set".into()));
            }
            cand.push(mark(lo, hi, origin, h));
        }
        Ok(GridSet { origin, h, runs: merge_runs(cand) })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn runs(&self) -> &[(i64, i64)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn cell_count(&self) -> u64 {
        self.runs.iter().map(|(s, e)| (e - s + 1) as u64).sum()
    }

    /// Widest empty stretch strictly between occupied cells, in cells.
    pub fn widest_hole(&self) -> i64 {
        self.runs
            .windows(2)
            .map(|w| w[1].0 - w[0].1 - 1)
            .max()
            .unwrap_or(0)
    }

    pub fn to_union(&self) -> IntervalUnion {
        let parts = self
            .runs
            .iter()
            .map(|(s, e)| {
                Interval::make(
                    Scalar::from_f64(self.origin + *s as f64 * self.h),
                    Scalar::from_f64(self.origin + (*e + 1) as f64 * self.h),
                )
            })
            .collect();
        IntervalUnion::exact(parts)
    }

    pub fn hausdorff(&self, other: &GridSet) -> Result<Scalar> {
        self.to_union().hausdorff(&other.to_union())
    }
}

fn check_cells(diameter: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Input(format!("grid step {h} must be positive")));
    }
    if !(diameter / h < CELL_BUDGET) {
        return Err(Error::Budget("grid too fine for this hull".into()));
    }
    Ok(())
}

/// Attractor of the map family by occupancy iteration: start from the full
/// hull and re-mark the images of every occupied run until the occupancy
/// stops changing. Images only shrink inside the hull, so the occupied set
/// is non-increasing and termination is guaranteed within the cell count.
pub fn grid_attractor(f: &Ifs, h: f64, max_iter: usize) -> Result<GridSet> {
    let hull = f.hull()?;
    let (lo, hi) = hull.to_f64_pair();
    check_cells(hi - lo, h)?;
    let origin = lo;
    let mut occ = GridSet {
        origin,
        h,
        runs: vec![mark(lo, hi, origin, h)],
    };
    for _ in 0..max_iter {
        let mut cand = Vec::new();
        for (s, e) in &occ.runs {
            let x0 = origin + *s as f64 * h;
            let x1 = origin + (*e + 1) as f64 * h;
            for map in f.maps() {
                let y0 = map.apply_f64(x0);
                let y1 = map.apply_f64(x1);
                let (a, b) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
                cand.push(mark(a, b, origin, h));
            }
        }
        let next = merge_runs(cand);
        if next == occ.runs {
            return Ok(occ);
        }
        occ.runs = next;
    }
    Err(Error::NonConvergence(max_iter))
}

/// Cell-index sumset with one-cell outward rounding: summing cells i and j
/// covers [(i+j)h, (i+j+2)h], i.e. cells i+j and i+j+1.
pub fn grid_minkowski(a: &GridSet, b: &GridSet) -> Result<GridSet> {
    if (a.h - b.h).abs() > SNAP * a.h.max(b.h) {
        return Err(Error::ResolutionMismatch(a.h, b.h));
    }
    let mut cand = Vec::with_capacity(a.runs.len() * b.runs.len());
    for ra in &a.runs {
        for rb in &b.runs {
            cand.push((ra.0 + rb.0, ra.1 + rb.1 + 1));
        }
    }
    Ok(GridSet {
        origin: a.origin + b.origin,
        h: a.h,
        runs: merge_runs(cand),
    })
}

/// Fixed points of the length-n map compositions, i.e. the attractor points
/// addressable by depth-n words: the image-interval endpoints at depth n.
fn beta_samples(f: &Ifs, depth: u32) -> Result<Vec<f64>> {
    let hull = f.hull()?;
    let words = (f.maps().len() as u64).checked_pow(depth);
    if !matches!(words, Some(w) if w <= 65_536) {
        return Err(Error::Budget(format!("beta depth {depth} too deep")));
    }
    let mut level = vec![hull];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * f.maps().len());
        for iv in &level {
            for map in f.maps() {
                next.push(map.image(iv));
            }
        }
        level = next;
    }
    let mut betas: Vec<f64> = Vec::with_capacity(level.len() * 2);
    for iv in &level {
        let (lo, hi) = iv.to_f64_pair();
        betas.push(lo);
        betas.push(hi);
    }
    betas.sort_unstable_by(f64::total_cmp);
    betas.dedup();
    Ok(betas)
}

/// Second-stage attractor on the grid: sweep x ↦ alpha·x + (1−alpha)·beta
/// over beta sampled from the first stage at beta_depth, iterating to fixed
/// occupancy from the full hull.
pub fn grid_second_gen(
    f: &Ifs,
    alpha: f64,
    h: f64,
    beta_depth: u32,
    max_iter: usize,
) -> Result<GridSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    if beta_depth < 1 {
        return Err(Error::Input("beta depth must be ≥ 1".into()));
    }
    let hull = f.hull()?;
    let (lo, hi) = hull.to_f64_pair();
    check_cells(hi - lo, h)?;
    let betas = beta_samples(f, beta_depth)?;
    let origin = lo;
    let mut occ = GridSet {
        origin,
        h,
        runs: vec![mark(lo, hi, origin, h)],
    };
    for _ in 0..max_iter {
        let mut cand = Vec::new();
        for (s, e) in &occ.runs {
            let x0 = origin + *s as f64 * h;
            let x1 = origin + (*e + 1) as f64 * h;
            for beta in &betas {
                let c = (1.0 - alpha) * beta;
                cand.push(mark(alpha * x0 + c, alpha * x1 + c, origin, h));
            }
        }
        let next = merge_runs(cand);
        if next == occ.runs {
            return Ok(occ);
        }
        occ.runs = next;
    }
    Err(Error::NonConvergence(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissection::Construction;

    fn thirds_ifs() -> Ifs {
        Ifs::new(vec![
            crate::ifs::ContractionMap::affine(Scalar::ratio(1, 3), Scalar::zero()).unwrap(),
            crate::ifs::ContractionMap::affine(Scalar::ratio(1, 3), Scalar::ratio(2, 3))
                .unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn thirds_grid_matches_cover() {
        let h = 3f64.powi(-6);
        let grid = grid_attractor(&thirds_ifs(), h, 10_000).unwrap();
        let cover = Construction::middle_thirds(Interval::unit()).cover(6).unwrap();
        let raster = GridSet::rasterize(&cover, 0.0, h).unwrap();
        assert_eq!(grid.runs(), raster.runs());
        assert_eq!(grid.cell_count(), 1 << 6);
    }

    #[test]
    fn point_sum_rounds_outward() {
        let point = IntervalUnion::exact(vec![Interval::make(Scalar::zero(), Scalar::zero())]);
        let g = GridSet::rasterize(&point, 0.0, 1.0).unwrap();
        assert_eq!(g.runs(), &[(0, 0)]);
        let sum = grid_minkowski(&g, &g).unwrap();
        assert_eq!(sum.runs(), &[(0, 1)]);
    }

    #[test]
    fn two_thirds_sum_has_no_hole() {
        let h = 3f64.powi(-8);
        let cover = Construction::middle_thirds(Interval::unit()).cover(8).unwrap();
        let raster = GridSet::rasterize(&cover, 0.0, h).unwrap();
        let sum = grid_minkowski(&raster, &raster).unwrap();
        assert_eq!(sum.runs().len(), 1);
        assert_eq!(sum.runs()[0], (0, 2 * 3i64.pow(8) - 1));
    }

    #[test]
    fn touching_maps_fill_hull() {
        let f = Ifs::new(vec![
            crate::ifs::ContractionMap::affine(Scalar::ratio(1, 2), Scalar::zero()).unwrap(),
            crate::ifs::ContractionMap::affine(Scalar::ratio(1, 2), Scalar::ratio(1, 2))
                .unwrap(),
        ])
        .unwrap();
        let g = grid_attractor(&f, 1.0 / 64.0, 10_000).unwrap();
        assert_eq!(g.runs(), &[(0, 63)]);
        let g2 = grid_second_gen(&f, 0.45, 1.0 / 64.0, 4, 10_000).unwrap();
        assert_eq!(g2.runs(), &[(0, 63)]);
    }

    #[test]
    fn hausdorff_of_grids() {
        let a = GridSet { origin: 0.0, h: 1.0, runs: vec![(0, 0)] };
        let b = GridSet { origin: 0.0, h: 1.0, runs: vec![(1, 1)] };
        assert_eq!(a.hausdorff(&a).unwrap(), Scalar::zero());
        assert_eq!(a.hausdorff(&b).unwrap(), Scalar::from_f64(1.0));
        assert_eq!(b.hausdorff(&a).unwrap(), Scalar::from_f64(1.0));
    }

    #[test]
    fn second_gen_grid_keeps_main_gap() {
        // alpha = 0.1 on middle thirds: the attractor misses ]0.41, 0.59[.
        let g = grid_second_gen(&thirds_ifs(), 0.1, 1e-3, 6, 10_000).unwrap();
        let u = g.to_union();
        assert!(!u.contains_point(&Scalar::from_f64(0.5)));
        assert!(u.contains_point(&Scalar::from_f64(0.05)));
    }
}
