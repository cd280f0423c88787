//! Attractors of systems whose map family is indexed by a first-stage
//! attractor: for phi_beta(x) = alpha·x + (1−alpha)·beta with beta ranging
//! over a set K, the attractor equals the geometric Minkowski series
//! (1−alpha)·sum_j alpha^j·K. The series is evaluated as an exact finite
//! union via gap filtering, closed off by a contracting tail fixed point.

use crate::dissection::Construction;
use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::{Ifs, TwoMapOutcome};
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::setops::{aprime, geometric_count};
use crate::union::IntervalUnion;
use crate::word::BinaryWord;

const PART_BUDGET_DEFAULT: usize = 200_000;
const FIXED_POINT_ITER_CAP: usize = 10_000;
const STABILIZE_N_CAP: u32 = 512;

/// Composite of the maps x ↦ alpha·x + (1−alpha)·beta, applied with
/// betas[0] innermost: alpha^n·x + (1−alpha)·(beta_1·alpha^{n−1} + … + beta_n).
pub fn compose_phi(alpha: &Scalar, betas: &[Scalar], x: &Scalar) -> Scalar {
    let mut horner = Scalar::zero();
    for b in betas {
        horner = &(&horner * alpha) + b;
    }
    let scale = alpha.powi(betas.len() as u32);
    &(&scale * x) + &(&(&Scalar::one() - alpha) * &horner)
}

/// First-stage attractor in a form the series pipeline can consume.
#[derive(Clone, Debug)]
pub enum FirstGen {
    /// The attractor fills its hull.
    Solid(Interval),
    /// Separated two-branch construction with exact node access.
    Cantor(Construction),
    /// Three or more maps: a precomputed outer cover whose gaps are true
    /// gaps of the attractor, plus the generating system for reference.
    Maps {
        ifs: Ifs,
        hull: Interval,
        cover: IntervalUnion,
        gaps: Vec<Interval>,
        floor: Scalar,
    },
}

impl FirstGen {
    pub fn from_construction(c: Construction) -> FirstGen {
        FirstGen::Cantor(c)
    }

    /// Resolve a system: two maps either fill the hull or generate a Cantor
    /// construction; larger systems are cached as an outer image cover at
    /// the given resolution (piece endpoints always lie in the attractor,
    /// so cover gaps are genuine gaps).
    pub fn from_ifs(ifs: &Ifs, resolution: &Scalar) -> Result<FirstGen> {
        if ifs.len() == 2 {
            return Ok(match ifs.two_map_construction()? {
                TwoMapOutcome::Interval(iv) => FirstGen::Solid(iv),
                TwoMapOutcome::Cantor(c) => FirstGen::Cantor(c),
            });
        }
        let hull = ifs.hull()?;
        let floor = ifs.ratio_floor()?;
        if !resolution.is_positive() {
            return Err(Error::Input("cover resolution must be positive".into()));
        }
        let cover = image_cover(ifs, &hull, resolution, PART_BUDGET_DEFAULT)?;
        let gaps = cover.gaps();
        Ok(FirstGen::Maps { ifs: ifs.clone(), hull, cover, gaps, floor })
    }

    pub fn hull(&self) -> &Interval {
        match self {
            FirstGen::Solid(iv) => iv,
            FirstGen::Cantor(c) => c.root(),
            FirstGen::Maps { hull, .. } => hull,
        }
    }

    /// Certified dissection-ratio floor, when one is available.
    pub fn floor(&self) -> Option<&Scalar> {
        match self {
            FirstGen::Solid(_) => None,
            FirstGen::Cantor(c) => c.floor(),
            FirstGen::Maps { floor, .. } => Some(floor),
        }
    }

    pub fn is_solid(&self) -> bool {
        matches!(self, FirstGen::Solid(_))
    }

    pub fn construction(&self) -> Option<&Construction> {
        match self {
            FirstGen::Cantor(c) => Some(c),
            _ => None,
        }
    }

    /// An outer cover for display and oracle comparison.
    pub fn outer_cover(&self, depth: u32) -> Result<IntervalUnion> {
        match self {
            FirstGen::Solid(iv) => Ok(IntervalUnion::exact(vec![iv.clone()])),
            FirstGen::Cantor(c) => c.cover(depth),
            FirstGen::Maps { ifs, hull, .. } => {
                let shrink = {
                    let mut worst = Scalar::zero();
                    for m in ifs.maps() {
                        worst = Scalar::max_of(&worst, &m.delta());
                    }
                    worst
                };
                let target = &hull.diameter() * &shrink.powi(depth);
                image_cover(ifs, hull, &target, PART_BUDGET_DEFAULT)
            }
        }
    }

    /// Points certainly contained in the attractor.
    pub fn inner_points(&self, depth: u32, budget: usize) -> Result<Vec<Scalar>> {
        match self {
            FirstGen::Solid(iv) => {
                let steps = (budget.max(2) - 1).min(1 << depth.min(16)) as i64;
                let d = iv.diameter();
                let mut pts = Vec::new();
                for k in 0..=steps {
                    let t = &Scalar::from_int(k) / &Scalar::from_int(steps);
                    pts.push(iv.lo() + &(&d * &t));
                }
                Ok(pts)
            }
            FirstGen::Cantor(c) => {
                let mut d = depth;
                loop {
                    match c.cover_endpoints(d) {
                        Ok(mut pts) => {
                            pts.truncate(budget);
                            return Ok(pts);
                        }
                        Err(Error::DepthUnavailable { available, .. }) if available < d => {
                            d = available;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            FirstGen::Maps { cover, .. } => {
                let mut pts = Vec::new();
                for p in cover.parts() {
                    pts.push(p.lo().clone());
                    pts.push(p.hi().clone());
                    if pts.len() >= budget {
                        break;
                    }
                }
                Ok(pts)
            }
        }
    }

    /// The attractor scaled by s > 0, in summand form.
    fn term(&self, s: &Scalar) -> Term {
        assert!(s.is_positive());
        match self {
            FirstGen::Solid(iv) => Term::Solid(iv.affine(s, &Scalar::zero())),
            FirstGen::Cantor(c) => Term::Cantor(c.affine_image(s, &Scalar::zero())),
            FirstGen::Maps { cover, gaps, .. } => Term::Finite {
                cover: cover.affine(s, &Scalar::zero()),
                gaps: gaps
                    .iter()
                    .map(|g| g.affine(s, &Scalar::zero()))
                    .collect(),
            },
        }
    }
}

/// One summand of the geometric series.
#[derive(Clone, Debug)]
enum Term {
    Solid(Interval),
    Cantor(Construction),
    Finite { cover: IntervalUnion, gaps: Vec<Interval> },
}

impl Term {
    fn min(&self) -> Result<Scalar> {
        Ok(match self {
            Term::Solid(iv) => iv.lo().clone(),
            Term::Cantor(c) => c.min().clone(),
            Term::Finite { cover, .. } => cover.hull()?.lo().clone(),
        })
    }

    fn max(&self) -> Result<Scalar> {
        Ok(match self {
            Term::Solid(iv) => iv.hi().clone(),
            Term::Cantor(c) => c.max().clone(),
            Term::Finite { cover, .. } => cover.hull()?.hi().clone(),
        })
    }

    /// Gaps strictly wider than the threshold, ascending; a superset list
    /// reusable for every part at least that wide.
    fn wide_gaps(&self, threshold: &Scalar) -> Result<Vec<Interval>> {
        match self {
            Term::Solid(_) => Ok(Vec::new()),
            Term::Cantor(c) => c.gaps_wider_than(threshold),
            Term::Finite { gaps, .. } => Ok(gaps
                .iter()
                .filter(|g| &g.diameter() > threshold)
                .cloned()
                .collect()),
        }
    }

    /// Exact Minkowski sum with one interval [p, q]: the hull sum with the
    /// term's gaps wider than q−p carved out (narrower gaps are bridged by
    /// the sliding interval). `gap_superset` must contain every gap wider
    /// than q−p; extra narrower entries are filtered here.
    fn plus_interval(
        &self,
        part: &Interval,
        gap_superset: &[Interval],
        out: &mut Vec<Interval>,
    ) -> Result<()> {
        let (p, q) = (part.lo(), part.hi());
        let (lo, hi) = (self.min()?, self.max()?);
        let width = q - p;
        let mut cur = &lo + p;
        for g in gap_superset {
            if g.diameter() > width {
                out.push(Interval::make(cur, g.lo() + q));
                cur = g.hi() + p;
            }
        }
        out.push(Interval::make(cur, &hi + q));
        Ok(())
    }

    /// Outer cover at a depth suited to seeding the series.
    fn seed_cover(&self, depth: u32) -> Result<(IntervalUnion, Scalar)> {
        match self {
            Term::Solid(iv) => Ok((IntervalUnion::exact(vec![iv.clone()]), Scalar::zero())),
            Term::Cantor(c) => {
                let mut d = depth;
                let cover = loop {
                    match c.cover(d) {
                        Ok(cv) => break cv,
                        Err(Error::DepthUnavailable { available, .. }) if available < d => {
                            d = available;
                        }
                        Err(e) => return Err(e),
                    }
                };
                let mut worst = Scalar::zero();
                for piece in cover.parts() {
                    worst = Scalar::max_of(&worst, &piece.diameter());
                }
                Ok((cover, worst))
            }
            Term::Finite { cover, .. } => {
                let mut worst = Scalar::zero();
                for piece in cover.parts() {
                    worst = Scalar::max_of(&worst, &piece.diameter());
                }
                Ok((cover.clone(), worst))
            }
        }
    }
}

/// Maximal composite images of the hull with diameter ≤ resolution, merged
/// into an outer cover. Piece endpoints are images of attractor extremes,
/// hence attractor points; the cover's gaps are therefore true gaps.
fn image_cover(
    ifs: &Ifs,
    hull: &Interval,
    resolution: &Scalar,
    budget: usize,
) -> Result<IntervalUnion> {
    let mut parts = Vec::new();
    let mut stack = vec![hull.clone()];
    let mut frontier: Vec<Interval> = Vec::new();
    // Depth-first expansion without materializing words: each node is just
    // an interval; children are its images under every map.
    while let Some(iv) = stack.pop() {
        if &iv.diameter() <= resolution {
            parts.push(iv);
            continue;
        }
        if parts.len() + stack.len() > budget {
            return Err(Error::Budget("image cover exceeded part budget".into()));
        }
        for m in ifs.maps() {
            frontier.push(m.image(&iv));
        }
        stack.append(&mut frontier);
    }
    Ok(IntervalUnion::normalize(parts, Scalar::zero()))
}

/// Pieces of the first stage whose diameters land in the scale window at
/// the given level, found by walking to the maximal nodes still at or above
/// the window threshold.
#[derive(Clone, Debug)]
pub struct CoverSelection {
    pub pieces: Vec<Interval>,
    pub level: u32,
    pub threshold: Scalar,
    pub min_diameter: Scalar,
    pub max_diameter: Scalar,
}

pub fn select_cover(fg: &FirstGen, alpha: &Scalar, level: u32) -> Result<CoverSelection> {
    if !(alpha.is_positive() && alpha < &Scalar::one()) {
        return Err(Error::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    let hull = fg.hull().clone();
    let threshold = &hull.diameter() * &alpha.powi(level);
    let pieces: Vec<Interval> = match fg {
        FirstGen::Solid(iv) => vec![iv.clone()],
        FirstGen::Cantor(c) => {
            // Maximal nodes with diameter still ≥ threshold; their children
            // fall below, so diameters sit in [T, T/floor).
            let mut found = Vec::new();
            let mut stack = vec![(BinaryWord::empty(), hull.clone())];
            while let Some((w, iv)) = stack.pop() {
                let (c0, c1) = c.children(&w)?;
                let both_below = c0.diameter() < threshold && c1.diameter() < threshold;
                if both_below {
                    found.push(iv);
                    continue;
                }
                for (child_w, child) in [(w.push(0), c0), (w.push(1), c1)] {
                    if child.diameter() >= threshold {
                        stack.push((child_w, child));
                    } else {
                        // Sibling stays above the window; this child is the
                        // maximal node of its own branch.
                        found.push(child);
                    }
                }
                if found.len() + stack.len() > PART_BUDGET_DEFAULT {
                    return Err(Error::Budget("cover selection exceeded budget".into()));
                }
            }
            found.sort_by(|x, y| x.lo().cmp(y.lo()));
            found
        }
        FirstGen::Maps { ifs, .. } => {
            // Shallowest images with diameter ≤ threshold.
            let mut found = Vec::new();
            let mut stack = vec![hull.clone()];
            while let Some(iv) = stack.pop() {
                if iv.diameter() <= threshold {
                    found.push(iv);
                    continue;
                }
                for m in ifs.maps() {
                    stack.push(m.image(&iv));
                }
                if found.len() + stack.len() > PART_BUDGET_DEFAULT {
                    return Err(Error::Budget("cover selection exceeded budget".into()));
                }
            }
            found.sort_by(|x, y| x.lo().cmp(y.lo()));
            found
        }
    };
    if pieces.is_empty() {
        return Err(Error::Internal("cover selection found no pieces".into()));
    }
    let mut min_d = pieces[0].diameter();
    let mut max_d = min_d.clone();
    for piece in &pieces[1..] {
        let d = piece.diameter();
        if d < min_d {
            min_d = d.clone();
        }
        if d > max_d {
            max_d = d;
        }
    }
    Ok(CoverSelection {
        pieces,
        level,
        threshold,
        min_diameter: min_d,
        max_diameter: max_d,
    })
}

/// Points the second stage certainly misses: x is excluded when the window
/// [x − alpha·M − eps, x − alpha·m + eps] avoids (1−alpha)·K entirely, i.e.
/// fits inside one of its gaps. Every attractor point lies in
/// (1−alpha)·K ⊕ [alpha·m − eps, alpha·M + eps], so the returned open
/// intervals (the gaps of that envelope, computed exactly) are disjoint
/// from the attractor.
pub fn n_epsilon(fg: &FirstGen, alpha: &Scalar, eps: &Scalar) -> Result<Vec<Interval>> {
    Ok(n_epsilon_envelope(fg, alpha, eps)?.gaps())
}

/// The closed envelope whose gaps are the excluded windows.
pub fn n_epsilon_envelope(
    fg: &FirstGen,
    alpha: &Scalar,
    eps: &Scalar,
) -> Result<IntervalUnion> {
    if !(alpha.is_positive() && alpha < &Scalar::one()) {
        return Err(Error::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    if eps.is_negative() {
        return Err(Error::Input("eps must be ≥ 0".into()));
    }
    let hull = fg.hull();
    let term = fg.term(&(&Scalar::one() - alpha));
    let window = Interval::make(&(alpha * hull.lo()) - eps, &(alpha * hull.hi()) + eps);
    let superset = term.wide_gaps(&window.diameter())?;
    let mut out = Vec::new();
    term.plus_interval(&window, &superset, &mut out)?;
    Ok(IntervalUnion::exact(out))
}

const COMBINATION_CAP: usize = 65_536;

fn spread(pts: Vec<Scalar>, take: usize) -> Vec<Scalar> {
    if pts.len() <= take {
        return pts;
    }
    if take <= 1 {
        return vec![pts[0].clone()];
    }
    (0..take)
        .map(|k| pts[k * (pts.len() - 1) / (take - 1)].clone())
        .collect()
}

/// The n-term head sum Σ_{j<n} alpha^j·(1−alpha)·K bracketed both ways:
/// an outer union grown from a depth-`depth` cover of (1−alpha)·K, and
/// exact member points built as weighted sums of attractor points. The
/// sample depth backs off so the point product stays enumerable.
pub fn partial_geometric_sum(
    fg: &FirstGen,
    alpha: &Scalar,
    n: u32,
    depth: u32,
) -> Result<(IntervalUnion, Vec<Scalar>)> {
    if !(alpha.is_positive() && alpha < &Scalar::one()) {
        return Err(Error::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    if n < 1 {
        return Err(Error::Input("series head length must be ≥ 1".into()));
    }
    let hull = fg.hull().clone();
    let exact = hull.is_exact() && alpha.is_exact() && first_gen_exact(fg);
    let tau = default_merge_tau(&hull, exact);
    let head = fg.term(&(&Scalar::one() - alpha));
    let (mut outer, _) = head.seed_cover(depth)?;
    for _ in 1..n {
        let scaled = outer.affine(alpha, &Scalar::zero());
        outer = sum_term_union(&head, &scaled, &tau, PART_BUDGET_DEFAULT)?;
    }

    let mut max_per: usize = 1;
    while (max_per as u64 + 1)
        .checked_pow(n)
        .is_some_and(|c| c <= COMBINATION_CAP as u64)
    {
        max_per += 1;
    }
    let mut pts = fg.inner_points(0, COMBINATION_CAP)?;
    let mut d = 0u32;
    while d < depth && pts.len() < max_per {
        let next = fg.inner_points(d + 1, COMBINATION_CAP)?;
        if next.len() > max_per || next.len() <= pts.len() {
            break;
        }
        pts = next;
        d += 1;
    }
    let pts = spread(pts, max_per);

    let mut inner = vec![Scalar::zero()];
    let mut weight = &Scalar::one() - alpha;
    for _ in 0..n {
        let mut next = Vec::with_capacity(inner.len() * pts.len());
        for s in &inner {
            for p in &pts {
                next.push(s + &(&weight * p));
            }
        }
        weight = &weight * alpha;
        inner = next;
    }
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    inner.dedup();
    Ok((outer, inner))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Empirical,
    Certified,
}

/// How the reported union relates to the true attractor.
#[derive(Clone, Debug)]
pub enum TailCertificate {
    /// The first stage is an interval, so the series sums to the hull.
    SolidInput,
    /// The head length reached the merging count, past which every run of
    /// comparable-diameter summands provably fills its span.
    FoldCount {
        n_cert: u32,
        window: (Scalar, Scalar),
    },
    /// Outer approximation stabilized under the growth heuristic only.
    Empirical { stable_checks: u32 },
}

#[derive(Clone, Debug)]
pub struct SecondGenOptions {
    pub alpha: Scalar,
    /// Series head length; grown by the stabilization heuristic when None.
    pub n: Option<u32>,
    pub mode: Mode,
    /// Cover depth used to seed the deepest summand (default 8; series cost
    /// grows ~4x per extra level, while a longer head buys the same slack).
    pub seed_depth: u32,
    /// Merge tolerance; None picks 0 for exact data, 4·eps·d(hull) for floats.
    pub merge_tau: Option<Scalar>,
    pub part_budget: usize,
}

impl SecondGenOptions {
    pub fn new(alpha: Scalar) -> Self {
        SecondGenOptions {
            alpha,
            n: None,
            mode: Mode::Empirical,
            seed_depth: 8,
            merge_tau: None,
            part_budget: PART_BUDGET_DEFAULT,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SecondGenResult {
    pub set: IntervalUnion,
    pub hull: Interval,
    pub n_used: u32,
    pub certificate: TailCertificate,
    /// Ratio floor of the first stage, when certified.
    pub floor: Option<Scalar>,
    /// aprime(floor): the floor a union layer built on this stage would carry.
    pub floor_prime: Option<Scalar>,
    /// Theory estimate of the merging head length, when computable.
    pub n_cert_estimate: Option<u32>,
    /// Upper bound on the one-sided Hausdorff slack of the reported union.
    pub outer_slack: f64,
    pub merge_tau: Scalar,
    pub fixed_point_iterations: u32,
}

pub fn default_merge_tau(hull: &Interval, exact: bool) -> Scalar {
    if exact {
        Scalar::zero()
    } else {
        Scalar::from_f64(4.0 * f64::EPSILON) * hull.diameter()
    }
}

/// The second-stage attractor as a finite union of closed intervals.
pub fn second_gen_attractor(fg: &FirstGen, opts: &SecondGenOptions) -> Result<SecondGenResult> {
    let alpha = &opts.alpha;
    if !(alpha.is_positive() && alpha < &Scalar::one()) {
        return Err(Error::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    let hull = fg.hull().clone();
    let exact = hull.is_exact() && alpha.is_exact() && first_gen_exact(fg);
    let tau = opts
        .merge_tau
        .clone()
        .unwrap_or_else(|| default_merge_tau(&hull, exact));
    if tau.is_negative() {
        return Err(Error::Input("merge tolerance must be ≥ 0".into()));
    }
    let head = fg.term(&(&Scalar::one() - alpha));
    let (seed, seed_slack) = head.seed_cover(opts.seed_depth)?;

    // Series head S_k = (1−alpha)K ⊕ alpha·S_{k−1}, S_1 = seed; the seed
    // slack scales down by alpha at every step.
    let mut series = seed;
    let mut n_used = 1u32;
    let grow = |series: &mut IntervalUnion, n_used: &mut u32, target: u32| -> Result<()> {
        while *n_used < target {
            let scaled = series.affine(alpha, &Scalar::zero());
            *series = sum_term_union(&head, &scaled, &tau, opts.part_budget)?;
            *n_used += 1;
        }
        Ok(())
    };

    match opts.n {
        Some(n) => {
            if n < 1 {
                return Err(Error::Input("series head length must be ≥ 1".into()));
            }
            grow(&mut series, &mut n_used, n)?;
        }
        None => {
            // Depth defaults to whatever resolves the set to 2^-20 of its
            // diameter (or the merge tolerance, if coarser): the head slack
            // seed_slack·alpha^{n-1}/(1-alpha^n) must drop below that target.
            let rel = &hull.diameter() / &Scalar::from_int(1 << 20);
            let target = Scalar::max_of(&tau, &rel);
            let mut n_target = 1u32;
            let mut pow = Scalar::one();
            loop {
                let slack = &(&seed_slack * &pow) / &(&Scalar::one() - &(&pow * alpha));
                if slack <= target {
                    break;
                }
                if n_target >= STABILIZE_N_CAP {
                    return Err(Error::NonConvergence(n_target as usize));
                }
                n_target += 1;
                pow = &pow * alpha;
            }
            // A settled component count means deeper heads only shave slack
            // off an already-converged shape, so stop early.
            let mut plateau = 0u32;
            let mut last_count = series.count();
            while n_used < n_target {
                let next = n_used + 1;
                grow(&mut series, &mut n_used, next)?;
                if series.count() == last_count {
                    plateau += 1;
                    if plateau >= 2 {
                        break;
                    }
                } else {
                    plateau = 0;
                }
                last_count = series.count();
            }
        }
    }

    let mut certificate = TailCertificate::Empirical { stable_checks: 2 };
    let mut n_cert_estimate = None;
    if opts.mode == Mode::Certified {
        match certify_tail(fg, alpha)? {
            Some(TailPlan::Solid) => {
                certificate = TailCertificate::SolidInput;
            }
            Some(TailPlan::Fold { n_cert, window }) => {
                n_cert_estimate = Some(n_cert);
                if n_cert > STABILIZE_N_CAP {
                    return Err(Error::Budget(format!(
                        "certificate needs a series head of {n_cert} terms"
                    )));
                }
                grow(&mut series, &mut n_used, n_cert)?;
                certificate = TailCertificate::FoldCount { n_cert, window };
            }
            None => {
                return Err(Error::Budget(
                    "no tail certificate reachable for this system".into(),
                ));
            }
        }
    } else if let FirstGen::Cantor(_) = fg {
        // Cheap estimate for the report; failures here are not fatal.
        if let Ok(sel) = select_cover(fg, alpha, 1) {
            if let Some(a) = fg.floor() {
                n_cert_estimate =
                    geometric_count(&sel.min_diameter, &sel.max_diameter, a).ok();
            }
        }
    }

    // Tail fixed point: U ↦ series ⊕ alpha^n·U, iterated down from the hull.
    let tail_scale = alpha.powi(n_used);
    let mut u = IntervalUnion::exact(vec![hull.clone()]);
    let mut iterations = 0u32;
    loop {
        let scaled = u.affine(&tail_scale, &Scalar::zero());
        let next = series.minkowski_capped(&scaled, opts.part_budget)?;
        let next = IntervalUnion::normalize(next.parts().to_vec(), tau.clone());
        iterations += 1;
        if next.parts() == u.parts() {
            u = next;
            break;
        }
        u = next;
        if iterations as usize >= FIXED_POINT_ITER_CAP {
            return Err(Error::NonConvergence(iterations as usize));
        }
    }

    if let TailCertificate::SolidInput = certificate {
        if exact && u.parts() != std::slice::from_ref(&hull) {
            return Err(Error::Certificate(
                "solid certificate contradicts the computed union".into(),
            ));
        }
    }

    let floor = fg.floor().cloned();
    let floor_prime = floor.as_ref().map(aprime);
    let slack_geom = seed_slack.to_f64() * alpha.to_f64().powi(n_used.saturating_sub(1) as i32)
        / (1.0 - tail_scale.to_f64());
    Ok(SecondGenResult {
        set: u,
        hull,
        n_used,
        certificate,
        floor,
        floor_prime,
        n_cert_estimate,
        outer_slack: slack_geom + tau.to_f64(),
        merge_tau: tau,
        fixed_point_iterations: iterations,
    })
}

fn first_gen_exact(fg: &FirstGen) -> bool {
    match fg {
        FirstGen::Solid(iv) => iv.is_exact(),
        FirstGen::Cantor(c) => c.root().is_exact() && c.cover(1).map(|c1| c1.is_exact()).unwrap_or(false),
        FirstGen::Maps { cover, .. } => cover.is_exact(),
    }
}

/// One series step: term ⊕ union, exact per part. The gap tree is walked
/// once at the narrowest part width; raw pieces are folded down blockwise
/// so the budget measures merged parts, not transient ones.
fn sum_term_union(
    term: &Term,
    u: &IntervalUnion,
    tau: &Scalar,
    budget: usize,
) -> Result<IntervalUnion> {
    let parts = u.parts();
    if parts.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut min_width = parts[0].diameter();
    for part in &parts[1..] {
        let w = part.diameter();
        if w < min_width {
            min_width = w;
        }
    }
    let superset = term.wide_gaps(&min_width)?;
    const BLOCK: usize = 8192;
    const CHUNK: usize = 128;
    let mut acc: Vec<Interval> = Vec::new();
    let mut raw: Vec<Interval> = Vec::new();
    for chunk in parts.chunks(CHUNK) {
        let produced = exec::map_collect(chunk.to_vec(), |part| {
            let mut pieces = Vec::new();
            term.plus_interval(&part, &superset, &mut pieces)
                .map(|()| pieces)
        });
        for pieces in produced {
            raw.extend(pieces?);
        }
        if raw.len() >= BLOCK {
            raw.append(&mut acc);
            acc = IntervalUnion::normalize(std::mem::take(&mut raw), tau.clone()).into_parts();
            if acc.len() > budget {
                return Err(Error::Budget(format!(
                    "series step exceeded part budget {budget}"
                )));
            }
        }
    }
    raw.append(&mut acc);
    let out = IntervalUnion::normalize(raw, tau.clone());
    if out.count() > budget {
        return Err(Error::Budget(format!(
            "series step exceeded part budget {budget}"
        )));
    }
    Ok(out)
}

enum TailPlan {
    Solid,
    Fold { n_cert: u32, window: (Scalar, Scalar) },
}

/// Try to certify the tail. A solid first stage makes the whole series an
/// interval sum, so the hull is exact. Otherwise take the head length at
/// which a run of comparable-diameter summands provably merges.
fn certify_tail(fg: &FirstGen, alpha: &Scalar) -> Result<Option<TailPlan>> {
    if let FirstGen::Solid(_) = fg {
        return Ok(Some(TailPlan::Solid));
    }
    let floor = match fg.floor() {
        Some(a) => a.clone(),
        None => return Ok(None),
    };
    let sel = select_cover(fg, alpha, 1)?;
    match geometric_count(&sel.min_diameter, &sel.max_diameter, &floor) {
        Ok(n_cert) => Ok(Some(TailPlan::Fold {
            n_cert,
            window: (sel.min_diameter, sel.max_diameter),
        })),
        Err(Error::Budget(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Inclusion test bracketing a computed union between points that provably
/// belong to the attractor and a one-step outer envelope.
#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub inner_ok: bool,
    pub inner_points_checked: usize,
    pub outer_ok: bool,
    pub radius: Scalar,
}

pub fn sandwich_check(
    fg: &FirstGen,
    alpha: &Scalar,
    result: &IntervalUnion,
    depth: u32,
) -> Result<SandwichReport> {
    let hull = fg.hull();
    // On a hull of diameter 2 this is the classical 2·alpha blow-up.
    let radius = alpha * &hull.diameter();
    // phi_beta fixes beta, so every first-stage point is an attractor point.
    let betas = fg.inner_points(depth, 4096)?;
    let mut inner_ok = true;
    let mut checked = 0usize;
    for b in &betas {
        checked += 1;
        if !result.contains_point(b) {
            inner_ok = false;
        }
    }
    let fat = fg.outer_cover(depth)?.neighborhood(&radius);
    let outer_ok = result.subset_of(&fat);
    Ok(SandwichReport {
        inner_ok,
        inner_points_checked: checked,
        outer_ok,
        radius,
    })
}
