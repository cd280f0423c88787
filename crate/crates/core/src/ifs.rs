//! Contractions of the line and iterated function systems built from them.
//!
//! Affine maps keep exact arithmetic end to end. Smooth maps carry caller
//! declared derivative bounds 0 < sigma ≤ |f'| ≤ delta < 1 and |f''| ≤ B on
//! an explicit domain; the constructor cross-checks the declarations by
//! dense sampling and rejects maps that visibly violate them.

use std::fmt;
use std::sync::Arc;

use crate::dissection::Construction;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::word::BinaryWord;

const SAMPLE_POINTS: usize = 2048;
const HULL_ITER_CAP: usize = 20_000;

pub struct SmoothMap {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    deriv: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    sigma: f64,
    delta: f64,
    second_bound: f64,
    domain: Interval,
    increasing: bool,
    label: String,
}

#[derive(Clone)]
enum MapRepr {
    Affine { slope: Scalar, intercept: Scalar },
    Smooth(Arc<SmoothMap>),
}

#[derive(Clone)]
pub struct ContractionMap {
    repr: MapRepr,
}

impl fmt::Debug for ContractionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            MapRepr::Affine { slope, intercept } => {
                write!(f, "Affine({slope}·x + {intercept})")
            }
            MapRepr::Smooth(m) => write!(f, "Smooth({})", m.label),
        }
    }
}

impl ContractionMap {
    /// x ↦ slope·x + intercept with 0 < |slope| < 1.
    pub fn affine(slope: Scalar, intercept: Scalar) -> Result<Self> {
        let mag = slope.abs();
        if !(mag.is_positive() && mag < Scalar::one()) {
            return Err(Error::Input(format!(
                "affine slope {slope} must satisfy 0 < |slope| < 1"
            )));
        }
        Ok(ContractionMap {
            repr: MapRepr::Affine { slope, intercept },
        })
    }

    /// A C² contraction given by closures plus declared bounds. Sampling
    /// checks that sigma ≤ |f'| ≤ delta holds, that the derivative keeps one
    /// sign, that f maps the domain into itself, and that finite differences
    /// of f' stay within the declared |f''| bound.
    pub fn smooth(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma: f64,
        delta: f64,
        second_bound: f64,
        domain: Interval,
    ) -> Result<Self> {
        let label = label.into();
        if !(sigma > 0.0 && sigma <= delta && delta < 1.0) {
            return Err(Error::Input(format!(
                "derivative bounds must satisfy 0 < {sigma} ≤ {delta} < 1"
            )));
        }
        if !(second_bound >= 0.0 && second_bound.is_finite()) {
            return Err(Error::Input("second-derivative bound must be finite and ≥ 0".into()));
        }
        let (lo, hi) = domain.to_f64_pair();
        if !(lo < hi) {
            return Err(Error::Input("smooth map domain is degenerate".into()));
        }
        let h = (hi - lo) / SAMPLE_POINTS as f64;
        let sign = deriv(lo).signum();
        if sign == 0.0 {
            return Err(Error::Input("derivative vanishes at the domain edge".into()));
        }
        let mut prev_d = deriv(lo);
        for k in 0..=SAMPLE_POINTS {
            let x = lo + h * k as f64;
            let d = deriv(x);
            let mag = d.abs();
            if d.signum() != sign {
                return Err(Error::Input(format!(
                    "map {label}: derivative changes sign near x = {x}"
                )));
            }
            if mag < sigma - 1e-12 || mag > delta + 1e-12 {
                return Err(Error::Input(format!(
                    "map {label}: |f'({x})| = {mag} outside declared [{sigma}, {delta}]"
                )));
            }
            if k > 0 {
                let fd = (d - prev_d).abs() / h;
                if fd > second_bound * 1.001 + 1e-9 {
                    return Err(Error::Input(format!(
                        "map {label}: |f''| ≈ {fd} near x = {x} exceeds declared {second_bound}"
                    )));
                }
            }
            prev_d = d;
        }
        let (flo, fhi) = (f(lo), f(hi));
        let (img_lo, img_hi) = if sign > 0.0 { (flo, fhi) } else { (fhi, flo) };
        if img_lo < lo - 1e-12 || img_hi > hi + 1e-12 {
            return Err(Error::Input(format!(
                "map {label}: image [{img_lo}, {img_hi}] escapes the domain"
            )));
        }
        Ok(ContractionMap {
            repr: MapRepr::Smooth(Arc::new(SmoothMap {
                f: Box::new(f),
                deriv: Box::new(deriv),
                sigma,
                delta,
                second_bound,
                domain,
                increasing: sign > 0.0,
                label,
            })),
        })
    }

    /// c0 + c1·x + c2·x² as a smooth map; derivative bounds are computed
    /// exactly from the coefficients since f' is linear on the domain.
    pub fn quadratic(c0: f64, c1: f64, c2: f64, domain: Interval) -> Result<Self> {
        if c2 == 0.0 {
            return ContractionMap::affine(Scalar::from_f64(c1), Scalar::from_f64(c0));
        }
        let (lo, hi) = domain.to_f64_pair();
        let d_lo = c1 + 2.0 * c2 * lo;
        let d_hi = c1 + 2.0 * c2 * hi;
        let sigma = d_lo.abs().min(d_hi.abs());
        let delta = d_lo.abs().max(d_hi.abs());
        ContractionMap::smooth(
            format!("{c0} + {c1}x + {c2}x²"),
            move |x| c0 + c1 * x + c2 * x * x,
            move |x| c1 + 2.0 * c2 * x,
            sigma,
            delta,
            (2.0 * c2).abs(),
            domain,
        )
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.repr, MapRepr::Affine { .. })
    }

    pub fn affine_parts(&self) -> Option<(&Scalar, &Scalar)> {
        match &self.repr {
            MapRepr::Affine { slope, intercept } => Some((slope, intercept)),
            MapRepr::Smooth(_) => None,
        }
    }

    pub fn is_increasing(&self) -> bool {
        match &self.repr {
            MapRepr::Affine { slope, .. } => slope.is_positive(),
            MapRepr::Smooth(m) => m.increasing,
        }
    }

    /// inf |f'| over the domain (the slope magnitude for affine maps).
    pub fn sigma(&self) -> Scalar {
        match &self.repr {
            MapRepr::Affine { slope, .. } => slope.abs(),
            MapRepr::Smooth(m) => Scalar::from_f64(m.sigma),
        }
    }

    /// sup |f'| over the domain.
    pub fn delta(&self) -> Scalar {
        match &self.repr {
            MapRepr::Affine { slope, .. } => slope.abs(),
            MapRepr::Smooth(m) => Scalar::from_f64(m.delta),
        }
    }

    /// sup |f''| over the domain; exactly zero for affine maps.
    pub fn second_bound(&self) -> Scalar {
        match &self.repr {
            MapRepr::Affine { .. } => Scalar::zero(),
            MapRepr::Smooth(m) => Scalar::from_f64(m.second_bound),
        }
    }

    pub fn domain(&self) -> Option<&Interval> {
        match &self.repr {
            MapRepr::Affine { .. } => None,
            MapRepr::Smooth(m) => Some(&m.domain),
        }
    }

    pub fn apply(&self, x: &Scalar) -> Scalar {
        match &self.repr {
            MapRepr::Affine { slope, intercept } => &(slope * x) + intercept,
            MapRepr::Smooth(m) => Scalar::from_f64((m.f)(x.to_f64())),
        }
    }

    pub fn apply_f64(&self, x: f64) -> f64 {
        match &self.repr {
            MapRepr::Affine { slope, intercept } => slope.to_f64() * x + intercept.to_f64(),
            MapRepr::Smooth(m) => (m.f)(x),
        }
    }

    pub fn deriv_f64(&self, x: f64) -> f64 {
        match &self.repr {
            MapRepr::Affine { slope, .. } => slope.to_f64(),
            MapRepr::Smooth(m) => (m.deriv)(x),
        }
    }

    /// Image of an interval; monotonicity makes the endpoints suffice.
    pub fn image(&self, iv: &Interval) -> Interval {
        let a = self.apply(iv.lo());
        let b = self.apply(iv.hi());
        if self.is_increasing() {
            Interval::make(a, b)
        } else {
            Interval::make(b, a)
        }
    }
}

/// The unique x with f(x) = x. Exact for affine maps; smooth maps are
/// bisected on their domain, where contraction pins the root down.
pub fn fixed_point(map: &ContractionMap) -> Result<Scalar> {
    match &map.repr {
        MapRepr::Affine { slope, intercept } => Ok(intercept / &(&Scalar::one() - slope)),
        MapRepr::Smooth(m) => {
            let (mut lo, mut hi) = m.domain.to_f64_pair();
            // g(x) = f(x) − x is strictly decreasing for any contraction.
            let g = |x: f64| (m.f)(x) - x;
            if g(lo) < 0.0 || g(hi) > 0.0 {
                return Err(Error::Input(format!(
                    "map {}: no sign change of f(x)−x on the domain",
                    m.label
                )));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(Scalar::from_f64(0.5 * (lo + hi)))
        }
    }
}

/// f ∘ g with derived derivative bounds: the affine/affine case composes
/// exactly, any other pair chains closures and combines declared bounds
/// (sup|F''| ≤ B_f·delta_g² + delta_f·B_g for F = f∘g).
pub fn compose_maps(f: &ContractionMap, g: &ContractionMap) -> Result<ContractionMap> {
    match (&f.repr, &g.repr) {
        (
            MapRepr::Affine { slope: sf, intercept: tf },
            MapRepr::Affine { slope: sg, intercept: tg },
        ) => ContractionMap::affine(sf * sg, &(sf * tg) + tf),
        _ => {
            let domain = g
                .domain()
                .or_else(|| f.domain())
                .ok_or_else(|| Error::Input("composition needs a domain".into()))?
                .clone();
            let (ff, gg) = (f.clone(), g.clone());
            let (fd, gd) = (f.clone(), g.clone());
            let sigma = (f.sigma().to_f64()) * (g.sigma().to_f64());
            let delta = (f.delta().to_f64()) * (g.delta().to_f64());
            let second = f.second_bound().to_f64() * g.delta().to_f64().powi(2)
                + f.delta().to_f64() * g.second_bound().to_f64();
            ContractionMap::smooth(
                "composite",
                move |x| ff.apply_f64(gg.apply_f64(x)),
                move |x| fd.deriv_f64(gd.apply_f64(x)) * gd.deriv_f64(x),
                sigma,
                delta,
                second,
                domain,
            )
        }
    }
}

#[derive(Clone, Debug)]
pub struct Ifs {
    maps: Vec<ContractionMap>,
}

/// Outcome of resolving a two-map system: either the images already cover
/// the hull (the attractor is that whole interval) or they are separated
/// and generate a Cantor construction.
#[derive(Clone, Debug)]
pub enum TwoMapOutcome {
    Interval(Interval),
    Cantor(Construction),
}

impl Ifs {
    pub fn new(maps: Vec<ContractionMap>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::Input("an IFS needs at least two maps".into()));
        }
        Ok(Ifs { maps })
    }

    pub fn maps(&self) -> &[ContractionMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_affine(&self) -> bool {
        self.maps.iter().all(|m| m.is_affine())
    }

    /// Smallest interval [m, M] with every image inside and both endpoints
    /// attained: the convex hull of the attractor. All-affine systems are
    /// solved exactly by casing on which map attains each endpoint; anything
    /// else iterates the interval map downward from the common domain.
    pub fn hull(&self) -> Result<Interval> {
        if self.is_affine() {
            return self.hull_affine();
        }
        let mut domain: Option<Interval> = None;
        for m in &self.maps {
            if let Some(d) = m.domain() {
                domain = Some(match domain {
                    None => d.clone(),
                    Some(cur) => Interval::make(
                        Scalar::min_of(cur.lo(), d.lo()),
                        Scalar::max_of(cur.hi(), d.hi()),
                    ),
                });
            }
        }
        let mut iv = domain.ok_or_else(|| Error::Input("no domain for hull iteration".into()))?;
        for _ in 0..HULL_ITER_CAP {
            let mut lo: Option<Scalar> = None;
            let mut hi: Option<Scalar> = None;
            for m in &self.maps {
                let img = m.image(&iv);
                if lo.as_ref().is_none_or(|l| img.lo() < l) {
                    lo = Some(img.lo().clone());
                }
                if hi.as_ref().is_none_or(|h| img.hi() > h) {
                    hi = Some(img.hi().clone());
                }
            }
            let next = Interval::new(lo.unwrap(), hi.unwrap())?;
            if &next == &iv {
                break;
            }
            iv = next;
        }
        if iv.diameter().to_f64() < 1e-300 {
            return Err(Error::DegenerateAttractor);
        }
        Ok(iv)
    }

    fn hull_affine(&self) -> Result<Interval> {
        let one = Scalar::one();
        let n = self.maps.len();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (si, ti) = self.maps[i].affine_parts().unwrap();
                let (sj, tj) = self.maps[j].affine_parts().unwrap();
                // Map i attains the minimum, map j the maximum.
                let (m, big) = match (si.is_positive(), sj.is_positive()) {
                    (true, true) => (ti / &(&one - si), tj / &(&one - sj)),
                    (true, false) => {
                        let m = ti / &(&one - si);
                        let big = &(sj * &m) + tj;
                        (m, big)
                    }
                    (false, true) => {
                        let big = tj / &(&one - sj);
                        let m = &(si * &big) + ti;
                        (m, big)
                    }
                    (false, false) => {
                        let m = &(&(si * tj) + ti) / &(&one - &(si * sj));
                        let big = &(sj * &m) + tj;
                        (m, big)
                    }
                };
                if m >= big {
                    continue;
                }
                let hull = Interval::make(m, big);
                if self.verify_hull(&hull) {
                    return Ok(hull);
                }
            }
        }
        // No separated pair of extreme maps: every map must pin the same
        // fixed point, a one-point attractor.
        Err(Error::DegenerateAttractor)
    }

    fn verify_hull(&self, hull: &Interval) -> bool {
        let mut min_attained = false;
        let mut max_attained = false;
        for m in &self.maps {
            let img = m.image(hull);
            if img.lo() < hull.lo() || img.hi() > hull.hi() {
                return false;
            }
            min_attained |= img.lo() == hull.lo();
            max_attained |= img.hi() == hull.hi();
        }
        min_attained && max_attained
    }

    /// Indices of the first map whose image attains the hull minimum and
    /// the first attaining the maximum.
    pub fn extreme_submaps(&self) -> Result<(usize, usize)> {
        let hull = self.hull()?;
        let images: Vec<Interval> = self.maps.iter().map(|m| m.image(&hull)).collect();
        let mut lo_idx = 0;
        let mut hi_idx = 0;
        for (k, img) in images.iter().enumerate() {
            if img.lo() < images[lo_idx].lo() {
                lo_idx = k;
            }
            if img.hi() > images[hi_idx].hi() {
                hi_idx = k;
            }
        }
        Ok((lo_idx, hi_idx))
    }

    /// Lower bound on every dissection ratio any composite of these maps
    /// can produce on the hull: sigma·exp(−B·d/(sigma·(1−delta))) with the
    /// worst constants over the system and d the hull diameter. Affine
    /// systems get exactly sigma.
    pub fn ratio_floor(&self) -> Result<Scalar> {
        let hull = self.hull()?;
        let mut sigma = self.maps[0].sigma();
        let mut delta = self.maps[0].delta();
        let mut second = self.maps[0].second_bound();
        for m in &self.maps[1..] {
            sigma = Scalar::min_of(&sigma, &m.sigma());
            delta = Scalar::max_of(&delta, &m.delta());
            second = Scalar::max_of(&second, &m.second_bound());
        }
        if second.is_zero() {
            return Ok(sigma);
        }
        let exponent = -(&(&second * &hull.diameter())
            / &(&sigma * &(&Scalar::one() - &delta)));
        Ok(&sigma * &exponent.exp())
    }

    /// Resolve a two-map system: overlapping or touching images mean the
    /// attractor is the whole hull; separated images generate a Cantor
    /// construction whose node at w is the image of the hull under the
    /// composite selected by w (children ordered left to right per node).
    pub fn two_map_construction(&self) -> Result<TwoMapOutcome> {
        if self.maps.len() != 2 {
            return Err(Error::Input(format!(
                "two-map resolution on {} maps",
                self.maps.len()
            )));
        }
        let hull = self.hull()?;
        let img0 = self.maps[0].image(&hull);
        let img1 = self.maps[1].image(&hull);
        let (left, right) = if img0.lo() <= img1.lo() { (&img0, &img1) } else { (&img1, &img0) };
        if left.hi() >= right.lo() {
            return Ok(TwoMapOutcome::Interval(hull));
        }
        let floor = self.ratio_floor()?;
        let self_similar = self.is_affine();
        let data = TwoMapData {
            maps: [self.maps[0].clone(), self.maps[1].clone()],
            all_affine: self_similar,
        };
        Ok(TwoMapOutcome::Cantor(Construction::from_two_map(
            hull,
            data,
            floor,
            self_similar,
        )))
    }
}

/// Composite state along a branch of the two-map tree.
enum Composite {
    Affine { s: Scalar, t: Scalar },
    Chain(Vec<u8>),
}

impl Composite {
    fn identity(affine: bool) -> Composite {
        if affine {
            Composite::Affine { s: Scalar::one(), t: Scalar::zero() }
        } else {
            Composite::Chain(Vec::new())
        }
    }

    fn step(&self, maps: &[ContractionMap; 2], idx: u8) -> Composite {
        match self {
            Composite::Affine { s, t } => {
                let (si, ti) = maps[idx as usize].affine_parts().expect("affine chain");
                Composite::Affine { s: s * si, t: &(s * ti) + t }
            }
            Composite::Chain(v) => {
                let mut v2 = v.clone();
                v2.push(idx);
                Composite::Chain(v2)
            }
        }
    }

    fn image(&self, maps: &[ContractionMap; 2], root: &Interval) -> Interval {
        match self {
            Composite::Affine { s, t } => root.affine(s, t),
            Composite::Chain(v) => {
                let eval = |x0: f64| {
                    let mut x = x0;
                    for &i in v.iter().rev() {
                        x = maps[i as usize].apply_f64(x);
                    }
                    x
                };
                let (lo, hi) = root.to_f64_pair();
                let (a, b) = (eval(lo), eval(hi));
                Interval::make(Scalar::from_f64(a.min(b)), Scalar::from_f64(a.max(b)))
            }
        }
    }
}

/// Backing data for constructions generated by a separated two-map system.
#[derive(Clone)]
pub struct TwoMapData {
    maps: [ContractionMap; 2],
    all_affine: bool,
}

impl fmt::Debug for TwoMapData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoMapData({:?}, {:?})", self.maps[0], self.maps[1])
    }
}

impl TwoMapData {
    pub(crate) fn interval(&self, root: &Interval, w: &BinaryWord) -> Result<Interval> {
        let mut state = Composite::identity(self.all_affine);
        for letter in w.letters() {
            let c0 = state.step(&self.maps, 0);
            let c1 = state.step(&self.maps, 1);
            let i0 = c0.image(&self.maps, root);
            let i1 = c1.image(&self.maps, root);
            // Left child is whichever composite image sits lower; negative
            // slopes swap the roles from node to node.
            let (left, right) = if i0.lo() <= i1.lo() { (c0, c1) } else { (c1, c0) };
            state = if letter == 0 { left } else { right };
        }
        Ok(state.image(&self.maps, root))
    }
}
