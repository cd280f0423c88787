//! Cantor sets presented as nested interval dissections indexed by binary
//! words. A `Construction` pairs a root interval with a rule that splits
//! every realized node into two strictly separated children; the limit set
//! is the intersection of the depth-n covers.
//!
//! Backings: a homogeneous self-similar rule, a finite user-supplied tree,
//! a two-map IFS generator, and the derived union / sum generators, plus
//! affine images and subtrees of any of these.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec;
use crate::ifs::TwoMapData;
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::setops::{aprime, separation_values};
use crate::union::IntervalUnion;
use crate::word::BinaryWord;

/// Hard ceiling on explicit-tree depth.
pub const EXPLICIT_DEPTH_CAP: u32 = 24;
/// Node-count guard for pruned gap walks.
const GAP_WALK_BUDGET: usize = 4_000_000;
/// Depth guard for pruned gap walks on rule backings.
const GAP_WALK_DEPTH_CAP: u32 = 2_000;

#[derive(Clone, Debug)]
pub struct ExplicitTree {
    depth: u32,
    cuts: HashMap<BinaryWord, (Scalar, Scalar)>,
}

#[derive(Clone, Debug)]
pub(crate) struct UnionData {
    pub(crate) left: Construction,
    pub(crate) right: Construction,
    pub(crate) n_bar: u32,
    pub(crate) a: Scalar,
}

#[derive(Clone, Debug)]
pub(crate) struct SumData {
    pub(crate) c1: Construction,
    pub(crate) c2: Construction,
}

#[derive(Clone, Debug)]
enum Backing {
    Homogeneous { cut_lo: Scalar, cut_hi: Scalar },
    Explicit(ExplicitTree),
    TwoMapIfs(Box<TwoMapData>),
    Union(Box<UnionData>),
    Sum(Box<SumData>),
    Affine { inner: Box<Construction>, scale: Scalar, offset: Scalar },
    Subtree { inner: Box<Construction>, prefix: BinaryWord },
}

/// Certificate attached to `ulbd_bound`: every ratio realized up to
/// `depth_checked` is ≥ `bound`; `exhaustive` marks self-similar backings
/// whose ratio set does not depend on depth.
#[derive(Clone, Debug)]
pub struct UlbdCertificate {
    pub bound: Scalar,
    pub depth_checked: u32,
    pub exhaustive: bool,
}

/// How a word of a union-backed construction is resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnionCase {
    /// w = 1^n, n ≤ n̄: spans from the wide set's spine node to the top.
    Spine(u32),
    /// w = 1^n̄ 0 w': the wide set's spine subtree.
    WideTail,
    /// w = 1^n̄ 1 w': a copy of the narrow set.
    NarrowSubtree,
    /// any other w: the wide set's own interval.
    WideBody,
}

/// Summary of a union construction's shape.
#[derive(Clone, Debug)]
pub struct UnionPlan {
    pub n_bar: u32,
    /// True when the wider input sat on the right, so the construction is
    /// the mirror image of the canonical one.
    pub reflected: bool,
    pub a: Scalar,
    pub a_prime: Scalar,
}

impl UnionPlan {
    /// Case of a word in canonical (unreflected) orientation; callers pass
    /// `w.flipped()` themselves when `reflected`.
    pub fn case_of(&self, w: &BinaryWord) -> UnionCase {
        let k = w.leading(1);
        if k == w.len() {
            if k <= self.n_bar {
                UnionCase::Spine(k)
            } else {
                UnionCase::NarrowSubtree
            }
        } else if k < self.n_bar {
            UnionCase::WideBody
        } else if k == self.n_bar {
            UnionCase::WideTail
        } else {
            UnionCase::NarrowSubtree
        }
    }
}

#[derive(Clone, Debug)]
pub struct Construction {
    root: Interval,
    backing: Backing,
    floor: Option<Scalar>,
    self_similar: bool,
}

impl Construction {
    /// Self-similar rule: every node splits at the same relative cut points,
    /// children [0, cut_lo] and [cut_hi, 1] in parent-relative coordinates.
    pub fn homogeneous(root: Interval, cut_lo: Scalar, cut_hi: Scalar) -> Result<Self> {
        if root.is_point() {
            return Err(Error::Input("degenerate root interval".into()));
        }
        if !(cut_lo.is_positive() && cut_lo < cut_hi && cut_hi < Scalar::one()) {
            return Err(Error::Input(format!(
                "cut points must satisfy 0 < {cut_lo} < {cut_hi} < 1"
            )));
        }
        let floor = Scalar::min_of(&cut_lo, &(&Scalar::one() - &cut_hi));
        Ok(Construction {
            root,
            backing: Backing::Homogeneous { cut_lo, cut_hi },
            floor: Some(floor),
            self_similar: true,
        })
    }

    pub fn middle_thirds(root: Interval) -> Self {
        Construction::homogeneous(root, Scalar::ratio(1, 3), Scalar::ratio(2, 3))
            .expect("fixed valid cuts")
    }

    /// Finite tree from explicit absolute cut points (c_w, d_w) per node.
    /// The tree must be complete to `depth`; deeper queries are refused.
    pub fn explicit(
        root: Interval,
        depth: u32,
        cut: impl Fn(&BinaryWord, &Interval) -> (Scalar, Scalar),
    ) -> Result<Self> {
        if root.is_point() {
            return Err(Error::Input("degenerate root interval".into()));
        }
        if depth > EXPLICIT_DEPTH_CAP {
            return Err(Error::Input(format!(
                "explicit tree depth {depth} exceeds cap {EXPLICIT_DEPTH_CAP}"
            )));
        }
        let mut cuts = HashMap::new();
        let mut frontier = vec![(BinaryWord::empty(), root.clone())];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (w, iv) in frontier {
                let (c, d) = cut(&w, &iv);
                if !(iv.lo() < &c && c < d && &d < iv.hi()) {
                    return Err(Error::Input(format!(
                        "cuts at {w} must satisfy {} < c < d < {}",
                        iv.lo(),
                        iv.hi()
                    )));
                }
                next.push((w.push(0), Interval::make(iv.lo().clone(), c.clone())));
                next.push((w.push(1), Interval::make(d.clone(), iv.hi().clone())));
                cuts.insert(w, (c, d));
            }
            frontier = next;
        }
        Ok(Construction {
            root,
            backing: Backing::Explicit(ExplicitTree { depth, cuts }),
            floor: None,
            self_similar: false,
        })
    }

    pub(crate) fn from_two_map(
        root: Interval,
        data: TwoMapData,
        floor: Scalar,
        self_similar: bool,
    ) -> Self {
        Construction {
            root,
            backing: Backing::TwoMapIfs(Box::new(data)),
            floor: Some(floor),
            self_similar,
        }
    }

    pub fn root(&self) -> &Interval {
        &self.root
    }

    pub fn min(&self) -> &Scalar {
        self.root.lo()
    }

    pub fn max(&self) -> &Scalar {
        self.root.hi()
    }

    pub fn diameter(&self) -> Scalar {
        self.root.diameter()
    }

    /// Certified lower bound on every dissection ratio at every depth, when
    /// the backing carries one. Finite explicit trees do not.
    pub fn floor(&self) -> Option<&Scalar> {
        self.floor.as_ref()
    }

    pub fn is_self_similar(&self) -> bool {
        self.self_similar
    }

    /// The construction interval I_w.
    pub fn interval(&self, w: &BinaryWord) -> Result<Interval> {
        if w.is_empty() {
            return Ok(self.root.clone());
        }
        match &self.backing {
            Backing::Homogeneous { cut_lo, cut_hi } => {
                let mut iv = self.root.clone();
                for letter in w.letters() {
                    let d = iv.diameter();
                    iv = if letter == 0 {
                        Interval::make(iv.lo().clone(), iv.lo() + &(cut_lo * &d))
                    } else {
                        Interval::make(iv.lo() + &(cut_hi * &d), iv.hi().clone())
                    };
                }
                Ok(iv)
            }
            Backing::Explicit(tree) => tree.interval(&self.root, w),
            Backing::TwoMapIfs(data) => data.interval(&self.root, w),
            Backing::Union(u) => u.interval(w),
            Backing::Sum(s) => s.interval(w),
            Backing::Affine { inner, scale, offset } => {
                let w2 = if scale.is_negative() { w.flipped() } else { *w };
                Ok(inner.interval(&w2)?.affine(scale, offset))
            }
            Backing::Subtree { inner, prefix } => inner.interval(&prefix.concat(w)),
        }
    }

    pub fn children(&self, w: &BinaryWord) -> Result<(Interval, Interval)> {
        Ok((self.interval(&w.push(0))?, self.interval(&w.push(1))?))
    }

    /// The open gap removed at node w: ]max I_{w0}, min I_{w1}[.
    pub fn gap(&self, w: &BinaryWord) -> Result<Interval> {
        let (c0, c1) = self.children(w)?;
        if c0.hi() >= c1.lo() {
            return Err(Error::Internal(format!(
                "children at {w} are not separated: {c0} vs {c1}"
            )));
        }
        Ok(Interval::make(c0.hi().clone(), c1.lo().clone()))
    }

    /// d(I_w) / d(I_parent); undefined for the root.
    pub fn dissection_ratio(&self, w: &BinaryWord) -> Result<Scalar> {
        let (parent, _) = w.parent().ok_or(Error::UndefinedRatio)?;
        let child = self.interval(w)?;
        let parent_iv = self.interval(&parent)?;
        Ok(&child.diameter() / &parent_iv.diameter())
    }

    /// The 2^n intervals {I_w : |w| = n} in increasing order.
    pub fn cover(&self, n: u32) -> Result<IntervalUnion> {
        if n > 26 {
            return Err(Error::Budget(format!("cover depth {n} implies 2^{n} intervals")));
        }
        let words: Vec<BinaryWord> = lex_words(n);
        let parts = if words.len() >= 4096 {
            let results = exec::map_collect(words, |w| self.interval(&w));
            results.into_iter().collect::<Result<Vec<_>>>()?
        } else {
            words
                .into_iter()
                .map(|w| self.interval(&w))
                .collect::<Result<Vec<_>>>()?
        };
        for pair in parts.windows(2) {
            if pair[0].hi() >= pair[1].lo() {
                return Err(Error::Internal(format!(
                    "cover pieces out of order or touching: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(IntervalUnion::exact(parts))
    }

    /// Sorted endpoints of the depth-n cover; all of them lie in the set.
    pub fn cover_endpoints(&self, n: u32) -> Result<Vec<Scalar>> {
        let cover = self.cover(n)?;
        let mut pts = Vec::with_capacity(cover.count() * 2);
        for p in cover.parts() {
            pts.push(p.lo().clone());
            pts.push(p.hi().clone());
        }
        Ok(pts)
    }

    /// Minimum realized ratio over all words of length ≤ depth.
    pub fn ulbd_bound(&self, depth: u32) -> Result<UlbdCertificate> {
        if depth < 1 {
            return Err(Error::Input("ulbd scan needs depth ≥ 1".into()));
        }
        if depth > 26 {
            return Err(Error::Budget(format!("ulbd scan depth {depth} too deep")));
        }
        let mut best: Option<Scalar> = None;
        let mut stack = vec![(BinaryWord::empty(), self.root.clone())];
        while let Some((w, iv)) = stack.pop() {
            let (c0, c1) = self.children(&w)?;
            let d = iv.diameter();
            for child in [&c0, &c1] {
                let r = &child.diameter() / &d;
                if best.as_ref().is_none_or(|b| &r < b) {
                    best = Some(r);
                }
            }
            if w.len() + 1 < depth {
                stack.push((w.push(0), c0));
                stack.push((w.push(1), c1));
            }
        }
        Ok(UlbdCertificate {
            bound: best.expect("depth ≥ 1 visits the root"),
            depth_checked: depth,
            exhaustive: self.self_similar,
        })
    }

    /// Largest gap width, searched with diameter pruning: a gap inside I_w
    /// is narrower than d(I_w), so subtrees that cannot beat the current
    /// best are skipped. `exhaustive` is false only if the walk was cut off
    /// by the depth cap, the node budget, or a backing running out of depth.
    pub fn max_gap(&self, depth_cap: u32) -> Result<(Scalar, bool)> {
        let mut best = Scalar::zero();
        let mut exhaustive = true;
        let mut visited = 0usize;
        let mut stack = vec![(BinaryWord::empty(), self.root.clone())];
        while let Some((w, iv)) = stack.pop() {
            if iv.diameter() <= best {
                continue;
            }
            if w.len() >= depth_cap {
                exhaustive = false;
                continue;
            }
            visited += 1;
            if visited > GAP_WALK_BUDGET {
                exhaustive = false;
                break;
            }
            let (c0, c1) = match self.children(&w) {
                Ok(pair) => pair,
                Err(Error::DepthUnavailable { .. }) => {
                    exhaustive = false;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let g = c1.lo() - c0.hi();
            if g > best {
                best = g;
            }
            stack.push((w.push(0), c0));
            stack.push((w.push(1), c1));
        }
        Ok((best, exhaustive))
    }

    /// All gaps at words of length < depth, in ascending position order.
    pub fn gaps_to_depth(&self, depth: u32) -> Result<Vec<Interval>> {
        let mut out = Vec::new();
        self.gaps_in_order(&BinaryWord::empty(), depth, &mut out)?;
        Ok(out)
    }

    fn gaps_in_order(&self, w: &BinaryWord, depth: u32, out: &mut Vec<Interval>) -> Result<()> {
        if w.len() >= depth {
            return Ok(());
        }
        let (c0, c1) = self.children(w)?;
        self.gaps_in_order(&w.push(0), depth, out)?;
        out.push(Interval::make(c0.hi().clone(), c1.lo().clone()));
        self.gaps_in_order(&w.push(1), depth, out)?;
        Ok(())
    }

    /// Gaps strictly wider than `threshold`, in ascending order. Subtrees
    /// with diameter ≤ threshold cannot contain one and are pruned, so on
    /// rule backings this enumerates every such gap of the limit set. On a
    /// depth-limited backing the walk simply stops at the frontier, which
    /// under-reports gaps; callers treating absent gaps as filled stay outer.
    pub fn gaps_wider_than(&self, threshold: &Scalar) -> Result<Vec<Interval>> {
        let mut out = Vec::new();
        let mut visited = 0usize;
        self.wide_gap_walk(&BinaryWord::empty(), &self.root.clone(), threshold, &mut out, &mut visited)?;
        Ok(out)
    }

    fn wide_gap_walk(
        &self,
        w: &BinaryWord,
        iv: &Interval,
        threshold: &Scalar,
        out: &mut Vec<Interval>,
        visited: &mut usize,
    ) -> Result<()> {
        if &iv.diameter() <= threshold || w.len() >= GAP_WALK_DEPTH_CAP {
            return Ok(());
        }
        *visited += 1;
        if *visited > GAP_WALK_BUDGET {
            return Err(Error::Budget("gap enumeration exceeded node budget".into()));
        }
        let (c0, c1) = match self.children(w) {
            Ok(pair) => pair,
            Err(Error::DepthUnavailable { .. }) => return Ok(()),
            Err(e) => return Err(e),
        };
        self.wide_gap_walk(&w.push(0), &c0, threshold, out, visited)?;
        if &(c1.lo() - c0.hi()) > threshold {
            out.push(Interval::make(c0.hi().clone(), c1.lo().clone()));
        }
        self.wide_gap_walk(&w.push(1), &c1, threshold, out, visited)?;
        Ok(())
    }

    /// Maximal nodes whose interval diameter is ≤ max_diam: an outer cover
    /// at the requested resolution. Nodes still above the resolution at
    /// depth_cap are emitted as-is (result stays outer, only coarser).
    pub fn adaptive_cover(&self, max_diam: &Scalar, depth_cap: u32) -> Result<IntervalUnion> {
        let mut parts = Vec::new();
        let mut stack = vec![(BinaryWord::empty(), self.root.clone())];
        while let Some((w, iv)) = stack.pop() {
            if &iv.diameter() <= max_diam || w.len() >= depth_cap {
                parts.push(iv);
                continue;
            }
            match self.children(&w) {
                Ok((c0, c1)) => {
                    stack.push((w.push(0), c0));
                    stack.push((w.push(1), c1));
                }
                Err(Error::DepthUnavailable { .. }) => parts.push(iv),
                Err(e) => return Err(e),
            }
            if parts.len() + stack.len() > GAP_WALK_BUDGET {
                return Err(Error::Budget("adaptive cover exceeded node budget".into()));
            }
        }
        Ok(IntervalUnion::exact(parts))
    }

    /// The subtree construction rooted at I_w: rule(w') = self.rule(ww').
    pub fn subtree(&self, w: &BinaryWord) -> Result<Construction> {
        let root = self.interval(w)?;
        if w.is_empty() {
            return Ok(self.clone());
        }
        let backing = match &self.backing {
            Backing::Subtree { inner, prefix } => Backing::Subtree {
                inner: inner.clone(),
                prefix: prefix.concat(w),
            },
            _ => Backing::Subtree {
                inner: Box::new(self.clone()),
                prefix: *w,
            },
        };
        Ok(Construction {
            root,
            backing,
            floor: self.floor.clone(),
            self_similar: self.self_similar,
        })
    }

    /// Image under x ↦ scale·x + offset (scale ≠ 0); a negative scale
    /// mirrors the tree, exchanging child roles.
    pub fn affine_image(&self, scale: &Scalar, offset: &Scalar) -> Construction {
        assert!(!scale.is_zero(), "zero scale collapses the construction");
        let root = self.root.affine(scale, offset);
        let backing = match &self.backing {
            Backing::Affine { inner, scale: s0, offset: t0 } => Backing::Affine {
                inner: inner.clone(),
                scale: scale * s0,
                offset: &(scale * t0) + offset,
            },
            _ => Backing::Affine {
                inner: Box::new(self.clone()),
                scale: scale.clone(),
                offset: offset.clone(),
            },
        };
        Construction {
            root,
            backing,
            floor: self.floor.clone(),
            self_similar: self.self_similar,
        }
    }

    pub fn translate(&self, t: &Scalar) -> Construction {
        self.affine_image(&Scalar::one(), t)
    }

    pub fn reflect(&self) -> Construction {
        self.affine_image(&(-Scalar::one()), &Scalar::zero())
    }

    /// Shape summary when this is a union-backed construction (possibly
    /// behind the reflection wrapper).
    pub fn union_plan(&self) -> Option<UnionPlan> {
        match &self.backing {
            Backing::Union(u) => Some(UnionPlan {
                n_bar: u.n_bar,
                reflected: false,
                a: u.a.clone(),
                a_prime: aprime(&u.a),
            }),
            Backing::Affine { inner, scale, .. } if scale.is_negative() => {
                inner.union_plan().map(|p| UnionPlan { reflected: !p.reflected, ..p })
            }
            _ => None,
        }
    }

    /// Nesting and ratio-sum invariants over every node to the given depth.
    pub fn validate(&self, depth: u32) -> Result<()> {
        let mut stack = vec![(BinaryWord::empty(), self.root.clone())];
        while let Some((w, iv)) = stack.pop() {
            if w.len() >= depth {
                continue;
            }
            let (c0, c1) = self.children(&w)?;
            if c0.lo() != iv.lo() || c1.hi() != iv.hi() {
                return Err(Error::Internal(format!(
                    "children at {w} do not share parent endpoints"
                )));
            }
            if !(c0.hi() < c1.lo()) {
                return Err(Error::Internal(format!("no gap at {w}")));
            }
            if c0.is_point() || c1.is_point() {
                return Err(Error::Internal(format!("degenerate child at {w}")));
            }
            let d = iv.diameter();
            if &c0.diameter() + &c1.diameter() >= d {
                return Err(Error::Internal(format!("ratio sum ≥ 1 at {w}")));
            }
            stack.push((w.push(0), c0));
            stack.push((w.push(1), c1));
        }
        Ok(())
    }
}

/// All words of length n in lexicographic order.
fn lex_words(n: u32) -> Vec<BinaryWord> {
    let count = 1u64 << n;
    (0..count)
        .map(|bits| {
            let mut w = BinaryWord::empty();
            for i in (0..n).rev() {
                w = w.push(((bits >> i) & 1) as u8);
            }
            w
        })
        .collect()
}

impl ExplicitTree {
    fn interval(&self, root: &Interval, w: &BinaryWord) -> Result<Interval> {
        if w.len() > self.depth {
            return Err(Error::DepthUnavailable {
                requested: w.len(),
                available: self.depth,
            });
        }
        let mut iv = root.clone();
        let mut node = BinaryWord::empty();
        for letter in w.letters() {
            let (c, d) = self.cuts.get(&node).ok_or(Error::Internal(
                "explicit tree missing a realized node".into(),
            ))?;
            iv = if letter == 0 {
                Interval::make(iv.lo().clone(), c.clone())
            } else {
                Interval::make(d.clone(), iv.hi().clone())
            };
            node = node.push(letter);
        }
        Ok(iv)
    }
}

impl UnionData {
    fn interval(&self, w: &BinaryWord) -> Result<Interval> {
        let k = w.leading(1);
        if k == w.len() {
            if k <= self.n_bar {
                let lo = self.left.interval(&BinaryWord::ones(k))?.lo().clone();
                return Ok(Interval::make(lo, self.right.max().clone()));
            }
            return self.right.interval(&w.suffix(self.n_bar + 1));
        }
        if k < self.n_bar {
            self.left.interval(w)
        } else if k == self.n_bar {
            // 1^n̄ 0 w' resolves to the wide set at 1^n̄ w'.
            let tail = w.suffix(self.n_bar + 1);
            self.left.interval(&BinaryWord::ones(self.n_bar).concat(&tail))
        } else {
            self.right.interval(&w.suffix(self.n_bar + 1))
        }
    }
}

impl SumData {
    fn floor_pair(&self) -> Result<(Scalar, Scalar)> {
        let f1 = self
            .c1
            .floor()
            .ok_or_else(|| Error::Certificate("sum input lacks a ratio floor".into()))?;
        let f2 = self
            .c2
            .floor()
            .ok_or_else(|| Error::Certificate("sum input lacks a ratio floor".into()))?;
        Ok((f1.clone(), f2.clone()))
    }

    /// The union construction realizing the 1-child at spine node 0^n.
    fn level_union(&self, n: u32) -> Result<Construction> {
        let zn = BinaryWord::zeros(n);
        let g1 = self.c1.gap(&zn)?.diameter();
        let g2 = self.c2.gap(&zn)?.diameter();
        // Whichever input has the narrower gap at 0^n contributes the lower
        // translated copy.
        let (x, y) = if g1 <= g2 { (&self.c2, &self.c1) } else { (&self.c1, &self.c2) };
        let w01 = zn.push(1);
        let w00 = zn.push(0);
        let a1 = x.subtree(&w01)?.translate(y.interval(&w00)?.hi());
        let a2 = y.subtree(&w01)?.translate(x.interval(&w01)?.hi());
        let (u, _) = build_union(a1, a2)?;
        Ok(u)
    }

    fn interval(&self, w: &BinaryWord) -> Result<Interval> {
        let n = w.leading(0);
        if n == w.len() {
            let zn = BinaryWord::zeros(n);
            return Ok(self.c1.interval(&zn)?.minkowski(&self.c2.interval(&zn)?));
        }
        self.level_union(n)?.interval(&w.suffix(n + 1))
    }
}

/// Interleaves two strictly separated certified constructions into one whose
/// limit set is exactly the union of the two limit sets. The wider input
/// anchors the spine; if it sits on the right, the construction is built in
/// mirror image and reflected back.
pub(crate) fn build_union(c1: Construction, c2: Construction) -> Result<(Construction, UnionPlan)> {
    let f1 = c1
        .floor()
        .cloned()
        .ok_or_else(|| Error::Certificate("union input lacks a ratio floor".into()))?;
    let f2 = c2
        .floor()
        .cloned()
        .ok_or_else(|| Error::Certificate("union input lacks a ratio floor".into()))?;
    let (lo_set, hi_set, f_lo, f_hi) = if c1.max() < c2.min() {
        (c1, c2, f1, f2)
    } else if c2.max() < c1.min() {
        (c2, c1, f2, f1)
    } else {
        return Err(Error::Overlap(c1.root().to_string(), c2.root().to_string()));
    };
    let a = separation_values(lo_set.root(), hi_set.root(), &f_lo, &f_hi);
    if !a.is_positive() {
        return Err(Error::Internal("separation quotient not positive".into()));
    }
    let floor = aprime(&a);
    if lo_set.diameter() >= hi_set.diameter() {
        let n_bar = spine_crossover(&lo_set, &hi_set.diameter())?;
        let plan = UnionPlan { n_bar, reflected: false, a: a.clone(), a_prime: floor.clone() };
        let root = Interval::make(lo_set.min().clone(), hi_set.max().clone());
        let data = UnionData { left: lo_set, right: hi_set, n_bar, a };
        Ok((
            Construction {
                root,
                backing: Backing::Union(Box::new(data)),
                floor: Some(floor),
                self_similar: false,
            },
            plan,
        ))
    } else {
        // Mirror: reflect both, build with the (now left) wide set, reflect back.
        let rl = hi_set.reflect();
        let rr = lo_set.reflect();
        let n_bar = spine_crossover(&rl, &rr.diameter())?;
        let plan = UnionPlan { n_bar, reflected: true, a: a.clone(), a_prime: floor.clone() };
        let root = Interval::make(rl.min().clone(), rr.max().clone());
        let data = UnionData { left: rl, right: rr, n_bar, a };
        let mirrored = Construction {
            root,
            backing: Backing::Union(Box::new(data)),
            floor: Some(floor),
            self_similar: false,
        };
        Ok((mirrored.reflect(), plan))
    }
}

/// Largest n with d(I_left at 1^n) ≥ target; requires it to hold at n = 0.
fn spine_crossover(left: &Construction, target: &Scalar) -> Result<u32> {
    debug_assert!(&left.diameter() >= target);
    let mut n = 0u32;
    loop {
        let next = left.interval(&BinaryWord::ones(n + 1))?;
        if &next.diameter() >= target {
            n += 1;
        } else {
            return Ok(n);
        }
    }
}

pub(crate) fn build_sum(c1: Construction, c2: Construction) -> Result<Construction> {
    let data = SumData { c1, c2 };
    let (f1, f2) = data.floor_pair()?;
    let floor = aprime(&Scalar::min_of(&f1, &f2));
    let root = data.c1.root().minkowski(data.c2.root());
    Ok(Construction {
        root,
        backing: Backing::Sum(Box::new(data)),
        floor: Some(floor),
        self_similar: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_thirds() -> Construction {
        Construction::middle_thirds(Interval::unit())
    }

    #[test]
    fn middle_third_covers() {
        let c = unit_thirds();
        let c0 = c.cover(0).unwrap();
        assert_eq!(c0.parts(), &[Interval::unit()]);
        let c2 = c.cover(2).unwrap();
        let expect = [
            (Scalar::zero(), Scalar::ratio(1, 9)),
            (Scalar::ratio(2, 9), Scalar::ratio(1, 3)),
            (Scalar::ratio(2, 3), Scalar::ratio(7, 9)),
            (Scalar::ratio(8, 9), Scalar::one()),
        ];
        assert_eq!(c2.count(), 4);
        for (part, (lo, hi)) in c2.parts().iter().zip(expect) {
            assert_eq!(part.lo(), &lo);
            assert_eq!(part.hi(), &hi);
        }
    }

    #[test]
    fn middle_third_ratio_and_gap() {
        let c = unit_thirds();
        let w = BinaryWord::from_letters(&[0, 1]);
        assert_eq!(c.dissection_ratio(&w).unwrap(), Scalar::ratio(1, 3));
        assert!(matches!(
            c.dissection_ratio(&BinaryWord::empty()),
            Err(Error::UndefinedRatio)
        ));
        let g = c.gap(&BinaryWord::empty()).unwrap();
        assert_eq!(g.lo(), &Scalar::ratio(1, 3));
        assert_eq!(g.hi(), &Scalar::ratio(2, 3));
        let g0 = c.gap(&BinaryWord::from_letters(&[0])).unwrap();
        assert_eq!(g0.lo(), &Scalar::ratio(1, 9));
        assert_eq!(g0.hi(), &Scalar::ratio(2, 9));
    }

    #[test]
    fn custom_rule_ratios() {
        let c = Construction::homogeneous(
            Interval::unit(),
            Scalar::ratio(1, 5),
            Scalar::ratio(7, 10),
        )
        .unwrap();
        let w0 = BinaryWord::from_letters(&[0]);
        let w1 = BinaryWord::from_letters(&[1]);
        assert_eq!(c.dissection_ratio(&w0).unwrap(), Scalar::ratio(1, 5));
        assert_eq!(c.dissection_ratio(&w1).unwrap(), Scalar::ratio(3, 10));
        let cert = c.ulbd_bound(5).unwrap();
        assert_eq!(cert.bound, Scalar::ratio(1, 5));
        assert!(cert.exhaustive);
    }

    #[test]
    fn max_gap_prunes_exactly() {
        let c = unit_thirds();
        let (g, exhaustive) = c.max_gap(8).unwrap();
        assert_eq!(g, Scalar::ratio(1, 3));
        assert!(exhaustive);
    }

    #[test]
    fn subtree_is_self_similar_copy() {
        let c = unit_thirds();
        let s = c.subtree(&BinaryWord::from_letters(&[0])).unwrap();
        assert_eq!(s.root(), &Interval::make(Scalar::zero(), Scalar::ratio(1, 3)));
        let sc = s.cover(2).unwrap();
        let direct: Vec<Interval> = c
            .cover(3)
            .unwrap()
            .parts()
            .iter()
            .take(4)
            .cloned()
            .collect();
        assert_eq!(sc.parts(), &direct[..]);
    }

    #[test]
    fn explicit_tree_depth_limit() {
        let c = Construction::explicit(Interval::unit(), 3, |_, iv| {
            let d = iv.diameter();
            (
                iv.lo() + &(&d * &Scalar::ratio(1, 4)),
                iv.lo() + &(&d * &Scalar::ratio(1, 2)),
            )
        })
        .unwrap();
        assert!(c.cover(3).is_ok());
        assert!(matches!(
            c.cover(4),
            Err(Error::DepthUnavailable { requested: 4, available: 3 })
        ));
        assert!(c.floor().is_none());
    }

    #[test]
    fn affine_image_reflects() {
        let c = Construction::homogeneous(
            Interval::unit(),
            Scalar::ratio(1, 5),
            Scalar::ratio(7, 10),
        )
        .unwrap();
        let r = c.reflect();
        // Reflection maps the left child of width 1/5 to the right side.
        let w1 = BinaryWord::from_letters(&[1]);
        assert_eq!(r.dissection_ratio(&w1).unwrap(), Scalar::ratio(1, 5));
        let rr = r.interval(&w1).unwrap();
        assert_eq!(rr.lo(), &Scalar::ratio(-1, 5));
        assert_eq!(rr.hi(), &Scalar::zero());
        r.validate(4).unwrap();
    }

    #[test]
    fn gaps_partition_with_cover() {
        let c = unit_thirds();
        let n = 4;
        let cover = c.cover(n).unwrap();
        let gaps = c.gaps_to_depth(n).unwrap();
        // Total length of cover plus gaps equals the root diameter.
        let mut total = Scalar::zero();
        for p in cover.parts() {
            total = &total + &p.diameter();
        }
        for g in &gaps {
            total = &total + &g.diameter();
        }
        assert_eq!(total, Scalar::one());
        assert_eq!(gaps.len(), (1 << n) - 1);
    }

    #[test]
    fn wide_gaps_enumeration() {
        let c = unit_thirds();
        let wide = c.gaps_wider_than(&Scalar::ratio(1, 10)).unwrap();
        // Gaps wider than 1/10: widths 1/3 (one) and 1/9 (two).
        assert_eq!(wide.len(), 3);
        assert_eq!(wide[1].diameter(), Scalar::ratio(1, 3));
    }

    #[test]
    fn adaptive_cover_matches_depth_cover() {
        let c = unit_thirds();
        let a = c.adaptive_cover(&Scalar::ratio(1, 9), 16).unwrap();
        let d2 = c.cover(2).unwrap();
        assert_eq!(a.parts(), d2.parts());
    }

    #[test]
    fn validate_catches_good_tree() {
        unit_thirds().validate(6).unwrap();
    }
}
