//! Job descriptions: a JSON file names a first-stage system plus the knobs
//! shared by the subcommands. Scalars arrive as strings ("p/q" or decimal,
//! kept exact when possible) or as JSON numbers (taken as f64).

use cantor_forge_core::{
    sum_subset_construct, union_construct, Construction, ContractionMap, Error, FirstGen, Ifs,
    Interval, Result, Scalar, TwoMapOutcome,
};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub system: SystemSpec,
    #[serde(default)]
    pub alpha: Option<ScalarSpec>,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub eps: Option<ScalarSpec>,
    #[serde(default)]
    pub tol: Option<ScalarSpec>,
    #[serde(default)]
    pub merge_tau: Option<ScalarSpec>,
    #[serde(default)]
    pub part_budget: Option<usize>,
    #[serde(default)]
    pub wider_than: Option<ScalarSpec>,
    #[serde(default)]
    pub grid_h: Option<f64>,
    #[serde(default)]
    pub beta_depth: Option<u32>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Solid {
        interval: [ScalarSpec; 2],
    },
    Thirds {
        interval: [ScalarSpec; 2],
    },
    Cantor {
        interval: [ScalarSpec; 2],
        cut_lo: ScalarSpec,
        cut_hi: ScalarSpec,
    },
    Maps {
        maps: Vec<MapSpec>,
        #[serde(default)]
        resolution: Option<ScalarSpec>,
    },
    Union {
        parts: Vec<SystemSpec>,
    },
    Sum {
        parts: Vec<SystemSpec>,
        a: ScalarSpec,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Affine {
        slope: ScalarSpec,
        intercept: ScalarSpec,
    },
    Quadratic {
        c0: f64,
        c1: f64,
        c2: f64,
        domain: [ScalarSpec; 2],
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Text(String),
    Num(f64),
}

impl ScalarSpec {
    pub fn resolve(&self, path: &str) -> Result<Scalar> {
        match self {
            ScalarSpec::Text(s) => {
                Scalar::parse(s).map_err(|e| Error::Input(format!("{path}: {e}")))
            }
            ScalarSpec::Num(x) => {
                if !x.is_finite() {
                    return Err(Error::Input(format!("{path}: non-finite number")));
                }
                Ok(Scalar::from_f64(*x))
            }
        }
    }
}

pub fn load(path: &std::path::Path) -> Result<JobSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("spec {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("spec parse: {e}")))
}

fn resolve_interval(pair: &[ScalarSpec; 2], path: &str) -> Result<Interval> {
    let lo = pair[0].resolve(&format!("{path}[0]"))?;
    let hi = pair[1].resolve(&format!("{path}[1]"))?;
    Interval::new(lo, hi).map_err(|e| Error::Input(format!("{path}: {e}")))
}

fn resolve_map(m: &MapSpec, path: &str) -> Result<ContractionMap> {
    match m {
        MapSpec::Affine { slope, intercept } => {
            let s = slope.resolve(&format!("{path}.slope"))?;
            let t = intercept.resolve(&format!("{path}.intercept"))?;
            ContractionMap::affine(s, t).map_err(|e| Error::Input(format!("{path}: {e}")))
        }
        MapSpec::Quadratic { c0, c1, c2, domain } => {
            let dom = resolve_interval(domain, &format!("{path}.domain"))?;
            ContractionMap::quadratic(*c0, *c1, *c2, dom)
                .map_err(|e| Error::Input(format!("{path}: {e}")))
        }
    }
}

fn resolve_ifs(maps: &[MapSpec], path: &str) -> Result<Ifs> {
    if maps.len() < 2 {
        return Err(Error::Input(format!(
            "{path}: a system needs at least two maps with distinct fixed points"
        )));
    }
    let mut built = Vec::with_capacity(maps.len());
    for (i, m) in maps.iter().enumerate() {
        built.push(resolve_map(m, &format!("{path}[{i}]"))?);
    }
    Ifs::new(built).map_err(|e| Error::Input(format!("{path}: {e}")))
}

/// A dissection view of the system, for the commands that need the tree
/// itself rather than the attractor.
fn resolve_construction(spec: &SystemSpec, path: &str) -> Result<Construction> {
    match spec {
        SystemSpec::Solid { .. } => Err(Error::Input(format!(
            "{path}: a solid interval carries no dissection"
        ))),
        SystemSpec::Thirds { interval } => Ok(Construction::middle_thirds(resolve_interval(
            interval,
            &format!("{path}.interval"),
        )?)),
        SystemSpec::Cantor {
            interval,
            cut_lo,
            cut_hi,
        } => {
            let iv = resolve_interval(interval, &format!("{path}.interval"))?;
            let lo = cut_lo.resolve(&format!("{path}.cut_lo"))?;
            let hi = cut_hi.resolve(&format!("{path}.cut_hi"))?;
            Construction::homogeneous(iv, lo, hi)
                .map_err(|e| Error::Input(format!("{path}: {e}")))
        }
        SystemSpec::Maps { maps, .. } => {
            let ifs = resolve_ifs(maps, &format!("{path}.maps"))?;
            if ifs.len() != 2 {
                return Err(Error::Input(format!(
                    "{path}: only two-map systems dissect into a tree"
                )));
            }
            match ifs.two_map_construction()? {
                TwoMapOutcome::Cantor(c) => Ok(c),
                TwoMapOutcome::Interval(_) => Err(Error::Input(format!(
                    "{path}: the maps fill their hull, leaving no dissection"
                ))),
            }
        }
        SystemSpec::Union { parts } => {
            if parts.len() != 2 {
                return Err(Error::Input(format!(
                    "{path}.parts: a union takes exactly two systems"
                )));
            }
            let c1 = resolve_construction(&parts[0], &format!("{path}.parts[0]"))?;
            let c2 = resolve_construction(&parts[1], &format!("{path}.parts[1]"))?;
            Ok(union_construct(&c1, &c2)?.0)
        }
        SystemSpec::Sum { parts, a } => {
            let cs = resolve_sum_parts(parts, path)?;
            let a = a.resolve(&format!("{path}.a"))?;
            sum_subset_construct(&cs, &a)
        }
    }
}

pub fn resolve_sum_parts(parts: &[SystemSpec], path: &str) -> Result<Vec<Construction>> {
    if parts.is_empty() {
        return Err(Error::Input(format!(
            "{path}.parts: a sum takes at least one system"
        )));
    }
    let mut cs = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        cs.push(resolve_construction(p, &format!("{path}.parts[{i}]"))?);
    }
    Ok(cs)
}

pub struct Resolved {
    pub fg: FirstGen,
    pub construction: Option<Construction>,
    pub ifs: Option<Ifs>,
    /// Summands and claimed floor when the system is a sum.
    pub sum: Option<(Vec<Construction>, Scalar)>,
}

pub fn resolve_system(spec: &SystemSpec) -> Result<Resolved> {
    let path = "spec.system";
    match spec {
        SystemSpec::Solid { interval } => {
            let iv = resolve_interval(interval, &format!("{path}.interval"))?;
            Ok(Resolved {
                fg: FirstGen::Solid(iv),
                construction: None,
                ifs: None,
                sum: None,
            })
        }
        SystemSpec::Maps { maps, resolution } => {
            let ifs = resolve_ifs(maps, &format!("{path}.maps"))?;
            let hull = ifs.hull()?;
            let res = match resolution {
                Some(r) => r.resolve(&format!("{path}.resolution"))?,
                None => &hull.diameter() / &Scalar::from_int(1 << 10),
            };
            let fg = FirstGen::from_ifs(&ifs, &res)?;
            let construction = match &fg {
                FirstGen::Cantor(c) => Some(c.clone()),
                _ => None,
            };
            Ok(Resolved {
                fg,
                construction,
                ifs: Some(ifs),
                sum: None,
            })
        }
        SystemSpec::Sum { parts, a } => {
            let cs = resolve_sum_parts(parts, path)?;
            let a = a.resolve(&format!("{path}.a"))?;
            let combined = sum_subset_construct(&cs, &a)?;
            Ok(Resolved {
                fg: FirstGen::from_construction(combined.clone()),
                construction: Some(combined),
                ifs: None,
                sum: Some((cs, a)),
            })
        }
        other => {
            let c = resolve_construction(other, path)?;
            Ok(Resolved {
                fg: FirstGen::from_construction(c.clone()),
                construction: Some(c),
                ifs: None,
                sum: None,
            })
        }
    }
}

/// Affine maps realizing a self-similar two-ratio dissection, for grid
/// cross-checks of systems given as trees.
pub fn synthesize_ifs(c: &Construction) -> Result<Ifs> {
    if !c.is_self_similar() {
        return Err(Error::Input(
            "spec.system: only self-similar systems have map form for the grid".into(),
        ));
    }
    let root = c.root();
    let (left, right) = c.children(&cantor_forge_core::BinaryWord::empty())?;
    let d = root.diameter();
    let sl = &left.diameter() / &d;
    let sr = &right.diameter() / &d;
    let tl = left.lo() - &(&sl * root.lo());
    let tr = right.hi() - &(&sr * root.hi());
    Ok(Ifs::new(vec![
        ContractionMap::affine(sl, tl)?,
        ContractionMap::affine(sr, tr)?,
    ])?)
}
