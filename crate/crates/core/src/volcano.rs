//! Undirected ascending/descending graphs and volcano verdicts.
//!
//! A loop adds 1 to the degree of its vertex, not 2.

use crate::error::{Error, Result};
use crate::graph::{EdgeType, GraphSpec, IsogenyGraph};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, VecDeque};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Asc,
    Desc,
}

/// Leveled undirected multigraph; edges are stored as sorted pairs, loops
/// as (v, v).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UndirectedLeveledGraph {
    /// Original vertex ids.
    pub vertices: Vec<usize>,
    pub levels: BTreeMap<usize, usize>,
    pub edges: Vec<(usize, usize)>,
}

impl UndirectedLeveledGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| {
                if a == b {
                    (a == v) as usize
                } else {
                    (a == v) as usize + (b == v) as usize
                }
            })
            .sum()
    }

    pub fn depth(&self) -> usize {
        self.levels.values().copied().max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.first() else {
            return true;
        };
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut seen = std::collections::HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in adj.get(&v).into_iter().flatten() {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// The subgraph induced on one level.
    pub fn level(&self, i: usize) -> UndirectedLeveledGraph {
        let vertices: Vec<usize> = self
            .vertices
            .iter()
            .copied()
            .filter(|v| self.levels[v] == i)
            .collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|(a, b)| self.levels[a] == i && self.levels[b] == i)
            .collect();
        let levels = vertices.iter().map(|&v| (v, i)).collect();
        UndirectedLeveledGraph {
            vertices,
            levels,
            edges,
        }
    }
}

/// Drops directions of the ascending (or descending) edges of the vertices
/// in `component` (all vertices when `None`) and pairs horizontal edges.
pub fn undirect(
    g: &IsogenyGraph,
    which: Which,
    component: Option<usize>,
) -> UndirectedLeveledGraph {
    let keep = |v: usize| component.is_none_or(|c| g.vertices[v].component == c);
    let vertices: Vec<usize> = g
        .vertices
        .iter()
        .map(|v| v.id)
        .filter(|&v| keep(v))
        .collect();
    let levels = vertices.iter().map(|&v| (v, g.vertices[v].level)).collect();
    let wanted = match which {
        Which::Asc => EdgeType::Ascending,
        Which::Desc => EdgeType::Descending,
    };
    let mut edges = Vec::new();
    let mut horizontal: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in g.edges.iter().filter(|e| keep(e.src)) {
        if e.kind == wanted {
            edges.push((e.src.min(e.dst), e.src.max(e.dst)));
        } else if e.kind == EdgeType::Horizontal {
            *horizontal.entry((e.src, e.dst)).or_default() += 1;
        }
    }
    for (&(a, b), &k) in &horizontal {
        if a == b {
            edges.extend(std::iter::repeat_n((a, a), k));
        } else if a < b {
            let back = horizontal.get(&(b, a)).copied().unwrap_or(0);
            edges.extend(std::iter::repeat_n((a, b), k.min(back)));
        }
    }
    edges.sort();
    UndirectedLeveledGraph {
        vertices,
        levels,
        edges,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum VolcanoFailure {
    Empty,
    NotConnected,
    /// Condition 1: the surface is not regular of degree at most two.
    SurfaceNotRegular {
        degrees: Vec<usize>,
    },
    /// Condition 2: a vertex below the surface does not have exactly one
    /// edge to the level above, or an edge joins non-consecutive levels.
    BadUpwardEdges {
        vertex: usize,
    },
    /// Condition 3: degrees off the bottom level disagree or give r < 1.
    IrregularDegree {
        vertex: usize,
        degree: usize,
    },
    /// G^asc and G^desc differ.
    AscNeDesc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum VolcanoCheck {
    /// `r` is `None` when the graph has a single level, where every r works.
    Volcano {
        r: Option<u64>,
    },
    NotVolcano(VolcanoFailure),
}

impl VolcanoCheck {
    pub fn is_volcano(&self) -> bool {
        matches!(self, VolcanoCheck::Volcano { .. })
    }

    pub fn r(&self) -> Option<u64> {
        match self {
            VolcanoCheck::Volcano { r } => *r,
            _ => None,
        }
    }
}

/// Checks the three conditions of an r-volcano against the given levels.
pub fn is_r_volcano(u: &UndirectedLeveledGraph) -> VolcanoCheck {
    use VolcanoFailure::*;
    if u.vertices.is_empty() {
        return VolcanoCheck::NotVolcano(Empty);
    }
    if !u.is_connected() {
        return VolcanoCheck::NotVolcano(NotConnected);
    }
    let surface = u.level(0);
    let mut degs: Vec<usize> = surface
        .vertices
        .iter()
        .map(|&v| surface.degree(v))
        .collect();
    degs.sort();
    degs.dedup();
    if degs.len() > 1 || degs[0] > 2 {
        return VolcanoCheck::NotVolcano(SurfaceNotRegular { degrees: degs });
    }
    for &v in &u.vertices {
        let lv = u.levels[&v];
        let mut up = 0;
        for &(a, b) in &u.edges {
            if a != v && b != v {
                continue;
            }
            let w = if a == v { b } else { a };
            let lw = u.levels[&w];
            if lw == lv && lv != 0 {
                return VolcanoCheck::NotVolcano(BadUpwardEdges { vertex: v });
            }
            if lw.abs_diff(lv) > 1 {
                return VolcanoCheck::NotVolcano(BadUpwardEdges { vertex: v });
            }
            if lv > 0 && lw + 1 == lv {
                up += 1;
            }
        }
        if lv > 0 && up != 1 {
            return VolcanoCheck::NotVolcano(BadUpwardEdges { vertex: v });
        }
    }
    let d = u.depth();
    if d == 0 {
        return VolcanoCheck::Volcano { r: None };
    }
    let mut r_plus_1 = None;
    for &v in &u.vertices {
        if u.levels[&v] == d {
            continue;
        }
        let deg = u.degree(v);
        match r_plus_1 {
            None if deg >= 2 => r_plus_1 = Some(deg),
            Some(x) if x == deg => {}
            _ => {
                return VolcanoCheck::NotVolcano(IrregularDegree {
                    vertex: v,
                    degree: deg,
                })
            }
        }
    }
    VolcanoCheck::Volcano {
        r: r_plus_1.map(|x| x as u64 - 1),
    }
}

/// What the theorems say about one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "prediction", rename_all = "snake_case")]
pub enum Prediction {
    Volcano {
        r: Option<u64>,
    },
    NotVolcano {
        reason: String,
    },
    NotCoveredByTheorem {
        reason: String,
    },
    /// Residue size or unit indices missing.
    Unavailable {
        reason: String,
    },
}

/// Surface prediction from the structure of l·O_0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "prediction", rename_all = "snake_case")]
pub enum SurfacePrediction {
    Connected { r0: u64 },
    Disconnected,
    NotCoveredByTheorem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentVerdict {
    pub component: usize,
    pub structural: VolcanoCheck,
    pub asc_equals_desc: bool,
    pub asc_connected: bool,
    pub surface_connected: bool,
    pub predicted: Prediction,
    pub surface_predicted: SurfacePrediction,
    /// Structural and predicted verdicts disagree.
    pub internal_error: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VolcanoVerdict {
    pub components: Vec<ComponentVerdict>,
    /// Predicted truth of G^asc = G^desc.
    pub predicted_asc_equals_desc: bool,
}

impl VolcanoVerdict {
    pub fn all_volcanoes(&self) -> bool {
        self.components.iter().all(|c| c.structural.is_volcano())
    }

    pub fn internal_error(&self) -> bool {
        self.components.iter().any(|c| c.internal_error)
    }
}

fn is_principal(spec: &GraphSpec, level: usize) -> Result<bool> {
    let c = spec
        .chain
        .l_extension_class
        .get(level)
        .and_then(|c| c.as_ref())
        .ok_or(Error::MissingPrincipalityData { level })?;
    Ok(c.iter().all(|x| *x == 0))
}

/// r + 1 from the degree formulas, when they agree.
fn formula_r(spec: &GraphSpec) -> std::result::Result<Option<u64>, Prediction> {
    let chain = &spec.chain;
    let (Some(s), Some(units)) = (chain.residue_size, chain.unit_indices.as_ref()) else {
        return Err(Prediction::Unavailable {
            reason: "residue size or unit indices unknown".into(),
        });
    };
    if units.len() < spec.d_min {
        return Err(Prediction::Unavailable {
            reason: "too few unit indices".into(),
        });
    }
    let delta = chain.delta_l as i64;
    let s = BigInt::from(s);
    let mut values = Vec::new();
    // surface: (s − δ)/u_1 + r_0, with r_0 = δ + 1 (which is 2 when split)
    values.push(
        BigRational::new(&s - delta, BigInt::from(units[0]))
            + BigRational::from_integer(BigInt::from(delta + 1)),
    );
    for i in 1..spec.d_min {
        values.push(
            BigRational::new(s.clone(), BigInt::from(units[i]))
                + BigRational::from_integer(1.into()),
        );
    }
    let first = &values[0];
    if values.iter().any(|v| v != first) {
        return Err(Prediction::NotVolcano {
            reason: format!("degree formulas disagree: {values:?}"),
        });
    }
    if !first.is_integer() || first.to_integer() < BigInt::from(2) {
        return Err(Prediction::NotVolcano {
            reason: format!("r + 1 = {first} is not an integer at least 2"),
        });
    }
    Ok(Some(first.to_integer().to_u64().unwrap() - 1))
}

/// Closed-form prediction for one component of the graph of `spec`.
pub fn predict(spec: &GraphSpec) -> Result<Prediction> {
    let delta = spec.chain.delta_l;
    let principal0 = is_principal(spec, 0)?;
    if spec.d_min == 0 {
        return Ok(match (delta, principal0) {
            (_, true) => Prediction::Volcano { r: None },
            (1, false) => Prediction::NotCoveredByTheorem {
                reason: "split, d_min = 0 and l*O_0 not principal".into(),
            },
            (_, false) => Prediction::NotVolcano {
                reason: "l*O_0 is not principal".into(),
            },
        });
    }
    if spec.d_min == spec.depth {
        return Ok(Prediction::NotVolcano {
            reason: "d_min = d: no descending edges into the bottom level".into(),
        });
    }
    if !is_principal(spec, spec.d_min - 1)? {
        return Ok(Prediction::NotVolcano {
            reason: format!("l*O_{} is not principal", spec.d_min - 1),
        });
    }
    Ok(match formula_r(spec) {
        Ok(r) => Prediction::Volcano { r },
        Err(p) => p,
    })
}

pub fn predict_surface(spec: &GraphSpec) -> Result<SurfacePrediction> {
    let delta = spec.chain.delta_l;
    let principal0 = is_principal(spec, 0)?;
    Ok(match (delta, principal0) {
        (1, true) => SurfacePrediction::Connected { r0: 2 },
        (1, false) => SurfacePrediction::NotCoveredByTheorem,
        (d, true) => SurfacePrediction::Connected { r0: (d + 1) as u64 },
        (_, false) => SurfacePrediction::Disconnected,
    })
}

/// G^asc = G^desc ⇔ d_min = 0, or d_min < d and l·O_{d_min−1} is principal.
pub fn predict_asc_equals_desc(spec: &GraphSpec) -> Result<bool> {
    Ok(spec.d_min == 0 || (spec.d_min < spec.depth && is_principal(spec, spec.d_min - 1)?))
}

pub fn volcano_verdict(g: &IsogenyGraph, spec: &GraphSpec) -> Result<VolcanoVerdict> {
    let predicted = predict(spec)?;
    let surface_predicted = predict_surface(spec)?;
    let predicted_eq = predict_asc_equals_desc(spec)?;
    let mut components = Vec::new();
    for c in 0..g.components {
        let asc = undirect(g, Which::Asc, Some(c));
        let desc = undirect(g, Which::Desc, Some(c));
        let asc_equals_desc = asc == desc;
        let structural = if asc_equals_desc {
            is_r_volcano(&asc)
        } else {
            VolcanoCheck::NotVolcano(VolcanoFailure::AscNeDesc)
        };
        let internal_error = match &predicted {
            Prediction::Volcano { r } => {
                !structural.is_volcano()
                    || (r.is_some() && structural.r().is_some() && *r != structural.r())
            }
            Prediction::NotVolcano { .. } => structural.is_volcano(),
            _ => false,
        } || asc_equals_desc != predicted_eq;
        components.push(ComponentVerdict {
            component: c,
            asc_connected: asc.is_connected(),
            surface_connected: asc.level(0).is_connected(),
            structural,
            asc_equals_desc,
            predicted: predicted.clone(),
            surface_predicted: surface_predicted.clone(),
            internal_error,
        });
    }
    Ok(VolcanoVerdict {
        components,
        predicted_asc_equals_desc: predicted_eq,
    })
}
