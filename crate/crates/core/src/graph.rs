//! The (R, l)-isogeny graph, built from a ladder and class data.
//!
//! Vertices are ideal-class labels: a vertex at level i of a component is an
//! element of Cl(O_i) lying over that component's surface coset, one copy per
//! orbit. No abelian varieties are ever constructed.

use crate::algebra::EtaleAlgebra;
use crate::classgroup::{ClassChainData, GroupElement};
use crate::error::{Error, Result};
use crate::ladder::{is_bass_at, MultiplicatorLadder};
use crate::lattice::index;
use crate::maximal::{m_maximal_overorder, maximal_order};
use crate::order::{maximal_ideals_above, maximal_ideals_over, Order};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

// ---------------------------------------------------------------------------
// Newton polygon and the kind of isogeny class

fn valuation(x: &BigInt, p: &BigInt) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let mut v = 0;
    let mut y = x.clone();
    while (&y % p).is_zero() {
        y /= p;
        v += 1;
    }
    Some(v)
}

/// Slopes of the p-adic Newton polygon of h (coefficients low to high),
/// normalized so that they lie in [0, 1]; sorted, with multiplicity.
pub fn newton_slopes(h: &[BigInt], p: &BigInt, q: &BigInt) -> Vec<BigRational> {
    let vq = valuation(q, p).expect("q is nonzero");
    let pts: Vec<(i64, i64)> = h
        .iter()
        .enumerate()
        .filter_map(|(i, c)| valuation(c, p).map(|v| (i as i64, v as i64)))
        .collect();
    // lower convex hull, left to right
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::new();
    for w in hull.windows(2) {
        let (di, dv) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let s = BigRational::new(BigInt::from(-dv), BigInt::from(di * vq as i64));
        out.extend(std::iter::repeat_n(s, di as usize));
    }
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IsogenyKind {
    Ordinary,
    AlmostOrdinary,
    PrimeField,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NRule {
    One,
    /// N = 1 if the prime (p, π, q/π) ramifies in O_K, else 2.
    AlmostOrdinaryRule {
        ramified: bool,
    },
    UserSupplied(u64),
}

impl NRule {
    pub fn value(&self) -> u64 {
        match self {
            NRule::One => 1,
            NRule::AlmostOrdinaryRule { ramified: true } => 1,
            NRule::AlmostOrdinaryRule { ramified: false } => 2,
            NRule::UserSupplied(n) => *n,
        }
    }

    /// Whether N follows from the theory rather than from the user.
    pub fn verified(&self) -> bool {
        !matches!(self, NRule::UserSupplied(_))
    }
}

#[derive(Clone, Debug)]
pub struct IsogenyClassContext {
    pub p: BigInt,
    pub q: BigInt,
    pub slopes: Vec<BigRational>,
    pub kind: IsogenyKind,
    pub o_min: Option<Order>,
    pub n_rule: NRule,
}

fn slopes_pattern(g: usize, inner: &[BigRational]) -> Vec<BigRational> {
    let k = (2 * g - inner.len()) / 2;
    let mut v = vec![BigRational::zero(); k];
    v.extend_from_slice(inner);
    v.extend(std::iter::repeat_n(BigRational::one(), k));
    v
}

/// Classifies the isogeny class of `alg` and finds O_min and the orbit
/// rule. `n_override` is required for kind `Other` and ignored otherwise.
pub fn classify_isogeny_class(
    alg: &EtaleAlgebra,
    n_override: Option<u64>,
) -> Result<IsogenyClassContext> {
    let q = alg
        .q()
        .ok_or_else(|| Error::InvalidInput("q is not set".into()))?
        .clone();
    let p = alg
        .p()
        .ok_or_else(|| Error::InvalidInput("p is not set".into()))?
        .clone();
    let g = alg.degree() / 2;
    let slopes = newton_slopes(alg.h(), &p, &q);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let kind = if slopes == slopes_pattern(g, &[]) {
        IsogenyKind::Ordinary
    } else if q == p {
        IsogenyKind::PrimeField
    } else if g >= 1 && slopes == slopes_pattern(g, &[half.clone(), half]) {
        IsogenyKind::AlmostOrdinary
    } else {
        IsogenyKind::Other
    };
    let (o_min, n_rule) = match kind {
        IsogenyKind::Ordinary | IsogenyKind::PrimeField => {
            (Some(Order::z_pi_q_pi(alg)?), NRule::One)
        }
        IsogenyKind::AlmostOrdinary => {
            let r = Order::z_pi_q_pi(alg)?;
            let pi = alg.pi();
            let qpi = alg.q_over_pi()?;
            let frak_p = maximal_ideals_above(alg, &r, &p)?
                .into_iter()
                .find(|m| m.ideal.contains_element(&pi) && m.ideal.contains_element(&qpi))
                .ok_or_else(|| Error::InvalidInput("no prime contains both pi and q/pi".into()))?;
            let o_min = m_maximal_overorder(alg, &r, &frak_p)?;
            let ok = maximal_order(alg, None)?;
            let ext = alg.lat_product(&frak_p.ideal, &ok.lattice)?;
            let norm = index(&ok.lattice, &ext)?;
            let above = maximal_ideals_over(alg, &ok, &frak_p)?;
            let unram: BigInt = above.iter().map(|m| m.residue_size.clone()).product();
            let ramified = norm != BigRational::from_integer(unram);
            (Some(o_min), NRule::AlmostOrdinaryRule { ramified })
        }
        IsogenyKind::Other => (
            None,
            NRule::UserSupplied(n_override.ok_or(Error::NeedUserN)?),
        ),
    };
    Ok(IsogenyClassContext {
        p,
        q,
        slopes,
        kind,
        o_min,
        n_rule,
    })
}

/// The deepest level i with O_min ⊆ O_i.
pub fn compute_d_min(ladder: &MultiplicatorLadder, o_min: &Order) -> Result<usize> {
    (0..ladder.rungs.len())
        .rev()
        .find(|&i| ladder.rungs[i].contains(o_min))
        .ok_or(Error::LadderDisjoint)
}

// ---------------------------------------------------------------------------
// graph data

/// Everything the builder needs about one ladder.
#[derive(Clone, Debug)]
pub struct GraphSpec {
    /// Ladder length d.
    pub depth: usize,
    pub d_min: usize,
    /// Orbit count N.
    pub n_orbits: u64,
    /// Class data for levels 0..=d_min at least.
    pub chain: ClassChainData,
    /// False when N (or d_min) came from the user rather than the theory.
    pub verified: bool,
}

impl GraphSpec {
    pub fn new(chain: ClassChainData, depth: usize, d_min: usize, n_orbits: u64) -> Result<Self> {
        if d_min > depth {
            return Err(Error::InvalidInput(format!(
                "d_min = {d_min} exceeds the ladder length {depth}"
            )));
        }
        if n_orbits == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        let levels = chain.groups.len();
        if levels < d_min + 1 || levels > depth + 1 {
            return Err(Error::SchemaError(format!(
                "class data has {levels} levels, need between {} and {}",
                d_min + 1,
                depth + 1
            )));
        }
        for i in 1..=d_min.min(depth.saturating_sub(1)) {
            if chain.l_extension_class[i].is_none() {
                return Err(Error::MissingPrincipalityData { level: i });
            }
        }
        chain.validate()?;
        Ok(GraphSpec {
            depth,
            d_min,
            n_orbits,
            chain,
            verified: true,
        })
    }

    /// Spec for a computed ladder; checks the Bass hypothesis and that the
    /// class data agrees with the ladder.
    pub fn for_ladder(
        alg: &EtaleAlgebra,
        ladder: &MultiplicatorLadder,
        mut chain: ClassChainData,
        d_min: usize,
        n_orbits: u64,
    ) -> Result<Self> {
        if !is_bass_at(alg, ladder.base(), &ladder.base_prime)? {
            return Err(Error::NotBass);
        }
        if let Some(delta) = ladder.delta() {
            if delta != chain.delta_l {
                return Err(Error::SchemaError(format!(
                    "class data says delta_l = {}, the ladder has {}",
                    chain.delta_l, delta
                )));
            }
        }
        let s = ladder.residue_size().to_u64();
        match (chain.residue_size, s) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::SchemaError(format!(
                    "class data says #(R/l) = {a}, the ladder has {b}"
                )))
            }
            (None, s) => chain.residue_size = s,
            _ => {}
        }
        GraphSpec::new(chain, ladder.length(), d_min, n_orbits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeType {
    Horizontal,
    Ascending,
    Descending,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub id: usize,
    pub component: usize,
    pub level: usize,
    pub class: GroupElement,
    /// 1..=N.
    pub orbit: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    #[serde(rename = "type")]
    pub kind: EdgeType,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsogenyGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub components: usize,
    pub depth: usize,
    pub d_min: usize,
    pub warnings: Vec<String>,
}

impl IsogenyGraph {
    pub fn component_vertices(&self, c: usize) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.component == c)
            .map(|v| v.id)
            .collect()
    }

    pub fn level_sizes(&self, c: usize) -> Vec<usize> {
        let mut sizes = vec![0; self.d_min + 1];
        for v in self.vertices.iter().filter(|v| v.component == c) {
            sizes[v.level] += 1;
        }
        sizes
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.src == v)
    }

    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.dst == v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "components": self.components,
            "depth": self.depth,
            "d_min": self.d_min,
            "vertices": self.vertices,
            "edges": self.edges,
            "warnings": self.warnings,
        })
    }

    /// DOT with one rank per (component, level).
    pub fn to_dot(&self) -> String {
        let mut out =
            String::from("digraph isogeny {\n  rankdir=TB;\n  node [shape=circle, label=\"\"];\n");
        let mut by_rank: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for v in &self.vertices {
            by_rank
                .entry((v.component, v.level))
                .or_default()
                .push(v.id);
        }
        let comps: Vec<usize> = {
            let mut c: Vec<usize> = by_rank.keys().map(|k| k.0).collect();
            c.dedup();
            c
        };
        for c in comps {
            let _ = writeln!(
                out,
                "  subgraph cluster_{c} {{\n    label=\"component {c}\";"
            );
            for ((_, level), ids) in by_rank.range((c, 0)..=(c, usize::MAX)) {
                let _ = write!(out, "    {{ rank=same;");
                for id in ids {
                    let v = &self.vertices[*id];
                    let cls: Vec<String> = v.class.iter().map(|x| x.to_string()).collect();
                    let _ = write!(
                        out,
                        " v{id} [tooltip=\"level {level} class ({}) orbit {}\"];",
                        cls.join(","),
                        v.orbit
                    );
                }
                out.push_str(" }\n");
            }
            out.push_str("  }\n");
        }
        for e in &self.edges {
            let style = match e.kind {
                EdgeType::Horizontal => "style=solid, constraint=false",
                EdgeType::Ascending => "style=bold, arrowhead=normal",
                EdgeType::Descending => "style=dashed",
            };
            let _ = writeln!(out, "  v{} -> v{} [{style}];", e.src, e.dst);
        }
        out.push_str("}\n");
        out
    }
}

/// N·[Cl(O_0) : Cl_l(O_0)].
pub fn component_count(spec: &GraphSpec) -> usize {
    let g0 = &spec.chain.groups[0];
    let sub = g0.subgroup(&spec.chain.primes_above_l).len() as u64;
    (spec.n_orbits * (g0.order() / sub)) as usize
}

/// Cosets of Cl_l(O_0) in Cl(O_0), each sorted, ordered by least element.
fn surface_cosets(spec: &GraphSpec) -> Vec<Vec<GroupElement>> {
    let g0 = &spec.chain.groups[0];
    let sub = g0.subgroup(&spec.chain.primes_above_l);
    let mut seen: HashMap<GroupElement, usize> = HashMap::new();
    let mut cosets = Vec::new();
    for x in g0.elements() {
        if seen.contains_key(&x) {
            continue;
        }
        let mut c: Vec<GroupElement> = sub.iter().map(|h| g0.add(&x, h)).collect();
        c.sort();
        for y in &c {
            seen.insert(y.clone(), cosets.len());
        }
        cosets.push(c);
    }
    cosets
}

pub fn build_graph(spec: &GraphSpec) -> Result<IsogenyGraph> {
    let chain = &spec.chain;
    let d_min = spec.d_min;
    let n = spec.n_orbits;
    let cosets = surface_cosets(spec);
    let g0 = &chain.groups[0];
    let coset_of: HashMap<GroupElement, usize> = cosets
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.iter().map(move |x| (x.clone(), k)))
        .collect();

    // classes at each level, grouped by surface coset
    let mut level_classes: Vec<Vec<Vec<GroupElement>>> =
        vec![vec![Vec::new(); cosets.len()]; d_min + 1];
    for (i, per_coset) in level_classes.iter_mut().enumerate() {
        for x in chain.groups[i].elements() {
            let k = coset_of[&chain.to_surface(i, &x)];
            per_coset[k].push(x);
        }
    }

    let mut vertices = Vec::new();
    let mut ids: HashMap<(usize, usize, GroupElement), usize> = HashMap::new();
    for k in 0..cosets.len() {
        for orbit in 1..=n {
            let component = k * n as usize + (orbit - 1) as usize;
            for (level, per_coset) in level_classes.iter().enumerate() {
                for x in &per_coset[k] {
                    let id = vertices.len();
                    ids.insert((component, level, x.clone()), id);
                    vertices.push(Vertex {
                        id,
                        component,
                        level,
                        class: x.clone(),
                        orbit,
                    });
                }
            }
        }
    }

    let mut edges = Vec::new();
    for v in &vertices {
        if v.level == 0 {
            if chain.delta_l != -1 {
                for pr in &chain.primes_above_l {
                    let w = g0.add(&v.class, pr);
                    edges.push(Edge {
                        src: v.id,
                        dst: ids[&(v.component, 0, w)],
                        kind: EdgeType::Horizontal,
                    });
                }
            }
            continue;
        }
        let i = v.level;
        let up = chain.surjections[i - 1].apply(&v.class);
        let b = ids[&(v.component, i - 1, up.clone())];
        edges.push(Edge {
            src: v.id,
            dst: b,
            kind: EdgeType::Ascending,
        });
        if i < spec.depth {
            // B → A·[l·O_i]
            let lam = chain.l_extension_class[i]
                .as_ref()
                .ok_or(Error::MissingPrincipalityData { level: i })?;
            let target = chain.groups[i].add(&v.class, lam);
            edges.push(Edge {
                src: b,
                dst: ids[&(v.component, i, target)],
                kind: EdgeType::Descending,
            });
        }
    }
    edges.sort();

    let mut warnings = Vec::new();
    if d_min == spec.depth && d_min > 0 {
        warnings.push(format!(
            "MissingDescendingLevel: d_min = d = {d_min}, so level-{d_min} vertices have no descending edges; \
             a base order from find_base_order extends the ladder by one rung"
        ));
    }
    if !spec.verified {
        warnings.push("N or d_min was supplied by the user and is not verified".into());
    }
    Ok(IsogenyGraph {
        vertices,
        edges,
        components: cosets.len() * n as usize,
        depth: spec.depth,
        d_min,
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub component: usize,
    pub strongly_connected: bool,
    /// True when the level-d_min stratum was left out because d_min = d.
    pub bottom_excluded: bool,
    /// Excluded bottom vertices that cannot reach the rest.
    pub stranded_bottom: usize,
}

fn reach(g: &IsogenyGraph, start: usize, allowed: &[bool], forward: bool) -> Vec<bool> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in &g.edges {
        let (a, b) = if forward {
            (e.src, e.dst)
        } else {
            (e.dst, e.src)
        };
        adj.entry(a).or_default().push(b);
    }
    let mut seen = vec![false; g.vertices.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in adj.get(&v).into_iter().flatten() {
            if allowed[w] && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Each component, without its bottom level when d_min = d, must be
/// strongly connected.
pub fn strong_connectivity_check(g: &IsogenyGraph) -> Vec<ConnectivityReport> {
    let drop_bottom = g.d_min == g.depth && g.d_min > 0;
    (0..g.components)
        .map(|c| {
            let mut allowed = vec![false; g.vertices.len()];
            for v in &g.vertices {
                allowed[v.id] = v.component == c && !(drop_bottom && v.level == g.d_min);
            }
            let start = g
                .vertices
                .iter()
                .find(|v| allowed[v.id])
                .map(|v| v.id)
                .unwrap();
            let fwd = reach(g, start, &allowed, true);
            let bwd = reach(g, start, &allowed, false);
            let strongly_connected = (0..allowed.len()).all(|v| !allowed[v] || (fwd[v] && bwd[v]));
            let stranded_bottom = if drop_bottom {
                g.vertices
                    .iter()
                    .filter(|v| v.component == c && v.level == g.d_min)
                    .filter(|v| !g.out_edges(v.id).any(|e| allowed[e.dst]))
                    .count()
            } else {
                0
            };
            ConnectivityReport {
                component: c,
                strongly_connected,
                bottom_excluded: drop_bottom,
                stranded_bottom,
            }
        })
        .collect()
}

/// Whether component `c` of `g` is isomorphic, as a leveled multigraph with
/// typed edges, to the graph with vertex levels `levels` and edges
/// `(src, dst, type)` over indices into `levels`.
pub fn leveled_isomorphic(
    g: &IsogenyGraph,
    c: usize,
    levels: &[usize],
    edges: &[(usize, usize, EdgeType)],
) -> bool {
    let ours = g.component_vertices(c);
    if ours.len() != levels.len() {
        return false;
    }
    let mut want: Vec<(usize, usize, EdgeType)> = edges.to_vec();
    want.sort();
    let ours_edges: Vec<&Edge> = g
        .edges
        .iter()
        .filter(|e| g.vertices[e.src].component == c)
        .collect();
    if ours_edges.len() != want.len() {
        return false;
    }
    // backtracking over level-preserving bijections ours → theirs
    fn extend(
        k: usize,
        ours: &[usize],
        g: &IsogenyGraph,
        levels: &[usize],
        used: &mut Vec<bool>,
        map: &mut HashMap<usize, usize>,
        ours_edges: &[&Edge],
        want: &[(usize, usize, EdgeType)],
    ) -> bool {
        if k == ours.len() {
            let mut mapped: Vec<(usize, usize, EdgeType)> = ours_edges
                .iter()
                .map(|e| (map[&e.src], map[&e.dst], e.kind))
                .collect();
            mapped.sort();
            return mapped == want;
        }
        let v = ours[k];
        for t in 0..levels.len() {
            if used[t] || levels[t] != g.vertices[v].level {
                continue;
            }
            used[t] = true;
            map.insert(v, t);
            // prune: edges among mapped vertices must match in count
            let ok = {
                let mut a: Vec<(usize, usize, EdgeType)> = ours_edges
                    .iter()
                    .filter(|e| map.contains_key(&e.src) && map.contains_key(&e.dst))
                    .map(|e| (map[&e.src], map[&e.dst], e.kind))
                    .collect();
                a.sort();
                let img: std::collections::HashSet<usize> = map.values().copied().collect();
                let mut b: Vec<(usize, usize, EdgeType)> = want
                    .iter()
                    .filter(|e| img.contains(&e.0) && img.contains(&e.1))
                    .copied()
                    .collect();
                b.sort();
                a == b
            };
            if ok && extend(k + 1, ours, g, levels, used, map, ours_edges, want) {
                return true;
            }
            map.remove(&v);
            used[t] = false;
        }
        false
    }
    let mut used = vec![false; levels.len()];
    let mut map = HashMap::new();
    extend(0, &ours, g, levels, &mut used, &mut map, &ours_edges, &want)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(n(a), n(b))
    }

    #[test]
    fn slopes_ordinary_and_supersingular() {
        let h: Vec<BigInt> = [15625, 3750, 1450, 242, 58, 6, 1]
            .iter()
            .map(|&x| n(x))
            .collect();
        let s = newton_slopes(&h, &n(5), &n(25));
        assert_eq!(
            s,
            vec![r(0, 1), r(0, 1), r(0, 1), r(1, 1), r(1, 1), r(1, 1)]
        );
        // x^2 + 11
        let s = newton_slopes(&[n(11), n(0), n(1)], &n(11), &n(11));
        assert_eq!(s, vec![r(1, 2), r(1, 2)]);
        // x^4 + 4 over F_4: slopes 1/2
        let s = newton_slopes(&[n(16), n(0), n(0), n(0), n(1)], &n(2), &n(4));
        assert_eq!(s, vec![r(1, 2); 4]);
    }

    #[test]
    fn prime_field_kind() {
        let k = EtaleAlgebra::from_i64(&[11, 0, 1], Some(11)).unwrap();
        let c = classify_isogeny_class(&k, None).unwrap();
        assert_eq!(c.kind, IsogenyKind::PrimeField);
        assert_eq!(c.o_min.unwrap(), Order::z_pi_q_pi(&k).unwrap());
        assert_eq!(c.n_rule, NRule::One);
    }
}
