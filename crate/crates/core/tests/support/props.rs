//! Order-theoretic and graph-theoretic invariants shared by the randomized
//! property tests and the acceptance run. Each check returns a
//! `TestCaseError` instead of panicking so it can drive a proptest runner.

#![allow(dead_code)]

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use weilgraph::algebra::EtaleAlgebra;
use weilgraph::classgroup::{ClassChainData, FiniteAbelianGroup, GroupElement, GroupHom};
use weilgraph::graph::*;
use weilgraph::ladder::*;
use weilgraph::maximal::{m_maximal_overorder, singular_primes};
use weilgraph::order::{maximal_ideals_above, maximal_ideals_over, MaximalIdeal, Order};
use weilgraph::volcano::*;

pub type Check = Result<(), TestCaseError>;

// ---------------------------------------------------------------------------
// orders

/// R = Z[kπ] in Q[x]/(h) for a monic h.
pub fn scaled_equation_order(h: &[i64], k: i64) -> (EtaleAlgebra, Order) {
    let n = h.len() - 1;
    let scaled: Vec<i64> = h
        .iter()
        .enumerate()
        .map(|(i, c)| c * k.pow((n - i) as u32))
        .collect();
    let alg = EtaleAlgebra::from_i64(&scaled, None).unwrap();
    let r = Order::equation_order(&alg);
    (alg, r)
}

pub fn squarefree_poly() -> impl Strategy<Value = Vec<i64>> {
    prop_oneof![
        (-6i64..=6, 1i64..=12).prop_map(|(a, b)| vec![b, a, 1]),
        (-4i64..=4, -5i64..=5)
            .prop_filter("b != 0", |(_, b)| *b != 0)
            .prop_map(|(a, b)| vec![b, a, 0, 1]),
    ]
    .prop_filter("squarefree", |h| EtaleAlgebra::from_i64(h, None).is_ok())
}

pub fn check_reg_vs_sing(alg: &EtaleAlgebra, r: &Order, ell: u64) -> Check {
    for l in maximal_ideals_above(alg, r, &BigInt::from(ell)).unwrap() {
        let colon_r_l = alg.colon(&r.lattice, &l.ideal).unwrap();
        let invertible = alg.lat_product(&l.ideal, &colon_r_l).unwrap() == r.lattice;
        let mult = alg.multiplicator(&l.ideal).unwrap();
        let is_mult = mult == r.lattice;
        let l_max = m_maximal_overorder(alg, r, &l).unwrap() == *r;
        prop_assert_eq!(invertible, !l.is_singular);
        prop_assert_eq!(is_mult, !l.is_singular);
        prop_assert_eq!(l_max, !l.is_singular);
        if l.is_singular {
            prop_assert_eq!(&mult, &colon_r_l);
            prop_assert!(mult.contains(&r.lattice) && mult != r.lattice);
            prop_assert_eq!(&alg.lat_product(&l.ideal, &colon_r_l).unwrap(), &l.ideal);
            prop_assert_eq!(&alg.colon(&r.lattice, &mult).unwrap(), &l.ideal);
        }
    }
    Ok(())
}

/// Exactly one of inert, split, ramified-or-singular holds when (l:l) is the
/// unique minimal l-overorder, and classify_splitting names that one.
pub fn check_trichotomy(alg: &EtaleAlgebra, r: &Order, l: &MaximalIdeal) -> Check {
    let t = Order::from_lattice_unchecked(alg.multiplicator(&l.ideal).unwrap());
    let (min, unique) = minimal_l_overorder(alg, r, l).unwrap();
    if min != t || !unique {
        return Ok(());
    }
    let above = maximal_ideals_over(alg, &t, l).unwrap();
    let inert = above.len() == 1 && above[0].ideal == l.ideal && !above[0].is_singular;
    let split = above.len() == 2
        && above
            .iter()
            .all(|m| !m.is_singular && m.residue_size == l.residue_size);
    let ram_sing = above.len() == 1
        && above[0].ideal != l.ideal
        && above[0].residue_size == l.residue_size
        && {
            let big = &above[0].ideal;
            l.ideal.contains(&alg.lat_product(big, big).unwrap())
        };
    prop_assert_eq!(inert as u8 + split as u8 + ram_sing as u8, 1);
    match classify_splitting(alg, r, l).unwrap() {
        SplittingType::Inert { .. } => prop_assert!(inert),
        SplittingType::Split { .. } => prop_assert!(split),
        SplittingType::Ramified { .. } | SplittingType::Singular { .. } => prop_assert!(ram_sing),
    }
    Ok(())
}

pub fn reg_vs_sing_and_trichotomy(h: &[i64], k: i64) -> Check {
    let (alg, r) = scaled_equation_order(h, k);
    for ell in [2u64, 3] {
        check_reg_vs_sing(&alg, &r, ell)?;
    }
    for l in singular_primes(&alg, &r, None).unwrap() {
        check_trichotomy(&alg, &r, &l)?;
    }
    Ok(())
}

pub fn fast_path_enumeration_agrees(h: &[i64], k: i64) -> Check {
    let (alg, r) = scaled_equation_order(h, k);
    let fast = enumerate_overorders(&alg, &r).unwrap();
    let brute = enumerate_overorders_brute(&alg, &r, DEFAULT_ENUMERATION_LIMIT).unwrap();
    prop_assert_eq!(fast, brute);
    Ok(())
}

pub fn conductor_law_on_ladders(h: &[i64], k: i64) -> Check {
    let (alg, r) = scaled_equation_order(h, k);
    for l in singular_primes(&alg, &r, None).unwrap() {
        if let Ok(lad) = build_ladder(&alg, &r, &l) {
            prop_assert!(check_ladder_laws(&alg, &lad).unwrap());
        }
    }
    Ok(())
}

/// Z[π,q/π] of 3.25.g_cg_ji and 3.5.c_ab_ae.
pub fn fixture_orders() -> Vec<(EtaleAlgebra, Order)> {
    [
        (vec![15625i64, 3750, 1450, 242, 58, 6, 1], 25i64),
        (vec![125, 50, -5, -4, -1, 2, 1], 5),
    ]
    .into_iter()
    .map(|(h, q)| {
        let alg = EtaleAlgebra::from_i64(&h, Some(q)).unwrap();
        let r = Order::z_pi_q_pi(&alg).unwrap();
        (alg, r)
    })
    .collect()
}

pub fn reg_vs_sing_on_fixture_orders() -> Check {
    for (alg, r) in fixture_orders() {
        for ell in [2u64, 3, 5, 7] {
            check_reg_vs_sing(&alg, &r, ell)?;
        }
        for l in singular_primes(&alg, &r, None).unwrap() {
            check_trichotomy(&alg, &r, &l)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// graphs from synthetic class data

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub spec: GraphSpec,
    pub fibers: Vec<u64>,
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn cyclic(m: u64) -> FiniteAbelianGroup {
    FiniteAbelianGroup::new(vec![m]).unwrap()
}

fn reduction(src: &FiniteAbelianGroup, tgt: &FiniteAbelianGroup) -> GroupHom {
    let m = vec![vec![1i64; src.rank()]; tgt.rank()];
    GroupHom::new(src.clone(), tgt.clone(), m).unwrap()
}

fn pick(g: &FiniteAbelianGroup, seed: u64) -> GroupElement {
    let all = g.elements();
    all[(seed % all.len() as u64) as usize].clone()
}

pub fn synthetic(
    m0: u64,
    delta: i8,
    s: u64,
    depth: usize,
    d_min_seed: usize,
    n: u64,
    seeds: Vec<u64>,
) -> Synthetic {
    let d_min = d_min_seed % (depth + 1);
    let levels = if seeds[0].is_multiple_of(2) {
        d_min + 1
    } else {
        depth + 1
    };
    let mut units = Vec::new();
    let mut fibers = Vec::new();
    for i in 1..levels {
        let base = if i == 1 {
            (s as i64 - delta as i64) as u64
        } else {
            s
        };
        let ds = divisors(base);
        let u = ds[(seeds[i] % ds.len() as u64) as usize];
        units.push(u);
        fibers.push(base / u);
    }
    let mut groups = vec![cyclic(m0)];
    for f in &fibers {
        let last = groups.last().unwrap().order();
        groups.push(cyclic(last * f));
    }
    let surjections: Vec<GroupHom> = (1..levels)
        .map(|i| reduction(&groups[i], &groups[i - 1]))
        .collect();
    let g0 = &groups[0];
    let p1 = pick(g0, seeds[5]);
    let (primes, lam0) = match delta {
        -1 => (vec![p1.clone()], p1),
        0 => (vec![p1.clone()], g0.scale(&p1, 2)),
        _ => {
            let p2 = pick(g0, seeds[6]);
            let sum = g0.add(&p1, &p2);
            (vec![p1, p2], sum)
        }
    };
    let mut lams = vec![Some(lam0)];
    for i in 1..levels {
        if i == depth {
            lams.push(None);
            continue;
        }
        let prev = lams[i - 1].clone().unwrap();
        let lifts: Vec<GroupElement> = groups[i]
            .elements()
            .into_iter()
            .filter(|x| surjections[i - 1].apply(x) == prev)
            .collect();
        lams.push(Some(
            lifts[(seeds[7 + i] % lifts.len() as u64) as usize].clone(),
        ));
    }
    let chain = ClassChainData {
        groups,
        surjections,
        primes_above_l: primes,
        l_extension_class: lams,
        unit_indices: Some(units),
        delta_l: delta,
        residue_size: Some(s),
    };
    let spec = GraphSpec::new(chain, depth, d_min, n).unwrap();
    Synthetic { spec, fibers }
}

pub fn synthetic_strategy() -> impl Strategy<Value = Synthetic> {
    (
        1u64..=6,
        prop_oneof![Just(-1i8), Just(0), Just(1)],
        prop_oneof![Just(2u64), Just(3), Just(4), Just(5), Just(7)],
        0usize..=3,
        0usize..=3,
        1u64..=2,
        proptest::collection::vec(any::<u64>(), 12),
    )
        .prop_map(|(m0, delta, s, depth, dm, n, seeds)| {
            synthetic(m0, delta, s, depth, dm, n, seeds)
        })
}

fn translate(
    g: &IsogenyGraph,
    spec: &GraphSpec,
    top: &GroupElement,
) -> Vec<(usize, usize, EdgeType)> {
    let chain = &spec.chain;
    let top_level = spec.d_min;
    let shift: Vec<GroupElement> = (0..=top_level)
        .map(|i| {
            let mut v = top.clone();
            for k in (i + 1..=top_level).rev() {
                v = chain.surjections[k - 1].apply(&v);
            }
            v
        })
        .collect();
    let lookup: std::collections::HashMap<(u64, usize, GroupElement), usize> = g
        .vertices
        .iter()
        .map(|v| ((v.orbit, v.level, v.class.clone()), v.id))
        .collect();
    let image = |id: usize| {
        let v = &g.vertices[id];
        let c = chain.groups[v.level].add(&v.class, &shift[v.level]);
        lookup[&(v.orbit, v.level, c)]
    };
    let mut out: Vec<(usize, usize, EdgeType)> = g
        .edges
        .iter()
        .map(|e| (image(e.src), image(e.dst), e.kind))
        .collect();
    out.sort();
    out
}

pub fn graph_structure_invariants(x: &Synthetic, shift_seed: u64) -> Check {
    let spec = &x.spec;
    let chain = &spec.chain;
    let g = build_graph(spec).unwrap();
    prop_assert_eq!(g.components, component_count(spec));
    // level counts: N·#Cl(O_i) in total
    for i in 0..=spec.d_min {
        let count = g.vertices.iter().filter(|v| v.level == i).count() as u64;
        prop_assert_eq!(count, spec.n_orbits * chain.groups[i].order());
    }
    for v in &g.vertices {
        let out: Vec<&Edge> = g.out_edges(v.id).collect();
        let asc_out = out.iter().filter(|e| e.kind == EdgeType::Ascending).count();
        prop_assert_eq!(asc_out, (v.level > 0) as usize);
        for e in &out {
            let w = &g.vertices[e.dst];
            prop_assert_eq!(w.component, v.component);
            match e.kind {
                EdgeType::Horizontal => prop_assert!(v.level == 0 && w.level == 0),
                EdgeType::Ascending => prop_assert_eq!(w.level + 1, v.level),
                EdgeType::Descending => prop_assert_eq!(w.level, v.level + 1),
            }
        }
        // fiber sizes from the class-number ratios
        if v.level < spec.d_min {
            let children = g
                .in_edges(v.id)
                .filter(|e| e.kind == EdgeType::Ascending)
                .count() as u64;
            prop_assert_eq!(children, x.fibers[v.level]);
        }
        // in-degree = out-degree below the surface, except just above a
        // bottom level that has no descending edges into it
        let i = v.level;
        if i >= 1 && ((i < spec.d_min && i + 1 < spec.depth) || (i == spec.d_min && i < spec.depth))
        {
            prop_assert_eq!(g.in_edges(v.id).count(), g.out_edges(v.id).count());
        }
        if v.level == spec.d_min && spec.d_min == spec.depth && spec.d_min > 0 {
            prop_assert_eq!(g.in_edges(v.id).count(), 0);
            prop_assert_eq!(out.len(), 1);
        }
    }
    // an inert surface with nothing below it has no edges at all
    let isolated = chain.delta_l == -1 && (spec.d_min == 0 || (spec.d_min == 1 && spec.depth == 1));
    let cl_l = chain.groups[0].subgroup(&chain.primes_above_l).len();
    for r in strong_connectivity_check(&g) {
        prop_assert_eq!(r.strongly_connected, !isolated || cl_l == 1);
    }

    // class translation is an automorphism
    let top = {
        let all = chain.groups[spec.d_min].elements();
        all[(shift_seed % all.len() as u64) as usize].clone()
    };
    let mut edges: Vec<(usize, usize, EdgeType)> =
        g.edges.iter().map(|e| (e.src, e.dst, e.kind)).collect();
    edges.sort();
    prop_assert_eq!(translate(&g, spec, &top), edges);

    let verdict = volcano_verdict(&g, spec).unwrap();
    prop_assert!(!verdict.internal_error(), "{:?}", verdict);
    let lam0_principal = chain.l_extension_class[0]
        .as_ref()
        .unwrap()
        .iter()
        .all(|c| *c == 0);
    for c in &verdict.components {
        prop_assert_eq!(c.asc_connected, c.surface_connected);
        prop_assert_eq!(c.asc_equals_desc, verdict.predicted_asc_equals_desc);
        let surface = undirect(&g, Which::Asc, Some(c.component)).level(0);
        if chain.delta_l <= 0 {
            prop_assert_eq!(c.surface_connected, lam0_principal);
        }
        if lam0_principal {
            let r0 = if chain.delta_l == 1 {
                2
            } else {
                (chain.delta_l + 1) as usize
            };
            prop_assert!(surface.vertices.iter().all(|&v| surface.degree(v) == r0));
            prop_assert!(c.surface_connected);
        }
    }
    Ok(())
}
