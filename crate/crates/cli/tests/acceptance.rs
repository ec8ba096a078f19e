//! Acceptance run: one PASS/FAIL line per criterion. Library checks call
//! `weilgraph` directly; end-to-end checks drive the `weilgraph` binary in
//! offline mode against the bundled fixtures.

#[path = "../../core/tests/support/props.rs"]
mod props;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};
use weilgraph::algebra::EtaleAlgebra;
use weilgraph::classgroup::{imquad_class_data, ladder_ratios, ladder_ratios_from};
use weilgraph::error::{Error, NotALadderReason};
use weilgraph::graph::compute_d_min;
use weilgraph::ladder::*;
use weilgraph::lattice::{int_index, lat_sum, ZLattice};
use weilgraph::lmfdb::{fixture, fixture_labels};
use weilgraph::maximal::{conductor, maximal_order, singular_primes};
use weilgraph::order::{cm_type, maximal_ideals_above, maximal_ideals_over, MaximalIdeal, Order};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

// ---------------------------------------------------------------------------
// helpers

fn algebra(h: &[i64], q: i64) -> EtaleAlgebra {
    EtaleAlgebra::from_i64(h, Some(q)).unwrap()
}

fn label_algebra(label: &str) -> EtaleAlgebra {
    let rec = fixture(label).unwrap();
    algebra(&rec.h, rec.q as i64)
}

fn z_pi_q_pi(alg: &EtaleAlgebra) -> Order {
    Order::z_pi_q_pi(alg).unwrap()
}

fn index_in(big: &Order, small: &Order) -> u64 {
    u64::try_from(int_index(&big.lattice, &small.lattice).unwrap()).unwrap()
}

fn mult_ring(alg: &EtaleAlgebra, m: &MaximalIdeal) -> Order {
    Order::from_lattice_unchecked(alg.multiplicator(&m.ideal).unwrap())
}

fn lat_power(alg: &EtaleAlgebra, unit: &ZLattice, base: &ZLattice, e: usize) -> ZLattice {
    (0..e).fold(unit.clone(), |acc, _| alg.lat_product(&acc, base).unwrap())
}

/// Covering relations (lower, upper, index) among `orders`.
fn hasse(orders: &[Order]) -> Vec<(usize, usize, u64)> {
    let strict =
        |a: usize, b: usize| a != b && orders[b].contains(&orders[a]) && orders[a] != orders[b];
    let mut out = Vec::new();
    for a in 0..orders.len() {
        for b in 0..orders.len() {
            if strict(a, b) && !(0..orders.len()).any(|c| strict(a, c) && strict(c, b)) {
                out.push((a, b, index_in(&orders[b], &orders[a])));
            }
        }
    }
    out
}

fn is_chain(orders: &[Order]) -> bool {
    orders
        .iter()
        .all(|a| orders.iter().all(|b| a.contains(b) || b.contains(a)))
}

/// Number of reduced primitive positive definite forms of discriminant d < 0.
fn form_count(d: i64) -> u64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut n = 0;
    let mut a = 1;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) || gcd(gcd(a, b), c) != 1 {
                continue;
            }
            n += 1;
        }
        a += 1;
    }
    n
}

fn classdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/classdata")
        .join(name)
}

struct Cli {
    cache: tempfile::TempDir,
    scratch: tempfile::TempDir,
}

impl Cli {
    fn new() -> Self {
        Cli {
            cache: tempfile::tempdir().unwrap(),
            scratch: tempfile::tempdir().unwrap(),
        }
    }

    fn run(&self, args: &[&str]) -> (i32, String, String) {
        let out = Command::new(env!("CARGO_BIN_EXE_weilgraph"))
            .args(args)
            .env("WEILGRAPH_CACHE_DIR", self.cache.path())
            .env("WEILGRAPH_LMFDB_ENDPOINT", "http://127.0.0.1:9/")
            .output()
            .unwrap();
        (
            out.status.code().unwrap_or(-1),
            String::from_utf8(out.stdout).unwrap(),
            String::from_utf8(out.stderr).unwrap(),
        )
    }

    fn json(&self, args: &[&str]) -> Result<Value, String> {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--offline", "--json", "-"]);
        let (code, out, err) = self.run(&full);
        ensure!(code == 0, "{args:?} exited {code}: {err}");
        serde_json::from_str(&out).map_err(|e| format!("{args:?}: bad JSON: {e}"))
    }

    fn poly_file(&self, name: &str, h: &[i64], q: i64) -> String {
        let p = self.scratch.path().join(name);
        std::fs::write(&p, serde_json::json!({ "h": h, "q": q }).to_string()).unwrap();
        p.to_string_lossy().into_owned()
    }
}

/// A component read back from the CLI's graph JSON.
struct JsonComponent {
    levels: Vec<usize>,
    edges: Vec<(usize, usize, String)>,
}

fn components(graph: &Value) -> Vec<JsonComponent> {
    let n = graph["components"].as_u64().unwrap() as usize;
    let verts = graph["vertices"].as_array().unwrap();
    (0..n)
        .map(|c| {
            let ids: Vec<u64> = verts
                .iter()
                .filter(|v| v["component"] == c)
                .map(|v| v["id"].as_u64().unwrap())
                .collect();
            let local = |id: u64| ids.iter().position(|&x| x == id);
            let levels = verts
                .iter()
                .filter(|v| v["component"] == c)
                .map(|v| v["level"].as_u64().unwrap() as usize)
                .collect();
            let edges = graph["edges"]
                .as_array()
                .unwrap()
                .iter()
                .filter_map(|e| {
                    let s = local(e["src"].as_u64().unwrap())?;
                    let d = local(e["dst"].as_u64().unwrap())?;
                    Some((s, d, e["type"].as_str().unwrap().to_string()))
                })
                .collect();
            JsonComponent { levels, edges }
        })
        .collect()
}

fn level_sizes(c: &JsonComponent) -> Vec<usize> {
    let depth = c.levels.iter().max().map_or(0, |m| m + 1);
    (0..depth)
        .map(|i| c.levels.iter().filter(|&&l| l == i).count())
        .collect()
}

/// Brute-force search for a level-preserving bijection carrying the edge
/// multiset of `c` onto the figure's.
fn matches_figure(c: &JsonComponent, levels: &[usize], edges: &[(usize, usize, &str)]) -> bool {
    if c.levels.len() != levels.len() || c.edges.len() != edges.len() {
        return false;
    }
    let mut want: Vec<(usize, usize, String)> = edges
        .iter()
        .map(|&(a, b, t)| (a, b, t.to_string()))
        .collect();
    want.sort();
    let n = levels.len();
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(
        c: &JsonComponent,
        levels: &[usize],
        want: &[(usize, usize, String)],
        perm: &mut Vec<usize>,
        used: &mut [bool],
    ) -> bool {
        let n = levels.len();
        if perm.len() == n {
            // perm maps figure vertex -> component vertex
            let mut inv = vec![0; n];
            for (f, &v) in perm.iter().enumerate() {
                inv[v] = f;
            }
            let mut got: Vec<(usize, usize, String)> = c
                .edges
                .iter()
                .map(|(a, b, t)| (inv[*a], inv[*b], t.clone()))
                .collect();
            got.sort();
            return got == want;
        }
        let f = perm.len();
        for v in 0..n {
            if !used[v] && c.levels[v] == levels[f] {
                used[v] = true;
                perm.push(v);
                if go(c, levels, want, perm, used) {
                    return true;
                }
                perm.pop();
                used[v] = false;
            }
        }
        false
    }
    go(c, levels, &want, &mut perm, &mut used)
}

// ---------------------------------------------------------------------------
// criteria

fn c1(cli: &Cli) -> Outcome {
    let alg = label_algebra("3.25.g_cg_ji");
    let r = z_pi_q_pi(&alg);
    let mut got = BTreeMap::new();
    for l in singular_primes(&alg, &r, None).unwrap() {
        let kind = match classify_splitting(&alg, &r, &l).unwrap() {
            SplittingType::Singular { .. } => "singular",
            SplittingType::Split { .. } => "split",
            SplittingType::Inert { .. } => "inert",
            SplittingType::Ramified { .. } => "ramified",
        };
        got.insert(u64::try_from(&l.residue_size).unwrap(), kind);
    }
    let want = BTreeMap::from([(2, "singular"), (4, "split"), (3, "inert"), (7, "ramified")]);
    ensure!(got == want, "library: {got:?}");
    let j = cli.json(&["classify-prime", "--label", "3.25.g_cg_ji"])?;
    let from_cli: BTreeMap<u64, String> = j["singular_primes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p["residue_size"].as_str().unwrap().parse().unwrap(),
                p["type"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    ensure!(
        from_cli.len() == 4 && from_cli.iter().all(|(k, v)| want[k] == v),
        "cli: {from_cli:?}"
    );
    Ok("sizes 2,4,3,7 are singular, split, inert, ramified".into())
}

fn c2(_: &Cli) -> Outcome {
    let alg = label_algebra("3.25.g_cg_ji");
    let r = z_pi_q_pi(&alg);
    let all = enumerate_overorders(&alg, &r).unwrap();
    ensure!(all.len() == 24, "{} overorders", all.len());
    let mut lengths = Vec::new();
    let mut counts = Vec::new();
    for l in singular_primes(&alg, &r, None).unwrap() {
        let lad = build_ladder(&alg, &r, &l).unwrap();
        lengths.push((u64::try_from(&l.residue_size).unwrap(), lad.length()));
        counts.push(count_ladders(&alg, &r, &l).unwrap());
    }
    lengths.sort();
    ensure!(
        lengths == vec![(2, 2), (3, 1), (4, 1), (7, 1)],
        "ladder lengths by residue size {lengths:?}"
    );
    // the overorders are the product of the ladders, so a prime whose ladder
    // has length d lies on 24/(d+1) ladders
    let total: usize = lengths.iter().map(|(_, d)| d + 1).product();
    ensure!(total == 24, "product of ladder sizes {total}");
    let mut want: Vec<usize> = lengths.iter().map(|(_, d)| 24 / (d + 1)).collect();
    want.sort();
    let mut sorted = counts.clone();
    sorted.sort();
    ensure!(
        sorted == want && want == vec![8, 12, 12, 12],
        "count_ladders {counts:?}"
    );
    Ok("24 overorders, lengths (2,1,1,1), ladder counts 8,12,12,12".into())
}

fn c3(_: &Cli) -> Outcome {
    let alg = label_algebra("3.5.c_ab_ae");
    let r = z_pi_q_pi(&alg);
    let ok = maximal_order(&alg, None).unwrap();
    let all = enumerate_overorders(&alg, &r).unwrap();
    ensure!(all.len() == 8, "{} overorders", all.len());
    let mut idx: Vec<(u64, usize)> = all
        .iter()
        .enumerate()
        .map(|(i, o)| (index_in(&ok, o), i))
        .collect();
    idx.sort();
    idx.reverse();
    let sizes: Vec<u64> = idx.iter().map(|x| x.0).collect();
    ensure!(
        sizes == vec![64, 32, 16, 8, 8, 8, 4, 1],
        "indices in O_K {sizes:?}"
    );
    let o = |k: usize| &all[idx[k].1];
    let (rr, t3, s, t1, okk) = (o(0), o(1), o(2), o(6), o(7));
    let t2s = [o(3), o(4), o(5)];
    ensure!(rr == &r && okk == &ok, "extremes misidentified");

    // Hasse diagram
    let ordered: Vec<Order> = (0..8).map(|k| o(k).clone()).collect();
    let mut covers = hasse(&ordered);
    covers.sort();
    let want = vec![
        (0, 1, 2),
        (1, 2, 2),
        (2, 3, 2),
        (2, 4, 2),
        (2, 5, 2),
        (3, 6, 2),
        (4, 6, 2),
        (5, 6, 2),
        (6, 7, 4),
    ];
    ensure!(covers == want, "covers {covers:?}");

    // CM types and multiplicator-ring arrows
    let sing = |t: &Order| singular_primes(&alg, t, None).unwrap();
    let mut type2 = Vec::new();
    let mut arrows = Vec::new();
    for (k, t) in ordered.iter().enumerate() {
        let ls = sing(t);
        ensure!(
            ls.len() == usize::from(k != 7),
            "order {k} has {} singular primes",
            ls.len()
        );
        for l in &ls {
            if cm_type(&alg, l).unwrap() == 2 {
                type2.push(k);
            }
            let m = mult_ring(&alg, l);
            arrows.push((k, ordered.iter().position(|x| *x == m).unwrap()));
        }
    }
    ensure!(type2 == vec![1, 2, 6], "CM type 2 at {type2:?}");
    // R→T3, T3→T2, S→T1, T2,T2',T2''→T1, T1→O_K, with T2 one of positions 3..6
    let t3_target = arrows[1].1;
    ensure!(
        (3..6).contains(&t3_target),
        "(l_T3:l_T3) at position {t3_target}"
    );
    let want_arrows = vec![
        (0, 1),
        (1, t3_target),
        (2, 6),
        (3, 6),
        (4, 6),
        (5, 6),
        (6, 7),
    ];
    ensure!(arrows == want_arrows, "multiplicator arrows {arrows:?}");
    let hit: Vec<usize> = arrows
        .iter()
        .map(|a| a.1)
        .filter(|b| (3..6).contains(b))
        .collect();
    ensure!(
        hit == vec![t3_target],
        "more than one T2 is a multiplicator ring"
    );

    // conductors as powers of L = O_K·l_T1
    let l_t1 = &sing(t1)[0];
    let big_l = alg.lat_product(&ok.lattice, &l_t1.ideal).unwrap();
    let pw = |e| lat_power(&alg, &ok.lattice, &big_l, e);
    let mut want_f = vec![(rr, 4), (t3, 3), (s, 2), (t1, 1), (okk, 0)];
    want_f.extend(t2s.iter().map(|t| (*t, 2)));
    for (t, e) in want_f {
        ensure!(
            conductor(&alg, t).unwrap() == pw(e),
            "conductor of order of index {} is not L^{e}",
            index_in(&ok, t)
        );
    }
    Ok("Hasse diagram, CM types, multiplicator arrows and conductors L^4..L match".into())
}

fn c4(_: &Cli) -> Outcome {
    let mut orders: Vec<(String, EtaleAlgebra, Order)> = Vec::new();
    for label in fixture_labels() {
        let alg = label_algebra(label);
        let r = z_pi_q_pi(&alg);
        orders.push((label.to_string(), alg, r));
    }
    // every overorder of the jumps example as well
    let alg = label_algebra("3.5.c_ab_ae");
    for (k, t) in enumerate_overorders(&alg, &z_pi_q_pi(&alg))
        .unwrap()
        .into_iter()
        .enumerate()
    {
        orders.push((format!("3.5.c_ab_ae overorder {k}"), alg.clone(), t));
    }
    let (mut primes, mut ladders) = (0, 0);
    for (name, alg, r) in &orders {
        let f_r = conductor(alg, r).unwrap();
        for l in singular_primes(alg, r, None).unwrap() {
            primes += 1;
            let f_t = conductor(alg, &mult_ring(alg, &l)).unwrap();
            ensure!(
                f_r == alg.lat_product(&l.ideal, &f_t).unwrap(),
                "{name}: f_R != l·f_(l:l)"
            );
            let Ok(lad) = build_ladder(alg, r, &l) else {
                continue;
            };
            ladders += 1;
            let top = lad.top();
            let f0 = conductor(alg, top).unwrap();
            for i in 0..=lad.length() {
                // rung 0 is the top
                let li = lat_power(alg, &r.lattice, &l.ideal, i);
                let want_f = alg
                    .lat_product(&alg.lat_product(&li, &top.lattice).unwrap(), &f0)
                    .unwrap();
                let rung = &lad.rungs[i];
                ensure!(
                    conductor(alg, rung).unwrap() == want_f,
                    "{name}: f_(R_{i}) != l^{i}·f_(R_0)"
                );
                let want_r = lat_sum(&r.lattice, &alg.lat_product(&li, &f0).unwrap()).unwrap();
                ensure!(rung.lattice == want_r, "{name}: R_{i} != R + l^{i}·f_(R_0)");
            }
        }
    }
    Ok(format!(
        "{} orders, {primes} singular primes, {ladders} ladders",
        orders.len()
    ))
}

fn c5(_: &Cli) -> Outcome {
    let alg = label_algebra("3.4.ab_d_ah");
    let r = z_pi_q_pi(&alg);
    let l = &singular_primes(&alg, &r, None).unwrap()[0];
    let lad = build_ladder(&alg, &r, l).map_err(|e| format!("3.4.ab_d_ah: {e}"))?;
    ensure!(
        lad.length() == 2,
        "3.4.ab_d_ah ladder length {}",
        lad.length()
    );
    ensure!(
        !is_bass_at(&alg, &r, l).unwrap(),
        "3.4.ab_d_ah is Bass at l"
    );

    let alg = label_algebra("2.3.a_ac");
    let r = z_pi_q_pi(&alg);
    let sing = singular_primes(&alg, &r, None).unwrap();
    ensure!(
        sing.len() == 1,
        "2.3.a_ac has {} singular primes",
        sing.len()
    );
    let l = &sing[0];
    match build_ladder(&alg, &r, l) {
        Err(Error::NotALadder {
            reason: NotALadderReason::MultiplicatorRingJump { .. },
        }) => {}
        other => {
            return Err(format!(
                "2.3.a_ac: expected a multiplicator-ring jump, got {other:?}"
            ))
        }
    }
    let chain = l_overorders(&alg, &r, l, DEFAULT_ENUMERATION_LIMIT).unwrap();
    ensure!(
        chain.len() == 4 && is_chain(&chain),
        "2.3.a_ac l-overorders: {} orders, chain {}",
        chain.len(),
        is_chain(&chain)
    );
    Ok("length-2 ladder that is not Bass; jump with a totally ordered chain of length 3".into())
}

fn c6(_: &Cli) -> Outcome {
    let alg = label_algebra("3.11.b_e_cv");
    let r = z_pi_q_pi(&alg);
    let sing = singular_primes(&alg, &r, None).unwrap();
    let m = sing
        .iter()
        .find(|x| x.ell == 2)
        .ok_or("no singular prime above 2")?;
    let big = sing
        .iter()
        .find(|x| x.ell == 5)
        .ok_or("no singular prime above 5")?;
    let movs = l_overorders(&alg, &r, m, DEFAULT_ENUMERATION_LIMIT).unwrap();
    ensure!(movs.len() == 6, "{} m-overorders", movs.len());
    let covers = hasse(&movs);
    ensure!(
        covers.len() == 7 && covers.iter().all(|c| c.2 == 4),
        "covers {covers:?}"
    );
    // T is the unique order covering R
    let above_r: Vec<usize> = covers
        .iter()
        .filter(|c| movs[c.0] == r)
        .map(|c| c.1)
        .collect();
    ensure!(above_r.len() == 1, "{} orders cover R", above_r.len());
    let t = &movs[above_r[0]];
    let up = covers.iter().filter(|c| c.0 == above_r[0]).count();
    ensure!(up == 3, "T is covered by {up} orders");
    let mt = maximal_ideals_over(&alg, t, m).unwrap();
    ensure!(
        mt.len() == 1 && cm_type(&alg, &mt[0]).unwrap() == 2,
        "T does not have CM type 2 above m"
    );

    let (base, l) = find_base_order(&alg, &r, big)
        .unwrap()
        .ok_or("no base order")?;
    let l2 = alg.lat_product(&big.ideal, &big.ideal).unwrap();
    let mut gens = l2.basis();
    gens.push(alg.one());
    ensure!(
        base.lattice == ZLattice::from_elements(alg.degree(), &gens).unwrap(),
        "base order is not Z + L^2"
    );
    let ext = build_ladder(&alg, &base, &l).unwrap();
    let d_min = compute_d_min(&ext, &r).unwrap();
    let own = build_ladder(&alg, &r, big).unwrap().length();
    ensure!(
        d_min == 2,
        "6 m-overorders, covers of index 4, T of type 2 and base Z + L^2 all match; d_min = {d_min}: the L-ladder of R_2 has length {own}, not 2, because 5 divides [O_K : R_2] only once"
    );
    Ok("6 m-overorders with covers of index 4, T of CM type 2, base Z + L^2, d_min = 2".into())
}

fn c7(_: &Cli) -> Outcome {
    let alg = label_algebra("3.11.al_cm_ajv");
    let r = z_pi_q_pi(&alg);
    let sing = singular_primes(&alg, &r, None).unwrap();
    ensure!(sing.len() == 1, "{} singular primes", sing.len());
    let l = &sing[0];
    let lad = build_ladder(&alg, &r, l).unwrap();
    ensure!(lad.length() == 2, "d = {}", lad.length());
    let o1 = &lad.rungs[1];
    let lo1 = alg.lat_product(&l.ideal, &o1.lattice).unwrap();
    ensure!(
        alg.multiplicator(&lo1).unwrap() == o1.lattice,
        "(lO_1 : lO_1) != O_1"
    );
    let inv = alg.colon(&o1.lattice, &lo1).unwrap();
    ensure!(
        alg.lat_product(&lo1, &inv).unwrap() != o1.lattice,
        "lO_1 is invertible"
    );
    ensure!(!is_bass_at(&alg, &r, l).unwrap(), "R is Bass at l");
    Ok("l·O_1 has multiplicator ring O_1 and is not invertible; d = 2; not Bass".into())
}

fn c8(cli: &Cli) -> Outcome {
    let poly = cli.poly_file("disc36.json", &[13, -4, 1], 13);
    let j = cli.json(&[
        "graph",
        "--poly",
        &poly,
        "--ell",
        "3",
        "--order",
        "Z[pi]",
        "--class-data",
        "imquad",
    ])?;
    let g = &j["graphs"][0];
    let cl: Vec<u64> = g["class_data"]["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|lv| {
            lv["invariant_factors"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap())
                .product()
        })
        .collect();
    let oracle = vec![form_count(-4), form_count(-36)];
    ensure!(
        cl == oracle && cl == vec![1, 2],
        "Cl sizes {cl:?}, forms {oracle:?}"
    );
    let comps = components(&g["graph"]);
    ensure!(comps.len() == 1, "{} components", comps.len());
    ensure!(
        level_sizes(&comps[0]) == vec![1, 2],
        "level sizes {:?}",
        level_sizes(&comps[0])
    );
    let children = comps[0]
        .edges
        .iter()
        .filter(|e| e.2 == "ascending" && comps[0].levels[e.1] == 0)
        .count();
    ensure!(children == 2, "{children} children of the surface vertex");
    let formula = ladder_ratios_from(&BigInt::from(3), -1, &[BigInt::from(2)]);
    ensure!(
        formula == vec![BigRational::from_integer(2.into())],
        "(3-(-1))/2 gave {formula:?}"
    );

    // (t, q, ell, D_K, D, [O_K^x : O^x])
    for (t, q, ell, dk, d, u) in [
        (0i64, 25i64, 5i64, -4i64, -100i64, 2i64),
        (0, 19, 2, -19, -76, 1),
    ] {
        let alg = algebra(&[q, -t, 1], q);
        let r = Order::equation_order(&alg);
        let l = &maximal_ideals_above(&alg, &r, &BigInt::from(ell)).unwrap()[0];
        let lad = build_ladder(&alg, &r, l).unwrap();
        let data = imquad_class_data(&alg, &lad).unwrap();
        let sizes: Vec<u64> = data.groups.iter().map(|g| g.order()).collect();
        ensure!(
            sizes == vec![form_count(dk), form_count(d)],
            "disc {d}: Cl sizes {sizes:?}"
        );
        let ratio = ladder_ratios(&alg, &lad, &[BigInt::from(u)]).unwrap();
        let want = BigRational::new(form_count(d).into(), form_count(dk).into());
        ensure!(
            ratio == vec![want.clone()],
            "disc {d}: ratio {ratio:?}, forms give {want}"
        );
    }
    Ok("disc -36: Cl sizes (1,2), 1 + 2 vertices, ratio 2; disc -100 and -76 ratios 2 and 3 agree with form counts".into())
}

fn c9(cli: &Cli) -> Outcome {
    let f = format!("file:{}", classdata("c_ex_BJW.json").display());
    let j = cli.json(&[
        "volcano-check",
        "--label",
        "4.5.e_f_ax_adi",
        "--ell",
        "2",
        "--class-data",
        &f,
    ])?;
    let g = &j["graphs"][0];
    let comps = components(&g["graph"]);
    ensure!(comps.len() == 2, "{} components", comps.len());
    let levels = [0, 0, 1, 1, 2, 2];
    let edges = [
        (0, 3, "descending"),
        (1, 2, "descending"),
        (3, 4, "descending"),
        (2, 5, "descending"),
        (4, 2, "ascending"),
        (5, 3, "ascending"),
        (2, 0, "ascending"),
        (3, 1, "ascending"),
    ];
    for (k, c) in comps.iter().enumerate() {
        ensure!(
            level_sizes(c) == vec![2, 2, 2],
            "component {k}: level sizes {:?}",
            level_sizes(c)
        );
        ensure!(
            matches_figure(c, &levels, &edges),
            "component {k} differs from the figure"
        );
    }
    for v in g["verdict"]["components"].as_array().unwrap() {
        ensure!(
            v["structural"]["failure"] == "asc_ne_desc",
            "structural verdict {}",
            v["structural"]
        );
        ensure!(v["surface_connected"] == false, "surface is connected");
        ensure!(v["internal_error"] == false, "internal error");
    }
    ensure!(j["volcano"] == false, "verdict is volcano");
    Ok(
        "2 components of sizes 2,2,2 matching the figure; not a volcano since G^asc != G^desc"
            .into(),
    )
}

fn c10(cli: &Cli) -> Outcome {
    let f = format!("file:{}", classdata("Gasc0.json").display());
    let j = cli.json(&[
        "volcano-check",
        "--label",
        "6.2.b_e_d_l_l_be",
        "--ell",
        "5",
        "--class-data",
        &f,
    ])?;
    let graphs = j["graphs"].as_array().unwrap();
    ensure!(graphs.len() == 2, "{} class data entries", graphs.len());
    let fig_a: (Vec<usize>, Vec<(usize, usize, &str)>) = (
        vec![0, 0, 1, 1, 1, 1],
        vec![
            (0, 0, "horizontal"),
            (1, 1, "horizontal"),
            (0, 1, "horizontal"),
            (1, 0, "horizontal"),
            (2, 0, "ascending"),
            (3, 0, "ascending"),
            (4, 1, "ascending"),
            (5, 1, "ascending"),
            (1, 2, "descending"),
            (1, 3, "descending"),
            (0, 4, "descending"),
            (0, 5, "descending"),
        ],
    );
    let fig_b: (Vec<usize>, Vec<(usize, usize, &str)>) = (
        vec![0, 0, 1, 1],
        vec![
            (0, 0, "horizontal"),
            (1, 1, "horizontal"),
            (0, 1, "horizontal"),
            (1, 0, "horizontal"),
            (2, 0, "ascending"),
            (3, 1, "ascending"),
            (1, 2, "descending"),
            (0, 3, "descending"),
        ],
    );
    let mut total = 0;
    for (g, fig) in graphs.iter().zip([fig_a, fig_b]) {
        let comps = components(&g["graph"]);
        ensure!(comps.len() == 1, "{} components in one entry", comps.len());
        total += comps[0].levels.len();
        ensure!(
            matches_figure(&comps[0], &fig.0, &fig.1),
            "component with level sizes {:?} differs from the figure",
            level_sizes(&comps[0])
        );
        let v = &g["verdict"]["components"][0];
        ensure!(
            v["surface_predicted"]["prediction"] == "not_covered_by_theorem",
            "surface prediction {}",
            v["surface_predicted"]
        );
    }
    ensure!(total == 10, "{total} vertices");
    Ok(
        "two components, 6 + 4 = 10 vertices as in the figure; surface not covered by theorem"
            .into(),
    )
}

fn c11(cli: &Cli) -> Outcome {
    let f = format!("file:{}", classdata("du.json").display());
    let j = cli.json(&[
        "volcano-check",
        "--label",
        "2.101.o_dl",
        "--ell",
        "3",
        "--class-data",
        &f,
    ])?;
    let g = &j["graphs"][0];
    let comps = components(&g["graph"]);
    ensure!(comps.len() == 2, "{} components", comps.len());
    let total: usize = comps.iter().map(|c| c.levels.len()).sum();
    ensure!(total == 54, "{total} vertices");
    for c in &comps {
        ensure!(
            level_sizes(c) == vec![3, 6, 18],
            "level sizes {:?}",
            level_sizes(c)
        );
        for (v, &lv) in c.levels.iter().enumerate() {
            let children = c
                .edges
                .iter()
                .filter(|e| e.2 == "ascending" && e.1 == v)
                .count();
            ensure!(
                children == [2, 3, 0][lv],
                "vertex at level {lv} has {children} children"
            );
        }
    }
    for v in g["verdict"]["components"].as_array().unwrap() {
        ensure!(
            v["structural"]["result"] == "volcano" && v["structural"]["r"] == 3,
            "structural {}",
            v["structural"]
        );
        ensure!(
            v["predicted"]["prediction"] == "volcano" && v["predicted"]["r"] == 3,
            "predicted {}",
            v["predicted"]
        );
    }
    ensure!(j["volcano"] == true, "overall verdict is not volcano");
    Ok("2 x (3+6+18) = 54 vertices, fibers 2 then 3, structural and predicted 3-volcano".into())
}

fn c12(_: &Cli) -> Outcome {
    fn run<S: proptest::strategy::Strategy>(
        cases: u32,
        s: S,
        f: impl Fn(S::Value) -> props::Check,
    ) -> Result<(), String>
    where
        S::Value: std::fmt::Debug,
    {
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        runner.run(&s, f).map_err(|e| e.to_string())
    }
    use proptest::prelude::*;
    let k3 = prop_oneof![Just(2i64), Just(3), Just(6)];
    run(24, (props::squarefree_poly(), k3), |(h, k)| {
        props::reg_vs_sing_and_trichotomy(&h, k)
    })?;
    let k4 = prop_oneof![Just(2i64), Just(3), Just(4)];
    run(24, (props::squarefree_poly(), k4), |(h, k)| {
        props::fast_path_enumeration_agrees(&h, k)
    })?;
    let k5 = prop_oneof![Just(2i64), Just(4), Just(8), Just(9)];
    run(24, (props::squarefree_poly(), k5), |(h, k)| {
        props::conductor_law_on_ladders(&h, k)
    })?;
    props::reg_vs_sing_on_fixture_orders().map_err(|e| e.to_string())?;
    run(
        200,
        (props::synthetic_strategy(), any::<u64>()),
        |(x, s)| props::graph_structure_invariants(&x, s),
    )?;
    Ok("3 x 24 random orders, fixture orders and 200 synthetic graphs, no failures".into())
}

fn c13(cli: &Cli, started: Instant) -> Outcome {
    let gasc0 = format!("file:{}", classdata("Gasc0.json").display());
    let bjw = format!("file:{}", classdata("c_ex_BJW.json").display());
    let du = format!("file:{}", classdata("du.json").display());
    let disc36 = cli.poly_file("disc36.json", &[13, -4, 1], 13);
    let commands: Vec<Vec<&str>> = vec![
        vec!["classify-prime", "--label", "3.25.g_cg_ji"],
        vec![
            "ladder",
            "--label",
            "3.25.g_cg_ji",
            "--ell",
            "2",
            "--residue-size",
            "2",
        ],
        vec!["overorders", "--label", "3.5.c_ab_ae"],
        vec![
            "graph",
            "--poly",
            &disc36,
            "--ell",
            "3",
            "--order",
            "Z[pi]",
            "--class-data",
            "imquad",
        ],
        vec![
            "volcano-check",
            "--label",
            "4.5.e_f_ax_adi",
            "--ell",
            "2",
            "--class-data",
            &bjw,
        ],
        vec![
            "volcano-check",
            "--label",
            "6.2.b_e_d_l_l_be",
            "--ell",
            "5",
            "--class-data",
            &gasc0,
        ],
        vec![
            "volcano-check",
            "--label",
            "2.101.o_dl",
            "--ell",
            "3",
            "--class-data",
            &du,
        ],
        vec!["fetch", "--label", "2.3.a_ac"],
    ];
    for (n, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let json = cli.scratch.path().join(format!("{n}-{run}.json"));
            let dot = cli.scratch.path().join(format!("{n}-{run}.dot"));
            let mut args = cmd.clone();
            let (js, ds) = (
                json.to_string_lossy().into_owned(),
                dot.to_string_lossy().into_owned(),
            );
            args.extend(["--offline", "--json", &js]);
            if cmd[0] != "fetch" && cmd[0] != "classify-prime" {
                args.extend(["--dot", &ds]);
            }
            let (code, stdout, err) = cli.run(&args);
            ensure!(code == 0, "{cmd:?} exited {code}: {err}");
            let read = |p: &Path| std::fs::read(p).unwrap_or_default();
            outputs.push((stdout, read(&json), read(&dot)));
        }
        ensure!(!outputs[0].1.is_empty(), "{cmd:?} wrote no JSON");
        ensure!(outputs[0] == outputs[1], "{cmd:?} differs between runs");
    }
    let elapsed = started.elapsed();
    ensure!(
        elapsed < Duration::from_secs(300),
        "acceptance run took {elapsed:?}"
    );
    Ok(format!(
        "{} commands byte-identical across two runs; acceptance run {:.1} s",
        commands.len(),
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let started = Instant::now();
    let cli = Cli::new();
    let criteria: Vec<(u32, Box<dyn Fn(&Cli) -> Outcome>)> = vec![
        (1, Box::new(c1)),
        (2, Box::new(c2)),
        (3, Box::new(c3)),
        (4, Box::new(c4)),
        (5, Box::new(c5)),
        (6, Box::new(c6)),
        (7, Box::new(c7)),
        (8, Box::new(c8)),
        (9, Box::new(c9)),
        (10, Box::new(c10)),
        (11, Box::new(c11)),
        (12, Box::new(c12)),
        (13, Box::new(move |c: &Cli| c13(c, started))),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (n, check) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&cli))).unwrap_or_else(|p| {
            Err(format!(
                "panicked: {}",
                p.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ))
        });
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS: {detail}"),
            Err(detail) => {
                println!("criterion {n}: FAIL: {detail}");
                failed.push(*n);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
