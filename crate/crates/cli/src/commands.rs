//! Subcommand implementations. Every report is a pure function of the
//! inputs, so repeated runs print identical bytes.

use crate::config::ConfigFile;
use crate::expr::{parse_element, parse_order_spec, OrderSpec};
use crate::{
    ClassifyArgs, Cli, Command, Failure, FetchArgs, GraphArgs, InputArgs, LadderArgs, OutputArgs,
    OverorderArgs, PrimeArgs,
};
use num_bigint::BigInt;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;
use weilgraph::algebra::EtaleAlgebra;
use weilgraph::classgroup::{imquad_class_data, load_external, ExternalLadder};
use weilgraph::error::Error;
use weilgraph::factor::parse_hint;
use weilgraph::graph::{
    build_graph, classify_isogeny_class, compute_d_min, GraphSpec, IsogenyGraph, IsogenyKind,
};
use weilgraph::ladder::{
    build_ladder, classify_splitting, count_ladders, enumerate_overorders, find_base_order,
    is_bass_at, MultiplicatorLadder,
};
use weilgraph::lattice::int_index;
use weilgraph::lmfdb::LmfdbClient;
use weilgraph::maximal::{maximal_order, singular_primes, FactoredIndex};
use weilgraph::order::{cm_type, maximal_ideals_above, order_from_generators, MaximalIdeal, Order};
use weilgraph::volcano::{
    volcano_verdict, Prediction, SurfacePrediction, VolcanoCheck, VolcanoVerdict,
};

type Res<T> = std::result::Result<T, Failure>;

pub fn run(cli: Cli) -> Res<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p).map_err(Failure::Usage)?,
        None => ConfigFile::empty(),
    };
    match cli.command {
        Command::Ladder(mut a) => {
            fill_input(&cfg, &mut a.input)?;
            fill_prime(&cfg, &mut a.prime)?;
            fill_output(&cfg, &mut a.output)?;
            cfg.fill("order", &mut a.order).map_err(Failure::Usage)?;
            ladder(a)
        }
        Command::Overorders(mut a) => {
            fill_input(&cfg, &mut a.input)?;
            fill_output(&cfg, &mut a.output)?;
            cfg.fill("order", &mut a.order).map_err(Failure::Usage)?;
            overorders(a)
        }
        Command::ClassifyPrime(mut a) => {
            fill_input(&cfg, &mut a.input)?;
            fill_output(&cfg, &mut a.output)?;
            cfg.fill("order", &mut a.order).map_err(Failure::Usage)?;
            cfg.fill("ell", &mut a.ell).map_err(Failure::Usage)?;
            classify(a)
        }
        Command::Graph(mut a) => {
            fill_graph(&cfg, &mut a)?;
            graph(a, false)
        }
        Command::VolcanoCheck(mut a) => {
            fill_graph(&cfg, &mut a)?;
            graph(a, true)
        }
        Command::Fetch(mut a) => {
            cfg.fill("label", &mut a.label).map_err(Failure::Usage)?;
            cfg.flag("offline", &mut a.offline)
                .map_err(Failure::Usage)?;
            fill_output(&cfg, &mut a.output)?;
            fetch(a)
        }
    }
}

// ---------------------------------------------------------------------------
// configuration

fn fill_input(cfg: &ConfigFile, a: &mut InputArgs) -> Res<()> {
    (|| {
        cfg.fill("label", &mut a.label)?;
        cfg.fill("poly", &mut a.poly)?;
        cfg.flag("offline", &mut a.offline)?;
        cfg.fill("factor-hint", &mut a.factor_hint)
    })()
    .map_err(Failure::Usage)
}

fn fill_prime(cfg: &ConfigFile, a: &mut PrimeArgs) -> Res<()> {
    (|| {
        cfg.fill("ell", &mut a.ell)?;
        cfg.fill("residue-size", &mut a.residue_size)?;
        cfg.fill("index", &mut a.index)
    })()
    .map_err(Failure::Usage)
}

fn fill_output(cfg: &ConfigFile, a: &mut OutputArgs) -> Res<()> {
    (|| {
        cfg.fill("json", &mut a.json)?;
        cfg.fill("dot", &mut a.dot)
    })()
    .map_err(Failure::Usage)
}

fn fill_graph(cfg: &ConfigFile, a: &mut GraphArgs) -> Res<()> {
    fill_input(cfg, &mut a.input)?;
    fill_prime(cfg, &mut a.prime)?;
    fill_output(cfg, &mut a.output)?;
    (|| {
        cfg.fill("order", &mut a.order)?;
        cfg.fill("class-data", &mut a.class_data)?;
        cfg.fill("n", &mut a.n)?;
        cfg.fill("d-min", &mut a.d_min)
    })()
    .map_err(Failure::Usage)
}

// ---------------------------------------------------------------------------
// inputs

struct Input {
    alg: EtaleAlgebra,
    name: String,
    hints: Option<FactoredIndex>,
}

fn parse_big(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn load_input(a: &InputArgs) -> Res<Input> {
    let (alg, name) = match (&a.label, &a.poly) {
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "give exactly one of --label and --poly".into(),
            ))
        }
        (None, None) => {
            return Err(Failure::Usage(
                "one of --label or --poly is required".into(),
            ))
        }
        (Some(label), None) => {
            let client = LmfdbClient {
                offline: a.offline,
                ..LmfdbClient::default()
            };
            let (rec, _) = client.fetch(label)?;
            (
                EtaleAlgebra::from_i64(&rec.h, Some(rec.q as i64))?,
                format!("label {}", rec.label),
            )
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Usage(format!(
                    "cannot read polynomial file {}: {e}",
                    path.display()
                ))
            })?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: not JSON: {e}", path.display())))?;
            let h: Vec<BigInt> = v
                .get("h")
                .and_then(|h| h.as_array())
                .and_then(|h| h.iter().map(parse_big).collect())
                .ok_or_else(|| {
                    Failure::Usage(format!(
                        "{}: expected an integer array \"h\"",
                        path.display()
                    ))
                })?;
            let q = match v.get("q") {
                None | Some(Value::Null) => None,
                Some(q) => Some(
                    parse_big(q)
                        .ok_or_else(|| Failure::Usage("\"q\" must be an integer".into()))?,
                ),
            };
            (
                EtaleAlgebra::new(h, q)?,
                format!("polynomial file {}", path.display()),
            )
        }
    };
    let hints = match &a.factor_hint {
        Some(s) => Some(FactoredIndex::user(parse_hint(s)?)),
        None => None,
    };
    Ok(Input { alg, name, hints })
}

fn generated_order(alg: &EtaleAlgebra, gens: &[String]) -> Res<Order> {
    let elems = gens
        .iter()
        .map(|g| parse_element(alg, g))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(order_from_generators(alg, &elems)?)
}

/// The order named by `spec`; `auto` is only meaningful with a prime.
fn fixed_order(input: &Input, spec: &OrderSpec) -> Res<Order> {
    match spec {
        OrderSpec::Maximal => Ok(maximal_order(&input.alg, input.hints.as_ref())?),
        OrderSpec::Generators(g) => generated_order(&input.alg, g),
        OrderSpec::Auto => Err(Failure::Usage(
            "--order auto needs a prime selector (--ell)".into(),
        )),
    }
}

fn order_spec(s: &Option<String>, default: &str) -> Res<OrderSpec> {
    parse_order_spec(s.as_deref().unwrap_or(default)).map_err(|e| Failure::Usage(e.to_string()))
}

/// Maximal ideal of `order` above ell, filtered and indexed as requested.
fn select_prime(
    input: &Input,
    order: &Order,
    p: &PrimeArgs,
    singular_only: bool,
) -> Res<(MaximalIdeal, usize, usize)> {
    let ell = p
        .ell
        .ok_or_else(|| Failure::Usage("--ell is required".into()))?;
    let candidates: Vec<MaximalIdeal> =
        maximal_ideals_above(&input.alg, order, &BigInt::from(ell))?
            .into_iter()
            .filter(|m| !singular_only || m.is_singular)
            .filter(|m| {
                p.residue_size
                    .is_none_or(|s| m.residue_size == BigInt::from(s))
            })
            .collect();
    let idx = p.index.unwrap_or(0);
    let count = candidates.len();
    let m = candidates.into_iter().nth(idx).ok_or_else(|| {
        Failure::Domain(Error::InvalidInput(format!(
            "no {}maximal ideal above {ell} matches (found {count} candidates, index {idx})",
            if singular_only { "singular " } else { "" }
        )))
    })?;
    Ok((m, idx, count))
}

struct Base {
    r: Order,
    l: MaximalIdeal,
    auto: bool,
    selected: (usize, usize),
}

fn resolve_base(input: &Input, spec: &OrderSpec, p: &PrimeArgs) -> Res<Base> {
    match spec {
        OrderSpec::Auto => {
            let top = Order::z_pi_q_pi(&input.alg)?;
            let (big, i, n) = select_prime(input, &top, p, true)?;
            let (r, l) = find_base_order(&input.alg, &top, &big)?.ok_or_else(|| {
                Failure::Domain(Error::InvalidInput(
                    "no suborder of Z[pi,q/pi] is Bass at a prime below the selected one".into(),
                ))
            })?;
            Ok(Base {
                r,
                l,
                auto: true,
                selected: (i, n),
            })
        }
        _ => {
            let r = fixed_order(input, spec)?;
            let (l, i, n) = select_prime(input, &r, p, true)?;
            Ok(Base {
                r,
                l,
                auto: false,
                selected: (i, n),
            })
        }
    }
}

fn index_in(ok: &Order, o: &Order) -> Res<BigInt> {
    Ok(int_index(&ok.lattice, &o.lattice)?)
}

fn write_out(path: &str, content: &str) -> Res<()> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        std::fs::write(Path::new(path), content).map_err(|e| Failure::Io(format!("{path}: {e}")))
    }
}

fn emit(out: &OutputArgs, text: &str, js: &Value, dot: Option<&str>) -> Res<()> {
    if out.json.as_deref() != Some("-") && out.dot.as_deref() != Some("-") {
        print!("{text}");
    }
    if let Some(p) = &out.json {
        write_out(p, &(serde_json::to_string_pretty(js).unwrap() + "\n"))?;
    }
    if let Some(p) = &out.dot {
        let dot = dot.ok_or_else(|| Failure::Usage("this subcommand has no DOT output".into()))?;
        write_out(p, dot)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// ladder

fn ladder_json(alg: &EtaleAlgebra, ok: &Order, lad: &MultiplicatorLadder) -> Res<Value> {
    let mut rungs = Vec::new();
    for (i, r) in lad.rungs.iter().enumerate() {
        let mut entry = json!({
            "level": i,
            "index_in_maximal_order": index_in(ok, r)?.to_string(),
            "order": r.to_json(),
        });
        if let Some(Some(li)) = lad.singular_ideals.get(i) {
            entry["singular_prime"] = json!({
                "residue_size": li.residue_size.to_string(),
                "cm_type": cm_type(alg, li)?,
            });
        }
        rungs.push(entry);
    }
    Ok(json!({
        "length": lad.length(),
        "residue_size": lad.residue_size().to_string(),
        "ell": lad.base_prime.ell,
        "delta": lad.delta(),
        "top_splitting": lad.top_splitting.as_ref().map(|s| s.name()),
        "rungs": rungs,
    }))
}

fn ladder_text(
    alg: &EtaleAlgebra,
    ok: &Order,
    lad: &MultiplicatorLadder,
    out: &mut String,
) -> Res<()> {
    let delta = match lad.delta() {
        Some(d) => format!("{d} ({})", lad.top_splitting.as_ref().unwrap().name()),
        None => "undefined".into(),
    };
    let _ = writeln!(
        out,
        "ladder: length {}, prime above {} with residue size {}, delta {delta}",
        lad.length(),
        lad.base_prime.ell,
        lad.residue_size()
    );
    for (i, r) in lad.rungs.iter().enumerate() {
        let _ = write!(out, "  rung {i}: [O_K : O_{i}] = {}", index_in(ok, r)?);
        if let Some(Some(li)) = lad.singular_ideals.get(i) {
            let _ = write!(
                out,
                ", singular prime of residue size {} and CM type {}",
                li.residue_size,
                cm_type(alg, li)?
            );
        }
        out.push('\n');
    }
    Ok(())
}

fn ladder_dot(ok: &Order, lad: &MultiplicatorLadder) -> Res<String> {
    let mut s = String::from("digraph ladder {\n  rankdir=BT;\n");
    for (i, r) in lad.rungs.iter().enumerate() {
        let _ = writeln!(
            s,
            "  o{i} [label=\"O_{i}\\n[O_K:O_{i}] = {}\"];",
            index_in(ok, r)?
        );
    }
    for i in 1..lad.rungs.len() {
        let _ = writeln!(
            s,
            "  o{i} -> o{} [label=\"{}\"];",
            i - 1,
            int_index(&lad.rungs[i - 1].lattice, &lad.rungs[i].lattice)?
        );
    }
    s.push_str("}\n");
    Ok(s)
}

fn ladder(a: LadderArgs) -> Res<()> {
    let input = load_input(&a.input)?;
    let spec = order_spec(&a.order, "Z[pi,q/pi]")?;
    let base = resolve_base(&input, &spec, &a.prime)?;
    let alg = &input.alg;
    let ok = maximal_order(alg, input.hints.as_ref())?;
    let lad = build_ladder(alg, &base.r, &base.l)?;
    let bass = is_bass_at(alg, &base.r, &base.l)?;
    let count = count_ladders(alg, &base.r, &base.l)?;
    let mut text = format!("input: {}\n", input.name);
    let _ = writeln!(
        text,
        "order: [O_K : R] = {}{}",
        index_in(&ok, &base.r)?,
        if base.auto {
            " (base order found below Z[pi,q/pi])"
        } else {
            ""
        }
    );
    let _ = writeln!(
        text,
        "prime: candidate {} of {}",
        base.selected.0, base.selected.1
    );
    ladder_text(alg, &ok, &lad, &mut text)?;
    let _ = writeln!(text, "Bass at l: {}", if bass { "yes" } else { "no" });
    let _ = writeln!(text, "ladders through l among the overorders: {count}");
    let js = json!({
        "schema": 1,
        "input": input.name,
        "order_index": index_in(&ok, &base.r)?.to_string(),
        "ladder": ladder_json(alg, &ok, &lad)?,
        "bass": bass,
        "ladder_count": count,
    });
    emit(&a.output, &text, &js, Some(&ladder_dot(&ok, &lad)?))
}

// ---------------------------------------------------------------------------
// overorders

fn overorders(a: OverorderArgs) -> Res<()> {
    let input = load_input(&a.input)?;
    let spec = order_spec(&a.order, "Z[pi,q/pi]")?;
    let r = fixed_order(&input, &spec)?;
    let alg = &input.alg;
    let ok = maximal_order(alg, input.hints.as_ref())?;
    let all = enumerate_overorders(alg, &r)?;
    let mut covers = Vec::new();
    for (i, s) in all.iter().enumerate() {
        for (j, t) in all.iter().enumerate() {
            if i == j || !t.contains(s) {
                continue;
            }
            let between = all
                .iter()
                .enumerate()
                .any(|(k, u)| k != i && k != j && u.contains(s) && t.contains(u));
            if !between {
                covers.push((i, j, int_index(&t.lattice, &s.lattice)?));
            }
        }
    }
    let mut text = format!("input: {}\noverorders: {}\n", input.name, all.len());
    let mut orders = Vec::new();
    let mut dot = String::from("digraph overorders {\n  rankdir=BT;\n");
    for (i, s) in all.iter().enumerate() {
        let idx = index_in(&ok, s)?;
        let _ = writeln!(text, "  S{i}: [O_K : S{i}] = {idx}");
        let _ = writeln!(dot, "  s{i} [label=\"S{i}\\n{idx}\"];");
        orders.push(
            json!({ "id": i, "index_in_maximal_order": idx.to_string(), "order": s.to_json() }),
        );
    }
    let _ = writeln!(text, "minimal inclusions:");
    for (i, j, k) in &covers {
        let _ = writeln!(text, "  S{i} < S{j}, index {k}");
        let _ = writeln!(dot, "  s{i} -> s{j} [label=\"{k}\"];");
    }
    dot.push_str("}\n");
    let js = json!({
        "schema": 1,
        "input": input.name,
        "orders": orders,
        "covers": covers.iter().map(|(i, j, k)| json!({"lower": i, "upper": j, "index": k.to_string()})).collect::<Vec<_>>(),
    });
    emit(&a.output, &text, &js, Some(&dot))
}

// ---------------------------------------------------------------------------
// classify-prime

fn classify(a: ClassifyArgs) -> Res<()> {
    let input = load_input(&a.input)?;
    let spec = order_spec(&a.order, "Z[pi,q/pi]")?;
    let r = fixed_order(&input, &spec)?;
    let alg = &input.alg;
    let mut text = String::new();
    let mut rows = Vec::new();
    for m in singular_primes(alg, &r, input.hints.as_ref())? {
        if a.ell.is_some_and(|e| e != m.ell) {
            continue;
        }
        let st = classify_splitting(alg, &r, &m)?;
        let _ = writeln!(
            text,
            "ell={} residue_size={} type={st}",
            m.ell, m.residue_size
        );
        rows.push(json!({
            "ell": m.ell,
            "residue_size": m.residue_size.to_string(),
            "type": st.name(),
            "delta": st.delta(),
        }));
    }
    let js = json!({ "schema": 1, "input": input.name, "singular_primes": rows });
    emit(&a.output, &text, &js, None)
}

// ---------------------------------------------------------------------------
// graph and volcano-check

struct Built {
    spec: GraphSpec,
    graph: IsogenyGraph,
    n_source: &'static str,
    d_min_source: &'static str,
}

fn class_entries(
    input: &Input,
    lad: &MultiplicatorLadder,
    source: &str,
) -> Res<Vec<ExternalLadder>> {
    if source == "imquad" {
        let chain = imquad_class_data(&input.alg, lad)?;
        return Ok(vec![ExternalLadder {
            chain,
            depth: None,
            d_min: None,
            n_orbits: None,
        }]);
    }
    let path = source.strip_prefix("file:").ok_or_else(|| {
        Failure::Usage(format!(
            "--class-data must be imquad or file:PATH, got {source}"
        ))
    })?;
    if !Path::new(path).exists() {
        return Err(Failure::Usage(format!(
            "class data file {path} does not exist"
        )));
    }
    Ok(load_external(Path::new(path))?)
}

fn build_all(
    a: &GraphArgs,
    input: &Input,
    lad: &MultiplicatorLadder,
) -> Res<(Vec<Built>, IsogenyKind)> {
    let source = a
        .class_data
        .as_deref()
        .ok_or_else(|| Failure::Usage("--class-data is required".into()))?;
    let entries = class_entries(input, lad, source)?;
    let ctx = match classify_isogeny_class(&input.alg, a.n) {
        Err(Error::NeedUserN) => None,
        other => Some(other?),
    };
    let kind = ctx.as_ref().map(|c| c.kind).unwrap_or(IsogenyKind::Other);
    let mut built = Vec::new();
    for e in entries {
        if let Some(d) = e.depth {
            if d != lad.length() {
                return Err(Error::SchemaError(format!(
                    "class data has depth {d}, the ladder has length {}",
                    lad.length()
                ))
                .into());
            }
        }
        let theory_d_min = match ctx.as_ref().and_then(|c| c.o_min.as_ref()) {
            Some(o_min) => Some(compute_d_min(lad, o_min)?),
            None => None,
        };
        let (d_min, d_min_source) = match (a.d_min, theory_d_min, e.d_min) {
            (Some(d), _, _) => (d, "user"),
            (None, Some(t), Some(f)) if t != f => {
                return Err(Error::SchemaError(format!(
                    "class data says d_min = {f}, the ladder gives {t}"
                ))
                .into())
            }
            (None, Some(t), _) => (t, "theory"),
            (None, None, Some(f)) => (f, "class data"),
            (None, None, None) => return Err(Error::NeedUserDMin.into()),
        };
        let theory_n = ctx
            .as_ref()
            .filter(|c| c.n_rule.verified())
            .map(|c| c.n_rule.value());
        let (n, n_source) = match (a.n, theory_n, e.n_orbits) {
            (Some(n), _, _) => (n, "user"),
            (None, Some(t), Some(f)) if t != f => {
                return Err(Error::SchemaError(format!(
                    "class data says N = {f}, the theory gives {t}"
                ))
                .into())
            }
            (None, Some(t), _) => (t, "theory"),
            (None, None, Some(f)) => (f, "class data"),
            (None, None, None) => return Err(Error::NeedUserN.into()),
        };
        let mut spec = GraphSpec::for_ladder(&input.alg, lad, e.chain, d_min, n)?;
        spec.verified = n_source == "theory" && d_min_source == "theory";
        let graph = build_graph(&spec)?;
        built.push(Built {
            spec,
            graph,
            n_source,
            d_min_source,
        });
    }
    Ok((built, kind))
}

fn kind_name(k: IsogenyKind) -> &'static str {
    match k {
        IsogenyKind::Ordinary => "ordinary",
        IsogenyKind::AlmostOrdinary => "almost ordinary",
        IsogenyKind::PrimeField => "prime field",
        IsogenyKind::Other => "other",
    }
}

fn prediction_text(p: &Prediction) -> String {
    match p {
        Prediction::Volcano { r: Some(r) } => format!("volcano r={r}"),
        Prediction::Volcano { r: None } => "volcano".into(),
        Prediction::NotVolcano { reason } => format!("not a volcano ({reason})"),
        Prediction::NotCoveredByTheorem { reason } => format!("not covered by theorem ({reason})"),
        Prediction::Unavailable { reason } => format!("unavailable ({reason})"),
    }
}

fn structural_text(c: &VolcanoCheck) -> String {
    match c {
        VolcanoCheck::Volcano { r: Some(r) } => format!("volcano r={r}"),
        VolcanoCheck::Volcano { r: None } => "volcano".into(),
        VolcanoCheck::NotVolcano(f) => format!("not a volcano ({f:?})"),
    }
}

fn surface_text(s: &SurfacePrediction) -> String {
    match s {
        SurfacePrediction::Connected { r0 } => format!("connected, {r0}-regular"),
        SurfacePrediction::Disconnected => "disconnected".into(),
        SurfacePrediction::NotCoveredByTheorem => "not covered by theorem".into(),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn graph(a: GraphArgs, volcano: bool) -> Res<()> {
    let input = load_input(&a.input)?;
    let spec = order_spec(&a.order, "auto")?;
    let base = resolve_base(&input, &spec, &a.prime)?;
    let alg = &input.alg;
    let ok = maximal_order(alg, input.hints.as_ref())?;
    let lad = build_ladder(alg, &base.r, &base.l)?;
    let (built, kind) = build_all(&a, &input, &lad)?;

    let mut text = format!("input: {}\nkind: {}\n", input.name, kind_name(kind));
    let _ = writeln!(text, "order: [O_K : R] = {}", index_in(&ok, &base.r)?);
    ladder_text(alg, &ok, &lad, &mut text)?;
    let mut graphs = Vec::new();
    let mut dot = String::new();
    let mut verdicts: Vec<VolcanoVerdict> = Vec::new();
    let total: usize = built.iter().map(|b| b.graph.vertices.len()).sum();
    let comps: usize = built.iter().map(|b| b.graph.components).sum();
    for (k, b) in built.iter().enumerate() {
        let g = &b.graph;
        let _ = writeln!(
            text,
            "class data {} of {}: N = {} ({}), d_min = {} ({})",
            k + 1,
            built.len(),
            b.spec.n_orbits,
            b.n_source,
            b.spec.d_min,
            b.d_min_source
        );
        let _ = writeln!(
            text,
            "  components: {}, vertices: {}",
            g.components,
            g.vertices.len()
        );
        for c in 0..g.components {
            let sizes: Vec<String> = g.level_sizes(c).iter().map(|x| x.to_string()).collect();
            let _ = writeln!(text, "  component {c}: level sizes {}", sizes.join(" "));
        }
        for w in &g.warnings {
            let _ = writeln!(text, "  warning: {w}");
        }
        let mut entry = json!({
            "n_orbits": b.spec.n_orbits,
            "n_source": b.n_source,
            "d_min": b.spec.d_min,
            "d_min_source": b.d_min_source,
            "verified": b.spec.verified,
            "class_data": b.spec.chain.to_json(),
            "graph": g.to_json(),
        });
        if volcano {
            let v = volcano_verdict(g, &b.spec)?;
            for c in &v.components {
                let _ = writeln!(
                    text,
                    "  component {}: structural {}; predicted {}; asc = desc {}; surface connected {} (predicted {})",
                    c.component,
                    structural_text(&c.structural),
                    prediction_text(&c.predicted),
                    yes(c.asc_equals_desc),
                    yes(c.surface_connected),
                    surface_text(&c.surface_predicted)
                );
            }
            entry["verdict"] = serde_json::to_value(&v).unwrap();
            verdicts.push(v);
        }
        graphs.push(entry);
        dot.push_str(&g.to_dot());
    }
    let _ = writeln!(text, "total: {comps} components, {total} vertices");
    let mut js = json!({
        "schema": 1,
        "input": input.name,
        "kind": kind,
        "ladder": ladder_json(alg, &ok, &lad)?,
        "graphs": graphs,
    });
    if volcano {
        let all = verdicts.iter().all(|v| v.all_volcanoes());
        let _ = writeln!(text, "volcano: {}", yes(all));
        js["volcano"] = json!(all);
    }
    emit(&a.output, &text, &js, Some(&dot))?;
    if verdicts.iter().any(|v| v.internal_error()) {
        return Err(Failure::Internal(
            "structural and predicted volcano verdicts disagree".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// fetch

fn fetch(a: FetchArgs) -> Res<()> {
    let label = a
        .label
        .as_deref()
        .ok_or_else(|| Failure::Usage("--label is required".into()))?;
    let client = LmfdbClient {
        offline: a.offline,
        ..LmfdbClient::default()
    };
    let (rec, source) = client.fetch(label)?;
    let h: Vec<String> = rec.h.iter().rev().map(|c| c.to_string()).collect();
    let text = format!(
        "label: {}\ng = {}, q = {}, p = {}\nh (high to low): {}\nordinary: {}\nsource: {}\n",
        rec.label,
        rec.g,
        rec.q,
        rec.p,
        h.join(" "),
        yes(rec.is_ordinary),
        serde_json::to_value(source).unwrap().as_str().unwrap()
    );
    let js = json!({ "schema": 1, "record": rec, "source": source });
    emit(&a.output, &text, &js, None)
}
