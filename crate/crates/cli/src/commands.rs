use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use qpc_core::classical::ClassicalCode;
use qpc_core::css::{self, CssError};
use qpc_core::formats::{self, GraphFile};
use qpc_core::graph::{lift_from_ring_matrix, CoveringMap, CoveringViolation, QuotientLayout};
use qpc_core::group_ring::GroupAlgebraMatrix;
use qpc_core::layout::{self, Figure, Format, LayoutError, OperatorOverlay, Pauli, Projection, RenderSpec};
use qpc_core::product::{self, CssCode, LayoutKind, ProductKind};

use crate::input::{self, CliResult, Failure, EXIT_BUDGET, EXIT_PRECONDITION};
use crate::{Check, LayoutArgs, SearchArgs, Source};

enum Factors {
    Classical(ClassicalCode, ClassicalCode),
    Rings(GroupAlgebraMatrix, GroupAlgebraMatrix),
    None,
}

struct Built {
    code: CssCode,
    factors: Factors,
}

fn same_mode(a: &GraphFile, b: &GraphFile) -> CliResult<()> {
    match (a, b) {
        (GraphFile::Tanner(_), GraphFile::Tanner(_)) | (GraphFile::Plain(_), GraphFile::Plain(_)) => Ok(()),
        _ => Err(Failure::parse(
            "graphs A and B must both be Tanner graphs or both plain graphs",
        )),
    }
}

fn build(source: &Source) -> CliResult<Built> {
    Ok(match source {
        Source::Hgp { c1, c2 } => {
            let (c1, c2) = (input::classical(c1)?, input::classical(c2)?);
            Built {
                code: product::hgp(&c1, &c2),
                factors: Factors::Classical(c1, c2),
            }
        }
        Source::Lp { m1, m2 } | Source::Lifts { m1, m2 } => {
            let (m1, m2) = (input::ring_matrix(m1)?, input::ring_matrix(m2)?);
            let code = if matches!(source, Source::Lp { .. }) {
                product::lifted_product(&m1, &m2)?
            } else {
                product::hgp_of_lifts(&m1, &m2)?
            };
            Built {
                code,
                factors: Factors::Rings(m1, m2),
            }
        }
        Source::Bp {
            a,
            b,
            action_a,
            action_b,
        } => {
            let (ga, gb) = (input::graph(a)?, input::graph(b)?);
            same_mode(&ga, &gb)?;
            let (GraphFile::Tanner(ta), GraphFile::Tanner(tb)) = (&ga, &gb) else {
                return Err(Failure::precondition(
                    "plain graphs give a balanced product graph, not a code; use `construct bp`",
                ));
            };
            let (act_a, act_b) = (input::action(action_a, &ga)?, input::action(action_b, &gb)?);
            Built {
                code: product::balanced_product(ta, tb, &act_a, &act_b)?,
                factors: Factors::None,
            }
        }
        Source::Code { hx, hz } => Built {
            code: CssCode::from_matrices(input::matrix(hx)?, input::matrix(hz)?)?,
            factors: Factors::None,
        },
    })
}

fn kind_name(kind: ProductKind) -> &'static str {
    match kind {
        ProductKind::Hypergraph => "hypergraph",
        ProductKind::Lifted => "lifted",
        ProductKind::HypergraphOfLifts => "hypergraph_of_lifts",
        ProductKind::Balanced => "balanced",
        ProductKind::Matrices => "matrices",
    }
}

fn summary(code: &CssCode) -> Vec<(&'static str, Value)> {
    let p = code.provenance();
    vec![
        ("kind", json!(kind_name(p.kind))),
        ("group", json!(p.group)),
        ("n", json!(code.n())),
        ("x_checks", json!(code.x_check_count())),
        ("z_checks", json!(code.z_check_count())),
        ("commuting", json!(code.is_commuting())),
        ("parity_reductions", json!(code.parity_reductions())),
    ]
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Null => "-".to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn print_report(fields: Vec<(&'static str, Value)>, as_json: bool) {
    if as_json {
        let map: Map<String, Value> = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&Value::Object(map)).expect("report serialises")
        );
    } else {
        for (k, v) in fields {
            println!("{}: {}", k.replace('_', " "), text_value(&v));
        }
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::parse(format!("{}: {e}", dir.display())))
}

pub fn construct(source: &Source, out: Option<&Path>, as_json: bool) -> CliResult<u8> {
    if let Source::Bp {
        a,
        b,
        action_a,
        action_b,
    } = source
    {
        let (ga, gb) = (input::graph(a)?, input::graph(b)?);
        same_mode(&ga, &gb)?;
        if let (GraphFile::Plain(pa), GraphFile::Plain(pb)) = (&ga, &gb) {
            let (act_a, act_b) = (input::action(action_a, &ga)?, input::action(action_b, &gb)?);
            let bp = product::balanced_product_graph(pa, pb, &act_a, &act_b)?;
            if let Some(dir) = out {
                create_dir(dir)?;
                input::write(
                    &dir.join("product.graph"),
                    &formats::write_graph(&GraphFile::Plain(bp.graph.clone())),
                )?;
                let coords = serde_json::to_string(&bp.coords).expect("coordinates serialise");
                input::write(&dir.join("coords.json"), &format!("{coords}\n"))?;
            }
            print_report(
                vec![
                    ("kind", json!("balanced_graph")),
                    ("group", json!(act_a.group().name())),
                    ("vertices", json!(bp.graph.vertex_count())),
                    ("edges", json!(bp.graph.edge_count())),
                ],
                as_json,
            );
            return Ok(0);
        }
    }
    let built = build(source)?;
    let code = &built.code;
    if let Some(dir) = out {
        create_dir(dir)?;
        for (name, h) in [("hx", code.h_x()), ("hz", code.h_z())] {
            input::write(&dir.join(format!("{name}.pcm")), &formats::write_plain_matrix(h))?;
            input::write(&dir.join(format!("{name}.alist")), &formats::write_alist(h))?;
        }
        let figure = Figure::from_code(code, false);
        let doc = layout::emit(&figure, &RenderSpec::for_kind(figure.table.kind), &[], Format::Json)
            .map_err(layout_failure)?;
        input::write(&dir.join("layout.json"), &doc)?;
    }
    print_report(summary(code), as_json);
    Ok(0)
}

pub fn analyze(source: &Source, budget: Option<u64>, as_json: bool) -> CliResult<u8> {
    let budget = input::budget(budget)?;
    let built = build(source)?;
    let code = &built.code;
    let mut fields = summary(code);
    let commutation = css::check_commutation(code);
    fields.push(("anticommuting_pairs", json!(commutation.anticommuting.len())));
    if !commutation.commutes() {
        if as_json {
            fields.push(("status", json!("refused")));
            print_report(fields, true);
        } else {
            fields.retain(|(k, _)| *k != "commuting");
            print_report(fields, false);
            println!("commuting: false, k/d: refused");
        }
        return Ok(EXIT_PRECONDITION);
    }
    let k = css::logical_count(code)?;
    fields.push(("k", json!(k)));
    if let Factors::Classical(c1, c2) = &built.factors {
        let formula = css::hgp_k_formula(c1, c2);
        fields.push(("hgp_k_formula", json!(formula)));
        fields.push(("hgp_k_agrees", json!(formula == k)));
        let bound = css::hgp_distance_bound(c1, c2).ok().flatten();
        fields.push(("hgp_distance_bound", json!(bound)));
    }
    if let Factors::Rings(m1, m2) = &built.factors {
        if code.provenance().kind == ProductKind::Lifted && code.layout().kind == LayoutKind::Layered {
            fields.push(("planes_hold", json!(product::lp_plane_structure(code, m1, m2).holds())));
        }
    }
    fields.push(("budget", json!(budget)));
    let status = match css::css_distance(code, budget) {
        Ok(params) => {
            fields.push(("d", json!(params.d)));
            fields.push(("d_x", json!(params.d_x)));
            fields.push(("d_z", json!(params.d_z)));
            fields.push(("parameters", json!(params.to_string())));
            fields.push(("status", json!("ok")));
            0
        }
        Err(CssError::BudgetExceeded { dimension, budget }) => {
            fields.push(("d", Value::Null));
            fields.push(("parameters", json!(format!("[[{},{}]]", code.n(), k))));
            fields.push((
                "status",
                json!(format!(
                    "budget exceeded: distance search needs 2^{dimension} vectors, budget is {budget}"
                )),
            ));
            EXIT_BUDGET
        }
        Err(e) => return Err(e.into()),
    };
    print_report(fields, as_json);
    Ok(status)
}

fn layout_failure(e: LayoutError) -> Failure {
    match e {
        LayoutError::UnknownFormat(_)
        | LayoutError::Json(_)
        | LayoutError::Version(_)
        | LayoutError::VertexOrder { .. }
        | LayoutError::CoordArity { .. } => Failure::parse(e.to_string()),
        _ => Failure::precondition(e.to_string()),
    }
}

fn logical_overlay(spec: &str, factors: &Factors) -> CliResult<OperatorOverlay> {
    let bad = || Failure::parse(format!("--logical expects x<i> or z<i>, found {spec:?}"));
    let mut chars = spec.chars();
    let pauli = match chars.next().map(|c| c.to_ascii_lowercase()) {
        Some('x') => Pauli::X,
        Some('z') => Pauli::Z,
        _ => return Err(bad()),
    };
    let index: usize = chars.as_str().parse().map_err(|_| bad())?;
    let Factors::Classical(c1, c2) = factors else {
        return Err(Failure::precondition(
            "canonical logicals are only defined for hypergraph products",
        ));
    };
    let basis = css::hgp_canonical_logicals(c1, c2)?;
    let reps = if pauli == Pauli::X {
        &basis.x_logicals
    } else {
        &basis.z_logicals
    };
    let rep = reps
        .get(index)
        .ok_or_else(|| Failure::precondition(format!("code has {} logical qubits, asked for {spec}", reps.len())))?;
    Ok(OperatorOverlay::from_support(
        spec.to_ascii_uppercase(),
        pauli,
        &rep.support(),
    ))
}

pub fn layout(args: &LayoutArgs) -> CliResult<u8> {
    let format: Format = args.format.parse().map_err(layout_failure)?;
    let (figure, overlays) = match (&args.from, &args.source) {
        (Some(path), None) => {
            if args.logical.is_some() {
                return Err(Failure::parse("--logical needs a code source, not --from"));
            }
            let (mut figure, overlays) = layout::parse_json(&input::read(path)?).map_err(layout_failure)?;
            if !args.edges {
                figure.edges.clear();
            }
            (figure, overlays)
        }
        (None, Some(source)) => {
            let built = build(source)?;
            let overlays = match &args.logical {
                Some(spec) => vec![logical_overlay(spec, &built.factors)?],
                None => Vec::new(),
            };
            (Figure::from_code(&built.code, args.edges), overlays)
        }
        (Some(_), Some(_)) => return Err(Failure::parse("give either --from or a code source, not both")),
        (None, None) => {
            return Err(Failure::parse(
                "missing code source (hgp, lp, lifts, bp, code) or --from",
            ))
        }
    };
    let mut spec = RenderSpec::for_kind(figure.table.kind);
    spec.edges = args.edges;
    spec.projection = match args.projection.as_str() {
        "auto" => spec.projection,
        "none" => Projection::None,
        "oblique" => Projection::oblique(),
        other => {
            return Err(Failure::parse(format!(
                "unknown projection {other:?} (expected auto, none or oblique)"
            )))
        }
    };
    let text = layout::emit(&figure, &spec, &overlays, format).map_err(layout_failure)?;
    match &args.out {
        Some(path) => input::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn violation_json(v: &CoveringViolation, cover: &GraphFile, base: &GraphFile) -> Value {
    match *v {
        CoveringViolation::BadImage { vertex } => json!({
            "kind": "bad_image",
            "vertex": input::vertex_name(cover, vertex),
        }),
        CoveringViolation::KindMismatch { vertex, image } => json!({
            "kind": "kind_mismatch",
            "vertex": input::vertex_name(cover, vertex),
            "image": input::vertex_name(base, image),
        }),
        CoveringViolation::Neighbourhood {
            vertex,
            image,
            base_neighbour,
            expected,
            found,
        } => json!({
            "kind": "neighbourhood",
            "vertex": input::vertex_name(cover, vertex),
            "image": input::vertex_name(base, image),
            "base_neighbour": input::vertex_name(base, base_neighbour),
            "expected": expected,
            "found": found,
        }),
    }
}

fn verdict(mut report: Value, pass: bool) -> u8 {
    report["pass"] = json!(pass);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    if pass {
        0
    } else {
        EXIT_PRECONDITION
    }
}

pub fn verify(check: &Check) -> CliResult<u8> {
    Ok(match check {
        Check::Covering { cover, base, map } => {
            let (cover, base) = (input::graph(cover)?, input::graph(base)?);
            let vertex_map = input::vertex_map(map, &cover, &base)?;
            let report = CoveringMap {
                cover: cover.to_graph(),
                base: base.to_graph(),
                vertex_map,
            }
            .verify();
            let violations: Vec<Value> = report
                .violations
                .iter()
                .map(|v| violation_json(v, &cover, &base))
                .collect();
            verdict(
                json!({
                    "check": "covering",
                    "lift_degree": report.lift_degree,
                    "violations": violations,
                }),
                report.is_covering(),
            )
        }
        Check::Action { graph, action } => {
            let graph = input::graph(graph)?;
            let spec = input::action_spec(action, &graph)?;
            let group = spec.group.clone();
            match spec.build(&graph) {
                Err(e) => verdict(
                    json!({"check": "action", "group": group.name(), "valid": false, "error": e.to_string()}),
                    false,
                ),
                Ok(act) => {
                    let plain = graph.to_graph();
                    let fixed_vertex = act
                        .is_free()
                        .witness
                        .map(|(g, v)| json!({"element": group.label(g), "vertex": input::vertex_name(&graph, v)}));
                    let fixed_edge = act.fixed_edge(&plain).map(|f| {
                        json!({
                            "element": group.label(f.element),
                            "edge": [input::vertex_name(&graph, f.edge.0), input::vertex_name(&graph, f.edge.1)],
                        })
                    });
                    let orbits = QuotientLayout::new(&act, plain.vertex_count()).class_count();
                    let pass = fixed_vertex.is_none() && fixed_edge.is_none();
                    verdict(
                        json!({
                            "check": "action",
                            "group": group.name(),
                            "valid": true,
                            "free": fixed_vertex.is_none(),
                            "fixed_vertex": fixed_vertex,
                            "fixed_edge": fixed_edge,
                            "orbits": orbits,
                        }),
                        pass,
                    )
                }
            }
        }
        Check::Lift { ring } => {
            let m = input::ring_matrix(ring)?;
            let lift = lift_from_ring_matrix(&m);
            let report = lift.covering.verify();
            let base = GraphFile::Tanner(lift.base.clone());
            let cover = GraphFile::Tanner(lift.cover.clone());
            let violations: Vec<Value> = report
                .violations
                .iter()
                .map(|v| violation_json(v, &cover, &base))
                .collect();
            verdict(
                json!({
                    "check": "lift",
                    "group": m.group().name(),
                    "lift_degree": report.lift_degree,
                    "max_multiplicity": lift.max_multiplicity,
                    "covers_simple_base": lift.covers_simple_base(),
                    "violations": violations,
                }),
                report.is_covering(),
            )
        }
        Check::Coincidence { m1, m2 } => {
            let (m1, m2) = (input::ring_matrix(m1)?, input::ring_matrix(m2)?);
            let c = css::lp_bp_coincide(&m1, &m2)?;
            let side = |code: &CssCode| -> Value {
                summary(code)
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect::<Map<_, _>>()
                    .into()
            };
            verdict(
                json!({
                    "check": "coincidence",
                    "lifted": side(&c.lifted),
                    "balanced": side(&c.balanced),
                }),
                c.coincide(),
            )
        }
        Check::Planes { m1, m2 } => {
            let (m1, m2) = (input::ring_matrix(m1)?, input::ring_matrix(m2)?);
            let code = product::lifted_product(&m1, &m2)?;
            if code.layout().kind != LayoutKind::Layered {
                return Err(Failure::precondition(
                    "plane structure needs a layered (3D) lifted-product layout",
                ));
            }
            let report = product::lp_plane_structure(&code, &m1, &m2);
            verdict(
                json!({"check": "planes", "bad_x": report.bad_x, "bad_y": report.bad_y}),
                report.holds(),
            )
        }
    })
}

pub fn search(args: &SearchArgs) -> CliResult<u8> {
    let group = input::group(&args.group)?;
    if args.max_dim == 0 {
        return Err(Failure::parse("--max-dim must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let found = css::search_noncommuting_lp(&group, args.max_dim, args.draws, &mut rng);
    let mut fields = vec![
        ("seed", json!(args.seed)),
        ("group", json!(group.name())),
        ("abelian", json!(group.is_abelian())),
        ("draws", json!(args.draws)),
        ("found", json!(found.is_some())),
    ];
    if let Some(inst) = &found {
        let (t1, t2) = (
            formats::write_ring_matrix(&inst.m1),
            formats::write_ring_matrix(&inst.m2),
        );
        if let Some(dir) = &args.out {
            create_dir(dir)?;
            input::write(&dir.join("m1.ring"), &t1)?;
            input::write(&dir.join("m2.ring"), &t2)?;
        }
        fields.push(("draw", json!(inst.draw)));
        fields.push((
            "anticommuting_pairs",
            json!(css::check_commutation(&inst.code).anticommuting.len()),
        ));
        fields.push(("m1", json!(t1.trim_end())));
        fields.push(("m2", json!(t2.trim_end())));
    }
    if args.json {
        print_report(fields, true);
    } else {
        for (k, v) in fields {
            let v = text_value(&v);
            if v.contains('\n') {
                println!("{k}:\n{v}");
            } else {
                println!("{}: {v}", k.replace('_', " "));
            }
        }
    }
    Ok(0)
}
