//! Batch front door: loads instance descriptions, dispatches to the library
//! operations, and emits structured reports.
//!
//! Exit codes: 0 success, 1 property failure (counterexample emitted),
//! 2 budget exhausted / inconclusive, 3 input error.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value as Json};

use regressia::assignment::{
    from_instance_json, random_table_assignment, to_instance_json, FunctionAssignment, Rule,
};
use regressia::bef::parse_bef;
use regressia::completions::{
    direct_completion_greedy, transfer, uniformize, Tiebreak,
};
use regressia::decreasing::{
    check_end_preserving, check_sharp_decreasing, check_star_decreasing, end_scope_exhaustive,
    insertion_scope_exhaustive, pair_scope_exhaustive,
};
use regressia::dfnl::{df, dfnl_from_bef, rcn, Dfnl};
use regressia::error::Error;
use regressia::order_type::{order_type, ot};
use regressia::orders::StrictOrderSpec;
use regressia::ramsey::{ramsey_homogeneous, SubsetColoring};
use regressia::regressive::regressive_values;
use regressia::regular::{
    is_regressively_regular, search_regular, soi_check, tr_regular_check, RegularSource,
};
use regressia::tuple::{IndexSet, ScalarMap, Tuple, TupleMap, TupleSet, Value};
use regressia::witness::{
    find_witness_04, find_witness_a, threshold_h, SearchBudget, SearchStrategy,
    ThresholdStatement,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "regressia")]
#[command(about = "Finite combinatorics of regressive values: audits, searches, and reports")]
#[command(version)]
struct Cli {
    /// Output format: json | text | csv
    #[arg(long, global = true, default_value = "text")]
    format: String,

    /// Worker cap; operations are pure and currently run sequentially
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long, default_value_t = 100_000)]
    max_candidates: u64,
    /// exhaustive | greedy-ramsey | random-restart
    #[arg(long, default_value = "exhaustive")]
    strategy: String,
    /// Overridden by the REGRESSIA_SEED environment variable
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BudgetArgs {
    fn build(&self) -> Result<SearchBudget, String> {
        let strategy = match self.strategy.as_str() {
            "exhaustive" => SearchStrategy::Exhaustive,
            "greedy-ramsey" => SearchStrategy::GreedyRamsey,
            "random-restart" => SearchStrategy::RandomRestart,
            other => return Err(format!("unknown strategy {other}")),
        };
        let seed = match std::env::var("REGRESSIA_SEED") {
            Ok(s) => s
                .parse()
                .map_err(|_| format!("REGRESSIA_SEED is not a number: {s}"))?,
            Err(_) => self.seed,
        };
        Ok(SearchBudget {
            max_candidates: self.max_candidates,
            strategy,
            seed,
        })
    }
}

#[derive(Subcommand)]
enum Commands {
    /// Count order types in dimension k, cross-checked against the
    /// surjection-sum oracle
    Ot { k: usize },
    /// Canonical order-type code of a tuple (comma-separated coordinates)
    OrderType { tuple: String },
    /// Regressive values of a map over a tuple set
    RegressiveValues {
        /// Built-in instance name (intro)
        #[arg(long)]
        example: Option<String>,
        /// Map file: {"entries": [[[x...],[v...]], ...], "domain": [[x...]]}
        #[arg(long)]
        instance: Option<String>,
    },
    /// Audit sharp / star / end-preservation of an assignment
    CheckAssignment {
        #[arg(long)]
        instance: Option<String>,
        /// identity | min-collapse | dfnl-min-field
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 4)]
        ground_size: u64,
        #[arg(long, default_value_t = 1)]
        arity: usize,
        /// sharp | star | end
        #[arg(long, default_value = "sharp")]
        prop: String,
        /// sup | lex
        #[arg(long, default_value = "sup")]
        o1: String,
        #[arg(long, default_value = "sup")]
        o2: String,
    },
    /// Theorem 3.10 audit over seeded random table assignments
    #[command(name = "audit-3-10")]
    Audit310 {
        #[arg(long, default_value_t = 200)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        ground_size: u64,
        #[arg(long, default_value_t = 1)]
        arity: usize,
    },
    /// Lift an assignment instance one dimension
    LexLift {
        #[arg(long)]
        instance: String,
    },
    /// Homogeneous-subset search for an explicit coloring of k-subsets
    Ramsey {
        /// Coloring file: {"colors": [[[a,b,...], c], ...], "e": [..]}
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: usize,
    },
    /// Theorem 0.4 witness search for a total map over [n]^k
    #[command(name = "search-04")]
    Search04 {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Proposition A witness search over an assignment's ground
    #[command(name = "search-A")]
    SearchA {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Exact micro-scale thresholds for statements 0.3 / 0.4 / I
    #[command(name = "threshold-H")]
    ThresholdH {
        /// 0.3 | 0.4 | I
        #[arg(long)]
        statement: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n_max: u64,
    },
    /// Find a code-uniform E and induce the assignment on [m]
    Uniformize {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        m: usize,
    },
    /// Transfer an order-invariant assignment to the ground [m]^k
    Transfer {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        m: usize,
    },
    /// Greedy direct completion on the assignment's own ground
    Complete {
        #[arg(long)]
        instance: String,
        /// lex-least | lex-greatest
        #[arg(long, default_value = "lex-least")]
        policy: String,
    },
    /// Recursion on the sup norm over a tuple set
    Rcn {
        /// Set file: {"arity": k, "members": [[...], ...]}
        #[arg(long)]
        set: String,
        /// min-field, or omit and pass --bef
        #[arg(long)]
        functional: Option<String>,
        #[arg(long)]
        bef: Option<String>,
    },
    /// Least-j fixpoint of a formula on a closed set
    Df {
        #[arg(long)]
        bef: String,
        #[arg(long)]
        set: String,
    },
    /// Evaluate a formula in a finite partial scalar map
    BefEval {
        #[arg(long)]
        bef: String,
        /// Map file: {"entries": [[[x...], v], ...]}
        #[arg(long)]
        map: String,
        /// Comma-separated argument scalars
        #[arg(long)]
        args: String,
    },
    /// Regressive regularity (or (t, r)-regularity with formulas) over E
    CheckRegular {
        #[arg(long)]
        map: String,
        #[arg(long)]
        e: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: Option<usize>,
        /// File with one formula per line, for the (t, r) check
        #[arg(long)]
        formulas: Option<String>,
        /// Closed carrier set file, required with --formulas
        #[arg(long)]
        set: Option<String>,
    },
    /// Search closed carriers whose recursion output is regressively regular
    SearchRegular {
        #[arg(long)]
        functional: Option<String>,
        #[arg(long)]
        bef: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// (t, r)-SOI check against a supplied formula list
    SoiCheck {
        #[arg(long)]
        map: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        e: String,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        formulas: String,
    },
}

/// 0 ok, 1 property failure, 2 inconclusive/budget, 3 input error.
struct Outcome {
    code: u8,
    report: Json,
}

fn ok(report: Json) -> Result<Outcome, Outcome> {
    Ok(Outcome { code: 0, report })
}

fn fail_property(report: Json) -> Result<Outcome, Outcome> {
    Ok(Outcome { code: 1, report })
}

fn inconclusive(report: Json) -> Result<Outcome, Outcome> {
    Ok(Outcome { code: 2, report })
}

fn input_error(msg: impl std::fmt::Display) -> Outcome {
    Outcome {
        code: 3,
        report: json!({ "error": msg.to_string(), "version": VERSION }),
    }
}

fn lib_error(e: Error) -> Outcome {
    let code = match e {
        Error::Budget { .. } => 2,
        _ => 3,
    };
    Outcome {
        code,
        report: json!({ "error": e.to_string(), "version": VERSION }),
    }
}

fn read_file(path: &str) -> Result<String, Outcome> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{path}: {e}")))
}

fn parse_scalars(text: &str) -> Result<Vec<u64>, Outcome> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| input_error(format!("not a number: {s}")))
        })
        .collect()
}

#[derive(Deserialize)]
struct MapDoc {
    entries: Vec<(Vec<u64>, Json)>,
    #[serde(default)]
    domain: Option<Vec<Vec<u64>>>,
}

fn load_tuple_map(path: &str) -> Result<(TupleMap, Option<TupleSet>), Outcome> {
    let doc: MapDoc =
        serde_json::from_str(&read_file(path)?).map_err(|e| input_error(format!("{path}: {e}")))?;
    let mut map = TupleMap::new();
    let mut arity = None;
    for (key, val) in &doc.entries {
        let value = match val {
            Json::Number(n) => Value::Scalar(
                n.as_u64()
                    .ok_or_else(|| input_error("map values must be naturals"))?,
            ),
            Json::Array(items) => {
                let coords: Result<Vec<u64>, Outcome> = items
                    .iter()
                    .map(|v| {
                        v.as_u64()
                            .ok_or_else(|| input_error("map values must be naturals"))
                    })
                    .collect();
                Value::Vector(Tuple::new(coords?))
            }
            _ => return Err(input_error("map values must be numbers or arrays")),
        };
        arity.get_or_insert(key.len());
        map.insert(Tuple::new(key.clone()), value);
    }
    let domain = match (doc.domain, arity) {
        (Some(d), Some(k)) => Some(
            TupleSet::new(k, d.into_iter().map(Tuple::new)).map_err(lib_error)?,
        ),
        _ => None,
    };
    Ok((map, domain))
}

fn load_scalar_map(path: &str) -> Result<ScalarMap, Outcome> {
    let (map, _) = load_tuple_map(path)?;
    let mut out = ScalarMap::new();
    for (k, v) in map.iter() {
        match v {
            Value::Scalar(s) => {
                out.insert(k.clone(), *s);
            }
            Value::Vector(_) => {
                return Err(input_error("this command needs scalar-valued entries"))
            }
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct SetDoc {
    arity: usize,
    members: Vec<Vec<u64>>,
}

fn load_tuple_set(path: &str) -> Result<TupleSet, Outcome> {
    let doc: SetDoc =
        serde_json::from_str(&read_file(path)?).map_err(|e| input_error(format!("{path}: {e}")))?;
    TupleSet::new(doc.arity, doc.members.into_iter().map(Tuple::new)).map_err(lib_error)
}

fn load_assignment(path: &str) -> Result<FunctionAssignment, Outcome> {
    from_instance_json(&read_file(path)?).map_err(lib_error)
}

fn order_spec(name: &str) -> Result<StrictOrderSpec, Outcome> {
    match name {
        "sup" => Ok(StrictOrderSpec::SupNorm),
        "lex" => Ok(StrictOrderSpec::Lex),
        other => Err(input_error(format!("unknown order {other}; use sup or lex"))),
    }
}

fn intro_example() -> (TupleMap, TupleSet) {
    let powers: std::collections::BTreeSet<u64> = (0..=10).map(|i| 1u64 << i).collect();
    let domain = TupleSet::cartesian_power(&powers, 2);
    let mut map = TupleMap::new();
    for x in domain.iter() {
        let (a, b) = (x.coords()[0], x.coords()[1]);
        let d = a.abs_diff(b);
        map.insert(x.clone(), Value::Scalar(d * d));
    }
    (map, domain)
}

fn run(cli: &Cli) -> Result<Outcome, Outcome> {
    match &cli.command {
        Commands::Ot { k } => {
            let by_enum = ot(*k).map_err(lib_error)?;
            let by_oracle = regressia::order_type::ot_by_surjections(*k);
            if by_enum != by_oracle {
                return fail_property(json!({
                    "statement": "order-type-count",
                    "params": { "k": k },
                    "counterexample": { "enumerated": by_enum, "oracle": by_oracle },
                    "version": VERSION,
                }));
            }
            ok(json!({
                "statement": "order-type-count",
                "params": { "k": k },
                "verdict": by_enum,
                "version": VERSION,
            }))
        }
        Commands::OrderType { tuple } => {
            let coords = parse_scalars(tuple)?;
            let code = order_type(&Tuple::new(coords));
            ok(json!({
                "statement": "order-type-code",
                "params": { "tuple": tuple },
                "verdict": code.0,
                "version": VERSION,
            }))
        }
        Commands::RegressiveValues { example, instance } => {
            let (map, domain) = match (example.as_deref(), instance.as_deref()) {
                (Some("intro"), None) => intro_example(),
                (None, Some(path)) => {
                    let (map, domain) = load_tuple_map(path)?;
                    let domain = domain
                        .ok_or_else(|| input_error("instance file needs a domain field"))?;
                    (map, domain)
                }
                _ => {
                    return Err(input_error(
                        "pass exactly one of --example intro or --instance FILE",
                    ))
                }
            };
            let values = regressive_values(&map, &domain).map_err(lib_error)?;
            let rendered: Vec<Json> = values
                .iter()
                .map(|v| match v {
                    Value::Scalar(s) => json!(s),
                    Value::Vector(t) => json!(t.coords()),
                })
                .collect();
            ok(json!({
                "statement": "regressive-values",
                "params": { "example": example, "instance": instance },
                "verdict": rendered,
                "version": VERSION,
            }))
        }
        Commands::CheckAssignment {
            instance,
            builtin,
            ground_size,
            arity,
            prop,
            o1,
            o2,
        } => {
            let u = match (instance.as_deref(), builtin.as_deref()) {
                (Some(path), None) => load_assignment(path)?,
                (None, Some(name)) => {
                    let vals: std::collections::BTreeSet<u64> = (0..*ground_size).collect();
                    let ground = TupleSet::cartesian_power(&vals, *arity);
                    let rule = match name {
                        "identity" => Rule::Identity,
                        "min-collapse" => Rule::MinCollapse,
                        "dfnl-min-field" => Rule::DfnlDerived(Dfnl::MinField),
                        other => {
                            return Err(input_error(format!("unknown builtin {other}")))
                        }
                    };
                    FunctionAssignment::new(*arity, ground, rule).map_err(lib_error)?
                }
                _ => {
                    return Err(input_error(
                        "pass exactly one of --instance FILE or --builtin NAME",
                    ))
                }
            };
            let o1 = order_spec(o1)?;
            let o2 = order_spec(o2)?;
            let verdict = match prop.as_str() {
                "sharp" => {
                    let scope = insertion_scope_exhaustive(&u.ground).map_err(lib_error)?;
                    check_sharp_decreasing(&u, &o1, &o2, &scope).map_err(lib_error)?
                }
                "star" => {
                    let scope = pair_scope_exhaustive(&u.ground).map_err(lib_error)?;
                    check_star_decreasing(&u, &o1, &o2, &scope).map_err(lib_error)?
                }
                "end" => {
                    let scope = end_scope_exhaustive(&u.ground, &o1).map_err(lib_error)?;
                    check_end_preserving(&u, &o1, &scope).map_err(lib_error)?
                }
                other => return Err(input_error(format!("unknown property {other}"))),
            };
            let report = json!({
                "statement": format!("{prop}-decreasing-audit"),
                "params": { "ground": u.ground.len(), "arity": u.arity },
                "verdict": verdict.holds,
                "counterexample": verdict.counterexample,
                "version": VERSION,
            });
            if verdict.holds {
                ok(report)
            } else {
                fail_property(report)
            }
        }
        Commands::Audit310 {
            count,
            seed,
            ground_size,
            arity,
        } => {
            let seed = match std::env::var("REGRESSIA_SEED") {
                Ok(s) => s.parse().map_err(|_| input_error("bad REGRESSIA_SEED"))?,
                Err(_) => *seed,
            };
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let vals: std::collections::BTreeSet<u64> = (0..*ground_size).collect();
            let ground = TupleSet::cartesian_power(&vals, *arity);
            if ground.len() > 5 {
                return Err(input_error(
                    "audit ground too large; keep ground_size^arity at most 5",
                ));
            }
            let sup = StrictOrderSpec::SupNorm;
            let lex = StrictOrderSpec::Lex;
            let ins = insertion_scope_exhaustive(&ground).map_err(lib_error)?;
            let pairs = pair_scope_exhaustive(&ground).map_err(lib_error)?;
            let ends = end_scope_exhaustive(&ground, &sup).map_err(lib_error)?;
            let mut disagreements = 0u64;
            let mut end_violations = 0u64;
            for _ in 0..*count {
                let u = random_table_assignment(&ground, &mut rng);
                for (o1, o2) in [(&sup, &sup), (&lex, &lex)] {
                    let sharp = check_sharp_decreasing(&u, o1, o2, &ins).map_err(lib_error)?;
                    let star = check_star_decreasing(&u, o1, o2, &pairs).map_err(lib_error)?;
                    if sharp.holds != star.holds {
                        disagreements += 1;
                    }
                    if sharp.holds {
                        let end = check_end_preserving(&u, o1, &ends).map_err(lib_error)?;
                        if !end.holds {
                            end_violations += 1;
                        }
                    }
                }
            }
            let report = json!({
                "statement": "theorem-3.10-audit",
                "params": { "count": count, "ground": ground.len(), "arity": arity },
                "verdict": disagreements == 0 && end_violations == 0,
                "counterexample": if disagreements + end_violations > 0 {
                    Some(json!({ "disagreements": disagreements, "end_violations": end_violations }))
                } else { None },
                "seed": seed,
                "version": VERSION,
            });
            if disagreements == 0 && end_violations == 0 {
                ok(report)
            } else {
                fail_property(report)
            }
        }
        Commands::LexLift { instance } => {
            let u = load_assignment(instance)?;
            let v = regressia::assignment::lex_lift(u).map_err(lib_error)?;
            ok(json!({
                "statement": "lemma-3.13-lift",
                "params": { "instance": instance },
                "verdict": serde_json::from_str::<Json>(&to_instance_json(&v)).unwrap(),
                "version": VERSION,
            }))
        }
        Commands::Ramsey { coloring, k, p } => {
            #[derive(Deserialize)]
            struct ColoringDoc {
                colors: Vec<(Vec<u64>, u64)>,
                e: Vec<u64>,
            }
            let doc: ColoringDoc = serde_json::from_str(&read_file(coloring)?)
                .map_err(|e| input_error(format!("{coloring}: {e}")))?;
            let coloring_map: SubsetColoring = doc.colors.into_iter().collect();
            let e = IndexSet::new(doc.e);
            let out = ramsey_homogeneous(&coloring_map, &e, *k, *p).map_err(lib_error)?;
            let report = json!({
                "statement": "finite-ramsey",
                "params": { "k": k, "p": p, "e": e.elements() },
                "witness": out.subset.as_ref().map(|s| s.elements().to_vec()),
                "explored": if out.exhaustive { "all" } else { "greedy" },
                "version": VERSION,
            });
            if out.subset.is_some() {
                ok(report)
            } else if out.exhaustive {
                fail_property(report)
            } else {
                inconclusive(report)
            }
        }
        Commands::Search04 {
            instance,
            n,
            k,
            p,
            budget,
        } => {
            let (map, _) = load_tuple_map(instance)?;
            let budget = budget.build().map_err(input_error)?;
            let report = find_witness_04(&map, *n, *k, *p, &budget).map_err(lib_error)?;
            let has_witness = report.witness.is_some();
            let rendered = json!({
                "statement": report.statement,
                "params": report.params,
                "witness": report.witness,
                "count": report.count,
                "target": report.target,
                "verified": report.verified,
                "explored": report.explored,
                "seed": report.seed,
                "vacuous": report.vacuous,
                "version": VERSION,
            });
            if has_witness {
                ok(rendered)
            } else {
                inconclusive(rendered)
            }
        }
        Commands::SearchA { instance, p, budget } => {
            let u = load_assignment(instance)?;
            let budget = budget.build().map_err(input_error)?;
            let report = find_witness_a(&u, *p, &budget).map_err(lib_error)?;
            let has_witness = report.witness.is_some();
            let rendered = json!({
                "statement": report.statement,
                "params": report.params,
                "witness": report.witness,
                "count": report.count,
                "target": report.target,
                "verified": report.verified,
                "explored": report.explored,
                "seed": report.seed,
                "vacuous": report.vacuous,
                "version": VERSION,
            });
            if has_witness {
                ok(rendered)
            } else {
                inconclusive(rendered)
            }
        }
        Commands::ThresholdH {
            statement,
            k,
            r,
            p,
            n_max,
        } => {
            let stmt = match statement.as_str() {
                "0.3" => ThresholdStatement::Zero3,
                "0.4" => ThresholdStatement::Zero4,
                "I" => ThresholdStatement::TheoremI,
                other => return Err(input_error(format!("unknown statement {other}"))),
            };
            let report = threshold_h(stmt, *k, *r, *p, *n_max).map_err(lib_error)?;
            ok(json!({
                "statement": format!("threshold-H-{statement}"),
                "params": { "k": k, "r": r, "p": p, "n_max": n_max },
                "verdict": report,
                "version": VERSION,
            }))
        }
        Commands::Uniformize { instance, p, m } => {
            let u = load_assignment(instance)?;
            match uniformize(&u, *p, *m).map_err(lib_error)? {
                Some((e, v)) => ok(json!({
                    "statement": "theorem-4.2-uniformize",
                    "params": { "p": p, "m": m },
                    "witness": {
                        "e": e.elements(),
                        "assignment": serde_json::from_str::<Json>(&to_instance_json(&v)).unwrap(),
                    },
                    "version": VERSION,
                })),
                None => inconclusive(json!({
                    "statement": "theorem-4.2-uniformize",
                    "params": { "p": p, "m": m },
                    "witness": null,
                    "version": VERSION,
                })),
            }
        }
        Commands::Transfer { instance, m } => {
            let u = load_assignment(instance)?;
            match transfer(&u, *m) {
                Ok(v) => ok(json!({
                    "statement": "lemma-4.6-transfer",
                    "params": { "m": m },
                    "verdict": serde_json::from_str::<Json>(&to_instance_json(&v)).unwrap(),
                    "version": VERSION,
                })),
                Err(Error::NotOrderInvariant) => fail_property(json!({
                    "statement": "lemma-4.6-transfer",
                    "params": { "m": m },
                    "counterexample": "assignment is not order invariant",
                    "version": VERSION,
                })),
                Err(e) => Err(lib_error(e)),
            }
        }
        Commands::Complete { instance, policy } => {
            let u = load_assignment(instance)?;
            let policy = match policy.as_str() {
                "lex-least" => Tiebreak::LexLeast,
                "lex-greatest" => Tiebreak::LexGreatest,
                other => return Err(input_error(format!("unknown policy {other}"))),
            };
            match direct_completion_greedy(&u, policy) {
                Ok(endo) => {
                    let graph: Vec<Json> = endo
                        .graph()
                        .iter()
                        .map(|(k, v)| json!([k.coords(), v.coords()]))
                        .collect();
                    ok(json!({
                        "statement": "theorem-4.8-completion",
                        "params": { "ground": u.ground.len() },
                        "verdict": graph,
                        "version": VERSION,
                    }))
                }
                Err(Error::Precondition(msg)) => fail_property(json!({
                    "statement": "theorem-4.8-completion",
                    "counterexample": msg,
                    "version": VERSION,
                })),
                Err(e) => Err(lib_error(e)),
            }
        }
        Commands::Rcn { set, functional, bef } => {
            let a = load_tuple_set(set)?;
            let h = functional_from_args(functional.as_deref(), bef.as_deref())?;
            let f = rcn(&a, &h).map_err(lib_error)?;
            ok(json!({
                "statement": "rcn",
                "params": { "set": set, "size": a.len() },
                "verdict": render_scalar_map(&f),
                "version": VERSION,
            }))
        }
        Commands::Df { bef, set } => {
            let b = parse_bef(bef).map_err(lib_error)?;
            let a = load_tuple_set(set)?;
            let f = df(&b, &a).map_err(lib_error)?;
            ok(json!({
                "statement": "lemma-5.3-df",
                "params": { "bef": bef, "size": a.len() },
                "verdict": render_scalar_map(&f),
                "version": VERSION,
            }))
        }
        Commands::BefEval { bef, map, args } => {
            let b = parse_bef(bef).map_err(lib_error)?;
            let f = load_scalar_map(map)?;
            let argv = parse_scalars(args)?;
            if argv.len() != b.q {
                return Err(input_error(format!(
                    "formula wants {} arguments, got {}",
                    b.q,
                    argv.len()
                )));
            }
            let value = b.eval(&f, &argv);
            ok(json!({
                "statement": "bef-eval",
                "params": { "bef": bef, "args": argv },
                "verdict": value,
                "version": VERSION,
            }))
        }
        Commands::CheckRegular {
            map,
            e,
            k,
            t,
            formulas,
            set,
        } => {
            let e = IndexSet::new(parse_scalars(e)?);
            match (t, formulas) {
                (Some(t), Some(path)) => {
                    let f = load_scalar_map(map)?;
                    let a = match set {
                        Some(s) => load_tuple_set(s)?,
                        None => {
                            return Err(input_error("--formulas needs --set (the closed carrier)"))
                        }
                    };
                    let fs = load_formulas(path)?;
                    let v = tr_regular_check(&f, &a, &e, *t, &fs).map_err(lib_error)?;
                    let report = json!({
                        "statement": "tr-regularity",
                        "params": { "t": t, "r": a.arity(), "formulas": fs.len() },
                        "verdict": v.holds,
                        "counterexample": v.counterexample,
                        "version": VERSION,
                    });
                    if v.holds { ok(report) } else { fail_property(report) }
                }
                (None, None) => {
                    let (f, _) = load_tuple_map(map)?;
                    let v = is_regressively_regular(&f, &e, *k);
                    let report = json!({
                        "statement": "regressive-regularity",
                        "params": { "k": k, "e": e.elements() },
                        "verdict": v.holds,
                        "counterexample": v,
                        "version": VERSION,
                    });
                    if v.holds { ok(report) } else { fail_property(report) }
                }
                _ => Err(input_error("--t and --formulas go together")),
            }
        }
        Commands::SearchRegular {
            functional,
            bef,
            k,
            p,
            budget,
        } => {
            let source = match (functional.as_deref(), bef.as_deref()) {
                (Some("min-field"), None) => RegularSource::Functional(Dfnl::MinField),
                (None, Some(text)) => {
                    RegularSource::Formula(parse_bef(text).map_err(lib_error)?)
                }
                _ => {
                    return Err(input_error(
                        "pass exactly one of --functional min-field or --bef FORMULA",
                    ))
                }
            };
            let budget = budget.build().map_err(input_error)?;
            let report = search_regular(&source, *k, *p, &budget).map_err(lib_error)?;
            let has_witness = report.witness.is_some();
            let rendered = json!({
                "statement": report.statement,
                "params": report.params,
                "witness": report.witness,
                "count": report.count,
                "target": report.target,
                "verified": report.verified,
                "explored": report.explored,
                "seed": report.seed,
                "version": VERSION,
            });
            if has_witness {
                ok(rendered)
            } else {
                inconclusive(rendered)
            }
        }
        Commands::SoiCheck {
            map,
            set,
            e,
            t,
            formulas,
        } => {
            let f = load_scalar_map(map)?;
            let a = load_tuple_set(set)?;
            let e = IndexSet::new(parse_scalars(e)?);
            let fs = load_formulas(formulas)?;
            let v = soi_check(&f, &a, &e, *t, &fs).map_err(lib_error)?;
            let report = json!({
                "statement": "tr-soi",
                "params": { "t": t, "r": a.arity(), "formulas": fs.len() },
                "verdict": v.holds,
                "counterexample": v.counterexample,
                "version": VERSION,
            });
            if v.holds { ok(report) } else { fail_property(report) }
        }
    }
}

fn functional_from_args(name: Option<&str>, bef: Option<&str>) -> Result<Dfnl, Outcome> {
    match (name, bef) {
        (Some("min-field"), None) => Ok(Dfnl::MinField),
        (None, Some(text)) => {
            let b = parse_bef(text).map_err(lib_error)?;
            dfnl_from_bef(b).map_err(lib_error)
        }
        _ => Err(input_error(
            "pass exactly one of --functional min-field or --bef FORMULA",
        )),
    }
}

fn load_formulas(path: &str) -> Result<Vec<regressia::bef::BefFormula>, Outcome> {
    read_file(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_bef(l).map_err(lib_error))
        .collect()
}

fn render_scalar_map(f: &ScalarMap) -> Json {
    let entries: Vec<Json> = f.iter().map(|(k, v)| json!([k.coords(), v])).collect();
    json!(entries)
}

fn emit(outcome: &Outcome, format: &str) {
    match format {
        "json" => println!(
            "{}",
            serde_json::to_string_pretty(&outcome.report).unwrap()
        ),
        "csv" => {
            if let Some(obj) = outcome.report.as_object() {
                let keys: Vec<&String> = obj.keys().collect();
                let header: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
                let row: Vec<String> = keys.iter().map(|k| obj[*k].to_string()).collect();
                println!("{}", header.join(","));
                println!("{}", row.join(","));
            } else {
                println!("{}", outcome.report);
            }
        }
        _ => {
            // text: just the verdict/witness, bare when primitive, set-style
            // braces for value collections
            let obj: &serde_json::Map<String, Json> =
                outcome.report.as_object().expect("reports are objects");
            if let Some(v) = obj.get("verdict") {
                match v {
                    Json::Array(items) => {
                        let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                        println!("{{{}}}", parts.join(", "));
                    }
                    other => println!("{other}"),
                }
            }
            let rest: BTreeMap<&str, &Json> = ["witness", "counterexample", "error"]
                .into_iter()
                .filter_map(|k| obj.get(k).map(|v| (k, v)))
                .filter(|(_, v)| !v.is_null())
                .collect();
            for (k, v) in rest {
                println!("{k}: {v}");
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            };
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(o) => o,
    };
    emit(&outcome, &cli.format);
    ExitCode::from(outcome.code)
}
