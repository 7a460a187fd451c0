//! Command-line front end: decompose graphs, verify the per-tree
//! inequalities, generate the extremal families, run the scans, and check
//! the lemma suites. All reports are JSON on stdout; timing goes to
//! stderr so identical inputs and seeds give byte-identical output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand};
use septree_core::abstract_tree::{
    check_branch_count_inequality, check_branching_error_bound, AbstractSepTree,
};
use septree_core::extremal::{
    g_edge_formula, gen_g, gen_glued_h, gen_gstar_glued, gen_h, gen_mader, gstar_edge_formula,
    h_edge_formula, mader_edge_formula,
};
use septree_core::graph::Graph;
use septree_core::molecules::{
    check_compensation, check_compensation_grid, check_composition, check_molecule_removal,
    check_reach_sum, verify_section6, MoleculeReport, Reach,
};
use septree_core::oracle::{scan_bound, scan_theorem_main, search_edge_maximum, ScanMode};
use septree_core::septree::{BuildOutcome, SeparatorTree};
use septree_core::{instances, rat_int, Error};

const EXIT_VIOLATION: u8 = 1;
const EXIT_WITNESS: u8 = 2;
const EXIT_MALFORMED: u8 = 64;
const EXIT_BUDGET: u8 = 65;

#[derive(Parser)]
#[command(name = "septree", version, about = "Separator-tree decomposition toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a separator-tree of the graph, or report a (k+1)-connected
    /// subgraph on more than 2k vertices when one blocks the decomposition
    /// (exit code 2).
    Decompose {
        /// Graph file: "n m" header, then one "u v" line per edge.
        graph_file: PathBuf,
        #[arg(long)]
        k: usize,
        /// Also write the JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Decompose the graph and check the edge-count identity, defect
    /// subadditivity, framework domination, the per-part framework bound,
    /// and the main edge bound. Exits 1 naming the first failing check.
    Verify {
        graph_file: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Print an extremal family member as an edge list followed by a
    /// provenance record.
    Gen {
        /// One of G, Gstar, mader, H, Hglued.
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: usize,
        /// Doubling steps, for G and H.
        #[arg(long)]
        i: Option<u32>,
        /// Clique count, for mader.
        #[arg(long)]
        t: Option<usize>,
        /// Glued copies, for Gstar and Hglued.
        #[arg(long)]
        copies: Option<usize>,
    },
    /// Scan graphs on n labeled vertices and report counterexample counts
    /// or measured edge maxima.
    #[command(group(ArgGroup::new("what").required(true).args(["theorem", "bound", "max"])))]
    #[command(group(ArgGroup::new("how").args(["exhaustive", "random"])))]
    Scan {
        /// Every qualifying graph contains a big highly connected subgraph.
        #[arg(long)]
        theorem: bool,
        /// Decomposable graphs obey the main edge bound.
        #[arg(long)]
        bound: bool,
        /// Measured edge maximum among decomposable graphs (reported, never
        /// asserted).
        #[arg(long)]
        max: bool,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// All 2^C(n,2) labeled graphs (the default).
        #[arg(long)]
        exhaustive: bool,
        /// Seeded G(n, p) samples over the probability sweep.
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Check a lemma suite: the grid inequalities or the molecule
    /// structure statements on seeded instances.
    Lemmas {
        /// One of calc1, calci, compensation, section6.
        #[arg(long)]
        suite: String,
        /// Grid size for calc1 (default 100), calci (200), compensation
        /// (1000).
        #[arg(long)]
        grid_max: Option<u64>,
        /// Instance seed for section6.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_MALFORMED);
        }
    };
    let start = Instant::now();
    let code = match run(cli) {
        Ok(code) => code,
        Err(Fail { code, message }) => {
            eprintln!("{message}");
            code
        }
    };
    eprintln!("elapsed_ms {}", start.elapsed().as_millis());
    ExitCode::from(code)
}

struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn malformed(message: impl Into<String>) -> Fail {
        Fail { code: EXIT_MALFORMED, message: message.into() }
    }

    fn violation(check: &str) -> Fail {
        Fail { code: EXIT_VIOLATION, message: format!("violation: {check}") }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let code = match e {
            Error::Budget(_) => EXIT_BUDGET,
            Error::CheckFailed(_) | Error::UndefinedEdgeNumber { .. } => EXIT_VIOLATION,
            _ => EXIT_MALFORMED,
        };
        Fail { code, message: e.to_string() }
    }
}

fn run(cli: Cli) -> Result<u8, Fail> {
    match cli.cmd {
        Cmd::Decompose { graph_file, k, json } => decompose(&graph_file, k, json.as_deref()),
        Cmd::Verify { graph_file, k } => verify(&graph_file, k),
        Cmd::Gen { family, k, i, t, copies } => gen(&family, k, i, t, copies),
        Cmd::Scan { theorem, bound, max, k, n, random, seed, trials, .. } => {
            scan(theorem, bound, max, k, n, random, seed, trials)
        }
        Cmd::Lemmas { suite, grid_max, seed } => lemmas(&suite, grid_max, seed),
    }
}

fn read_graph(path: &std::path::Path) -> Result<Graph, Fail> {
    let text = fs::read_to_string(path)
        .map_err(|e| Fail::malformed(format!("cannot read {}: {e}", path.display())))?;
    Ok(Graph::parse_edge_list(&text)?)
}

fn emit(json: &str, also: Option<&std::path::Path>) -> Result<(), Fail> {
    println!("{json}");
    if let Some(path) = also {
        fs::write(path, format!("{json}\n"))
            .map_err(|e| Fail::malformed(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn witness_json(k: usize, vertices: &std::collections::BTreeSet<usize>) -> String {
    serde_json::json!({
        "outcome": "witness",
        "k": k,
        "vertices": vertices.iter().collect::<Vec<_>>(),
    })
    .to_string()
}

fn decompose(path: &std::path::Path, k: usize, json: Option<&std::path::Path>) -> Result<u8, Fail> {
    let g = read_graph(path)?;
    match SeparatorTree::build(&g, k) {
        BuildOutcome::Tree(t) => {
            emit(&t.to_json(), json)?;
            Ok(0)
        }
        BuildOutcome::Found(w) => {
            emit(&witness_json(k, &w), json)?;
            Ok(EXIT_WITNESS)
        }
    }
}

fn verify(path: &std::path::Path, k: usize) -> Result<u8, Fail> {
    let g = read_graph(path)?;
    let t = match SeparatorTree::build(&g, k) {
        BuildOutcome::Tree(t) => t,
        BuildOutcome::Found(w) => {
            println!("{}", witness_json(k, &w));
            return Ok(EXIT_WITNESS);
        }
    };
    let val = t.assign_valuation();
    let framework = t.associated_framework(&val);
    let main_bound = if (g.n() as u64) < 2 * k as u64 {
        None
    } else {
        Some(AbstractSepTree::from_separator_tree(&t).check_main_bound()?)
    };
    let checks = [
        ("edge-count-identity", Some(t.check_edge_count_identity())),
        (
            "defect-subadditivity",
            Some((0..t.part_count()).all(|p| t.is_atom(p) || t.check_alpha_inequality(&val, p))),
        ),
        (
            "framework-domination",
            Some(t.check_framework_valid(&val, &framework).is_ok()),
        ),
        (
            "framework-bound",
            Some(t.check_framework_bound(&val, &framework)?.iter().all(|&ok| ok)),
        ),
        ("main-bound", main_bound),
    ];
    let report = serde_json::json!({
        "k": k,
        "n": g.n(),
        "e": g.m(),
        "checks": checks
            .iter()
            .map(|(name, verdict)| {
                serde_json::json!({
                    "name": name,
                    "verdict": match verdict {
                        None => "skipped",
                        Some(true) => "pass",
                        Some(false) => "fail",
                    },
                })
            })
            .collect::<Vec<_>>(),
    });
    println!("{report}");
    match checks.iter().find(|(_, v)| *v == Some(false)) {
        Some((name, _)) => Err(Fail::violation(name)),
        None => Ok(0),
    }
}

fn reject_params(family: &str, wrong: &[(&str, bool)]) -> Result<(), Fail> {
    for (flag, given) in wrong {
        if *given {
            return Err(Fail::malformed(format!("family {family} does not take --{flag}")));
        }
    }
    Ok(())
}

fn gen(
    family: &str,
    k: usize,
    i: Option<u32>,
    t: Option<usize>,
    copies: Option<usize>,
) -> Result<u8, Fail> {
    let (g, param, formula) = match family {
        "G" => {
            reject_params(family, &[("t", t.is_some()), ("copies", copies.is_some())])?;
            let i = i.unwrap_or(0);
            (gen_g(k, i)?, ("i", i as u64), g_edge_formula(k as u64, i).to_string())
        }
        "Gstar" => {
            reject_params(family, &[("i", i.is_some()), ("t", t.is_some())])?;
            let copies = copies.unwrap_or(1);
            (
                gen_gstar_glued(k, copies)?,
                ("copies", copies as u64),
                gstar_edge_formula(k as u64, copies as u64).to_string(),
            )
        }
        "mader" => {
            reject_params(family, &[("i", i.is_some()), ("copies", copies.is_some())])?;
            let t = t.unwrap_or(1);
            if k == 0 || t == 0 {
                return Err(Fail::malformed("mader needs k >= 1 and --t >= 1"));
            }
            (
                gen_mader(k, t),
                ("t", t as u64),
                mader_edge_formula(k as u64, t as u64).to_string(),
            )
        }
        "H" => {
            reject_params(family, &[("t", t.is_some()), ("copies", copies.is_some())])?;
            let i = i.unwrap_or(0);
            (gen_h(k, i)?, ("i", i as u64), h_edge_formula(k as u64, i).to_string())
        }
        "Hglued" => {
            reject_params(family, &[("i", i.is_some()), ("t", t.is_some())])?;
            let copies = copies.unwrap_or(1);
            let g = gen_glued_h(k, copies)?;
            let top = h_edge_formula(k as u64, k.trailing_zeros());
            (
                g,
                ("copies", copies as u64),
                (rat_int(copies as i64) * top).to_string(),
            )
        }
        other => return Err(Fail::malformed(format!("unknown family {other}"))),
    };
    print!("{}", g.to_edge_list_string());
    let provenance = serde_json::json!({
        "family": family,
        "k": k,
        param.0: param.1,
        "n": g.n(),
        "e": g.m(),
        "formula_e": formula,
    });
    println!("{provenance}");
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn scan(
    theorem: bool,
    bound: bool,
    max: bool,
    k: usize,
    n: usize,
    random: bool,
    seed: u64,
    trials: u64,
) -> Result<u8, Fail> {
    let mode = if random {
        ScanMode::Random { seed, trials }
    } else {
        ScanMode::Exhaustive
    };
    let report = if theorem {
        scan_theorem_main(k, n, &mode)?
    } else if bound {
        scan_bound(k, n, &mode)?
    } else {
        debug_assert!(max);
        if random {
            return Err(Fail::malformed("--max searches exhaustively; drop --random"));
        }
        search_edge_maximum(k, n)?
    };
    println!("{}", report.to_json());
    if !max && report.counterexamples > 0 {
        return Err(Fail::violation(if theorem { "main-theorem" } else { "main-bound" }));
    }
    Ok(0)
}

/// The named molecule-structure checks aggregated over seeded saturated
/// trees, in report order.
fn section6_sweep(seed: u64, count: usize) -> Vec<(&'static str, bool)> {
    let mut rng = instances::rng(seed);
    let mut names: Vec<&'static str> = Vec::new();
    let mut holds: Vec<bool> = Vec::new();
    for i in 0..count {
        let k = [4, 6, 7, 9, 10][i % 5];
        let normals = 1 + (i * 7) % 12;
        let tinies = (i * 3) % 9;
        let t = instances::random_saturated_tree(&mut rng, k, normals, tinies);
        let report = MoleculeReport::compute(&t);
        let mut verdicts = verify_section6(&t, &report);
        let mut reach_ok = true;
        let mut removal_ok = true;
        for (m, molecule) in report.molecules.iter().enumerate() {
            if matches!(molecule.reach, Reach::Finite(_)) {
                reach_ok &= check_reach_sum(&t, &report, m).unwrap_or(false);
            }
            removal_ok &= check_molecule_removal(&t, molecule).unwrap_or(false);
        }
        verdicts.push(("reach-sum", reach_ok));
        verdicts.push(("molecule-removal", removal_ok));
        verdicts.push(("compensation", check_compensation(&t).unwrap_or(false)));
        verdicts.push(("composition", check_composition(&t).unwrap_or(false)));
        if names.is_empty() {
            names = verdicts.iter().map(|&(name, _)| name).collect();
            holds = vec![true; names.len()];
        }
        for (j, (_, ok)) in verdicts.iter().enumerate() {
            holds[j] &= ok;
        }
    }
    names.into_iter().zip(holds).collect()
}

fn lemmas(suite: &str, grid_max: Option<u64>, seed: u64) -> Result<u8, Fail> {
    let grid = |default| grid_max.unwrap_or(default);
    let (report, failing) = match suite {
        "calc1" => {
            let m = grid(100);
            let holds = check_branch_count_inequality(m);
            (
                serde_json::json!({"suite": suite, "grid_max": m, "holds": holds}),
                (!holds).then_some("branch-count-inequality".to_string()),
            )
        }
        "calci" => {
            let m = grid(200);
            let holds = check_branching_error_bound(m);
            (
                serde_json::json!({"suite": suite, "grid_max": m, "holds": holds}),
                (!holds).then_some("branching-error-bound".to_string()),
            )
        }
        "compensation" => {
            let m = grid(1000);
            let holds = check_compensation_grid(m);
            (
                serde_json::json!({"suite": suite, "grid_max": m, "holds": holds}),
                (!holds).then_some("compensation-grid".to_string()),
            )
        }
        "section6" => {
            if grid_max.is_some() {
                return Err(Fail::malformed("section6 takes --seed, not --grid-max"));
            }
            let count = 100;
            let verdicts = section6_sweep(seed, count);
            let failing = verdicts.iter().find(|(_, ok)| !ok).map(|(n, _)| n.to_string());
            (
                serde_json::json!({
                    "suite": suite,
                    "seed": seed,
                    "instances": count,
                    "checks": verdicts
                        .iter()
                        .map(|(name, ok)| serde_json::json!({"name": name, "holds": ok}))
                        .collect::<Vec<_>>(),
                    "all_hold": failing.is_none(),
                }),
                failing,
            )
        }
        other => return Err(Fail::malformed(format!("unknown suite {other}"))),
    };
    println!("{report}");
    match failing {
        Some(name) => Err(Fail::violation(&name)),
        None => Ok(0),
    }
}
