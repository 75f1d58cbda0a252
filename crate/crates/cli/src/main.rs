use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use antimagic::generators::{complete_bipartite, layered, random_min_degree, tiny_enumerate};
use antimagic::graph::BipartiteGraph;
use antimagic::io::{
    labeling_json, parse_edge_list, parse_labeling, to_dot, write_edge_list, write_labeling,
};
use antimagic::oracle::antimagic_witness_with_cap;
use antimagic::pipeline::{label_graph, Options, PipelineError};
use antimagic::verify::{structural_report, verify};

#[derive(Parser)]
#[command(
    name = "antimagic",
    version,
    about = "Antimagic labelings of bipartite graphs with minimum degree at least 15"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Label a graph (or every .bip file in a directory) and verify the result.
    Label(LabelArgs),
    /// Check a labeling against a graph.
    Verify {
        graph: PathBuf,
        labeling: PathBuf,
        /// Print the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write a graph in the edge-list format.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Decide antimagicness of a tiny graph by exhaustive search.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = antimagic::oracle::DEFAULT_CAP)]
        cap: usize,
    },
    /// Label K15,15 end to end and print the residue report.
    Demo,
    /// Export a graph, optionally with labels, as Graphviz DOT.
    Dot {
        graph: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

#[derive(Args)]
struct LabelArgs {
    input: PathBuf,
    #[arg(long, env = "ANTIMAGIC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_retries: usize,
    /// Labeling output file; for a directory input, the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the labeling as JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Print the decomposition plan and label table as JSON on stderr.
    #[arg(long)]
    dump_plan: bool,
    /// Worker threads for directory inputs.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum GenKind {
    Complete {
        a: usize,
        b: usize,
    },
    Random {
        n_a: usize,
        n_b: usize,
        #[arg(long, default_value_t = 15)]
        delta: usize,
        #[arg(long, default_value_t = 0.0)]
        extra: f64,
        #[arg(long, env = "ANTIMAGIC_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Every connected bipartite graph up to isomorphism, one file per graph in `--out`.
    Tiny {
        #[arg(long)]
        max_edges: usize,
    },
    /// Graphs with a nonempty graph inside the cover side.
    Layered {
        a1: usize,
        a2: usize,
        b1: usize,
        b2: usize,
        #[arg(long, default_value_t = 0)]
        hermits: usize,
        #[arg(long, default_value_t = 15)]
        delta: usize,
        #[arg(long, default_value_t = 0.2)]
        p_inner: f64,
        #[arg(long, default_value_t = 0.1)]
        p_cross: f64,
        #[arg(long, env = "ANTIMAGIC_SEED", default_value_t = 0)]
        seed: u64,
    },
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct Contract(String);

impl std::fmt::Display for Contract {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Contract {}

fn contract(msg: impl Into<String>) -> anyhow::Error {
    Contract(msg.into()).into()
}

fn read_graph(path: &Path) -> Result<BipartiteGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_edge_list(&text).map_err(|e| contract(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Labeled {
    text: String,
    antimagic: bool,
    retries: usize,
}

fn label_one(g: &BipartiteGraph, args: &LabelArgs) -> Result<Labeled> {
    let opts = Options {
        seed: args.seed,
        max_retries: args.max_retries,
    };
    let outcome = label_graph(g, opts).map_err(|e| match e {
        PipelineError::MinDegree(_) => contract(e.to_string()),
        other => anyhow::Error::new(other),
    })?;
    if args.dump_plan {
        let dump = serde_json::json!({
            "plan": outcome.plan,
            "partition": outcome.assembly.partition,
            "trace": outcome.assembly.trace,
            "failures": outcome.failures,
        });
        eprintln!("{}", serde_json::to_string_pretty(&dump)?);
    }
    let labels = outcome.labels();
    let text = if args.json {
        labeling_json(g, labels, &outcome.verdict)
    } else {
        write_labeling(g, labels)
    };
    Ok(Labeled {
        text,
        antimagic: outcome.verdict.antimagic,
        retries: outcome.failures.len(),
    })
}

fn cmd_label(args: &LabelArgs) -> Result<ExitCode> {
    if args.input.is_dir() {
        return cmd_label_dir(args);
    }
    let g = read_graph(&args.input)?;
    let done = label_one(&g, args)?;
    emit(args.out.as_deref(), &done.text)?;
    let line = format!("antimagic: {} (retries: {})", done.antimagic, done.retries);
    if args.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(if done.antimagic {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_label_dir(args: &LabelArgs) -> Result<ExitCode> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.input)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bip"))
        .collect();
    files.sort();
    let out_dir = args.out.clone().unwrap_or_else(|| args.input.clone());
    fs::create_dir_all(&out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()?;
    let results: Vec<(PathBuf, Result<bool>)> = pool.install(|| {
        files
            .par_iter()
            .map(|p| {
                let r = read_graph(p)
                    .and_then(|g| label_one(&g, args))
                    .and_then(|done| {
                        let ext = if args.json { "json" } else { "labels" };
                        let name = p.with_extension(ext);
                        let target = out_dir.join(name.file_name().expect("file has a name"));
                        fs::write(&target, &done.text)?;
                        Ok(done.antimagic)
                    });
                (p.clone(), r)
            })
            .collect()
    });
    let mut code = 0u8;
    for (p, r) in results {
        match r {
            Ok(ok) => {
                println!("{}: antimagic: {ok}", p.display());
                if !ok {
                    code = code.max(1);
                }
            }
            Err(e) => {
                println!("{}: error: {e}", p.display());
                code = 2;
            }
        }
    }
    Ok(ExitCode::from(code))
}

fn cmd_verify(graph: &Path, labeling: &Path, json: bool) -> Result<ExitCode> {
    let g = read_graph(graph)?;
    let text =
        fs::read_to_string(labeling).with_context(|| format!("reading {}", labeling.display()))?;
    let labels =
        parse_labeling(&text, &g).map_err(|e| contract(format!("{}: {e}", labeling.display())))?;
    let v = verify(&g, &labels);
    if json {
        println!("{}", serde_json::to_string_pretty(&v)?);
    }
    if !v.is_bijection {
        return Err(contract("not a bijection onto [m]"));
    }
    println!("antimagic: {}", v.antimagic);
    for (u, w, s) in v.collisions.iter().take(10) {
        println!("collision: vertices {u} and {w} both sum to {s}");
    }
    Ok(if v.antimagic {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_gen(kind: &GenKind, out: Option<&Path>) -> Result<ExitCode> {
    let g = match *kind {
        GenKind::Complete { a, b } => complete_bipartite(a, b),
        GenKind::Random {
            n_a,
            n_b,
            delta,
            extra,
            seed,
        } => {
            random_min_degree(n_a, n_b, delta, extra, seed).map_err(|e| contract(e.to_string()))?
        }
        GenKind::Layered {
            a1,
            a2,
            b1,
            b2,
            hermits,
            delta,
            p_inner,
            p_cross,
            seed,
        } => layered(a1, a2, b1, b2, hermits, delta, p_inner, p_cross, seed)
            .map_err(|e| contract(e.to_string()))?,
        GenKind::Tiny { max_edges } => {
            let dir = out.ok_or_else(|| contract("gen tiny needs --out <dir>"))?;
            let all = tiny_enumerate(max_edges).map_err(|e| contract(e.to_string()))?;
            fs::create_dir_all(dir)?;
            for (i, g) in all.iter().enumerate() {
                fs::write(dir.join(format!("tiny_{i:04}.bip")), write_edge_list(g))?;
            }
            println!("{} graphs", all.len());
            return Ok(ExitCode::SUCCESS);
        }
    };
    emit(out, &write_edge_list(&g))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(input: &Path, cap: usize) -> Result<ExitCode> {
    let g = read_graph(input)?;
    let w = antimagic_witness_with_cap(&g, cap).map_err(|e| contract(e.to_string()))?;
    println!("antimagic: {}", w.is_some());
    if let Some(labels) = w {
        print!("{}", write_labeling(&g, &labels));
        return Ok(ExitCode::SUCCESS);
    }
    Ok(ExitCode::from(1))
}

fn cmd_demo() -> Result<ExitCode> {
    let g = complete_bipartite(15, 15);
    let outcome = label_graph(&g, Options::default())?;
    let c = &outcome.plan.counts;
    println!(
        "K15,15: m = {}, n_X = {}, n_Y = {}, |E4| = {}",
        c.m, c.n_x, c.n_y, c.m11
    );
    let p = &outcome.assembly.partition;
    println!(
        "theta1 = {}, theta2 = {}, alpha = {}, p4 = {}",
        p.theta1, p.theta2, p.alpha, p.p4
    );
    let rep = structural_report(&g, outcome.labels(), &outcome.plan);
    println!(
        "X vertices with sum = 0 mod 3: {}",
        rep.x_zero_residue.len()
    );
    println!(
        "Y vertices with sum != 0 mod 3: {}",
        rep.y_nonzero_residue.len()
    );
    println!("pool audit issues: {}", rep.pool_audit.len());
    let mut hist = [0usize; 3];
    for r in &outcome.verdict.residue_report {
        hist[*r as usize] += 1;
    }
    println!(
        "vertex sums by residue: 0 -> {}, 1 -> {}, 2 -> {}",
        hist[0], hist[1], hist[2]
    );
    println!("antimagic: {}", outcome.verdict.antimagic);
    Ok(if outcome.verdict.antimagic {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_dot(graph: &Path, labels: Option<&Path>) -> Result<ExitCode> {
    let g = read_graph(graph)?;
    let labels = match labels {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            Some(parse_labeling(&text, &g).map_err(|e| contract(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    print!("{}", to_dot(&g, labels.as_deref()));
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Label(args) => cmd_label(args),
        Cmd::Verify {
            graph,
            labeling,
            json,
        } => cmd_verify(graph, labeling, *json),
        Cmd::Gen { kind, out } => cmd_gen(kind, out.as_deref()),
        Cmd::Oracle { input, cap } => cmd_oracle(input, *cap),
        Cmd::Demo => cmd_demo(),
        Cmd::Dot { graph, labels } => cmd_dot(graph, labels.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Contract>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
