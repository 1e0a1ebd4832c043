use std::error::Error as StdError;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dodagx::oracle::{verify_measurement_rule, MAX_VERIFY_VERTICES};
use dodagx::protocols::{dodag_x_traced, x_protocol};
use dodagx::sweep::{
    derive_seed, fixed_k_scan, grid_sweep, presets, small_world_sweep, write_aggregates_csv, write_diffs_csv,
    PartyMode, Sweep, SweepSummary,
};
use dodagx::{
    build_dodag, dodag_x, dodag_x_nparty, generate, repeater_protocol, select_root, Graph, Measurement, PartySet,
    TopologySpec,
};

type CliResult<T> = Result<T, Box<dyn StdError>>;

/// Measurement-based entanglement routing simulator.
#[derive(Parser)]
#[command(name = "dodagx", version)]
struct Cli {
    /// Master seed for generators and sampling.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file, or output directory for `bench` (stdout / `.` when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a topology and print it as graph JSON.
    Gen {
        #[command(subcommand)]
        topology: Topology,
    },
    /// Build the minimum-eccentricity BFS DODAG of a graph.
    Dodag {
        /// Graph JSON file, `-` for stdin.
        #[arg(long, default_value = "-")]
        graph: PathBuf,
        /// Use this root instead of the minimum-eccentricity vertex.
        #[arg(long)]
        root: Option<usize>,
    },
    /// Route between parties and print the outcome JSON.
    Route {
        #[arg(long, default_value = "-")]
        graph: PathBuf,
        #[arg(long, value_enum)]
        protocol: Protocol,
        #[arg(long, value_delimiter = ',', required = true)]
        parties: Vec<usize>,
    },
    /// Run a benchmark sweep and write `<name>_raw.csv`, `<name>_aggregate.csv`
    /// and `<name>_diff.csv`.
    Bench {
        #[command(subcommand)]
        bench: Bench,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Random instances to check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum Topology {
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    /// Watts-Strogatz network; uses the global `--seed`.
    Smallworld {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: f64,
    },
    Star {
        #[arg(long)]
        n: usize,
    },
    Ring {
        #[arg(long)]
        n: usize,
    },
    /// Uniform random tree; uses the global `--seed`.
    Tree {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    DodagX,
    X,
    Repeater,
    Nparty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Oracle,
    Theorems,
}

#[derive(Args)]
struct Sampling {
    /// Sample 5000 triplets per network above 40 vertices instead of
    /// enumerating all of them.
    #[arg(long)]
    sample: bool,
}

impl Sampling {
    fn mode(&self) -> PartyMode {
        if self.sample {
            PartyMode::sampled_triplets(40, 5000)
        } else {
            PartyMode::all_triplets()
        }
    }
}

#[derive(Subcommand)]
enum Bench {
    /// m x l grids, all triplets.
    Grid {
        #[arg(long, default_value_t = 2)]
        min: usize,
        #[arg(long, default_value_t = 9)]
        max: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Small-world (k, p) plane.
    Smallworld {
        #[arg(long, default_value_t = presets::SMALL_WORLD_N)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        ps: Option<Vec<f64>>,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Mean counts against N at fixed k.
    Fixedk {
        #[arg(long, default_value_t = presets::FIXED_K)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_values_t = presets::FIXED_K_NS)]
        ns: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = presets::FIXED_K_PS)]
        ps: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Two-party X-protocol against the repeater protocol.
    Repeater {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Also write the X-protocol (k, p) panels for 2 and 3 parties.
        #[arg(long)]
        panels: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match cli.command {
        Command::Gen { topology } => {
            let spec = match topology {
                Topology::Grid { rows, cols } => TopologySpec::Grid { rows, cols },
                Topology::Smallworld { n, k, p } => TopologySpec::SmallWorld { n, k, p, seed: cli.seed },
                Topology::Star { n } => TopologySpec::Star { n },
                Topology::Ring { n } => TopologySpec::Ring { n },
                Topology::Tree { n } => TopologySpec::RandomTree { n, seed: cli.seed },
            };
            emit(cli.out.as_deref(), &generate(&spec)?.to_json_string())?;
        }
        Command::Dodag { graph, root } => {
            let g = read_graph(&graph)?;
            let root = match root {
                Some(r) => r,
                None => select_root(&g)?,
            };
            emit(cli.out.as_deref(), &build_dodag(&g, root)?.to_json_string())?;
        }
        Command::Route { graph, protocol, parties } => {
            let g = read_graph(&graph)?;
            let set = PartySet::new(parties.clone())?;
            let outcome = match protocol {
                Protocol::DodagX | Protocol::Nparty => {
                    let t = build_dodag(&g, select_root(&g)?)?;
                    if matches!(protocol, Protocol::DodagX) {
                        dodag_x(t.tree_graph(), &t, &set)?
                    } else {
                        dodag_x_nparty(t.tree_graph(), &t, &set)?
                    }
                }
                Protocol::X => x_protocol(&g, &set)?,
                Protocol::Repeater => match parties[..] {
                    [a, b] => repeater_protocol(&g, a, b)?,
                    _ => return Err("the repeater protocol takes exactly two parties".into()),
                },
            };
            emit(cli.out.as_deref(), &outcome.to_json_string())?;
        }
        Command::Bench { bench } => {
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            match bench {
                Bench::Grid { min, max, sampling } => {
                    let sides: Vec<usize> = (min..=max).collect();
                    write_bench(&dir, "grid", &grid_sweep(&sides, &sides, sampling.mode()))?;
                }
                Bench::Smallworld { n, ks, ps, seeds, sampling } => {
                    let ks = ks.unwrap_or_else(presets::small_world_ks);
                    let ps = ps.unwrap_or_else(presets::small_world_ps);
                    let sweep = small_world_sweep(n, &ks, &ps, seeds, cli.seed, sampling.mode());
                    write_bench(&dir, "smallworld", &sweep)?;
                }
                Bench::Fixedk { k, ns, ps, seeds, sampling } => {
                    write_bench(&dir, "fixedk", &fixed_k_scan(k, &ns, &ps, seeds, cli.seed, sampling.mode()))?;
                }
                Bench::Repeater { seeds, panels } => {
                    write_bench(&dir, "repeater", &presets::repeater(seeds, cli.seed))?;
                    if panels {
                        write_bench(&dir, "xpanel_pairs", &presets::x_panel(seeds, cli.seed, PartyMode::Pairs))?;
                        let triplets = presets::x_panel(seeds, cli.seed, PartyMode::all_triplets());
                        write_bench(&dir, "xpanel_triplets", &triplets)?;
                    }
                }
            }
        }
        Command::Verify { suite, samples } => {
            return Ok(match suite {
                Suite::Oracle => verify_oracle(cli.seed, samples)?,
                Suite::Theorems => verify_theorems(cli.seed, samples)?,
            });
        }
    }
    Ok(true)
}

fn read_graph(path: &Path) -> CliResult<Graph> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path)?.read_to_string(&mut text)?;
    }
    Ok(Graph::from_json_str(&text)?)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => writeln!(io::stdout().lock(), "{text}")?,
    }
    Ok(())
}

fn write_bench(dir: &Path, name: &str, sweep: &Sweep) -> CliResult<SweepSummary> {
    let raw = BufWriter::new(File::create(dir.join(format!("{name}_raw.csv")))?);
    let summary = sweep.run_to_csv(raw)?;
    write_aggregates_csv(
        BufWriter::new(File::create(dir.join(format!("{name}_aggregate.csv")))?),
        &summary.aggregates,
    )?;
    if sweep.diff.is_some() {
        write_diffs_csv(BufWriter::new(File::create(dir.join(format!("{name}_diff.csv")))?), &summary.diffs)?;
    }
    eprintln!(
        "{name}: {} runs, {} failed, {} networks skipped",
        summary.runs,
        summary.failures,
        summary.skipped.len()
    );
    Ok(summary)
}

/// Graph on `n` vertices with edges drawn from the bits of a derived seed.
fn seeded_graph(n: usize, seed: u64) -> CliResult<Graph> {
    let mut bits = seed;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if bits & 1 == 1 {
                edges.push((u, v));
            }
            bits >>= 1;
        }
    }
    Ok(Graph::from_edges(n, edges)?)
}

/// Every labelled graph up to 5 vertices, then `samples` random graphs on 6.
fn verify_oracle(seed: u64, samples: usize) -> CliResult<bool> {
    let mut graphs = Vec::new();
    for n in 1..=5usize {
        let pairs = n * (n - 1) / 2;
        for mask in 0..1u64 << pairs {
            graphs.push(seeded_graph(n, mask)?);
        }
    }
    for i in 0..samples {
        graphs.push(seeded_graph(MAX_VERIFY_VERTICES, derive_seed(seed, &[i as u64]))?);
    }
    let (mut checked, mut bad) = (0u64, 0u64);
    for g in &graphs {
        for v in g.active_vertices() {
            let mut ms = vec![Measurement::Z { target: v }];
            ms.extend(g.neighbors(v).map(|w| Measurement::X { target: v, witness: w }));
            for m in ms {
                checked += 1;
                if !verify_measurement_rule(g, &m)? {
                    bad += 1;
                    eprintln!("mismatch: {m:?} on {}", g.to_json_string());
                }
            }
        }
    }
    println!("oracle: {} graphs, {checked} measurements, {bad} mismatches", graphs.len());
    Ok(bad == 0)
}

/// DODAG-X success and equal DODAG-X / X-protocol counts on random trees.
fn verify_theorems(seed: u64, samples: usize) -> CliResult<bool> {
    let (mut runs, mut failed, mut unequal) = (0u64, 0u64, 0u64);
    for i in 0..samples as u64 {
        let n = 3 + (derive_seed(seed, &[i, 0]) % 48) as usize;
        let g = generate(&TopologySpec::RandomTree { n, seed: derive_seed(seed, &[i, 1]) })?;
        let t = build_dodag(&g, select_root(&g)?)?;
        for j in 0..10u64 {
            let h = derive_seed(seed, &[i, 2, j]);
            let (a, b, c) = ((h % n as u64) as usize, (h >> 16) as usize % n, (h >> 32) as usize % n);
            if a == b || b == c || a == c {
                continue;
            }
            runs += 1;
            let parties = PartySet::new(vec![a, b, c])?;
            let (d, _) = dodag_x_traced(t.tree_graph(), &t, &parties)?;
            let x = x_protocol(t.tree_graph(), &parties)?;
            failed += u64::from(!d.success);
            unequal += u64::from(d.total() != x.total());
        }
    }
    println!("theorems: {runs} triplets on {samples} trees, {failed} unsuccessful, {unequal} count mismatches");
    Ok(failed == 0 && unequal == 0)
}
