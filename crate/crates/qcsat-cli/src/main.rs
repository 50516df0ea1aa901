//! Command-line surface for the qcsat library.
//!
//! Exit codes: 0 success, 1 validation error, 2 resource limit, 3 internal
//! invariant violation. All randomness flows from `--seed`, and structured
//! (`--format records`) reports are byte-identical for identical inputs,
//! flags and seed, independent of `--threads`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcsat::circuit::{
    cutwidth_of_ordering, gen_3sat_verifier, gen_random_circuit, parse_circuit, print_circuit,
    random_3cnf, validate_circuit, CnfFormula, Structure,
};
use qcsat::error::ErrorKind;
use qcsat::exactsim::acceptance_probability;
use qcsat::graphs::parse_graph;
use qcsat::network::{
    build_good_contraction_tree, network_of_graph, print_contraction_tree, AbstractNetwork,
};
use qcsat::oracle::{brute_force_max, DEFAULT_ASSIGNMENT_CAP, DEFAULT_WIRE_CAP};
use qcsat::satsolve::{
    solve_classical_assignment, SolveConfig, SolveMode, DEFAULT_EPSILON_FLOOR,
    DEFAULT_MAX_SET_SIZE,
};
use qcsat::Error;

#[derive(Parser)]
#[command(
    name = "qcsat",
    version,
    about = "Classical-assignment maximization for small-treewidth quantum circuits"
)]
struct Cli {
    /// Worker threads for data-parallel loops (0 = library default).
    /// Outputs do not depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Records,
}

#[derive(Args)]
struct ReportArgs {
    /// Report format: human-readable or line-delimited key-value records.
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write the primary artifact (tree dump, generated circuit) here
    /// instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a circuit or graph file.
    Validate { path: PathBuf },
    /// Build a contraction tree and report rank/height/width statistics.
    Decompose {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Exact acceptance probability of a fully initialized circuit.
    Simulate {
        path: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Find a near-optimal classical assignment for the open inputs.
    Satisfy {
        path: PathBuf,
        /// Target accuracy; derives the grid parameter from the tree.
        #[arg(long, conflicts_with = "epsilon")]
        delta: Option<f64>,
        /// Fixed grid parameter; the certified bound is reported.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-node cap on DP set sizes.
        #[arg(long, default_value_t = DEFAULT_MAX_SET_SIZE)]
        max_set_size: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Brute-force the optimal assignment (capped; correctness instrument).
    Oracle {
        path: PathBuf,
        /// Cap on enumerated assignments.
        #[arg(long, default_value_t = DEFAULT_ASSIGNMENT_CAP)]
        oracle_cap: usize,
        /// Cap on simultaneously live wires.
        #[arg(long, default_value_t = DEFAULT_WIRE_CAP)]
        wire_cap: usize,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Generate benchmark circuits.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random connected circuit with structured wiring.
    Circuit {
        #[arg(long, default_value_t = 3)]
        inputs: usize,
        #[arg(long, default_value_t = 5)]
        gates: usize,
        #[arg(long, default_value = "path")]
        structure: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// How many inputs to leave uninitialized.
        #[arg(long, default_value_t = 0)]
        open: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Probabilistic 3-SAT verifier circuit.
    Verifier {
        /// Read the formula from a DIMACS file instead of generating one.
        #[arg(long)]
        dimacs: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = 4)]
        clauses: usize,
        /// Plant a satisfying assignment in the generated formula.
        #[arg(long, default_value_t = false)]
        satisfiable: bool,
        /// Majority-vote amplification copies (0 = none).
        #[arg(long, default_value_t = 0)]
        amplify: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report the cutwidth of the emitted vertex ordering.
        #[arg(long, default_value_t = false)]
        cutwidth: bool,
        #[command(flatten)]
        report: ReportArgs,
    },
}

/// Key-value report that renders either as prose or as records.
struct Report {
    command: &'static str,
    lines: Vec<(String, String)>,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Report {
            command,
            lines: Vec::new(),
        }
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Records => {
                out.push_str("qcsat-records v1\n");
                out.push_str(&format!("command {}\n", self.command));
                for (k, v) in &self.lines {
                    out.push_str(&format!("{k} {v}\n"));
                }
            }
            Format::Human => {
                out.push_str(&format!("qcsat {}\n", self.command));
                for (k, v) in &self.lines {
                    out.push_str(&format!("  {k}: {v}\n"));
                }
            }
        }
        out
    }
}

fn read_file(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))
}

fn write_artifact(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

/// Loads the network of either a circuit file or a graph file.
fn load_network(path: &PathBuf) -> Result<(AbstractNetwork, &'static str), Error> {
    let text = read_file(path)?;
    let first = text.lines().next().unwrap_or_default();
    if first.starts_with("d-circuit") {
        let c = parse_circuit(&text)?;
        validate_circuit(&c)?;
        let feas = qcsat::circuit::to_feasibility_network(&c)?;
        Ok((feas.network, "circuit"))
    } else if first.starts_with("d-graph") {
        let g = parse_graph(&text)?;
        Ok((network_of_graph(&g)?, "graph"))
    } else {
        Err(Error::validation(
            "unrecognized input (expected a d-circuit or d-graph header)",
        ))
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate { path } => {
            let text = read_file(&path)?;
            let first = text.lines().next().unwrap_or_default();
            if first.starts_with("d-circuit") {
                let c = parse_circuit(&text)?;
                validate_circuit(&c)?;
                println!(
                    "ok: valid circuit ({} vertices, {} edges)",
                    c.vertices.len(),
                    c.edges.len()
                );
            } else if first.starts_with("d-graph") {
                let g = parse_graph(&text)?;
                println!(
                    "ok: valid graph ({} vertices, {} edges)",
                    g.vertex_count(),
                    g.edge_count()
                );
            } else {
                return Err(Error::validation(
                    "unrecognized input (expected a d-circuit or d-graph header)",
                ));
            }
            Ok(())
        }
        Command::Decompose { path, seed, report } => {
            let (network, kind) = load_network(&path)?;
            let good = build_good_contraction_tree(&network, seed)?;
            let mut r = Report::new("decompose");
            r.push("input", path.display());
            r.push("input-kind", kind);
            r.push("seed", seed);
            r.push("sets", network.size());
            r.push("rank", good.rank);
            r.push("height", good.height);
            r.push("carving-width", good.carving_width);
            r.push("td-width", good.td_width);
            r.push("tree-nodes", good.tree.node_count());
            print!("{}", r.render(report.format));
            write_artifact(&report.out, &print_contraction_tree(&good.tree))?;
            Ok(())
        }
        Command::Simulate { path, report } => {
            let c = parse_circuit(&read_file(&path)?)?;
            let value = acceptance_probability(&c)?;
            let mut r = Report::new("simulate");
            r.push("input", path.display());
            r.push("d", c.d);
            r.push("value", value);
            print!("{}", r.render(report.format));
            Ok(())
        }
        Command::Satisfy {
            path,
            delta,
            epsilon,
            seed,
            max_set_size,
            report,
        } => {
            let c = parse_circuit(&read_file(&path)?)?;
            let mode = match (delta, epsilon) {
                (Some(d), None) => SolveMode::TargetDelta(d),
                (None, Some(e)) => SolveMode::FixedEpsilon(e),
                _ => {
                    return Err(Error::validation(
                        "satisfy needs exactly one of --delta or --epsilon",
                    ))
                }
            };
            let started = std::time::Instant::now();
            let config = SolveConfig {
                mode,
                seed,
                max_set_size,
                epsilon_floor: DEFAULT_EPSILON_FLOOR,
            };
            let solved = solve_classical_assignment(&c, &config)?;
            let mut r = Report::new("satisfy");
            r.push("input", path.display());
            r.push("seed", seed);
            r.push("d", solved.d);
            r.push("open-inputs", solved.y.len());
            if let Some(delta) = solved.requested_delta {
                r.push("delta", delta);
            }
            r.push("epsilon", solved.epsilon);
            r.push("epsilon-floored", solved.epsilon_floored);
            r.push("rank", solved.rank);
            r.push("height", solved.height);
            r.push("carving-width", solved.carving_width);
            r.push("y", solved.y_string());
            r.push("pr", solved.pr_exact);
            r.push("alpha", solved.alpha);
            r.push("certified-bound", solved.certified_bound);
            for (node, size) in solved.set_sizes.iter().enumerate() {
                r.push(&format!("set-size {node}"), size);
            }
            if report.format == Format::Human {
                // Timing stays out of the records format so reports are
                // reproducible byte for byte.
                r.push("wall-ms", started.elapsed().as_millis());
            }
            print!("{}", r.render(report.format));
            Ok(())
        }
        Command::Oracle {
            path,
            oracle_cap,
            wire_cap,
            report,
        } => {
            let c = parse_circuit(&read_file(&path)?)?;
            let (y, p) = brute_force_max(&c, oracle_cap, wire_cap)?;
            let mut r = Report::new("oracle");
            r.push("input", path.display());
            r.push("d", c.d);
            r.push("open-inputs", y.len());
            let y_string: String = if c.d <= 10 {
                y.iter().map(|d| d.to_string()).collect()
            } else {
                y.iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            r.push("y", y_string);
            r.push("pr", p);
            print!("{}", r.render(report.format));
            Ok(())
        }
        Command::Gen(gen) => run_gen(gen),
    }
}

fn run_gen(gen: GenCommand) -> Result<(), Error> {
    match gen {
        GenCommand::Circuit {
            inputs,
            gates,
            structure,
            d,
            open,
            seed,
            report,
        } => {
            let structure: Structure = structure.parse()?;
            let c = gen_random_circuit(inputs, gates, structure, d, seed, open)?;
            write_artifact(&report.out, &print_circuit(&c))?;
            if report.out.is_some() {
                let mut r = Report::new("gen-circuit");
                r.push("vertices", c.vertices.len());
                r.push("edges", c.edges.len());
                r.push("open-inputs", open);
                r.push("seed", seed);
                print!("{}", r.render(report.format));
            }
            Ok(())
        }
        GenCommand::Verifier {
            dimacs,
            vars,
            clauses,
            satisfiable,
            amplify,
            seed,
            cutwidth,
            report,
        } => {
            let formula = match dimacs {
                Some(path) => CnfFormula::from_dimacs(&read_file(&path)?)?,
                None => random_3cnf(vars, clauses, seed, satisfiable),
            };
            let c = gen_3sat_verifier(&formula, amplify, seed)?;
            write_artifact(&report.out, &print_circuit(&c))?;
            if report.out.is_some() || cutwidth {
                let mut r = Report::new("gen-verifier");
                r.push("vars", formula.n_vars);
                r.push("clauses", formula.clauses.len());
                r.push("amplify", amplify);
                r.push("open-inputs", c.open_inputs().len());
                r.push("vertices", c.vertices.len());
                if cutwidth {
                    let ids: Vec<usize> = (0..c.vertices.len()).collect();
                    let cw = cutwidth_of_ordering(&c, &ids)?;
                    r.push("ordering-cutwidth", cw.cutwidth);
                    r.push("ordering-topological", cw.topological);
                }
                print!("{}", r.render(report.format));
            }
            Ok(())
        }
    }
}

fn main() {
    // Usage errors are validation errors (exit 1); clap's default exit
    // code of 2 is reserved for resource limits here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            e.print().ok();
            std::process::exit(1);
        }
        Err(e) => {
            // --help / --version go to stdout with exit 0.
            e.print().ok();
            std::process::exit(0);
        }
    };
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads > 1 {
        eprintln!("note: built without the parallel feature; --threads is ignored");
    }
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        let code = match err.kind() {
            ErrorKind::Validation => 1,
            ErrorKind::Resource => 2,
            ErrorKind::Invariant => 3,
        };
        std::process::exit(code);
    }
}
