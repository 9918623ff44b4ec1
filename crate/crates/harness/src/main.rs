use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sleeping_mis::avg_energy::Which;
use sleeping_mis::config::Profile;
use sleeping_mis::graph::{generate_graph, Graph};
use sleeping_mis::isolate::Phase;
use sleeping_mis::record::RunRecord;
use sleeping_mis_harness::report::{fit_rows, read_records, summarize, write_csv, FIT_HEADER, SUMMARY_HEADER};
use sleeping_mis_harness::settings::{parse_pairs, resolve, Settings};
use sleeping_mis_harness::sweep::{run_algorithm, run_sweep, AlgSpec, ModelSpec, SweepSpec};
use sleeping_mis_harness::verify::{verify_schedules, verify_small_graphs};

/// Directory for output files when `--out` is not given.
const OUT_DIR_VAR: &str = "SMIS_OUT_DIR";

#[derive(Parser)]
#[command(name = "smis", version, about = "Sleeping-model MIS simulator and experiment harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated graph as an edge list.
    Generate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One algorithm on one graph; prints a JSON-lines record.
    Run {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        alg: u8,
        #[arg(long)]
        avg_energy: bool,
        /// Run only this phase.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with = "avg_energy")]
        phase: Option<u8>,
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        settings: SettingsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every (n, model, seed) cell with every algorithm.
    Sweep {
        /// JSON sweep specification; replaces the flags below.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long = "n", value_delimiter = ',')]
        ns: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "8")]
        avg_deg: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long = "alg", value_delimiter = ',', default_value = "1,2")]
        algs: Vec<u8>,
        #[arg(long, value_enum, default_value_t = AvgEnergy::Off)]
        avg_energy: AvgEnergy,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        settings: SettingsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive schedule check and small-graph oracle comparison.
    Verify {
        #[arg(long)]
        schedules: bool,
        #[arg(long, default_value_t = 4096)]
        max_t: u64,
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=8))]
        max_n: u64,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Per-n summary CSV of JSON-lines records (stdin when no inputs).
    Report {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write growth fits to this CSV.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AvgEnergy {
    Off,
    On,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Gnp,
    Regular,
    Hubs,
    Star,
    Path,
    Complete,
}

#[derive(Args)]
struct GraphArgs {
    /// Read an edge list instead of generating.
    #[arg(long, conflicts_with = "model")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, required_unless_present = "graph")]
    n: Option<usize>,
    #[arg(long, conflicts_with = "p")]
    avg_deg: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 64)]
    hubs: usize,
    #[arg(long)]
    hub_degree: Option<usize>,
}

#[derive(Args)]
struct SettingsArgs {
    #[arg(long, value_enum, default_value_t = ProfileArg::Desk)]
    profile: ProfileArg,
    /// `key = value` file; `--set` flags apply after it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

/// Exit 2: the request itself is unusable. Exit 1: something broke while
/// running it.
enum Failure {
    Usage(String),
    Internal(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

impl SettingsArgs {
    fn load(&self) -> Result<Settings, Failure> {
        let profile = match self.profile {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Paper => Profile::Paper,
        };
        self.load_on(profile)
    }

    fn load_on(&self, profile: Profile) -> Result<Settings, Failure> {
        let mut pairs = Vec::new();
        if let Some(p) = &self.config {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            pairs = parse_pairs(&text).map_err(usage)?;
        }
        for s in &self.sets {
            pairs.extend(parse_pairs(s).map_err(usage)?);
        }
        resolve(profile, &pairs).map_err(usage)
    }
}

impl GraphArgs {
    fn model(&self) -> Result<ModelSpec, Failure> {
        let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("--{flag} is required for this model")));
        Ok(match self.model.unwrap_or(Model::Gnp) {
            Model::Gnp => match (self.avg_deg, self.p) {
                (_, Some(p)) => ModelSpec::GnpP { p },
                (a, None) => ModelSpec::Gnp { avg_deg: a.unwrap_or(8.0) },
            },
            Model::Regular => ModelSpec::RandomRegular { d: need(self.d, "d")? },
            Model::Hubs => ModelSpec::PlantedHubs { hubs: self.hubs, hub_degree: need(self.hub_degree, "hub-degree")? },
            Model::Star => ModelSpec::Star,
            Model::Path => ModelSpec::Path,
            Model::Complete => ModelSpec::Complete,
        })
    }

    /// The graph and its label.
    fn load(&self, seed: u64) -> Result<(Graph, String), Failure> {
        if let Some(p) = &self.graph {
            let f = File::open(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            let g = Graph::read_edge_list(BufReader::new(f)).map_err(usage)?;
            return Ok((g, format!("file:{}", p.display())));
        }
        let m = self.model()?;
        let n = self.n.expect("clap requires n");
        let g = generate_graph(&m.at(n), seed).map_err(usage)?;
        Ok((g, m.label()))
    }
}

fn which(alg: u8) -> Result<Which, Failure> {
    match alg {
        1 => Ok(Which::Alg1),
        2 => Ok(Which::Alg2),
        a => Err(usage(format!("unknown algorithm {a}"))),
    }
}

/// `--out`, else `$SMIS_OUT_DIR/<default_name>`, else stdout.
fn output(out: &Option<PathBuf>, default_name: &str) -> Result<Box<dyn Write>, Failure> {
    let path = match (out, std::env::var_os(OUT_DIR_VAR)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(&dir)?;
            Some(Path::new(&dir).join(default_name))
        }
        (None, None) => None,
    };
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// A record that breaks a hard invariant.
fn breach(r: &RunRecord) -> bool {
    !r.independent || r.budget_violations > 0 || r.other_violations > 0 || r.unintended_drops > 0
}

fn write_record(w: &mut dyn Write, r: &RunRecord) -> io::Result<()> {
    serde_json::to_writer(&mut *w, r)?;
    writeln!(w)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Generate { graph, seed, out } => {
            let (g, _) = graph.load(seed)?;
            let mut w = output(&out, "graph.txt")?;
            g.write_edge_list(&mut w)?;
            w.flush()?;
        }
        Cmd::Run { alg, avg_energy, phase, graph, seed, settings, out } => {
            let settings = settings.load()?;
            let (g, label) = graph.load(seed)?;
            let phase = phase.map(|p| match p {
                1 => Phase::One,
                2 => Phase::Two,
                _ => Phase::Three,
            });
            let spec = AlgSpec { alg: which(alg)?, avg_energy, phase };
            let (_, rec) = run_algorithm(&g, &label, spec, &settings, seed)?;
            let mut w = output(&out, "run.jsonl")?;
            write_record(&mut w, &rec)?;
            w.flush()?;
            if breach(&rec) {
                return Err(Failure::Internal(serde_json::to_string(&rec)?));
            }
        }
        Cmd::Sweep { spec, ns, avg_deg, seeds, first_seed, algs, avg_energy, jobs, settings, out } => {
            let from_flags = settings.load()?;
            let spec = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    serde_json::from_str::<SweepSpec>(&text).map_err(usage)?
                }
                None => {
                    let energies: &[bool] = match avg_energy {
                        AvgEnergy::Off => &[false],
                        AvgEnergy::On => &[true],
                        AvgEnergy::Both => &[false, true],
                    };
                    let mut algorithms = Vec::new();
                    for &a in &algs {
                        for &e in energies {
                            algorithms.push(AlgSpec::full(which(a)?, e));
                        }
                    }
                    SweepSpec {
                        ns,
                        models: avg_deg.iter().map(|&d| ModelSpec::Gnp { avg_deg: d }).collect(),
                        seeds,
                        first_seed,
                        algorithms,
                        profile: from_flags.config.profile,
                    }
                }
            };
            spec.validate().map_err(usage)?;
            let settings = settings.load_on(spec.profile)?;
            let mut w = output(&out, "sweep.jsonl")?;
            let mut first_breach = None;
            let mut io_err = None;
            run_sweep(&spec, &settings, jobs, |r| {
                if let Err(e) = write_record(&mut w, &r) {
                    io_err.get_or_insert(e);
                }
                if breach(&r) && first_breach.is_none() {
                    first_breach = Some(r);
                }
            })?;
            w.flush()?;
            if let Some(e) = io_err {
                return Err(e.into());
            }
            if let Some(r) = first_breach {
                return Err(Failure::Internal(serde_json::to_string(&r)?));
            }
        }
        Cmd::Verify { schedules, max_t, oracle, max_n, seeds, settings } => {
            let settings = settings.load()?;
            let (schedules, oracle) = if schedules || oracle { (schedules, oracle) } else { (true, true) };
            let mut ok = true;
            let mut w = BufWriter::new(io::stdout());
            if schedules {
                let s = verify_schedules(max_t);
                ok &= s.failures.is_empty();
                serde_json::to_writer(&mut w, &s)?;
                writeln!(w)?;
            }
            if oracle {
                for n in 1..=max_n as usize {
                    for a in [Which::Alg1, Which::Alg2] {
                        let s = verify_small_graphs(n, AlgSpec::full(a, false), seeds, &settings)?;
                        ok &= s.passed();
                        serde_json::to_writer(&mut w, &s)?;
                        writeln!(w)?;
                    }
                }
            }
            w.flush()?;
            if !ok {
                return Err(Failure::Internal("verification failed".into()));
            }
        }
        Cmd::Report { inputs, out, fits } => {
            let mut records = Vec::new();
            if inputs.is_empty() {
                records = read_records(io::stdin().lock()).map_err(usage)?;
            }
            for p in &inputs {
                let f = File::open(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                records.extend(read_records(BufReader::new(f)).map_err(usage)?);
            }
            let w = output(&out, "report.csv")?;
            write_csv(w, &SUMMARY_HEADER, &summarize(&records))?;
            if let Some(p) = fits {
                write_csv(BufWriter::new(File::create(p)?), &FIT_HEADER, &fit_rows(&records))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}
