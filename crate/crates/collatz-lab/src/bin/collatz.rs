//! Command-line workbench: every analysis in the library behind one binary,
//! with self-describing deterministic outputs.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 budget-truncated
//! results (so CI can tell "proved" apart from "ran out").

use clap::{Parser, Subcommand, ValueEnum};
use collatz_lab::maps::{iterate, MapSpec, StopCondition, Variant};
use collatz_lab::orbit_stats::{
    default_budget, scaled_trajectory, scan_records, seed_stats, Statistic,
};
use collatz_lab::stochastic::{
    bp_grow, bp_growth_rate, BranchModel, WalkModel, DEFAULT_POPULATION_CAP,
};
use collatz_lab::{benford, ld, padic, stochastic, symdyn, trees};
use num_bigint::BigInt;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "collatz", version, about = "3x+1 / 5x+1 workbench", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Master RNG seed; recorded in every output header.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for scans. Outputs are byte-identical for any value.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Jsonl,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    C,
    T,
    U,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::C => Variant::C,
            VariantArg::T => Variant::T,
            VariantArg::U => Variant::U,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Gamma,
    OnesRatio,
    Sigma,
    T,
    Rho,
}

impl From<StatArg> for Statistic {
    fn from(s: StatArg) -> Statistic {
        match s {
            StatArg::Gamma => Statistic::GammaInfty,
            StatArg::OnesRatio => Statistic::OnesRatio,
            StatArg::Sigma => Statistic::SigmaInfty,
            StatArg::T => Statistic::MaxExcursion,
            StatArg::Rho => Statistic::Rho,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Forward orbit of one seed with its summary statistics.
    Orbit {
        n: i64,
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::T)]
        variant: VariantArg,
        #[arg(long)]
        budget: Option<usize>,
        /// Track the lambda-stopping time as well.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Exhaustive record scan of a statistic over a seed range.
    Records {
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long, value_enum)]
        stat: StatArg,
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 1)]
        min: u64,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Exact stopping densities from the parity symbolic dynamics, k = 1..K.
    Density {
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(short, long)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Verify the structure of exponent compositions at one (k, s).
    Structure {
        #[arg(long, default_value_t = 1)]
        epsilon: u8,
        #[arg(short, long)]
        k: u32,
        #[arg(short, long)]
        s: u64,
    },
    /// Pruned inverse-tree census up to depth k.
    Census {
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long, default_value_t = 14)]
        k_max: u32,
    },
    /// pi_a(x): seeds |n| <= x whose forward orbit contains a.
    PiCount {
        #[arg(short, long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Repeated-random-walk trials, one independent walk per seed.
    SimulateWalk {
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, default_value_t = 2500)]
        budget: u64,
    },
    /// Branching-process realizations of backward iteration.
    SimulateBp {
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long, default_value_t = 40)]
        depth: u32,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_POPULATION_CAP)]
        cap: usize,
    },
    /// Every predicted constant the solvers produce.
    Constants,
    /// Leading-digit statistics: orbit discrepancy scan, or the shifted
    /// iterate law with --km.
    Benford {
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long, default_value_t = 10.0)]
        base: f64,
        #[arg(long, default_value_t = 40)]
        iterates: u32,
        #[arg(long, default_value_t = 1 << 40)]
        seed_cap: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Measure the shifted-variable law at fixed k instead of scanning.
        #[arg(long)]
        km: bool,
        #[arg(short, long, default_value_t = 10)]
        k: u32,
        #[arg(long, default_value_t = 100_000)]
        limit: u64,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Exact-bit 2-adic checks: solenoidality and shift conjugacy.
    Padic {
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long, default_value_t = 24)]
        bits: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1_000)]
        conj_samples: usize,
    },
    /// Plot data: scaled trajectory of one seed plus predicted overlays.
    Figures {
        #[arg(long)]
        traj: u64,
        #[arg(long, default_value_t = 3)]
        map: u64,
        #[arg(long)]
        budget: Option<usize>,
    },
}

/// Everything a run emits, ready to render in any of the three formats.
struct Artifact {
    command: &'static str,
    config: Value,
    csv_header: String,
    csv_rows: Vec<String>,
    json_rows: Vec<Value>,
    summary: Value,
    truncated: bool,
}

impl Artifact {
    /// Command-specific config plus the global flags, so any output can be
    /// reproduced from its own header. The worker count is deliberately not
    /// echoed: outputs are byte-identical for any value, and the header
    /// should witness that.
    fn merged_config(&self, cli: &Cli) -> Value {
        let mut cfg = self.config.clone();
        if let Value::Object(m) = &mut cfg {
            m.insert("format".into(), json!(cli.format.name()));
            m.insert("seed".into(), json!(cli.seed));
        }
        cfg
    }

    fn render(&self, cli: &Cli) -> String {
        let config = self.merged_config(cli);
        match cli.format {
            Format::Csv => {
                let mut out = String::new();
                let _ = writeln!(out, "# tool: collatz v{}", collatz_lab::VERSION);
                let _ = writeln!(out, "# schema_version: 1");
                let _ = writeln!(out, "# command: {}", self.command);
                let _ = writeln!(out, "# config: {config}");
                let _ = writeln!(out, "# seed: {}", cli.seed);
                let _ = writeln!(out, "# truncated: {}", self.truncated);
                if !self.summary.is_null() {
                    let _ = writeln!(out, "# summary: {}", self.summary);
                }
                let _ = writeln!(out, "{}", self.csv_header);
                for row in &self.csv_rows {
                    let _ = writeln!(out, "{row}");
                }
                out
            }
            Format::Json => {
                let doc = json!({
                    "schema_version": 1,
                    "tool": "collatz",
                    "version": collatz_lab::VERSION,
                    "command": self.command,
                    "config": config,
                    "seed": cli.seed,
                    "truncated": self.truncated,
                    "summary": self.summary,
                    "rows": self.json_rows,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
                s.push('\n');
                s
            }
            Format::Jsonl => {
                let header = json!({
                    "schema_version": 1,
                    "tool": "collatz",
                    "version": collatz_lab::VERSION,
                    "command": self.command,
                    "config": config,
                    "seed": cli.seed,
                    "truncated": self.truncated,
                    "summary": self.summary,
                });
                let mut out = serde_json::to_string(&header).expect("serializable");
                out.push('\n');
                for row in &self.json_rows {
                    out.push_str(&serde_json::to_string(row).expect("serializable"));
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, |x| x.to_string())
}

fn run(cli: &Cli) -> collatz_lab::Result<Artifact> {
    match &cli.command {
        Cmd::Orbit { n, map, variant, budget, lambda } => {
            let spec = MapSpec::new(*map, 1, (*variant).into())?;
            let budget = budget.unwrap_or_else(|| default_budget(&spec));
            let orbit = iterate(&spec, BigInt::from(*n), &StopCondition::ReachValue(BigInt::from(1)), budget)?;
            let stats = seed_stats(&spec, *n, *lambda, budget)?;
            let csv_rows: Vec<String> = orbit
                .values
                .iter()
                .zip(&orbit.parity_bits)
                .enumerate()
                .map(|(k, (v, &odd))| format!("{k},{v},{}", u8::from(odd)))
                .collect();
            let json_rows = orbit
                .values
                .iter()
                .zip(&orbit.parity_bits)
                .enumerate()
                .map(|(k, (v, &odd))| json!({"k": k, "value": v.to_string(), "odd": odd}))
                .collect();
            Ok(Artifact {
                command: "orbit",
                config: json!({"n": n, "map": map, "variant": spec.variant().to_string(),
                               "budget": budget, "lambda": lambda}),
                csv_header: "k,value,odd".into(),
                csv_rows,
                json_rows,
                summary: json!({
                    "steps": orbit.steps(),
                    "sigma_lambda": stats.sigma_lambda,
                    "sigma_infty": stats.sigma_infty,
                    "ones": stats.ones,
                    "ones_ratio": stats.ones_ratio,
                    "gamma_ratio": stats.gamma_ratio,
                    "rho_ratio": stats.rho_ratio,
                    "max_excursion": stats.max_excursion.to_string(),
                    "min_excursion": stats.min_excursion.to_string(),
                }),
                truncated: orbit.truncated,
            })
        }
        Cmd::Records { map, stat, max, min, budget } => {
            let spec = MapSpec::halved(*map)?;
            let budget = budget.unwrap_or_else(|| default_budget(&spec));
            let statistic: Statistic = (*stat).into();
            let list = scan_records(&spec, statistic, *min..=*max, budget, Some(cli.workers))?;
            let table = list.to_csv();
            let mut lines = table.lines();
            let csv_header = lines.next().unwrap_or_default().to_string();
            let csv_rows: Vec<String> = lines.map(str::to_string).collect();
            let json_rows = list
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "rank": e.rank,
                        "seed": e.seed,
                        "value": e.value,
                        "sigma_infty": e.stats.sigma_infty,
                        "ones": e.stats.ones,
                        "ones_ratio": e.stats.ones_ratio,
                        "gamma_ratio": e.stats.gamma_ratio,
                        "rho_ratio": e.stats.rho_ratio,
                        "max_excursion": e.stats.max_excursion.to_string(),
                    })
                })
                .collect();
            Ok(Artifact {
                command: "records",
                config: json!({"map": map, "stat": statistic.name(), "min": min, "max": max,
                               "budget": budget}),
                csv_header,
                csv_rows,
                json_rows,
                summary: json!({"records": list.entries.len()}),
                truncated: false,
            })
        }
        Cmd::Density { map, k, lambda } => {
            let spec = MapSpec::halved(*map)?;
            let mut csv_rows = Vec::new();
            let mut json_rows = Vec::new();
            for depth in 1..=*k {
                let r = symdyn::stopping_density(&spec, depth, *lambda)?;
                let density = r.density_num as f64 / r.density_den as f64;
                csv_rows.push(format!(
                    "{},{},{},{},{},{},{},{}",
                    r.k, r.lambda, r.stopped, r.total, r.density_num, r.density_den,
                    f(density), r.unstopped
                ));
                json_rows.push(json!({
                    "k": r.k, "lambda": r.lambda, "stopped": r.stopped, "total": r.total,
                    "density_num": r.density_num, "density_den": r.density_den,
                    "density": density, "unstopped": r.unstopped,
                }));
            }
            Ok(Artifact {
                command: "density",
                config: json!({"map": map, "k": k, "lambda": lambda}),
                csv_header: "k,lambda,stopped,total,density_num,density_den,density,unstopped"
                    .into(),
                csv_rows,
                json_rows,
                summary: Value::Null,
                truncated: false,
            })
        }
        Cmd::Structure { epsilon, k, s } => {
            let r = symdyn::verify_structure_theorem(*epsilon, *k, *s)?;
            let row = format!(
                "{},{},{},{},{},{},{}",
                r.epsilon, r.k, r.s, r.compositions_expected, r.compositions_seen,
                r.all_exactly_once, r.progression_verified
            );
            let jrow = json!({
                "epsilon": r.epsilon, "k": r.k, "s": r.s,
                "compositions_expected": r.compositions_expected,
                "compositions_seen": r.compositions_seen,
                "all_exactly_once": r.all_exactly_once,
                "progression_verified": r.progression_verified,
            });
            Ok(Artifact {
                command: "structure",
                config: json!({"epsilon": epsilon, "k": k, "s": s}),
                csv_header:
                    "epsilon,k,s,compositions_expected,compositions_seen,all_exactly_once,progression_verified"
                        .into(),
                csv_rows: vec![row],
                json_rows: vec![jrow],
                summary: json!({"verified": r.all_exactly_once && r.progression_verified}),
                truncated: false,
            })
        }
        Cmd::Census { map, k_max } => {
            let rows = trees::tree_census_table(*map, *k_max)?;
            let table = trees::census_csv(&rows);
            let mut lines = table.lines();
            let csv_header = lines.next().unwrap_or_default().to_string();
            let csv_rows: Vec<String> = lines.map(str::to_string).collect();
            let json_rows = rows
                .iter()
                .map(|r| {
                    json!({
                        "k": r.k, "tree_types": r.tree_types, "n_minus": r.n_minus,
                        "n_plus": r.n_plus, "leaf_sum": r.leaf_sum, "mean": r.mean,
                        "d_minus": r.d_minus, "d_plus": r.d_plus,
                    })
                })
                .collect();
            Ok(Artifact {
                command: "census",
                config: json!({"map": map, "k_max": k_max}),
                csv_header,
                csv_rows,
                json_rows,
                summary: Value::Null,
                truncated: false,
            })
        }
        Cmd::PiCount { a, max, budget } => {
            let spec = MapSpec::t3();
            let r = trees::count_inverse_iterates(&spec, *a, *max, *budget)?;
            Ok(Artifact {
                command: "pi-count",
                config: json!({"a": a, "max": max, "budget": budget}),
                csv_header: "a,x,count,unresolved,exact".into(),
                csv_rows: vec![format!("{a},{max},{},{},{}", r.count, r.unresolved, r.exact)],
                json_rows: vec![json!({
                    "a": a, "x": max, "count": r.count,
                    "unresolved": r.unresolved, "exact": r.exact,
                })],
                summary: Value::Null,
                truncated: !r.exact,
            })
        }
        Cmd::SimulateWalk { map, from, to, budget } => {
            let model = WalkModel::rrw(*map)?;
            let trials = stochastic::rrw_trials(&model, cli.seed, *from..=*to, *budget)?;
            let csv_rows = trials
                .iter()
                .map(|t| {
                    format!(
                        "{},{},{},{},{},{}",
                        t.n,
                        f(t.walk.start),
                        opt(&t.walk.steps_to_passage),
                        t.walk.steps_taken,
                        f(t.walk.log_peak),
                        f(t.walk.log_trough)
                    )
                })
                .collect();
            let json_rows = trials.iter().map(|t| serde_json::to_value(t).expect("serializable")).collect();
            let passages = trials.iter().filter(|t| t.walk.steps_to_passage.is_some()).count();
            Ok(Artifact {
                command: "simulate-walk",
                config: json!({"map": map, "from": from, "to": to, "budget": budget}),
                csv_header: "n,start,steps_to_passage,steps_taken,log_peak,log_trough".into(),
                csv_rows,
                json_rows,
                summary: json!({"walks": trials.len(), "passages": passages}),
                truncated: false,
            })
        }
        Cmd::SimulateBp { map, level, depth, trials, cap } => {
            let model = BranchModel::new(*map, *level)?;
            let mut csv_rows = Vec::new();
            let mut json_rows = Vec::new();
            let mut rates = Vec::new();
            let mut truncated = false;
            for trial in 0..*trials {
                let r = bp_grow(&model, 0.0, *depth, *cap, cli.seed, trial as u64);
                truncated |= r.truncated;
                let rate = bp_growth_rate(&r)?;
                rates.push(rate);
                csv_rows.push(format!(
                    "{trial},{},{},{},{},{}",
                    r.depth,
                    r.total_individuals(),
                    f(*r.first_births.last().expect("depth >= 0")),
                    f(rate),
                    r.truncated
                ));
                json_rows.push(serde_json::to_value(&r).expect("serializable"));
            }
            let mean = rates.iter().sum::<f64>() / rates.len().max(1) as f64;
            let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                / rates.len().max(1) as f64;
            Ok(Artifact {
                command: "simulate-bp",
                config: json!({"map": map, "level": level, "depth": depth, "trials": trials,
                               "cap": cap}),
                csv_header: "trial,depth,total_individuals,last_first_birth,growth_rate,truncated"
                    .into(),
                csv_rows,
                json_rows,
                summary: json!({"mean_growth_rate": mean, "sd_growth_rate": var.sqrt()}),
                truncated,
            })
        }
        Cmd::Constants => {
            let consts = ld::constants();
            let csv_rows = consts
                .iter()
                .map(|c| format!("{},{},\"{}\"", c.name, f(c.value), c.formula))
                .collect();
            let json_rows = consts
                .iter()
                .map(|c| {
                    json!({"name": c.name, "value": c.value, "formula": c.formula,
                           "note": c.note})
                })
                .collect();
            let map: serde_json::Map<String, Value> = consts
                .iter()
                .map(|c| {
                    (
                        c.name.to_string(),
                        json!({"value": c.value, "formula": c.formula, "note": c.note}),
                    )
                })
                .collect();
            Ok(Artifact {
                command: "constants",
                config: json!({}),
                csv_header: "name,value,formula".into(),
                csv_rows,
                json_rows,
                summary: Value::Object(map),
                truncated: false,
            })
        }
        Cmd::Benford { map, base, iterates, seed_cap, samples, km, k, limit, bins } => {
            if *km {
                let r = benford::km_shifted_distribution(*map, *k, *limit, *bins)?;
                let width = 1.0 / *bins as f64;
                let csv_rows = r
                    .histogram
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{i},{},{c}", f(i as f64 * width)))
                    .collect();
                let json_rows = r
                    .histogram
                    .iter()
                    .enumerate()
                    .map(|(i, c)| json!({"bin": i, "lower_edge": i as f64 * width, "count": c}))
                    .collect();
                Ok(Artifact {
                    command: "benford",
                    config: json!({"mode": "km", "map": map, "k": k, "limit": limit,
                                   "bins": bins}),
                    csv_header: "bin,lower_edge,count".into(),
                    csv_rows,
                    json_rows,
                    summary: json!({
                        "sample_size": r.sample_size, "discrepancy": r.discrepancy,
                        "sup": r.sup, "inf": r.inf,
                    }),
                    truncated: false,
                })
            } else {
                let spec = MapSpec::halved(*map)?;
                let scan = benford::benford_scan(&spec, *base, *iterates, *seed_cap, *samples, cli.seed)?;
                let csv_rows = scan
                    .records
                    .iter()
                    .map(|r| {
                        format!(
                            "{},{},{},{},{}",
                            r.seed,
                            r.iterates_used,
                            f(r.discrepancy),
                            f(scan.bound),
                            r.violated
                        )
                    })
                    .collect();
                let json_rows =
                    scan.records.iter().map(|r| serde_json::to_value(r).expect("serializable")).collect();
                Ok(Artifact {
                    command: "benford",
                    config: json!({"mode": "scan", "map": map, "base": base,
                                   "iterates": iterates, "seed_cap": seed_cap,
                                   "samples": samples}),
                    csv_header: "seed,N_used,discrepancy,bound,violated".into(),
                    csv_rows,
                    json_rows,
                    summary: json!({
                        "bound": scan.bound,
                        "mean_discrepancy": scan.mean_discrepancy,
                        "violation_fraction": scan.violation_fraction,
                    }),
                    truncated: false,
                })
            }
        }
        Cmd::Padic { map, bits, trials, conj_samples } => {
            let spec = MapSpec::halved(*map)?;
            let sol = padic::verify_solenoidal(&spec, *bits, *trials, cli.seed)?;
            let conj = padic::verify_conjugacy(&spec, *conj_samples, *bits, cli.seed)?;
            let rows = [("solenoidal", sol), ("conjugacy", conj)];
            let csv_rows = rows
                .iter()
                .map(|(name, ev)| {
                    format!("{name},{},{},{},{}", ev.bit_depth, ev.trials, ev.failures, ev.all_passed())
                })
                .collect();
            let json_rows = rows
                .iter()
                .map(|(name, ev)| {
                    json!({"check": name, "bit_depth": ev.bit_depth, "trials": ev.trials,
                           "failures": ev.failures, "passed": ev.all_passed()})
                })
                .collect();
            Ok(Artifact {
                command: "padic",
                config: json!({"map": map, "bits": bits, "trials": trials,
                               "conj_samples": conj_samples}),
                csv_header: "check,bit_depth,trials,failures,passed".into(),
                csv_rows,
                json_rows,
                summary: json!({"all_passed": rows.iter().all(|(_, ev)| ev.all_passed())}),
                truncated: false,
            })
        }
        Cmd::Figures { traj, map, budget } => {
            let spec = MapSpec::halved(*map)?;
            let budget = budget.unwrap_or_else(|| default_budget(&spec));
            let t = scaled_trajectory(&spec, *traj, budget)?;
            let mut csv_rows = Vec::new();
            let mut json_rows = Vec::new();
            let mut push = |series: &str, pts: &[(f64, f64)]| {
                for (x, y) in pts {
                    csv_rows.push(format!("{series},{},{}", f(*x), f(*y)));
                    json_rows.push(json!({"series": series, "x": x, "y": y}));
                }
            };
            push("trajectory", &t.points);
            if let Some(o) = t.stopping_overlay {
                push("stopping_overlay", &o);
            }
            if let Some(o) = t.excursion_overlay {
                push("excursion_overlay", &o);
            }
            Ok(Artifact {
                command: "figures",
                config: json!({"traj": traj, "map": map, "budget": budget}),
                csv_header: "series,x,y".into(),
                csv_rows,
                json_rows,
                summary: json!({"points": t.points.len()}),
                truncated: t.truncated,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap treats --help/--version as "errors"; keep those exit 0
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(artifact) => {
            let rendered = artifact.render(&cli);
            let write_result = match &cli.output {
                Some(path) => std::fs::write(path, rendered.as_bytes()),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(rendered.as_bytes())
                }
            };
            if let Err(e) = write_result {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if artifact.truncated {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
