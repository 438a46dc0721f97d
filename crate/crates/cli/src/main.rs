use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use furstenberg_core::actions::BasePoint;
use furstenberg_core::classify::{LatticeFit, RatioSetEstimate};
use furstenberg_core::entropy::{product_space_entropy, pushforwards, stationarity_defect_exact};
use furstenberg_core::realize::{DeformationCurve, DEFAULT_BUDGET, DEFAULT_TOL};
use furstenberg_core::*;
use serde_json::{json, Value};

mod report;

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "furstenberg", version, about = "Furstenberg entropy of product-odometer scenarios")]
struct Cli {
    /// Print a JSON object instead of `key: value` lines.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact entropy through the addition formula.
    Entropy { scenario: PathBuf },
    /// Monte Carlo estimate of the defining integral.
    McEntropy {
        scenario: PathBuf,
        #[command(flatten)]
        mc: McArgs,
        /// Sample the base point too instead of summing over it.
        #[arg(long)]
        full: bool,
    },
    /// Base term, fiber integral and the direct product-space value.
    Addition { scenario: PathBuf },
    /// Stationarity defect `E|Σ κ(g) rn_g - 1|`.
    Stationarity {
        scenario: PathBuf,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Solve for the deformation weight that hits a target entropy.
    Realize {
        scenario: PathBuf,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 1)]
        n0: u32,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write the curve θ ↦ h(θ) as CSV.
        #[arg(long, value_name = "CSV")]
        emit_curve: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        curve_points: usize,
    },
    /// Build a small-entropy scenario of a prescribed type from the scenario's κ.
    Construct {
        scenario: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long = "type", value_enum)]
        kind: TypeArg,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: f64,
        /// Write the constructed scenario as JSON.
        #[arg(long, value_name = "JSON")]
        out: Option<PathBuf>,
    },
    /// Krieger type of the fiber measure.
    Classify { scenario: PathBuf },
    /// Sampled log Radon–Nikodym ratios and their lattice structure.
    RatioSet {
        scenario: PathBuf,
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, value_name = "CSV")]
        emit_csv: Option<PathBuf>,
    },
    /// Slow-growth sequence `l_n` with `Σ κ(g_n)(l_n + 1) < B`.
    Budget {
        scenario: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: f64,
        /// Number of terms to list; defaults to the size of supp κ.
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long, value_name = "CSV")]
        emit_csv: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
struct McArgs {
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl McArgs {
    fn config(&self) -> McConfig {
        McConfig::new(self.samples, self.seed).workers(self.workers)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TypeArg {
    Iii1,
    Iiilambda,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain() => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok(report) => {
            print!("{}", if cli.json { report.to_json() } else { report.to_text() });
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn point_label(x: &BasePoint) -> Value {
    match x {
        BasePoint::Cycle(i) => json!(i),
        BasePoint::Odometer(_) => json!("haar"),
    }
}

fn run(command: &Command) -> std::result::Result<Report, CliError> {
    let mut r = Report::new();
    match command {
        Command::Entropy { scenario } => {
            let s = load_scenario(scenario)?;
            let b = skew_entropy(&s)?;
            r.push("scenario", s.name.as_str());
            r.push("entropy", b.total);
            r.push("base_term", b.base_term);
            r.push("fiber_integral", b.fiber_integral);
            let per: serde_json::Map<String, Value> =
                b.per_coordinate.iter().map(|(n, v)| (n.to_string(), json!(v))).collect();
            r.push("per_coordinate", per);
        }
        Command::McEntropy { scenario, mc, full } => {
            let s = load_scenario(scenario)?;
            let mode = if *full { McMode::Full } else { McMode::FiberOnly };
            let est = mc_entropy(&s, &mc.config().mode(mode))?;
            r.push("scenario", s.name.as_str());
            r.push("mean", est.mean);
            r.push("stderr", est.stderr);
            r.push("samples", est.samples);
            r.push("seed", est.seed);
            r.push("mode", if *full { "full" } else { "fiber" });
            let exact = skew_entropy(&s)?.total;
            r.push("exact", exact);
            r.push("z", if est.stderr > 0.0 { (est.mean - exact) / est.stderr } else { 0.0 });
        }
        Command::Addition { scenario } => {
            let s = load_scenario(scenario)?;
            let b = skew_entropy(&s)?;
            r.push("scenario", s.name.as_str());
            r.push("base_term", b.base_term);
            r.push("fiber_integral", b.fiber_integral);
            r.push("total", b.total);
            match product_space_entropy(&s) {
                Ok(direct) => {
                    r.push("direct", direct);
                    r.push("difference", direct - b.total);
                }
                Err(Error::TooLarge { .. }) => r.push("direct", Value::Null),
                Err(e) => return Err(e.into()),
            }
            let fibers: Vec<Value> = pushforwards(&s)?
                .iter()
                .map(|(x, mu, kx)| json!({"point": point_label(x), "weight": mu, "entropy": exact_entropy(kx, &s.nu)}))
                .collect();
            r.push("fibers", fibers);
        }
        Command::Stationarity { scenario, mc } => {
            let s = load_scenario(scenario)?;
            let est = stationarity_defect(&s, &mc.config())?;
            r.push("scenario", s.name.as_str());
            r.push("mean", est.mean);
            r.push("stderr", est.stderr);
            r.push("samples", est.samples);
            r.push("seed", est.seed);
            match stationarity_defect_exact(&s) {
                Ok(v) => r.push("exact", v),
                Err(Error::TooLarge { .. }) => r.push("exact", Value::Null),
                Err(e) => return Err(e.into()),
            }
            r.push("entropy", skew_entropy(&s)?.total);
        }
        Command::Realize { scenario, target, n0, tol, emit_curve, curve_points } => {
            let s = load_scenario(scenario)?;
            let res = realize_target(&s, *n0, *target, *tol)?;
            let curve = DeformationCurve::new(&s, *n0)?;
            r.push("scenario", s.name.as_str());
            r.push("target", *target);
            r.push("n0", *n0);
            r.push("theta_star", res.theta_star);
            r.push("achieved_entropy", res.achieved_entropy);
            r.push("baseline_entropy", curve.baseline);
            r.push("kappa_bar", curve.kappa_bar);
            r.push("iterations", res.iterations);
            if let Some(path) = emit_curve {
                let theta_min = (res.theta_star / 10.0).min(1e-2);
                let points = curve.sample(theta_min, *curve_points)?;
                write_csv(path, &["theta", "entropy"], points.iter().map(|(t, h)| vec![t.to_string(), h.to_string()]))?;
                r.push("curve", path.display().to_string());
            }
        }
        Command::Construct { scenario, eps, kind, budget, out } => {
            let s = load_scenario(scenario)?;
            let flag = match kind {
                TypeArg::Iii1 => TypeFlag::III1,
                TypeArg::Iiilambda => TypeFlag::IIILambda,
            };
            let c = build_small_entropy_scenario(&s.kappa, *eps, flag, *budget)?;
            let label = classify_family(&c.scenario.nu);
            r.push("entropy", c.entropy.total);
            r.push("bound", c.bound);
            r.push("two_eps", 2.0 * eps);
            r.push("weighted_sum", c.budget.kappa_weighted_sum());
            if let Some(exact) = c.budget.exact_weighted_sum() {
                r.push("weighted_sum_exact", exact.to_string());
            }
            r.push("l", c.budget.prefix(s.kappa.len()));
            r.push("type", label.to_string());
            if let Some(path) = out {
                std::fs::write(path, c.scenario.to_json() + "\n").map_err(|e| io_err(path, e))?;
                r.push("written", path.display().to_string());
            }
        }
        Command::Classify { scenario } => {
            let s = load_scenario(scenario)?;
            let t = classify_family(&s.nu);
            r.push("scenario", s.name.as_str());
            r.push("type", t.to_string());
            if let Some(l) = t.lambda() {
                r.push("lambda", l);
            }
            r.push("evidence", t.evidence.as_str());
            r.push("square_sum", kakutani_square_sum(&s.nu).to_string());
        }
        Command::RatioSet { scenario, depth, mc, emit_csv } => {
            let s = load_scenario(scenario)?;
            let est = ratio_set_estimate(&s.nu, *depth, mc.samples, mc.seed, mc.workers)?;
            r.push("scenario", s.name.as_str());
            ratio_report(&mut r, &est);
            if let Some(path) = emit_csv {
                let rows = est.values.iter().map(|(v, m)| vec![v.to_string(), m.to_string()]);
                write_csv(path, &["log_ratio", "multiplicity"], rows)?;
                r.push("csv", path.display().to_string());
            }
        }
        Command::Budget { scenario, budget, terms, emit_csv } => {
            let s = load_scenario(scenario)?;
            let weights = KappaWeights::from(&s.kappa);
            let b = build_budget(&weights, *budget)?;
            let len = terms.unwrap_or(s.kappa.len()).max(1);
            let l = b.prefix(len);
            r.push("budget", *budget);
            r.push("weighted_sum", b.kappa_weighted_sum());
            if let Some(exact) = b.exact_weighted_sum() {
                r.push("weighted_sum_exact", exact.to_string());
            }
            r.push("l", l.clone());
            r.push("admissible", b.verify_prefix(len));
            if let Some(path) = emit_csv {
                let mut partial = 0.0;
                let rows: Vec<Vec<String>> = l
                    .iter()
                    .enumerate()
                    .map(|(i, li)| {
                        let n = i as u64 + 1;
                        let k = weights.weight(n);
                        partial += k * (li + 1) as f64;
                        vec![n.to_string(), k.to_string(), li.to_string(), partial.to_string()]
                    })
                    .collect();
                write_csv(path, &["n", "kappa_n", "l_n", "partial_weighted_sum"], rows)?;
                r.push("csv", path.display().to_string());
            }
        }
    }
    Ok(r)
}

fn ratio_report(r: &mut Report, est: &RatioSetEstimate) {
    r.push("depth", est.depth);
    r.push("samples", est.samples);
    r.push("seed", est.seed);
    r.push("distinct", est.distinct());
    match est.lattice {
        LatticeFit::Trivial => r.push("lattice", "trivial"),
        LatticeFit::Dense => r.push("lattice", "dense"),
        LatticeFit::Lattice { generator, residual } => {
            r.push("lattice", "periodic");
            r.push("lattice_generator", generator);
            r.push("lattice_residual", residual);
        }
    }
    r.push("max_gap_in_unit_interval", est.max_gap_within(-1.0, 1.0));
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> std::result::Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
