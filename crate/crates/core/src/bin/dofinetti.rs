use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dofinetti::discover::{discover_bivariate_iid_report, discover_bivariate_report, DEFAULT_SIGNIFICANCE};
use dofinetti::estimate::{answer_query, fit_joint_smoothed};
use dofinetti::harness::{run_sweep, ExperimentConfig, SEED_ENV_VAR};
use dofinetti::oracle::{analytic_post_interventional, quadrature_post_interventional, BetaRule, DEFAULT_NODES};
use dofinetti::simulate::{polya_joint_log_prob, polya_urn_run, sample_icm_bivariate};
use dofinetti::{BetaPrior, BivariateGraph, Error, ExchangeableDataset, InterventionSet, Query, Result};

#[derive(Parser)]
#[command(
    name = "dofinetti",
    version,
    about = "Causal effects from exchangeable multi-environment data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct PriorArgs {
    /// Beta prior shape for the value 1
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    beta: f64,
}

impl PriorArgs {
    fn prior(self) -> Result<BetaPrior> {
        BetaPrior::new(self.alpha, self.beta)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Discovery {
    Exchangeable,
    Iid,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMethod {
    Analytic,
    Jacobi,
    Legendre,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a bivariate ICM dataset as CSV
    Simulate {
        /// X->Y, Y->X or X|Y
        #[arg(long)]
        graph: BivariateGraph,
        #[arg(long, default_value_t = 1000)]
        envs: usize,
        #[arg(long, default_value_t = 2)]
        positions: usize,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long, env = SEED_ENV_VAR, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Infer the bivariate graph from a dataset CSV
    Discover {
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
        significance: f64,
        #[arg(long, value_enum, default_value_t = Discovery::Exchangeable)]
        method: Discovery,
        /// Refuse tests with sparse expected counts
        #[arg(long)]
        strict: bool,
        #[arg(long, env = SEED_ENV_VAR, default_value_t = 0)]
        seed: u64,
    },
    /// Answer an interventional query file against a dataset CSV
    Effect {
        data: PathBuf,
        query: PathBuf,
        /// Graph to use; discovered from the data when omitted
        #[arg(long)]
        graph: Option<BivariateGraph>,
        #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
        significance: f64,
        /// Additive count smoothing for the histogram
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
    },
    /// Run the causal Pólya urn and write its trace as CSV
    Urn {
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        prior: PriorArgs,
        /// Force X at a step, as STEP=VALUE; repeatable
        #[arg(long = "intervene", value_parser = parse_step)]
        interventions: Vec<(usize, u8)>,
        #[arg(long, env = SEED_ENV_VAR, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the method comparison sweep from a TOML config
    Sweep {
        config: Option<PathBuf>,
        /// Overrides output_dir from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact post-interventional block table
    Oracle {
        #[arg(long)]
        graph: BivariateGraph,
        #[arg(long, default_value_t = 2)]
        positions: usize,
        #[command(flatten)]
        prior: PriorArgs,
        /// Query file whose `intervene` line is applied
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OracleMethod::Analytic)]
        method: OracleMethod,
        #[arg(long, default_value_t = DEFAULT_NODES)]
        nodes: usize,
    },
}

fn parse_step(s: &str) -> std::result::Result<(usize, u8), String> {
    let (step, value) = s.split_once('=').ok_or("expected STEP=VALUE")?;
    let step = step.trim().parse().map_err(|e| format!("bad step: {e}"))?;
    let value = value.trim().parse().map_err(|e| format!("bad value: {e}"))?;
    Ok((step, value))
}

fn read_dataset(path: &Path) -> Result<ExchangeableDataset> {
    let file = fs::File::open(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    ExchangeableDataset::read_csv(file, None)
}

fn read_query(path: &Path) -> Result<Query> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })?;
    Query::parse(&text)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            graph,
            envs,
            positions,
            prior,
            seed,
            out,
        } => {
            let data = sample_icm_bivariate(graph, prior.prior()?, envs, positions, seed)?;
            data.write_csv(sink(&out)?)
        }
        Command::Discover {
            data,
            significance,
            method,
            strict,
            seed,
        } => {
            let data = read_dataset(&data)?;
            let report = match method {
                Discovery::Exchangeable => discover_bivariate_report(&data, significance, strict)?,
                Discovery::Iid => discover_bivariate_iid_report(&data, significance, seed)?,
            };
            print!("{report}");
            Ok(())
        }
        Command::Effect {
            data,
            query,
            graph,
            significance,
            smoothing,
        } => {
            let data = read_dataset(&data)?;
            let mut query = read_query(&query)?;
            let graph = match graph {
                Some(g) => g,
                None => discover_bivariate_report(&data, significance, false)?.graph,
            };
            let table = fit_joint_smoothed(&data, smoothing)?;
            if query.targets.is_empty() {
                query.targets = table
                    .keys()
                    .filter(|&k| query.intervention.get(k).is_none() && !query.conditioning.contains_key(&k))
                    .collect();
            }
            let answer = answer_query(&table, &graph.to_dag(), &query)?;
            println!("# graph = {graph}");
            print!("{}", answer.to_text());
            Ok(())
        }
        Command::Urn {
            steps,
            prior,
            interventions,
            seed,
            out,
        } => {
            let prior = prior.prior()?;
            let forced: BTreeMap<usize, u8> = interventions.into_iter().collect();
            let trace = polya_urn_run(prior, steps, &forced, seed)?;
            trace.write_csv(sink(&out)?)?;
            if forced.is_empty() {
                let lp = polya_joint_log_prob(&trace.xs, &trace.ys, prior)?;
                eprintln!("log_prob = {lp}");
            }
            Ok(())
        }
        Command::Sweep { config, out } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let cfg = cfg.with_env_overrides()?;
            let outcome = run_sweep(&cfg)?;
            println!("method,n_envs,mse_mean,mse_std,dag_accuracy");
            for r in &outcome.summary {
                println!(
                    "{},{},{},{},{}",
                    r.method, r.num_envs, r.mse_mean, r.mse_std, r.dag_accuracy
                );
            }
            eprintln!("wrote {}", cfg.output_dir.display());
            Ok(())
        }
        Command::Oracle {
            graph,
            positions,
            prior,
            query,
            method,
            nodes,
        } => {
            let intervention = match query {
                Some(p) => read_query(&p)?.intervention,
                None => InterventionSet::empty(),
            };
            let prior = prior.prior()?;
            let table = match method {
                OracleMethod::Analytic => analytic_post_interventional(graph, prior, positions, &intervention)?,
                OracleMethod::Jacobi => {
                    quadrature_post_interventional(graph, prior, positions, &intervention, nodes, BetaRule::Jacobi)?
                }
                OracleMethod::Legendre => {
                    quadrature_post_interventional(graph, prior, positions, &intervention, nodes, BetaRule::Legendre)?
                }
            };
            print!("{}", table.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
