use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use etm_wave::certificate::CertificateParams;
use etm_wave::config::ExperimentConfig;
use etm_wave::experiment::{cmd_certify, cmd_compare, cmd_simulate, cmd_sweep, cmd_verify, SweepKind};
use etm_wave::Error;

#[derive(Parser)]
#[command(name = "etm-wave", version, about = "Certify and simulate event-triggered damping of the 1D wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set policy=continuous
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as --set out_dir=DIR)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> etm_wave::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search for a certificate, or audit an explicit tuple
    Certify {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        c_omega: f64,
        /// Audit the tuple quoted with the reference experiment
        #[arg(long, conflicts_with_all = ["epsilon", "delta", "lambda1", "lambda2", "gamma"])]
        paper_point: bool,
        #[arg(long, requires_all = ["delta", "lambda1", "lambda2", "gamma"])]
        epsilon: Option<f64>,
        #[arg(long, requires = "epsilon")]
        delta: Option<f64>,
        #[arg(long, requires = "epsilon")]
        lambda1: Option<f64>,
        #[arg(long, requires = "epsilon")]
        lambda2: Option<f64>,
        #[arg(long, requires = "epsilon")]
        gamma: Option<f64>,
        /// Print JSON instead of key=value lines
        #[arg(long)]
        json: bool,
    },
    /// Run one closed-loop simulation and write its trace and event log
    Simulate(ConfigArgs),
    /// Run the four controllers side by side
    Compare(ConfigArgs),
    /// Sweep the trigger threshold or the sampling period
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated trigger thresholds
        #[arg(long, conflicts_with = "tau", required_unless_present = "tau")]
        gamma: Option<String>,
        /// Comma-separated sampling periods
        #[arg(long)]
        tau: Option<String>,
    },
    /// Check recorded traces against the certified properties
    Verify {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Certified decay rate; searched from the trace's alpha when omitted
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c_omega: f64,
        #[arg(long)]
        json: bool,
    },
}

fn parse_list(field: &'static str, text: &str) -> etm_wave::Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::invalid(field, format!("not a number: '{s}'"))))
        .collect()
}

fn run(cli: Cli) -> etm_wave::Result<ExitCode> {
    match cli.command {
        Command::Certify {
            alpha,
            c_omega,
            paper_point,
            epsilon,
            delta,
            lambda1,
            lambda2,
            gamma,
            json,
        } => {
            let explicit = if paper_point {
                Some(CertificateParams {
                    alpha,
                    ..CertificateParams::reference_point()
                })
            } else {
                epsilon.map(|epsilon| CertificateParams {
                    alpha,
                    epsilon,
                    delta: delta.unwrap_or_default(),
                    lambda1: lambda1.unwrap_or_default(),
                    lambda2: lambda2.unwrap_or_default(),
                    gamma: gamma.unwrap_or_default(),
                    c_omega,
                })
            };
            let out = cmd_certify(alpha, c_omega, explicit)?;
            if json {
                println!("{}", out.report.to_json());
            } else {
                print!("{}", out.render());
            }
        }
        Command::Simulate(args) => {
            let out = cmd_simulate(&args.load()?)?;
            let t = &out.output.trace;
            println!(
                "policy={} N_up={} E(0)={} E(T)={}",
                t.meta.policy,
                t.n_up(),
                t.meta.e0,
                t.final_energy()
            );
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Compare(args) => {
            let out = cmd_compare(&args.load()?)?;
            print!("{}", out.render());
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep { config, gamma, tau } => {
            let sweep = match (gamma, tau) {
                (Some(g), _) => SweepKind::Gamma(parse_list("gamma", &g)?),
                (None, Some(t)) => SweepKind::Tau(parse_list("tau", &t)?),
                (None, None) => unreachable!("clap requires one list"),
            };
            let out = cmd_sweep(&config.load()?, &sweep)?;
            print!("{}", out.render());
            println!("wrote {}", out.files[0].display());
        }
        Command::Verify {
            traces,
            delta,
            c_omega,
            json,
        } => {
            let reports = cmd_verify(&traces, delta, c_omega)?;
            let mut ok = true;
            for (path, report) in &reports {
                if json {
                    println!("{}", report.to_json());
                } else {
                    println!("{}", path.display());
                    print!("{}", report.render_table());
                }
                ok &= report.all_hard_passed();
            }
            if !ok {
                eprintln!("verification failed");
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e @ Error::InvalidInput { .. }) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
