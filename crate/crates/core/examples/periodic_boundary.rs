// Periodic sampling around `τ = T/N_up`: where does the loop stop decaying?

use etm_wave::config::ExperimentConfig;
use etm_wave::experiment::{cmd_sweep, SweepKind};

pub fn run_example() -> etm_wave::Result<()> {
    let cfg = ExperimentConfig {
        out_dir: std::env::temp_dir().join("etm-wave-examples").join("tau"),
        ..ExperimentConfig::default()
    };
    let taus = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0].map(|k| k * 0.27).to_vec();
    let out = cmd_sweep(&cfg, &SweepKind::Tau(taus))?;
    print!("{}", out.render());
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
