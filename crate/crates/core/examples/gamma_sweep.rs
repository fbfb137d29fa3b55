// Update count against the trigger threshold.

use etm_wave::config::ExperimentConfig;
use etm_wave::experiment::{cmd_sweep, SweepKind};

pub fn run_example() -> etm_wave::Result<()> {
    let cfg = ExperimentConfig {
        out_dir: std::env::temp_dir().join("etm-wave-examples").join("gamma"),
        ..ExperimentConfig::default()
    };
    let out = cmd_sweep(&cfg, &SweepKind::Gamma(vec![0.005, 0.01, 0.02, 0.04, 0.08, 0.16]))?;
    print!("{}", out.render());
    assert!(out.rows.windows(2).all(|w| w[1].n_up <= w[0].n_up));
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
