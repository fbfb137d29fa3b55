// Continuous, event-triggered, fixed and periodic controllers on the same
// data. Writes the combined energy and control-norm CSVs.

use etm_wave::config::ExperimentConfig;
use etm_wave::experiment::cmd_compare;

pub fn run_example() -> etm_wave::Result<()> {
    let cfg = ExperimentConfig {
        out_dir: std::env::temp_dir().join("etm-wave-examples").join("compare"),
        ..ExperimentConfig::default()
    };
    let out = cmd_compare(&cfg)?;
    print!("{}", out.render());
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
