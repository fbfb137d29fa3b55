// Writes a trace to CSV, reads it back and checks that verification is
// unchanged.

use etm_wave::analysis::{verify_trace, CertifiedRate};
use etm_wave::config::ExperimentConfig;
use etm_wave::experiment::cmd_simulate;
use etm_wave::io::read_trace;

pub fn run_example() -> etm_wave::Result<()> {
    let cfg = ExperimentConfig {
        out_dir: std::env::temp_dir().join("etm-wave-examples").join("roundtrip"),
        ..ExperimentConfig::default()
    };
    let out = cmd_simulate(&cfg)?;
    let back = read_trace(&out.files[0])?;
    assert_eq!(back, out.output.trace);
    let cert = CertifiedRate {
        delta: out.certificate.delta,
        c_omega: out.certificate.c_omega,
    };
    let a = verify_trace(&out.output.trace, cert)?;
    let b = verify_trace(&back, cert)?;
    assert_eq!(a, b);
    print!("{}", b.render_table());
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
