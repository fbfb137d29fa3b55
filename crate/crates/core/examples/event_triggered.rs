// Certified event-triggered run on `(0, π)` with `z₀ = sin x`, `z₁ = sin 2x`,
// followed by the full verification report.

use etm_wave::analysis::{verify_trace, CertifiedRate};
use etm_wave::certificate::{find_feasible, SearchOptions};
use etm_wave::config::ExperimentConfig;
use etm_wave::simulation::{simulate, SimulationSetup};
use etm_wave::trigger::ControllerPolicy;

pub fn run_example() -> etm_wave::Result<()> {
    let cfg = ExperimentConfig::default();
    let cert = find_feasible(cfg.alpha, cfg.c_omega(), &SearchOptions::default())?.params;
    let policy = ControllerPolicy::event_triggered(cfg.alpha, cert.gamma);
    let setup = SimulationSetup::new(cfg.grid()?, policy, cfg.horizon).with_lyapunov(cert.epsilon);
    let out = simulate(&setup, cfg.initial_state()?)?;

    println!("gamma={} epsilon={} delta={}", cert.gamma, cert.epsilon, cert.delta);
    println!("N_up={} E(0)={:.6} E(T)={:.3e}", out.trace.n_up(), out.trace.meta.e0, out.trace.final_energy());
    for e in out.events.iter().take(5) {
        println!("  event k={} t={:.4} dwell={:?}", e.k, e.t, e.dwell);
    }
    let report = verify_trace(
        &out.trace,
        CertifiedRate {
            delta: cert.delta,
            c_omega: cert.c_omega,
        },
    )?;
    print!("{}", report.render_table());
    assert!(report.all_hard_passed());
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
