// Searches for a decay certificate at several damping gains.

use etm_wave::certificate::{build_phi, find_feasible, max_decay_rate, SearchOptions};

pub fn run_example() -> etm_wave::Result<()> {
    let opts = SearchOptions::default();
    println!("{:>6} {:>8} {:>8} {:>10} {:>10} {:>12} {:>10}", "alpha", "epsilon", "delta", "lambda1", "lambda2", "lambda_max", "delta*");
    for alpha in [0.1, 0.5, 1.0, 2.0, 10.0] {
        let report = find_feasible(alpha, 1.0, &opts)?;
        let p = report.params;
        let (best, _) = max_decay_rate(alpha, 1.0, &opts)?;
        let lmax = build_phi(&p)?.max_eigenvalue();
        println!(
            "{alpha:>6} {:>8.4} {:>8.4} {:>10.4} {:>10.4} {lmax:>12.3e} {best:>10.4}",
            p.epsilon, p.delta, p.lambda1, p.lambda2
        );
        assert!(report.feasible && lmax < -1e-9);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
