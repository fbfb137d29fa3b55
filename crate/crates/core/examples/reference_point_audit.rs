// Audits the multiplier tuple quoted with the reference experiment and shows
// which diagonal entries rule out negative definiteness.

use etm_wave::certificate::{build_phi, decompose_phi, offending_diagonal, recompose, CertificateParams, FeasibilityReport};

pub fn run_example() -> etm_wave::Result<()> {
    let p = CertificateParams::reference_point();
    let phi = build_phi(&p)?;
    println!("Phi =\n{phi}");
    let (m1, m2, m3) = decompose_phi(&p)?;
    assert_eq!(recompose(&m1, &m2, &m3, p.lambda1, p.lambda2), phi);

    let report = FeasibilityReport::audit(&p)?;
    print!("{}", report.to_key_value());
    for (i, v) in offending_diagonal(&phi) {
        println!("offending entry ({},{}) = {v}", i + 1, i + 1);
    }
    assert!(!report.feasible);
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
