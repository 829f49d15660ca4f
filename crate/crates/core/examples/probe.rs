//! Sampled checks of the structural hypotheses for each family.

use freedisc::phi_family::{probe_hypotheses, PhiEpsFamily, SamplingPlan};

fn main() -> freedisc::Result<()> {
    let plan = SamplingPlan::default();
    for fam in [PhiEpsFamily::ArctanMs, PhiEpsFamily::Power(2.0), PhiEpsFamily::Rational32, PhiEpsFamily::Linear] {
        let rep = probe_hypotheses(&fam, &plan)?;
        println!("{}", fam.name());
        print!("{rep}");
        if let Some(b) = rep.bound_for(2.0) {
            println!("  M = {}: phi_eps(r) >= {:.3} r - {:.3}", b.m, b.h, b.k);
        }
    }
    Ok(())
}
