//! mu = inf-convolution of r^2 and sqrt(r): convex up to rbar, concave after.

use freedisc::phi_family::{mu_envelope, PhiSpec, PsiSpec};

fn main() -> freedisc::Result<()> {
    let rep = mu_envelope(&PhiSpec::power(2.0)?, &PsiSpec::power(0.5)?, 2.0, 201, 4001, 1e-8)?;
    println!("rbar = {:.4}", rep.rbar);
    println!("convex below {}, concave above {}, monotone {}", rep.convex_ok_below, rep.concave_ok_above, rep.monotone);
    for (r, m) in rep.samples.iter().step_by(25) {
        println!("mu({r:.2}) = {m:.6}   r^2 = {:.6}", r * r);
    }
    Ok(())
}
