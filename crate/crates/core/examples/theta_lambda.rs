//! The discrete minimum problem Theta(eps, alpha, beta) and its limit
//! lambda(alpha, beta), exhaustive search against the structured solver.

use freedisc::phi_family::{lambda_eval, n_eps, theta_bruteforce, theta_structured, PhiEpsFamily};

fn main() -> freedisc::Result<()> {
    let fam = PhiEpsFamily::ArctanMs;
    let (phi, psi) = fam.limit_pair();
    let (alpha, beta) = (1.0, 2.0);
    let lambda = lambda_eval(&phi, &psi, alpha, beta, 4096)?.to_f64();
    println!("lambda({alpha}, {beta}) = {lambda:.6}");
    for div in [1.0, 2.0, 4.0, 50.0, 1000.0, 10000.0] {
        let eps = beta / div;
        let st = theta_structured(&fam, eps, alpha, beta, 4096)?;
        let brute = if n_eps(eps, beta) <= 4 {
            format!("{:.8}", theta_bruteforce(&fam, eps, alpha, beta, 601)?)
        } else {
            "-".to_string()
        };
        println!("eps = {eps:<8} N = {:<5} Theta = {st:.8}  brute = {brute}  Theta - lambda = {:+.2e}", n_eps(eps, beta), st - lambda);
    }
    Ok(())
}
