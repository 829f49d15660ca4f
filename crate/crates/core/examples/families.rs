//! phi_eps for every built-in family, and how it behaves as eps shrinks.

use freedisc::phi_family::{PhiEpsFamily, PhiSpec, PsiSpec};

fn main() -> freedisc::Result<()> {
    let families = [
        PhiEpsFamily::ArctanMs,
        PhiEpsFamily::Power(2.0),
        PhiEpsFamily::Root(2.0),
        PhiEpsFamily::Linear,
        PhiEpsFamily::Rational32,
        PhiEpsFamily::constructed(PhiSpec::power(2.0)?, PsiSpec::power(0.5)?, 1.0)?,
    ];
    let rs = [0.5, 2.0, 50.0];
    println!("{:<12} {:>8} {:>12} {:>12} {:>12}", "family", "eps", "r=0.5", "r=2", "r=50");
    for fam in &families {
        for eps in [0.1, 0.01] {
            let v: Vec<String> = rs.iter().map(|&r| fam.eval(eps, r).map(|x| format!("{x:12.5}"))).collect::<Result<_, _>>()?;
            println!("{:<12} {eps:>8} {}", fam.name(), v.join(" "));
        }
    }
    // the jump part: eps phi_eps(h / eps) approaches psi(h)
    let ms = PhiEpsFamily::ArctanMs;
    for eps in [1e-1, 1e-2, 1e-3] {
        println!("arctanMS eps={eps:<6} eps*phi_eps(1/eps) = {:.6}", eps * ms.eval(eps, 1.0 / eps)?);
    }
    Ok(())
}
