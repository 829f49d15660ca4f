//! Sphere constants c_{p,n} and kernel moments j_alpha.

use freedisc::kernels::{c_pn, Kernel, Profile};

fn main() -> freedisc::Result<()> {
    for n in [1, 2] {
        for p in [0.0, 1.0, 2.0] {
            println!("c_{{{p},{n}}} = {:.12}", c_pn(p, n)?);
        }
    }
    for (name, profile) in [
        ("indicator:1", Profile::Indicator(1.0)),
        ("gaussian", Profile::Gaussian),
        ("exponential", Profile::Exponential),
    ] {
        let k = Kernel::new(profile, 2, 1.0)?;
        let js: Vec<String> = [1.0, 2.0, 3.0].iter().map(|&a| k.j_alpha(a).map(|j| format!("{j:.8}"))).collect::<Result<_, _>>()?;
        println!("{name:<12} R = {:<6} j_1..3 = {}  omega = {:.8}", k.radius(), js.join(", "), k.omega());
    }
    Ok(())
}
