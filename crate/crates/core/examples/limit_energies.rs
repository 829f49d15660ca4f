//! Limit functionals on explicit piecewise functions.

use freedisc::kernels::Kernel;
use freedisc::limit_energy::{limit_energy_1d, target_limit, total_variation_1d, Descriptor, Example, Sbv1D};
use freedisc::phi_family::{PhiSpec, PsiSpec};

fn main() -> freedisc::Result<()> {
    // slope 2 on [0, 1] with a jump of height 4 at 0.5
    let u = Sbv1D::from_heights(vec![0.0, 1.0], vec![2.0], vec![(0.5, 4.0)], 0.0)?;
    print!("{u}");
    let e = limit_energy_1d(&u, &PhiSpec::power(2.0)?, &PsiSpec::power(0.5)?);
    println!("int |u'|^2 + sum sqrt|[u]| = {}", e.to_f64());
    println!("total variation = {}", total_variation_1d(&u));
    for ex in [Example::MumfordShah, Example::TotalVariation, Example::PowerBulk(2.0), Example::RootJump(2.0), Example::Rational] {
        let k = Kernel::indicator(1.0, 1, ex.kernel_weight())?;
        let t = target_limit(ex, &k, Descriptor::OneD(&u))?;
        println!("{ex:<10} limit = {t}");
    }
    Ok(())
}
