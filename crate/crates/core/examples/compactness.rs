//! Minimizers along a decreasing eps schedule stay bounded in energy and
//! settle in L1; the mollifier moves a field by O(delta).

use freedisc::energy_nd::{mollify, AnalyticField2D, Field2D, StencilQuadrature};
use freedisc::kernels::Kernel;
use freedisc::minimizer::{eps_continuation, Data, DenoiseProblem, SolveOptions};
use freedisc::phi_family::PhiEpsFamily;

fn main() -> freedisc::Result<()> {
    let disk = AnalyticField2D::disk([0.0, 0.0], 0.3, 1.0)?;
    let n = 33;
    let step = 1.0 / (n - 1) as f64;
    let g = Field2D::from_fn([-0.5, -0.5], [step, step], n, n, |p| {
        use freedisc::energy_nd::Field;
        disk.eval(p) + 0.05 * ((37.0 * p[0]).sin() * (53.0 * p[1]).cos())
    })?;
    let k = Kernel::indicator(1.0, 2, 1.0)?;
    for delta in [0.2, 0.1, 0.05] {
        let q = StencilQuadrature::new(&k, 0.25)?;
        let c = mollify(&g, &k, delta, &q)?;
        println!("delta = {delta:<5} ||C u - u||_1 = {:.5}", c.l1_distance(&g, None)?);
    }
    let q = StencilQuadrature::new(&k, 0.5)?;
    let p = DenoiseProblem::new(Data::Image(g), PhiEpsFamily::ArctanMs, k, 0.4, 5.0, q)?;
    let run = eps_continuation(&p, &[0.4, 0.2, 0.1], SolveOptions { max_iters: 60, ..SolveOptions::default() })?;
    for (i, e) in run.eps.iter().enumerate() {
        println!("eps = {e:<4} F + sup = {:.4}", run.records[i]);
    }
    println!("L1 steps between minimizers {:?}", run.l1_steps);
    Ok(())
}
