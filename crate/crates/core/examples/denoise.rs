//! Denoising a noisy step by descent on F_eps(u) + kappa ||u - g||^2.

use freedisc::energy_1d::{Interp, Signal1D};
use freedisc::energy_nd::StencilQuadrature;
use freedisc::kernels::Kernel;
use freedisc::minimizer::{solve, steepest_step, Data, DenoiseProblem, SolveOptions};
use freedisc::phi_family::PhiEpsFamily;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn main() -> freedisc::Result<()> {
    let mut rng = StdRng::seed_from_u64(7);
    let g: Vec<f64> = (0..101)
        .map(|i| if i > 50 { 1.0 } else { 0.0 } + 0.1 * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let data = Data::Signal(Signal1D::new(-0.5, 0.01, g, Interp::Linear)?);
    let k = Kernel::indicator(1.0, 1, 1.0)?;
    let q = StencilQuadrature::new(&k, 0.2)?;
    let p = DenoiseProblem::new(data, PhiEpsFamily::ArctanMs, k, 0.05, 5.0, q)?;
    let st = solve(&p, SolveOptions::default())?;
    println!("{:?} after {} iterations, energy {:.6} -> {:.6}", st.status, st.iters, st.energy[0], st.final_energy());
    println!("jump between samples {:?} and the next", steepest_step(&st.u));
    let rough = |u: &[f64]| u.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
    println!("total variation {:.3} (data) -> {:.3} (minimizer)", rough(p.data().values()), rough(&st.u));
    Ok(())
}
