//! F_eps of a Heaviside step under arctanMS: arctan(1/eps), tending to pi/2.

use freedisc::energy_1d::{f_eps_1d_sweep, AnalyticSignal1D, Domain1D, Quad1D};
use freedisc::numeric::richardson;
use freedisc::phi_family::PhiEpsFamily;

fn main() -> freedisc::Result<()> {
    let u = AnalyticSignal1D::heaviside(1.0);
    let eps = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let sweep = f_eps_1d_sweep(&u, &PhiEpsFamily::ArctanMs, &eps, Domain1D::WholeLine, Quad1D::default())?;
    for (e, est) in &sweep.rows {
        println!("eps = {e:<8} F = {:.10}  arctan(1/eps) = {:.10}", est.value.to_f64(), (1.0 / e).atan());
    }
    let l = richardson(&sweep.eps(), &sweep.values(), 1.0).expect("three samples");
    println!("trend {:?}, extrapolated {l:.6}, pi/2 = {:.6}", sweep.trend, std::f64::consts::FRAC_PI_2);
    Ok(())
}
