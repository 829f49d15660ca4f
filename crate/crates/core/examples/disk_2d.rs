//! Kernel-weighted F_eps of the unit-disk indicator against its limit
//! (pi/2) c_{1,2} j_3 2 pi = 4 pi^2 / 3.

use freedisc::energy_nd::{f_eps_nd, AnalyticField2D, Lattice, Rect, StencilQuadrature};
use freedisc::kernels::Kernel;
use freedisc::limit_energy::{target_limit, Descriptor, Example, PiecewiseField2D, Quad2D};
use freedisc::numeric::richardson;
use freedisc::phi_family::PhiEpsFamily;

fn main() -> freedisc::Result<()> {
    let k = Kernel::indicator(1.0, 2, 1.0)?;
    let q = StencilQuadrature::new(&k, k.radius() / 8.0)?;
    let lat = Lattice::cells(&Rect::square(1.25), 128)?;
    let u = AnalyticField2D::disk([0.0, 0.0], 1.0, 1.0)?;
    let eps = [0.2, 0.1, 0.05];
    let mut vals = Vec::new();
    for &e in &eps {
        let v = f_eps_nd(&u, &PhiEpsFamily::ArctanMs, e, &q, &lat)?.to_f64();
        println!("eps = {e:<5} F = {v:.5}");
        vals.push(v);
    }
    let exact = PiecewiseField2D::disk([0.0, 0.0], 1.0, 1.0, 4096)?;
    let target = target_limit(Example::MumfordShah, &k, Descriptor::TwoD(&exact, Quad2D::default()))?.to_f64();
    let l = richardson(&eps, &vals, 1.0).expect("three samples");
    println!("extrapolated {l:.4}, limit {target:.4}, relative gap {:.3}", (l - target).abs() / target);
    Ok(())
}
