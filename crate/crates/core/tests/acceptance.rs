//! Acceptance criteria, one line each. Two criteria are false as stated;
//! they are run at their stated tolerances, reported as FAIL, and followed
//! by a labelled check of the corrected statement. The process fails when
//! any outcome differs from the recorded expectation.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use freedisc::energy_1d::{f_eps_1d, AnalyticSignal1D, Domain1D, Interp, Quad1D, Signal1D};
use freedisc::energy_nd::{f_eps_nd, mollify, AnalyticField2D, Field2D, Lattice, Rect, StencilQuadrature};
use freedisc::kernels::{c_pn, Kernel};
use freedisc::limit_energy::{limit_energy_1d, target_limit, Descriptor, Example, PiecewiseField2D, Quad2D, Sbv1D};
use freedisc::minimizer::{discrete_energy, gradient, solve, steepest_step, Data, DenoiseProblem, SolveOptions};
use freedisc::numeric::{linspace, richardson};
use freedisc::phi_family::{
    fit_linear_bound, lambda_eval, mu_envelope, theta_bruteforce, theta_structured, PhiEpsFamily, PhiSpec, PsiSpec,
    SamplingPlan,
};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fin(e: freedisc::Energy) -> f64 {
    e.finite().expect("finite energy")
}

fn c1() -> Outcome {
    let u = AnalyticSignal1D::heaviside(1.0);
    let mut worst = 0.0f64;
    let mut last = 0.0;
    for eps in [1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3] {
        let v = fin(f_eps_1d(&u, &PhiEpsFamily::ArctanMs, eps, Domain1D::WholeLine, Quad1D::default()).unwrap().value);
        worst = worst.max((v - (1.0 / eps).atan()).abs());
        last = v;
    }
    let gap = (last - FRAC_PI_2).abs();
    outcome(worst < 1e-8 && gap < 1e-3, format!("max |F - arctan(1/eps)| = {worst:.2e}, |F(1e-3) - pi/2| = {gap:.2e}"))
}

fn c2() -> Outcome {
    let mut worst = 0.0f64;
    let mut extrap = 0.0f64;
    let eps = [0.5, 0.25, 0.1, 0.05, 0.01];
    for a in [1.0, 2.0] {
        let u = AnalyticSignal1D::ramp(a);
        let vals: Vec<f64> = eps
            .iter()
            .map(|&e| fin(f_eps_1d(&u, &PhiEpsFamily::Power(2.0), e, Domain1D::WholeLine, Quad1D::default()).unwrap().value))
            .collect();
        for (e, v) in eps.iter().zip(&vals) {
            worst = worst.max((v - a * a * (1.0 - e / 3.0)).abs());
        }
        let l = richardson(&eps[2..], &vals[2..], 1.0).unwrap();
        extrap = extrap.max((l - a * a).abs());
    }
    outcome(worst < 1e-6 && extrap < 1e-4, format!("max |F - a^2(1 - eps/3)| = {worst:.2e}, extrapolation error {extrap:.2e}"))
}

struct Disk {
    limit: f64,
    corrected: f64,
    stated: f64,
}

fn disk_run() -> Disk {
    let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
    let q = StencilQuadrature::new(&k, k.radius() / 16.0).unwrap();
    let lat = Lattice::cells(&Rect::square(1.25), 256).unwrap();
    let u = AnalyticField2D::disk([0.0, 0.0], 1.0, 1.0).unwrap();
    let eps = [0.2, 0.1, 0.05];
    let vals: Vec<f64> = eps.iter().map(|&e| fin(f_eps_nd(&u, &PhiEpsFamily::ArctanMs, e, &q, &lat).unwrap())).collect();
    let limit = richardson(&eps, &vals, 1.0).unwrap();
    let stated = FRAC_PI_2 * c_pn(0.0, 2).unwrap() * k.j_alpha(3.0).unwrap() * 2.0 * PI;
    let exact = PiecewiseField2D::disk([0.0, 0.0], 1.0, 1.0, 4096).unwrap();
    let corrected = fin(target_limit(Example::MumfordShah, &k, Descriptor::TwoD(&exact, Quad2D::default())).unwrap());
    Disk { limit, corrected, stated }
}

fn c3(d: &Disk) -> Outcome {
    let rel = (d.limit - d.stated).abs() / d.stated;
    outcome(rel < 0.05, format!("extrapolated {:.4} vs (pi/2) c_0,2 j_3 2pi = {:.4}, rel error {rel:.3}", d.limit, d.stated))
}

fn c3_corrected(d: &Disk) -> Outcome {
    let rel = (d.limit - d.corrected).abs() / d.corrected;
    outcome(rel < 0.05, format!("extrapolated {:.4} vs (pi/2) c_1,2 j_3 2pi = {:.4}, rel error {rel:.3}", d.limit, d.corrected))
}

fn random_sbv(rng: &mut StdRng) -> Sbv1D {
    let pieces = rng.random_range(1..=4);
    let mut knots = vec![-1.0];
    for i in 1..pieces {
        knots.push(-1.0 + 2.0 * i as f64 / pieces as f64 + rng.random_range(-0.2..0.2) / pieces as f64);
    }
    knots.push(1.0);
    let slopes = (0..pieces).map(|_| rng.random_range(-2.0..2.0)).collect();
    let jumps = (0..rng.random_range(0..=3))
        .map(|_| (rng.random_range(-0.95..0.95), rng.random_range(-2.0..2.0)))
        .collect();
    Sbv1D::from_heights(knots, slopes, jumps, rng.random_range(-1.0..1.0)).unwrap()
}

fn c4() -> Outcome {
    let fam = PhiEpsFamily::constructed(PhiSpec::power(2.0).unwrap(), PsiSpec::power(0.5).unwrap(), 1.0).unwrap();
    let (phi, psi) = fam.limit_pair();
    let mut rng = StdRng::seed_from_u64(20240601);
    let eps: Vec<f64> = (0..10).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 9.0)).collect();
    let quad = Quad1D {
        step: Some(1.0),
        min_cells: 8,
    };
    let mut worst = f64::NEG_INFINITY;
    let mut fails = 0;
    for _ in 0..50 {
        let u = random_sbv(&mut rng);
        let lim = fin(limit_energy_1d(&u, &phi, &psi));
        for &e in &eps {
            let f = fin(f_eps_1d(&u, &fam, e, Domain1D::WholeLine, quad).unwrap().value);
            let slack = f - (lim * (1.0 + 1e-4) + 1e-6);
            worst = worst.max(slack);
            if slack > 0.0 {
                fails += 1;
            }
        }
    }
    outcome(fails == 0, format!("500 pairs, {fails} violations, max F - bound = {worst:.2e}"))
}

struct ThetaStats {
    mismatch: f64,
    worst_gap: f64,
    worst_at: (String, f64, f64, f64),
    late_gap: f64,
}

fn theta_run() -> ThetaStats {
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let constructed = PhiEpsFamily::constructed(PhiSpec::power(2.0).unwrap(), PsiSpec::power(0.5).unwrap(), 1.0).unwrap();
    let mut s = ThetaStats {
        mismatch: 0.0,
        worst_gap: f64::INFINITY,
        worst_at: (String::new(), 0.0, 0.0, 0.0),
        late_gap: f64::INFINITY,
    };
    for fam in [PhiEpsFamily::ArctanMs, constructed] {
        let m = if matches!(fam, PhiEpsFamily::Constructed(_)) { 256 } else { 4096 };
        let (phi, psi) = fam.limit_pair();
        for &a in &grid {
            for &b in &grid {
                for n in 1..=4 {
                    let e = b / n as f64;
                    let st = theta_structured(&fam, e, a, b, m).unwrap();
                    let bf = theta_bruteforce(&fam, e, a, b, 601).unwrap();
                    s.mismatch = s.mismatch.max((st - bf).abs() / bf.abs().max(1e-300));
                }
                let l = fin(lambda_eval(&phi, &psi, a, b, 4096).unwrap());
                for div in [50.0, 100.0, 200.0] {
                    let e = b / div;
                    let gap = theta_structured(&fam, e, a, b, m).unwrap() - l;
                    if gap < s.worst_gap {
                        s.worst_gap = gap;
                        s.worst_at = (fam.name().to_string(), e, a, b);
                    }
                }
                for div in [1000.0, 2000.0] {
                    let gap = theta_structured(&fam, b / div, a, b, m).unwrap() - l;
                    s.late_gap = s.late_gap.min(gap);
                }
            }
        }
    }
    s
}

fn c5(t: &ThetaStats) -> Outcome {
    let (f, e, a, b) = &t.worst_at;
    outcome(
        t.mismatch < 1e-4 && t.worst_gap >= -1e-3,
        format!(
            "structured vs brute max rel {:.2e}; min Theta - lambda = {:.2e} ({f}, eps={e}, alpha={a}, beta={b})",
            t.mismatch, t.worst_gap
        ),
    )
}

fn c5_liminf(t: &ThetaStats) -> Outcome {
    outcome(t.late_gap >= -1e-3, format!("min Theta - lambda over eps in {{beta/1000, beta/2000}} = {:.2e}", t.late_gap))
}

/// Global minimum of `l^2 + c sqrt(r - l)` over `[0, r]` from the endpoints
/// and the roots of `4 s^3 - 4 r s + c = 0`, `s = sqrt(r - l)`.
fn quad_root_min(r: f64, c: f64) -> f64 {
    let f = |l: f64| l * l + c * (r - l).max(0.0).sqrt();
    let mut best = f(0.0).min(f(r));
    let g = |s: f64| 4.0 * s * s * s - 4.0 * r * s + c;
    let top = r.sqrt();
    let n = 2000;
    for i in 0..n {
        let (mut lo, mut hi) = (top * i as f64 / n as f64, top * (i + 1) as f64 / n as f64);
        if g(lo) * g(hi) > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        best = best.min(f(r - s * s));
    }
    best
}

fn c6() -> Outcome {
    let phi = PhiSpec::power(2.0).unwrap();
    let psi = PsiSpec::power(0.5).unwrap();
    let rep = mu_envelope(&phi, &psi, 2.0, 401, 4001, 1e-8).unwrap();
    let oracle = rep.samples.iter().map(|(r, m)| (m - quad_root_min(*r, 1.0)).abs()).fold(0.0f64, f64::max);
    outcome(
        rep.rbar > 0.0 && rep.all_ok() && oracle < 1e-8,
        format!("rbar = {:.4}, shape checks {}, max |mu - oracle| = {oracle:.2e}", rep.rbar, rep.all_ok()),
    )
}

fn random_block_field(rng: &mut StdRng, step: f64) -> Field2D {
    let n = (1.0 / step).round() as usize + 1;
    let blocks = rng.random_range(2..=5);
    let values: Vec<f64> = (0..blocks * blocks).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field2D::from_fn([-0.5, -0.5], [step, step], n, n, |p| {
        if p[0].abs() > 0.4 || p[1].abs() > 0.4 {
            return 0.0;
        }
        let bi = (((p[0] + 0.4) / 0.8 * blocks as f64) as usize).min(blocks - 1);
        let bj = (((p[1] + 0.4) / 0.8 * blocks as f64) as usize).min(blocks - 1);
        values[bj * blocks + bi]
    })
    .unwrap()
}

fn c7() -> Outcome {
    let fam = PhiEpsFamily::ArctanMs;
    let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
    let step = 0.0125;
    let mut rng = StdRng::seed_from_u64(5150);
    let fields: Vec<Field2D> = (0..20).map(|_| random_block_field(&mut rng, step)).collect();
    let mut worst_ratio = 0.0f64;
    let mut worst_mono = f64::NEG_INFINITY;
    let mut ok = true;
    for delta in [0.1, 0.05] {
        let q = StencilQuadrature::new(&k, step / delta).unwrap();
        let mut dists: Vec<f64> = q.offsets().iter().map(|(xi, _)| delta * xi[0].hypot(xi[1])).collect();
        dists.sort_by(f64::total_cmp);
        dists.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let plan = SamplingPlan {
            eps: dists,
            ..SamplingPlan::default()
        };
        let w0 = q.total_weight();
        let reach = q.offsets().iter().fold(0.0f64, |m, (xi, _)| m.max(xi[0].hypot(xi[1])));
        for u in &fields {
            let lat = u.lattice();
            let m = 2.0 * u.sup_norm();
            let b = fit_linear_bound(&fam, &plan, m).expect("Cpt1 bound");
            let f_delta = fin(f_eps_nd(u, &fam, delta, &q, &lat).unwrap());
            let c = mollify(u, &k, delta, &q).unwrap();
            let (nx, ny) = u.dims();
            let area = (nx * ny) as f64 * step * step;
            let lhs = c.l1_distance(u, None).unwrap();
            let rhs = reach / (b.h * w0) * (w0 * b.k * area + f_delta) * delta;
            worst_ratio = worst_ratio.max(lhs / rhs);
            ok &= lhs <= rhs;
            for kk in [2.0, 3.0] {
                let f_k = fin(f_eps_nd(u, &fam, kk * delta, &q, &lat).unwrap());
                let slack = f_k - (f_delta + 1e-6 * (1.0 + f_delta));
                worst_mono = worst_mono.max(slack);
                ok &= slack <= 0.0;
            }
        }
    }
    outcome(ok, format!("max L1 lhs/rhs = {worst_ratio:.3}, max F_k - F_1 - tol = {worst_mono:.2e}"))
}

fn c8() -> Outcome {
    let eps = linspace(-4.0, 0.0, 100);
    let rs = linspace(-3.0, 4.0, 100);
    let mut worst = f64::INFINITY;
    for &le in &eps {
        let e = 10f64.powf(le);
        for &lr in &rs {
            let r = 10f64.powf(lr);
            let lhs = PhiEpsFamily::Rational32.eval(e, r).unwrap();
            let rhs = quad_root_min(r, 1.0 / e.sqrt()) / 9.0;
            worst = worst.min(lhs / rhs);
        }
    }
    outcome(worst >= 1.0, format!("min phi_eps / bound over 100 x 100 grid = {worst:.4}"))
}

fn c9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(99);
    let n = 101;
    let noisy: Vec<f64> = (0..n)
        .map(|i| {
            let x = -0.5 + 0.01 * i as f64;
            (if x > 0.005 { 1.0 } else { 0.0 }) + 0.1 * (2.0 * rng.random::<f64>() - 1.0)
        })
        .collect();
    let data = Data::Signal(Signal1D::new(-0.5, 0.01, noisy, Interp::Linear).unwrap());
    let k = Kernel::indicator(1.0, 1, 1.0).unwrap();
    let q = StencilQuadrature::new(&k, 0.2).unwrap();
    let p = DenoiseProblem::new(data, PhiEpsFamily::ArctanMs, k, 0.05, 5.0, q).unwrap();

    let u: Vec<f64> = p.data().values().iter().map(|v| v + 0.05 * rng.random::<f64>()).collect();
    let g = gradient(&p, &u).unwrap();
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let i = rng.random_range(0..n);
        let h = 1e-5;
        let (mut a, mut b) = (u.clone(), u.clone());
        a[i] += h;
        b[i] -= h;
        let fd = (discrete_energy(&p, &a).unwrap() - discrete_energy(&p, &b).unwrap()) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / scale.max(g[i].abs()));
    }
    let st = solve(&p, SolveOptions::default()).unwrap();
    let monotone = st.energy.windows(2).all(|w| w[1] <= w[0]);
    let at = steepest_step(&st.u).unwrap();
    let located = (at as i64 - 50).abs() <= 1;
    outcome(
        worst < 1e-6 && monotone && located,
        format!("gradient rel error {worst:.2e}, jump recovered in cell {at} (true 50), monotone {monotone}, {} iterations", st.iters),
    )
}

fn c10() -> Outcome {
    let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
    let mut worst = 0.0f64;
    for (v, t) in [
        (c_pn(0.0, 2).unwrap(), 2.0 * PI),
        (c_pn(1.0, 2).unwrap(), 4.0),
        (c_pn(2.0, 2).unwrap(), PI),
    ] {
        worst = worst.max((v - t).abs());
    }
    for a in [1.0, 1.5, 2.0, 3.0, 4.0, 6.0] {
        worst = worst.max((k.j_alpha(a).unwrap() - 1.0 / a).abs());
    }
    outcome(worst < 1e-9, format!("max abs error {worst:.2e}"))
}

struct Runner {
    unexpected: usize,
}

impl Runner {
    fn run<T>(&mut self, id: &str, budget: u64, expected: bool, f: impl FnOnce() -> (Outcome, T)) -> T {
        let t0 = Instant::now();
        let (mut o, keep) = f();
        let took = t0.elapsed();
        if took > Duration::from_secs(budget) {
            o.pass = false;
            o.detail.push_str(&format!("; over the {budget}s budget"));
        }
        let mark = if o.pass { "PASS" } else { "FAIL" };
        let note = match (o.pass, expected) {
            (false, false) => " (expected: the statement is false as written, see the corrected line)",
            (true, false) => " (UNEXPECTED: recorded as a known failure)",
            (false, true) => " (UNEXPECTED)",
            (true, true) => "",
        };
        if o.pass != expected {
            self.unexpected += 1;
        }
        println!("criterion {id:>3}: {mark} [{:>6.2}s] {}{note}", took.as_secs_f64(), o.detail);
        keep
    }

    fn check(&mut self, id: &str, budget: u64, f: impl FnOnce() -> Outcome) {
        self.run(id, budget, true, || (f(), ()));
    }
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut r = Runner { unexpected: 0 };
    r.check("1", 1, c1);
    r.check("2", 1, c2);
    let disk = r.run("3", 60, false, || {
        let d = disk_run();
        (c3(&d), d)
    });
    r.check("3c", 60, || c3_corrected(&disk));
    r.check("4", 10, c4);
    let theta = r.run("5", 30, false, || {
        let t = theta_run();
        (c5(&t), t)
    });
    r.check("5c", 30, || c5_liminf(&theta));
    r.check("6", 5, c6);
    r.check("7", 60, c7);
    r.check("8", 5, c8);
    r.check("9", 30, c9);
    r.check("10", 1, c10);
    if r.unexpected > 0 {
        eprintln!("{} criteria did not match their recorded outcome", r.unexpected);
        std::process::exit(1);
    }
}
