//! Experiment runners. Each resolves its keys, rejects unknown ones, runs,
//! then writes `results.csv`, `meta.txt` and `summary.txt` atomically.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::energy::Energy;
use crate::energy_1d::{f_eps_1d_sweep, Domain1D, Quad1D, Signal1D};
use crate::energy_nd::{f_eps_nd, f_eps_nd_1d, f_eps_nd_on, Field2D, Lattice, Rect, Region, StencilQuadrature};
use crate::error::{Error, Result};
use crate::kernels::{c_pn, Kernel, Profile};
use crate::lab::config::Config;
use crate::lab::io::{self, fmt_f, Table};
use crate::lab::registry::{self, FieldInput, SignalInput};
use crate::limit_energy::{limit_energy_1d, target_limit, Descriptor, Example, Quad2D};
use crate::minimizer::{eps_continuation, solve, steepest_step, Data, DenoiseProblem, SolveOptions, Status};
use crate::numeric::richardson;
use crate::phi_family::{
    lambda_eval, mu_envelope, n_eps, probe_hypotheses, theta_bruteforce, theta_structured, PhiEpsFamily, PhiSpec, PsiSpec,
    SamplingPlan,
};

pub const EXPERIMENTS: [&str; 8] = ["compactness", "constants", "denoise", "envelope", "probe", "sweep1d", "sweepnd", "theta"];

const DEFAULT_EPS: [f64; 7] = [1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3];

/// Where a run wrote its files and what its summary says.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub summary: String,
}

struct Artifacts {
    results: Table,
    summary: String,
    /// Extra files `(name, contents)`.
    extra: Vec<(String, Extra)>,
    /// Reported after the files are written.
    failure: Option<Error>,
}

enum Extra {
    Signal(Signal1D),
    Field(Field2D),
}

/// Loads and runs the config at `path`.
pub fn run_file(path: &Path) -> Result<RunOutcome> {
    run_config(&Config::load(path)?)
}

pub fn run_config(cfg: &Config) -> Result<RunOutcome> {
    let kind: String = cfg.require("experiment")?;
    let out_raw: String = cfg.get("output")?.unwrap_or_else(|| "out".to_string());
    let output = cfg.path("output", &out_raw);
    let art = match kind.as_str() {
        "sweep1d" => sweep1d(cfg)?,
        "sweepnd" => sweepnd(cfg)?,
        "probe" => probe(cfg)?,
        "envelope" => envelope(cfg)?,
        "theta" => theta(cfg)?,
        "compactness" => compactness(cfg)?,
        "denoise" => denoise(cfg)?,
        "constants" => constants(cfg)?,
        other => {
            return Err(Error::config(
                "experiment",
                format!("unknown experiment `{other}`; expected one of {}", EXPERIMENTS.join(", ")),
            ))
        }
    };
    std::fs::create_dir_all(&output).map_err(|e| Error::io(&output, e))?;
    art.results.write(&output.join("results.csv"))?;
    io::write_atomic(&output.join("meta.txt"), cfg.resolved_text().as_bytes())?;
    io::write_atomic(&output.join("summary.txt"), art.summary.as_bytes())?;
    for (name, e) in &art.extra {
        let p = output.join(name);
        match e {
            Extra::Signal(s) => io::write_signal_csv(&p, s)?,
            Extra::Field(f) => io::write_field(&p, f)?,
        }
    }
    if let Some(e) = art.failure {
        return Err(e);
    }
    Ok(RunOutcome {
        output,
        summary: art.summary,
    })
}

fn fam_config(cfg: &Config, default: &str) -> Result<PhiEpsFamily> {
    registry::family(cfg, default)
}

fn kernel(cfg: &Config, dim: usize, weight: f64) -> Result<Kernel> {
    let profile: Profile = cfg.get_or("kernel", Profile::Indicator(1.0))?;
    let dim: usize = cfg.get_or("dim", dim)?;
    let weight: f64 = cfg.get_or("weight", weight)?;
    Kernel::new(profile, dim, weight).map_err(|e| Error::config("kernel", e.to_string()))
}

fn stencil(cfg: &Config, k: &Kernel) -> Result<StencilQuadrature> {
    let h: f64 = cfg.get_or("xi_step", k.radius() / 8.0)?;
    let r: f64 = cfg.get_or("radius", k.radius())?;
    StencilQuadrature::truncated(k, h, r).map_err(|e| Error::config("xi_step", e.to_string()))
}

fn floats(cfg: &Config, key: &str) -> Result<Option<Vec<f64>>> {
    cfg.list::<f64>(key)
}

fn energy_cell(e: Energy) -> String {
    fmt_f(e.to_f64())
}

/// Summary lines for a sweep: extrapolated limit and comparison with a target.
fn sweep_summary(kind: &str, eps: &[f64], values: &[f64], order: f64, target: std::result::Result<Energy, String>) -> String {
    let n = eps.len();
    let lo = n.saturating_sub(3);
    let limit = if values[lo..].iter().all(|v| v.is_finite()) {
        richardson(&eps[lo..], &values[lo..], order)
    } else {
        None
    };
    let mut s = format!("experiment = {kind}\norder = {order}\n");
    match limit {
        Some(l) => writeln!(s, "extrapolated = {}", fmt_f(l)).unwrap(),
        None => s.push_str("extrapolated = n/a\n"),
    }
    match target {
        Ok(t) => {
            writeln!(s, "target = {}", energy_cell(t)).unwrap();
            if let (Some(l), Energy::Finite(t)) = (limit, t) {
                writeln!(s, "abs_error = {}", fmt_f((l - t).abs())).unwrap();
                writeln!(s, "rel_error = {}", fmt_f((l - t).abs() / t.abs().max(f64::MIN_POSITIVE))).unwrap();
            }
        }
        Err(why) => writeln!(s, "target = n/a ({why})").unwrap(),
    }
    s
}

fn sweep1d(cfg: &Config) -> Result<Artifacts> {
    let sig = registry::signal(cfg, "signal")?;
    let fam = fam_config(cfg, "arctanMS")?;
    let eps = cfg.eps_list("eps", &DEFAULT_EPS)?;
    let order: f64 = cfg.get_or("order", 1.0)?;
    let omega = match cfg.get::<String>("domain")?.as_deref().map(str::trim) {
        None | Some("whole") => Domain1D::WholeLine,
        Some(s) => {
            let v: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::config("domain", e.to_string())))
                .collect::<Result<_>>()?;
            match v[..] {
                [a, b] if a < b => Domain1D::Interval(a, b),
                _ => return Err(Error::config("domain", "expected `whole` or `a,b` with a < b")),
            }
        }
    };
    let mut quad = Quad1D::default();
    quad.step = cfg.get::<f64>("quad_step")?;
    quad.min_cells = cfg.get_or("min_cells", quad.min_cells)?;
    cfg.check_unused()?;

    let sweep = f_eps_1d_sweep(sig.as_signal(), &fam, &eps, omega, quad)?;
    let mut t = Table::new(&["eps", "value", "error"]);
    for (e, est) in &sweep.rows {
        t.push(vec![fmt_f(*e), energy_cell(est.value), fmt_f(est.error)]);
    }
    let (phi, psi) = fam.limit_pair();
    let target = sig.exact().map_err(|e| e.to_string()).and_then(|u| match omega {
        Domain1D::WholeLine => Ok(limit_energy_1d(&u, &phi, &psi)),
        Domain1D::Interval(a, b) => {
            let (lo, hi) = crate::energy_1d::Signal::window(&u);
            let (a, b) = (a.max(lo), b.min(hi));
            if a < b {
                u.restrict(a, b).map(|r| limit_energy_1d(&r, &phi, &psi)).map_err(|e| e.to_string())
            } else {
                Ok(Energy::ZERO)
            }
        }
    });
    let mut summary = sweep_summary("sweep1d", &eps, &sweep.values(), order, target);
    writeln!(summary, "trend = {:?}", sweep.trend).unwrap();
    Ok(Artifacts {
        results: t,
        summary,
        extra: Vec::new(),
        failure: None,
    })
}

/// Closed-form example matching a family, if there is one.
fn example_for(fam: &PhiEpsFamily) -> Option<Example> {
    match fam {
        PhiEpsFamily::ArctanMs => Some(Example::MumfordShah),
        PhiEpsFamily::Rational32 => Some(Example::Rational),
        PhiEpsFamily::Linear => Some(Example::TotalVariation),
        PhiEpsFamily::Power(p) => Some(Example::PowerBulk(*p)),
        PhiEpsFamily::Root(p) => Some(Example::RootJump(*p)),
        PhiEpsFamily::Constructed(_) => None,
    }
}

fn parse_rect(cfg: &Config, key: &str) -> Result<Option<Rect>> {
    let Some(v) = floats(cfg, key)? else {
        return Ok(None);
    };
    match v[..] {
        [x0, x1, y0, y1] => Rect::new(x0, x1, y0, y1).map(Some).map_err(|e| Error::config(key, e.to_string())),
        [h] if h > 0.0 => Ok(Some(Rect::square(h))),
        _ => Err(Error::config(key, "expected `half` or `x0,x1,y0,y1`")),
    }
}

fn sweepnd(cfg: &Config) -> Result<Artifacts> {
    let fam = fam_config(cfg, "arctanMS")?;
    let example = match cfg.get::<Example>("example")? {
        Some(e) => Some(e),
        None => example_for(&fam),
    };
    let default_w = example.map(|e| e.kernel_weight()).unwrap_or(1.0);
    let dim_default = if cfg.has("signal") { 1 } else { 2 };
    let k = kernel(cfg, dim_default, default_w)?;
    let q = stencil(cfg, &k)?;
    let eps = cfg.eps_list("eps", &[0.2, 0.1, 0.05])?;
    let order: f64 = cfg.get_or("order", 1.0)?;
    let mut values = Vec::with_capacity(eps.len());
    let weight_ok = |e: Example| -> std::result::Result<Example, String> {
        if (e.kernel_weight() - k.weight()).abs() < 1e-12 {
            Ok(e)
        } else {
            Err(format!("example {e} needs kernel weight {}", e.kernel_weight()))
        }
    };
    let target: std::result::Result<Energy, String> = if k.dim() == 1 {
        let sig = registry::signal(cfg, "signal")?;
        let quad = Quad1D {
            step: cfg.get::<f64>("quad_step")?,
            ..Quad1D::default()
        };
        cfg.check_unused()?;
        for &e in &eps {
            values.push(f_eps_nd_1d(sig.as_signal(), &fam, e, &q, quad)?);
        }
        example
            .ok_or_else(|| "no closed-form limit for this family".to_string())
            .and_then(weight_ok)
            .and_then(|ex| {
                let u = sig.exact().map_err(|e| e.to_string())?;
                target_limit(ex, &k, Descriptor::OneD(&u)).map_err(|e| e.to_string())
            })
    } else {
        let field = registry::field(cfg, "field")?;
        let domain = parse_rect(cfg, "domain")?;
        let n: usize = cfg.get_or("lattice_n", 256)?;
        let bx = match parse_rect(cfg, "lattice_box")? {
            Some(b) => b,
            None => {
                let w = domain.unwrap_or_else(|| field.as_field().window());
                let b = w.grow(0.125 * (w.x1 - w.x0), 0.125 * (w.y1 - w.y0));
                cfg.note("lattice_box", format!("{},{},{},{}", b.x0, b.x1, b.y0, b.y1));
                b
            }
        };
        let lat = Lattice::cells(&bx, n).map_err(|e| Error::config("lattice_n", e.to_string()))?;
        let quad = Quad2D {
            cells: cfg.get_or("target_cells", 256)?,
            per_edge: 4,
        };
        cfg.check_unused()?;
        for &e in &eps {
            let v = match &domain {
                Some(r) => f_eps_nd_on(field.as_field(), &fam, e, &q, &lat, &Region::Rect(*r))?,
                None => f_eps_nd(field.as_field(), &fam, e, &q, &lat).map_err(|err| match err {
                    Error::Domain(m) => Error::config("field", m),
                    other => other,
                })?,
            };
            values.push(v);
        }
        match (example, field.exact(), domain) {
            (None, _, _) => Err("no closed-form limit for this family".into()),
            (_, None, _) => Err("field has no exact piecewise description".into()),
            (_, _, Some(_)) => Err("targets are computed on the whole plane only".into()),
            (Some(ex), Some(u), None) => weight_ok(ex)
                .and_then(|ex| target_limit(ex, &k, Descriptor::TwoD(u, quad)).map_err(|e| e.to_string())),
        }
    };
    let mut t = Table::new(&["eps", "value"]);
    for (e, v) in eps.iter().zip(&values) {
        t.push(vec![fmt_f(*e), energy_cell(*v)]);
    }
    let vals: Vec<f64> = values.iter().map(|v| v.to_f64()).collect();
    let summary = sweep_summary("sweepnd", &eps, &vals, order, target);
    Ok(Artifacts {
        results: t,
        summary,
        extra: Vec::new(),
        failure: None,
    })
}

fn probe(cfg: &Config) -> Result<Artifacts> {
    let fam = fam_config(cfg, "power:2")?;
    let mut plan = SamplingPlan::default();
    plan.eps = cfg.eps_list("eps", &plan.eps)?;
    plan.r_max = cfg.get_or("r_max", plan.r_max)?;
    plan.r_samples = cfg.get_or("r_samples", plan.r_samples)?;
    cfg.check_unused()?;
    let rep = probe_hypotheses(&fam, &plan)?;
    let mut t = Table::new(&["hypothesis", "status", "detail"]);
    let mut summary = format!("experiment = probe\nfamily = {fam}\n");
    for (h, st) in &rep.results {
        let (word, detail) = match st {
            crate::phi_family::Status::Pass => ("pass", String::new()),
            crate::phi_family::Status::Fail(d) => ("fail", d.clone()),
            crate::phi_family::Status::Unverified(d) => ("unverified", d.clone()),
        };
        t.push(vec![h.label().to_string(), word.to_string(), format!("\"{}\"", detail.replace('"', "'"))]);
        writeln!(summary, "{} {word}", h.label()).unwrap();
    }
    for b in &rep.cpt1_bounds {
        writeln!(summary, "cpt1 M={} H={} K={}", fmt_f(b.m), fmt_f(b.h), fmt_f(b.k)).unwrap();
    }
    Ok(Artifacts {
        results: t,
        summary,
        extra: Vec::new(),
        failure: None,
    })
}

fn envelope(cfg: &Config) -> Result<Artifacts> {
    let phi: PhiSpec = cfg.get_or("phi", PhiSpec::power(2.0)?)?;
    let psi: PsiSpec = cfg.get_or("psi", PsiSpec::power(0.5)?)?;
    let rmax: f64 = cfg.get_or("rmax", 4.0)?;
    let samples: usize = cfg.get_or("samples", 401)?;
    let inner: usize = cfg.get_or("inner_grid", 4001)?;
    let tol: f64 = cfg.get_or("tol", 1e-8)?;
    cfg.check_unused()?;
    let rep = mu_envelope(&phi, &psi, rmax, samples, inner, tol)?;
    let mut t = Table::new(&["r", "mu"]);
    for (r, m) in &rep.samples {
        t.push(vec![fmt_f(*r), fmt_f(*m)]);
    }
    let summary = format!(
        "experiment = envelope\nrbar = {}\nconvex_below = {}\nconcave_above = {}\nmonotone = {}\nworst_violation = {}\n",
        fmt_f(rep.rbar),
        rep.convex_ok_below,
        rep.concave_ok_above,
        rep.monotone,
        fmt_f(rep.worst_violation)
    );
    Ok(Artifacts {
        results: t,
        summary,
        extra: Vec::new(),
        failure: None,
    })
}

fn theta(cfg: &Config) -> Result<Artifacts> {
    let fam = fam_config(cfg, "arctanMS")?;
    let eps = cfg.eps_list("eps", &[0.01, 0.005])?;
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let alphas = cfg.list_or("alpha", &grid)?;
    let betas = cfg.list_or("beta", &grid)?;
    let m: usize = cfg.get_or("grid", 4096)?;
    let k: usize = cfg.get_or("brute_k", 201)?;
    cfg.check_unused()?;
    let (phi, psi) = fam.limit_pair();
    let mut t = Table::new(&["eps", "alpha", "beta", "n_eps", "structured", "bruteforce", "lambda", "gap"]);
    let mut worst = f64::INFINITY;
    for &e in &eps {
        for &b in &betas {
            if e > b {
                continue;
            }
            for &a in &alphas {
                let s = theta_structured(&fam, e, a, b, m)?;
                let ne = n_eps(e, b);
                let brute = if ne <= 4 { fmt_f(theta_bruteforce(&fam, e, a, b, k)?) } else { String::new() };
                let l = lambda_eval(&phi, &psi, a, b, m)?.to_f64();
                worst = worst.min(s - l);
                t.push(vec![fmt_f(e), fmt_f(a), fmt_f(b), ne.to_string(), fmt_f(s), brute, fmt_f(l), fmt_f(s - l)]);
            }
        }
    }
    let summary = format!("experiment = theta\nfamily = {fam}\nrows = {}\nmin_gap = {}\n", t.len(), fmt_f(worst));
    Ok(Artifacts {
        results: t,
        summary,
        extra: Vec::new(),
        failure: None,
    })
}

enum DenoiseInput {
    Signal(Signal1D),
    Field(Field2D, bool),
}

/// Builds the data (with optional uniform noise) and the problem.
fn denoise_problem(cfg: &Config, eps: f64) -> Result<(DenoiseProblem, DenoiseInput)> {
    let fam = fam_config(cfg, "arctanMS")?;
    let noise: f64 = cfg.get_or("noise", 0.0)?;
    let seed: u64 = cfg.get_or("seed", 0)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut perturb = |v: &mut [f64]| {
        for x in v {
            *x += noise * (2.0 * rng.random::<f64>() - 1.0);
        }
    };
    let input = if cfg.has("signal") {
        let s: SignalInput = registry::signal(cfg, "signal")?;
        let mut s = s.sampled(cfg.get_or("samples", 101)?)?;
        perturb(s.samples_mut());
        DenoiseInput::Signal(s)
    } else {
        let pgm = cfg.raw("field").is_some_and(|r| r.starts_with("pgm:"));
        let f: FieldInput = registry::field(cfg, "field")?;
        let mut f = f.sampled(cfg.get_or("samples", 64)?)?;
        perturb(f.data_mut());
        DenoiseInput::Field(f, pgm)
    };
    let dim = if matches!(input, DenoiseInput::Signal(_)) { 1 } else { 2 };
    let k = kernel(cfg, dim, 1.0)?;
    let q = stencil(cfg, &k)?;
    let kappa: f64 = cfg.get_or("kappa", 1.0)?;
    let data = match &input {
        DenoiseInput::Signal(s) => Data::Signal(s.clone()),
        DenoiseInput::Field(f, _) => Data::Image(f.clone()),
    };
    let p = DenoiseProblem::new(data, fam, k, eps, kappa, q).map_err(|e| match e {
        Error::Unsupported(m) => Error::config("family", m),
        Error::Domain(m) => Error::config("kernel", m),
        other => other,
    })?;
    Ok((p, input))
}

fn solve_options(cfg: &Config) -> Result<SolveOptions> {
    let d = SolveOptions::default();
    Ok(SolveOptions {
        max_iters: cfg.get_or("max_iters", d.max_iters)?,
        grad_tol: cfg.get_or("grad_tol", d.grad_tol)?,
        ..d
    })
}

fn minimizer_extra(input: &DenoiseInput, p: &DenoiseProblem, u: Vec<f64>) -> Result<(String, Extra)> {
    Ok(match (input, p.data().with_values(u)?) {
        (DenoiseInput::Signal(_), Data::Signal(s)) => ("minimizer.csv".into(), Extra::Signal(s)),
        (DenoiseInput::Field(_, pgm), Data::Image(f)) => {
            (if *pgm { "minimizer.pgm" } else { "minimizer.csv" }.into(), Extra::Field(f))
        }
        _ => unreachable!("data kind is preserved"),
    })
}

fn input_extra(input: &DenoiseInput) -> (String, Extra) {
    match input {
        DenoiseInput::Signal(s) => ("input.csv".into(), Extra::Signal(s.clone())),
        DenoiseInput::Field(f, pgm) => (if *pgm { "input.pgm" } else { "input.csv" }.into(), Extra::Field(f.clone())),
    }
}

fn underflow(status: Status, eps: f64) -> Option<Error> {
    (status == Status::StepUnderflow).then(|| Error::Numeric(format!("line search step underflow at eps={eps}")))
}

fn denoise(cfg: &Config) -> Result<Artifacts> {
    let eps: f64 = cfg.get_or("eps", 0.05)?;
    let (p, input) = denoise_problem(cfg, eps)?;
    let opts = solve_options(cfg)?;
    cfg.check_unused()?;
    let st = solve(&p, opts)?;
    let mut t = Table::new(&["iter", "energy", "grad_norm"]);
    for (i, (e, g)) in st.energy.iter().zip(&st.grad_norm).enumerate() {
        t.push(vec![i.to_string(), fmt_f(*e), fmt_f(*g)]);
    }
    let mut summary = format!(
        "experiment = denoise\nstatus = {:?}\niterations = {}\ninitial_energy = {}\nfinal_energy = {}\n",
        st.status,
        st.iters,
        fmt_f(st.energy[0]),
        fmt_f(st.final_energy())
    );
    if let DenoiseInput::Signal(s) = &input {
        if let Some(i) = steepest_step(&st.u) {
            writeln!(summary, "jump_location = {}", fmt_f(s.x(i) + 0.5 * s.step())).unwrap();
        }
    }
    let failure = underflow(st.status, eps);
    let extra = vec![input_extra(&input), minimizer_extra(&input, &p, st.u)?];
    Ok(Artifacts {
        results: t,
        summary,
        extra,
        failure,
    })
}

fn compactness(cfg: &Config) -> Result<Artifacts> {
    let schedule = cfg.eps_list("eps_schedule", &[1.0, 0.3, 0.1])?;
    let (p, input) = denoise_problem(cfg, schedule[0])?;
    let opts = solve_options(cfg)?;
    cfg.check_unused()?;
    let c = eps_continuation(&p, &schedule, opts)?;
    let mut t = Table::new(&["eps", "iterations", "status", "energy", "record", "l1_step"]);
    for (i, st) in c.states.iter().enumerate() {
        let step = if i == 0 { String::new() } else { fmt_f(c.l1_steps[i - 1]) };
        t.push(vec![
            fmt_f(c.eps[i]),
            st.iters.to_string(),
            format!("{:?}", st.status),
            fmt_f(st.final_energy()),
            fmt_f(c.records[i]),
            step,
        ]);
    }
    let decreasing = c.l1_steps.windows(2).all(|w| w[1] <= w[0]);
    let summary = format!(
        "experiment = compactness\nsup_record = {}\nl1_steps_decreasing = {decreasing}\n",
        fmt_f(c.sup_record())
    );
    let failure = c
        .states
        .iter()
        .zip(&c.eps)
        .find_map(|(st, e)| underflow(st.status, *e));
    let extra = vec![input_extra(&input), minimizer_extra(&input, &p, c.last().u.clone())?];
    Ok(Artifacts {
        results: t,
        summary,
        extra,
        failure,
    })
}

/// `c_{p,n}` for `p = 0, 1, 2`, `j_alpha` for each `alpha`, and `omega`.
pub fn constants_table(k: &Kernel, alphas: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["quantity", "argument", "value"]);
    for p in [0.0, 1.0, 2.0] {
        t.push(vec![format!("c[n={}]", k.dim()), fmt_f(p), fmt_f(c_pn(p, k.dim())?)]);
    }
    for &a in alphas {
        t.push(vec!["j".into(), fmt_f(a), fmt_f(k.j_alpha(a)?)]);
    }
    t.push(vec!["omega".into(), fmt_f(k.weight()), fmt_f(k.omega())]);
    Ok(t)
}

fn constants(cfg: &Config) -> Result<Artifacts> {
    let k = kernel(cfg, 2, 1.0)?;
    let default: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0];
    let alphas = cfg.list_or("alphas", &default)?;
    cfg.check_unused()?;
    let t = constants_table(&k, &alphas)?;
    let summary = format!("experiment = constants\nkernel = {k}\nrows = {}\n", t.len());
    Ok(Artifacts {
        results: t,
        summary,
        extra: Vec::new(),
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> (tempfile::TempDir, Result<RunOutcome>) {
        let d = tempfile::tempdir().unwrap();
        let c = Config::parse(text, d.path()).unwrap();
        let r = run_config(&c);
        (d, r)
    }

    fn summary_value(s: &str, key: &str) -> f64 {
        s.lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap()
    }

    #[test]
    fn sweep1d_heaviside_reaches_half_pi() {
        let (_d, r) = run("experiment = sweep1d\nsignal = heaviside\nfamily = arctanMS\n");
        let s = r.unwrap().summary;
        assert!(summary_value(&s, "rel_error") < 1e-2, "{s}");
        assert!((summary_value(&s, "target") - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn reruns_are_byte_identical_and_meta_replays() {
        let text = "experiment = sweep1d\nsignal = ramp:2\nfamily = power:2\neps = 0.5,0.25,0.125\n";
        let (d, r) = run(text);
        let out = r.unwrap().output;
        let first = std::fs::read(out.join("results.csv")).unwrap();
        let meta = std::fs::read_to_string(out.join("meta.txt")).unwrap();
        std::fs::remove_dir_all(&out).unwrap();
        let c = Config::parse(&meta, d.path()).unwrap();
        let again = run_config(&c).unwrap();
        assert_eq!(std::fs::read(again.output.join("results.csv")).unwrap(), first);
        assert_eq!(std::fs::read_to_string(again.output.join("meta.txt")).unwrap(), meta);
    }

    #[test]
    fn probe_power_two_passes() {
        let (_d, r) = run("experiment = probe\nfamily = power:2\n");
        let s = r.unwrap().summary;
        for h in ["li1", "li2", "Est", "Cpt1", "Cpt2"] {
            assert!(s.contains(&format!("{h} pass")), "{s}");
        }
    }

    #[test]
    fn constants_match_closed_forms() {
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        let t = constants_table(&k, &[3.0]).unwrap().to_csv();
        let v: Vec<f64> = t.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        let pi = std::f64::consts::PI;
        assert!((v[0] - 2.0 * pi).abs() < 1e-9 && (v[1] - 4.0).abs() < 1e-9 && (v[2] - pi).abs() < 1e-9);
        assert!((v[3] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn config_errors_name_keys() {
        let (_d, r) = run("experiment = sweep1d\nsignal = heaviside\nspeed = 3\n");
        assert!(matches!(r, Err(Error::Config { ref key, .. }) if key == "speed"));
        let (_d, r) = run("experiment = fly\n");
        assert!(matches!(r, Err(Error::Config { ref key, .. }) if key == "experiment"));
        let (_d, r) = run("experiment = sweep1d\nsignal = csv:missing.csv\n");
        assert!(matches!(r, Err(Error::Config { ref key, .. }) if key == "signal"));
        let (_d, r) = run("experiment = denoise\nsignal = heaviside\nfamily = linear\n");
        assert!(matches!(r, Err(Error::Config { ref key, .. }) if key == "family"));
    }

    #[test]
    fn denoise_and_compactness_write_minimizers() {
        let (_d, r) = run(
            "experiment = denoise\nsignal = heaviside\nsamples = 101\nnoise = 0.1\nseed = 3\nkappa = 5\neps = 0.05\nxi_step = 0.2\n",
        );
        let o = r.unwrap();
        assert!(o.output.join("minimizer.csv").exists());
        assert!(summary_value(&o.summary, "jump_location").abs() <= 0.02);
        let (_d, r) = run(
            "experiment = compactness\nfield = disk:0.5\nsamples = 24\nnoise = 0.1\nkappa = 5\neps_schedule = 0.4,0.2\nmax_iters = 30\nxi_step = 0.5\n",
        );
        let o = r.unwrap();
        assert!(o.output.join("minimizer.csv").exists());
    }

    #[test]
    fn theta_and_envelope_run() {
        let (_d, r) = run("experiment = theta\nfamily = arctanMS\neps = 0.25\nalpha = 1\nbeta = 1\n");
        assert!(r.unwrap().summary.contains("rows = 1"));
        let (_d, r) = run("experiment = envelope\nphi = power:2\npsi = power:0.5\n");
        assert!(r.unwrap().summary.contains("convex_below = true"));
    }

    #[test]
    fn sweepnd_one_dimensional_target() {
        let (_d, r) = run("experiment = sweepnd\nsignal = heaviside\nfamily = arctanMS\nkernel = indicator:1\neps = 0.1,0.05,0.025\nxi_step = 0.015625\n");
        // lattice stencil weights sum to 1 + h instead of 1
        let s = r.unwrap().summary;
        assert!((summary_value(&s, "target") - std::f64::consts::FRAC_PI_2 * 2.0 * 0.5).abs() < 1e-9, "{s}");
        assert!(summary_value(&s, "rel_error") < 0.05, "{s}");
    }
}
