//! Denoising by descent on `E(u) = F_eps(u) + kappa ||u - g||^2` over grid
//! values, with the non-local term discretized on the sampling grid.

use rayon::prelude::*;

use crate::energy_1d::{Interp, Signal1D};
use crate::energy_nd::{Field2D, StencilQuadrature};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::numeric::KahanSum;
use crate::phi_family::PhiEpsFamily;

/// Offsets are split into this many chunks whose partial results are
/// reduced in a fixed order, so results do not depend on the thread count.
const CHUNKS: usize = 16;
const SNAP: f64 = 1e-9;

/// Noisy data: a sampled signal or image.
#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    Signal(Signal1D),
    Image(Field2D),
}

impl Data {
    pub fn values(&self) -> &[f64] {
        match self {
            Data::Signal(s) => s.samples(),
            Data::Image(f) => f.data(),
        }
    }

    /// Same grid carrying the values `u`.
    pub fn with_values(&self, u: Vec<f64>) -> Result<Data> {
        if u.len() != self.values().len() {
            return Err(shape_error(u.len(), self.values().len()));
        }
        Ok(match self {
            Data::Signal(s) => Data::Signal(Signal1D::new(s.origin(), s.step(), u, s.interp())?),
            Data::Image(f) => {
                let (nx, ny) = f.dims();
                Data::Image(Field2D::new(f.origin(), f.step(), nx, ny, u)?)
            }
        })
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            Data::Signal(s) => (s.len(), 1),
            Data::Image(f) => f.dims(),
        }
    }

    fn steps(&self) -> [f64; 2] {
        match self {
            Data::Signal(s) => [s.step(), 1.0],
            Data::Image(f) => f.step(),
        }
    }

    /// Measure attached to one grid value.
    pub fn cell(&self) -> f64 {
        match self {
            Data::Signal(s) => s.step(),
            Data::Image(f) => f.step()[0] * f.step()[1],
        }
    }

    fn nearest(&self) -> bool {
        matches!(self, Data::Signal(s) if s.interp() == Interp::Nearest)
    }
}

fn shape_error(got: usize, want: usize) -> Error {
    Error::domain(format!("iterate has {got} values, the data grid has {want}"))
}

/// One-axis interpolation of a grid shift: base index shift and fraction.
#[derive(Debug, Clone, Copy)]
struct AxisShift {
    k: i64,
    f: f64,
}

impl AxisShift {
    fn new(t: f64, nearest: bool) -> Self {
        let r = t.round();
        if nearest || (t - r).abs() < SNAP {
            AxisShift { k: r as i64, f: 0.0 }
        } else {
            let k = t.floor();
            AxisShift { k: k as i64, f: t - k }
        }
    }

    /// Nodes `i` with every footprint index inside `0..n`.
    fn valid(&self, n: usize) -> std::ops::Range<usize> {
        let extra = i64::from(self.f > 0.0);
        let lo = (-self.k).max(0);
        let hi = (n as i64 - self.k - extra).min(n as i64);
        if hi <= lo {
            0..0
        } else {
            lo as usize..hi as usize
        }
    }
}

/// Stencil offset `eps xi` on the grid with its weight `w_xi * cell`.
#[derive(Debug, Clone, Copy)]
struct Shift {
    x: AxisShift,
    y: AxisShift,
    weight: f64,
    scale: f64,
}

/// `E(u) = sum_xi w_xi sum_x cell phi_{eps|xi|}(|u(x + eps xi) - u(x)| / (eps|xi|)) + kappa cell sum (u - g)^2`
/// with `x` on the grid, `u(x + eps xi)` bilinearly interpolated (linear or
/// nearest in 1-D) and only pairs whose interpolation footprint lies in the grid.
#[derive(Debug, Clone)]
pub struct DenoiseProblem {
    data: Data,
    family: PhiEpsFamily,
    kernel: Kernel,
    eps: f64,
    kappa: f64,
    stencil: StencilQuadrature,
    shifts: Vec<Shift>,
}

impl DenoiseProblem {
    pub fn new(data: Data, family: PhiEpsFamily, kernel: Kernel, eps: f64, kappa: f64, stencil: StencilQuadrature) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!("fidelity weight must be positive, got {kappa}")));
        }
        if !family.is_differentiable() {
            return Err(Error::unsupported(format!("family `{family}` is not differentiable; descent needs a smooth family")));
        }
        let want = if matches!(data, Data::Signal(_)) { 1 } else { 2 };
        if kernel.dim() != want {
            return Err(Error::domain(format!("data is {want}-D but the kernel is {}-D", kernel.dim())));
        }
        if stencil.offsets().iter().any(|o| want == 1 && o.0[1] != 0.0) {
            return Err(Error::domain("a 1-D problem needs a 1-D stencil"));
        }
        let mut p = DenoiseProblem {
            data,
            family,
            kernel,
            eps: 1.0,
            kappa,
            stencil,
            shifts: Vec::new(),
        };
        p.set_eps(eps)?;
        Ok(p)
    }

    /// Rebuilds the grid shifts for another `eps`.
    pub fn set_eps(&mut self, eps: f64) -> Result<()> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        let steps = self.data.steps();
        let nearest = self.data.nearest();
        let cell = self.data.cell();
        self.eps = eps;
        self.shifts = self
            .stencil
            .offsets()
            .iter()
            .map(|&(xi, w)| Shift {
                x: AxisShift::new(eps * xi[0] / steps[0], nearest),
                y: AxisShift::new(eps * xi[1] / steps[1], nearest),
                weight: w * cell,
                scale: eps * xi[0].hypot(xi[1]),
            })
            .collect();
        Ok(())
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.set_eps(eps)?;
        Ok(self)
    }

    pub fn data(&self) -> &Data {
        &self.data
    }

    pub fn family(&self) -> &PhiEpsFamily {
        &self.family
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn stencil(&self) -> &StencilQuadrature {
        &self.stencil
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        let n = self.data.values().len();
        if u.len() != n {
            return Err(shape_error(u.len(), n));
        }
        Ok(())
    }

    /// Visits every in-grid pair of one shift: `(node, footprint, d)` with
    /// `d = u(x + eps xi) - u(x)`.
    fn for_pairs<F: FnMut(usize, [(usize, f64); 4], f64)>(&self, s: &Shift, u: &[f64], mut visit: F) {
        let (nx, ny) = self.data.dims();
        let (ri, rj) = (s.x.valid(nx), s.y.valid(ny));
        for j in rj {
            for i in ri.clone() {
                let a = j * nx + i;
                let b = ((j as i64 + s.y.k) as usize) * nx + (i as i64 + s.x.k) as usize;
                let (fx, fy) = (s.x.f, s.y.f);
                let fp = [
                    (b, (1.0 - fx) * (1.0 - fy)),
                    (b + usize::from(fx > 0.0), fx * (1.0 - fy)),
                    (b + if fy > 0.0 { nx } else { 0 }, (1.0 - fx) * fy),
                    (b + usize::from(fx > 0.0) + if fy > 0.0 { nx } else { 0 }, fx * fy),
                ];
                let v = fp.iter().map(|&(k, w)| w * u[k]).sum::<f64>();
                visit(a, fp, v - u[a]);
            }
        }
    }

    fn chunks(&self) -> Vec<&[Shift]> {
        let size = self.shifts.len().div_ceil(CHUNKS).max(1);
        self.shifts.chunks(size).collect()
    }

    /// Non-local part `F_eps(u)` alone.
    pub fn nonlocal_energy(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let parts: Vec<f64> = self
            .chunks()
            .into_par_iter()
            .map(|chunk| {
                let mut acc = KahanSum::new();
                for s in chunk {
                    let mut inner = KahanSum::new();
                    self.for_pairs(s, u, |_, _, d| inner.add(self.family.value(s.scale, d.abs() / s.scale)));
                    acc.add(s.weight * inner.value());
                }
                acc.value()
            })
            .collect();
        let v = parts.into_iter().collect::<KahanSum>().value();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric(format!("non-local energy is {v} at eps={}", self.eps)))
        }
    }

    fn fidelity(&self, u: &[f64]) -> f64 {
        let g = self.data.values();
        let s: KahanSum = u.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).collect();
        self.kappa * self.data.cell() * s.value()
    }
}

/// Total discrete energy `E(u)`.
pub fn discrete_energy(p: &DenoiseProblem, u: &[f64]) -> Result<f64> {
    Ok(p.nonlocal_energy(u)? + p.fidelity(u))
}

/// Exact gradient of [`discrete_energy`] with respect to the grid values.
pub fn gradient(p: &DenoiseProblem, u: &[f64]) -> Result<Vec<f64>> {
    p.check(u)?;
    let n = u.len();
    let parts: Vec<Vec<f64>> = p
        .chunks()
        .into_par_iter()
        .map(|chunk| {
            let mut g = vec![0.0; n];
            for s in chunk {
                p.for_pairs(s, u, |a, fp, d| {
                    if d == 0.0 {
                        return;
                    }
                    let c = s.weight * p.family.derivative_unchecked(s.scale, d.abs() / s.scale) * d.signum() / s.scale;
                    for (k, w) in fp {
                        g[k] += c * w;
                    }
                    g[a] -= c;
                });
            }
            g
        })
        .collect();
    let mut grad: Vec<f64> = u
        .iter()
        .zip(p.data.values())
        .map(|(a, b)| 2.0 * p.kappa * p.data.cell() * (a - b))
        .collect();
    for part in &parts {
        for (g, v) in grad.iter_mut().zip(part) {
            *g += v;
        }
    }
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("gradient is not finite at eps={}", p.eps)));
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
    /// The line search could not decrease the energy with a representable step.
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Threshold on the sup norm of the gradient divided by the cell measure.
    pub grad_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub min_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 500,
            grad_tol: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            min_step: 1e-18,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentState {
    pub u: Vec<f64>,
    /// Energy of every accepted iterate, starting with the initial one.
    pub energy: Vec<f64>,
    /// Scaled sup norm of the gradient at every accepted iterate.
    pub grad_norm: Vec<f64>,
    pub step: f64,
    pub iters: usize,
    pub status: Status,
}

impl DescentState {
    pub fn final_energy(&self) -> f64 {
        *self.energy.last().expect("history starts with the initial energy")
    }
}

/// Gradient descent from `g` with Armijo backtracking.
pub fn solve(p: &DenoiseProblem, opts: SolveOptions) -> Result<DescentState> {
    solve_from(p, p.data.values().to_vec(), opts)
}

/// Gradient descent from `u0`. Steps are taken along the gradient scaled by
/// the cell measure; an accepted step doubles the next trial step.
pub fn solve_from(p: &DenoiseProblem, u0: Vec<f64>, opts: SolveOptions) -> Result<DescentState> {
    if !(opts.armijo > 0.0 && opts.armijo < 1.0) || !(opts.backtrack > 0.0 && opts.backtrack < 1.0) {
        return Err(Error::domain("line search constants must lie in (0, 1)"));
    }
    let cell = p.data.cell();
    let mut u = u0;
    let mut e = discrete_energy(p, &u)?;
    let mut g = gradient(p, &u)?;
    let sup = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs())) / cell;
    let mut state = DescentState {
        u: Vec::new(),
        energy: vec![e],
        grad_norm: vec![sup(&g)],
        step: 0.5 / p.kappa,
        iters: 0,
        status: Status::MaxIters,
    };
    let mut t = state.step;
    let mut trial = vec![0.0; u.len()];
    while state.iters < opts.max_iters {
        if sup(&g) <= opts.grad_tol {
            state.status = Status::Converged;
            break;
        }
        let slope: f64 = g.iter().map(|v| v * v).collect::<KahanSum>().value() / cell;
        let accepted = loop {
            if t < opts.min_step {
                break None;
            }
            for ((x, a), d) in trial.iter_mut().zip(&u).zip(&g) {
                *x = a - t * d / cell;
            }
            let et = discrete_energy(p, &trial)?;
            if et <= e - opts.armijo * t * slope {
                break Some(et);
            }
            t *= opts.backtrack;
        };
        let Some(et) = accepted else {
            state.status = Status::StepUnderflow;
            break;
        };
        std::mem::swap(&mut u, &mut trial);
        e = et;
        g = gradient(p, &u)?;
        state.iters += 1;
        state.step = t;
        state.energy.push(e);
        state.grad_norm.push(sup(&g));
        t *= 2.0;
    }
    if state.status == Status::MaxIters && sup(&g) <= opts.grad_tol {
        state.status = Status::Converged;
    }
    state.u = u;
    Ok(state)
}

/// Warm-started solves along a decreasing `eps` schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuation {
    pub eps: Vec<f64>,
    pub states: Vec<DescentState>,
    /// `F_eps(u_eps) + ||u_eps||_inf` per schedule entry.
    pub records: Vec<f64>,
    /// L1 distance between successive minimizers.
    pub l1_steps: Vec<f64>,
}

impl Continuation {
    pub fn sup_record(&self) -> f64 {
        self.records.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn last(&self) -> &DescentState {
        self.states.last().expect("schedule is non-empty")
    }
}

pub fn eps_continuation(p: &DenoiseProblem, schedule: &[f64], opts: SolveOptions) -> Result<Continuation> {
    if schedule.is_empty() {
        return Err(Error::domain("empty eps schedule"));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("eps schedule must be strictly decreasing"));
    }
    let cell = p.data.cell();
    let mut prob = p.clone();
    let mut u = p.data.values().to_vec();
    let mut out = Continuation {
        eps: schedule.to_vec(),
        states: Vec::new(),
        records: Vec::new(),
        l1_steps: Vec::new(),
    };
    for &eps in schedule {
        prob.set_eps(eps)?;
        let st = solve_from(&prob, u.clone(), opts)?;
        if !out.states.is_empty() {
            let d: KahanSum = st.u.iter().zip(&u).map(|(a, b)| (a - b).abs()).collect();
            out.l1_steps.push(d.value() * cell);
        }
        let sup = st.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        out.records.push(prob.nonlocal_energy(&st.u)? + sup);
        u = st.u.clone();
        out.states.push(st);
    }
    Ok(out)
}

/// Index `i` maximizing `|u[i + 1] - u[i]|` along a 1-D iterate.
pub fn steepest_step(u: &[f64]) -> Option<usize> {
    u.windows(2)
        .enumerate()
        .max_by(|a, b| (a.1[1] - a.1[0]).abs().total_cmp(&(b.1[1] - b.1[0]).abs()))
        .map(|(i, _)| i)
}
