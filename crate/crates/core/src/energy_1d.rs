//! One-dimensional functionals `F_eps(u, Omega) = int_Omega phi_eps(|u(x+eps) - u(x)| / eps) dx`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::energy::Energy;
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::phi_family::PhiEpsFamily;

/// A real function of one variable that is constant on each side of a
/// bounded window.
pub trait Signal: Sync {
    fn eval(&self, x: f64) -> f64;
    /// `[a, b]` outside which the signal is constant on each side.
    fn window(&self) -> (f64, f64);
    /// Points where the signal may fail to be smooth (kinks and jumps).
    fn breaks(&self) -> Vec<f64>;
    /// Default quadrature step in `x`.
    fn default_step(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    Linear,
    Nearest,
}

impl fmt::Display for Interp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interp::Linear => "linear",
            Interp::Nearest => "nearest",
        })
    }
}

impl std::str::FromStr for Interp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(Interp::Linear),
            "nearest" => Ok(Interp::Nearest),
            other => Err(Error::unsupported(format!("interpolation mode `{other}`"))),
        }
    }
}

/// Uniformly sampled signal, extended by its boundary samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D {
    origin: f64,
    step: f64,
    samples: Vec<f64>,
    interp: Interp,
}

impl Signal1D {
    pub fn new(origin: f64, step: f64, samples: Vec<f64>, interp: Interp) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain("a sampled signal needs at least 2 samples"));
        }
        if !(step > 0.0) || !step.is_finite() || !origin.is_finite() {
            return Err(Error::domain(format!("sample step must be positive, got {step}")));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("samples must be finite"));
        }
        Ok(Signal1D {
            origin,
            step,
            samples,
            interp,
        })
    }

    /// Samples `f` at `origin + i * step`, `i < n`.
    pub fn from_fn<F: Fn(f64) -> f64>(origin: f64, step: f64, n: usize, f: F) -> Result<Self> {
        let samples = (0..n).map(|i| f(origin + step * i as f64)).collect();
        Self::new(origin, step, samples, Interp::Linear)
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Abscissa of sample `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.origin + self.step * i as f64
    }
}

impl Signal for Signal1D {
    fn eval(&self, x: f64) -> f64 {
        let n = self.samples.len();
        let t = (x - self.origin) / self.step;
        if t <= 0.0 {
            return self.samples[0];
        }
        if t >= (n - 1) as f64 {
            return self.samples[n - 1];
        }
        match self.interp {
            Interp::Linear => {
                let i = (t.floor() as usize).min(n - 2);
                let f = t - i as f64;
                self.samples[i] + f * (self.samples[i + 1] - self.samples[i])
            }
            Interp::Nearest => self.samples[(t.round() as usize).min(n - 1)],
        }
    }

    fn window(&self) -> (f64, f64) {
        (self.origin, self.x(self.samples.len() - 1))
    }

    fn breaks(&self) -> Vec<f64> {
        let n = self.samples.len();
        match self.interp {
            Interp::Linear => (0..n).map(|i| self.x(i)).collect(),
            Interp::Nearest => (0..n - 1).map(|i| self.x(i) + 0.5 * self.step).collect(),
        }
    }

    fn default_step(&self) -> f64 {
        self.step / 4.0
    }
}

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form signal on the real line.
#[derive(Clone)]
pub struct AnalyticSignal1D {
    name: String,
    f: ScalarMap,
    window: (f64, f64),
    breaks: Vec<f64>,
    step: f64,
}

impl fmt::Debug for AnalyticSignal1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticSignal1D")
            .field("name", &self.name)
            .field("window", &self.window)
            .field("breaks", &self.breaks)
            .field("step", &self.step)
            .finish()
    }
}

const PROBES_PER_SIDE: usize = 8;

impl AnalyticSignal1D {
    /// Wraps `f`, which must be constant on `(-inf, a]` and on `[b, +inf)`.
    /// Constancy is spot-checked at 16 points. `breaks` lists kinks and jumps.
    pub fn new<F>(name: impl Into<String>, f: F, a: f64, b: f64, breaks: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!("bad active window [{a}, {b}]")));
        }
        let name = name.into();
        let scale = (b - a).max(1.0);
        for (edge, dir) in [(a, -1.0), (b, 1.0)] {
            let far = f(edge + dir * scale * 1e3);
            for k in 0..PROBES_PER_SIDE {
                let x = edge + dir * scale * 1e-7 * 10f64.powi(k as i32);
                let v = f(x);
                if (v - far).abs() > 1e-12 * (1.0 + far.abs()) {
                    return Err(Error::domain(format!(
                        "signal `{name}` is not constant outside [{a}, {b}] (x = {x})"
                    )));
                }
            }
        }
        let mut breaks: Vec<f64> = breaks.into_iter().filter(|t| t.is_finite()).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Ok(AnalyticSignal1D {
            name,
            f: Arc::new(f),
            window: (a, b),
            breaks,
            step: scale / 4096.0,
        })
    }

    /// `0` for `x < 0`, `h` for `x >= 0`.
    pub fn heaviside(h: f64) -> Self {
        Self::new(format!("heaviside:{h}"), move |x| if x < 0.0 { 0.0 } else { h }, 0.0, 0.0, vec![0.0])
            .expect("heaviside is constant off the origin")
    }

    /// `0` for `x < 0`, `a x` on `[0, 1]`, `a` for `x > 1`.
    pub fn ramp(a: f64) -> Self {
        Self::new(format!("ramp:{a}"), move |x| a * x.clamp(0.0, 1.0), 0.0, 1.0, vec![0.0, 1.0])
            .expect("ramp is constant off [0, 1]")
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl Signal for AnalyticSignal1D {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn window(&self) -> (f64, f64) {
        self.window
    }

    fn breaks(&self) -> Vec<f64> {
        self.breaks.clone()
    }

    fn default_step(&self) -> f64 {
        self.step
    }
}

/// Integration domain in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain1D {
    WholeLine,
    Interval(f64, f64),
}

/// Quadrature settings for [`f_eps_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad1D {
    /// Cell size; `None` uses the signal's default.
    pub step: Option<f64>,
    /// Minimum number of cells between consecutive breakpoints of the integrand.
    pub min_cells: usize,
}

impl Default for Quad1D {
    fn default() -> Self {
        Quad1D {
            step: None,
            min_cells: 2,
        }
    }
}

impl Quad1D {
    pub fn with_step(step: f64) -> Self {
        Quad1D {
            step: Some(step),
            ..Quad1D::default()
        }
    }
}

/// Quadrature value with its declared error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Energy,
    pub error: f64,
}

/// Composite midpoint quadrature on `[a, b]` with `n` (even) cells; returns
/// the fine value and the value on `n / 2` cells.
fn midpoint_pair<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, n: usize) -> (f64, f64) {
    let h = (b - a) / n as f64;
    let mut fine = KahanSum::new();
    for i in 0..n {
        fine.add(g(a + h * (i as f64 + 0.5)));
    }
    let mut coarse = KahanSum::new();
    for i in 0..n / 2 {
        coarse.add(g(a + 2.0 * h * (i as f64 + 0.5)));
    }
    (fine.value() * h, coarse.value() * 2.0 * h)
}

/// Integrates `g` over `[lo, hi]` by composite midpoint on the pieces between
/// `breaks`, with one Richardson step against the half-resolution sum so that
/// smooth pieces converge at fourth order. Pieces are evaluated in parallel
/// and reduced in order.
pub(crate) fn piecewise_midpoint<G>(g: G, lo: f64, hi: f64, breaks: &[f64], step: f64, min_cells: usize) -> (f64, f64)
where
    G: Fn(f64) -> f64 + Sync,
{
    if !(hi > lo) {
        return (0.0, 0.0);
    }
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied().filter(|&t| t > lo && t < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let min_cells = min_cells.max(2);
    let parts: Vec<(f64, f64)> = pts
        .par_windows(2)
        .map(|w| {
            let len = w[1] - w[0];
            if len <= 0.0 {
                return (0.0, 0.0);
            }
            // a ratio that is integral up to rounding must not gain a cell
            let mut n = ((len / step * (1.0 - 1e-9)).ceil() as usize).max(min_cells);
            n += n % 2;
            midpoint_pair(&g, w[0], w[1], n)
        })
        .collect();
    let total: KahanSum = parts
        .iter()
        .map(|&(f, c)| if (f - c).is_finite() { f + (f - c) / 3.0 } else { f })
        .collect();
    let err = parts.iter().map(|(f, c)| (f - c).abs() / 3.0).sum();
    (total.value(), err)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("eps must be positive, got {eps}")))
    }
}

/// `F_eps(u, Omega)` by breakpoint-aligned composite midpoint quadrature.
///
/// Over the whole line only `[a - eps, b]` contributes, `[a, b]` being the
/// signal window. The integrand breaks at every signal break `t` and at `t - eps`.
pub fn f_eps_1d(u: &dyn Signal, fam: &PhiEpsFamily, eps: f64, omega: Domain1D, quad: Quad1D) -> Result<Estimate> {
    check_eps(eps)?;
    let step = quad.step.unwrap_or_else(|| u.default_step());
    if !(step > 0.0) {
        return Err(Error::domain(format!("quadrature step must be positive, got {step}")));
    }
    if matches!(omega, Domain1D::WholeLine) && fam.value(eps, 0.0) > 0.0 {
        return Ok(Estimate {
            value: Energy::Infinite,
            error: 0.0,
        });
    }
    let (a, b) = u.window();
    let (mut lo, mut hi) = (a - eps, b);
    if let Domain1D::Interval(c, d) = omega {
        if !(c <= d) {
            return Err(Error::domain(format!("bad interval [{c}, {d}]")));
        }
        lo = lo.max(c);
        hi = hi.min(d);
    }
    let mut breaks = u.breaks();
    breaks.extend(u.breaks().iter().map(|t| t - eps));
    let g = |x: f64| fam.value(eps, (u.eval(x + eps) - u.eval(x)).abs() / eps);
    let (value, error) = piecewise_midpoint(g, lo, hi, &breaks, step, quad.min_cells);
    if value.is_nan() {
        return Err(Error::Numeric(format!("F_eps is NaN at eps={eps}")));
    }
    let value = if value.is_infinite() {
        Energy::Infinite
    } else {
        Energy::Finite(value)
    };
    Ok(Estimate { value, error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    NonIncreasing,
    NonDecreasing,
    Constant,
    Mixed,
}

/// Values of `F_eps` along a list of `eps`.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<(f64, Estimate)>,
    /// Direction of the values along the list, up to the declared errors.
    pub trend: Trend,
}

impl Sweep {
    pub fn eps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1.value.to_f64()).collect()
    }
}

pub(crate) fn trend_of(values: &[f64], slack: &[f64]) -> Trend {
    let mut up = false;
    let mut down = false;
    for i in 1..values.len() {
        let tol = slack[i] + slack[i - 1] + 1e-12 * (1.0 + values[i].abs());
        let d = values[i] - values[i - 1];
        if d > tol {
            up = true;
        } else if d < -tol {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::NonDecreasing,
        (false, true) => Trend::NonIncreasing,
        (true, true) => Trend::Mixed,
    }
}

pub fn f_eps_1d_sweep(u: &dyn Signal, fam: &PhiEpsFamily, eps_list: &[f64], omega: Domain1D, quad: Quad1D) -> Result<Sweep> {
    if eps_list.is_empty() {
        return Err(Error::domain("empty eps list"));
    }
    let rows = eps_list
        .iter()
        .map(|&e| f_eps_1d(u, fam, e, omega, quad).map(|v| (e, v)))
        .collect::<Result<Vec<_>>>()?;
    let vals: Vec<f64> = rows.iter().map(|r| r.1.value.to_f64()).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.1.error).collect();
    let trend = trend_of(&vals, &errs);
    Ok(Sweep { rows, trend })
}
