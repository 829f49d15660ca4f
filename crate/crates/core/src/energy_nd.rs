//! Two-dimensional non-local functionals
//! `F_eps(u) = int int phi_{eps|xi|}(|u(x + eps xi) - u(x)| / (eps |xi|)) eta(xi) dxi dx`,
//! their directional pieces `F_{eps,xi}`, slices, the restricted variant on
//! rectangles and the mollifier `C^delta`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::energy::Energy;
use crate::energy_1d::{AnalyticSignal1D, Signal};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::numeric::KahanSum;
use crate::phi_family::PhiEpsFamily;

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 <= x1 && y0 <= y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::domain(format!("bad rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn square(half: f64) -> Self {
        Rect {
            x0: -half,
            x1: half,
            y0: -half,
            y1: half,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let t = 1e-12 * (1.0 + self.x1.abs().max(self.y1.abs()).max(self.x0.abs()).max(self.y0.abs()));
        p[0] >= self.x0 - t && p[0] <= self.x1 + t && p[1] >= self.y0 - t && p[1] <= self.y1 + t
    }

    pub fn grow(&self, mx: f64, my: f64) -> Rect {
        Rect {
            x0: self.x0 - mx,
            x1: self.x1 + mx,
            y0: self.y0 - my,
            y1: self.y1 + my,
        }
    }

    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(o.x0),
            x1: self.x1.min(o.x1),
            y0: self.y0.max(o.y0),
            y1: self.y1.min(o.y1),
        };
        (r.x0 <= r.x1 && r.y0 <= r.y1).then_some(r)
    }

    pub fn translate(&self, v: [f64; 2]) -> Rect {
        Rect {
            x0: self.x0 + v[0],
            x1: self.x1 + v[0],
            y0: self.y0 + v[1],
            y1: self.y1 + v[1],
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x0, self.x1, self.y0, self.y1)
    }
}

/// Integration domain in `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Rect(Rect),
    /// Listed so callers can ask; evaluators only support rectangles.
    Polygon(Vec<[f64; 2]>),
}

/// Scalar field on the plane.
pub trait Field: Sync {
    fn eval(&self, p: [f64; 2]) -> f64;
    /// Rectangle outside which the field is constant, if there is one.
    fn bounded_window(&self) -> Option<Rect>;
    /// Rectangle carrying the interesting part of the field.
    fn window(&self) -> Rect;
    /// Parameters `t` where `t -> u(p + t d)` may fail to be smooth.
    fn line_breaks(&self, _p: [f64; 2], _d: [f64; 2]) -> Vec<f64> {
        Vec::new()
    }
}

/// Quadrature nodes `origin + (i, j) * step` with weight `step_x * step_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub origin: [f64; 2],
    pub step: [f64; 2],
}

impl Lattice {
    /// Cell centres of an `n x n` subdivision of `r`.
    pub fn cells(r: &Rect, n: usize) -> Result<Self> {
        if n == 0 || r.x1 <= r.x0 || r.y1 <= r.y0 {
            return Err(Error::domain("lattice needs n > 0 and a non-degenerate rectangle"));
        }
        let sx = (r.x1 - r.x0) / n as f64;
        let sy = (r.y1 - r.y0) / n as f64;
        Ok(Lattice {
            origin: [r.x0 + 0.5 * sx, r.y0 + 0.5 * sy],
            step: [sx, sy],
        })
    }

    fn index_range(&self, lo: f64, hi: f64, axis: usize) -> (i64, i64) {
        let o = self.origin[axis];
        let s = self.step[axis];
        (((lo - o) / s - 1e-9).ceil() as i64, ((hi - o) / s + 1e-9).floor() as i64)
    }

    fn node(&self, i: i64, j: i64) -> [f64; 2] {
        [
            self.origin[0] + self.step[0] * i as f64,
            self.origin[1] + self.step[1] * j as f64,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.step[0] * self.step[1]
    }
}

/// Sampled field with bilinear interpolation and constant extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    origin: [f64; 2],
    step: [f64; 2],
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Field2D {
    /// `data` is row-major: sample `(i, j)` sits at `origin + (i dx, j dy)`.
    pub fn new(origin: [f64; 2], step: [f64; 2], nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 || data.len() != nx * ny {
            return Err(Error::domain(format!("field needs at least 2x2 samples and {nx}x{ny} values")));
        }
        if !(step[0] > 0.0 && step[1] > 0.0) || !step.iter().chain(&origin).all(|v| v.is_finite()) {
            return Err(Error::domain("field steps must be positive"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("field samples must be finite"));
        }
        Ok(Field2D {
            origin,
            step,
            nx,
            ny,
            data,
        })
    }

    pub fn from_fn<F: Fn([f64; 2]) -> f64>(origin: [f64; 2], step: [f64; 2], nx: usize, ny: usize, f: F) -> Result<Self> {
        let mut data = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                data.push(f([origin[0] + step[0] * i as f64, origin[1] + step[1] * j as f64]));
            }
        }
        Self::new(origin, step, nx, ny, data)
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn step(&self) -> [f64; 2] {
        self.step
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + self.step[0] * i as f64,
            self.origin[1] + self.step[1] * j as f64,
        ]
    }

    /// The sample nodes as a quadrature lattice.
    pub fn lattice(&self) -> Lattice {
        Lattice {
            origin: self.origin,
            step: self.step,
        }
    }

    /// Common value of all edge samples, if they agree.
    pub fn boundary_value(&self) -> Option<f64> {
        let v = self.data[0];
        let edge = (0..self.nx)
            .flat_map(|i| [(i, 0), (i, self.ny - 1)])
            .chain((0..self.ny).flat_map(|j| [(0, j), (self.nx - 1, j)]));
        edge.into_iter().all(|(i, j)| self.get(i, j) == v).then_some(v)
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map_samples<F: Fn(f64) -> f64>(&self, f: F) -> Field2D {
        Field2D {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    fn same_grid(&self, o: &Field2D) -> bool {
        self.nx == o.nx && self.ny == o.ny && self.origin == o.origin && self.step == o.step
    }

    /// `sum |u - v| dx dy` over sample nodes inside `region` (all nodes if `None`).
    pub fn l1_distance(&self, o: &Field2D, region: Option<&Rect>) -> Result<f64> {
        if !self.same_grid(o) {
            return Err(Error::domain("fields live on different grids"));
        }
        let mut acc = KahanSum::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                if region.is_none_or(|r| r.contains(self.position(i, j))) {
                    acc.add((self.get(i, j) - o.get(i, j)).abs());
                }
            }
        }
        Ok(acc.value() * self.step[0] * self.step[1])
    }
}

fn axis_lerp(t: f64, n: usize) -> (usize, f64) {
    if t <= 0.0 {
        return (0, 0.0);
    }
    let last = (n - 1) as f64;
    if t >= last {
        return (n - 2, 1.0);
    }
    let i = (t.floor() as usize).min(n - 2);
    (i, t - i as f64)
}

impl Field for Field2D {
    fn eval(&self, p: [f64; 2]) -> f64 {
        let (i, fx) = axis_lerp((p[0] - self.origin[0]) / self.step[0], self.nx);
        let (j, fy) = axis_lerp((p[1] - self.origin[1]) / self.step[1], self.ny);
        let k = j * self.nx + i;
        let d = &self.data;
        let lo = d[k] + fx * (d[k + 1] - d[k]);
        let hi = d[k + self.nx] + fx * (d[k + self.nx + 1] - d[k + self.nx]);
        lo + fy * (hi - lo)
    }

    fn bounded_window(&self) -> Option<Rect> {
        self.boundary_value().map(|_| self.window())
    }

    fn window(&self) -> Rect {
        let [x0, y0] = self.origin;
        Rect {
            x0,
            x1: x0 + self.step[0] * (self.nx - 1) as f64,
            y0,
            y1: y0 + self.step[1] * (self.ny - 1) as f64,
        }
    }

    fn line_breaks(&self, p: [f64; 2], d: [f64; 2]) -> Vec<f64> {
        let mut out = Vec::new();
        for axis in 0..2 {
            if d[axis].abs() < 1e-14 {
                continue;
            }
            let n = if axis == 0 { self.nx } else { self.ny };
            for i in 0..n {
                let c = self.origin[axis] + self.step[axis] * i as f64;
                out.push((c - p[axis]) / d[axis]);
            }
        }
        out
    }
}

type PlaneMap = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
type LineBreaks = Arc<dyn Fn([f64; 2], [f64; 2]) -> Vec<f64> + Send + Sync>;

/// Closed-form field.
#[derive(Clone)]
pub struct AnalyticField2D {
    name: String,
    f: PlaneMap,
    window: Rect,
    bounded: bool,
    breaks: Option<LineBreaks>,
}

impl fmt::Debug for AnalyticField2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField2D")
            .field("name", &self.name)
            .field("window", &self.window)
            .field("bounded", &self.bounded)
            .finish()
    }
}

impl AnalyticField2D {
    /// `bounded` asserts that `f` is constant outside `window`; the claim is
    /// spot-checked on a ring of 16 points.
    pub fn new<F>(name: impl Into<String>, f: F, window: Rect, bounded: bool) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        if bounded {
            let far = f([window.x1 + 1e3, window.y1 + 1e3]);
            let cx = 0.5 * (window.x0 + window.x1);
            let cy = 0.5 * (window.y0 + window.y1);
            let rad = 0.5 * (window.x1 - window.x0).hypot(window.y1 - window.y0) + 1e-9;
            for k in 0..16 {
                let t = k as f64 * std::f64::consts::PI / 8.0;
                let v = f([cx + 1.01 * rad * t.cos(), cy + 1.01 * rad * t.sin()]);
                if (v - far).abs() > 1e-12 * (1.0 + far.abs()) {
                    return Err(Error::domain(format!("field `{name}` is not constant outside its window")));
                }
            }
        }
        Ok(AnalyticField2D {
            name,
            f: Arc::new(f),
            window,
            bounded,
            breaks: None,
        })
    }

    pub fn with_line_breaks<B>(mut self, b: B) -> Self
    where
        B: Fn([f64; 2], [f64; 2]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.breaks = Some(Arc::new(b));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `h` on the open disk of radius `r` centred at `c`, `0` elsewhere.
    pub fn disk(c: [f64; 2], r: f64, h: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("disk radius must be positive, got {r}")));
        }
        let w = Rect::new(c[0] - r, c[0] + r, c[1] - r, c[1] + r)?;
        let f = move |p: [f64; 2]| if (p[0] - c[0]).hypot(p[1] - c[1]) < r { h } else { 0.0 };
        Ok(Self::new(format!("disk:{r}:{h}"), f, w, true)?.with_line_breaks(move |p, d| {
            // |p + t d - c|^2 = r^2
            let q = [p[0] - c[0], p[1] - c[1]];
            let a = d[0] * d[0] + d[1] * d[1];
            let b = q[0] * d[0] + q[1] * d[1];
            let disc = b * b - a * (q[0] * q[0] + q[1] * q[1] - r * r);
            if disc <= 0.0 {
                return Vec::new();
            }
            let s = disc.sqrt();
            vec![(-b - s) / a, (-b + s) / a]
        }))
    }

    /// `h` for `x_1 >= 0`, `0` otherwise. Not bounded: evaluate on rectangles.
    pub fn halfplane(h: f64) -> Self {
        Self::new(format!("halfplane:{h}"), move |p| if p[0] >= 0.0 { h } else { 0.0 }, Rect::square(1.0), false)
            .expect("unbounded fields are not checked")
    }

    /// `a x_1` clamped to `[0, a]` on `0 <= x_1 <= 1`. Not bounded.
    pub fn affine(a: f64) -> Self {
        Self::new(
            format!("affine:{a}"),
            move |p| a * p[0].clamp(0.0, 1.0),
            Rect::new(0.0, 1.0, 0.0, 1.0).expect("unit square"),
            false,
        )
        .expect("unbounded fields are not checked")
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, Rect::square(1.0), true).expect("zero is constant")
    }
}

impl Field for AnalyticField2D {
    fn eval(&self, p: [f64; 2]) -> f64 {
        (self.f)(p)
    }

    fn bounded_window(&self) -> Option<Rect> {
        self.bounded.then_some(self.window)
    }

    fn window(&self) -> Rect {
        self.window
    }

    fn line_breaks(&self, p: [f64; 2], d: [f64; 2]) -> Vec<f64> {
        self.breaks.as_ref().map(|b| b(p, d)).unwrap_or_default()
    }
}

/// Lattice discretization of the `xi`-integral: offsets `h (i, j)` with
/// `0 < |xi| <= R` and weights `eta(xi) h^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilQuadrature {
    h: f64,
    radius: f64,
    offsets: Vec<([f64; 2], f64)>,
}

impl StencilQuadrature {
    pub fn new(k: &Kernel, h: f64) -> Result<Self> {
        Self::truncated(k, h, k.radius())
    }

    /// Offsets restricted to `|xi| <= min(radius, R)`.
    pub fn truncated(k: &Kernel, h: f64, radius: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(format!("stencil step must be positive, got {h}")));
        }
        if !(radius > 0.0) {
            return Err(Error::domain(format!("stencil radius must be positive, got {radius}")));
        }
        let r = k.radius().min(radius);
        let m = (r / h + 1e-9).floor() as i64;
        let mut offsets = Vec::new();
        let rows = if k.dim() == 1 { 0..=0 } else { -m..=m };
        for j in rows {
            for i in -m..=m {
                if i == 0 && j == 0 {
                    continue;
                }
                let xi = [h * i as f64, h * j as f64];
                let rho = xi[0].hypot(xi[1]);
                if rho > r * (1.0 + 1e-12) {
                    continue;
                }
                let w = k.eta_radial(rho.min(r)) * h.powi(k.dim() as i32);
                if w > 0.0 {
                    offsets.push((xi, w));
                }
            }
        }
        if offsets.is_empty() {
            return Err(Error::domain(format!("stencil with step {h} has no offsets inside radius {r}")));
        }
        Ok(StencilQuadrature { h, radius: r, offsets })
    }

    /// Step `R / 8`.
    pub fn default_for(k: &Kernel) -> Result<Self> {
        Self::new(k, k.radius() / 8.0)
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn offsets(&self) -> &[([f64; 2], f64)] {
        &self.offsets
    }

    pub fn total_weight(&self) -> f64 {
        self.offsets.iter().map(|o| o.1).collect::<KahanSum>().value()
    }

    /// Largest `|xi_1|`, `|xi_2|` over the offsets.
    fn reach(&self) -> [f64; 2] {
        self.offsets
            .iter()
            .fold([0.0, 0.0], |m, (xi, _)| [m[0].max(xi[0].abs()), m[1].max(xi[1].abs())])
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("eps must be positive, got {eps}")))
    }
}

/// Lattice nodes used for an integral, with `u` precomputed on them.
struct NodeGrid {
    i0: i64,
    j0: i64,
    nx: usize,
    ny: usize,
    base: Vec<f64>,
}

impl NodeGrid {
    fn new(u: &dyn Field, lat: &Lattice, r: &Rect) -> Self {
        let (i0, i1) = lat.index_range(r.x0, r.x1, 0);
        let (j0, j1) = lat.index_range(r.y0, r.y1, 1);
        let nx = (i1 - i0 + 1).max(0) as usize;
        let ny = (j1 - j0 + 1).max(0) as usize;
        let base = (0..ny)
            .into_par_iter()
            .flat_map_iter(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| u.eval(lat.node(i0 + i as i64, j0 + j as i64)))
            .collect();
        NodeGrid { i0, j0, nx, ny, base }
    }
}

/// Directional sum over prepared nodes; `keep` filters `(x, x + s)` pairs.
fn directional_sum(
    u: &dyn Field,
    fam: &PhiEpsFamily,
    eps: f64,
    xi: [f64; 2],
    lat: &Lattice,
    g: &NodeGrid,
    keep: &(dyn Fn([f64; 2], [f64; 2]) -> bool + Sync),
) -> f64 {
    let norm = xi[0].hypot(xi[1]);
    let s = [eps * xi[0], eps * xi[1]];
    let scale = eps * norm;
    let rows: Vec<f64> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let mut acc = KahanSum::new();
            for i in 0..g.nx {
                let x = lat.node(g.i0 + i as i64, g.j0 + j as i64);
                let y = [x[0] + s[0], x[1] + s[1]];
                if !keep(x, y) {
                    continue;
                }
                let d = (u.eval(y) - g.base[j * g.nx + i]).abs();
                acc.add(fam.value(scale, d / scale));
            }
            acc.value()
        })
        .collect();
    rows.into_iter().collect::<KahanSum>().value() * lat.cell_area()
}

fn whole_plane_rect(u: &dyn Field, margin: [f64; 2]) -> Result<Rect> {
    let w = u
        .bounded_window()
        .ok_or_else(|| Error::domain("field is not constant outside a bounded rectangle; pass a rectangle"))?;
    Ok(w.grow(margin[0], margin[1]))
}

fn rect_of(region: &Region) -> Result<Rect> {
    match region {
        Region::Rect(r) => Ok(*r),
        Region::Polygon(_) => Err(Error::unsupported("only rectangular domains are implemented")),
    }
}

/// `F_{eps,xi}(u, Omega) = int_Omega phi_{eps|xi|}(|u(x + eps xi) - u(x)| / (eps |xi|)) dx`
/// on lattice nodes; `None` means the whole plane.
pub fn f_eps_xi(u: &dyn Field, fam: &PhiEpsFamily, eps: f64, xi: [f64; 2], lat: &Lattice, omega: Option<&Region>) -> Result<f64> {
    check_eps(eps)?;
    if xi[0] == 0.0 && xi[1] == 0.0 {
        return Err(Error::domain("xi must be non-zero"));
    }
    let rect = match omega {
        Some(r) => rect_of(r)?,
        None => {
            if fam.value(eps * xi[0].hypot(xi[1]), 0.0) > 0.0 {
                return Ok(f64::INFINITY);
            }
            whole_plane_rect(u, [eps * xi[0].abs(), eps * xi[1].abs()])?
        }
    };
    let g = NodeGrid::new(u, lat, &rect);
    Ok(directional_sum(u, fam, eps, xi, lat, &g, &|_, _| true))
}

fn stencil_sum(
    u: &dyn Field,
    fam: &PhiEpsFamily,
    eps: f64,
    q: &StencilQuadrature,
    lat: &Lattice,
    rect: &Rect,
    keep: &(dyn Fn([f64; 2], [f64; 2]) -> bool + Sync),
) -> Result<Energy> {
    let g = NodeGrid::new(u, lat, rect);
    let mut acc = KahanSum::new();
    for (xi, w) in q.offsets() {
        acc.add(w * directional_sum(u, fam, eps, *xi, lat, &g, keep));
    }
    let v = acc.value();
    if v.is_nan() {
        return Err(Error::Numeric(format!("energy is NaN at eps={eps}")));
    }
    Ok(if v.is_infinite() { Energy::Infinite } else { Energy::Finite(v) })
}

/// Whole-plane `F_eps(u) = sum_xi w_xi F_{eps,xi}(u)`; `u` must be constant
/// outside a bounded rectangle, which is enlarged by `eps R` for the `x`-sum.
pub fn f_eps_nd(u: &dyn Field, fam: &PhiEpsFamily, eps: f64, q: &StencilQuadrature, lat: &Lattice) -> Result<Energy> {
    check_eps(eps)?;
    if fam.value(eps * q.step(), 0.0) > 0.0 {
        return Ok(Energy::Infinite);
    }
    let reach = q.reach();
    let rect = whole_plane_rect(u, [eps * reach[0], eps * reach[1]])?;
    stencil_sum(u, fam, eps, q, lat, &rect, &|_, _| true)
}

/// `F_eps(u, Omega)` with `x` restricted to `Omega`.
pub fn f_eps_nd_on(u: &dyn Field, fam: &PhiEpsFamily, eps: f64, q: &StencilQuadrature, lat: &Lattice, omega: &Region) -> Result<Energy> {
    check_eps(eps)?;
    let rect = rect_of(omega)?;
    stencil_sum(u, fam, eps, q, lat, &rect, &|_, _| true)
}

/// Restricted functional: both `x` and `x + eps xi` lie in `Omega`. For a
/// rectangle every such pair sees the other.
pub fn f_eps_vis(u: &dyn Field, fam: &PhiEpsFamily, eps: f64, q: &StencilQuadrature, lat: &Lattice, omega: &Region) -> Result<Energy> {
    check_eps(eps)?;
    let rect = rect_of(omega)?;
    stencil_sum(u, fam, eps, q, lat, &rect, &|_, y| rect.contains(y))
}

/// One-dimensional `F_eps(u) = sum_xi w_xi F_{eps|xi|}(u)` over a 1-D stencil.
pub fn f_eps_nd_1d(
    u: &dyn Signal,
    fam: &PhiEpsFamily,
    eps: f64,
    q: &StencilQuadrature,
    quad: crate::energy_1d::Quad1D,
) -> Result<Energy> {
    let mut acc = Energy::ZERO;
    for (xi, w) in q.offsets() {
        if xi[1] != 0.0 {
            return Err(Error::domain("stencil is not one-dimensional"));
        }
        let e = crate::energy_1d::f_eps_1d(u, fam, eps * xi[0].abs(), crate::energy_1d::Domain1D::WholeLine, quad)?;
        acc = acc + e.value * *w;
    }
    Ok(acc)
}

/// Restriction `t -> u(y n + t xi / |xi|)`, `n` the unit normal `(-xi_2, xi_1) / |xi|`.
pub fn slice<F: Field + Clone + Send + 'static>(u: &F, xi: [f64; 2], y: f64) -> Result<AnalyticSignal1D> {
    let norm = xi[0].hypot(xi[1]);
    if norm == 0.0 {
        return Err(Error::domain("xi must be non-zero"));
    }
    let e = [xi[0] / norm, xi[1] / norm];
    let p = [-e[1] * y, e[0] * y];
    let win = u.bounded_window().unwrap_or_else(|| u.window());
    let (mut a, mut b) = (f64::NEG_INFINITY, f64::INFINITY);
    for (axis, (lo, hi)) in [(win.x0, win.x1), (win.y0, win.y1)].into_iter().enumerate() {
        if e[axis].abs() < 1e-15 {
            if p[axis] < lo || p[axis] > hi {
                a = 0.0;
                b = 0.0;
            }
            continue;
        }
        let t0 = (lo - p[axis]) / e[axis];
        let t1 = (hi - p[axis]) / e[axis];
        a = a.max(t0.min(t1));
        b = b.min(t0.max(t1));
    }
    if a > b {
        a = 0.0;
        b = 0.0;
    }
    let breaks = u.line_breaks(p, e);
    let v = u.clone();
    let s = AnalyticSignal1D::new(
        format!("slice y={y}"),
        move |t| v.eval([p[0] + t * e[0], p[1] + t * e[1]]),
        a,
        b,
        breaks,
    )?;
    Ok(s)
}

/// `C^delta u(x) = omega_0^{-1} sum_xi w_xi u(x + delta xi)` on the nodes of
/// `u`, with `omega_0` the total stencil weight.
pub fn mollify(u: &Field2D, k: &Kernel, delta: f64, q: &StencilQuadrature) -> Result<Field2D> {
    check_eps(delta)?;
    if !k.is_compact() {
        return Err(Error::unsupported("mollification needs a compactly supported kernel"));
    }
    let w0 = q.total_weight();
    let (nx, ny) = u.dims();
    let data: Vec<f64> = (0..ny)
        .into_par_iter()
        .flat_map_iter(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| {
            let x = u.position(i, j);
            let acc: KahanSum = q
                .offsets()
                .iter()
                .map(|(xi, w)| w * u.eval([x[0] + delta * xi[0], x[1] + delta * xi[1]]))
                .collect();
            acc.value() / w0
        })
        .collect();
    Field2D::new(u.origin(), u.step(), nx, ny, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_1d::{f_eps_1d, Domain1D, Quad1D};
    use crate::kernels::{c_pn, Profile};
    use std::f64::consts::PI;

    fn fin(e: Energy) -> f64 {
        e.finite().unwrap()
    }

    fn disk_lattice(n: usize) -> Lattice {
        Lattice::cells(&Rect::square(1.5), n).unwrap()
    }

    #[test]
    fn constant_field_is_free() {
        let u = Field2D::from_fn([-1.0, -1.0], [0.1, 0.1], 21, 21, |_| 2.5).unwrap();
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        let q = StencilQuadrature::default_for(&k).unwrap();
        let e = f_eps_nd(&u, &PhiEpsFamily::ArctanMs, 0.2, &q, &u.lattice()).unwrap();
        assert_eq!(fin(e), 0.0);
        let om = Region::Rect(Rect::square(0.5));
        assert_eq!(fin(f_eps_vis(&u, &PhiEpsFamily::ArctanMs, 0.2, &q, &u.lattice(), &om).unwrap()), 0.0);
        assert_eq!(f_eps_xi(&u, &PhiEpsFamily::ArctanMs, 0.2, [1.0, 0.5], &u.lattice(), None).unwrap(), 0.0);
    }

    #[test]
    fn stencil_weights_approach_omega() {
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for h in [1.0 / 8.0, 1.0 / 32.0, 1.0 / 128.0] {
            let err = (StencilQuadrature::new(&k, h).unwrap().total_weight() - k.omega()).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev / k.omega() < 1e-2);
        let q = StencilQuadrature::default_for(&k).unwrap();
        assert!(q.offsets().iter().all(|(xi, w)| *w >= 0.0 && xi.iter().any(|c| *c != 0.0)));
        assert!(StencilQuadrature::new(&k, 2.0).is_err());
        let t = StencilQuadrature::truncated(&k, 0.125, 0.5).unwrap();
        assert_eq!(t.radius(), 0.5);
        assert!(t.offsets().iter().all(|(xi, _)| xi[0].hypot(xi[1]) <= 0.5 + 1e-12));
        assert!(t.offsets().len() < q.offsets().len());
        assert_eq!(StencilQuadrature::truncated(&k, 0.125, 5.0).unwrap().radius(), 1.0);
        assert!(StencilQuadrature::truncated(&k, 0.125, 0.0).is_err());
    }

    #[test]
    fn nd_is_weighted_sum_of_directional() {
        let u = AnalyticField2D::disk([0.0, 0.0], 1.0, 1.0).unwrap();
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        let q = StencilQuadrature::new(&k, 0.25).unwrap();
        let lat = disk_lattice(60);
        let eps = 0.2;
        let total = fin(f_eps_nd(&u, &PhiEpsFamily::ArctanMs, eps, &q, &lat).unwrap());
        // the same node set: the whole-plane window grown by the stencil reach
        let rect = Region::Rect(Rect::square(1.0 + eps));
        let sum: f64 = q
            .offsets()
            .iter()
            .map(|(xi, w)| w * f_eps_xi(&u, &PhiEpsFamily::ArctanMs, eps, *xi, &lat, Some(&rect)).unwrap())
            .sum();
        assert!((total - sum).abs() < 1e-12 * total, "{total} {sum}");
    }

    #[test]
    fn halfplane_separates() {
        let u = AnalyticField2D::halfplane(1.0);
        let om = Region::Rect(Rect::new(-1.0, 1.0, -0.5, 0.5).unwrap());
        let lat = Lattice::cells(&Rect::new(-1.0, 1.0, -0.5, 0.5).unwrap(), 200).unwrap();
        for eps in [0.1, 0.3] {
            let v = f_eps_xi(&u, &PhiEpsFamily::ArctanMs, eps, [1.0, 0.0], &lat, Some(&om)).unwrap();
            let one_d = f_eps_1d(&AnalyticSignal1D::heaviside(1.0), &PhiEpsFamily::ArctanMs, eps, Domain1D::WholeLine, Quad1D::default())
                .unwrap()
                .value
                .to_f64();
            assert!((v - 1.0 * one_d).abs() < 1e-10, "{v} {one_d}");
        }
        assert!(f_eps_xi(&u, &PhiEpsFamily::ArctanMs, 0.1, [1.0, 0.0], &lat, None).is_err());
    }

    #[test]
    fn slices() {
        let u = AnalyticField2D::new("x1", |p| p[0].clamp(-2.0, 2.0), Rect::square(2.0), false).unwrap();
        let s = slice(&u, [1.0, 0.0], 0.0).unwrap();
        assert!((s.eval(0.7) - 0.7).abs() < 1e-15);
        let s = slice(&u, [0.0, 1.0], 0.3);
        // the x1 field restricted to a vertical line through x1 = -0.3 is constant
        let s = s.unwrap();
        for t in [-5.0, 0.0, 1.0] {
            assert!((s.eval(t) + 0.3).abs() < 1e-15);
        }
        assert!(slice(&u, [0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn fubini_on_disk() {
        let u = AnalyticField2D::disk([0.0, 0.0], 1.0, 1.0).unwrap();
        let lat = disk_lattice(600);
        for xi in [[1.0, 0.0], [0.6, 0.8], [0.5, 0.25]] {
            let eps = 0.1;
            let norm = f64::hypot(xi[0], xi[1]);
            let direct = f_eps_xi(&u, &PhiEpsFamily::ArctanMs, eps, xi, &lat, None).unwrap();
            let ny = 2000;
            let hy = 2.4 / ny as f64;
            let sliced: f64 = (0..ny)
                .map(|j| {
                    let y = -1.2 + hy * (j as f64 + 0.5);
                    let s = slice(&u, xi, y).unwrap();
                    f_eps_1d(&s, &PhiEpsFamily::ArctanMs, eps * norm, Domain1D::WholeLine, Quad1D::with_step(0.01))
                        .unwrap()
                        .value
                        .to_f64()
                })
                .sum::<f64>()
                * hy;
            assert!((direct - sliced).abs() < 1e-3 * sliced, "xi={xi:?} {direct} {sliced}");
        }
    }

    #[test]
    fn vis_matches_nd_with_margin_and_drops_below_when_tight() {
        let u = AnalyticField2D::disk([0.0, 0.0], 0.5, 1.0).unwrap();
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        let q = StencilQuadrature::new(&k, 0.25).unwrap();
        let lat = Lattice::cells(&Rect::square(1.0), 80).unwrap();
        let eps = 0.1;
        let nd = fin(f_eps_nd(&u, &PhiEpsFamily::ArctanMs, eps, &q, &lat).unwrap());
        let wide = fin(f_eps_vis(&u, &PhiEpsFamily::ArctanMs, eps, &q, &lat, &Region::Rect(Rect::square(0.9))).unwrap());
        assert!((nd - wide).abs() < 1e-10 * nd);
        let tight = fin(f_eps_vis(&u, &PhiEpsFamily::ArctanMs, eps, &q, &lat, &Region::Rect(Rect::square(0.5))).unwrap());
        assert!(tight < nd);
        let poly = Region::Polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(
            f_eps_vis(&u, &PhiEpsFamily::ArctanMs, eps, &q, &lat, &poly),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn affine_interior_density() {
        // phi_eps = r^2, eta = |xi|^2 J: interior density a^2 c_{2,2} j_4
        let a = 1.5;
        let u = Field2D::from_fn([-2.0, -2.0], [0.05, 0.05], 81, 81, |p| a * p[0]).unwrap();
        let k = Kernel::indicator(1.0, 2, 2.0).unwrap();
        let q = StencilQuadrature::new(&k, 1.0 / 64.0).unwrap();
        let om = Region::Rect(Rect::square(0.5));
        let v = fin(f_eps_nd_on(&u, &PhiEpsFamily::Power(2.0), 0.3, &q, &u.lattice(), &om).unwrap());
        let area = 1.0 + 0.05 * 2.0 + 0.05 * 0.05; // nodes on the closed square
        let expected = a * a * c_pn(2.0, 2).unwrap() * k.j_alpha(4.0).unwrap();
        let discrete: f64 = q.offsets().iter().map(|(xi, w)| w * a * a * (xi[0] / xi[0].hypot(xi[1])).powi(2)).sum();
        assert!((v / area - discrete).abs() < 1e-9 * discrete);
        assert!((v / area - expected).abs() < 2e-2 * expected);
    }

    #[test]
    fn translation_invariance_on_lattice() {
        let f = |p: [f64; 2]| if p[0].abs() < 0.3 && p[1].abs() < 0.2 { 1.0 } else { 0.0 };
        let u = Field2D::from_fn([-1.0, -1.0], [0.05, 0.05], 41, 41, f).unwrap();
        let v = Field2D::from_fn([-0.85, -0.9], [0.05, 0.05], 41, 41, |p| f([p[0] - 0.15, p[1] - 0.1])).unwrap();
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        let q = StencilQuadrature::new(&k, 0.25).unwrap();
        let a = fin(f_eps_nd(&u, &PhiEpsFamily::ArctanMs, 0.2, &q, &u.lattice()).unwrap());
        let b = fin(f_eps_nd(&v, &PhiEpsFamily::ArctanMs, 0.2, &q, &v.lattice()).unwrap());
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn mollifier_bounds() {
        let k = Kernel::indicator(1.0, 2, 0.0).unwrap();
        let q = StencilQuadrature::new(&k, 0.25).unwrap();
        let c = Field2D::from_fn([0.0, 0.0], [0.1, 0.1], 11, 11, |_| -3.0).unwrap();
        let m = mollify(&c, &k, 0.2, &q).unwrap();
        assert!(m.data().iter().all(|v| (v + 3.0).abs() < 1e-14));
        let u = Field2D::from_fn([0.0, 0.0], [0.1, 0.1], 11, 11, |p| (7.0 * p[0]).sin() * (3.0 * p[1]).cos()).unwrap();
        let m = mollify(&u, &k, 0.2, &q).unwrap();
        assert!(m.sup_norm() <= u.sup_norm() + 1e-15);
        let g = Kernel::new(Profile::Gaussian, 2, 0.0).unwrap();
        assert!(mollify(&u, &g, 0.2, &q).is_err());
    }

    #[test]
    fn one_dimensional_delegation() {
        let k = Kernel::indicator(1.0, 1, 1.0).unwrap();
        let q = StencilQuadrature::new(&k, 0.25).unwrap();
        assert_eq!(q.offsets().len(), 8);
        let u = AnalyticSignal1D::heaviside(1.0);
        let e = f_eps_nd_1d(&u, &PhiEpsFamily::ArctanMs, 0.1, &q, Quad1D::default()).unwrap();
        let expected: f64 = q.offsets().iter().map(|(xi, w)| w * (1.0 / (0.1 * xi[0].abs())).atan()).sum();
        assert!((fin(e) - expected).abs() < 1e-12);
    }

    #[test]
    fn disk_energy_is_finite_and_grows_toward_limit() {
        let u = AnalyticField2D::disk([0.0, 0.0], 1.0, 1.0).unwrap();
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        let q = StencilQuadrature::default_for(&k).unwrap();
        let lat = disk_lattice(128);
        let a = fin(f_eps_nd(&u, &PhiEpsFamily::ArctanMs, 0.2, &q, &lat).unwrap());
        let b = fin(f_eps_nd(&u, &PhiEpsFamily::ArctanMs, 0.1, &q, &lat).unwrap());
        assert!(a > 0.0 && b > a && b < 4.0 * PI * PI / 3.0 * 1.2);
    }
}
