//! Limit functionals `int phi(|grad u|) + int_{S_u} psi(|u+ - u-|)` evaluated
//! exactly on explicit piecewise descriptions, and the closed-form limits of
//! the standard examples.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::energy::Energy;
use crate::energy_1d::{Interp, Signal, Signal1D};
use crate::energy_nd::Rect;
use crate::error::{Error, Result};
use crate::kernels::{c_pn, Kernel};
use crate::numeric::KahanSum;
use crate::phi_family::{parse_f64, PhiEpsFamily, PhiSpec, PsiSpec};

const JUMP_TOL: f64 = 1e-9;

/// Piecewise-affine function with jumps on `[t_0, t_K]`, constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Sbv1D {
    knots: Vec<f64>,
    slopes: Vec<f64>,
    jumps: Vec<(f64, f64, f64)>,
    anchor: f64,
    // sorted breakpoints (knots and jumps) with the right limit of u at each
    nodes: Vec<(f64, f64)>,
}

impl Sbv1D {
    /// `knots` strictly increasing, one slope per piece, jumps as
    /// `(location, u-, u+)` strictly inside the window; `anchor = u(t_0)`.
    /// Each `u-` must agree with the value reconstructed from the left.
    pub fn new(knots: Vec<f64>, slopes: Vec<f64>, mut jumps: Vec<(f64, f64, f64)>, anchor: f64) -> Result<Self> {
        if knots.len() < 2 || slopes.len() != knots.len() - 1 {
            return Err(Error::domain("need at least one piece and one slope per piece"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || knots.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::domain("knots must be finite and strictly increasing"));
        }
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (t0, tk) = (knots[0], knots[knots.len() - 1]);
        for (i, &(t, um, up)) in jumps.iter().enumerate() {
            if !(t > t0 && t < tk) || !um.is_finite() || !up.is_finite() {
                return Err(Error::domain(format!("jump at {t} is outside ({t0}, {tk})")));
            }
            if i > 0 && jumps[i - 1].0 == t {
                return Err(Error::domain(format!("duplicate jump at {t}")));
            }
        }
        let mut u = Sbv1D {
            knots,
            slopes,
            jumps,
            anchor,
            nodes: Vec::new(),
        };
        u.rebuild()?;
        Ok(u)
    }

    /// Builds from jump heights `(location, u+ - u-)` instead of explicit limits.
    pub fn from_heights(knots: Vec<f64>, slopes: Vec<f64>, heights: Vec<(f64, f64)>, anchor: f64) -> Result<Self> {
        let mut u = Self::new(knots, slopes, Vec::new(), anchor)?;
        let mut hs = heights;
        hs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut jumps = Vec::with_capacity(hs.len());
        let mut shift = 0.0;
        for (t, h) in hs {
            let um = u.eval(t) + shift;
            jumps.push((t, um, um + h));
            shift += h;
        }
        u = Self::new(u.knots, u.slopes, jumps, anchor)?;
        Ok(u)
    }

    /// Exact description of a sampled signal: affine pieces between samples
    /// for linear interpolation, jumps at mid-cells for nearest.
    pub fn from_signal(s: &Signal1D) -> Result<Self> {
        let xs: Vec<f64> = (0..s.len()).map(|i| s.x(i)).collect();
        let v = s.samples();
        match s.interp() {
            Interp::Linear => {
                let slopes = v.windows(2).map(|w| (w[1] - w[0]) / s.step()).collect();
                Self::new(xs, slopes, Vec::new(), v[0])
            }
            Interp::Nearest => {
                let jumps = v
                    .windows(2)
                    .enumerate()
                    .filter(|(_, w)| w[1] != w[0])
                    .map(|(i, w)| (xs[i] + 0.5 * s.step(), w[0], w[1]))
                    .collect();
                Self::new(vec![xs[0], xs[xs.len() - 1]], vec![0.0], jumps, v[0])
            }
        }
    }

    fn rebuild(&mut self) -> Result<()> {
        let mut pts: Vec<f64> = self.knots.clone();
        pts.extend(self.jumps.iter().map(|j| j.0));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut nodes = Vec::with_capacity(pts.len());
        let mut v = self.anchor;
        let mut jumps = self.jumps.iter().peekable();
        for (k, &t) in pts.iter().enumerate() {
            if k > 0 {
                v += self.slope_at(0.5 * (pts[k - 1] + t)) * (t - pts[k - 1]);
            }
            if let Some(&&(tj, um, up)) = jumps.peek() {
                if tj == t {
                    if (um - v).abs() > JUMP_TOL * (1.0 + v.abs()) {
                        return Err(Error::domain(format!("jump at {t}: u- = {um} but the left limit is {v}")));
                    }
                    v = up;
                    jumps.next();
                }
            }
            nodes.push((t, v));
        }
        self.nodes = nodes;
        Ok(())
    }

    fn piece_of(&self, x: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= x);
        i.clamp(1, self.knots.len() - 1) - 1
    }

    fn slope_at(&self, x: f64) -> f64 {
        self.slopes[self.piece_of(x)]
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn jumps(&self) -> &[(f64, f64, f64)] {
        &self.jumps
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// Largest `|u|` over the window.
    pub fn sup_norm(&self) -> f64 {
        let mut m = self.anchor.abs();
        for (i, &(t, v)) in self.nodes.iter().enumerate() {
            m = m.max(v.abs());
            if i > 0 {
                m = m.max(self.left_limit(t).abs());
            }
        }
        m
    }

    fn left_limit(&self, t: f64) -> f64 {
        let k = self.nodes.partition_point(|n| n.0 < t);
        let (t0, v0) = self.nodes[k.max(1) - 1];
        v0 + self.slope_at(0.5 * (t0 + t)) * (t - t0)
    }

    /// Restriction to `[a, b]` (a sub-window), keeping values.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Sbv1D> {
        if !(a < b) {
            return Err(Error::domain("empty restriction"));
        }
        let mut knots = vec![a];
        knots.extend(self.knots.iter().copied().filter(|&k| k > a && k < b));
        knots.push(b);
        let slopes = knots.windows(2).map(|w| self.slope_at(0.5 * (w[0] + w[1]))).collect();
        let jumps = self.jumps.iter().copied().filter(|j| j.0 > a && j.0 < b).collect();
        Sbv1D::new(knots, slopes, jumps, self.eval(a))
    }
}

impl Signal for Sbv1D {
    fn eval(&self, x: f64) -> f64 {
        if x <= self.nodes[0].0 {
            return self.anchor;
        }
        let k = self.nodes.partition_point(|n| n.0 <= x);
        let (t0, v0) = self.nodes[k - 1];
        if k == self.nodes.len() {
            return v0;
        }
        v0 + self.slope_at(0.5 * (t0 + x.min(self.nodes[k].0))) * (x - t0)
    }

    fn window(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    fn breaks(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.0).collect()
    }

    fn default_step(&self) -> f64 {
        let (a, b) = self.window();
        (b - a) / 4096.0
    }
}

impl fmt::Display for Sbv1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "anchor {:.17e}", self.anchor)?;
        for (w, s) in self.knots.windows(2).zip(&self.slopes) {
            writeln!(f, "piece {:.17e} {:.17e} {:.17e}", w[0], w[1], s)?;
        }
        for (t, um, up) in &self.jumps {
            writeln!(f, "jump {t:.17e} {um:.17e} {up:.17e}")?;
        }
        Ok(())
    }
}

impl FromStr for Sbv1D {
    type Err = Error;

    /// Lines `piece a b slope`, `jump t u- u+`, optional `anchor v`; `#` starts a comment.
    fn from_str(s: &str) -> Result<Self> {
        let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
        let mut jumps = Vec::new();
        let mut anchor = 0.0;
        for (ln, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let nums = |n: usize| -> Result<Vec<f64>> {
                if parts.len() != n + 1 {
                    return Err(Error::Parse(format!("line {}: `{}` expects {n} numbers", ln + 1, parts[0])));
                }
                parts[1..].iter().map(|p| parse_f64(p)).collect()
            };
            match parts[0] {
                "piece" => {
                    let v = nums(3)?;
                    pieces.push((v[0], v[1], v[2]));
                }
                "jump" => {
                    let v = nums(3)?;
                    jumps.push((v[0], v[1], v[2]));
                }
                "anchor" => anchor = nums(1)?[0],
                other => return Err(Error::Parse(format!("line {}: unknown record `{other}`", ln + 1))),
            }
        }
        if pieces.is_empty() {
            return Err(Error::Parse("no `piece` records".into()));
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots = vec![pieces[0].0];
        let mut slopes = Vec::new();
        for (a, b, s) in &pieces {
            if *a != *knots.last().expect("non-empty") {
                return Err(Error::Parse(format!("pieces are not contiguous at {a}")));
            }
            knots.push(*b);
            slopes.push(*s);
        }
        Sbv1D::new(knots, slopes, jumps, anchor)
    }
}

/// `sum_pieces length phi(|slope|) + sum_jumps psi(|u+ - u-|)`.
pub fn limit_energy_1d(u: &Sbv1D, phi: &PhiSpec, psi: &PsiSpec) -> Energy {
    let bulk: Energy = u
        .knots
        .windows(2)
        .zip(&u.slopes)
        .map(|(w, s)| phi.eval(s.abs()).scale(w[1] - w[0]))
        .sum();
    let jumps: Energy = u.jumps.iter().map(|&(_, um, up)| psi.eval((up - um).abs())).sum();
    bulk + jumps
}

/// `|Du|(R) = sum length |slope| + sum |jump|`.
pub fn total_variation_1d(u: &Sbv1D) -> f64 {
    let mut acc = KahanSum::new();
    for (w, s) in u.knots.windows(2).zip(&u.slopes) {
        acc.add((w[1] - w[0]) * s.abs());
    }
    for &(_, um, up) in &u.jumps {
        acc.add((up - um).abs());
    }
    acc.value()
}

type Grad = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
type Amp = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Piecewise-smooth 2-D function: gradient of the smooth part on a
/// rectangle plus a polyline jump set with amplitude `|u+ - u-|`.
#[derive(Clone)]
pub struct PiecewiseField2D {
    name: String,
    domain: Rect,
    grad: Grad,
    curve: Vec<[f64; 2]>,
    amplitude: Amp,
}

impl fmt::Debug for PiecewiseField2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseField2D")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("curve_vertices", &self.curve.len())
            .finish()
    }
}

impl PiecewiseField2D {
    /// `curve` is an open polyline; repeat the first vertex to close it.
    pub fn new<G, A>(name: impl Into<String>, domain: Rect, grad: G, curve: Vec<[f64; 2]>, amplitude: A) -> Result<Self>
    where
        G: Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
        A: Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    {
        if curve.len() == 1 {
            return Err(Error::domain("a jump curve needs at least two vertices"));
        }
        let grown = domain.grow(1e-12, 1e-12);
        if curve.iter().any(|p| !grown.contains(*p)) {
            return Err(Error::domain("jump curve leaves the domain"));
        }
        for w in curve.windows(2) {
            let m = [0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])];
            if !(amplitude(m) > 0.0) {
                return Err(Error::domain("jump amplitude must be positive along the curve"));
            }
        }
        Ok(PiecewiseField2D {
            name: name.into(),
            domain,
            grad: Arc::new(grad),
            curve,
            amplitude: Arc::new(amplitude),
        })
    }

    /// Indicator `h` of the disk of radius `r` centred at `c`, the circle
    /// replaced by an inscribed regular polygon with `sides` sides.
    pub fn disk(c: [f64; 2], r: f64, h: f64, sides: usize) -> Result<Self> {
        if sides < 3 || !(r > 0.0) || h == 0.0 {
            return Err(Error::domain("disk needs r > 0, h != 0 and at least 3 sides"));
        }
        let curve = (0..=sides)
            .map(|k| {
                let t = 2.0 * PI * (k % sides) as f64 / sides as f64;
                [c[0] + r * t.cos(), c[1] + r * t.sin()]
            })
            .collect();
        let dom = Rect::new(c[0] - r, c[0] + r, c[1] - r, c[1] + r)?;
        Self::new(format!("disk:{r}:{h}"), dom, |_| [0.0, 0.0], curve, move |_| h.abs())
    }

    /// `a x_1` on the unit square.
    pub fn affine(a: f64) -> Self {
        Self::new(
            format!("affine:{a}"),
            Rect::new(0.0, 1.0, 0.0, 1.0).expect("unit square"),
            move |_| [a, 0.0],
            Vec::new(),
            |_| 1.0,
        )
        .expect("affine field is valid")
    }

    pub fn zero() -> Self {
        Self::new("zero", Rect::square(1.0), |_| [0.0, 0.0], Vec::new(), |_| 1.0).expect("zero field is valid")
    }

    /// Replaces the jump curve, e.g. with one read from a polyline file.
    pub fn with_curve(mut self, curve: Vec<[f64; 2]>) -> Result<Self> {
        let amp = self.amplitude.clone();
        let grad = self.grad.clone();
        self = Self::new(self.name, self.domain, move |p| grad(p), curve, move |p| amp(p))?;
        Ok(self)
    }

    /// Rotation by 90 degrees about the origin.
    pub fn rotate90(&self) -> Self {
        let rot = |p: [f64; 2]| [-p[1], p[0]];
        let inv = |p: [f64; 2]| [p[1], -p[0]];
        let d = self.domain;
        let grad = self.grad.clone();
        let amp = self.amplitude.clone();
        PiecewiseField2D {
            name: format!("{}@rot90", self.name),
            domain: Rect {
                x0: -d.y1,
                x1: -d.y0,
                y0: d.x0,
                y1: d.x1,
            },
            grad: Arc::new(move |p| rot(grad(inv(p)))),
            curve: self.curve.iter().map(|&p| rot(p)).collect(),
            amplitude: Arc::new(move |p| amp(inv(p))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn curve(&self) -> &[[f64; 2]] {
        &self.curve
    }

    pub fn curve_length(&self) -> f64 {
        self.curve
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .collect::<KahanSum>()
            .value()
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        (self.grad)(p)
    }

    pub fn amplitude(&self, p: [f64; 2]) -> f64 {
        (self.amplitude)(p)
    }
}

/// Resolution of [`limit_energy_2d`]'s quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad2D {
    /// Midpoint cells per side of the domain.
    pub cells: usize,
    /// Midpoint sub-segments per polyline edge.
    pub per_edge: usize,
}

impl Default for Quad2D {
    fn default() -> Self {
        Quad2D { cells: 256, per_edge: 8 }
    }
}

/// `int phi(|grad u|) dx + int_curve psi(amplitude) ds` by composite midpoint.
pub fn limit_energy_2d(u: &PiecewiseField2D, phi: &PhiSpec, psi: &PsiSpec, quad: Quad2D) -> Energy {
    let d = u.domain;
    let n = quad.cells.max(1);
    let (hx, hy) = ((d.x1 - d.x0) / n as f64, (d.y1 - d.y0) / n as f64);
    let mut bulk = Energy::ZERO;
    for j in 0..n {
        let mut row = KahanSum::new();
        let mut inf = false;
        for i in 0..n {
            let p = [d.x0 + hx * (i as f64 + 0.5), d.y0 + hy * (j as f64 + 0.5)];
            let g = u.gradient(p);
            match phi.eval(g[0].hypot(g[1])) {
                Energy::Finite(v) => row.add(v),
                Energy::Infinite => inf = true,
            }
        }
        bulk = bulk + if inf { Energy::Infinite } else { Energy::Finite(row.value() * hx * hy) };
    }
    let m = quad.per_edge.max(1);
    let mut jump = Energy::ZERO;
    for w in u.curve.windows(2) {
        let len = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        for k in 0..m {
            let s = (k as f64 + 0.5) / m as f64;
            let p = [w[0][0] + s * (w[1][0] - w[0][0]), w[0][1] + s * (w[1][1] - w[0][1])];
            jump = jump + psi.eval(u.amplitude(p)).scale(len / m as f64);
        }
    }
    bulk + jump
}

/// The standard families with their kernels `eta = |xi|^w J(|xi|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Example {
    /// `phi_eps = r^p`, `w = p`, `p > 1`: pure bulk energy.
    PowerBulk(f64),
    /// `phi_eps = eps^{1/p - 1} r^{1/p}`, `w = 1/p`, `p > 1`: pure jump energy.
    RootJump(f64),
    /// `phi_eps = r`, `w = 1`: total variation.
    TotalVariation,
    /// `phi_eps = arctan(eps r^2) / eps`, `w = 1`.
    MumfordShah,
    /// `phi_eps = r^2 / (sqrt(eps) r^{3/2} + 1)`, `w = 1`.
    Rational,
}

impl Example {
    pub const NAMES: [&'static str; 5] = ["power", "root", "tv", "ms", "rational"];

    pub fn family(&self) -> PhiEpsFamily {
        match *self {
            Example::PowerBulk(p) => PhiEpsFamily::Power(p),
            Example::RootJump(p) => PhiEpsFamily::Root(p),
            Example::TotalVariation => PhiEpsFamily::Linear,
            Example::MumfordShah => PhiEpsFamily::ArctanMs,
            Example::Rational => PhiEpsFamily::Rational32,
        }
    }

    /// Power `w` in the kernel weight `|xi|^w` the example is built on.
    pub fn kernel_weight(&self) -> f64 {
        match *self {
            Example::PowerBulk(p) => p,
            Example::RootJump(p) => 1.0 / p,
            _ => 1.0,
        }
    }

    /// Bulk and jump integrands of the limit, constants included.
    ///
    /// A bulk term `r^q` picks up `c_{q,n} j_{n+w}` (directional average of
    /// `|<grad u, xi/|xi|>|^q`); a jump term picks up `c_{1,n} j_{n+w}`, the
    /// factor `|<nu, xi/|xi|>|` coming from the slicing of the jump set.
    pub fn limit_integrands(&self, k: &Kernel) -> Result<(PhiSpec, PsiSpec)> {
        let w = self.kernel_weight();
        if (k.weight() - w).abs() > 1e-12 {
            return Err(Error::domain(format!("this example needs kernel weight {w}, got {}", k.weight())));
        }
        let n = k.dim();
        let moment = k.j_alpha(n as f64 + w)?;
        let bulk = |q: f64| -> Result<f64> { Ok(c_pn(q, n)? * moment) };
        let jump = c_pn(1.0, n)? * moment;
        Ok(match *self {
            Example::PowerBulk(p) => (PhiSpec::scaled_power(p, bulk(p)?)?, PsiSpec::Disabled),
            Example::RootJump(p) => (PhiSpec::Rigid, PsiSpec::scaled_power(1.0 / p, jump)?),
            Example::TotalVariation => (PhiSpec::scaled_power(1.0, bulk(1.0)?)?, PsiSpec::linear(jump)?),
            Example::MumfordShah => (PhiSpec::scaled_power(2.0, bulk(2.0)?)?, PsiSpec::constant(FRAC_PI_2 * jump)?),
            Example::Rational => (PhiSpec::scaled_power(2.0, bulk(2.0)?)?, PsiSpec::scaled_power(0.5, jump)?),
        })
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Example::PowerBulk(p) => write!(f, "power:{p}"),
            Example::RootJump(p) => write!(f, "root:{p}"),
            Example::TotalVariation => f.write_str("tv"),
            Example::MumfordShah => f.write_str("ms"),
            Example::Rational => f.write_str("rational"),
        }
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let p = || -> Result<f64> {
            let p = parse_f64(rest)?;
            if p > 1.0 {
                Ok(p)
            } else {
                Err(Error::domain(format!("example exponent must be > 1, got {p}")))
            }
        };
        match head {
            "power" => Ok(Example::PowerBulk(p()?)),
            "root" => Ok(Example::RootJump(p()?)),
            "tv" if rest.is_empty() => Ok(Example::TotalVariation),
            "ms" if rest.is_empty() => Ok(Example::MumfordShah),
            "rational" if rest.is_empty() => Ok(Example::Rational),
            _ => Err(Error::Parse(format!("unknown example `{s}`"))),
        }
    }
}

/// Explicit function the limit is evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum Descriptor<'a> {
    OneD(&'a Sbv1D),
    TwoD(&'a PiecewiseField2D, Quad2D),
}

/// Limit value of `example` on `u` for the kernel `k`. Forbidden
/// configurations (jumps for a pure bulk energy, slopes for a pure jump
/// energy) give the infinite sentinel.
pub fn target_limit(example: Example, k: &Kernel, u: Descriptor<'_>) -> Result<Energy> {
    let (phi, psi) = example.limit_integrands(k)?;
    match u {
        Descriptor::OneD(s) => {
            if k.dim() != 1 {
                return Err(Error::domain("1-D descriptor needs a 1-D kernel"));
            }
            Ok(limit_energy_1d(s, &phi, &psi))
        }
        Descriptor::TwoD(f, q) => {
            if k.dim() != 2 {
                return Err(Error::domain("2-D descriptor needs a 2-D kernel"));
            }
            Ok(limit_energy_2d(f, &phi, &psi, q))
        }
    }
}
