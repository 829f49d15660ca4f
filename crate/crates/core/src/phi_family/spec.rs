//! Bulk (`phi`) and jump (`psi`) integrands of the limit functionals.

use std::fmt;
use std::str::FromStr;

use crate::energy::Energy;
use crate::error::{Error, Result};

/// Piecewise-linear table on `[0, inf)` with affine extrapolation past the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub(crate) fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::domain("table needs at least two (knot, value) pairs"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("table knots must be strictly increasing"));
        }
        if knots[0] < 0.0 || values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::domain("table knots and values must be non-negative and finite"));
        }
        Ok(Table { knots, values })
    }

    fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect()
    }

    pub(crate) fn eval(&self, r: f64) -> f64 {
        let n = self.knots.len();
        if r <= self.knots[0] {
            return self.values[0];
        }
        let i = match self.knots.iter().position(|&k| k >= r) {
            Some(i) => i.max(1),
            None => n - 1,
        };
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (r - k0) / (k1 - k0)
    }

    fn scaled(&self, c: f64) -> Table {
        Table {
            knots: self.knots.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .knots
            .iter()
            .zip(&self.values)
            .map(|(k, v)| format!("{k}/{v}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

pub(crate) fn parse_table(s: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut knots = Vec::new();
    let mut values = Vec::new();
    for pair in s.split(',') {
        let (k, v) = pair
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("table entry `{pair}` is not `knot/value`")))?;
        knots.push(parse_f64(k)?);
        values.push(parse_f64(v)?);
    }
    Ok((knots, values))
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

/// Convex non-decreasing bulk energy.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiSpec {
    /// `coef * r^p`, `p >= 1`.
    Power { p: f64, coef: f64 },
    /// Linear interpolation of a convex non-decreasing table.
    Tabulated(Table),
    /// `0` at `r = 0` and `+inf` elsewhere: slopes are forbidden.
    Rigid,
}

impl PhiSpec {
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled_power(p, 1.0)
    }

    pub fn scaled_power(p: f64, coef: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("bulk power must be >= 1, got {p}")));
        }
        if !(coef > 0.0) || !coef.is_finite() {
            return Err(Error::domain(format!("bulk coefficient must be positive, got {coef}")));
        }
        Ok(PhiSpec::Power { p, coef })
    }

    /// Table on knots starting at 0; validated for monotonicity and convexity.
    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let t = Table::new(knots, values)?;
        if t.knots[0] != 0.0 {
            return Err(Error::domain("bulk table must start at knot 0"));
        }
        let s = t.slopes();
        if s.iter().any(|&v| v < 0.0) {
            return Err(Error::domain("bulk table must be non-decreasing"));
        }
        if s.windows(2).any(|w| w[1] < w[0] - 1e-12 * (1.0 + w[0].abs())) {
            return Err(Error::domain("bulk table must be convex"));
        }
        Ok(PhiSpec::Tabulated(t))
    }

    pub fn eval(&self, r: f64) -> Energy {
        match self {
            PhiSpec::Rigid if r > 0.0 => Energy::Infinite,
            _ => Energy::Finite(self.eval_finite(r)),
        }
    }

    /// Value of a finite variant. `Rigid` evaluates to `0` at the origin and
    /// `f64::INFINITY` elsewhere; callers that allow it use [`PhiSpec::eval`].
    pub(crate) fn eval_finite(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match self {
            PhiSpec::Power { p, coef } => {
                if *p == 2.0 {
                    coef * r * r
                } else {
                    coef * r.powf(*p)
                }
            }
            PhiSpec::Tabulated(t) => t.eval(r),
            PhiSpec::Rigid => {
                if r > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, PhiSpec::Rigid)
    }

    /// `phi(r)/r -> +inf` as `r -> +inf`.
    pub fn superlinear(&self) -> bool {
        match self {
            PhiSpec::Power { p, .. } => *p > 1.0,
            PhiSpec::Tabulated(_) => false,
            PhiSpec::Rigid => true,
        }
    }

    pub fn scaled(&self, c: f64) -> PhiSpec {
        match self {
            PhiSpec::Power { p, coef } => PhiSpec::Power { p: *p, coef: coef * c },
            PhiSpec::Tabulated(t) => PhiSpec::Tabulated(t.scaled(c)),
            PhiSpec::Rigid => PhiSpec::Rigid,
        }
    }
}

impl fmt::Display for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiSpec::Power { p, coef } if *coef == 1.0 => write!(f, "power:{p}"),
            PhiSpec::Power { p, coef } => write!(f, "power:{p}:{coef}"),
            PhiSpec::Tabulated(t) => write!(f, "tabulated:{t}"),
            PhiSpec::Rigid => write!(f, "rigid"),
        }
    }
}

impl FromStr for PhiSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "power" => {
                let mut it = rest.split(':');
                let p = parse_f64(it.next().unwrap_or(""))?;
                let coef = it.next().map(parse_f64).transpose()?.unwrap_or(1.0);
                PhiSpec::scaled_power(p, coef)
            }
            "tabulated" => {
                let (k, v) = parse_table(rest)?;
                PhiSpec::tabulated(k, v)
            }
            "rigid" => Ok(PhiSpec::Rigid),
            _ => Err(Error::Parse(format!("unknown bulk energy `{s}`"))),
        }
    }
}

/// Concave non-decreasing jump energy, extended by `psi(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    /// `coef * r^q`, `0 < q <= 1`.
    Power { q: f64, coef: f64 },
    /// `c` for every positive jump (Mumford-Shah type).
    Constant(f64),
    /// `slope * r`.
    Linear(f64),
    /// Linear interpolation of a concave non-decreasing table; the segment
    /// from the origin to the first knot is taken from `(0, 0)` when the first
    /// knot is positive.
    Tabulated(Table),
    /// `+inf` for every positive jump: jumps are forbidden.
    Disabled,
}

impl PsiSpec {
    pub fn power(q: f64) -> Result<Self> {
        Self::scaled_power(q, 1.0)
    }

    pub fn scaled_power(q: f64, coef: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::domain(format!("jump power must lie in (0, 1], got {q}")));
        }
        if !(coef > 0.0) || !coef.is_finite() {
            return Err(Error::domain(format!("jump coefficient must be positive, got {coef}")));
        }
        Ok(PsiSpec::Power { q, coef })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!("constant jump energy must be positive, got {c}")));
        }
        Ok(PsiSpec::Constant(c))
    }

    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(Error::domain(format!("linear jump slope must be positive, got {slope}")));
        }
        Ok(PsiSpec::Linear(slope))
    }

    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mut t = Table::new(knots, values)?;
        if t.knots[0] > 0.0 {
            t.knots.insert(0, 0.0);
            t.values.insert(0, 0.0);
        }
        let s = t.slopes();
        if s.iter().any(|&v| v < 0.0) {
            return Err(Error::domain("jump table must be non-decreasing"));
        }
        if s.windows(2).any(|w| w[1] > w[0] + 1e-12 * (1.0 + w[0].abs())) {
            return Err(Error::domain("jump table must be concave"));
        }
        Ok(PsiSpec::Tabulated(t))
    }

    pub fn eval(&self, r: f64) -> Energy {
        match self {
            PsiSpec::Disabled if r > 0.0 => Energy::Infinite,
            _ => Energy::Finite(self.eval_finite(r)),
        }
    }

    pub(crate) fn eval_finite(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            PsiSpec::Power { q, coef } => {
                if *q == 0.5 {
                    coef * r.sqrt()
                } else {
                    coef * r.powf(*q)
                }
            }
            PsiSpec::Constant(c) => *c,
            PsiSpec::Linear(s) => s * r,
            PsiSpec::Tabulated(t) => t.eval(r),
            PsiSpec::Disabled => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, PsiSpec::Disabled)
    }

    /// `psi(r)/r -> +inf` as `r -> 0+`.
    pub fn infinite_slope_at_zero(&self) -> bool {
        match self {
            PsiSpec::Power { q, .. } => *q < 1.0,
            PsiSpec::Constant(_) | PsiSpec::Disabled => true,
            PsiSpec::Linear(_) => false,
            PsiSpec::Tabulated(t) => t.knots[0] == 0.0 && t.values[0] > 0.0,
        }
    }

    pub fn scaled(&self, c: f64) -> PsiSpec {
        match self {
            PsiSpec::Power { q, coef } => PsiSpec::Power { q: *q, coef: coef * c },
            PsiSpec::Constant(v) => PsiSpec::Constant(v * c),
            PsiSpec::Linear(s) => PsiSpec::Linear(s * c),
            PsiSpec::Tabulated(t) => PsiSpec::Tabulated(t.scaled(c)),
            PsiSpec::Disabled => PsiSpec::Disabled,
        }
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiSpec::Power { q, coef } if *coef == 1.0 => write!(f, "power:{q}"),
            PsiSpec::Power { q, coef } => write!(f, "power:{q}:{coef}"),
            PsiSpec::Constant(c) => write!(f, "constant:{c}"),
            PsiSpec::Linear(s) => write!(f, "linear:{s}"),
            PsiSpec::Tabulated(t) => write!(f, "tabulated:{t}"),
            PsiSpec::Disabled => write!(f, "disabled"),
        }
    }
}

impl FromStr for PsiSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "power" => {
                let mut it = rest.split(':');
                let q = parse_f64(it.next().unwrap_or(""))?;
                let coef = it.next().map(parse_f64).transpose()?.unwrap_or(1.0);
                PsiSpec::scaled_power(q, coef)
            }
            "constant" => PsiSpec::constant(parse_f64(rest)?),
            "linear" => PsiSpec::linear(if rest.is_empty() { 1.0 } else { parse_f64(rest)? }),
            "tabulated" => {
                let (k, v) = parse_table(rest)?;
                PsiSpec::tabulated(k, v)
            }
            "disabled" => Ok(PsiSpec::Disabled),
            _ => Err(Error::Parse(format!("unknown jump energy `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_phi_interpolates_and_extrapolates() {
        let phi = PhiSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(phi.eval_finite(0.5), 0.5);
        assert_eq!(phi.eval_finite(1.5), 2.0);
        assert_eq!(phi.eval_finite(3.0), 5.0);
    }

    #[test]
    fn non_convex_table_rejected() {
        assert!(PhiSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0]).is_err());
        assert!(PsiSpec::tabulated(vec![1.0, 2.0], vec![1.0, 3.0]).is_err());
    }

    #[test]
    fn psi_zero_extension() {
        for psi in [
            PsiSpec::power(0.5).unwrap(),
            PsiSpec::constant(2.0).unwrap(),
            PsiSpec::Disabled,
        ] {
            assert_eq!(psi.eval(0.0), Energy::ZERO);
        }
        assert!(PsiSpec::Disabled.eval(1e-9).is_infinite());
        assert_eq!(PsiSpec::constant(2.0).unwrap().eval(1e-9), Energy::Finite(2.0));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["power:2", "power:1.5:0.25", "tabulated:0/0,1/1,2/4", "rigid"] {
            let phi: PhiSpec = s.parse().unwrap();
            assert_eq!(phi.to_string(), s);
        }
        for s in ["power:0.5", "constant:1.5707963267948966", "linear:1", "disabled"] {
            let psi: PsiSpec = s.parse().unwrap();
            assert_eq!(psi.to_string(), s);
        }
        assert!("power:0.5".parse::<PhiSpec>().is_err());
        assert!("power:2".parse::<PsiSpec>().is_err());
    }

    #[test]
    fn flags() {
        assert!(PhiSpec::power(2.0).unwrap().superlinear());
        assert!(!PhiSpec::power(1.0).unwrap().superlinear());
        assert!(PsiSpec::power(0.5).unwrap().infinite_slope_at_zero());
        assert!(!PsiSpec::linear(1.0).unwrap().infinite_slope_at_zero());
    }
}
