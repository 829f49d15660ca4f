use std::fmt;
use std::str::FromStr;

use super::spec::{parse_f64, PhiSpec, PsiSpec};
use crate::error::{Error, Result};
use crate::numeric::grid_min;

pub const DEFAULT_INNER_GRID: usize = 4096;

/// `phi_eps(r) = (1/scale) * min_{0 <= l <= r} { phi(l) + psi(eps (r - l)) / eps }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constructed {
    phi: PhiSpec,
    psi: PsiSpec,
    scale: f64,
    inner_grid: usize,
}

impl Constructed {
    pub fn new(phi: PhiSpec, psi: PsiSpec, scale: f64, inner_grid: usize) -> Result<Self> {
        if !phi.is_finite() || !psi.is_finite() {
            return Err(Error::domain(
                "the min construction needs finite bulk and jump energies",
            ));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::domain(format!("scale must be positive, got {scale}")));
        }
        if inner_grid < 2 {
            return Err(Error::domain("inner grid needs at least 2 cells"));
        }
        Ok(Constructed {
            phi,
            psi,
            scale,
            inner_grid,
        })
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    pub fn psi(&self) -> &PsiSpec {
        &self.psi
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn inner_grid(&self) -> usize {
        self.inner_grid
    }

    /// Minimizing split point `l` and the (unscaled) minimum value.
    pub fn argmin(&self, eps: f64, r: f64) -> (f64, f64) {
        if r <= 0.0 {
            return (0.0, self.phi.eval_finite(0.0));
        }
        let objective = |l: f64| self.phi.eval_finite(l) + self.psi.eval_finite(eps * (r - l)) / eps;
        grid_min(objective, 0.0, r, self.inner_grid)
    }

    fn value(&self, eps: f64, r: f64) -> f64 {
        self.argmin(eps, r).1 / self.scale
    }
}

/// An `eps`-indexed family of integrands `phi_eps : [0, inf) -> [0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiEpsFamily {
    Constructed(Constructed),
    /// `r^p`, `p >= 1`.
    Power(f64),
    /// `eps^(1/p - 1) r^(1/p)`, `p > 1`.
    Root(f64),
    /// `r`.
    Linear,
    /// `arctan(eps r^2) / eps`.
    ArctanMs,
    /// `r^2 / (sqrt(eps) r^(3/2) + 1)`.
    Rational32,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("eps must be positive and finite, got {eps}")))
    }
}

impl PhiEpsFamily {
    pub fn constructed(phi: PhiSpec, psi: PsiSpec, scale: f64) -> Result<Self> {
        Ok(PhiEpsFamily::Constructed(Constructed::new(
            phi,
            psi,
            scale,
            DEFAULT_INNER_GRID,
        )?))
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("power family needs p >= 1, got {p}")));
        }
        Ok(PhiEpsFamily::Power(p))
    }

    pub fn root(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("root family needs p > 1, got {p}")));
        }
        Ok(PhiEpsFamily::Root(p))
    }

    /// `phi_eps(r)` with argument checks.
    pub fn eval(&self, eps: f64, r: f64) -> Result<f64> {
        check_eps(eps)?;
        if !(r >= 0.0) {
            return Err(Error::domain(format!("r must be non-negative, got {r}")));
        }
        Ok(self.value(eps, r))
    }

    /// `eps * phi_eps(r / eps)`, the jump-scale rescaling.
    pub fn eval_scaled_jump(&self, eps: f64, r: f64) -> Result<f64> {
        check_eps(eps)?;
        if !(r > 0.0) {
            return Err(Error::domain(format!("r must be positive, got {r}")));
        }
        Ok(eps * self.value(eps, r / eps))
    }

    /// Unchecked evaluation for inner loops; `eps > 0`, `r >= 0` assumed.
    #[inline]
    pub(crate) fn value(&self, eps: f64, r: f64) -> f64 {
        match self {
            PhiEpsFamily::Constructed(c) => c.value(eps, r),
            PhiEpsFamily::Power(p) => {
                if *p == 2.0 {
                    r * r
                } else {
                    r.powf(*p)
                }
            }
            PhiEpsFamily::Root(p) => (eps * r).powf(1.0 / p) / eps,
            PhiEpsFamily::Linear => r,
            PhiEpsFamily::ArctanMs => (eps * r * r).atan() / eps,
            PhiEpsFamily::Rational32 => r * r / (eps.sqrt() * r * r.sqrt() + 1.0),
        }
    }

    pub fn is_differentiable(&self) -> bool {
        match self {
            PhiEpsFamily::Power(p) => *p > 1.0,
            PhiEpsFamily::ArctanMs | PhiEpsFamily::Rational32 => true,
            _ => false,
        }
    }

    /// `d/dr phi_eps(r)` for the smooth closed-form families.
    pub fn derivative(&self, eps: f64, r: f64) -> Result<f64> {
        check_eps(eps)?;
        if !self.is_differentiable() {
            return Err(Error::unsupported(format!("family `{self}` is not differentiable")));
        }
        Ok(self.derivative_unchecked(eps, r.max(0.0)))
    }

    #[inline]
    pub(crate) fn derivative_unchecked(&self, eps: f64, r: f64) -> f64 {
        match self {
            PhiEpsFamily::Power(p) => {
                if *p == 2.0 {
                    2.0 * r
                } else {
                    p * r.powf(p - 1.0)
                }
            }
            PhiEpsFamily::ArctanMs => {
                let er2 = eps * r * r;
                2.0 * r / (1.0 + er2 * er2)
            }
            PhiEpsFamily::Rational32 => {
                let se = eps.sqrt();
                let sr = r.sqrt();
                let den = se * r * sr + 1.0;
                (2.0 * r + 0.5 * se * r * r * sr) / (den * den)
            }
            _ => f64::NAN,
        }
    }

    /// The bulk and jump energies the family converges to, in the sense of
    /// `phi_eps(r) -> phi(r)` and `eps phi_eps(r/eps) -> psi(r)`.
    pub fn limit_pair(&self) -> (PhiSpec, PsiSpec) {
        match self {
            PhiEpsFamily::Constructed(c) => {
                (c.phi.scaled(1.0 / c.scale), c.psi.scaled(1.0 / c.scale))
            }
            PhiEpsFamily::Power(p) => (PhiSpec::Power { p: *p, coef: 1.0 }, PsiSpec::Disabled),
            PhiEpsFamily::Root(p) => (PhiSpec::Rigid, PsiSpec::Power { q: 1.0 / p, coef: 1.0 }),
            PhiEpsFamily::Linear => (PhiSpec::Power { p: 1.0, coef: 1.0 }, PsiSpec::Linear(1.0)),
            PhiEpsFamily::ArctanMs => (
                PhiSpec::Power { p: 2.0, coef: 1.0 },
                PsiSpec::Constant(std::f64::consts::FRAC_PI_2),
            ),
            PhiEpsFamily::Rational32 => (
                PhiSpec::Power { p: 2.0, coef: 1.0 },
                PsiSpec::Power { q: 0.5, coef: 1.0 },
            ),
        }
    }

    /// Whether the scale-monotonicity hypothesis is known to hold for the family.
    pub fn cpt2_established(&self) -> bool {
        !matches!(self, PhiEpsFamily::Rational32)
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhiEpsFamily::Constructed(_) => "constructed",
            PhiEpsFamily::Power(_) => "power",
            PhiEpsFamily::Root(_) => "root",
            PhiEpsFamily::Linear => "linear",
            PhiEpsFamily::ArctanMs => "arctanMS",
            PhiEpsFamily::Rational32 => "rational32",
        }
    }
}

impl fmt::Display for PhiEpsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiEpsFamily::Constructed(c) => write!(
                f,
                "constructed(phi={}, psi={}, scale={}, inner_grid={})",
                c.phi, c.psi, c.scale, c.inner_grid
            ),
            PhiEpsFamily::Power(p) => write!(f, "power:{p}"),
            PhiEpsFamily::Root(p) => write!(f, "root:{p}"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses the closed-form families (`arctanMS`, `power:2`, `root:2`, `linear`,
/// `rational32`). The constructed family is assembled from separate keys.
impl FromStr for PhiEpsFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "arctanMS" | "arctanms" => Ok(PhiEpsFamily::ArctanMs),
            "rational32" => Ok(PhiEpsFamily::Rational32),
            "linear" => Ok(PhiEpsFamily::Linear),
            "power" => PhiEpsFamily::power(parse_f64(rest)?),
            "root" => PhiEpsFamily::root(parse_f64(rest)?),
            "constructed" => Err(Error::Parse(
                "the constructed family is built from `phi`, `psi` and `scale` keys".into(),
            )),
            _ => Err(Error::Parse(format!("unknown family `{s}`"))),
        }
    }
}
