//! Radial kernels `eta(xi) = |xi|^w J(|xi|)`, their moments and the sphere
//! constants through which they enter every limit constant.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::integrate;
use crate::phi_family::{parse_f64, parse_table, PhiSpec, Table};

/// Truncation radius of the exponential profile: `rho^5 e^{-rho}` has tail
/// below `1e-12` past it.
pub const EXPONENTIAL_RADIUS: f64 = 45.0;
/// Truncation radius of the gaussian profile.
pub const GAUSSIAN_RADIUS: f64 = 7.0;

const QUAD_TOL: f64 = 1e-13;

/// Radial profile `J`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `1` on `[0, r0]`, `0` beyond.
    Indicator(f64),
    /// `e^{-rho}`, truncated.
    Exponential,
    /// `e^{-rho^2}`, truncated.
    Gaussian,
    /// Linear interpolation of a non-negative table; zero past the last knot.
    Tabulated(Table),
}

impl Profile {
    fn radius(&self) -> f64 {
        match self {
            Profile::Indicator(r0) => *r0,
            Profile::Exponential => EXPONENTIAL_RADIUS,
            Profile::Gaussian => GAUSSIAN_RADIUS,
            Profile::Tabulated(t) => *t.knots().last().expect("table is non-empty"),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match self {
            Profile::Tabulated(t) => t.knots().to_vec(),
            _ => Vec::new(),
        }
    }

    fn eval(&self, rho: f64) -> f64 {
        if rho < 0.0 || rho > self.radius() {
            return 0.0;
        }
        match self {
            Profile::Indicator(_) => 1.0,
            Profile::Exponential => (-rho).exp(),
            Profile::Gaussian => (-rho * rho).exp(),
            Profile::Tabulated(t) => t.eval(rho),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Indicator(r0) => write!(f, "indicator:{r0}"),
            Profile::Exponential => f.write_str("exponential"),
            Profile::Gaussian => f.write_str("gaussian"),
            Profile::Tabulated(t) => write!(f, "tabulated:{t}"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "indicator" => {
                let r0 = if rest.is_empty() { 1.0 } else { parse_f64(rest)? };
                if !(r0 > 0.0) || !r0.is_finite() {
                    return Err(Error::domain(format!("indicator radius must be positive, got {r0}")));
                }
                Ok(Profile::Indicator(r0))
            }
            "exponential" if rest.is_empty() => Ok(Profile::Exponential),
            "gaussian" if rest.is_empty() => Ok(Profile::Gaussian),
            "tabulated" => {
                let (k, v) = parse_table(rest)?;
                let t = Table::new(k, v)?;
                if t.knots()[0] != 0.0 {
                    return Err(Error::domain("kernel table must start at knot 0"));
                }
                if t.values().iter().all(|&v| v == 0.0) {
                    return Err(Error::domain("kernel table is identically zero"));
                }
                Ok(Profile::Tabulated(t))
            }
            _ => Err(Error::Parse(format!("unknown kernel profile `{s}`"))),
        }
    }
}

/// Radial kernel in dimension `n` with power weight `|xi|^w`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    profile: Profile,
    n: usize,
    weight: f64,
}

impl Kernel {
    pub fn new(profile: Profile, n: usize, weight: f64) -> Result<Self> {
        check_dim(n)?;
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::domain(format!("kernel weight must be >= 0, got {weight}")));
        }
        Ok(Kernel { profile, n, weight })
    }

    pub fn indicator(r0: f64, n: usize, weight: f64) -> Result<Self> {
        Self::new(format!("indicator:{r0}").parse()?, n, weight)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Support radius `R` (truncation radius for non-compact profiles).
    pub fn radius(&self) -> f64 {
        self.profile.radius()
    }

    /// True when the profile itself vanishes past `R`.
    pub fn is_compact(&self) -> bool {
        matches!(self.profile, Profile::Indicator(_) | Profile::Tabulated(_))
    }

    /// `J(rho)`.
    pub fn profile_at(&self, rho: f64) -> f64 {
        self.profile.eval(rho)
    }

    /// `eta` as a function of `rho = |xi|`.
    pub fn eta_radial(&self, rho: f64) -> f64 {
        let j = self.profile.eval(rho);
        if self.weight == 0.0 || j == 0.0 {
            j
        } else {
            rho.powf(self.weight) * j
        }
    }

    pub fn eta(&self, xi: [f64; 2]) -> f64 {
        self.eta_radial(xi[0].hypot(xi[1]))
    }

    /// `j_alpha = int_0^R rho^{alpha-1} J(rho) d rho` of the unweighted profile.
    pub fn j_alpha(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("moment index must be >= 1, got {alpha}")));
        }
        Ok(self.radial_integral(|rho| rho.powf(alpha - 1.0) * self.profile.eval(rho)))
    }

    /// `omega = ||eta||_1 = c_{0,n} j_{n+w}`.
    pub fn omega(&self) -> f64 {
        c_pn(0.0, self.n).expect("dimension checked") * self.j_alpha(self.n as f64 + self.weight).expect("index >= 1")
    }

    fn radial_integral<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        integrate(f, 0.0, self.radius(), &self.profile.breaks(), QUAD_TOL).0
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={} w={}", self.profile, self.n, self.weight)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::unsupported(format!("dimension {n}; only n = 1, 2 are implemented")))
    }
}

/// `c_{p,n} = int_{S^{n-1}} |<v, e_1>|^p`.
pub fn c_pn(p: f64, n: usize) -> Result<f64> {
    check_dim(n)?;
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("sphere exponent must be >= 0, got {p}")));
    }
    if n == 1 {
        return Ok(2.0);
    }
    Ok(4.0 * integrate(|t: f64| t.cos().powf(p), 0.0, FRAC_PI_2, &[], QUAD_TOL).0)
}

/// Integral of `g(|<z e_1, v>|)` over the unit sphere.
fn sphere_integral<G: Fn(f64) -> f64>(g: G, z: f64, n: usize) -> f64 {
    match n {
        1 => 2.0 * g(z),
        _ => 4.0 * integrate(|t: f64| g(z * t.cos()), 0.0, FRAC_PI_2, &[], QUAD_TOL).0,
    }
}

/// `(S phi_bar)(z) = omega^{-1} int phi_bar(|<z, xi/|xi|>|) eta(xi) d xi` for a
/// radial kernel, computed as (sphere integral) x (radial mass) / omega.
pub fn s_phi(phi_bar: &PhiSpec, k: &Kernel, z: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("s_phi needs z >= 0, got {z}")));
    }
    if !phi_bar.is_finite() {
        return Err(Error::unsupported("s_phi of a rigid bulk energy"));
    }
    let radial = k.j_alpha(k.dim() as f64 + k.weight())?;
    let sphere = sphere_integral(|r| phi_bar.eval_finite(r), z, k.dim());
    Ok(sphere * radial / k.omega())
}

/// Profile `phi_bar` whose sphere average `H^{n-1}(S^{n-1})^{-1} int phi_bar(|<a, v>|)`
/// equals `phi(|a|)`. For `phi = c r^p` this is `(c_{0,n} / c_{p,n}) c r^p`.
pub fn sectionable_lift(phi: &PhiSpec, n: usize) -> Result<PhiSpec> {
    match phi {
        PhiSpec::Power { p, coef } => {
            let factor = c_pn(0.0, n)? / c_pn(*p, n)?;
            PhiSpec::scaled_power(*p, coef * factor)
        }
        other => Err(Error::unsupported(format!("sectionable lift of `{other}`; only powers"))),
    }
}

/// Sphere average used to check a lift: `H^{n-1}(S^{n-1})^{-1} int phi_bar(|<a e_1, v>|)`.
pub fn sphere_average(phi_bar: &PhiSpec, n: usize, a: f64) -> Result<f64> {
    if !phi_bar.is_finite() {
        return Err(Error::unsupported("sphere average of a rigid bulk energy"));
    }
    Ok(sphere_integral(|r| phi_bar.eval_finite(r), a.abs(), n) / c_pn(0.0, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sphere_constants() {
        assert!(close(c_pn(0.0, 2).unwrap(), 2.0 * PI, 1e-12));
        assert!(close(c_pn(1.0, 2).unwrap(), 4.0, 1e-12));
        assert!(close(c_pn(2.0, 2).unwrap(), PI, 1e-12));
        // int |cos|^3 over the circle = 8/3
        assert!(close(c_pn(3.0, 2).unwrap(), 8.0 / 3.0, 1e-12));
        assert_eq!(c_pn(5.0, 1).unwrap(), 2.0);
        assert!(c_pn(1.0, 3).is_err());
        assert!(c_pn(-1.0, 2).is_err());
    }

    #[test]
    fn c_pn_decreasing_in_p() {
        let mut prev = c_pn(0.0, 2).unwrap();
        for i in 1..40 {
            let c = c_pn(i as f64 * 0.25, 2).unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn moments() {
        let ind = Kernel::indicator(1.0, 2, 0.0).unwrap();
        for alpha in [1.0, 1.5, 2.0, 3.0, 4.0, 5.5] {
            assert!(close(ind.j_alpha(alpha).unwrap(), 1.0 / alpha, 1e-13));
        }
        let ind2 = Kernel::indicator(2.0, 1, 0.0).unwrap();
        assert!(close(ind2.j_alpha(3.0).unwrap(), 8.0 / 3.0, 1e-12));
        let ex = Kernel::new(Profile::Exponential, 1, 0.0).unwrap();
        assert!(close(ex.j_alpha(2.0).unwrap(), 1.0, 1e-10));
        // Gamma(3.5) = 15 sqrt(pi) / 8
        assert!(close(ex.j_alpha(3.5).unwrap(), 15.0 * PI.sqrt() / 8.0, 1e-9));
        let g = Kernel::new(Profile::Gaussian, 2, 0.0).unwrap();
        // int rho e^{-rho^2} = 1/2
        assert!(close(g.j_alpha(2.0).unwrap(), 0.5, 1e-10));
        assert!(ind.j_alpha(0.5).is_err());
    }

    #[test]
    fn tabulated_moment_matches_indicator() {
        let t: Profile = "tabulated:0/1,1/1".parse().unwrap();
        let k = Kernel::new(t, 2, 0.0).unwrap();
        assert!(close(k.j_alpha(3.0).unwrap(), 1.0 / 3.0, 1e-12));
        let hat: Profile = "tabulated:0/1,1/0".parse().unwrap();
        let k = Kernel::new(hat, 1, 0.0).unwrap();
        // int_0^1 rho (1 - rho) = 1/6
        assert!(close(k.j_alpha(2.0).unwrap(), 1.0 / 6.0, 1e-12));
    }

    #[test]
    fn doubling_profile_doubles_moments() {
        let a = Kernel::new("tabulated:0/1,0.5/0.4,2/0".parse().unwrap(), 2, 1.0).unwrap();
        let b = Kernel::new("tabulated:0/2,0.5/0.8,2/0".parse().unwrap(), 2, 1.0).unwrap();
        for alpha in [1.0, 1.5, 2.0, 3.0] {
            let (ja, jb) = (a.j_alpha(alpha).unwrap(), b.j_alpha(alpha).unwrap());
            assert!(close(jb, 2.0 * ja, 1e-13 * jb));
        }
    }

    #[test]
    fn omega_of_weighted_indicator() {
        // int_{|xi|<1} |xi| = 2 pi / 3
        let k = Kernel::indicator(1.0, 2, 1.0).unwrap();
        assert!(close(k.omega(), 2.0 * PI / 3.0, 1e-13));
        let k1 = Kernel::indicator(2.0, 1, 0.0).unwrap();
        assert!(close(k1.omega(), 4.0, 1e-13));
    }

    /// Nested (non-factored) polar quadrature of the defining integral.
    fn s_phi_nested(phi: &PhiSpec, k: &Kernel, z: f64) -> f64 {
        let inner = |t: f64| {
            let v = phi.eval_finite(z * t.cos().abs());
            integrate(|rho: f64| v * k.eta_radial(rho) * rho, 0.0, k.radius(), &[], 1e-14).0
        };
        integrate(inner, 0.0, 2.0 * PI, &[FRAC_PI_2, PI, 3.0 * FRAC_PI_2], 1e-13).0 / k.omega()
    }

    #[test]
    fn s_phi_factorization() {
        let phi = PhiSpec::power(2.0).unwrap();
        for k in [
            Kernel::indicator(1.0, 2, 1.0).unwrap(),
            Kernel::new(Profile::Gaussian, 2, 0.0).unwrap(),
        ] {
            let s = s_phi(&phi, &k, 1.0).unwrap();
            assert!(close(s, 0.5, 1e-10), "{s}");
            assert!(close(s, s_phi_nested(&phi, &k, 1.0), 1e-8));
        }
        let tab = PhiSpec::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 2.0]).unwrap();
        let k = Kernel::indicator(1.5, 2, 2.0).unwrap();
        for z in [0.3, 1.0, 1.7] {
            assert!(close(s_phi(&tab, &k, z).unwrap(), s_phi_nested(&tab, &k, z), 1e-8));
        }
    }

    #[test]
    fn s_phi_homogeneous_and_zero() {
        let phi = PhiSpec::power(1.5).unwrap();
        let k = Kernel::new(Profile::Exponential, 2, 0.5).unwrap();
        let s1 = s_phi(&phi, &k, 1.0).unwrap();
        for z in [0.1, 0.7, 2.0, 5.0] {
            let s = s_phi(&phi, &k, z).unwrap();
            assert!(close(s / s1, z.powf(1.5), 1e-10 * z.powf(1.5)));
        }
        assert_eq!(s_phi(&phi, &k, 0.0).unwrap(), 0.0);
        // in 1-D the transform is the identity
        let k1 = Kernel::indicator(1.0, 1, 0.0).unwrap();
        assert!(close(s_phi(&phi, &k1, 2.0).unwrap(), 2f64.powf(1.5), 1e-12));
    }

    #[test]
    fn lift_round_trip() {
        for (p, n) in [(1.0, 2), (2.0, 2), (3.5, 2), (2.0, 1), (1.0, 1)] {
            let phi = PhiSpec::power(p).unwrap();
            let lift = sectionable_lift(&phi, n).unwrap();
            for a in [0.0, 0.4, 1.0, 3.0] {
                let avg = sphere_average(&lift, n, a).unwrap();
                assert!(close(avg, phi.eval_finite(a), 1e-8 * (1.0 + avg)), "p={p} n={n} a={a}");
            }
        }
        // one dimension: the lift is the function itself
        assert_eq!(
            sectionable_lift(&PhiSpec::power(2.0).unwrap(), 1).unwrap(),
            PhiSpec::power(2.0).unwrap()
        );
        // p = 1, n = 2: factor 2 pi / 4
        match sectionable_lift(&PhiSpec::power(1.0).unwrap(), 2).unwrap() {
            PhiSpec::Power { coef, .. } => assert!(close(coef, FRAC_PI_2, 1e-12)),
            _ => unreachable!(),
        }
        let tab = PhiSpec::tabulated(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(sectionable_lift(&tab, 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn parse_profiles() {
        for s in ["indicator:1", "indicator:2.5", "exponential", "gaussian", "tabulated:0/1,2/0"] {
            let p: Profile = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<Profile>().unwrap(), p);
        }
        assert!("indicator:-1".parse::<Profile>().is_err());
        assert!("cauchy".parse::<Profile>().is_err());
        assert!("tabulated:0/0,1/0".parse::<Profile>().is_err());
    }

    #[test]
    fn truncation_tail_is_negligible() {
        let ex = Kernel::new(Profile::Exponential, 2, 0.0).unwrap();
        assert!(ex.profile_at(EXPONENTIAL_RADIUS) < 1e-19);
        assert!(!ex.is_compact());
        assert!(Kernel::indicator(1.0, 2, 0.0).unwrap().is_compact());
        // tail of rho^4 e^{-rho} past the radius
        let tail = (-EXPONENTIAL_RADIUS).exp() * EXPONENTIAL_RADIUS.powi(4) * 1.2;
        assert!(tail < 1e-12);
    }
}
