//! Built-in signals, fields, families, kernels and experiments, resolved
//! from config strings.

use std::path::Path;

use crate::energy_1d::{Interp, Signal, Signal1D};
use crate::energy_nd::{AnalyticField2D, Field, Field2D};
use crate::error::{Error, Result};
use crate::lab::config::Config;
use crate::lab::io;
use crate::limit_energy::{PiecewiseField2D, Sbv1D};
use crate::phi_family::{parse_f64, PhiEpsFamily, PhiSpec, PsiSpec, DEFAULT_INNER_GRID};

/// Sorted `(section, name, description)` rows.
const ENTRIES: &[(&str, &str, &str)] = &[
    ("example", "ms", "arctanMS with kernel weight 1"),
    ("example", "power:p", "power(p) with kernel weight p"),
    ("example", "rational", "rational32 with kernel weight 1"),
    ("example", "root:p", "root(p) with kernel weight 1/p"),
    ("example", "tv", "linear with kernel weight 1"),
    ("experiment", "compactness", "warm-started denoising along a decreasing eps schedule"),
    ("experiment", "constants", "c_{p,n} and kernel moments j_alpha"),
    ("experiment", "denoise", "descent on F_eps(u) + kappa ||u - g||^2"),
    ("experiment", "envelope", "mu = inf-convolution of phi and psi, convex/concave split"),
    ("experiment", "probe", "numerical checks of li1, li2, Est, Cpt1, Cpt2"),
    ("experiment", "sweep1d", "F_eps of a 1-D signal over an eps list"),
    ("experiment", "sweepnd", "kernel-weighted F_eps of a field or signal over an eps list"),
    ("experiment", "theta", "Theta(eps, alpha, beta) against lambda(alpha, beta)"),
    ("family", "arctanMS", "arctan(eps r^2) / eps"),
    ("family", "constructed", "inf-convolution of phi and psi (keys phi, psi, scale)"),
    ("family", "linear", "r"),
    ("family", "power:p", "r^p"),
    ("family", "rational32", "r^2 / (sqrt(eps) r^(3/2) + 1)"),
    ("family", "root:p", "eps^(1/p - 1) r^(1/p)"),
    ("field", "affine[:a]", "a clamp(x, 0, 1), unbounded in y"),
    ("field", "csv:<path>", "grid file with header x,y,u"),
    ("field", "disk[:r[:h]]", "h times the indicator of the disk of radius r"),
    ("field", "halfplane[:h]", "h times the indicator of x >= 0"),
    ("field", "pgm:<path>", "PGM image with optional .meta sidecar"),
    ("field", "zero", "0"),
    ("kernel", "exponential", "exp(-rho)"),
    ("kernel", "gaussian", "exp(-rho^2)"),
    ("kernel", "indicator[:r0]", "1 on rho <= r0"),
    ("kernel", "tabulated:k/v,...", "piecewise-linear profile"),
    ("signal", "csv:<path>", "samples with header x,u"),
    ("signal", "heaviside[:h]", "h times the indicator of x > 0 on [-1, 1]"),
    ("signal", "ramp[:a]", "a clamp(x, 0, 1)"),
    ("signal", "sbv:<path>", "piece/jump/anchor text description"),
];

/// Deterministic alphabetical listing.
pub fn list_registry() -> String {
    let mut s = String::new();
    for (sec, name, desc) in ENTRIES {
        s.push_str(&format!("{sec:<11} {name:<18} {desc}\n"));
    }
    s
}

fn arg(rest: &str, default: f64) -> Result<f64> {
    if rest.is_empty() {
        Ok(default)
    } else {
        parse_f64(rest)
    }
}

/// Family from the `family` key; `constructed` reads `phi`, `psi`, `scale`
/// and `inner_grid`.
pub fn family(cfg: &Config, default: &str) -> Result<PhiEpsFamily> {
    let name: String = cfg.get_or("family", default.to_string())?;
    if name.trim() == "constructed" {
        let phi: PhiSpec = cfg.get_or("phi", PhiSpec::power(2.0)?)?;
        let psi: PsiSpec = cfg.get_or("psi", PsiSpec::power(0.5)?)?;
        let scale: f64 = cfg.get_or("scale", 1.0)?;
        let grid: usize = cfg.get_or("inner_grid", DEFAULT_INNER_GRID)?;
        let c = crate::phi_family::Constructed::new(phi, psi, scale, grid).map_err(|e| Error::config("phi", e.to_string()))?;
        return Ok(PhiEpsFamily::Constructed(c));
    }
    name.parse().map_err(|e: Error| Error::config("family", e.to_string()))
}

/// A 1-D input, kept exact when it has a piecewise description.
#[derive(Debug, Clone)]
pub enum SignalInput {
    Exact(Sbv1D),
    Sampled(Signal1D),
}

impl SignalInput {
    pub fn as_signal(&self) -> &dyn Signal {
        match self {
            SignalInput::Exact(u) => u,
            SignalInput::Sampled(s) => s,
        }
    }

    pub fn exact(&self) -> Result<Sbv1D> {
        match self {
            SignalInput::Exact(u) => Ok(u.clone()),
            SignalInput::Sampled(s) => Sbv1D::from_signal(s),
        }
    }

    /// Sampled on `n` points of the window unless already sampled.
    pub fn sampled(&self, n: usize) -> Result<Signal1D> {
        match self {
            SignalInput::Sampled(s) => Ok(s.clone()),
            SignalInput::Exact(u) => {
                if n < 2 {
                    return Err(Error::config("samples", "need at least 2 samples"));
                }
                let (a, b) = u.window();
                Signal1D::from_fn(a, (b - a) / (n - 1) as f64, n, |x| u.eval(x))
            }
        }
    }
}

pub fn signal(cfg: &Config, key: &str) -> Result<SignalInput> {
    let raw: String = cfg.require(key)?;
    let (head, rest) = raw.split_once(':').unwrap_or((&raw, ""));
    let wrap = |e: Error| Error::config(key, e.to_string());
    match head {
        "heaviside" => {
            let h = arg(rest, 1.0).map_err(wrap)?;
            Sbv1D::from_heights(vec![-1.0, 1.0], vec![0.0], vec![(0.0, h)], 0.0)
                .map(SignalInput::Exact)
                .map_err(wrap)
        }
        "ramp" => {
            let a = arg(rest, 1.0).map_err(wrap)?;
            Sbv1D::new(vec![0.0, 1.0], vec![a], Vec::new(), 0.0).map(SignalInput::Exact).map_err(wrap)
        }
        "sbv" => io::read_sbv(&path(cfg, key, rest)?).map(SignalInput::Exact).map_err(wrap),
        "csv" => {
            let interp: Interp = cfg.get_or("interp", Interp::Linear)?;
            io::read_signal_csv(&path(cfg, key, rest)?, interp).map(SignalInput::Sampled).map_err(wrap)
        }
        _ => Err(Error::config(key, format!("unknown signal `{raw}`; see `freedisc list`"))),
    }
}

fn path(cfg: &Config, key: &str, rest: &str) -> Result<std::path::PathBuf> {
    if rest.is_empty() {
        return Err(Error::config(key, "missing file path"));
    }
    let p = cfg.resolve(rest);
    if !Path::new(&p).exists() {
        return Err(Error::config(key, format!("no such file {}", p.display())));
    }
    let head = cfg.raw(key).unwrap_or_default();
    let kind = head.split(':').next().unwrap_or("");
    cfg.note(key, format!("{kind}:{}", p.display()));
    Ok(p)
}

/// A 2-D input; analytic fields may carry an exact piecewise description.
#[derive(Debug, Clone)]
pub enum FieldInput {
    Analytic(AnalyticField2D, Option<PiecewiseField2D>),
    Sampled(Field2D),
}

impl FieldInput {
    pub fn as_field(&self) -> &dyn Field {
        match self {
            FieldInput::Analytic(f, _) => f,
            FieldInput::Sampled(f) => f,
        }
    }

    pub fn exact(&self) -> Option<&PiecewiseField2D> {
        match self {
            FieldInput::Analytic(_, e) => e.as_ref(),
            FieldInput::Sampled(_) => None,
        }
    }

    /// Sampled on an `n x n` grid over the window unless already sampled.
    pub fn sampled(&self, n: usize) -> Result<Field2D> {
        match self {
            FieldInput::Sampled(f) => Ok(f.clone()),
            FieldInput::Analytic(f, _) => {
                if n < 2 {
                    return Err(Error::config("samples", "need at least 2 samples per side"));
                }
                let w = f.window();
                let step = [(w.x1 - w.x0) / (n - 1) as f64, (w.y1 - w.y0) / (n - 1) as f64];
                Field2D::from_fn([w.x0, w.y0], step, n, n, |p| f.eval(p))
            }
        }
    }
}

/// Polygon sides used for the exact description of a disk.
const DISK_SIDES: usize = 4096;

pub fn field(cfg: &Config, key: &str) -> Result<FieldInput> {
    let raw: String = cfg.require(key)?;
    let (head, rest) = raw.split_once(':').unwrap_or((&raw, ""));
    let wrap = |e: Error| Error::config(key, e.to_string());
    match head {
        "disk" => {
            let (r, h) = match rest.split_once(':') {
                Some((r, h)) => (parse_f64(r).map_err(wrap)?, parse_f64(h).map_err(wrap)?),
                None => (arg(rest, 1.0).map_err(wrap)?, 1.0),
            };
            let f = AnalyticField2D::disk([0.0, 0.0], r, h).map_err(wrap)?;
            let exact = PiecewiseField2D::disk([0.0, 0.0], r, h, DISK_SIDES).map_err(wrap)?;
            Ok(FieldInput::Analytic(f, Some(exact)))
        }
        "halfplane" => Ok(FieldInput::Analytic(AnalyticField2D::halfplane(arg(rest, 1.0).map_err(wrap)?), None)),
        "affine" => Ok(FieldInput::Analytic(AnalyticField2D::affine(arg(rest, 1.0).map_err(wrap)?), None)),
        "zero" if rest.is_empty() => Ok(FieldInput::Analytic(AnalyticField2D::zero(), Some(PiecewiseField2D::zero()))),
        "csv" => io::read_field_csv(&path(cfg, key, rest)?).map(FieldInput::Sampled).map_err(wrap),
        "pgm" => io::read_pgm(&path(cfg, key, rest)?).map(FieldInput::Sampled).map_err(wrap),
        _ => Err(Error::config(key, format!("unknown field `{raw}`; see `freedisc list`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_is_sorted_and_stable() {
        let a = list_registry();
        assert_eq!(a, list_registry());
        assert!(a.contains("arctanMS") && a.contains("heaviside"));
        let keys: Vec<(&str, &str)> = ENTRIES.iter().map(|e| (e.0, e.1)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn resolves_builtins() {
        let c = Config::parse("signal = heaviside:2\nfield = disk:0.5:3\nfamily = power:2\n", ".").unwrap();
        let s = signal(&c, "signal").unwrap();
        assert_eq!(s.as_signal().eval(0.5), 2.0);
        let f = field(&c, "field").unwrap();
        assert_eq!(f.as_field().eval([0.1, 0.1]), 3.0);
        assert!(f.exact().is_some());
        assert_eq!(family(&c, "arctanMS").unwrap(), PhiEpsFamily::Power(2.0));
        let bad = Config::parse("signal = wave\nfamily = cubic\n", ".").unwrap();
        assert!(signal(&bad, "signal").unwrap_err().to_string().contains("`signal`"));
        assert!(family(&bad, "x").unwrap_err().to_string().contains("`family`"));
    }

    #[test]
    fn constructed_family_from_keys() {
        let c = Config::parse("family = constructed\nphi = power:2\npsi = power:0.5\n", ".").unwrap();
        assert!(matches!(family(&c, "x").unwrap(), PhiEpsFamily::Constructed(_)));
    }
}
