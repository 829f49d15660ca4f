//! The one-dimensional minimum problems behind the lower bound: `lambda`,
//! the discrete problem `Theta` and the convex/concave envelope `mu`.

use super::family::PhiEpsFamily;
use super::spec::{PhiSpec, PsiSpec};
use crate::energy::Energy;
use crate::error::{Error, Result};
use crate::numeric::{grid_min, linspace};

/// `lambda(alpha, beta) = min_{0 <= l <= alpha} beta phi((alpha - l)/beta) + psi(l)`,
/// with `psi(0) = 0`.
pub fn lambda_eval(phi: &PhiSpec, psi: &PsiSpec, alpha: f64, beta: f64, m: usize) -> Result<Energy> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be non-negative, got {alpha}")));
    }
    let bulk_only = phi.eval(alpha / beta).scale(beta);
    if alpha == 0.0 {
        return Ok(bulk_only);
    }
    let value = match (phi.is_finite(), psi.is_finite()) {
        (true, true) => {
            let obj = |l: f64| beta * phi.eval_finite((alpha - l) / beta) + psi.eval_finite(l);
            Energy::Finite(grid_min(obj, 0.0, alpha, m).1)
        }
        // only l = 0 is admissible
        (true, false) => bulk_only,
        // only l = alpha is admissible
        (false, true) => psi.eval(alpha),
        (false, false) => Energy::Infinite,
    };
    Ok(value)
}

/// `N_eps = [beta / eps]`, with a relative guard against representation error
/// in the quotient (`0.3 / 0.1` must give 3).
pub fn n_eps(eps: f64, beta: f64) -> usize {
    (beta / eps * (1.0 + 1e-12)).floor() as usize
}

fn check_theta_args(eps: f64, alpha: f64, beta: f64) -> Result<usize> {
    if !(eps > 0.0) || !(beta > 0.0) || !(alpha >= 0.0) {
        return Err(Error::domain("theta needs eps > 0, beta > 0, alpha >= 0"));
    }
    if eps > beta {
        return Err(Error::domain(format!("theta needs eps <= beta, got eps={eps} beta={beta}")));
    }
    Ok(n_eps(eps, beta).max(1))
}

/// `Theta(eps, alpha, beta)` through the two candidate configurations of a
/// minimizer: all increments equal, or one large increment and the rest equal.
///
/// Valid for families that are convex, concave, or convex-then-concave.
pub fn theta_structured(fam: &PhiEpsFamily, eps: f64, alpha: f64, beta: f64, m: usize) -> Result<f64> {
    let n = check_theta_args(eps, alpha, beta)?;
    let g = |x: f64| eps * fam.value(eps, x / eps);
    let nf = n as f64;
    let equal = nf * g(alpha / nf);
    if n == 1 || alpha == 0.0 {
        return Ok(equal);
    }
    let split = |x1: f64| g(x1) + (nf - 1.0) * g(((alpha - x1) / (nf - 1.0)).max(0.0));
    let (_, one_large) = grid_min(split, alpha / nf, alpha, m);
    Ok(equal.min(one_large))
}

/// Exhaustive `Theta` over the simplex `sum x_i = alpha` discretized with `k`
/// points per variable, followed by two exhaustive passes on finer lattices
/// centred on the best point found so far. Independent of the structure used
/// by [`theta_structured`]; limited to `N_eps <= 4`.
pub fn theta_bruteforce(fam: &PhiEpsFamily, eps: f64, alpha: f64, beta: f64, k: usize) -> Result<f64> {
    let n = check_theta_args(eps, alpha, beta)?;
    if n > 4 {
        return Err(Error::unsupported(format!(
            "brute-force theta is limited to N_eps <= 4, got {n}"
        )));
    }
    if k < 2 {
        return Err(Error::domain("brute-force theta needs k >= 2"));
    }
    let g = |x: f64| eps * fam.value(eps, x / eps);
    let last = k - 1;
    let h = alpha / last as f64;
    // every coordinate is a grid multiple, so tabulate once
    let table: Vec<f64> = (0..k).map(|i| g(h * i as f64)).collect();
    let coarse = simplex_search(n, &table);
    let mut best = coarse.0;
    let mut centre: Vec<f64> = coarse.1.iter().map(|&i| h * i as f64).collect();
    let mut step = h;
    for _ in 0..REFINE_PASSES {
        if n == 1 || alpha == 0.0 {
            break;
        }
        step /= REFINE_HALF_WIDTH as f64;
        // coordinate c takes centre[c] + step j; the last one absorbs the sum
        let reach = REFINE_HALF_WIDTH * (n as i64 - 1);
        let tabs: Vec<Vec<f64>> = (0..n)
            .map(|c| {
                let r = if c + 1 == n { reach } else { REFINE_HALF_WIDTH };
                (-r..=r)
                    .map(|j| {
                        let x = centre[c] + step * j as f64;
                        if x < -1e-12 * alpha { f64::INFINITY } else { g(x.max(0.0)) }
                    })
                    .collect()
            })
            .collect();
        let (v, js) = box_search(n, |c, j| {
            let r = if c + 1 == n { reach } else { REFINE_HALF_WIDTH };
            tabs[c][(j + r) as usize]
        });
        if v < best {
            best = v;
            for (c, j) in js.iter().enumerate() {
                centre[c] += step * *j as f64;
            }
        }
    }
    Ok(best)
}

/// Refinement passes of [`theta_bruteforce`]; each shrinks the lattice step
/// by `REFINE_HALF_WIDTH`.
const REFINE_PASSES: usize = 2;
const REFINE_HALF_WIDTH: i64 = 20;

/// Minimum of `t[i_1] + ... + t[i_n]` over integer points `i_c >= 0` with
/// `sum i_c = t.len() - 1`, and its minimizer. Exhaustive, through the table
/// of best pairs `P[s] = min_{i + j = s} t[i] + t[j]`.
fn simplex_search(n: usize, t: &[f64]) -> (f64, Vec<usize>) {
    let last = t.len() - 1;
    let pair = |s: usize| {
        (0..=s)
            .map(|i| (t[i] + t[s - i], i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    };
    match n {
        1 => (t[last], vec![last]),
        2 => {
            let (v, i) = pair(last);
            (v, vec![i, last - i])
        }
        3 => {
            let (v, i, (_, j)) = (0..=last)
                .map(|i| {
                    let p = pair(last - i);
                    (t[i] + p.0, i, p)
                })
                .fold((f64::INFINITY, 0, (0.0, 0)), |a, b| if b.0 < a.0 { b } else { a });
            (v, vec![i, j, last - i - j])
        }
        _ => {
            let pairs: Vec<(f64, usize)> = (0..=last).map(pair).collect();
            let (v, s) = (0..=last)
                .map(|s| (pairs[s].0 + pairs[last - s].0, s))
                .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
            let (i, j) = (pairs[s].1, pairs[last - s].1);
            (v, vec![i, s - i, j, last - s - j])
        }
    }
}

/// Minimum of `sum_c val(c, j_c)` over offsets `|j_c| <= REFINE_HALF_WIDTH`
/// for the free coordinates, the last one being `-sum` of the others.
fn box_search(n: usize, val: impl Fn(usize, i64) -> f64) -> (f64, Vec<i64>) {
    let mut best = (f64::INFINITY, vec![0; n]);
    let mut idx = vec![0i64; n];
    fn rec(c: usize, sum: i64, acc: f64, idx: &mut Vec<i64>, best: &mut (f64, Vec<i64>), val: &dyn Fn(usize, i64) -> f64) {
        let n = idx.len();
        if c + 1 == n {
            idx[c] = -sum;
            let v = acc + val(c, -sum);
            if v < best.0 {
                *best = (v, idx.clone());
            }
            return;
        }
        for j in -REFINE_HALF_WIDTH..=REFINE_HALF_WIDTH {
            idx[c] = j;
            rec(c + 1, sum + j, acc + val(c, j), idx, best, val);
        }
    }
    rec(0, 0, 0.0, &mut idx, &mut best, &val);
    best
}

/// Result of [`mu_envelope`].
#[derive(Debug, Clone)]
pub struct EnvelopeReport {
    /// Largest sampled `r` where `mu(r) = f(r)` within tolerance.
    pub rbar: f64,
    /// `(r, mu(r))` on the sampling grid.
    pub samples: Vec<(f64, f64)>,
    pub convex_ok_below: bool,
    pub concave_ok_above: bool,
    pub monotone: bool,
    /// Largest second-difference violation seen on either side of `rbar`.
    pub worst_violation: f64,
}

impl EnvelopeReport {
    pub fn all_ok(&self) -> bool {
        self.convex_ok_below && self.concave_ok_above && self.monotone
    }
}

/// Samples `mu(r) = min_{0 <= l <= r} f(l) + g(r - l)` on `[0, rmax]` and
/// checks the convex-below/concave-above structure around the switch point.
pub fn mu_envelope(
    f: &PhiSpec,
    g: &PsiSpec,
    rmax: f64,
    samples: usize,
    inner_grid: usize,
    tol: f64,
) -> Result<EnvelopeReport> {
    if !(rmax > 0.0) || !rmax.is_finite() {
        return Err(Error::domain(format!("rmax must be positive, got {rmax}")));
    }
    if samples < 3 {
        return Err(Error::domain("envelope needs at least 3 samples"));
    }
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::domain("envelope needs finite f and g"));
    }
    let rs = linspace(0.0, rmax, samples);
    let mu: Vec<f64> = rs
        .iter()
        .map(|&r| {
            if r == 0.0 {
                f.eval_finite(0.0)
            } else {
                grid_min(|l| f.eval_finite(l) + g.eval_finite(r - l), 0.0, r, inner_grid).1
            }
        })
        .collect();
    let fr: Vec<f64> = rs.iter().map(|&r| f.eval_finite(r)).collect();
    let switch = (0..samples)
        .rev()
        .find(|&i| (mu[i] - fr[i]).abs() <= tol * (1.0 + fr[i].abs()))
        .unwrap_or(0);

    let mut convex_ok_below = true;
    let mut concave_ok_above = true;
    let mut worst: f64 = 0.0;
    for i in 1..samples - 1 {
        let d2 = mu[i - 1] - 2.0 * mu[i] + mu[i + 1];
        let scale = tol * (1.0 + mu[i].abs());
        if i < switch && d2 < -scale {
            convex_ok_below = false;
            worst = worst.max(-d2);
        }
        if i > switch && d2 > scale {
            concave_ok_above = false;
            worst = worst.max(d2);
        }
    }
    let monotone = mu
        .windows(2)
        .all(|w| w[1] >= w[0] - tol * (1.0 + w[0].abs()));
    Ok(EnvelopeReport {
        rbar: rs[switch],
        samples: rs.into_iter().zip(mu).collect(),
        convex_ok_below,
        concave_ok_above,
        monotone,
        worst_violation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_table_search_matches_naive_enumeration() {
        let t: Vec<f64> = (0..23).map(|i| ((i * 7919) % 31) as f64 - 0.1 * i as f64).collect();
        let last = t.len() - 1;
        let mut naive = [f64::INFINITY; 5];
        naive[1] = t[last];
        for i in 0..=last {
            naive[2] = naive[2].min(t[i] + t[last - i]);
            for j in 0..=last - i {
                naive[3] = naive[3].min(t[i] + t[j] + t[last - i - j]);
                for l in 0..=last - i - j {
                    naive[4] = naive[4].min(t[i] + t[j] + t[l] + t[last - i - j - l]);
                }
            }
        }
        for (n, &want) in naive.iter().enumerate().skip(1) {
            let (v, idx) = simplex_search(n, &t);
            assert_eq!(v, want);
            assert_eq!(idx.iter().sum::<usize>(), last);
            assert_eq!(idx.iter().map(|&i| t[i]).sum::<f64>(), v);
        }
    }

    fn sq() -> PhiSpec {
        PhiSpec::power(2.0).unwrap()
    }

    fn root() -> PsiSpec {
        PsiSpec::power(0.5).unwrap()
    }

    #[test]
    fn lambda_at_zero_alpha() {
        let phi = PhiSpec::scaled_power(2.0, 3.0).unwrap();
        let v = lambda_eval(&phi, &root(), 0.0, 2.0, 256).unwrap();
        assert_eq!(v, Energy::Finite(0.0));
        let tab = PhiSpec::tabulated(vec![0.0, 1.0], vec![0.5, 1.0]).unwrap();
        assert_eq!(lambda_eval(&tab, &root(), 0.0, 2.0, 256).unwrap(), Energy::Finite(1.0));
    }

    #[test]
    fn lambda_matches_scan() {
        let oracle = (0..=1_000_000)
            .map(|i| {
                let l = i as f64 / 1e6;
                (1.0 - l).powi(2) + l.sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        let v = lambda_eval(&sq(), &root(), 1.0, 1.0, 4096).unwrap().to_f64();
        assert!((v - oracle).abs() < 1e-9, "{v} {oracle}");
    }

    #[test]
    fn lambda_bounded_by_bulk() {
        for &a in &[0.1, 0.5, 1.0, 3.0] {
            for &b in &[0.2, 1.0, 5.0] {
                let v = lambda_eval(&sq(), &root(), a, b, 1024).unwrap().to_f64();
                assert!(v <= b * (a / b).powi(2) + 1e-12);
            }
        }
    }

    #[test]
    fn lambda_infinite_branches() {
        assert!(lambda_eval(&PhiSpec::Rigid, &PsiSpec::Disabled, 1.0, 1.0, 64)
            .unwrap()
            .is_infinite());
        assert_eq!(
            lambda_eval(&PhiSpec::Rigid, &root(), 4.0, 1.0, 64).unwrap(),
            Energy::Finite(2.0)
        );
        assert_eq!(
            lambda_eval(&sq(), &PsiSpec::Disabled, 2.0, 1.0, 64).unwrap(),
            Energy::Finite(4.0)
        );
        assert!(lambda_eval(&sq(), &root(), 1.0, 0.0, 64).is_err());
    }

    #[test]
    fn theta_zero_alpha() {
        let fam = PhiEpsFamily::ArctanMs;
        assert_eq!(theta_structured(&fam, 0.1, 0.0, 1.0, 256).unwrap(), 0.0);
        assert_eq!(theta_bruteforce(&PhiEpsFamily::ArctanMs, 0.5, 0.0, 1.0, 11).unwrap(), 0.0);
    }

    #[test]
    fn theta_single_variable() {
        let fam = PhiEpsFamily::ArctanMs;
        let (eps, alpha) = (0.7, 1.3);
        let expect = eps * fam.value(eps, alpha / eps);
        assert_eq!(theta_bruteforce(&fam, eps, alpha, 1.0, 17).unwrap(), expect);
        assert_eq!(theta_structured(&fam, eps, alpha, 1.0, 64).unwrap(), expect);
    }

    #[test]
    fn theta_errors() {
        let fam = PhiEpsFamily::ArctanMs;
        assert!(matches!(theta_structured(&fam, 2.0, 1.0, 1.0, 64), Err(Error::Domain(_))));
        assert!(matches!(
            theta_bruteforce(&fam, 0.1, 1.0, 1.0, 11),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn n_eps_is_robust() {
        assert_eq!(n_eps(0.1, 0.3), 3);
        assert_eq!(n_eps(0.1, 1.0), 10);
        assert_eq!(n_eps(0.3, 1.0), 3);
    }

    #[test]
    fn envelope_with_huge_jump_cost() {
        let g = PsiSpec::constant(1e6).unwrap();
        let rep = mu_envelope(&sq(), &g, 3.0, 31, 512, 1e-9).unwrap();
        assert_eq!(rep.rbar, 3.0);
        assert!(rep.all_ok());
        for (r, m) in rep.samples {
            assert_eq!(m, r * r);
        }
    }

    #[test]
    fn envelope_square_root() {
        let rep = mu_envelope(&sq(), &root(), 3.0, 121, 4096, 1e-8).unwrap();
        assert!(rep.rbar > 0.0 && rep.rbar < 3.0, "{}", rep.rbar);
        assert!(rep.all_ok(), "{rep:?}");
    }

    #[test]
    fn envelope_domain() {
        assert!(mu_envelope(&sq(), &root(), 0.0, 10, 64, 1e-9).is_err());
    }
}
