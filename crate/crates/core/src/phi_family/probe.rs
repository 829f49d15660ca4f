//! Sampled checks of the structural hypotheses on a family `{phi_eps}`:
//! continuity/monotonicity (li1), convex-then-concave shape (li2), the upper
//! estimate (Est), linear growth from below (Cpt1) and scale monotonicity
//! (Cpt2).

use std::fmt;

use super::family::PhiEpsFamily;
use crate::error::{Error, Result};
use crate::numeric::linspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    Li1,
    Li2,
    Est,
    Cpt1,
    Cpt2,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 5] = [
        Hypothesis::Li1,
        Hypothesis::Li2,
        Hypothesis::Est,
        Hypothesis::Cpt1,
        Hypothesis::Cpt2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::Li1 => "li1",
            Hypothesis::Li2 => "li2",
            Hypothesis::Est => "Est",
            Hypothesis::Cpt1 => "Cpt1",
            Hypothesis::Cpt2 => "Cpt2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    /// Violated at the sampled tuple described by the witness.
    Fail(String),
    /// No violation on the samples, but the property is not established for
    /// this family.
    Unverified(String),
}

impl Status {
    pub fn passed(&self) -> bool {
        matches!(self, Status::Pass)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => f.write_str("pass"),
            Status::Fail(w) => write!(f, "FAIL ({w})"),
            Status::Unverified(n) => write!(f, "unverified ({n})"),
        }
    }
}

/// Linear lower bound `phi_eps(r) >= h r - k` fitted for one `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBound {
    pub m: f64,
    pub h: f64,
    pub k: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub results: Vec<(Hypothesis, Status)>,
    /// Best `(H_M, K_M)` per sampled `M`, when one was found.
    pub cpt1_bounds: Vec<LinearBound>,
}

impl ProbeReport {
    pub fn status(&self, h: Hypothesis) -> &Status {
        &self
            .results
            .iter()
            .find(|(k, _)| *k == h)
            .expect("every hypothesis is probed")
            .1
    }

    pub fn bound_for(&self, m: f64) -> Option<LinearBound> {
        self.cpt1_bounds.iter().copied().find(|b| b.m >= m)
    }
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (h, s) in &self.results {
            writeln!(f, "{:<5} {s}", h.label())?;
        }
        Ok(())
    }
}

/// Finite sampling grids for [`probe_hypotheses`].
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub eps: Vec<f64>,
    /// `r` grid for li1/li2 is `linspace(0, r_max, r_samples)`.
    pub r_max: f64,
    pub r_samples: usize,
    /// Values used for `A`, `S` (Est) and `A`, `B` (Cpt2).
    pub amounts: Vec<f64>,
    pub m_values: Vec<f64>,
    pub ks: Vec<u32>,
    /// Candidate slopes for Cpt1, tried from largest to smallest.
    pub h_candidates: Vec<f64>,
    /// Largest acceptable intercept `K_M` for Cpt1.
    pub k_max: f64,
    pub cpt1_samples: usize,
    pub rel_tol: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            eps: vec![1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3],
            r_max: 20.0,
            r_samples: 401,
            amounts: vec![0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0],
            m_values: vec![0.5, 1.0, 2.0, 4.0],
            ks: vec![1, 2, 3, 5],
            h_candidates: vec![4.0, 2.0, 1.0, 0.5, 0.25, 0.1, 0.05, 0.01],
            k_max: 10.0,
            cpt1_samples: 2001,
            rel_tol: 1e-9,
        }
    }
}

impl SamplingPlan {
    fn validate(&self) -> Result<()> {
        if self.eps.is_empty()
            || self.r_samples < 3
            || self.amounts.is_empty()
            || self.m_values.is_empty()
            || self.ks.is_empty()
            || self.h_candidates.is_empty()
            || self.cpt1_samples < 2
        {
            return Err(Error::domain("sampling plan has an empty grid"));
        }
        if self.eps.iter().any(|&e| !(e > 0.0)) || !(self.r_max > 0.0) {
            return Err(Error::domain("sampling plan needs positive eps and r_max"));
        }
        Ok(())
    }
}

fn tol(plan: &SamplingPlan, v: f64) -> f64 {
    plan.rel_tol * (1.0 + v.abs())
}

fn probe_li1(fam: &PhiEpsFamily, plan: &SamplingPlan) -> Status {
    let rs = linspace(0.0, plan.r_max, plan.r_samples);
    for &eps in &plan.eps {
        let mut prev = fam.value(eps, 0.0);
        if !(prev >= 0.0) || !prev.is_finite() {
            return Status::Fail(format!("phi_eps(0) = {prev} at eps={eps}"));
        }
        for &r in &rs[1..] {
            let v = fam.value(eps, r);
            if !v.is_finite() || v < prev - tol(plan, prev) {
                return Status::Fail(format!("eps={eps} r={r}: {v} < {prev}"));
            }
            prev = v;
        }
    }
    Status::Pass
}

fn probe_li2(fam: &PhiEpsFamily, plan: &SamplingPlan) -> Status {
    let rs = linspace(0.0, plan.r_max, plan.r_samples);
    for &eps in &plan.eps {
        let v: Vec<f64> = rs.iter().map(|&r| fam.value(eps, r)).collect();
        let mut concave_from: Option<f64> = None;
        for i in 1..v.len() - 1 {
            let d2 = v[i - 1] - 2.0 * v[i] + v[i + 1];
            let t = tol(plan, v[i]);
            match concave_from {
                None if d2 < -t => concave_from = Some(rs[i]),
                Some(start) if d2 > t => {
                    return Status::Fail(format!(
                        "eps={eps}: convex again at r={} after concave from r={start}",
                        rs[i]
                    ))
                }
                _ => {}
            }
        }
    }
    Status::Pass
}

fn probe_est(fam: &PhiEpsFamily, plan: &SamplingPlan) -> Status {
    let (phi_up, psi_up) = fam.limit_pair();
    for &eps in &plan.eps {
        for &a in &plan.amounts {
            for &s in plan.amounts.iter().filter(|&&s| s > 0.0) {
                let lhs = fam.value(eps, a + s);
                let rhs = phi_up.eval(a) + psi_up.eval(eps * s).scale(1.0 / eps);
                if let Some(rhs) = rhs.finite() {
                    if lhs > rhs + tol(plan, rhs) {
                        return Status::Fail(format!("eps={eps} A={a} S={s}: {lhs} > {rhs}"));
                    }
                }
            }
        }
    }
    Status::Pass
}

/// Intercept needed for slope `h` over `r in [0, m/eps]` and all sampled eps.
fn cpt1_intercept(fam: &PhiEpsFamily, plan: &SamplingPlan, m: f64, h: f64) -> f64 {
    let mut k: f64 = 0.0;
    for &eps in &plan.eps {
        for r in linspace(0.0, m / eps, plan.cpt1_samples) {
            k = k.max(h * r - fam.value(eps, r));
        }
    }
    k
}

/// Fits `(H_M, K_M)` for one `M`: the largest candidate slope whose required
/// intercept stays below `plan.k_max`.
pub fn fit_linear_bound(fam: &PhiEpsFamily, plan: &SamplingPlan, m: f64) -> Option<LinearBound> {
    let mut hs = plan.h_candidates.clone();
    hs.sort_by(|a, b| b.total_cmp(a));
    hs.into_iter()
        .filter(|&h| h > 0.0)
        .map(|h| LinearBound {
            m,
            h,
            k: cpt1_intercept(fam, plan, m, h),
        })
        .find(|b| b.k <= plan.k_max)
}

fn probe_cpt1(fam: &PhiEpsFamily, plan: &SamplingPlan) -> (Status, Vec<LinearBound>) {
    let mut bounds = Vec::new();
    for &m in &plan.m_values {
        match fit_linear_bound(fam, plan, m) {
            Some(b) => bounds.push(b),
            None => {
                return (
                    Status::Fail(format!("M={m}: no candidate slope with K_M <= {}", plan.k_max)),
                    bounds,
                )
            }
        }
    }
    (Status::Pass, bounds)
}

fn probe_cpt2(fam: &PhiEpsFamily, plan: &SamplingPlan) -> Status {
    let mut checked = 0usize;
    for &eps in &plan.eps {
        for &k in &plan.ks {
            let kf = k as f64;
            for &a in &plan.amounts {
                for &b in &plan.amounts {
                    let lhs = fam.value((kf + 1.0) * eps, (a + b) / (kf + 1.0));
                    let rhs = fam.value(eps, a) / (kf + 1.0)
                        + kf / (kf + 1.0) * fam.value(kf * eps, b / kf);
                    if lhs > rhs + tol(plan, rhs) {
                        return Status::Fail(format!("eps={eps} k={k} A={a} B={b}: {lhs} > {rhs}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    if fam.cpt2_established() {
        Status::Pass
    } else {
        Status::Unverified(format!("no violation on {checked} samples"))
    }
}

/// Runs all five probes on the sampling plan.
pub fn probe_hypotheses(fam: &PhiEpsFamily, plan: &SamplingPlan) -> Result<ProbeReport> {
    plan.validate()?;
    let (cpt1, bounds) = probe_cpt1(fam, plan);
    Ok(ProbeReport {
        results: vec![
            (Hypothesis::Li1, probe_li1(fam, plan)),
            (Hypothesis::Li2, probe_li2(fam, plan)),
            (Hypothesis::Est, probe_est(fam, plan)),
            (Hypothesis::Cpt1, cpt1),
            (Hypothesis::Cpt2, probe_cpt2(fam, plan)),
        ],
        cpt1_bounds: bounds,
    })
}
