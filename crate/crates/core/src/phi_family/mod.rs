//! Families `phi_eps` of non-convex integrands, their limit pairs
//! `(phi*, psi*)`, and the one-dimensional analysis built on them.

mod analysis;
mod family;
mod probe;
mod spec;

pub use analysis::{lambda_eval, mu_envelope, n_eps, theta_bruteforce, theta_structured, EnvelopeReport};
pub use family::{Constructed, PhiEpsFamily, DEFAULT_INNER_GRID};
pub use probe::{fit_linear_bound, probe_hypotheses, Hypothesis, LinearBound, ProbeReport, SamplingPlan, Status};
pub use spec::{PhiSpec, PsiSpec, Table};
pub(crate) use spec::{parse_f64, parse_table};
