//! Energy-like functionals evaluated along trajectories.
//!
//! * `h0`: `<H0>`, conserved by the linear walk.
//! * `gp`: `<H0 + (lambda/2)|psi|^2>`, conserved at fixed gamma.
//! * `heff`: `<H0 + lambda|psi|^2>`, the effective Hamiltonian; not conserved.
//! * `rescaled`: `<H0>` at `gamma = 1/n`. Under the attractive critical rate
//!   `H(t) = gamma_c(t) n H0|_{1/n} + c(t) I`, so this is `<H(t)>/(gamma_c(t) n)`
//!   with the identity shift `c(t)` removed, and it is conserved.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Result, SearchError};
use crate::integrator::{Trajectory, WalkState, NORM_DRIFT_LIMIT};
use crate::model::{check_dimension, check_marked, subspace_hamiltonian_linear, SearchConfig};

/// Largest imaginary part accepted from a Hermitian quadratic form.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    H0,
    Gp,
    Heff,
    Rescaled,
}

impl Observable {
    pub const ALL: [Observable; 4] =
        [Observable::H0, Observable::Gp, Observable::Heff, Observable::Rescaled];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::H0 => "h0",
            Observable::Gp => "gp",
            Observable::Heff => "heff",
            Observable::Rescaled => "rescaled",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| SearchError::UnknownObservable(s.to_string()))
    }
}

/// `<psi|H0|psi>` (still complex) and `sum_i |psi_i|^4`.
fn moments(state: &WalkState, n: usize, gamma: f64, marked: usize) -> Result<(C64, f64)> {
    check_dimension(n)?;
    check_marked(n, marked)?;
    let norm_sqr = state.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_DRIFT_LIMIT {
        return Err(SearchError::NotNormalized { norm_sqr });
    }
    match state {
        WalkState::Subspace(s) => {
            let h = subspace_hamiltonian_linear(n, gamma)?;
            let (alpha, beta) = (s.alpha, s.beta);
            let quad = h.a * alpha.conj() * alpha
                + h.b * alpha.conj() * beta
                + h.b.conj() * beta.conj() * alpha
                + h.d * beta.conj() * beta;
            let quartic = alpha.norm_sqr().powi(2) + beta.norm_sqr().powi(2) / (n - 1) as f64;
            Ok((quad, quartic))
        }
        WalkState::Full(v) => {
            if v.n() != n {
                return Err(SearchError::DimensionMismatch { expected: n, found: v.n() });
            }
            let psi = v.amplitudes();
            let total: C64 = psi.iter().sum();
            let nf = n as f64;
            // (L psi)_i = sum_j psi_j - n psi_i on the complete graph
            let quad = psi
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let mut h = -gamma * (total - nf * z);
                    if i == marked {
                        h -= z;
                    }
                    z.conj() * h
                })
                .sum();
            let quartic = psi.iter().map(|z| z.norm_sqr().powi(2)).sum();
            Ok((quad, quartic))
        }
    }
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_RESIDUE_LIMIT {
        return Err(SearchError::HermiticityViolation { residue: z.im.abs() });
    }
    Ok(z.re)
}

/// `<psi|H0|psi>` with `H0 = -gamma L - |a><a|`.
pub fn expected_h0(state: &WalkState, n: usize, gamma: f64, marked: usize) -> Result<f64> {
    real_part(moments(state, n, gamma, marked)?.0)
}

/// `<H0> + (lambda/2) sum_i |psi_i|^4`
pub fn gp_energy(state: &WalkState, n: usize, gamma: f64, lambda: f64, marked: usize) -> Result<f64> {
    let (quad, quartic) = moments(state, n, gamma, marked)?;
    Ok(real_part(quad)? + 0.5 * lambda * quartic)
}

/// `<H0> + lambda sum_i |psi_i|^4`
pub fn expected_heff(
    state: &WalkState,
    n: usize,
    gamma: f64,
    lambda: f64,
    marked: usize,
) -> Result<f64> {
    let (quad, quartic) = moments(state, n, gamma, marked)?;
    Ok(real_part(quad)? + lambda * quartic)
}

/// `<H0>` at the linear critical rate `1/n`, whatever rate drove the state.
pub fn rescaled_attractive_energy(state: &WalkState, n: usize, marked: usize) -> Result<f64> {
    expected_h0(state, n, 1.0 / n as f64, marked)
}

/// Evaluates a monitor for a state of `config`'s run, with `gamma` the rate in
/// effect at that state.
pub fn evaluate(
    observable: Observable,
    state: &WalkState,
    config: &SearchConfig,
    gamma: f64,
) -> Result<f64> {
    let (n, lambda, marked) = (config.n, config.lambda, config.marked);
    match observable {
        Observable::H0 => expected_h0(state, n, gamma, marked),
        Observable::Gp => gp_energy(state, n, gamma, lambda, marked),
        Observable::Heff => expected_heff(state, n, gamma, lambda, marked),
        Observable::Rescaled => rescaled_attractive_energy(state, n, marked),
    }
}

/// A monitored series and its deviation from the initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    pub values: Vec<f64>,
    /// `max_k |values[k] - values[0]|`
    pub drift: f64,
    /// `drift / max(|values[0]|, 1e-300)`
    pub relative_drift: f64,
}

impl ObservableSeries {
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Self {
        let first = values.first().copied().unwrap_or(0.0);
        let drift = values.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
        Self {
            name: name.into(),
            relative_drift: drift / first.abs().max(1e-300),
            drift,
            values,
        }
    }
}

pub fn drift_report(trajectory: &Trajectory, name: &str) -> Result<ObservableSeries> {
    let values = trajectory
        .observable(name)
        .ok_or_else(|| SearchError::UnknownObservable(name.to_string()))?;
    Ok(ObservableSeries::from_values(name, values.to_vec()))
}
