//! Exact solution of the linear search for any nonzero jumping rate.
//!
//! In the `{|a>, |b>}` basis the walk is a two-level system with gap
//! `dE = sqrt(gamma^2 N^2 - 2 gamma N + 4 gamma + 1)`; the success probability
//! oscillates as `p* sin^2(dE t / 2) + cos^2(dE t / 2) / N`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Result, SearchError};
use crate::model::{check_dimension, SubspaceState};

/// Spectrum of the subspace Hamiltonian at a fixed `(n, gamma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSolution {
    pub n: usize,
    pub gamma: f64,
    pub delta_e: f64,
    pub e1: f64,
    pub e2: f64,
}

impl LinearSolution {
    /// Fails for `gamma = 0`, where the closed form divides by zero; that
    /// evolution is diagonal and goes through the integrator instead.
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        check_dimension(n)?;
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(SearchError::UnsupportedParameter(format!(
                "closed form needs a finite nonzero gamma (got {gamma}); \
                 gamma = 0 is diagonal evolution, use the integrator"
            )));
        }
        let delta_e = energy_gap(n, gamma);
        let trace = gamma * n as f64 - 1.0;
        Ok(Self {
            n,
            gamma,
            delta_e,
            e1: 0.5 * (trace - delta_e),
            e2: 0.5 * (trace + delta_e),
        })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `(-gamma N + 1)(gamma N - 2 gamma - 1) + dE^2`, shared by alpha and p*.
    fn amplitude_numerator(&self) -> f64 {
        let gn = self.gamma * self.nf();
        (1.0 - gn) * (gn - 2.0 * self.gamma - 1.0) + self.delta_e * self.delta_e
    }

    pub fn state_at(&self, t: f64) -> Result<SubspaceState> {
        if !(t >= 0.0) {
            return Err(SearchError::UnsupportedParameter(format!("time must be >= 0, got {t}")));
        }
        let (g, nf, de) = (self.gamma, self.nf(), self.delta_e);
        let (s, c) = (0.5 * de * t).sin_cos();
        let prefactor = C64::from_polar(1.0, -0.5 * (g * nf - 1.0) * t) / (4.0 * g * nf.sqrt() * de);
        let alpha = prefactor * C64::new(4.0 * g * de * c, 2.0 * s * self.amplitude_numerator());
        let beta = prefactor
            * (-2.0 * g * (nf - 1.0).sqrt())
            * C64::new(-2.0 * de * c, 2.0 * s * (1.0 - g * nf));
        Ok(SubspaceState::from_raw(alpha, beta))
    }

    pub fn success_probability(&self, t: f64) -> f64 {
        let (s, c) = (0.5 * self.delta_e * t).sin_cos();
        self.peak_probability() * s * s + c * c / self.nf()
    }

    /// First peak, `pi / dE`. Later peaks follow every `2 pi / dE`.
    pub fn peak_time(&self) -> f64 {
        PI / self.delta_e
    }

    pub fn peak_probability(&self) -> f64 {
        let ratio =
            self.amplitude_numerator() / (2.0 * self.gamma * self.nf().sqrt() * self.delta_e);
        ratio * ratio
    }

    /// Period of `p(t)`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.delta_e
    }
}

/// Gap between the two subspace eigenvalues.
///
/// Panics if `n < 2`.
pub fn energy_gap(n: usize, gamma: f64) -> f64 {
    assert!(n >= 2, "energy_gap needs n >= 2, got {n}");
    let nf = n as f64;
    let radicand = gamma * gamma * nf * nf - 2.0 * gamma * nf + 4.0 * gamma + 1.0;
    // (a - d)^2 + 4|b|^2 >= 0 for any real gamma
    assert!(radicand >= 0.0, "negative gap radicand {radicand} at n = {n}, gamma = {gamma}");
    radicand.sqrt()
}

pub fn state_at(n: usize, gamma: f64, t: f64) -> Result<SubspaceState> {
    LinearSolution::new(n, gamma)?.state_at(t)
}

pub fn success_probability(n: usize, gamma: f64, t: f64) -> Result<f64> {
    Ok(LinearSolution::new(n, gamma)?.success_probability(t))
}

pub fn peak_time(n: usize, gamma: f64) -> Result<f64> {
    Ok(LinearSolution::new(n, gamma)?.peak_time())
}

pub fn peak_probability(n: usize, gamma: f64) -> Result<f64> {
    Ok(LinearSolution::new(n, gamma)?.peak_probability())
}

/// Derivative of the peak probability with respect to the jumping rate,
///
/// `dp*/dgamma = -4 (N-1)(gamma^2 N^2 - 1) / (N dE^4)`,
///
/// obtained from `p* = (gamma N + 1)^2 / (N dE^2)`. Positive below
/// `gamma = 1/N`, zero at it, negative above.
pub fn dpstar_dgamma(n: usize, gamma: f64) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    let gap_sqr = energy_gap(n, gamma).powi(2);
    let denominator = nf * gap_sqr * gap_sqr;
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(SearchError::SingularPoint { gamma });
    }
    Ok(-4.0 * (nf - 1.0) * (gamma * gamma * nf * nf - 1.0) / denominator)
}

/// The derivative as commonly printed for this problem,
/// `4 (N-1)(gamma^2 N^2 - 1) / (N (gamma^2 N^2 - 2 gamma (N-1) + 1)^2)`.
///
/// It shares the stationary point `gamma = 1/N` with [`dpstar_dgamma`] but has
/// the opposite sign and a different denominator, so it does not match a
/// finite difference of [`peak_probability`]. Kept for comparison only.
pub fn dpstar_dgamma_printed(n: usize, gamma: f64) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    let base = gamma * gamma * nf * nf - 2.0 * gamma * (nf - 1.0) + 1.0;
    let denominator = nf * base * base;
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(SearchError::SingularPoint { gamma });
    }
    Ok(4.0 * (nf - 1.0) * (gamma * gamma * nf * nf - 1.0) / denominator)
}

/// `1 / n`, the jumping rate with `p* = 1`.
pub fn critical_gamma(n: usize) -> f64 {
    assert!(n >= 2, "critical_gamma needs n >= 2, got {n}");
    1.0 / n as f64
}
