//! Hamiltonians, initial states, and the map between the full N-vertex space
//! and the invariant two-dimensional subspace spanned by the marked vertex
//! `|a>` and the uniform superposition of unmarked vertices `|b>`.
//!
//! Vertices are 0-indexed. Units have hbar = 1.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Result, SearchError};
use crate::integrator::GammaPolicy;

/// Tolerance on `sum |psi_i|^2 = 1` for states built from user data.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Largest allowed spread of the unmarked amplitudes in [`project`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(SearchError::InvalidDimension { n });
    }
    Ok(())
}

pub(crate) fn check_marked(n: usize, marked: usize) -> Result<()> {
    if marked >= n {
        return Err(SearchError::MarkedOutOfRange { marked, n });
    }
    Ok(())
}

fn norm_sqr(amplitudes: &[C64]) -> f64 {
    amplitudes.iter().map(|z| z.norm_sqr()).sum()
}

/// Complex amplitudes over the `n` vertices of the complete graph.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Builds a state, rejecting fewer than two vertices or a norm off by
    /// more than [`NORM_TOLERANCE`].
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dimension(amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(SearchError::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Integrator output; the norm is monitored by the caller instead.
    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// `|<i|psi>|^2`
    pub fn probability(&self, vertex: usize) -> f64 {
        self.amplitudes[vertex].norm_sqr()
    }
}

/// State `alpha |a> + beta |b>` inside the invariant subspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubspaceState {
    pub alpha: C64,
    pub beta: C64,
}

impl SubspaceState {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let state = Self { alpha, beta };
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(SearchError::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    pub(crate) fn from_raw(alpha: C64, beta: C64) -> Self {
        Self { alpha, beta }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }

    /// Probability of measuring the marked vertex.
    pub fn success(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn as_array(&self) -> [C64; 2] {
        [self.alpha, self.beta]
    }
}

/// Dense Hermitian matrix over the vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHamiltonian {
    entries: DMatrix<C64>,
}

impl DenseHamiltonian {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    /// Exact comparison against the conjugate transpose.
    pub fn is_hermitian(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| self.entries[(i, j)] == self.entries[(j, i)].conj()))
    }

    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        let n = self.n();
        if psi.len() != n {
            return Err(SearchError::DimensionMismatch { expected: n, found: psi.len() });
        }
        Ok((0..n)
            .map(|i| {
                self.entries
                    .row(i)
                    .iter()
                    .zip(psi)
                    .map(|(h, z)| h * z)
                    .sum()
            })
            .collect())
    }
}

/// The Hermitian 2x2 matrix `[[a, b], [conj(b), d]]` in the `{|a>, |b>}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubspaceHamiltonian {
    pub a: f64,
    pub b: C64,
    pub d: f64,
}

impl SubspaceHamiltonian {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a + self.d);
        let half_gap = (0.25 * (self.a - self.d).powi(2) + self.b.norm_sqr()).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    pub fn apply(&self, alpha: C64, beta: C64) -> (C64, C64) {
        (
            self.a * alpha + self.b * beta,
            self.b.conj() * alpha + self.d * beta,
        )
    }
}

/// Discrete Laplacian of the complete graph: 1 off the diagonal, `-(n-1)` on it.
pub fn laplacian_complete(n: usize) -> Result<DenseHamiltonian> {
    check_dimension(n)?;
    let diag = -((n - 1) as f64);
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(diag, 0.0)
        } else {
            C64::new(1.0, 0.0)
        }
    });
    Ok(DenseHamiltonian { entries })
}

/// `H0 = -gamma L - |a><a|`
pub fn linear_hamiltonian(n: usize, gamma: f64, marked: usize) -> Result<DenseHamiltonian> {
    check_dimension(n)?;
    check_marked(n, marked)?;
    let mut entries = laplacian_complete(n)?.entries.map(|l| l * -gamma);
    entries[(marked, marked)] -= 1.0;
    Ok(DenseHamiltonian { entries })
}

/// `H0` restricted to the `{|a>, |b>}` subspace.
pub fn subspace_hamiltonian_linear(n: usize, gamma: f64) -> Result<SubspaceHamiltonian> {
    check_dimension(n)?;
    let m = (n - 1) as f64;
    Ok(SubspaceHamiltonian {
        a: gamma * m - 1.0,
        b: C64::new(-gamma * m.sqrt(), 0.0),
        d: gamma,
    })
}

/// `H0 + lambda |psi|^2` in the subspace: `f = lambda` is added to `a` with
/// weight `|alpha|^2`, and `g = lambda / (n-1)` to `d` with weight `|beta|^2`.
pub fn subspace_effective_hamiltonian(
    state: &SubspaceState,
    n: usize,
    gamma: f64,
    lambda: f64,
) -> Result<SubspaceHamiltonian> {
    let mut h = subspace_hamiltonian_linear(n, gamma)?;
    h.a += lambda * state.alpha.norm_sqr();
    h.d += lambda / (n - 1) as f64 * state.beta.norm_sqr();
    Ok(h)
}

/// `H(psi) = -gamma L - |a><a| + lambda sum_i |psi_i|^2 |i><i|`
pub fn effective_hamiltonian(
    state: &StateVector,
    n: usize,
    gamma: f64,
    lambda: f64,
    marked: usize,
) -> Result<DenseHamiltonian> {
    if state.n() != n {
        return Err(SearchError::DimensionMismatch { expected: n, found: state.n() });
    }
    let mut h = linear_hamiltonian(n, gamma, marked)?;
    if lambda != 0.0 {
        for (i, z) in state.amplitudes().iter().enumerate() {
            h.entries[(i, i)] += lambda * z.norm_sqr();
        }
    }
    Ok(h)
}

pub fn uniform_state(n: usize) -> Result<StateVector> {
    check_dimension(n)?;
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    Ok(StateVector::from_raw(vec![amp; n]))
}

/// The uniform superposition written as `(1/sqrt(n), sqrt((n-1)/n))`.
pub fn subspace_initial(n: usize) -> Result<SubspaceState> {
    check_dimension(n)?;
    let nf = n as f64;
    Ok(SubspaceState::from_raw(
        C64::new(1.0 / nf.sqrt(), 0.0),
        C64::new(((nf - 1.0) / nf).sqrt(), 0.0),
    ))
}

/// Places `alpha` on the marked vertex and `beta / sqrt(n-1)` on every other one.
pub fn embed(state: &SubspaceState, n: usize, marked: usize) -> Result<StateVector> {
    check_dimension(n)?;
    check_marked(n, marked)?;
    let spread = state.beta / ((n - 1) as f64).sqrt();
    let mut amplitudes = vec![spread; n];
    amplitudes[marked] = state.alpha;
    Ok(StateVector::from_raw(amplitudes))
}

/// Inverse of [`embed`]. Fails if the unmarked amplitudes differ by more than
/// [`SYMMETRY_TOLERANCE`]; asymmetric states are never averaged.
pub fn project(state: &StateVector, marked: usize) -> Result<SubspaceState> {
    let n = state.n();
    check_dimension(n)?;
    check_marked(n, marked)?;
    let amps = state.amplitudes();
    let unmarked = || amps.iter().enumerate().filter(|&(i, _)| i != marked).map(|(_, z)| *z);
    let mean = unmarked().sum::<C64>() / (n - 1) as f64;
    let max_deviation = unmarked().map(|z| (z - mean).norm()).fold(0.0, f64::max);
    if max_deviation > SYMMETRY_TOLERANCE {
        return Err(SearchError::SymmetryViolation { max_deviation });
    }
    Ok(SubspaceState::from_raw(amps[marked], mean * ((n - 1) as f64).sqrt()))
}

/// Which representation the integrator propagates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Subspace,
    Full,
}

/// Everything needed to reproduce one search run.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub n: usize,
    pub marked: usize,
    pub lambda: f64,
    pub gamma_policy: GammaPolicy,
    pub t_max: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub space: Space,
}

impl SearchConfig {
    /// Defaults: marked vertex 0, subspace propagation, `t_max = 3 pi sqrt(n) / 2`,
    /// `dt = t_max / 20000`, every step sampled.
    pub fn new(n: usize, gamma_policy: GammaPolicy, lambda: f64) -> Self {
        let t_max = Self::default_t_max(n);
        Self {
            n,
            marked: 0,
            lambda,
            gamma_policy,
            t_max,
            dt: Self::default_dt(t_max),
            sample_every: 1,
            space: Space::Subspace,
        }
    }

    pub fn default_t_max(n: usize) -> f64 {
        1.5 * std::f64::consts::PI * (n as f64).sqrt()
    }

    /// `t_max / 20000`; a zero horizon takes no steps, so any positive dt will do.
    pub fn default_dt(t_max: f64) -> f64 {
        if t_max > 0.0 {
            t_max / 20000.0
        } else {
            1.0
        }
    }

    /// Sets the horizon and resets `dt` to its default for that horizon.
    pub fn with_horizon(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self.dt = Self::default_dt(t_max);
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_marked(mut self, marked: usize) -> Self {
        self.marked = marked;
        self
    }

    pub fn with_space(mut self, space: Space) -> Self {
        self.space = space;
        self
    }

    pub fn with_sample_every(mut self, sample_every: usize) -> Self {
        self.sample_every = sample_every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_dimension(self.n)?;
        check_marked(self.n, self.marked)?;
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(SearchError::InvalidConfig(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SearchError::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.sample_every == 0 {
            return Err(SearchError::InvalidConfig("sample_every must be >= 1".into()));
        }
        if !self.lambda.is_finite() {
            return Err(SearchError::InvalidConfig("lambda must be finite".into()));
        }
        self.gamma_policy.validate(self.lambda)
    }
}
