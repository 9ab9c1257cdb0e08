//! Fixed-step RK4 propagation of the linear Schrodinger equation and the cubic
//! nonlinear (Gross-Pitaevskii) equation
//!
//! `i dpsi/dt = (H0 + lambda diag(|psi_i|^2)) psi`,
//!
//! either on the full N-vertex space or in the `{|a>, |b>}` subspace. The
//! state is never renormalized; norm drift is reported, not corrected.

use num_complex::Complex64 as C64;

use crate::conservation::{self, Observable};
use crate::error::{Result, SearchError};
use crate::model::{
    check_dimension, check_marked, embed, laplacian_complete, project, subspace_initial,
    uniform_state, DenseHamiltonian, SearchConfig, Space, StateVector, SubspaceState,
};

/// Largest `| |psi|^2 - 1 |` tolerated during integration.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// How the jumping rate is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaPolicy {
    Fixed(f64),
    /// `(2 - lambda) / (2n)`, constant; needs `lambda > 0`.
    RepulsiveCritical,
    /// `gamma_c(t)` recomputed from the current populations; needs `lambda < 0`.
    AttractiveCritical,
}

impl GammaPolicy {
    pub fn validate(&self, lambda: f64) -> Result<()> {
        match *self {
            GammaPolicy::Fixed(g) if !g.is_finite() => {
                Err(SearchError::InvalidConfig(format!("gamma must be finite, got {g}")))
            }
            GammaPolicy::RepulsiveCritical if !(lambda > 0.0) => Err(SearchError::InvalidConfig(
                format!("repulsive critical gamma needs lambda > 0, got {lambda}"),
            )),
            GammaPolicy::AttractiveCritical if !(lambda < 0.0) => Err(SearchError::InvalidConfig(
                format!("attractive critical gamma needs lambda < 0, got {lambda}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn is_state_dependent(&self) -> bool {
        matches!(self, GammaPolicy::AttractiveCritical)
    }

    /// Jumping rate given the populations `|alpha|^2` and `|beta|^2`.
    pub fn evaluate(&self, n: usize, lambda: f64, alpha_sqr: f64, beta_sqr: f64) -> f64 {
        match *self {
            GammaPolicy::Fixed(g) => g,
            GammaPolicy::RepulsiveCritical => gamma_repulsive(n, lambda),
            GammaPolicy::AttractiveCritical => gamma_attractive(alpha_sqr, beta_sqr, n, lambda),
        }
    }
}

pub fn gamma_repulsive(n: usize, lambda: f64) -> f64 {
    (2.0 - lambda) / (2.0 * n as f64)
}

/// `gamma_c(t) = (1/n) [1 - lambda (|alpha|^2 - |beta|^2 / (n-1))]`
pub fn gamma_attractive(alpha_sqr: f64, beta_sqr: f64, n: usize, lambda: f64) -> f64 {
    debug_assert!(alpha_sqr + beta_sqr <= 1.0 + NORM_DRIFT_LIMIT);
    let nf = n as f64;
    (1.0 - lambda * (alpha_sqr - beta_sqr / (nf - 1.0))) / nf
}

/// A state in either representation.
#[derive(Clone, Debug, PartialEq)]
pub enum WalkState {
    Subspace(SubspaceState),
    Full(StateVector),
}

impl WalkState {
    pub fn amplitudes(&self) -> Vec<C64> {
        match self {
            WalkState::Subspace(s) => s.as_array().to_vec(),
            WalkState::Full(v) => v.amplitudes().to_vec(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            WalkState::Subspace(s) => s.norm_sqr(),
            WalkState::Full(v) => v.norm_sqr(),
        }
    }

    /// `|<a|psi>|^2`. Ignored `marked` for subspace states.
    pub fn success(&self, marked: usize) -> f64 {
        match self {
            WalkState::Subspace(s) => s.success(),
            WalkState::Full(v) => v.probability(marked),
        }
    }

    /// `(|alpha|^2, |beta|^2)`; in full space `|beta|^2` sums the unmarked vertices.
    pub fn populations(&self, marked: usize) -> (f64, f64) {
        match self {
            WalkState::Subspace(s) => (s.alpha.norm_sqr(), s.beta.norm_sqr()),
            WalkState::Full(v) => populations(v.amplitudes(), marked),
        }
    }

    pub fn to_subspace(&self, marked: usize) -> Result<SubspaceState> {
        match self {
            WalkState::Subspace(s) => Ok(*s),
            WalkState::Full(v) => project(v, marked),
        }
    }

    pub fn to_full(&self, n: usize, marked: usize) -> Result<StateVector> {
        match self {
            WalkState::Subspace(s) => embed(s, n, marked),
            WalkState::Full(v) => Ok(v.clone()),
        }
    }

    fn space(&self) -> Space {
        match self {
            WalkState::Subspace(_) => Space::Subspace,
            WalkState::Full(_) => Space::Full,
        }
    }

    fn from_amplitudes(space: Space, amplitudes: Vec<C64>) -> Self {
        match space {
            Space::Subspace => {
                WalkState::Subspace(SubspaceState::from_raw(amplitudes[0], amplitudes[1]))
            }
            Space::Full => WalkState::Full(StateVector::from_raw(amplitudes)),
        }
    }
}

fn populations(psi: &[C64], marked: usize) -> (f64, f64) {
    let alpha_sqr = psi[marked].norm_sqr();
    let beta_sqr = psi
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != marked)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    (alpha_sqr, beta_sqr)
}

fn minus_i(z: C64) -> C64 {
    C64::new(z.im, -z.re)
}

/// Right-hand side of the (nonlinear) Schrodinger equation for one model.
#[derive(Clone, Debug)]
struct Dynamics {
    n: usize,
    marked: usize,
    lambda: f64,
    policy: GammaPolicy,
    space: Space,
    laplacian: Option<DenseHamiltonian>,
}

impl Dynamics {
    fn new(n: usize, marked: usize, lambda: f64, policy: GammaPolicy, space: Space) -> Result<Self> {
        check_dimension(n)?;
        check_marked(n, marked)?;
        let laplacian = match space {
            Space::Full => Some(laplacian_complete(n)?),
            Space::Subspace => None,
        };
        Ok(Self { n, marked, lambda, policy, space, laplacian })
    }

    fn gamma(&self, psi: &[C64]) -> f64 {
        if !self.policy.is_state_dependent() {
            return self.policy.evaluate(self.n, self.lambda, 0.0, 0.0);
        }
        let (alpha_sqr, beta_sqr) = match self.space {
            Space::Subspace => (psi[0].norm_sqr(), psi[1].norm_sqr()),
            Space::Full => populations(psi, self.marked),
        };
        self.policy.evaluate(self.n, self.lambda, alpha_sqr, beta_sqr)
    }

    /// `-i H(psi) psi` with `gamma` given explicitly.
    fn rhs_at(&self, psi: &[C64], gamma: f64) -> Vec<C64> {
        match self.space {
            Space::Subspace => {
                let (alpha, beta) = (psi[0], psi[1]);
                let m = (self.n - 1) as f64;
                let a = gamma * m - 1.0 + self.lambda * alpha.norm_sqr();
                let b = -gamma * m.sqrt();
                let d = gamma + self.lambda / m * beta.norm_sqr();
                vec![minus_i(a * alpha + b * beta), minus_i(b * alpha + d * beta)]
            }
            Space::Full => {
                let laplacian = self.laplacian.as_ref().expect("full-space dynamics carry L");
                let lpsi = laplacian.apply(psi).expect("dimension checked at construction");
                psi.iter()
                    .zip(&lpsi)
                    .enumerate()
                    .map(|(i, (z, lz))| {
                        let mut h = -gamma * lz + self.lambda * z.norm_sqr() * z;
                        if i == self.marked {
                            h -= z;
                        }
                        minus_i(h)
                    })
                    .collect()
            }
        }
    }

    fn rhs(&self, psi: &[C64]) -> Vec<C64> {
        self.rhs_at(psi, self.gamma(psi))
    }

    fn initial(&self) -> Result<Vec<C64>> {
        Ok(match self.space {
            Space::Subspace => subspace_initial(self.n)?.as_array().to_vec(),
            Space::Full => uniform_state(self.n)?.into_amplitudes(),
        })
    }
}

/// `-i (H0 + lambda diag(|psi_i|^2)) psi` at a fixed jumping rate.
///
/// Subspace states use the 2x2 form with `f = lambda`, `g = lambda / (n-1)`.
pub fn derivative(
    state: &WalkState,
    n: usize,
    lambda: f64,
    gamma: f64,
    marked: usize,
) -> Result<Vec<C64>> {
    if let WalkState::Full(v) = state {
        if v.n() != n {
            return Err(SearchError::DimensionMismatch { expected: n, found: v.n() });
        }
    }
    let norm_sqr = state.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_DRIFT_LIMIT {
        return Err(SearchError::NotNormalized { norm_sqr });
    }
    let dynamics = Dynamics::new(n, marked, lambda, GammaPolicy::Fixed(gamma), state.space())?;
    Ok(dynamics.rhs_at(&state.amplitudes(), gamma))
}

/// One classical fourth-order Runge-Kutta step of `dy/dt = f(t, y)`.
///
/// `step` only labels the overflow error.
pub fn rk4_step<F>(state: &[C64], t: f64, dt: f64, step: usize, mut f: F) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64]) -> Vec<C64>,
{
    if !(dt > 0.0) {
        return Err(SearchError::InvalidConfig(format!("dt must be > 0, got {dt}")));
    }
    let shifted = |k: &[C64], h: f64| -> Vec<C64> {
        state.iter().zip(k).map(|(y, k)| y + k * h).collect()
    };
    let k1 = f(t, state);
    let k2 = f(t + 0.5 * dt, &shifted(&k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, &shifted(&k2, 0.5 * dt));
    let k4 = f(t + dt, &shifted(&k3, dt));
    let next: Vec<C64> = state
        .iter()
        .enumerate()
        .map(|(i, y)| y + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
        .collect();
    if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SearchError::NumericOverflow { step });
    }
    Ok(next)
}

/// Step-by-step integrator for one configuration.
#[derive(Clone, Debug)]
pub struct Propagator {
    dynamics: Dynamics,
    psi: Vec<C64>,
    t: f64,
    steps_taken: usize,
}

impl Propagator {
    pub fn new(config: &SearchConfig) -> Result<Self> {
        config.validate()?;
        let dynamics = Dynamics::new(
            config.n,
            config.marked,
            config.lambda,
            config.gamma_policy,
            config.space,
        )?;
        let psi = dynamics.initial()?;
        Ok(Self { dynamics, psi, t: 0.0, steps_taken: 0 })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> WalkState {
        WalkState::from_amplitudes(self.dynamics.space, self.psi.clone())
    }

    pub fn success(&self) -> f64 {
        match self.dynamics.space {
            Space::Subspace => self.psi[0].norm_sqr(),
            Space::Full => self.psi[self.dynamics.marked].norm_sqr(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Jumping rate at the current state.
    pub fn gamma(&self) -> f64 {
        self.dynamics.gamma(&self.psi)
    }

    /// Advances by `dt` (to absolute time `t_next`, which avoids accumulating
    /// rounding in the clock).
    pub fn advance_to(&mut self, t_next: f64) -> Result<()> {
        let dt = t_next - self.t;
        let dynamics = &self.dynamics;
        // the jumping rate is re-evaluated at every stage state
        let next = rk4_step(&self.psi, self.t, dt, self.steps_taken + 1, |_, y| dynamics.rhs(y))?;
        self.psi = next;
        self.t = t_next;
        self.steps_taken += 1;
        let drift = (self.norm_sqr() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(SearchError::IntegrationDiverged { t: self.t, drift });
        }
        Ok(())
    }
}

/// Number of RK4 steps covering `[0, t_max]`; the last one may be shorter.
pub fn step_count(t_max: f64, dt: f64) -> usize {
    if t_max <= 0.0 {
        0
    } else {
        ((t_max / dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Time of the `k`-th step boundary.
pub fn step_time(k: usize, steps: usize, t_max: f64, dt: f64) -> f64 {
    if k >= steps {
        t_max
    } else {
        k as f64 * dt
    }
}

/// Sample times produced by [`evolve`] for the same settings.
pub fn time_grid(t_max: f64, dt: f64, sample_every: usize) -> Vec<f64> {
    let steps = step_count(t_max, dt);
    (0..=steps)
        .filter(|&k| k % sample_every == 0 || k == steps)
        .map(|k| step_time(k, steps, t_max, dt))
        .collect()
}

/// Sampled history of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SearchConfig,
    pub times: Vec<f64>,
    pub states: Vec<WalkState>,
    /// `|<a|psi>|^2`
    pub success: Vec<f64>,
    /// `sum_i |psi_i|^2`
    pub norm: Vec<f64>,
    /// Jumping rate in effect at each sample.
    pub gamma: Vec<f64>,
    pub observables: Vec<(Observable, Vec<f64>)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(o, _)| o.name() == name)
            .map(|(_, v)| v.as_slice())
    }

    /// `max_k | |psi(t_k)|^2 - 1 |`
    pub fn max_norm_drift(&self) -> f64 {
        self.norm.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)
    }

    fn push(&mut self, t: f64, propagator: &Propagator, monitors: &[Observable]) -> Result<()> {
        let state = propagator.state();
        let gamma = propagator.gamma();
        for (observable, values) in self.observables.iter_mut() {
            debug_assert!(monitors.contains(observable));
            values.push(conservation::evaluate(*observable, &state, &self.config, gamma)?);
        }
        self.times.push(t);
        self.success.push(propagator.success());
        self.norm.push(propagator.norm_sqr());
        self.gamma.push(gamma);
        self.states.push(state);
        Ok(())
    }
}

/// Integrates from the uniform superposition up to `config.t_max`, recording
/// every `sample_every`-th step plus both endpoints.
pub fn evolve(config: &SearchConfig, monitors: &[Observable]) -> Result<Trajectory> {
    let mut propagator = Propagator::new(config)?;
    let steps = step_count(config.t_max, config.dt);
    let samples = steps / config.sample_every + 2;
    let mut trajectory = Trajectory {
        config: config.clone(),
        times: Vec::with_capacity(samples),
        states: Vec::with_capacity(samples),
        success: Vec::with_capacity(samples),
        norm: Vec::with_capacity(samples),
        gamma: Vec::with_capacity(samples),
        observables: monitors.iter().map(|&o| (o, Vec::with_capacity(samples))).collect(),
    };
    trajectory.push(0.0, &propagator, monitors)?;
    for k in 1..=steps {
        let t = step_time(k, steps, config.t_max, config.dt);
        propagator.advance_to(t)?;
        if k % config.sample_every == 0 || k == steps {
            trajectory.push(t, &propagator, monitors)?;
        }
    }
    Ok(trajectory)
}
