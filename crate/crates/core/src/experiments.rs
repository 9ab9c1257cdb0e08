//! Peak analysis, the repulsive nonlinearity threshold, attractive runtimes,
//! and the curve grids of the published success-probability figures.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::closed_form::{critical_gamma, LinearSolution};
use crate::error::{Result, SearchError};
use crate::integrator::{evolve, gamma_repulsive, time_grid, GammaPolicy, Propagator, Trajectory};
use crate::model::SearchConfig;

/// A local maximum must rise this far above `p(0)` to count as a peak.
pub const PEAK_THRESHOLD: f64 = 1e-6;

/// Success level treated as "reaches 1".
pub const DEFAULT_TARGET: f64 = 0.999;

/// First success-probability peak of a curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakReport {
    pub t_star: f64,
    pub p_star: f64,
    /// Full width at half prominence above `p(0)`.
    pub width: f64,
}

pub fn detect_peak(trajectory: &Trajectory) -> Result<PeakReport> {
    detect_peak_in(&trajectory.times, &trajectory.success)
}

/// Finds the first local maximum above `p(0) + PEAK_THRESHOLD`, refines it
/// with a parabola through the neighbouring samples, and measures its width
/// between the linearly interpolated crossings of `p(0) + (p* - p(0)) / 2`.
pub fn detect_peak_in(times: &[f64], values: &[f64]) -> Result<PeakReport> {
    if times.len() != values.len() {
        return Err(SearchError::DimensionMismatch { expected: times.len(), found: values.len() });
    }
    if values.len() < 3 {
        return Err(SearchError::NoPeak(format!("need at least 3 samples, got {}", values.len())));
    }
    let p0 = values[0];
    let i = (1..values.len() - 1)
        .find(|&i| {
            values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > p0 + PEAK_THRESHOLD
        })
        .ok_or_else(|| SearchError::NoPeak("no local maximum above p(0)".into()))?;

    let (t_star, vertex) = parabola_vertex(
        [times[i - 1], times[i], times[i + 1]],
        [values[i - 1], values[i], values[i + 1]],
    );
    let p_star = vertex.max(values[i]).min(1.0).max(p0);

    let half = p0 + 0.5 * (p_star - p0);
    let crossing = |j: usize, k: usize| {
        let (tj, tk, pj, pk) = (times[j], times[k], values[j], values[k]);
        tj + (half - pj) * (tk - tj) / (pk - pj)
    };
    let mut left = i;
    while values[left] > half {
        // values[0] = p0 < half, so this stops at or above index 0
        left -= 1;
    }
    let mut right = i;
    while right < values.len() && values[right] > half {
        right += 1;
    }
    if right == values.len() {
        return Err(SearchError::NoPeak(
            "peak not resolved: curve ends above half prominence".into(),
        ));
    }
    let width = crossing(right - 1, right) - crossing(left, left + 1);
    Ok(PeakReport { t_star, p_star, width })
}

/// Vertex of the parabola through three points; falls back to the middle
/// point when the samples are not strictly concave.
fn parabola_vertex(t: [f64; 3], p: [f64; 3]) -> (f64, f64) {
    let (d0, d2) = (t[0] - t[1], t[2] - t[1]);
    let (q0, q2) = (p[0] - p[1], p[2] - p[1]);
    // p(s) = p1 + b s + c s^2 with s = t - t1
    let denom = d0 * d2 * (d0 - d2);
    if denom == 0.0 {
        return (t[1], p[1]);
    }
    let c = (q0 * d2 - q2 * d0) / denom;
    let b = (q2 * d0 * d0 - q0 * d2 * d2) / denom;
    if !(c < 0.0) {
        return (t[1], p[1]);
    }
    let s = (-b / (2.0 * c)).clamp(d0, d2);
    (t[1] + s, p[1] + b * s + c * s * s)
}

/// `4 / (2 + sqrt(n))`: below this, the repulsive walk at `gamma = (2-lambda)/(2n)`
/// is known to reach the marked vertex.
pub fn lambda_c(n: usize) -> f64 {
    4.0 / (2.0 + (n as f64).sqrt())
}

/// Tested bracket around the largest repulsive nonlinearity that still reaches
/// the success target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdReport {
    /// Largest tested lambda that reaches the target.
    pub lambda_low: f64,
    /// Smallest tested lambda that does not.
    pub lambda_high: f64,
    pub target: f64,
    pub horizon: f64,
    pub dt: f64,
}

/// Whether the repulsive critical walk reaches `target` within `horizon`,
/// stepping at the default `horizon / 20000` and stopping at the first hit.
pub fn repulsive_succeeds(n: usize, lambda: f64, target: f64, horizon: f64) -> Result<bool> {
    let config = SearchConfig::new(n, GammaPolicy::RepulsiveCritical, lambda).with_horizon(horizon);
    reaches_target(&config, target)
}

fn reaches_target(config: &SearchConfig, target: f64) -> Result<bool> {
    let mut propagator = Propagator::new(config)?;
    if propagator.success() >= target {
        return Ok(true);
    }
    let steps = crate::integrator::step_count(config.t_max, config.dt);
    for k in 1..=steps {
        propagator.advance_to(crate::integrator::step_time(k, steps, config.t_max, config.dt))?;
        if propagator.success() >= target {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Bisects `lambda` in `(0, 2)` at `gamma = (2 - lambda) / (2n)` until the
/// bracket is narrower than `resolution`.
///
/// The lower end starts just under `lambda_c(n)`; failing there (or at
/// `lambda_c / 2`) is reported as an inconsistency since it contradicts the
/// guaranteed region.
pub fn repulsive_threshold(
    n: usize,
    resolution: f64,
    target: f64,
    horizon: f64,
) -> Result<ThresholdReport> {
    if !(resolution > 0.0) {
        return Err(SearchError::InvalidConfig(format!("resolution must be > 0, got {resolution}")));
    }
    if !(target > 0.0 && target <= 1.0) {
        return Err(SearchError::InvalidConfig(format!("target must be in (0, 1], got {target}")));
    }
    if !(horizon > 0.0) {
        return Err(SearchError::InvalidConfig(format!("horizon must be > 0, got {horizon}")));
    }
    crate::model::check_dimension(n)?;
    let lc = lambda_c(n);
    let mut lo = lc * (1.0 - 1e-3);
    for probe in [0.5 * lc, lo] {
        if !repulsive_succeeds(n, probe, target, horizon)? {
            return Err(SearchError::Inconsistency { lambda: probe, lambda_c: lc });
        }
    }
    let mut hi = 2.0;
    if repulsive_succeeds(n, hi, target, horizon)? {
        return Err(SearchError::InvalidConfig(format!(
            "lambda = 2 (gamma = 0) reached the target {target}; nothing to bracket"
        )));
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if repulsive_succeeds(n, mid, target, horizon)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdReport {
        lambda_low: lo,
        lambda_high: hi,
        target,
        horizon,
        dt: SearchConfig::default_dt(horizon),
    })
}

/// Policy used for an attractive run; `lambda = 0` is the linear critical walk.
pub fn attractive_policy(n: usize, lambda: f64) -> GammaPolicy {
    if lambda == 0.0 {
        GammaPolicy::Fixed(critical_gamma(n))
    } else {
        GammaPolicy::AttractiveCritical
    }
}

/// One run plus peak detection per `lambda <= 0`, under `gamma_c(t)`.
pub fn attractive_runtime_table(n: usize, lambdas: &[f64]) -> Result<Vec<PeakReport>> {
    if let Some(&bad) = lambdas.iter().find(|&&l| !(l <= 0.0)) {
        return Err(SearchError::InvalidConfig(format!("attractive runs need lambda <= 0, got {bad}")));
    }
    lambdas
        .par_iter()
        .map(|&lambda| {
            let config = SearchConfig::new(n, attractive_policy(n, lambda), lambda);
            detect_peak(&evolve(&config, &[])?)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [FigureId::Fig2a, FigureId::Fig2b, FigureId::Fig3, FigureId::Fig4];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        }
    }

    /// Name of the swept parameter.
    pub fn parameter(&self) -> &'static str {
        match self {
            FigureId::Fig2a | FigureId::Fig2b => "gamma",
            FigureId::Fig3 | FigureId::Fig4 => "lambda",
        }
    }

    pub fn grid(&self) -> &'static [f64] {
        match self {
            FigureId::Fig2a => &[0.001, 0.005, 0.008, 0.009, 0.01],
            FigureId::Fig2b => &[0.011, 0.012, 0.015, 0.02, 0.03],
            FigureId::Fig3 => &[0.2, 0.6, 0.611, 0.612, 0.8],
            FigureId::Fig4 => &[0.0, -1.0, -2.0, -3.0],
        }
    }

    /// Plotted time range: `3 pi sqrt(n) / 2`, except the repulsive figure,
    /// which runs to `20 sqrt(n)` so slow curves still reach their peak.
    pub fn horizon(&self, n: usize) -> f64 {
        match self {
            FigureId::Fig3 => 20.0 * (n as f64).sqrt(),
            _ => SearchConfig::default_t_max(n),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| SearchError::UnknownFigure(s.to_string()))
    }
}

/// Samples per figure curve, including both endpoints.
pub const FIGURE_SAMPLE_EVERY: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub parameter: &'static str,
    pub value: f64,
    pub times: Vec<f64>,
    pub success: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureTable {
    pub id: FigureId,
    pub n: usize,
    pub horizon: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub curves: Vec<Curve>,
}

/// Success-probability curves for one figure, in grid order. Linear curves are
/// evaluated in closed form on the integrator's time grid; nonlinear ones are
/// integrated.
pub fn figure_curves(id: FigureId, n: usize) -> Result<FigureTable> {
    crate::model::check_dimension(n)?;
    let horizon = id.horizon(n);
    let dt = SearchConfig::default_dt(horizon);
    let curves = id
        .grid()
        .par_iter()
        .map(|&value| -> Result<Curve> {
            let (times, success) = match id {
                FigureId::Fig2a | FigureId::Fig2b => {
                    let sol = LinearSolution::new(n, value)?;
                    let times = time_grid(horizon, dt, FIGURE_SAMPLE_EVERY);
                    let success = times.iter().map(|&t| sol.success_probability(t)).collect();
                    (times, success)
                }
                FigureId::Fig3 | FigureId::Fig4 => {
                    let policy = match id {
                        FigureId::Fig3 => GammaPolicy::Fixed(gamma_repulsive(n, value)),
                        _ => attractive_policy(n, value),
                    };
                    let config = SearchConfig::new(n, policy, value)
                        .with_horizon(horizon)
                        .with_sample_every(FIGURE_SAMPLE_EVERY);
                    let traj = evolve(&config, &[])?;
                    (traj.times, traj.success)
                }
            };
            Ok(Curve { parameter: id.parameter(), value, times, success })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureTable { id, n, horizon, dt, sample_every: FIGURE_SAMPLE_EVERY, curves })
}
