//! Time-domain integration of `y'(t) + a0 y(t) + a1 y(t-τ1) + a2 y(t-τ2) = 0`
//! and estimation of the exponential rate of the result.
//!
//! The scheme is classical RK4 on a grid whose step divides `τ2`. Delayed
//! values at grid points are read directly; at half steps (and at every
//! stage when `τ1` is not a grid multiple) they come from 4-point cubic
//! Lagrange interpolation of the stored samples. Interpolation stencils are
//! kept inside one smooth piece of the solution, i.e. they never straddle
//! `0`, `τ1` or `τ2`, where low-order derivatives jump.

use std::fmt::Write as _;

use thiserror::Error;

use crate::mid_design::MidDesign;

const OVERFLOW: f64 = 1e300;
const GRID_SNAP: f64 = 1e-9;
const MIN_DELAY_STEPS: f64 = 4.0;
// Knots closer than this (in steps) to a grid point are not stored.
const KNOT_GAP: f64 = 0.1;
const MIN_FIT_SAMPLES: usize = 100;
// Samples per half-oscillation below which peaks cannot be located.
const MIN_HALF_PERIOD: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("delays must satisfy 0 < tau1 < tau2 (got {tau1}, {tau2})")]
    InvalidDelays { tau1: f64, tau2: f64 },
    #[error("t_end must be positive and finite (got {0})")]
    InvalidHorizon(f64),
    #[error("dt must be positive and finite (got {0})")]
    InvalidStep(f64),
    #[error("coefficients must be finite")]
    InvalidCoefficient,
    #[error("|y| exceeded 1e300 at t = {t}")]
    Overflow { t: f64 },
    #[error("window fraction must lie in (0, 1] (got {0})")]
    InvalidWindow(f64),
    #[error("not enough usable signal for a rate fit: {0}")]
    InsufficientSignal(String),
}

/// Coefficients and delays of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equation {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl Equation {
    pub fn new(a0: f64, a1: f64, a2: f64, tau1: f64, tau2: f64) -> Result<Self, SimError> {
        if !(tau1 > 0.0 && tau2 > tau1 && tau2.is_finite()) {
            return Err(SimError::InvalidDelays { tau1, tau2 });
        }
        if ![a0, a1, a2].iter().all(|a| a.is_finite()) {
            return Err(SimError::InvalidCoefficient);
        }
        Ok(Self {
            a0,
            a1,
            a2,
            tau1,
            tau2,
        })
    }
}

impl From<&MidDesign> for Equation {
    fn from(d: &MidDesign) -> Self {
        Self {
            a0: d.a0,
            a1: d.a1,
            a2: d.a2,
            tau1: d.tau1,
            tau2: d.tau2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub equation: Equation,
    /// Step actually used, `τ2/N`.
    pub dt: f64,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

impl SimTrace {
    /// Header `t,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,y\n");
        for (t, y) in self.t.iter().zip(&self.y) {
            let _ = writeln!(out, "{t:.16e},{y:.16e}");
        }
        out
    }
}

/// Step `τ2/N`. `N` is the smallest integer giving a step no larger than
/// `dt` and at least four steps across `τ1` and `τ2 - τ1`, moved up (by at
/// most a factor 2) to the first value that also puts `τ1` on the grid.
pub fn snapped_step(tau1: f64, tau2: f64, dt: f64) -> f64 {
    let n_min = (tau2 / dt - GRID_SNAP)
        .ceil()
        .max((MIN_DELAY_STEPS * tau2 / tau1).ceil())
        .max((MIN_DELAY_STEPS * tau2 / (tau2 - tau1)).ceil())
        .max(1.0) as u64;
    let ratio = tau1 / tau2;
    let n = (n_min..=2 * n_min)
        .find(|&n| {
            let k = ratio * n as f64;
            (k - k.round()).abs() < GRID_SNAP * k.max(1.0)
        })
        .unwrap_or(n_min);
    tau2 / n as f64
}

struct Past<'a, H> {
    history: &'a H,
    /// Solution nodes: grid samples plus knots at breakpoints off the grid.
    t: Vec<f64>,
    y: Vec<f64>,
    /// Points where `y'` or `y''` may jump.
    breaks: [f64; 3],
    tol: f64,
}

impl<H: Fn(f64) -> f64> Past<'_, H> {
    fn push(&mut self, t: f64, y: f64) {
        self.t.push(t);
        self.y.push(y);
    }

    fn at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return (self.history)(s);
        }
        let i = self.t.partition_point(|&t| t <= s);
        if i > 0 && (s - self.t[i - 1]).abs() < self.tol {
            return self.y[i - 1];
        }
        if i < self.t.len() && (self.t[i] - s).abs() < self.tol {
            return self.y[i];
        }
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        for &b in &self.breaks {
            if b <= s {
                lo = lo.max(b);
            } else {
                hi = hi.min(b);
            }
        }
        let first = self.t.partition_point(|&t| t < lo - self.tol);
        let end = self
            .t
            .partition_point(|&t| t <= hi + self.tol)
            .min(self.t.len());
        let start = i
            .saturating_sub(2)
            .min(end.saturating_sub(4))
            .max(first)
            .min(self.t.len() - 4);
        lagrange(&self.t[start..start + 4], &self.y[start..start + 4], s)
    }
}

/// Interpolating polynomial through `(ts[k], ys[k])` evaluated at `s`.
fn lagrange(ts: &[f64], ys: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for (k, (&tk, &yk)) in ts.iter().zip(ys).enumerate() {
        let mut w = 1.0;
        for (j, &tj) in ts.iter().enumerate() {
            if j != k {
                w *= (s - tj) / (tk - tj);
            }
        }
        acc += w * yk;
    }
    acc
}

#[cfg(test)]
fn lagrange4(p: &[f64], u: f64) -> f64 {
    lagrange(&[0.0, 1.0, 2.0, 3.0], p, u)
}

/// Integrates from the history on `[-τ2, 0]` to at least `t_end`.
#[allow(clippy::too_many_arguments)]
pub fn simulate<H>(
    a0: f64,
    a1: f64,
    a2: f64,
    tau1: f64,
    tau2: f64,
    history: H,
    t_end: f64,
    dt: f64,
) -> Result<SimTrace, SimError>
where
    H: Fn(f64) -> f64,
{
    let eq = Equation::new(a0, a1, a2, tau1, tau2)?;
    simulate_equation(&eq, history, t_end, dt)
}

pub fn simulate_design<H>(
    design: &MidDesign,
    history: H,
    t_end: f64,
    dt: f64,
) -> Result<SimTrace, SimError>
where
    H: Fn(f64) -> f64,
{
    simulate_equation(&Equation::from(design), history, t_end, dt)
}

pub fn simulate_equation<H>(
    eq: &Equation,
    history: H,
    t_end: f64,
    dt: f64,
) -> Result<SimTrace, SimError>
where
    H: Fn(f64) -> f64,
{
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SimError::InvalidHorizon(t_end));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::InvalidStep(dt));
    }
    let eq = Equation::new(eq.a0, eq.a1, eq.a2, eq.tau1, eq.tau2)?;
    let h = snapped_step(eq.tau1, eq.tau2, dt);
    let steps = (t_end / h - GRID_SNAP).ceil() as usize;
    let (t1, t2) = (eq.tau1, eq.tau2);
    // the right-hand side has a kink at τ1, τ2 and a jump in its second
    // derivative one delay later; steps are split there
    let mut splits = [t1, t2, 2.0 * t1, t1 + t2, 2.0 * t2];
    splits.sort_by(f64::total_cmp);
    let mut past = Past {
        history: &history,
        t: Vec::with_capacity(steps + 8),
        y: Vec::with_capacity(steps + 8),
        breaks: [0.0, t1, t2],
        tol: GRID_SNAP * h,
    };
    let tol = past.tol;
    past.push(0.0, history(0.0));
    let rhs =
        |t: f64, v: f64, p: &Past<'_, H>| -eq.a0 * v - eq.a1 * p.at(t - t1) - eq.a2 * p.at(t - t2);
    let mut grid = Vec::with_capacity(steps + 1);
    grid.push(history(0.0));
    for n in 0..steps {
        let t0 = n as f64 * h;
        let t_next = (n + 1) as f64 * h;
        let mut t = t0;
        let mut v = grid[n];
        let inner = splits
            .iter()
            .copied()
            .filter(|&p| p > t0 + tol && p < t_next - tol);
        for stop in inner.chain(std::iter::once(t_next)) {
            let dh = stop - t;
            let k1 = rhs(t, v, &past);
            let k2 = rhs(t + 0.5 * dh, v + 0.5 * dh * k1, &past);
            let k3 = rhs(t + 0.5 * dh, v + 0.5 * dh * k2, &past);
            let k4 = rhs(stop, v + dh * k3, &past);
            v += dh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = stop;
            if stop < t_next && (stop - t0).min(t_next - stop) > KNOT_GAP * h {
                past.push(stop, v);
            }
        }
        if v.is_nan() || v.abs() > OVERFLOW {
            return Err(SimError::Overflow { t: t_next });
        }
        past.push(t_next, v);
        grid.push(v);
    }
    let t = (0..=steps).map(|k| k as f64 * h).collect();
    Ok(SimTrace {
        equation: eq,
        dt: h,
        t,
        y: grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Least squares on every sample of the window.
    Samples,
    /// Least squares on the extrema of `|y|` between sign changes.
    PeakEnvelope,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// Fitted `s` in `log|y| ≈ s t + p log t + c`.
    pub rate: f64,
    /// Fitted `p`; zero when the correction is disabled.
    pub log_t_power: f64,
    pub method: FitMethod,
    pub points: usize,
}

/// Least squares by modified Gram–Schmidt; `cols` are the basis columns.
fn least_squares(cols: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let k = cols.len();
    let mut q: Vec<Vec<f64>> = cols.to_vec();
    let mut r = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..i {
            let d: f64 = q[j].iter().zip(&q[i]).map(|(a, b)| a * b).sum();
            r[j][i] = d;
            let qj = q[j].clone();
            for (x, y) in q[i].iter_mut().zip(&qj) {
                *x -= d * y;
            }
        }
        let norm = q[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        r[i][i] = norm;
        q[i].iter_mut().for_each(|x| *x /= norm);
    }
    let qtb: Vec<f64> = q
        .iter()
        .map(|qi| qi.iter().zip(rhs).map(|(a, b)| a * b).sum())
        .collect();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r[i][j] * x[j]).sum();
        x[i] = (qtb[i] - s) / r[i][i];
    }
    Some(x)
}

fn fit(ts: &[f64], logs: &[f64], correction: bool) -> Option<(f64, f64)> {
    // centring keeps the columns well separated
    let tm = ts.iter().sum::<f64>() / ts.len() as f64;
    let mut cols = vec![vec![1.0; ts.len()], ts.iter().map(|t| t - tm).collect()];
    if correction {
        let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let lm = lt.iter().sum::<f64>() / lt.len() as f64;
        cols.push(lt.iter().map(|l| l - lm).collect());
    }
    let x = least_squares(&cols, logs)?;
    Some((x[1], if correction { x[2] } else { 0.0 }))
}

/// Rate with the `log t` correction enabled.
pub fn estimate_decay_rate(
    trace: &SimTrace,
    window_fraction: f64,
) -> Result<RateEstimate, SimError> {
    estimate_decay_rate_with(trace, window_fraction, true)
}

/// Fits `log|y| = s t + p log t + c` (or `s t + c` without correction)
/// over the trailing `window_fraction` of the trace.
///
/// If `y` changes sign inside the window, only the extrema of `|y|`
/// between consecutive sign changes are fitted.
pub fn estimate_decay_rate_with(
    trace: &SimTrace,
    window_fraction: f64,
    correction: bool,
) -> Result<RateEstimate, SimError> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(SimError::InvalidWindow(window_fraction));
    }
    let n = trace.t.len();
    let first = n - ((n as f64 * window_fraction).round() as usize).min(n);
    let window: Vec<(f64, f64)> = (first..n)
        .map(|i| (trace.t[i], trace.y[i]))
        .filter(|&(t, _)| t > 0.0)
        .collect();
    let usable = window
        .iter()
        .filter(|p| p.1.abs() > f64::MIN_POSITIVE)
        .count();
    if usable < MIN_FIT_SAMPLES {
        return Err(SimError::InsufficientSignal(format!(
            "{usable} nonzero samples in the window, need {MIN_FIT_SAMPLES}"
        )));
    }
    let changes: Vec<usize> = (1..window.len())
        .filter(|&i| (window[i - 1].1 > 0.0) != (window[i].1 > 0.0))
        .collect();
    let (points, method) = if changes.is_empty() {
        (
            window
                .iter()
                .filter(|p| p.1.abs() > f64::MIN_POSITIVE)
                .copied()
                .collect::<Vec<_>>(),
            FitMethod::Samples,
        )
    } else {
        let gaps = changes.windows(2).map(|w| w[1] - w[0]);
        if gaps.clone().any(|g| g < MIN_HALF_PERIOD) {
            return Err(SimError::InsufficientSignal(
                "sign changes too dense to extract an envelope".into(),
            ));
        }
        let peaks: Vec<(f64, f64)> = changes
            .windows(2)
            .filter_map(|w| {
                window[w[0]..w[1]]
                    .iter()
                    .copied()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            })
            .collect();
        let need = if correction { 4 } else { 3 };
        if peaks.len() < need {
            return Err(SimError::InsufficientSignal(format!(
                "{} envelope peaks, need {need}",
                peaks.len()
            )));
        }
        (peaks, FitMethod::PeakEnvelope)
    };
    let ts: Vec<f64> = points.iter().map(|p| p.0).collect();
    let logs: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let (rate, log_t_power) = fit(&ts, &logs, correction)
        .ok_or_else(|| SimError::InsufficientSignal("degenerate fit".into()))?;
    Ok(RateEstimate {
        rate,
        log_t_power,
        method,
        points: points.len(),
    })
}
