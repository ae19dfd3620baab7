//! Nonzero imaginary-axis roots of `Δ̂(·, λ)`.
//!
//! If `Δ̂(iω, μ) = 0` with `ω ≠ 0` and `μ ∉ {0, 1}`, taking moduli gives the
//! necessary condition `μ = F(ω)` with
//!
//! ```text
//! F(ω) = (ω² + 2(cos ω - 1)) / ((ω - sin ω)² + (1 - cos ω)²).
//! ```
//!
//! Applied to both `(iω, λ)` and its mirror `(iλω, 1/λ)` this gives two
//! conditions that must hold simultaneously; the clearance scan searches for
//! joint solutions and confirms any candidate by evaluating `Δ̂` itself.

use num_complex::Complex64;

use super::hat::hat_delta_quasipoly;
use super::{DesignError, HatDelta};

const SERIES_CUTOFF: f64 = 1e-2;
const SCAN_STEP: f64 = 1e-3;
const MAX_WINDOW: f64 = 1e4;
const CONFIRM_TOL: f64 = 1e-8;
const SUSPECT_TOL: f64 = 1e-4;
const MIRROR_TOL: f64 = 1e-6;

/// `F(ω)`; even in `ω`, tends to `1/3` at the origin where it is undefined.
pub fn f_omega(omega: f64) -> Result<f64, DesignError> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(DesignError::ZeroFrequency);
    }
    let w = omega.abs();
    if w < SERIES_CUTOFF {
        let w2 = w * w;
        return Ok(1.0 / 3.0 + w2 / 135.0 + w2 * w2 / 6804.0 + w2 * w2 * w2 / 437_400.0);
    }
    let (s, c) = w.sin_cos();
    let num = w * w + 2.0 * (c - 1.0);
    let den = (w - s) * (w - s) + (1.0 - c) * (1.0 - c);
    Ok(num / den)
}

fn f(omega: f64) -> f64 {
    f_omega(omega).expect("scan avoids the origin")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisVerdict {
    /// No nonzero imaginary-axis root in the scanned window.
    Clear,
    /// A root `iω` was confirmed; `residual` is `|Δ̂(iω, λ)|`.
    NotClear { omega: f64, residual: f64 },
    /// A candidate satisfied both modulus conditions but `|Δ̂|` landed
    /// between the confirmation and rejection thresholds, or the scan window
    /// had to be truncated.
    Undetermined { omega: f64, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisClearance {
    pub lambda: f64,
    pub verdict: AxisVerdict,
    /// Upper end of the scanned `ω` range.
    pub window: f64,
    /// Frequencies where `λ = F(ω)` holds.
    pub candidates: Vec<f64>,
}

/// Decides whether `Δ̂(·, λ)` has an imaginary-axis root other than 0.
///
/// Scans `ω ∈ (0, B]` with `B` the modulus bound of `Δ̂(·, λ)` on the closed
/// right half-plane (capped at 10⁴; for the neutral case `λ = 1` the cap
/// itself is used), brackets sign changes of `λ - F(ω)` on a 10⁻³ grid,
/// bisects, and keeps candidates that also satisfy `1/λ = F(λω)`. A
/// candidate is confirmed when `|Δ̂(iω, λ)| < 10⁻⁸`.
pub fn imaginary_axis_clearance(lambda: f64) -> AxisClearance {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return AxisClearance {
            lambda,
            verdict: AxisVerdict::Undetermined {
                omega: f64::NAN,
                residual: f64::NAN,
            },
            window: 0.0,
            candidates: Vec::new(),
        };
    }
    let bound = hat_delta_quasipoly(lambda)
        .ok()
        .and_then(|q| q.root_modulus_bound(0.0).ok());
    let (window, truncated) = match bound {
        Some(b) if b <= MAX_WINDOW => (b, false),
        _ => (MAX_WINDOW, lambda != 1.0),
    };

    let hat = HatDelta::new(lambda);
    let gap = |w: f64| lambda - f(w);
    let mut candidates = Vec::new();
    let mut suspect: Option<(f64, f64)> = None;

    let mut check = |w: f64, candidates: &mut Vec<f64>| -> Option<AxisVerdict> {
        candidates.push(w);
        if lambda != 1.0 && (1.0 / lambda - f(lambda * w)).abs() > MIRROR_TOL {
            return None;
        }
        let z = Complex64::new(0.0, w);
        let residual = hat.value(z).norm();
        if residual < CONFIRM_TOL {
            return Some(AxisVerdict::NotClear { omega: w, residual });
        }
        if residual < SUSPECT_TOL * (1.0 + hat.magnitude(z)) && suspect.is_none() {
            suspect = Some((w, residual));
        }
        None
    };

    let n = (window / SCAN_STEP).ceil() as usize;
    let mut prev_w = SCAN_STEP;
    let mut prev_g = gap(prev_w);
    let mut prev_dg = f64::NAN;
    for k in 2..=n.max(1) {
        let w = (k as f64 * SCAN_STEP).min(window);
        let g = gap(w);
        let hit = if g == 0.0 {
            Some(w)
        } else if prev_g.signum() != g.signum() && prev_g != 0.0 {
            Some(bisect(&gap, prev_w, w))
        } else {
            // A local extremum of the gap close to zero is a tangency.
            let dg = g - prev_g;
            let turned = prev_dg.is_finite() && dg.signum() != prev_dg.signum();
            prev_dg = dg;
            (turned && prev_g.abs() < 1e-9).then_some(prev_w)
        };
        if let Some(root) = hit {
            if let Some(verdict) = check(root, &mut candidates) {
                return AxisClearance {
                    lambda,
                    verdict,
                    window,
                    candidates,
                };
            }
        }
        prev_w = w;
        prev_g = g;
    }

    let verdict = match suspect {
        Some((omega, residual)) => AxisVerdict::Undetermined { omega, residual },
        None if truncated => AxisVerdict::Undetermined {
            omega: window,
            residual: f64::NAN,
        },
        None => AxisVerdict::Clear,
    };
    AxisClearance {
        lambda,
        verdict,
        window,
        candidates,
    }
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn f_examples() {
        assert!((f_omega(2.0 * PI).unwrap() - 1.0).abs() < 1e-14);
        let want = (PI * PI - 4.0) / (PI * PI + 4.0);
        assert!((f_omega(PI).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.423_199_121_716).abs() < 1e-12);
        assert_eq!(f_omega(0.0), Err(DesignError::ZeroFrequency));
    }

    #[test]
    fn f_is_even() {
        for w in [1e-5, 3e-3, 0.5, 2.0, 7.54, 150.0] {
            assert_eq!(f_omega(w).unwrap(), f_omega(-w).unwrap());
        }
    }

    #[test]
    fn series_matches_formula_at_cutoff() {
        let w = SERIES_CUTOFF;
        let (s, c) = w.sin_cos();
        // Direct formula in a cancellation-free arrangement for the check.
        let half = (0.5 * w).sin();
        let num = (w - 2.0 * half) * (w + 2.0 * half);
        let den = (w - s).powi(2) + (1.0 - c).powi(2);
        let series = f_omega(w * 0.999_999).unwrap();
        assert!((series - num / den).abs() < 1e-9);
        assert!((f_omega(1e-6).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_after_two_pi() {
        let mut w = 2.0 * PI + 1e-3;
        while w < 100.0 {
            assert!(f_omega(w).unwrap() <= w * w / ((w - 1.0) * (w - 1.0)));
            w += 0.01;
        }
    }

    #[test]
    fn clearance_examples() {
        let half = imaginary_axis_clearance(0.5);
        assert_eq!(half.verdict, AxisVerdict::Clear);
        assert!((half.window - 8.0).abs() < 1e-12);
        assert_eq!(imaginary_axis_clearance(0.6).verdict, AxisVerdict::Clear);
        match imaginary_axis_clearance(1.0).verdict {
            AxisVerdict::NotClear { omega, residual } => {
                // first positive solution of tan(ω/2) = ω/2 beyond 2π
                assert!((omega - 8.986_818_915_818_128).abs() < 1e-9, "{omega}");
                assert!(residual < 1e-8);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn clearance_at_mirrored_ratio() {
        // λ and 1/λ share axis roots up to scaling; 2 lies beyond 3/2.
        assert_eq!(imaginary_axis_clearance(2.0).verdict, AxisVerdict::Clear);
    }

    #[test]
    fn clearance_rejects_nonpositive_ratio() {
        assert!(matches!(
            imaginary_axis_clearance(0.0).verdict,
            AxisVerdict::Undetermined { .. }
        ));
    }
}
