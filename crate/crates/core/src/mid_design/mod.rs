//! Maximal-multiplicity (MID) designs for `y' + a0 y + a1 y(t-τ1) + a2 y(t-τ2) = 0`.
//!
//! A design places a real root `s0` of multiplicity three, the largest
//! multiplicity a degree-3 quasipolynomial admits. After the change of
//! variables `z = τ2 (s - s0)` every such design collapses onto the
//! one-parameter family `Δ̃(z) = z + b0 + b1 e^{-λz} + b2 e^{-z}` with
//! `λ = τ1/τ2`; [`hat_delta`] evaluates the rescaled family `Δ̃/λ` on all of
//! `λ ∈ [0, 1]`, including the two removable singularities.

mod axis;
mod hat;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::quasipoly::{QuasiError, Quasipolynomial};

pub use axis::{f_omega, imaginary_axis_clearance, AxisClearance, AxisVerdict};
pub use hat::{
    factorization_residual, hat_delta, hat_delta_quasipoly, symmetry_residual, HatDelta,
    BRANCH_WIDTH,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("delays must satisfy 0 < tau1 < tau2 (got tau1 = {tau1}, tau2 = {tau2})")]
    DelayOrder { tau1: f64, tau2: f64 },
    #[error("delay ratio {0} is outside (0, 1)")]
    RatioOutOfRange(f64),
    #[error("target root {0} is not finite")]
    InvalidRoot(f64),
    #[error("quasipolynomial is not of the form s + a0 + a1 e^(-s tau1) + a2 e^(-s tau2)")]
    NotTwoDelayShape,
    #[error("F is not defined at omega = 0")]
    ZeroFrequency,
    #[error("quadrature did not converge (estimate {estimate}, error {error:e})")]
    Quadrature { estimate: String, error: f64 },
    #[error("design record: {0}")]
    Record(String),
    #[error(transparent)]
    Quasi(#[from] QuasiError),
}

/// A synthesized design together with its normalized coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidDesign {
    pub tau1: f64,
    pub tau2: f64,
    pub s0: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub lambda: f64,
}

/// Coefficients `(b0, b1, b2)` of the normalized MID quasipolynomial
/// `z + b0 + b1 e^{-λz} + b2 e^{-z}` with a triple root at the origin.
pub fn normalized_mid(lambda: f64) -> Result<(f64, f64, f64), DesignError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(DesignError::RatioOutOfRange(lambda));
    }
    Ok((
        -1.0 - 1.0 / lambda,
        1.0 / (lambda * (1.0 - lambda)),
        -lambda / (1.0 - lambda),
    ))
}

/// Coefficients making `s0` a root of multiplicity exactly three.
pub fn mid_coefficients(tau1: f64, tau2: f64, s0: f64) -> Result<MidDesign, DesignError> {
    if !(tau1 > 0.0 && tau2 > tau1 && tau2.is_finite()) {
        return Err(DesignError::DelayOrder { tau1, tau2 });
    }
    if !s0.is_finite() {
        return Err(DesignError::InvalidRoot(s0));
    }
    let gap = tau2 - tau1;
    let lambda = tau1 / tau2;
    let (b0, b1, b2) = normalized_mid(lambda)?;
    Ok(MidDesign {
        tau1,
        tau2,
        s0,
        a0: -1.0 / tau1 - 1.0 / tau2 - s0,
        a1: tau2 * (s0 * tau1).exp() / (tau1 * gap),
        a2: -tau1 * (s0 * tau2).exp() / (tau2 * gap),
        b0,
        b1,
        b2,
        lambda,
    })
}

/// `z ↦ τ2 q(s0 + z/τ2)` for `q` of the two-delay shape. Roots map
/// bijectively under `s ↦ τ2 (s - s0)` with multiplicities preserved.
pub fn normalize(q: &Quasipolynomial, s0: f64, tau2: f64) -> Result<Quasipolynomial, DesignError> {
    let lead = q.term(0.0).ok_or(DesignError::NotTwoDelayShape)?;
    let delayed: Vec<_> = q.terms().iter().filter(|t| t.delay > 0.0).collect();
    if lead.coeffs.len() != 2
        || lead.coeffs[1] != 1.0
        || delayed.len() > 2
        || delayed.iter().any(|t| t.coeffs.len() != 1)
    {
        return Err(DesignError::NotTwoDelayShape);
    }
    if !(tau2 > 0.0 && tau2.is_finite()) || !s0.is_finite() {
        return Err(DesignError::DelayOrder { tau1: 0.0, tau2 });
    }
    Ok(q.affine_rescale(s0, tau2))
}

impl MidDesign {
    /// `Δ(s) = s + a0 + a1 e^{-sτ1} + a2 e^{-sτ2}`.
    pub fn characteristic(&self) -> Quasipolynomial {
        Quasipolynomial::from_two_delay(self.a0, self.a1, self.a2, self.tau1, self.tau2)
            .expect("validated delays")
    }

    /// `Δ̃(z) = z + b0 + b1 e^{-λz} + b2 e^{-z}`.
    pub fn normalized(&self) -> Quasipolynomial {
        normalized_quasipoly(self.lambda).expect("validated ratio")
    }

    /// Maps a root of `Δ` to the corresponding root of `Δ̃`.
    pub fn to_normalized(&self, s: num_complex::Complex64) -> num_complex::Complex64 {
        (s - self.s0) * self.tau2
    }

    fn fields(&self) -> [(&'static str, f64); 10] {
        [
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("s0", self.s0),
            ("a0", self.a0),
            ("a1", self.a1),
            ("a2", self.a2),
            ("b0", self.b0),
            ("b1", self.b1),
            ("b2", self.b2),
            ("lambda", self.lambda),
        ]
    }
}

/// `Δ̃` of the MID family for a given delay ratio.
pub fn normalized_quasipoly(lambda: f64) -> Result<Quasipolynomial, DesignError> {
    let (b0, b1, b2) = normalized_mid(lambda)?;
    Ok(Quasipolynomial::new([
        (0.0, vec![b0, 1.0]),
        (lambda, vec![b1]),
        (1.0, vec![b2]),
    ])?)
}

impl fmt::Display for MidDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.fields() {
            writeln!(f, "{k}={v:.16e}")?;
        }
        Ok(())
    }
}

impl FromStr for MidDesign {
    type Err = DesignError;

    /// Reads a `key=value` block. `tau1`, `tau2` and `s0` are required; the
    /// remaining keys are recomputed and, when present, must agree with the
    /// recomputed values to 1e-9 relative.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut map = BTreeMap::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| DesignError::Record(format!("expected key=value, got {line:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| DesignError::Record(format!("{k}: {e}")))?;
            map.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| {
            map.get(k)
                .copied()
                .ok_or_else(|| DesignError::Record(format!("missing key {k}")))
        };
        let design = mid_coefficients(get("tau1")?, get("tau2")?, get("s0")?)?;
        for (k, want) in design.fields() {
            if let Some(&got) = map.get(k) {
                if (got - want).abs() > 1e-9 * want.abs().max(1.0) {
                    return Err(DesignError::Record(format!(
                        "{k}={got} disagrees with recomputed {want}"
                    )));
                }
            }
        }
        Ok(design)
    }
}
