//! Evaluation of `Δ̂(z, λ) = Δ̃(z)/λ` uniformly in `λ`.
//!
//! The defining expression
//!
//! ```text
//! Δ̂(z, λ) = z/λ - 1/λ - 1/λ² + e^{-λz} / (λ²(1-λ)) - e^{-z} / (1-λ)
//! ```
//!
//! loses about `|log10 λ²|` digits as `λ → 0` and as `λ → 1`. Two exact
//! rearrangements avoid the cancellation:
//!
//! * near `λ = 0`: `Δ̂ = (z² φ₂(λz) - z + 1 - e^{-z}) / (1-λ)`,
//!   with `φ₂(w) = (e^{-w} - 1 + w)/w²`;
//! * near `λ = 1`, writing `β = 1-λ`:
//!   `Δ̂ = z/λ - 1/λ - 1/λ² + e^{-z} (z φ₁(βz) + 2 - β) / λ²`,
//!   with `φ₁(u) = (e^u - 1)/u`.
//!
//! Both are identities, not truncations, so the branches agree to rounding
//! at the switch points.

use num_complex::Complex64;

use super::DesignError;
use crate::quad;
use crate::quasipoly::Quasipolynomial;

/// Below this distance from 0 or 1 the rearranged forms are used.
pub const BRANCH_WIDTH: f64 = 0.01;

const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 30;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `e^u - 1` without cancellation for small `|u|`.
fn expm1(u: Complex64) -> Complex64 {
    let half = (0.5 * u.im).sin();
    Complex64::new(
        u.re.exp_m1() * u.im.cos() - 2.0 * half * half,
        u.re.exp() * u.im.sin(),
    )
}

/// `φ₁(u) = (e^u - 1)/u`.
fn phi1(u: Complex64) -> Complex64 {
    if u.norm() < 1e-300 {
        c(1.0)
    } else {
        expm1(u) / u
    }
}

/// `φ₁'(u) = Σ_{n≥1} n uⁿ⁻¹/(n+1)!`.
fn phi1_prime(u: Complex64) -> Complex64 {
    if u.norm() < SERIES_RADIUS {
        let mut sum = c(0.0);
        let mut pow = c(1.0);
        let mut fact = 2.0;
        for n in 1..SERIES_TERMS {
            sum += pow * (n as f64 / fact);
            pow *= u;
            fact *= (n + 2) as f64;
        }
        sum
    } else {
        (u.exp() - phi1(u)) / u
    }
}

/// `φ₂(w) = (e^{-w} - 1 + w)/w² = Σ (-w)ⁿ/(n+2)!`.
fn phi2(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        let mut sum = c(0.0);
        let mut pow = c(1.0);
        let mut fact = 2.0;
        for n in 0..SERIES_TERMS {
            sum += pow / fact;
            pow *= -w;
            fact *= (n + 3) as f64;
        }
        sum
    } else {
        (expm1(-w) + w) / (w * w)
    }
}

/// `φ₂'(w)`.
fn phi2_prime(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        let mut sum = c(0.0);
        let mut pow = c(1.0);
        let mut fact = 6.0;
        for n in 1..SERIES_TERMS {
            // (-1)^n n w^{n-1} / (n+2)!
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += pow * (sign * n as f64 / fact);
            pow *= w;
            fact *= (n + 3) as f64;
        }
        sum
    } else {
        -expm1(-w) / (w * w) - phi2(w) * 2.0 / w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    NearZero,
    Direct,
    NearOne,
}

/// `Δ̂(·, λ)` for a fixed `λ >= 0`, with the partial derivatives needed by
/// root refinement and continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatDelta {
    lambda: f64,
    branch: Branch,
}

impl HatDelta {
    pub fn new(lambda: f64) -> Self {
        let branch = if lambda < BRANCH_WIDTH {
            Branch::NearZero
        } else if (1.0 - lambda).abs() < BRANCH_WIDTH {
            Branch::NearOne
        } else {
            Branch::Direct
        };
        Self { lambda, branch }
    }

    /// Forces the unrearranged formula; only meaningful away from 0 and 1.
    #[cfg(test)]
    pub(crate) fn direct(lambda: f64) -> Self {
        Self {
            lambda,
            branch: Branch::Direct,
        }
    }

    #[cfg(test)]
    pub(crate) fn near_zero(lambda: f64) -> Self {
        Self {
            lambda,
            branch: Branch::NearZero,
        }
    }

    #[cfg(test)]
    pub(crate) fn near_one(lambda: f64) -> Self {
        Self {
            lambda,
            branch: Branch::NearOne,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn value(&self, z: Complex64) -> Complex64 {
        let l = self.lambda;
        match self.branch {
            Branch::NearZero => (z * z * phi2(z * l) - z + 1.0 - (-z).exp()) / (1.0 - l),
            Branch::NearOne => {
                let b = 1.0 - l;
                let h = z * phi1(z * b) + 2.0 - b;
                (z - 1.0) / l - 1.0 / (l * l) + (-z).exp() * h / (l * l)
            }
            Branch::Direct => {
                (z - 1.0) / l - 1.0 / (l * l) + (-z * l).exp() / (l * l * (1.0 - l))
                    - (-z).exp() / (1.0 - l)
            }
        }
    }

    /// `∂Δ̂/∂z`.
    pub fn dz(&self, z: Complex64) -> Complex64 {
        let l = self.lambda;
        match self.branch {
            Branch::NearZero => (z * phi1(-z * l) - 1.0 + (-z).exp()) / (1.0 - l),
            Branch::NearOne => {
                let b = 1.0 - l;
                1.0 / l + (-z).exp() * ((z * b).exp() - z * phi1(z * b) - 2.0 + b) / (l * l)
            }
            Branch::Direct => 1.0 / l - (-z * l).exp() / (l * (1.0 - l)) + (-z).exp() / (1.0 - l),
        }
    }

    /// `∂²Δ̂/∂z² = e^{-z} z φ₁((1-λ)z)`, valid for every `λ`.
    pub fn dzz(&self, z: Complex64) -> Complex64 {
        (-z).exp() * z * phi1(z * (1.0 - self.lambda))
    }

    /// `∂³Δ̂/∂z³ = e^{-z} (e^{(1-λ)z} - z φ₁((1-λ)z))`.
    pub fn dzzz(&self, z: Complex64) -> Complex64 {
        let b = 1.0 - self.lambda;
        (-z).exp() * ((z * b).exp() - z * phi1(z * b))
    }

    /// `∂Δ̂/∂λ`.
    pub fn dlambda(&self, z: Complex64) -> Complex64 {
        let l = self.lambda;
        match self.branch {
            Branch::NearZero => (self.value(z) + z * z * z * phi2_prime(z * l)) / (1.0 - l),
            Branch::NearOne => {
                let b = 1.0 - l;
                let h = z * phi1(z * b) + 2.0 - b;
                let dh = 1.0 - z * z * phi1_prime(z * b);
                (1.0 - z) / (l * l)
                    + 2.0 / (l * l * l)
                    + (-z).exp() * (dh / (l * l) - h * 2.0 / (l * l * l))
            }
            Branch::Direct => {
                let e1 = (-z * l).exp();
                let m = 1.0 - l;
                (1.0 - z) / (l * l) + 2.0 / (l * l * l) - z * e1 / (l * l * m)
                    + e1 * (3.0 * l - 2.0) / (l * l * l * m * m)
                    - (-z).exp() / (m * m)
            }
        }
    }

    /// Sum of the moduli of the summands actually combined by
    /// [`HatDelta::value`]; the scale of its rounding error.
    pub fn magnitude(&self, z: Complex64) -> f64 {
        let l = self.lambda;
        let ez = (-z.re).exp();
        match self.branch {
            Branch::NearZero => {
                let w = z * l;
                let m2 = if w.norm() < SERIES_RADIUS {
                    phi2(w).norm()
                } else {
                    ((-w.re).exp() + 1.0 + w.norm()) / w.norm_sqr()
                };
                (z.norm_sqr() * m2 + z.norm() + 1.0 + ez) / (1.0 - l).abs()
            }
            Branch::NearOne => {
                let b = 1.0 - l;
                let h = z.norm() * phi1(z * b).norm() + 2.0 + b.abs();
                (z.norm() + 1.0) / l + 1.0 / (l * l) + ez * h / (l * l)
            }
            Branch::Direct => {
                (z.norm() + 1.0) / l
                    + 1.0 / (l * l)
                    + (-z.re * l).exp() / (l * l * (1.0 - l).abs())
                    + ez / (1.0 - l).abs()
            }
        }
    }
}

/// `Δ̂(z, λ)` for `λ >= 0`; equals `z²/2 - z + 1 - e^{-z}` at `λ = 0` and
/// `z - 2 + (z+2) e^{-z}` at `λ = 1`.
pub fn hat_delta(z: Complex64, lambda: f64) -> Complex64 {
    HatDelta::new(lambda).value(z)
}

/// `Δ̂(·, λ)` as an explicit quasipolynomial, using the limiting forms at
/// `λ ∈ {0, 1}`.
pub fn hat_delta_quasipoly(lambda: f64) -> Result<Quasipolynomial, DesignError> {
    let l = lambda;
    if !(l >= 0.0 && l.is_finite()) {
        return Err(DesignError::RatioOutOfRange(l));
    }
    let q = if l == 0.0 {
        Quasipolynomial::new([(0.0, vec![1.0, -1.0, 0.5]), (1.0, vec![-1.0])])?
    } else if l == 1.0 {
        Quasipolynomial::new([(0.0, vec![-2.0, 1.0]), (1.0, vec![2.0, 1.0])])?
    } else {
        Quasipolynomial::new([
            (0.0, vec![-1.0 / l - 1.0 / (l * l), 1.0 / l]),
            (l, vec![1.0 / (l * l * (1.0 - l))]),
            (1.0, vec![-1.0 / (1.0 - l)]),
        ])?
    };
    Ok(q)
}

/// `|λ³Δ̂(z,λ) - Δ̂(λz, 1/λ)| / (1 + |λ³Δ̂(z,λ)|)`.
pub fn symmetry_residual(z: Complex64, lambda: f64) -> f64 {
    let lhs = hat_delta(z, lambda) * lambda.powi(3);
    let rhs = hat_delta(z * lambda, 1.0 / lambda);
    (lhs - rhs).norm() / (1.0 + lhs.norm())
}

/// Checks `Δ̂(z,0) = z² (1/2 - ∫₀¹∫₀ᵗ e^{-zξ} dξ dt)` with the double
/// integral computed by nested adaptive quadrature.
///
/// The difference is divided by `max(1, |e^{-z}|)`: for `Re z < 0` both sides
/// are of that size and absolute agreement beyond `ε·|e^{-z}|` is not
/// representable.
pub fn factorization_residual(z: Complex64) -> Result<f64, DesignError> {
    let fail = |e: quad::QuadFailure| DesignError::Quadrature {
        estimate: e.estimate.to_string(),
        error: e.error,
    };
    let inner = |t: f64| -> Result<Complex64, DesignError> {
        if t == 0.0 {
            return Ok(c(0.0));
        }
        quad::integrate(&|xi: f64| (-z * xi).exp(), 0.0, t, 1e-300, 1e-15, 400).map_err(fail)
    };
    // The outer integrand cannot return errors through the quadrature, so
    // failures are collected on the side.
    let failure = std::cell::RefCell::new(None);
    let outer = |t: f64| match inner(t) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            c(0.0)
        }
    };
    let double = quad::integrate(&outer, 0.0, 1.0, 1e-300, 1e-14, 400).map_err(fail)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let closed = hat_delta(z, 0.0);
    let factored = z * z * (0.5 - double);
    Ok((closed - factored).norm() / (-z.re).exp().max(1.0))
}
