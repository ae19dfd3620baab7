//! Scalar quasipolynomials `Σ Pⱼ(s) e^{-s τⱼ}` with real coefficients and
//! nonnegative delays.
//!
//! A [`Quasipolynomial`] is kept in canonical form: delays are sorted and
//! pairwise distinct, every coefficient polynomial has a nonzero leading
//! coefficient and zero polynomials are dropped. Values are immutable after
//! construction, so they can be shared between worker threads freely.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuasiError {
    #[error("delay {0} is not a finite nonnegative number")]
    InvalidDelay(f64),
    #[error("coefficient {0} is not finite")]
    InvalidCoefficient(f64),
    #[error("delays must satisfy 0 < tau1 < tau2 (got tau1 = {tau1}, tau2 = {tau2})")]
    DelayOrder { tau1: f64, tau2: f64 },
    #[error("modulus bound needs a delay-free term of strictly highest degree")]
    NotRetarded,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One `P(s) e^{-s τ}` term; `coeffs` are in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub delay: f64,
    pub coeffs: Vec<f64>,
}

impl Term {
    /// Polynomial degree of the coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn poly_at(&self, s: Complex64) -> Complex64 {
        horner(&self.coeffs, s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Quasipolynomial {
    terms: Vec<Term>,
}

pub(crate) fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn trim(mut coeffs: Vec<f64>) -> Vec<f64> {
    while coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    coeffs
}

impl Quasipolynomial {
    /// Builds a quasipolynomial from `(delay, coefficients)` pairs.
    ///
    /// Terms sharing a delay are added together and zero polynomials are
    /// pruned, so the result is always in canonical form.
    pub fn new<I>(terms: I) -> Result<Self, QuasiError>
    where
        I: IntoIterator<Item = (f64, Vec<f64>)>,
    {
        let mut merged: Vec<(f64, Vec<f64>)> = Vec::new();
        for (delay, coeffs) in terms {
            if !delay.is_finite() || delay < 0.0 {
                return Err(QuasiError::InvalidDelay(delay));
            }
            if let Some(&c) = coeffs.iter().find(|c| !c.is_finite()) {
                return Err(QuasiError::InvalidCoefficient(c));
            }
            // -0.0 and 0.0 are the same delay
            let delay = if delay == 0.0 { 0.0 } else { delay };
            match merged.iter_mut().find(|(d, _)| *d == delay) {
                Some((_, acc)) => {
                    if acc.len() < coeffs.len() {
                        acc.resize(coeffs.len(), 0.0);
                    }
                    for (a, c) in acc.iter_mut().zip(&coeffs) {
                        *a += c;
                    }
                }
                None => merged.push((delay, coeffs)),
            }
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .map(|(delay, coeffs)| Term {
                delay,
                coeffs: trim(coeffs),
            })
            .filter(|t| !t.coeffs.is_empty())
            .collect();
        terms.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        Ok(Self { terms })
    }

    /// Delay-free polynomial with ascending coefficients.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self, QuasiError> {
        Self::new([(0.0, coeffs)])
    }

    /// Characteristic function `s + a0 + a1 e^{-s τ1} + a2 e^{-s τ2}` of the
    /// scalar two-delay equation.
    pub fn from_two_delay(
        a0: f64,
        a1: f64,
        a2: f64,
        tau1: f64,
        tau2: f64,
    ) -> Result<Self, QuasiError> {
        if !(tau1 > 0.0 && tau2 > tau1 && tau2.is_finite()) {
            return Err(QuasiError::DelayOrder { tau1, tau2 });
        }
        Self::new([(0.0, vec![a0, 1.0]), (tau1, vec![a1]), (tau2, vec![a2])])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term with exactly this delay, if present.
    pub fn term(&self, delay: f64) -> Option<&Term> {
        self.terms.iter().find(|t| t.delay == delay)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let p = t.poly_at(s);
                if t.delay == 0.0 {
                    p
                } else {
                    p * (-s * t.delay).exp()
                }
            })
            .sum()
    }

    /// `q'(s)` without building the derivative quasipolynomial.
    pub fn eval_derivative(&self, s: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let zero = Complex64::new(0.0, 0.0);
                let (p, dp) = t
                    .coeffs
                    .iter()
                    .rev()
                    .fold((zero, zero), |(p, dp), &c| (p * s + c, dp * s + p));
                let d = dp - p * t.delay;
                if t.delay == 0.0 {
                    d
                } else {
                    d * (-s * t.delay).exp()
                }
            })
            .sum()
    }

    /// Sum of the moduli of the individual terms at `s`; the natural scale
    /// against which rounding in [`Quasipolynomial::eval`] should be judged.
    pub fn magnitude(&self, s: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let p: f64 = t
                    .coeffs
                    .iter()
                    .rev()
                    .fold(0.0, |acc, c| acc * s.norm() + c.abs());
                p * (-s.re * t.delay).exp()
            })
            .sum()
    }

    /// k-th derivative, applying `d/ds [P e^{-sτ}] = (P' - τP) e^{-sτ}`
    /// termwise.
    pub fn derivative(&self, k: usize) -> Self {
        let mut terms = self.terms.clone();
        for _ in 0..k {
            terms = terms
                .into_iter()
                .map(|t| {
                    let n = t.coeffs.len();
                    let mut out = vec![0.0; n];
                    for (i, c) in t.coeffs.iter().enumerate() {
                        out[i] -= t.delay * c;
                        if i > 0 {
                            out[i - 1] += i as f64 * c;
                        }
                    }
                    Term {
                        delay: t.delay,
                        coeffs: trim(out),
                    }
                })
                .filter(|t| !t.coeffs.is_empty())
                .collect();
        }
        Self { terms }
    }

    /// Degree `D = M + Σ dⱼ`, with `M` the number of nonzero delays. No root
    /// can have multiplicity larger than `D`.
    pub fn degree(&self) -> usize {
        let delayed = self.terms.iter().filter(|t| t.delay > 0.0).count();
        delayed + self.terms.iter().map(Term::degree).sum::<usize>()
    }

    /// Bound `B` such that every root with `Re s >= sigma` has `|s| <= B`.
    ///
    /// The delay-free polynomial must have strictly the highest degree `d`;
    /// it is made monic first. With `Aₖ = Σⱼ |cⱼₖ| e^{-τⱼ σ}` summed over the
    /// remaining coefficients, any such root satisfies `|s|^d <= Σ Aₖ |s|^k`,
    /// so `B` is the unique positive root of `x^d - Σ Aₖ x^k`.
    pub fn root_modulus_bound(&self, sigma: f64) -> Result<f64, QuasiError> {
        let lead = self.term(0.0).ok_or(QuasiError::NotRetarded)?;
        let d = lead.degree();
        if d == 0 || self.terms.iter().any(|t| t.delay > 0.0 && t.degree() >= d) {
            return Err(QuasiError::NotRetarded);
        }
        let scale = lead.coeffs[d];
        let mut weights = vec![0.0; d];
        for t in &self.terms {
            let damp = (-t.delay * sigma).exp();
            let upto = if t.delay == 0.0 { d } else { t.coeffs.len() };
            for (k, c) in t.coeffs[..upto].iter().enumerate() {
                weights[k] += (c / scale).abs() * damp;
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Ok(0.0);
        }
        if d == 1 {
            return Ok(weights[0]);
        }
        // x^d - Σ w_k x^k is negative on (0, B) and positive beyond.
        let g = |x: f64| {
            x.powi(d as i32)
                - weights
                    .iter()
                    .enumerate()
                    .map(|(k, w)| w * x.powi(k as i32))
                    .sum::<f64>()
        };
        let mut hi = 1.0 + weights.iter().sum::<f64>();
        let mut lo = 0.0;
        while g(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(hi)
    }

    /// Returns `z ↦ scale · q(shift + z / scale)`: the affine change of
    /// variables that moves `shift` to the origin and rescales delays by
    /// `1/scale`.
    pub fn affine_rescale(&self, shift: f64, scale: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                // P(shift + z/scale): Taylor-shift to `shift`, then rescale powers.
                let mut shifted = t.coeffs.clone();
                let n = shifted.len();
                for i in 0..n {
                    for j in (i..n - 1).rev() {
                        shifted[j] += shift * shifted[j + 1];
                    }
                }
                let damp = (-shift * t.delay).exp();
                let coeffs = shifted
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * damp * scale / scale.powi(k as i32))
                    .collect();
                (t.delay / scale, coeffs)
            })
            .collect::<Vec<_>>();
        Self::new(terms).expect("rescaling preserves validity")
    }
}

impl fmt::Display for Quasipolynomial {
    /// One line per term: `delay; c0 c1 c2 ...` with 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            write!(f, "{:.16e};", t.delay)?;
            for c in &t.coeffs {
                write!(f, " {c:.16e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Quasipolynomial {
    type Err = QuasiError;

    /// Parses the `delay; c0 c1 ...` record format. Blank lines and lines
    /// starting with `#` are skipped.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| QuasiError::Parse { line: idx + 1, msg };
            let (delay, coeffs) = line
                .split_once(';')
                .ok_or_else(|| err("expected `delay; c0 c1 ...`".into()))?;
            let delay: f64 = delay
                .trim()
                .parse()
                .map_err(|e| err(format!("bad delay: {e}")))?;
            let coeffs = coeffs
                .split_whitespace()
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|e| err(format!("bad coefficient {c:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if coeffs.is_empty() {
                return Err(err("no coefficients".into()));
            }
            terms.push((delay, coeffs));
        }
        Self::new(terms)
    }
}
