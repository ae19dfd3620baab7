//! Right-half-plane zero count for retarded quasipolynomials
//! `q(s) = s + b0 + Σⱼ bⱼ e^{-τⱼ s}` from sign data on the imaginary axis.
//!
//! With `R(y) = -Re[i q(iy)] = y - Σ bⱼ sin(τⱼ y)` and
//! `S(y) = -Im[i q(iy)] = -b0 - Σ bⱼ cos(τⱼ y)`, `ρ₁ < … < ρ_r` the positive
//! zeros of `R` and `m` the multiplicity of a root at the origin,
//!
//! ```text
//! Z = (1 - m)/2 + ((-1)^r / 2) sign S^{(m)}(0) + Σⱼ (-1)^{r-j} sign S(ρⱼ)
//! ```
//!
//! provided `q` has no other roots on the imaginary axis. For `m = 3` and
//! `r = 1` this is `Z = -1 + (-1/2) sign S'''(0) + sign S(ρ₁)`.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::quasipoly::Quasipolynomial;

const BISECT_TOL: f64 = 1e-12;
const TANGENCY_TOL: f64 = 1e-10;
const AXIS_STEP: f64 = 1e-3;
const AXIS_EXCLUSION: f64 = 1e-4;
const AXIS_TOL: f64 = 1e-8;
const ORIGIN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RhpError {
    #[error("expected s + b0 + Σ bⱼ e^(-τⱼ s) with constant bⱼ and τⱼ > 0")]
    NotRetardedShape,
    #[error("R touches zero without changing sign near y = {y} (|R| = {value:e})")]
    SuspectTangency { y: f64, value: f64 },
    #[error("root on the imaginary axis at y = {y}; the count formula does not apply")]
    AxisRootDetected { y: f64 },
    #[error("sign data give the non-integral or negative count {twice_z}/2")]
    Inconsistent { twice_z: i64 },
}

/// `R` and `S` of a retarded quasipolynomial of the form above.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisFunctions {
    b0: f64,
    /// `(τⱼ, bⱼ)` with `τⱼ > 0`.
    delayed: Vec<(f64, f64)>,
}

impl AxisFunctions {
    pub fn r(&self, y: f64) -> f64 {
        y - self
            .delayed
            .iter()
            .map(|&(t, b)| b * (t * y).sin())
            .sum::<f64>()
    }

    pub fn s(&self, y: f64) -> f64 {
        -self.b0
            - self
                .delayed
                .iter()
                .map(|&(t, b)| b * (t * y).cos())
                .sum::<f64>()
    }

    /// `|b0| + Σ |bⱼ|`; `R(y) > 0` beyond it.
    pub fn zero_bound(&self) -> f64 {
        self.b0.abs() + self.delayed_mass()
    }

    fn delayed_mass(&self) -> f64 {
        self.delayed.iter().map(|&(_, b)| b.abs()).sum()
    }

    /// Scale of the summands of `S`, used to decide when a sign is zero.
    fn s_scale(&self) -> f64 {
        self.zero_bound()
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn delayed(&self) -> &[(f64, f64)] {
        &self.delayed
    }
}

/// Splits `q` into `R` and `S`; the delay-free part must be `c(s + b0)` with
/// `c ≠ 0` (it is divided out) and every delayed term a constant.
pub fn r_s_functions(q: &Quasipolynomial) -> Result<AxisFunctions, RhpError> {
    let lead = q.term(0.0).ok_or(RhpError::NotRetardedShape)?;
    if lead.coeffs.len() != 2 {
        return Err(RhpError::NotRetardedShape);
    }
    let c = lead.coeffs[1];
    let mut delayed = Vec::new();
    for t in q.terms().iter().filter(|t| t.delay > 0.0) {
        if t.coeffs.len() != 1 {
            return Err(RhpError::NotRetardedShape);
        }
        delayed.push((t.delay, t.coeffs[0] / c));
    }
    Ok(AxisFunctions {
        b0: lead.coeffs[0] / c,
        delayed,
    })
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of `g` on `[lo, hi]` by golden-section search.
fn golden_min(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if hi - lo <= BISECT_TOL * (1.0 + hi.abs()) {
            break;
        }
        if g1 <= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - phi * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + phi * (hi - lo);
            g2 = g(x2);
        }
    }
    if g1 <= g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}

/// Positive zeros of `R` in ascending order.
///
/// Scans `(0, B]`, `B = |b0| + Σ|bⱼ|`, at step `min(0.01, B/10⁴)`, bisects
/// sign changes to `10⁻¹²` and refuses to guess at even-order touches.
pub fn positive_zeros_of_r(q: &Quasipolynomial) -> Result<Vec<f64>, RhpError> {
    let rs = r_s_functions(q)?;
    zeros_of_r(&rs)
}

fn zeros_of_r(rs: &AxisFunctions) -> Result<Vec<f64>, RhpError> {
    let bound = rs.zero_bound();
    if bound == 0.0 {
        return Ok(Vec::new());
    }
    let step = (0.01_f64).min(bound / 1e4);
    let n = (bound / step).ceil() as usize + 1;
    let ys: Vec<f64> = (1..=n).map(|k| k as f64 * step).collect();
    let rv: Vec<f64> = ys.iter().map(|&y| rs.r(y)).collect();
    let mut zeros = Vec::new();
    for i in 0..n - 1 {
        let (a, b) = (rv[i], rv[i + 1]);
        if a == 0.0 {
            if i > 0 && (rv[i - 1] > 0.0) != (b > 0.0) {
                zeros.push(ys[i]);
            }
            continue;
        }
        if b != 0.0 && (a > 0.0) != (b > 0.0) {
            zeros.push(bisect(|y| rs.r(y), ys[i], ys[i + 1]));
        }
        // a local extremum of |R| without a sign change may hide a touch
        if i > 0 && a.abs() < rv[i - 1].abs() && a.abs() <= b.abs() {
            let same = (rv[i - 1] > 0.0) == (a > 0.0) && (a > 0.0) == (b > 0.0);
            if same {
                let (y, value) = golden_min(|y| rs.r(y).abs(), ys[i - 1], ys[i + 1]);
                if value < TANGENCY_TOL {
                    return Err(RhpError::SuspectTangency { y, value });
                }
            }
        }
    }
    Ok(zeros)
}

/// Ingredients and result of the count.
#[derive(Debug, Clone, PartialEq)]
pub struct HassardReport {
    /// Zeros with `Re s > 0`, with multiplicity; `None` unless `axis_clear`.
    pub z: Option<usize>,
    pub r: usize,
    pub rho: Vec<f64>,
    /// Multiplicity `m` of the root at the origin (0 if `q(0) ≠ 0`).
    pub origin_multiplicity: usize,
    /// `sign S'''(0)`.
    pub sign_s3_at_0: i8,
    /// `sign S^{(m)}(0)`, the term entering the count.
    pub sign_sm_at_0: i8,
    pub sign_s_at_rho: Vec<i8>,
    pub axis_clear: bool,
    /// Offending `y` when an imaginary-axis root was found.
    pub axis_root: Option<f64>,
    /// A-priori bound on `|y|` for roots `iy`.
    pub axis_bound: f64,
}

impl HassardReport {
    /// The count, or the reason it is unavailable.
    pub fn count(&self) -> Result<usize, RhpError> {
        match (self.z, self.axis_root) {
            (Some(z), _) => Ok(z),
            (None, Some(y)) => Err(RhpError::AxisRootDetected { y }),
            (None, None) => Err(RhpError::AxisRootDetected { y: f64::NAN }),
        }
    }
}

fn sign(x: f64, scale: f64) -> i8 {
    if x.abs() <= 1e-12 * (1.0 + scale) {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// `S^{(k)}(0) = -Re[i^k q^{(k)}(0)]`.
fn s_derivative_at_0(q: &Quasipolynomial, k: usize) -> (f64, f64) {
    let zero = Complex64::new(0.0, 0.0);
    let dk = q.derivative(k);
    let ik = Complex64::i().powu(k as u32);
    (-(ik * dk.eval(zero)).re, dk.magnitude(zero))
}

fn origin_multiplicity(q: &Quasipolynomial) -> usize {
    let zero = Complex64::new(0.0, 0.0);
    let mut k = 0;
    loop {
        let dk = q.derivative(k);
        if dk.is_zero() || dk.eval(zero).norm() > ORIGIN_TOL * (1.0 + dk.magnitude(zero)) {
            return k;
        }
        k += 1;
    }
}

/// Searches `0 < y ≤ Y` for roots `iy`, where `Y² = (Σ|bⱼ|)² - b0²` comes
/// from `|iy + b0| = |Σ bⱼ e^{-iτⱼy}|`. Interior local minima of `|q(iy)|`
/// on a `10⁻³` grid starting at `10⁻⁴` are refined by golden section.
fn axis_root(q: &Quasipolynomial, rs: &AxisFunctions) -> (f64, Option<f64>) {
    let mass = rs.delayed_mass();
    let y_max = (mass * mass - rs.b0 * rs.b0).max(0.0).sqrt();
    if y_max <= AXIS_EXCLUSION {
        return (y_max, None);
    }
    let g = |y: f64| q.eval(Complex64::new(0.0, y)).norm();
    let n = ((y_max - AXIS_EXCLUSION) / AXIS_STEP).ceil() as usize + 2;
    let ys: Vec<f64> = (0..=n)
        .map(|k| AXIS_EXCLUSION + k as f64 * AXIS_STEP)
        .collect();
    let gv: Vec<f64> = ys.iter().map(|&y| g(y)).collect();
    for i in 1..n {
        if gv[i] <= gv[i - 1] && gv[i] <= gv[i + 1] {
            let (y, value) = golden_min(g, ys[i - 1], ys[i + 1]);
            let scale = q.magnitude(Complex64::new(0.0, y));
            if value <= AXIS_TOL * (1.0 + scale) {
                return (y_max, Some(y));
            }
        }
    }
    (y_max, None)
}

/// Evaluates the count for `q` after checking that no nonzero
/// imaginary-axis root exists.
pub fn hassard_count(q: &Quasipolynomial) -> Result<HassardReport, RhpError> {
    let rs = r_s_functions(q)?;
    let rho = zeros_of_r(&rs)?;
    let r = rho.len();
    let m = origin_multiplicity(q);
    let (s3, s3_scale) = s_derivative_at_0(q, 3);
    let (sm, sm_scale) = s_derivative_at_0(q, m);
    let scale = rs.s_scale();
    let sign_s_at_rho: Vec<i8> = rho.iter().map(|&y| sign(rs.s(y), scale)).collect();

    let (axis_bound, mut found) = axis_root(q, &rs);
    if found.is_none() {
        // R = S = 0 at a crossing is an axis root whatever the grid saw
        found = rho
            .iter()
            .zip(&sign_s_at_rho)
            .find(|(_, &s)| s == 0)
            .map(|(&y, _)| y);
    }
    let mut report = HassardReport {
        z: None,
        r,
        rho,
        origin_multiplicity: m,
        sign_s3_at_0: sign(s3, s3_scale),
        sign_sm_at_0: sign(sm, sm_scale),
        sign_s_at_rho,
        axis_clear: found.is_none(),
        axis_root: found,
        axis_bound,
    };
    if !report.axis_clear {
        return Ok(report);
    }
    let parity = |k: usize| if k.is_multiple_of(2) { 1 } else { -1 };
    let mut twice_z = 1 - m as i64 + parity(r) * report.sign_sm_at_0 as i64;
    for (j, &s) in report.sign_s_at_rho.iter().enumerate() {
        twice_z += 2 * parity(r - (j + 1)) * s as i64;
    }
    if twice_z < 0 || twice_z % 2 != 0 {
        return Err(RhpError::Inconsistent { twice_z });
    }
    report.z = Some((twice_z / 2) as usize);
    Ok(report)
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// `key=value` lines; lists are comma separated.
impl fmt::Display for HassardReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.z {
            Some(z) => writeln!(f, "Z={z}")?,
            None => writeln!(f, "Z=undetermined")?,
        }
        writeln!(f, "r={}", self.r)?;
        let rho: Vec<String> = self.rho.iter().map(|y| format!("{y:.16e}")).collect();
        writeln!(f, "rho={}", rho.join(","))?;
        writeln!(f, "origin_multiplicity={}", self.origin_multiplicity)?;
        writeln!(f, "sign_S3_at_0={}", self.sign_s3_at_0)?;
        writeln!(f, "sign_Sm_at_0={}", self.sign_sm_at_0)?;
        writeln!(f, "sign_S_at_rho={}", join(&self.sign_s_at_rho))?;
        writeln!(f, "axis_clear={}", self.axis_clear)?;
        if let Some(y) = self.axis_root {
            writeln!(f, "axis_root={y:.16e}")?;
        }
        writeln!(f, "axis_bound={:.16e}", self.axis_bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mid_design::normalized_quasipoly;
    use std::f64::consts::PI;

    fn qp(b0: f64, delayed: &[(f64, f64)]) -> Quasipolynomial {
        let mut terms = vec![(0.0, vec![b0, 1.0])];
        terms.extend(delayed.iter().map(|&(t, b)| (t, vec![b])));
        Quasipolynomial::new(terms).unwrap()
    }

    #[test]
    fn r_and_s_at_half_ratio() {
        let rs = r_s_functions(&normalized_quasipoly(0.5).unwrap()).unwrap();
        assert!((rs.r(PI) - (PI - 4.0)).abs() < 1e-14);
        assert!((rs.r(2.0 * PI) - 2.0 * PI).abs() < 1e-14);
        assert!((rs.s(PI) - 2.0).abs() < 1e-14);
        for y in [0.3_f64, 1.7, 5.5] {
            let want = y - 4.0 * (0.5 * y).sin() + y.sin();
            assert!((rs.r(y) - want).abs() < 1e-14);
            let want = 3.0 - 4.0 * (0.5 * y).cos() + y.cos();
            assert!((rs.s(y) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_is_checked() {
        let neutral = Quasipolynomial::new([(0.0, vec![0.0, 1.0]), (1.0, vec![0.0, 1.0])]).unwrap();
        assert_eq!(r_s_functions(&neutral), Err(RhpError::NotRetardedShape));
        let poly = Quasipolynomial::polynomial(vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r_s_functions(&poly), Err(RhpError::NotRetardedShape));
        // a non-monic leading coefficient is divided out
        let scaled = Quasipolynomial::new([(0.0, vec![2.0, 2.0]), (1.0, vec![4.0])]).unwrap();
        let rs = r_s_functions(&scaled).unwrap();
        assert_eq!((rs.b0(), rs.delayed()), (1.0, &[(1.0, 2.0)][..]));
    }

    #[test]
    fn zeros_of_r_examples() {
        let rho = positive_zeros_of_r(&normalized_quasipoly(0.5).unwrap()).unwrap();
        assert_eq!(rho.len(), 1);
        assert!(rho[0] > PI && rho[0] < 2.0 * PI);
        // independent bisection on the closed form
        let r = |y: f64| y - 4.0 * (0.5 * y).sin() + y.sin();
        let (mut lo, mut hi) = (PI, 2.0 * PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if r(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((rho[0] - lo).abs() < 1e-11);
        assert!(positive_zeros_of_r(&qp(5.0, &[])).unwrap().is_empty());
    }

    #[test]
    fn tangency_is_reported() {
        // R(y) = y - b sin y touches zero where b cos y = 1 and y = b sin y
        let y0: f64 = 7.725_251_836_937_707;
        let b = y0 / y0.sin();
        assert!((b * y0.cos() - 1.0).abs() < 1e-12);
        match positive_zeros_of_r(&qp(0.0, &[(1.0, b)])) {
            Err(RhpError::SuspectTangency { y, .. }) => assert!((y - y0).abs() < 1e-4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn half_ratio_design_is_stable() {
        let rep = hassard_count(&normalized_quasipoly(0.5).unwrap()).unwrap();
        assert_eq!(rep.z, Some(0));
        assert_eq!(rep.r, 1);
        assert_eq!(rep.sign_s3_at_0, 0);
        assert_eq!(rep.sign_s_at_rho, vec![1]);
        assert_eq!(rep.origin_multiplicity, 3);
        assert!(rep.axis_clear);
        assert!((rep.axis_bound - 4.0).abs() < 1e-12);
        let (s3, _) = s_derivative_at_0(&normalized_quasipoly(0.5).unwrap(), 3);
        assert!(s3.abs() <= 1e-12);
    }

    #[test]
    fn simple_examples() {
        let unstable = qp(0.0, &[(1.0, -1.0)]);
        let rep = hassard_count(&unstable).unwrap();
        assert_eq!((rep.z, rep.r, rep.origin_multiplicity), (Some(1), 0, 0));
        let stable = qp(2.0, &[(1.0, 1.0)]);
        assert_eq!(hassard_count(&stable).unwrap().z, Some(0));
    }

    #[test]
    fn axis_root_withholds_the_count() {
        // s + (π/2) e^{-s} vanishes at s = iπ/2
        let q = qp(0.0, &[(1.0, 0.5 * PI)]);
        let rep = hassard_count(&q).unwrap();
        assert!(!rep.axis_clear);
        assert_eq!(rep.z, None);
        assert!((rep.axis_root.unwrap() - 0.5 * PI).abs() < 1e-6);
        assert!(matches!(
            rep.count(),
            Err(RhpError::AxisRootDetected { .. })
        ));
    }

    #[test]
    fn key_value_layout() {
        let rep = hassard_count(&normalized_quasipoly(0.5).unwrap()).unwrap();
        let text = rep.to_string();
        assert!(text.starts_with("Z=0\nr=1\nrho=4.27836434754"));
        assert!(text.contains("sign_S3_at_0=0\n"));
        assert!(text.contains("sign_S_at_rho=1\n"));
        assert!(text.contains("axis_clear=true\n"));
    }
}
