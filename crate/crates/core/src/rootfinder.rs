//! Zeros of analytic functions inside axis-aligned rectangles.
//!
//! Counting uses the argument principle: `(1/2πi)∮ f'/f` along the boundary,
//! integrated piecewise with Gauss–Kronrod. A piece is accepted only when its
//! integral agrees with the principal increment of `log f` between its
//! endpoints, so the winding number is the sum of exact argument increments
//! and the quadrature serves as the consistency check. Rectangles holding
//! zeros are subdivided until Newton's method from the centre lands inside,
//! or until the piece is small enough to be treated as one cluster.

use std::cell::Cell;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::mid_design::HatDelta;
use crate::quad::gk15;
use crate::quasipoly::Quasipolynomial;

pub const DEFAULT_TOL: f64 = 1e-10;
const BOUNDARY_REL: f64 = 1e-12;
const MAX_DEFECT: f64 = 0.25;
const CLUSTER_DIAMETER: f64 = 1e-3;
const CLUSTER_MAX_COUNT: usize = 3;
// Below this any remaining count is taken as one cluster.
const MIN_DIAMETER: f64 = 1e-9;
const MAX_PIECES: usize = 1 << 14;
const NEWTON_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 30;
const ROUNDING_FACTOR: f64 = 64.0;
const NOISE_MARGIN: f64 = 8.0;
const SPLIT_OFFSETS: [f64; 5] = [0.0137, -0.0219, 0.0311, -0.0423, 0.0071];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("rectangle bounds must be finite and strictly ordered")]
    InvalidRectangle,
    #[error("f vanishes on the contour near {at} (|f| = {value:e})")]
    BoundaryZero { at: Complex64, value: f64 },
    #[error("winding number could not be resolved (defect {defect})")]
    QuadratureFailure { defect: f64 },
    #[error("refinement stalled at {at} with |f| = {residual:e}")]
    NonConvergence { at: Complex64, residual: f64 },
    #[error("annulus around the root is not zero-free (inner {inner}, outer {outer})")]
    AnnulusNotClean { inner: usize, outer: usize },
    #[error("subrectangle counts do not add up to {parent}")]
    CountMismatch { parent: usize },
    #[error("cluster of {count} zeros does not match any circle winding number")]
    ClusterMismatch { count: usize },
}

/// A holomorphic function with its derivative.
pub trait Analytic: Sync {
    fn value(&self, z: Complex64) -> Complex64;

    fn derivative(&self, z: Complex64) -> Complex64;

    /// `f^{(k)}(z)` for `k >= 2` when available; used to polish multiple
    /// roots, where `f^{(m-1)}` has a simple zero.
    fn higher_derivative(&self, _z: Complex64, _k: usize) -> Option<Complex64> {
        None
    }

    /// Size of the summands combined by [`Analytic::value`]; rounding error
    /// in `f(z)` is a small multiple of `ε·scale(z)`.
    fn scale(&self, _z: Complex64) -> f64 {
        0.0
    }
}

impl<T: Analytic + ?Sized> Analytic for &T {
    fn value(&self, z: Complex64) -> Complex64 {
        (**self).value(z)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        (**self).derivative(z)
    }
    fn higher_derivative(&self, z: Complex64, k: usize) -> Option<Complex64> {
        (**self).higher_derivative(z, k)
    }
    fn scale(&self, z: Complex64) -> f64 {
        (**self).scale(z)
    }
}

impl Analytic for Quasipolynomial {
    fn value(&self, z: Complex64) -> Complex64 {
        self.eval(z)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        self.eval_derivative(z)
    }
    fn higher_derivative(&self, z: Complex64, k: usize) -> Option<Complex64> {
        Some(self.derivative(k).eval(z))
    }
    fn scale(&self, z: Complex64) -> f64 {
        self.magnitude(z)
    }
}

impl Analytic for HatDelta {
    fn value(&self, z: Complex64) -> Complex64 {
        HatDelta::value(self, z)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        self.dz(z)
    }
    fn higher_derivative(&self, z: Complex64, k: usize) -> Option<Complex64> {
        match k {
            2 => Some(self.dzz(z)),
            3 => Some(self.dzzz(z)),
            _ => None,
        }
    }
    fn scale(&self, z: Complex64) -> f64 {
        self.magnitude(z)
    }
}

/// Adapter for a pair of closures `(f, f')`.
#[derive(Debug, Clone, Copy)]
pub struct FnAnalytic<F, D> {
    f: F,
    df: D,
}

impl<F, D> FnAnalytic<F, D>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    D: Fn(Complex64) -> Complex64 + Sync,
{
    pub fn new(f: F, df: D) -> Self {
        Self { f, df }
    }
}

impl<F, D> Analytic for FnAnalytic<F, D>
where
    F: Fn(Complex64) -> Complex64 + Sync,
    D: Fn(Complex64) -> Complex64 + Sync,
{
    fn value(&self, z: Complex64) -> Complex64 {
        (self.f)(z)
    }
    fn derivative(&self, z: Complex64) -> Complex64 {
        (self.df)(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ComplexRectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, RootError> {
        let finite = [re_min, re_max, im_min, im_max]
            .iter()
            .all(|v| v.is_finite());
        if !(finite && re_min < re_max && im_min < im_max) {
            return Err(RootError::InvalidRectangle);
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn centre(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    /// Distance from an interior point to the boundary.
    fn inner_distance(&self, z: Complex64) -> f64 {
        (z.re - self.re_min)
            .min(self.re_max - z.re)
            .min(z.im - self.im_min)
            .min(self.im_max - z.im)
    }

    /// Scales both half-widths about the centre.
    pub fn inflate(&self, factor: f64) -> Self {
        let c = self.centre();
        let hw = 0.5 * self.width() * factor;
        let hh = 0.5 * self.height() * factor;
        Self {
            re_min: c.re - hw,
            re_max: c.re + hw,
            im_min: c.im - hh,
            im_max: c.im + hh,
        }
    }

    /// Splits at the given fractions of width and height; an elongated
    /// rectangle is only cut across its long side.
    fn split(&self, fx: f64, fy: f64) -> Vec<Self> {
        let x = self.re_min + fx * self.width();
        let y = self.im_min + fy * self.height();
        let Self {
            re_min,
            re_max,
            im_min,
            im_max,
        } = *self;
        let r = |a, b, c, d| Self {
            re_min: a,
            re_max: b,
            im_min: c,
            im_max: d,
        };
        if self.width() > 2.0 * self.height() {
            vec![r(re_min, x, im_min, im_max), r(x, re_max, im_min, im_max)]
        } else if self.height() > 2.0 * self.width() {
            vec![r(re_min, re_max, im_min, y), r(re_min, re_max, y, im_max)]
        } else {
            vec![
                r(re_min, x, im_min, y),
                r(x, re_max, im_min, y),
                r(re_min, x, y, im_max),
                r(x, re_max, y, im_max),
            ]
        }
    }

    fn contour(&self) -> [Piece; 4] {
        let a = Complex64::new(self.re_min, self.im_min);
        let b = Complex64::new(self.re_max, self.im_min);
        let c = Complex64::new(self.re_max, self.im_max);
        let d = Complex64::new(self.re_min, self.im_max);
        [
            Piece::Segment(a, b),
            Piece::Segment(b, c),
            Piece::Segment(c, d),
            Piece::Segment(d, a),
        ]
    }
}

/// Parses `re_min,re_max,im_min,im_max`.
impl FromStr for ComplexRectangle {
    type Err = RootError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| RootError::InvalidRectangle)?;
        match v[..] {
            [a, b, c, d] => Self::new(a, b, c, d),
            _ => Err(RootError::InvalidRectangle),
        }
    }
}

impl fmt::Display for ComplexRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.re_min, self.re_max, self.im_min, self.im_max
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub location: Complex64,
    pub multiplicity: usize,
    /// `|f(location)|`.
    pub residual: f64,
    /// Radius of a circle around `location` whose winding number is
    /// `multiplicity`.
    pub cluster_radius: f64,
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Segment(Complex64, Complex64),
    /// Counterclockwise arc of `centre + radius·e^{iθ}`, `θ ∈ [θ₀, θ₁]`.
    Arc {
        centre: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Piece {
    /// Point and velocity at parameter `t ∈ [0, 1]`.
    fn at(&self, t: f64) -> (Complex64, Complex64) {
        match *self {
            Piece::Segment(a, b) => (a + (b - a) * t, b - a),
            Piece::Arc {
                centre,
                radius,
                theta0,
                theta1,
            } => {
                let span = theta1 - theta0;
                let e = Complex64::from_polar(radius, theta0 + span * t);
                (centre + e, Complex64::new(0.0, span) * e)
            }
        }
    }
}

fn circle(centre: Complex64, radius: f64) -> [Piece; 4] {
    let arc = |k: f64| Piece::Arc {
        centre,
        radius,
        theta0: k * 0.5 * PI,
        theta1: (k + 1.0) * 0.5 * PI,
    };
    [arc(0.0), arc(1.0), arc(2.0), arc(3.0)]
}

/// Winding number of `f` along a closed chain of pieces.
fn winding<F: Analytic + ?Sized>(f: &F, pieces: &[Piece]) -> Result<usize, RootError> {
    let mut scale = 0.0_f64;
    for p in pieces {
        for k in 0..16 {
            scale = scale.max(f.value(p.at(k as f64 / 16.0).0).norm());
        }
    }
    if !scale.is_finite() {
        return Err(RootError::QuadratureFailure { defect: f64::NAN });
    }
    let floor = BOUNDARY_REL * scale;
    let check = |z: Complex64, v: Complex64| -> Result<Complex64, RootError> {
        if v.norm() <= floor || !v.norm().is_finite() {
            Err(RootError::BoundaryZero {
                at: z,
                value: v.norm(),
            })
        } else {
            Ok(v)
        }
    };

    let mut quad_sum = 0.0;
    let mut arg_sum = 0.0;
    let mut used = 0usize;
    for piece in pieces {
        let (za, _) = piece.at(0.0);
        let (zb, _) = piece.at(1.0);
        let mut stack = vec![(0.0, 1.0, check(za, f.value(za))?, check(zb, f.value(zb))?)];
        while let Some((t0, t1, f0, f1)) = stack.pop() {
            used += 1;
            if used > MAX_PIECES || t1 - t0 < 1e-13 {
                let defect = ((quad_sum / TAU) - (arg_sum / TAU).round()).abs();
                return Err(RootError::QuadratureFailure { defect });
            }
            let low: Cell<(f64, Complex64)> = Cell::new((f64::INFINITY, za));
            let integrand = |t: f64| {
                let (z, dz) = piece.at(t);
                let v = f.value(z);
                if v.norm() < low.get().0 {
                    low.set((v.norm(), z));
                }
                f.derivative(z) / v * dz
            };
            let (k, g) = gk15(&integrand, t0, t1);
            let (lowest, at) = low.get();
            // |f| within a few rounding units of zero cannot fix an argument
            let noise = ROUNDING_FACTOR
                * f64::EPSILON
                * f.scale(piece.at(t0).0).max(f.scale(piece.at(t1).0));
            if lowest <= floor.max(NOISE_MARGIN * noise) || !lowest.is_finite() {
                return Err(RootError::BoundaryZero { at, value: lowest });
            }
            let slack = 1e-3 + 4.0 * noise / lowest;
            let ratio = f1 / f0;
            let darg = ratio.arg();
            let dlog = ratio.norm().ln();
            let ok = k.re.is_finite()
                && k.im.is_finite()
                && (k - g).norm() <= 1e-6 * (1.0 + k.norm()) + slack * (t1 - t0)
                && k.im.abs() < 2.0
                && (k.im - darg).abs() < slack
                && (k.re - dlog).abs() < slack * (1.0 + dlog.abs());
            if ok {
                quad_sum += k.im;
                arg_sum += darg;
            } else {
                let tm = 0.5 * (t0 + t1);
                let (zm, _) = piece.at(tm);
                let fm = check(zm, f.value(zm))?;
                stack.push((tm, t1, fm, f1));
                stack.push((t0, tm, f0, fm));
            }
        }
    }
    let n = (arg_sum / TAU).round();
    let defect = (quad_sum / TAU - n).abs();
    if defect >= MAX_DEFECT || n < 0.0 {
        return Err(RootError::QuadratureFailure { defect });
    }
    Ok(n as usize)
}

/// Number of zeros of `f` inside `rect`, with multiplicity.
///
/// Fails with [`RootError::BoundaryZero`] when `|f|` drops below `10⁻¹²`
/// times its boundary maximum; callers wanting automatic perturbation should
/// use [`RootFinder::count`].
pub fn count_zeros<F: Analytic + ?Sized>(
    f: &F,
    rect: ComplexRectangle,
) -> Result<usize, RootError> {
    winding(f, &rect.contour())
}

/// Winding number of `f` on the circle `|z - z0| = radius`, after checking
/// that the annulus out to `2·radius` holds no further zeros.
pub fn multiplicity_at<F: Analytic + ?Sized>(
    f: &F,
    z0: Complex64,
    radius: f64,
) -> Result<usize, RootError> {
    let inner = winding(f, &circle(z0, radius))?;
    let outer = winding(f, &circle(z0, 2.0 * radius))?;
    if inner != outer {
        return Err(RootError::AnnulusNotClean { inner, outer });
    }
    Ok(inner)
}

fn certified_bound<F: Analytic + ?Sized>(f: &F, z: Complex64, tol: f64) -> f64 {
    tol.max(ROUNDING_FACTOR * f64::EPSILON * f.scale(z))
}

/// Damped Newton with the step scaled by `m`. Stops on stagnation; `None`
/// when an iterate leaves `bounds` or the derivative degenerates.
fn newton<F: Analytic + ?Sized>(
    f: &F,
    start: Complex64,
    m: usize,
    bounds: Option<ComplexRectangle>,
) -> Option<(Complex64, f64)> {
    let mut z = start;
    let mut r = f.value(z).norm();
    if !r.is_finite() {
        return None;
    }
    for _ in 0..NEWTON_MAX_ITER {
        if r == 0.0 {
            break;
        }
        let d = f.derivative(z);
        let full = f.value(z) / d * m as f64;
        if !full.norm().is_finite() {
            return None;
        }
        let mut step = full;
        let mut moved = false;
        for _ in 0..MAX_HALVINGS {
            let cand = z - step;
            let rc = f.value(cand).norm();
            if rc < r {
                z = cand;
                r = rc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        if let Some(b) = bounds {
            if !b.contains(z) {
                return None;
            }
        }
        if step.norm() <= 4.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    Some((z, r))
}

/// Newton on `f^{(m-1)}`, whose zero at an `m`-fold root of `f` is simple.
fn polish<F: Analytic + ?Sized>(f: &F, start: Complex64, m: usize) -> Option<Complex64> {
    let g = |z| f.higher_derivative(z, m - 1);
    let dg = |z| f.higher_derivative(z, m);
    let mut z = start;
    let mut gz = g(z)?;
    for _ in 0..50 {
        let step = gz / dg(z)?;
        if !step.norm().is_finite() {
            return None;
        }
        let cand = z - step;
        let gc = g(cand)?;
        if gc.norm() >= gz.norm() {
            break;
        }
        z = cand;
        gz = gc;
    }
    Some(z)
}

fn refine_inner<F: Analytic + ?Sized>(
    f: &F,
    guess: Complex64,
    tol: f64,
    m: usize,
    bounds: Option<ComplexRectangle>,
) -> Result<Complex64, RootError> {
    let stalled = |at: Complex64| RootError::NonConvergence {
        at,
        residual: f.value(at).norm(),
    };
    let (mut z, mut r) = newton(f, guess, m.max(1), bounds).ok_or_else(|| stalled(guess))?;
    if m > 1 {
        if let Some(p) = polish(f, z, m) {
            let rp = f.value(p).norm();
            let near = (p - z).norm() <= 1e-3 * (1.0 + z.norm());
            let inside = bounds.is_none_or(|b| b.contains(p));
            if near && inside && rp <= r.max(certified_bound(f, p, tol)) {
                z = p;
                r = rp;
            }
        }
    }
    if r <= certified_bound(f, z, tol) {
        Ok(z)
    } else {
        Err(RootError::NonConvergence { at: z, residual: r })
    }
}

/// Refines a simple root from `z_guess` until `|f| <= tol` (or the
/// rounding floor `64ε·scale(z)` when that is larger).
pub fn refine<F: Analytic + ?Sized>(
    f: &F,
    z_guess: Complex64,
    tol: f64,
) -> Result<Complex64, RootError> {
    refine_inner(f, z_guess, tol, 1, None)
}

/// As [`refine`] with Newton steps scaled by the multiplicity `m`, followed
/// when possible by Newton on `f^{(m-1)}`.
pub fn refine_multiple<F: Analytic + ?Sized>(
    f: &F,
    z_guess: Complex64,
    tol: f64,
    m: usize,
) -> Result<Complex64, RootError> {
    refine_inner(f, z_guess, tol, m, None)
}

/// Result of a search: the rectangle actually used (inflated if the given
/// one had a zero on its boundary), its zero count and the roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSearch {
    pub rect: ComplexRectangle,
    pub count: usize,
    pub roots: Vec<Root>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFinder {
    pub tol: f64,
    pub seed: u64,
    pub max_retries: usize,
    pub cluster_diameter: f64,
}

impl Default for RootFinder {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            seed: 0x5eed,
            max_retries: 5,
            cluster_diameter: CLUSTER_DIAMETER,
        }
    }
}

fn retryable(e: &RootError) -> bool {
    matches!(
        e,
        RootError::BoundaryZero { .. } | RootError::QuadratureFailure { .. }
    )
}

impl RootFinder {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    /// Counts zeros, inflating `rect` by a seeded random factor in
    /// `[1.001, 1.01]` whenever the boundary passes through a zero.
    pub fn count<F: Analytic + ?Sized>(
        &self,
        f: &F,
        rect: ComplexRectangle,
    ) -> Result<(ComplexRectangle, usize), RootError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut current = rect;
        let mut attempt = 0;
        loop {
            match count_zeros(f, current) {
                Ok(n) => return Ok((current, n)),
                Err(e) if retryable(&e) && attempt < self.max_retries => {
                    attempt += 1;
                    current = rect.inflate(rng.gen_range(1.001..=1.01));
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn find<F: Analytic + ?Sized>(
        &self,
        f: &F,
        rect: ComplexRectangle,
    ) -> Result<RootSearch, RootError> {
        let (rect, count) = self.count(f, rect)?;
        let mut roots = self.subdivide(f, rect, count)?;
        sort_roots(&mut roots);
        Ok(RootSearch { rect, count, roots })
    }

    fn subdivide<F: Analytic + ?Sized>(
        &self,
        f: &F,
        rect: ComplexRectangle,
        count: usize,
    ) -> Result<Vec<Root>, RootError> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let diam = rect.diameter();
        if (count <= CLUSTER_MAX_COUNT && diam < self.cluster_diameter) || diam < MIN_DIAMETER {
            return self.cluster(f, rect, count).map(|r| vec![r]);
        }
        if count == 1 {
            if let Ok(z) = refine_inner(f, rect.centre(), self.tol, 1, Some(rect)) {
                return Ok(vec![Root {
                    location: z,
                    multiplicity: 1,
                    residual: f.value(z).norm(),
                    // the circle stays inside a rectangle holding one zero
                    cluster_radius: (0.5 * rect.inner_distance(z)).min(diam),
                }]);
            }
        }
        let children = match self.split_counts(f, rect, count) {
            Ok(c) => c,
            // every cut passes through the noise band of a multiple root
            Err(e) if retryable(&e) && count <= CLUSTER_MAX_COUNT => {
                return self.cluster(f, rect, count).map(|r| vec![r]).map_err(|_| e);
            }
            Err(e) => return Err(e),
        };
        let found: Result<Vec<Vec<Root>>, RootError> = children
            .par_iter()
            .map(|&(r, n)| self.subdivide(f, r, n))
            .collect();
        Ok(found?.into_iter().flatten().collect())
    }

    fn split_counts<F: Analytic + ?Sized>(
        &self,
        f: &F,
        rect: ComplexRectangle,
        count: usize,
    ) -> Result<Vec<(ComplexRectangle, usize)>, RootError> {
        let mut last = RootError::CountMismatch { parent: count };
        for i in 0..SPLIT_OFFSETS.len() {
            let fx = 0.5 + SPLIT_OFFSETS[i];
            let fy = 0.5 - SPLIT_OFFSETS[(i + 2) % SPLIT_OFFSETS.len()];
            let parts = rect.split(fx, fy);
            let counts: Result<Vec<usize>, RootError> =
                parts.par_iter().map(|r| count_zeros(f, *r)).collect();
            match counts {
                Ok(c) if c.iter().sum::<usize>() == count => {
                    return Ok(parts.into_iter().zip(c).collect());
                }
                Ok(_) => last = RootError::CountMismatch { parent: count },
                Err(e) if retryable(&e) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    fn cluster<F: Analytic + ?Sized>(
        &self,
        f: &F,
        rect: ComplexRectangle,
        count: usize,
    ) -> Result<Root, RootError> {
        let diam = rect.diameter();
        let z = refine_inner(f, rect.centre(), self.tol, count, Some(rect.inflate(3.0)))?;
        for radius in [diam, 2.0 * diam, 0.5 * diam] {
            if let Ok(w) = winding(f, &circle(z, radius)) {
                if w == count {
                    return Ok(Root {
                        location: z,
                        multiplicity: count,
                        residual: f.value(z).norm(),
                        cluster_radius: radius,
                    });
                }
            }
        }
        Err(RootError::ClusterMismatch { count })
    }
}

/// All zeros of `f` in `rect` (see [`RootFinder`] for the strategy), each
/// with `|f| <= tol` up to the rounding floor of `f`.
pub fn find_roots<F: Analytic + ?Sized>(
    f: &F,
    rect: ComplexRectangle,
    tol: f64,
) -> Result<Vec<Root>, RootError> {
    RootFinder::with_tol(tol).find(f, rect).map(|s| s.roots)
}

/// Lexicographic by `(Re, Im)`.
pub fn sort_roots(roots: &mut [Root]) {
    roots.sort_by(|a, b| {
        a.location
            .re
            .total_cmp(&b.location.re)
            .then(a.location.im.total_cmp(&b.location.im))
    });
}

/// CSV with header `re,im,multiplicity,residual`.
pub fn roots_csv(roots: &[Root]) -> String {
    let mut out = String::from("re,im,multiplicity,residual\n");
    for r in roots {
        out.push_str(&format!(
            "{:.16e},{:.16e},{},{:.16e}\n",
            r.location.re, r.location.im, r.multiplicity, r.residual
        ));
    }
    out
}
