//! Root branches `λ ↦ ζ(λ)` of `Δ̂(·, λ)` and spectrum sweeps over `λ`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::mid_design::HatDelta;
use crate::rootfinder::{refine, ComplexRectangle, Root, RootError, RootFinder};

const SINGULAR_TOL: f64 = 1e-8;
const BRANCH_TOL: f64 = 1e-10;
const RESIDUAL_MAX: f64 = 1e-9;
const MIN_STEP: f64 = 1e-6;
const MERGE_DISTANCE: f64 = 1e-8;
const CROSSING_TOL: f64 = 1e-10;
const ORIGIN_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuationError {
    #[error("∂Δ̂/∂z vanishes at z = {z}, λ = {lambda}: not a simple root")]
    SingularJacobian { z: Complex64, lambda: f64 },
    #[error("delay ratio {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error(transparent)]
    Root(#[from] RootError),
}

fn check_lambda(lambda: f64) -> Result<(), ContinuationError> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(ContinuationError::LambdaOutOfRange(lambda))
    }
}

/// `dζ/dλ = -∂λΔ̂ / ∂zΔ̂` at a simple root.
pub fn branch_velocity(z: Complex64, lambda: f64) -> Result<Complex64, ContinuationError> {
    check_lambda(lambda)?;
    let f = HatDelta::new(lambda);
    let dz = f.dz(z);
    if dz.norm() <= SINGULAR_TOL * f.magnitude(z).max(1.0) {
        return Err(ContinuationError::SingularJacobian { z, lambda });
    }
    Ok(-f.dlambda(z) / dz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchStatus {
    Tracked,
    /// Came within `10⁻⁸` of another root.
    Merged,
    OutOfWindow,
    Failed,
}

/// A change of sign of `Re ζ`, located in `λ` to `10⁻¹⁰`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub lambda: f64,
    pub omega: f64,
    /// `Re ζ'(λ)` at the crossing.
    pub re_velocity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub lambdas: Vec<f64>,
    pub zetas: Vec<Complex64>,
    pub crossings: Vec<Crossing>,
    pub status: BranchStatus,
    pub diagnostic: Option<String>,
}

impl Branch {
    pub fn last(&self) -> Option<(f64, Complex64)> {
        Some((*self.lambdas.last()?, *self.zetas.last()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    /// Tracking stops with `OutOfWindow` once `ζ` leaves this rectangle.
    pub window: Option<ComplexRectangle>,
    pub min_step: f64,
    pub tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            window: None,
            min_step: MIN_STEP,
            tol: BRANCH_TOL,
        }
    }
}

/// Euler predictor and Newton corrector from `(z, λ)` to `target`.
fn step(z: Complex64, lambda: f64, target: f64, tol: f64) -> Option<Complex64> {
    let v = branch_velocity(z, lambda).ok()?;
    let guess = z + v * (target - lambda);
    let f = HatDelta::new(target);
    let next = refine(&f, guess, tol).ok()?;
    // the corrector must stay close to the prediction, or it jumped branches
    let drift = (next - guess).norm();
    let moved = (guess - z).norm();
    if drift > 0.1 * moved + 1e-6 * (1.0 + z.norm()) || f.value(next).norm() > RESIDUAL_MAX {
        return None;
    }
    Some(next)
}

/// Estimated distance to the nearest other root, `2|f'/f''|`.
fn separation(z: Complex64, lambda: f64) -> f64 {
    let f = HatDelta::new(lambda);
    2.0 * (f.dz(z) / f.dzz(z)).norm()
}

fn strict_sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Bisects in `λ` between two tracked points whose real parts have
/// opposite signs.
fn locate_crossing(
    (l0, z0): (f64, Complex64),
    (l1, z1): (f64, Complex64),
    tol: f64,
) -> Option<Crossing> {
    let s0 = strict_sign(z0.re);
    let (mut a, mut za) = (l0, z0);
    let (mut b, mut zb) = (l1, z1);
    while (b - a).abs() > CROSSING_TOL {
        let m = 0.5 * (a + b);
        let zm = step(za, a, m, tol)?;
        if strict_sign(zm.re) == s0 {
            a = m;
            za = zm;
        } else {
            b = m;
            zb = zm;
        }
    }
    let (lambda, z) = if za.re.abs() <= zb.re.abs() {
        (a, za)
    } else {
        (b, zb)
    };
    let re_velocity = branch_velocity(z, lambda).ok()?.re;
    Some(Crossing {
        lambda,
        omega: z.im,
        re_velocity,
    })
}

/// Follows the branch through the simple root `z_start` of
/// `Δ̂(·, lambda_start)` to `lambda_end` in `steps` equal steps, halving a
/// step whenever the corrector fails.
pub fn track_branch(
    z_start: Complex64,
    lambda_start: f64,
    lambda_end: f64,
    steps: usize,
) -> Branch {
    track_branch_with(
        z_start,
        lambda_start,
        lambda_end,
        steps,
        &TrackOptions::default(),
    )
}

pub fn track_branch_with(
    z_start: Complex64,
    lambda_start: f64,
    lambda_end: f64,
    steps: usize,
    opts: &TrackOptions,
) -> Branch {
    let mut branch = Branch {
        lambdas: Vec::new(),
        zetas: Vec::new(),
        crossings: Vec::new(),
        status: BranchStatus::Tracked,
        diagnostic: None,
    };
    let fail = |mut b: Branch, msg: String| {
        b.status = BranchStatus::Failed;
        b.diagnostic = Some(msg);
        b
    };
    if check_lambda(lambda_start).is_err() || check_lambda(lambda_end).is_err() || steps == 0 {
        return fail(
            branch,
            format!("bad range {lambda_start} → {lambda_end} in {steps} steps"),
        );
    }
    let start = HatDelta::new(lambda_start);
    let z0 = match refine(&start, z_start, opts.tol) {
        Ok(z) => z,
        Err(e) => return fail(branch, format!("start is not a root: {e}")),
    };
    if let Err(e) = branch_velocity(z0, lambda_start) {
        return fail(branch, e.to_string());
    }
    branch.lambdas.push(lambda_start);
    branch.zetas.push(z0);

    let nominal = (lambda_end - lambda_start) / steps as f64;
    let (mut lambda, mut z) = (lambda_start, z0);
    for k in 1..=steps {
        let goal = if k == steps {
            lambda_end
        } else {
            lambda_start + k as f64 * nominal
        };
        let mut h = goal - lambda;
        while lambda != goal {
            let target = if (goal - lambda).abs() <= h.abs() {
                goal
            } else {
                lambda + h
            };
            match step(z, lambda, target, opts.tol) {
                Some(next) => {
                    if strict_sign(z.re) * strict_sign(next.re) < 0 {
                        match locate_crossing((lambda, z), (target, next), opts.tol) {
                            Some(c) => branch.crossings.push(c),
                            None => {
                                return fail(
                                    branch,
                                    format!("crossing near λ = {target} not resolved"),
                                )
                            }
                        }
                    }
                    lambda = target;
                    z = next;
                    branch.lambdas.push(lambda);
                    branch.zetas.push(z);
                    h = (2.0 * h).abs().min(nominal.abs()).copysign(nominal);
                    if separation(z, lambda) < MERGE_DISTANCE {
                        branch.status = BranchStatus::Merged;
                        return branch;
                    }
                    if opts.window.is_some_and(|w| !w.contains(z)) {
                        branch.status = BranchStatus::OutOfWindow;
                        return branch;
                    }
                }
                None => {
                    h *= 0.5;
                    if h.abs() < opts.min_step {
                        return fail(
                            branch,
                            format!(
                                "corrector failed below step {} at λ = {lambda}, z = {z}",
                                opts.min_step
                            ),
                        );
                    }
                }
            }
        }
    }
    branch
}

/// Tracks every simple root of `Δ̂(·, 1/2)` in `rect` down to `λ = 0` and up
/// to `λ = 1`, leaving the branch when it exits `rect`.
pub fn branches_from_midpoint(
    rect: ComplexRectangle,
    steps: usize,
) -> Result<Vec<(Branch, Branch)>, ContinuationError> {
    let seeds = RootFinder::default().find(&HatDelta::new(0.5), rect)?;
    let opts = TrackOptions {
        window: Some(rect),
        ..TrackOptions::default()
    };
    Ok(seeds
        .roots
        .par_iter()
        .filter(|r| r.multiplicity == 1 && r.location.norm() > ORIGIN_RADIUS)
        .map(|r| {
            (
                track_branch_with(r.location, 0.5, 0.0, steps, &opts),
                track_branch_with(r.location, 0.5, 1.0, steps, &opts),
            )
        })
        .collect())
}

/// Roots of `Δ̂(·, λ)` at one grid value, or why they are missing.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSlice {
    pub lambda: f64,
    pub roots: Vec<Root>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepDataset {
    pub rect: ComplexRectangle,
    pub slices: Vec<SweepSlice>,
}

/// `n` uniform points on `[0, 1]`, endpoints included.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

fn slice_at(lambda: f64, rect: ComplexRectangle) -> SweepSlice {
    let empty = |error: String| SweepSlice {
        lambda,
        roots: Vec::new(),
        error: Some(error),
    };
    if check_lambda(lambda).is_err() {
        return empty(format!("λ = {lambda} outside [0, 1]"));
    }
    let f = HatDelta::new(lambda);
    let mut roots = match RootFinder::default().find(&f, rect) {
        Ok(s) => s.roots,
        Err(e) => return empty(e.to_string()),
    };
    // the triple root at 0 is structural; report it exactly
    let origin: Vec<usize> = (0..roots.len())
        .filter(|&i| roots[i].location.norm() < ORIGIN_RADIUS)
        .collect();
    match origin[..] {
        [i] if roots[i].multiplicity == 3 => {
            let zero = Complex64::new(0.0, 0.0);
            roots[i].location = zero;
            roots[i].residual = f.value(zero).norm();
        }
        _ => {
            return SweepSlice {
                lambda,
                roots,
                error: Some("origin not resolved as a single triple root".into()),
            }
        }
    }
    crate::rootfinder::sort_roots(&mut roots);
    SweepSlice {
        lambda,
        roots,
        error: None,
    }
}

/// Roots of `Δ̂(·, λ)` in `rect` for every `λ` of the grid, computed in
/// parallel; a failure at one `λ` is recorded in its slice.
pub fn sweep_spectrum(lambda_grid: &[f64], rect: ComplexRectangle) -> SweepDataset {
    let slices = lambda_grid.par_iter().map(|&l| slice_at(l, rect)).collect();
    SweepDataset { rect, slices }
}

impl SweepDataset {
    pub fn failures(&self) -> impl Iterator<Item = &SweepSlice> {
        self.slices.iter().filter(|s| s.error.is_some())
    }

    /// Header `lambda,re,im,multiplicity,residual`; one row per root.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,re,im,multiplicity,residual\n");
        for s in &self.slices {
            for r in &s.roots {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{},{:.16e}",
                    s.lambda, r.location.re, r.location.im, r.multiplicity, r.residual
                );
            }
        }
        out
    }

    /// Scatter of all roots coloured by `λ` from blue (0) to yellow (1),
    /// with the origin drawn as a black square.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (640.0, 720.0, 50.0);
        let r = self.rect;
        let x = |re: f64| pad + (re - r.re_min) / r.width() * (w - 2.0 * pad);
        let y = |im: f64| h - pad - (im - r.im_min) / r.height() * (h - 2.0 * pad);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(
            out,
            r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
        );
        let _ = writeln!(
            out,
            r##"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            w - 2.0 * pad,
            h - 2.0 * pad
        );
        if r.re_min < 0.0 && r.re_max > 0.0 {
            let _ = writeln!(
                out,
                r##"<line x1="{0:.2}" y1="{pad}" x2="{0:.2}" y2="{1}" stroke="#999" stroke-dasharray="4,3"/>"##,
                x(0.0),
                h - pad
            );
        }
        if r.im_min < 0.0 && r.im_max > 0.0 {
            let _ = writeln!(
                out,
                r##"<line x1="{pad}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#999" stroke-dasharray="4,3"/>"##,
                y(0.0),
                w - pad
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">Re z</text>"#,
            w / 2.0,
            h - 15.0
        );
        let _ = writeln!(
            out,
            r#"<text x="15" y="{}" font-size="14" transform="rotate(-90 15 {})" text-anchor="middle">Im z</text>"#,
            h / 2.0,
            h / 2.0
        );
        for s in &self.slices {
            let (cr, cg, cb) = lambda_colour(s.lambda);
            for root in s.roots.iter().filter(|q| q.location.norm() > 0.0) {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="rgb({cr},{cg},{cb})"/>"#,
                    x(root.location.re),
                    y(root.location.im)
                );
            }
        }
        if r.contains(Complex64::new(0.0, 0.0)) {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="black"/>"#,
                x(0.0) - 4.0,
                y(0.0) - 4.0
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Linear blend from blue to yellow.
fn lambda_colour(lambda: f64) -> (u8, u8, u8) {
    let t = lambda.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (mix(20.0, 250.0), mix(40.0, 220.0), mix(220.0, 20.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mid_design::{imaginary_axis_clearance, AxisVerdict};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sweep_rect() -> ComplexRectangle {
        ComplexRectangle::new(-10.0, 5.0, -33.0, 33.0).unwrap()
    }

    fn first_neutral_root() -> f64 {
        let mut y = 2.0 * std::f64::consts::PI;
        for _ in 0..200 {
            y = 2.0 * (0.5 * y).atan() + 2.0 * std::f64::consts::PI;
        }
        y
    }

    fn upper_roots(lambda: f64) -> Vec<Complex64> {
        sweep_spectrum(&[lambda], sweep_rect()).slices[0]
            .roots
            .iter()
            .filter(|r| r.multiplicity == 1 && r.location.im > 0.0)
            .map(|r| r.location)
            .collect()
    }

    #[test]
    fn origin_is_singular() {
        for l in [0.0, 0.3, 0.5, 1.0] {
            assert!(matches!(
                branch_velocity(c(0.0, 0.0), l),
                Err(ContinuationError::SingularJacobian { .. })
            ));
        }
        assert!(matches!(
            branch_velocity(c(1.0, 1.0), 1.5),
            Err(ContinuationError::LambdaOutOfRange(_))
        ));
    }

    #[test]
    fn velocity_matches_finite_differences() {
        let h = 1e-6;
        for l in [0.2, 0.5, 0.8] {
            for z in upper_roots(l) {
                let v = branch_velocity(z, l).unwrap();
                let up = refine(&HatDelta::new(l + h), z + v * h, 1e-13).unwrap();
                let down = refine(&HatDelta::new(l - h), z - v * h, 1e-13).unwrap();
                let fd = (up - down) / (2.0 * h);
                assert!((fd - v).norm() <= 1e-5, "λ={l} z={z}: {fd} vs {v}");
            }
        }
    }

    #[test]
    fn neutral_axis_root_moves_tangentially() {
        let z = c(0.0, first_neutral_root());
        let v = branch_velocity(z, 1.0).unwrap();
        assert!(v.re.abs() < 1e-10, "{v}");
        assert!(v.im.abs() > 1e-3);
    }

    #[test]
    fn tracked_branch_stays_left() {
        let starts = upper_roots(0.95);
        let at_half = upper_roots(0.5);
        for z in starts {
            let b = track_branch(z, 0.95, 0.5, 45);
            assert_eq!(b.status, BranchStatus::Tracked, "{:?}", b.diagnostic);
            assert!(b.crossings.is_empty());
            for (&l, &zeta) in b.lambdas.iter().zip(&b.zetas) {
                assert!(zeta.re < 0.0);
                assert!(HatDelta::new(l).value(zeta).norm() <= 1e-9);
            }
            let (l, end) = b.last().unwrap();
            assert_eq!(l, 0.5);
            let nearest = at_half
                .iter()
                .map(|w| (w - end).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-6, "{end}");
        }
    }

    #[test]
    fn neutral_root_enters_left_half_plane() {
        let b = track_branch(c(0.0, first_neutral_root()), 1.0, 0.9, 20);
        assert_eq!(b.status, BranchStatus::Tracked);
        assert!(b.crossings.is_empty());
        assert!(b.zetas[0].re.abs() < 1e-12);
        for zeta in &b.zetas[1..] {
            assert!(zeta.re < 0.0, "{zeta}");
        }
    }

    #[test]
    fn branch_reaches_the_axis_only_at_one() {
        let z = upper_roots(0.5)
            .into_iter()
            .min_by(|a, b| a.im.total_cmp(&b.im))
            .unwrap();
        let b = track_branch(z, 0.5, 1.0, 50);
        assert_eq!(b.status, BranchStatus::Tracked, "{:?}", b.diagnostic);
        assert!(b.crossings.is_empty());
        let (l, end) = b.last().unwrap();
        assert_eq!(l, 1.0);
        assert!(end.re.abs() < 1e-8, "{end}");
        for (&l, zeta) in b.lambdas.iter().zip(&b.zetas) {
            if l < 1.0 {
                assert!(zeta.re < 0.0);
            }
        }
        for cr in &b.crossings {
            let verdict = imaginary_axis_clearance(cr.lambda).verdict;
            assert!(matches!(verdict, AxisVerdict::NotClear { .. }));
        }
    }

    #[test]
    fn bad_start_fails_with_diagnostic() {
        let b = track_branch(c(0.0, 0.0), 0.5, 0.4, 10);
        assert_eq!(b.status, BranchStatus::Failed);
        assert!(b.diagnostic.is_some());
        let b = track_branch(c(1.0, 1.0), 0.5, 1.4, 10);
        assert_eq!(b.status, BranchStatus::Failed);
    }

    #[test]
    fn window_stops_tracking() {
        let z = upper_roots(0.5)[0];
        let w = ComplexRectangle::new(z.re - 0.01, z.re + 0.01, z.im - 0.01, z.im + 0.01).unwrap();
        let opts = TrackOptions {
            window: Some(w),
            ..TrackOptions::default()
        };
        let b = track_branch_with(z, 0.5, 0.0, 50, &opts);
        assert_eq!(b.status, BranchStatus::OutOfWindow);
    }

    #[test]
    fn sweep_records_origin_and_failures() {
        let data = sweep_spectrum(&[0.0, 0.5, 1.0, 1.2], sweep_rect());
        assert_eq!(data.slices.len(), 4);
        for s in &data.slices[..3] {
            assert!(s.error.is_none(), "{:?}", s.error);
            let origin: Vec<_> = s
                .roots
                .iter()
                .filter(|r| r.location.norm() == 0.0)
                .collect();
            assert_eq!(origin.len(), 1);
            assert_eq!(origin[0].multiplicity, 3);
        }
        assert!(data.slices[3].error.is_some());
        assert_eq!(data.failures().count(), 1);
    }

    #[test]
    fn sweep_outputs() {
        let data = sweep_spectrum(&uniform_grid(3), sweep_rect());
        let csv = data.to_csv();
        assert!(csv.starts_with("lambda,re,im,multiplicity,residual\n"));
        let rows = csv.lines().count() - 1;
        assert_eq!(
            rows,
            data.slices.iter().map(|s| s.roots.len()).sum::<usize>()
        );
        let svg = data.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(r#"fill="black""#));
        assert!(svg.contains("rgb(20,40,220)") && svg.contains("rgb(250,220,20)"));
        assert_eq!(
            csv,
            sweep_spectrum(&uniform_grid(3), sweep_rect()).to_csv()
        );
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(101);
        assert_eq!((g[0], g[50], g[100]), (0.0, 0.5, 1.0));
        assert!(uniform_grid(0).is_empty());
    }
}
