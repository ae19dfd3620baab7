use tds_mid::continuation::{branches_from_midpoint, sweep_spectrum, uniform_grid, BranchStatus};
use tds_mid::mid_design::{imaginary_axis_clearance, AxisVerdict};
use tds_mid::rootfinder::ComplexRectangle;

fn sweep_rect() -> ComplexRectangle {
    ComplexRectangle::new(-10.0, 5.0, -33.0, 33.0).unwrap()
}

#[test]
fn branches_pass_through_swept_roots() {
    let rect = sweep_rect();
    let steps = 20;
    let grid = uniform_grid(steps + 1);
    let data = sweep_spectrum(&grid, rect);
    assert_eq!(data.failures().count(), 0);
    let branches = branches_from_midpoint(rect, steps).unwrap();
    assert!(!branches.is_empty());
    let mut checked = 0;
    for (down, up) in &branches {
        for b in [down, up] {
            assert_ne!(b.status, BranchStatus::Failed, "{:?}", b.diagnostic);
            for (&l, &z) in b.lambdas.iter().zip(&b.zetas) {
                let Some(slice) = data.slices.iter().find(|s| (s.lambda - l).abs() < 1e-12) else {
                    continue;
                };
                if !rect.contains(z) {
                    continue;
                }
                let gap = slice
                    .roots
                    .iter()
                    .map(|r| (r.location - z).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(gap <= 1e-6, "λ={l}: tracked {z} is {gap:e} from the sweep");
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "only {checked} grid points compared");
}

#[test]
fn tracked_points_respect_the_right_half_plane_bound() {
    let branches = branches_from_midpoint(sweep_rect(), 40).unwrap();
    for (down, up) in &branches {
        for b in [down, up] {
            for (&l, &z) in b.lambdas.iter().zip(&b.zetas) {
                if z.re > 0.0 && l > 0.0 && l < 1.0 {
                    assert!(z.norm() <= 2.0 / (l * (1.0 - l)), "λ={l}: {z}");
                }
            }
            for c in &b.crossings {
                if c.lambda > 0.0 && c.lambda < 1.0 {
                    let v = imaginary_axis_clearance(c.lambda).verdict;
                    assert!(
                        matches!(v, AxisVerdict::NotClear { .. }),
                        "crossing at λ={}",
                        c.lambda
                    );
                }
            }
        }
    }
}

#[test]
fn spectra_are_closed_under_conjugation() {
    let data = sweep_spectrum(&uniform_grid(11), sweep_rect());
    for slice in &data.slices {
        assert!(slice.error.is_none());
        for r in &slice.roots {
            let c = r.location.conj();
            assert!(
                slice
                    .roots
                    .iter()
                    .any(|o| (o.location - c).norm() <= 1e-9 && o.multiplicity == r.multiplicity),
                "λ={}: no conjugate of {}",
                slice.lambda,
                r.location
            );
        }
    }
}
