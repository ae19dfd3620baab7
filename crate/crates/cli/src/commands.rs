use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tds_mid::continuation::{sweep_spectrum, uniform_grid};
use tds_mid::dde_sim::{estimate_decay_rate, simulate_design, FitMethod};
use tds_mid::mid_design::{
    imaginary_axis_clearance, mid_coefficients, normalized_quasipoly, AxisVerdict, HatDelta,
    MidDesign,
};
use tds_mid::rhp_counter::hassard_count;
use tds_mid::rootfinder::{roots_csv, sort_roots, ComplexRectangle, RootFinder};
use tds_mid::{Complex64, Quasipolynomial};

use crate::{numerical, usage, CliResult, Command, DesignParams, Source};

pub const DEFAULT_RECT: &str = "-10,5,-33,33";
const ORIGIN_RADIUS: f64 = 1e-6;
const THIRD_DERIVATIVE_MIN: f64 = 1e-3;

pub fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Design(a) => {
            let d = design(&a.params)?;
            emit(a.out.as_deref(), &d.to_string())
        }
        Command::Spectrum(a) => spectrum(&a.source, &a.rect, a.tol, a.out.as_deref()),
        Command::Sweep(a) => sweep(a.grid, &a.rect, &a.out, a.svg.as_deref()),
        Command::CountRhp(a) => count_rhp(&a.source, a.out.as_deref()),
        Command::Clearance(a) => clearance(a.lambda),
        Command::Simulate(a) => simulate(&a),
        Command::Verify(a) => verify(&a.params, &a.rect),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn design(p: &DesignParams) -> CliResult<MidDesign> {
    mid_coefficients(p.tau1, p.tau2, p.s0).map_err(|e| usage(e.to_string()))
}

fn rect(text: &str) -> CliResult<ComplexRectangle> {
    text.parse()
        .map_err(|e| usage(format!("--rect {text:?}: {e}")))
}

fn lambda(l: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&l) {
        Ok(l)
    } else {
        Err(usage(format!("--lambda must lie in [0, 1], got {l}")))
    }
}

fn qp_file(path: &PathBuf) -> CliResult<Quasipolynomial> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    text.parse()
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn spectrum(src: &Source, rect_text: &str, tol: f64, out: Option<&Path>) -> CliResult<()> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage("--tol must be positive"));
    }
    let r = rect(rect_text)?;
    let finder = RootFinder::with_tol(tol);
    let search = match (src.lambda, &src.qp_file) {
        (Some(l), _) => finder.find(&HatDelta::new(lambda(l)?), r),
        (None, Some(p)) => finder.find(&qp_file(p)?, r),
        (None, None) => return Err(usage("one of --lambda, --qp-file is required")),
    }
    .map_err(numerical)?;
    let mut roots = search.roots;
    sort_roots(&mut roots);
    if search.rect != r {
        eprintln!(
            "note: rectangle inflated to {} to avoid a boundary zero",
            search.rect
        );
    }
    emit(out, &roots_csv(&roots))
}

fn sweep(grid: usize, rect_text: &str, out: &Path, svg: Option<&Path>) -> CliResult<()> {
    if grid == 0 {
        return Err(usage("--grid must be at least 1"));
    }
    let data = sweep_spectrum(&uniform_grid(grid), rect(rect_text)?);
    emit(Some(out), &data.to_csv())?;
    if let Some(p) = svg {
        emit(Some(p), &data.to_svg())?;
    }
    let failed: Vec<String> = data
        .failures()
        .map(|s| format!("lambda={}: {}", s.lambda, s.error.as_deref().unwrap_or("?")))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(numerical(failed.join("; ")))
    }
}

fn count_rhp(src: &Source, out: Option<&Path>) -> CliResult<()> {
    let q = match (src.lambda, &src.qp_file) {
        (Some(l), _) => normalized_quasipoly(lambda(l)?).map_err(|e| usage(e.to_string()))?,
        (None, Some(p)) => qp_file(p)?,
        (None, None) => return Err(usage("one of --lambda, --qp-file is required")),
    };
    let report = hassard_count(&q).map_err(numerical)?;
    emit(out, &report.to_string())?;
    match report.count() {
        Ok(_) => Ok(()),
        Err(e) => Err(numerical(e)),
    }
}

fn clearance(l: f64) -> CliResult<()> {
    let c = imaginary_axis_clearance(lambda(l)?);
    let mut s = String::new();
    let _ = writeln!(s, "lambda={:.16e}", c.lambda);
    let undetermined = match c.verdict {
        AxisVerdict::Clear => {
            let _ = writeln!(s, "verdict=clear");
            false
        }
        AxisVerdict::NotClear { omega, residual } => {
            let _ = writeln!(
                s,
                "verdict=not_clear\nomega={omega:.16e}\nresidual={residual:.16e}"
            );
            false
        }
        AxisVerdict::Undetermined { omega, residual } => {
            let _ = writeln!(
                s,
                "verdict=undetermined\nomega={omega:.16e}\nresidual={residual:.16e}"
            );
            true
        }
    };
    let _ = writeln!(
        s,
        "window={:.16e}\ncandidates={}",
        c.window,
        c.candidates.len()
    );
    emit(None, &s)?;
    if undetermined {
        Err(numerical("clearance undetermined"))
    } else {
        Ok(())
    }
}

fn history(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .ok()
        .filter(|c| !c.is_empty() && c.iter().all(|x| x.is_finite()))
        .ok_or_else(|| {
            usage(format!(
                "--history {text:?}: expected comma-separated coefficients"
            ))
        })
}

fn simulate(a: &crate::SimulateArgs) -> CliResult<()> {
    let d = design(&a.params)?;
    if !(a.t_end > 0.0 && a.t_end.is_finite()) {
        return Err(usage("--t-end must be positive"));
    }
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return Err(usage("--dt must be positive"));
    }
    if !(a.window > 0.0 && a.window <= 1.0) {
        return Err(usage("--window must lie in (0, 1]"));
    }
    let coeffs = history(&a.history)?;
    let h = |t: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let trace = simulate_design(&d, h, a.t_end, a.dt).map_err(numerical)?;
    emit(Some(&a.out), &trace.to_csv())?;
    if a.rate {
        let est = estimate_decay_rate(&trace, a.window).map_err(numerical)?;
        let method = match est.method {
            FitMethod::Samples => "samples",
            FitMethod::PeakEnvelope => "peak_envelope",
        };
        println!(
            "rate={:.16e}\nlog_t_power={:.16e}\nmethod={method}\npoints={}\ndt={:.16e}",
            est.rate, est.log_t_power, est.points, trace.dt
        );
    }
    Ok(())
}

struct Audit {
    text: String,
    ok: bool,
}

impl Audit {
    fn check(&mut self, name: &str, pass: bool) {
        let _ = writeln!(self.text, "{name}={}", if pass { "pass" } else { "fail" });
        self.ok &= pass;
    }

    fn value(&mut self, name: &str, v: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{name}={v}");
    }
}

fn verify(p: &DesignParams, rect_text: &str) -> CliResult<()> {
    let d = design(p)?;
    let r = rect(rect_text)?;
    let mut audit = Audit {
        text: String::new(),
        ok: true,
    };
    audit.value("lambda", format_args!("{:.16e}", d.lambda));

    // triple root at s0
    let q = d.characteristic();
    let s0 = Complex64::new(d.s0, 0.0);
    let bound = 1e-9 * (1.0 + d.s0.abs()).powi(3);
    let residual = (0..3)
        .map(|k| q.derivative(k).eval(s0).norm())
        .fold(0.0, f64::max);
    let third = q.derivative(3).eval(s0).norm();
    audit.value("triple_root_residual", format_args!("{residual:.3e}"));
    audit.value("third_derivative", format_args!("{third:.6e}"));
    audit.check(
        "certificate",
        residual <= bound && third > THIRD_DERIVATIVE_MIN,
    );

    // no nonzero root on the imaginary axis
    let clear = imaginary_axis_clearance(d.lambda);
    let axis_clear = matches!(clear.verdict, AxisVerdict::Clear);
    audit.check("clearance", axis_clear);

    // every root in the rectangle other than the triple origin lies left
    let hat = HatDelta::new(d.lambda);
    match RootFinder::default().find(&hat, r) {
        Ok(search) => {
            let origin: Vec<_> = search
                .roots
                .iter()
                .filter(|z| z.location.norm() < ORIGIN_RADIUS)
                .collect();
            let origin_ok = origin.len() == 1 && origin[0].multiplicity == 3;
            let rightmost = search
                .roots
                .iter()
                .filter(|z| z.location.norm() >= ORIGIN_RADIUS)
                .map(|z| z.location.re)
                .fold(f64::NEG_INFINITY, f64::max);
            audit.value("scan_rect", search.rect);
            audit.value("scan_count", search.count);
            audit.value("rightmost_other_re", format_args!("{rightmost:.6e}"));
            audit.value(
                "rightmost_other_re_s",
                format_args!("{:.6e}", d.s0 + rightmost / d.tau2),
            );
            audit.check("scan", origin_ok && rightmost < 0.0);
        }
        Err(e) => {
            audit.value("scan_error", e);
            audit.check("scan", false);
        }
    }

    if axis_clear {
        let z = normalized_quasipoly(d.lambda)
            .map_err(numerical)
            .and_then(|q| hassard_count(&q).map_err(numerical))
            .map(|rep| rep.z);
        match z {
            Ok(Some(z)) => {
                audit.value("hassard_z", z);
                audit.check("hassard", z == 0);
            }
            Ok(None) | Err(_) => {
                audit.value("hassard_z", "undetermined");
                audit.check("hassard", false);
            }
        }
    } else {
        audit.check("hassard", false);
    }
    audit.check("verdict", audit.ok);
    print!("{}", audit.text);
    if audit.ok {
        Ok(())
    } else {
        Err(numerical("dominance audit failed"))
    }
}
