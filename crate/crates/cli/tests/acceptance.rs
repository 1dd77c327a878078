//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the report reads top to bottom; exits nonzero if any line fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cloak_cli::config::{load, SpecfunConfig};
use cloak_cli::commands::specfun_report;
use cloak_cli::{run, RunConfig};
use cloak_core::geometry::{pushforward_tensor, singular_cloak_tensor, CloakParams, Point, RadialMap, Scenario};
use cloak_core::halfspace::{fit_power_law, solve_amplitudes, transmission_residuals, HalfspaceParams};
use cloak_core::harmonics::ModeIndex;
use cloak_core::modal::{limit_coeffs, transfer_coeffs, BoundaryCoeffs, ModalSolution, SourceCoeffs};
use cloak_core::specfun::{gamma_half_int, BesselTable};
use cloak_core::weak_limit::{
    energy_integral, interior_trace_normal, interior_trace_normal_at, pairing_exterior_normal, tangential_trace,
    tangential_trace_limit, Component, PolynomialBump, Profile, QuadSettings, RadialTestFunction,
};
use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit() -> Scenario {
    Scenario::new(1.0, 1.0, 1.0, 0.5).unwrap()
}

fn dipole() -> (ModeIndex, SourceCoeffs) {
    let k = ModeIndex::new(1, 0).unwrap();
    (k, SourceCoeffs::single(k, z(0.0, 0.0), z(1.0, 0.0)).unwrap())
}

fn solve(rho: f64, src: &SourceCoeffs) -> ModalSolution {
    let p = CloakParams::new(unit(), rho).unwrap();
    ModalSolution::solve(&p, src, &BoundaryCoeffs::new(), src.max_order()).unwrap()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    fit_power_law(xs, ys).map_or(f64::NAN, |f| f.0)
}

fn specfun_identities() -> Outcome {
    let start = Instant::now();
    let report = specfun_report(&SpecfunConfig::default())?;
    let secs = start.elapsed().as_secs_f64();
    let worst = report.checks.iter().map(|c| c.max_error).fold(0.0, f64::max);
    Ok((
        worst <= 1e-11 && secs < 1.0,
        format!("max identity error {worst:.2e} (tol 1e-11), {secs:.3} s (limit 1 s)"),
    ))
}

fn material_tensor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let r: f64 = rng.gen_range(1e-3..2.0);
        let c: f64 = rng.gen_range(-1.0..1.0);
        let ph: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - c * c).sqrt();
        let y = Point::new(s * ph.cos(), s * ph.sin(), c) * r;
        let pushed = pushforward_tensor(&RadialMap::Singular, &y, &Matrix3::identity())?;
        let closed = singular_cloak_tensor(&pushed.point)?;
        worst = worst.max((pushed.tensor - closed).abs().max() / closed.abs().max());
    }
    let deltas = [1e-2, 1e-3, 1e-4];
    let mins: Vec<f64> = deltas
        .iter()
        .map(|d| {
            let m = singular_cloak_tensor(&Point::new(0.0, 0.0, 1.0 + d)).unwrap();
            m.symmetric_eigen().eigenvalues.min()
        })
        .collect();
    let s = slope(&deltas, &mins);
    Ok((
        worst <= 1e-12 && (s - 2.0).abs() <= 0.05,
        format!("push-forward vs closed form {worst:.2e} (tol 1e-12), degenerate eigenvalue slope {s:.4} (2 ± 0.05)"),
    ))
}

fn matching_residual() -> Outcome {
    let (_, src) = dipole();
    let mut worst = 0.0f64;
    for rho in [0.2, 0.05, 1e-3] {
        worst = worst.max(solve(rho, &src).max_residual()?);
    }
    Ok((worst < 1e-10, format!("max relative matching residual {worst:.2e} (tol 1e-10)")))
}

fn transfer_asymptotics() -> Outcome {
    let s = unit();
    let (w, k, mu) = (s.omega(), s.k(), s.mu0());
    let kw = k * w;
    let mut worst: f64 = 0.0;
    for n in 1..=5usize {
        let rho = 1e-3;
        let nf = n as f64;
        let t = transfer_coeffs(n, &CloakParams::new(s, rho)?)?;
        let b = BesselTable::new(n, kw)?;
        let j = b.j(n).to_complex();
        let wr = (b.jcal(n) * b.h(n) - b.hcal(n) * b.j(n)).to_complex();
        let pi = std::f64::consts::PI;
        let half = |p: i32| (0.5 * w * rho).powi(p);
        let t3 = z(0.0, pi * (nf + 1.0)) / (gamma_half_int(n) * gamma_half_int(n + 1) * nf) * half(2 * n as i32 + 1);
        let t4 = z((2.0 * nf + 1.0) * pi.sqrt(), 0.0) * mu.sqrt() / (gamma_half_int(n + 1) * kw * nf * j)
            * half(n as i32 + 1);
        let t3p = z(0.0, 2.0 * pi.sqrt()) * wr * mu.sqrt() / (gamma_half_int(n) * k * nf * j) * half(n as i32 + 1);
        for (got, lead) in [(t.t3(), t3), (t.t4(), t4), (t.t3p(), t3p)] {
            worst = worst.max((got.to_complex() / lead - 1.0).norm());
        }
    }
    let mut worst_p: f64 = 0.0;
    let b = BesselTable::new(5, kw)?;
    for n in 1..=5usize {
        let t = transfer_coeffs(n, &CloakParams::new(s, 1e-4)?)?;
        let lead = -(b.h(n) / b.j(n)).to_complex();
        worst_p = worst_p.max((t.t4p().to_complex() / lead - 1.0).norm());
    }
    Ok((
        worst <= 0.05 && worst_p <= 1e-3,
        format!("t3, t4, t3' vs leading forms {worst:.2e} (tol 0.05), t4' vs -h/j {worst_p:.2e} (tol 1e-3)"),
    ))
}

fn delta_emergence() -> Outcome {
    let (k, src) = dipole();
    let phi = RadialTestFunction::single(k, Profile::Bump(PolynomialBump::new(0.6, 1.8, 4.0)?));
    let s = unit();
    let l = limit_coeffs(k, z(0.0, 0.0), z(1.0, 0.0), &s)?;
    let j = BesselTable::new(1, s.k() * s.omega())?.j(1).to_complex();
    let collapsed = z(0.0, -s.mu0().sqrt()) / (s.k() * s.k() * s.omega() * j);
    let sigma_err = (l.sigma() - collapsed).norm() / collapsed.norm();
    let target = l.sigma() * phi.component(k, 1.0);
    let rhos = [1e-2, 3e-3, 1e-3];
    let mut errs = Vec::new();
    for &rho in &rhos {
        let v = pairing_exterior_normal(&solve(rho, &src), &phi, Component::Electric, QuadSettings::default())?;
        errs.push((v - target).norm());
    }
    let order = slope(&rhos, &errs);
    let rel = errs[2] / target.norm();
    Ok((
        order >= 0.8 && rel <= 0.02 && sigma_err <= 1e-12,
        format!("exterior pairing order {order:.3} (>= 0.8), rel err at 1e-3 {rel:.2e} (tol 0.02), sigma forms {sigma_err:.1e}"),
    ))
}

fn interior_trace() -> Outcome {
    let (_, src) = dipole();
    let at_one = interior_trace_normal(&src, &unit(), 1.0)?.iter().map(|v| v.1.norm()).fold(0.0, f64::max);
    let rhos = [1e-2, 1e-3, 1e-4];
    let mut vals = Vec::new();
    for &rho in &rhos {
        vals.push(interior_trace_normal_at(&solve(rho, &src), 1.0)?[0].1.norm());
    }
    let s = slope(&rhos, &vals);
    Ok((
        at_one <= 1e-13 && (s - 1.0).abs() <= 0.15,
        format!("limit trace at |x| = 1 {at_one:.1e} (tol 1e-13), finite-rho slope {s:.3} (1 ± 0.15)"),
    ))
}

fn tangential_traces() -> Outcome {
    let (k, src) = dipole();
    let s = unit();
    let kw = s.k() * s.omega();
    let limit = tangential_trace_limit(&src, &s)?[0].1;
    let j = BesselTable::new(1, kw)?.j(1).to_complex();
    let closed = z(0.0, 1.0) / (kw * j);
    let err = (limit.t1 - closed).norm() / closed.norm();
    let rhos = [1e-2, 1e-3, 1e-4];
    let mut errs = Vec::new();
    for &rho in &rhos {
        let tr = tangential_trace(&solve(rho, &src))?;
        let t = tr.iter().find(|(m, _)| *m == k).map(|p| p.1).ok_or("missing mode")?;
        errs.push((t.t1 - limit.t1).norm() + (t.t2 - limit.t2).norm());
    }
    let o = slope(&rhos, &errs);
    Ok((
        err <= 1e-12 && (o - 1.0).abs() <= 0.15,
        format!("T1 vs iq/(k omega j) {err:.1e} (tol 1e-12), finite-rho order {o:.3} (1 ± 0.15)"),
    ))
}

fn energy_growth() -> Outcome {
    let (_, src) = dipole();
    let mut vals = Vec::new();
    for rho in [1e-1, 1e-2, 1e-3] {
        vals.push(energy_integral(&solve(rho, &src), 0.0, QuadSettings::default())?);
    }
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    Ok((
        increasing,
        format!("energy at rho = 1e-1, 1e-2, 1e-3: {:.5}, {:.5}, {:.5} (must increase)", vals[0], vals[1], vals[2]),
    ))
}

fn halfspace() -> Outcome {
    let base = HalfspaceParams::new(1.0, 0.5, 1.0, z(1.0, 0.0))?;
    let rhos = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let (mut unit_err, mut resid, mut defect, mut mass) = (0.0f64, 0.0f64, Vec::new(), Vec::new());
    for &rho in &rhos {
        let p = base.with_rho(rho)?;
        let a = solve_amplitudes(&p)?;
        unit_err = unit_err.max((a.h_sc.norm() / p.hin.norm() - 1.0).abs());
        let (r1, r2) = transmission_residuals(&p, 0.3)?;
        resid = resid.max(r1.max(r2));
        defect.push((a.h_sc / p.hin + 1.0).norm());
        mass.push((z(0.0, 1.0) * a.h_plus / a.kx_plus).norm());
    }
    let s = slope(&rhos, &defect);
    let m = slope(&rhos, &mass);
    Ok((
        unit_err <= 1e-13 && (s - 1.0).abs() <= 0.1 && resid < 1e-11,
        format!(
            "| |h_sc| - 1 | {unit_err:.1e} (tol 1e-13), reflection defect slope {s:.3} (1 ± 0.1), \
             transmission residual {resid:.1e} (tol 1e-11), transmitted mass exponent {m:.3}"
        ),
    ))
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn tagged(path: &Path) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    Ok(if name.ends_with("_converge") {
        RunConfig::Converge(load(path)?)
    } else if name.ends_with("_fields") {
        RunConfig::Fields(load(path)?)
    } else if name.starts_with("halfspace") {
        RunConfig::Halfspace(load(path)?)
    } else {
        RunConfig::CheckSpecfun(load(path)?)
    })
}

fn snapshot(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        files.push((entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path())?));
    }
    files.sort();
    Ok(files)
}

fn reproducible_runs() -> Outcome {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenario_dir())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let (mut same, mut compared) = (true, 0);
    for path in &paths {
        let config = tagged(path)?;
        let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
        let (ra, rb) = (run(&config, a.path()), run(&config, b.path()));
        match (ra, rb) {
            (Ok(_), Ok(_)) => {
                same &= snapshot(a.path())? == snapshot(b.path())?;
                compared += 1;
            }
            (Err(ea), Err(eb)) => same &= ea.to_string() == eb.to_string(),
            _ => same = false,
        }
    }
    Ok((same && compared > 0, format!("{compared} of {} scenarios produced outputs, byte-identical on rerun: {same}", paths.len())))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("special-function identities", specfun_identities),
        ("singular material tensor", material_tensor),
        ("interface matching residual", matching_residual),
        ("transfer coefficient asymptotics", transfer_asymptotics),
        ("normal-field concentration on the interface", delta_emergence),
        ("interior normal trace", interior_trace),
        ("tangential traces", tangential_traces),
        ("energy blow-up", energy_growth),
        ("half-space reflection", halfspace),
        ("reproducible scenario runs", reproducible_runs),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("{} [{:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
