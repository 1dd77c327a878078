//! The four commands. Each writes its tables, a JSON summary where useful,
//! and `manifest.json` into the output directory.

use std::path::Path;

use cloak_core::fields::{eval_batch, eval_ideal_exterior, eval_physical, eval_virtual_exterior, BackgroundField};
use cloak_core::halfspace::{fit_power_law, halfspace_limit_study};
use cloak_core::modal::{truncation_order, ModalSolution, SourceCoeffs};
use cloak_core::specfun::{BesselTable, ScaledComplex};
use cloak_core::weak_limit::{pairing_total, predicted_limit, richardson_first_order};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{
    ConvergeConfig, FieldSpace, FieldsConfig, HalfspaceConfig, RunConfig, ScenarioSpec, SpecfunConfig,
};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::output::{fmt_f64, write_json, CsvTable};

/// Result of a successful run: files written plus the truncation order.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub outputs: Vec<String>,
    pub n_max: Option<usize>,
    /// Set when a check-type command ran but found failures.
    pub failure: Option<String>,
}

pub fn run(config: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    config.validate()?;
    std::fs::create_dir_all(out)?;
    let outcome = match config {
        RunConfig::Converge(c) => converge(c, out)?,
        RunConfig::Fields(c) => fields(c, out)?,
        RunConfig::Halfspace(c) => halfspace(c, out)?,
        RunConfig::CheckSpecfun(c) => check_specfun(c, out)?,
    };
    RunManifest::new(config.clone(), outcome.n_max, outcome.outputs.clone()).write(out)?;
    match &outcome.failure {
        Some(msg) => Err(CliError::ChecksFailed(msg.clone())),
        None => Ok(outcome),
    }
}

fn resolve_n_max(fixed: Option<usize>, source: &SourceCoeffs, scenario: &ScenarioSpec, tol: f64) -> Result<usize, CliError> {
    Ok(match fixed {
        Some(n) => n,
        None => truncation_order(source, &scenario.build()?, tol)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeSummary {
    pub predicted_measurable: [f64; 2],
    pub predicted_delta: [f64; 2],
    pub predicted_total: [f64; 2],
    /// Fitted `abs_err ≈ C ρ^order` over all rows.
    pub error_order: Option<f64>,
    /// First-order extrapolation from the two smallest `ρ`.
    pub extrapolated: Option<[f64; 2]>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn converge(c: &ConvergeConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let scenario = c.scenario.build()?;
    let n_max = resolve_n_max(c.n_max, &c.source, &c.scenario, c.truncation_tol)?;
    let source = c.source.truncated(n_max);
    let predicted = predicted_limit(&source, &c.test_function, &scenario, c.component, c.quadrature)?;

    let mut table = CsvTable::new(&["rho", "pairing_re", "pairing_im", "predicted_re", "predicted_im", "abs_err"]);
    let mut sweep = Vec::with_capacity(c.rhos.len());
    for &rho in &c.rhos {
        let sol = ModalSolution::solve(&c.scenario.with_rho(rho)?, &source, &Default::default(), n_max)?;
        let v = pairing_total(&sol, &c.test_function, c.component, c.quadrature)?;
        let err = (v - predicted.total()).norm();
        table.push(vec![
            fmt_f64(rho),
            fmt_f64(v.re),
            fmt_f64(v.im),
            fmt_f64(predicted.total().re),
            fmt_f64(predicted.total().im),
            fmt_f64(err),
        ]);
        sweep.push((rho, v, err));
    }
    table.write(&out.join("converge.csv"))?;

    let (rs, es): (Vec<f64>, Vec<f64>) = sweep.iter().map(|s| (s.0, s.2)).unzip();
    let mut by_rho = sweep.clone();
    by_rho.sort_by(|a, b| a.0.total_cmp(&b.0));
    let extrapolated = match by_rho.as_slice() {
        [a, b, ..] if a.0 != b.0 => Some(pair(richardson_first_order(a.0, a.1, b.0, b.1))),
        _ => None,
    };
    let summary = ConvergeSummary {
        predicted_measurable: pair(predicted.measurable),
        predicted_delta: pair(predicted.delta),
        predicted_total: pair(predicted.total()),
        error_order: fit_power_law(&rs, &es).map(|f| f.0),
        extrapolated,
    };
    write_json(&out.join("converge_summary.json"), &summary)?;
    Ok(RunOutcome {
        outputs: vec!["converge.csv".into(), "converge_summary.json".into()],
        n_max: Some(n_max),
        failure: None,
    })
}

fn fields(c: &FieldsConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let points = c.sample_points()?;
    let mut n_used = None;
    let samples = match c.space {
        FieldSpace::Ideal => {
            let bg = BackgroundField::from_boundary(&c.boundary, c.scenario.omega)?;
            eval_batch(&points, |x| eval_ideal_exterior(&bg, x))
        }
        space => {
            let n_src = resolve_n_max(c.n_max, &c.source, &c.scenario, c.truncation_tol)?;
            let n_max = n_src.max(c.boundary.max_order());
            n_used = Some(n_max);
            let sol = ModalSolution::solve(&c.scenario.with_rho(c.rho)?, &c.source.truncated(n_src), &c.boundary, n_max)?;
            if space == FieldSpace::Physical {
                eval_batch(&points, |x| eval_physical(&sol, x))
            } else {
                eval_batch(&points, |y| eval_virtual_exterior(&sol, y))
            }
        }
    };
    let mut header = vec!["x", "y", "z"];
    let names = [
        "ex_re", "ex_im", "ey_re", "ey_im", "ez_re", "ez_im", "hx_re", "hx_im", "hy_re", "hy_im", "hz_re", "hz_im",
    ];
    header.extend(names);
    let mut table = CsvTable::new(&header);
    for s in samples {
        let s = s?;
        let mut row: Vec<String> = s.point.iter().map(|v| fmt_f64(*v)).collect();
        for z in s.e.iter().chain(s.h.iter()) {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        table.push(row);
    }
    table.write(&out.join("fields.csv"))?;
    Ok(RunOutcome { outputs: vec!["fields.csv".into()], n_max: n_used, failure: None })
}

#[derive(Debug, Clone, Serialize)]
pub struct HalfspaceSummary {
    pub mass_exponent: Option<f64>,
    pub mass_prefactor: Option<f64>,
    /// Fitted order of `|h^sc/h^in + 1|` over the evanescent rows.
    pub reflection_order: Option<f64>,
}

fn halfspace(c: &HalfspaceConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let base = c.base()?;
    let study = halfspace_limit_study(&base, &c.rhos, &c.test_function, c.tol)?;
    let mut table = CsvTable::new(&[
        "rho",
        "evanescent",
        "h_plus_re",
        "h_plus_im",
        "h_sc_re",
        "h_sc_im",
        "abs_reflection",
        "transmitted_mass_re",
        "transmitted_mass_im",
        "reflected_pairing_re",
        "reflected_pairing_im",
        "transmitted_pairing_re",
        "transmitted_pairing_im",
    ]);
    let mut refl = (Vec::new(), Vec::new());
    for r in &study.rows {
        let ratio = r.h_sc / base.hin;
        if r.evanescent {
            refl.0.push(r.rho);
            refl.1.push((ratio + 1.0).norm());
        }
        let mass = r.transmitted_mass.map_or([String::new(), String::new()], |m| [fmt_f64(m.re), fmt_f64(m.im)]);
        let [mr, mi] = mass;
        table.push(vec![
            fmt_f64(r.rho),
            (r.evanescent as u8).to_string(),
            fmt_f64(r.h_plus.re),
            fmt_f64(r.h_plus.im),
            fmt_f64(r.h_sc.re),
            fmt_f64(r.h_sc.im),
            fmt_f64(ratio.norm()),
            mr,
            mi,
            fmt_f64(r.reflected_pairing.re),
            fmt_f64(r.reflected_pairing.im),
            fmt_f64(r.transmitted_pairing.re),
            fmt_f64(r.transmitted_pairing.im),
        ]);
    }
    table.write(&out.join("halfspace.csv"))?;
    let summary = HalfspaceSummary {
        mass_exponent: study.mass_exponent,
        mass_prefactor: study.mass_prefactor,
        reflection_order: fit_power_law(&refl.0, &refl.1).map(|f| f.0),
    };
    write_json(&out.join("halfspace_summary.json"), &summary)?;
    Ok(RunOutcome {
        outputs: vec!["halfspace.csv".into(), "halfspace_summary.json".into()],
        n_max: None,
        failure: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub max_error: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SpecfunReport {
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

/// Maximum relative errors of the Wronskian `jy′ − j′y = t⁻²`, the
/// cross product `𝒥h − ℋj = −i/t`, and the three-term recurrence for `j`
/// and `y`, over `n ≤ n_max` on a log-spaced grid in `t`.
pub fn specfun_report(c: &SpecfunConfig) -> Result<SpecfunReport, CliError> {
    let ratio = (c.t_max / c.t_min).ln();
    let mut worst = [0.0f64; 4];
    for k in 0..c.points {
        let t = c.t_min * (ratio * k as f64 / (c.points - 1) as f64).exp();
        let b = BesselTable::new(c.n_max + 1, t)?;
        let inv_t = 1.0 / t;
        for n in 0..=c.n_max {
            let w = (b.j(n) * b.dy(n) - b.dj(n) * b.y(n)) * (t * t);
            worst[0] = worst[0].max((w.to_complex() - 1.0).norm());
            let cross = (b.jcal(n) * b.h(n) - b.hcal(n) * b.j(n)) * Complex64::new(0.0, t);
            worst[1] = worst[1].max((cross.to_complex() - 1.0).norm());
            if n >= 1 {
                for (f, slot) in [(0usize, 2usize), (1, 3)] {
                    let get = |m: usize| if f == 0 { b.j(m) } else { b.y(m) };
                    let centre = get(n) * ((2 * n + 1) as f64 * inv_t);
                    let resid = get(n - 1) + get(n + 1) - centre;
                    let scale = [get(n - 1), get(n + 1), centre].iter().map(ScaledComplex::abs).fold(0.0, f64::max);
                    worst[slot] = worst[slot].max(resid.abs() / scale);
                }
            }
        }
    }
    let names = ["wronskian j y' - j' y = 1/t^2", "cross product Jh - Hj = -i/t", "recurrence j", "recurrence y"];
    let checks: Vec<IdentityCheck> = names
        .iter()
        .zip(worst)
        .map(|(name, e)| IdentityCheck { identity: name.to_string(), max_error: e, tol: c.tol, passed: e <= c.tol })
        .collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(SpecfunReport { checks, passed })
}

fn check_specfun(c: &SpecfunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let report = specfun_report(c)?;
    write_json(&out.join("report.json"), &report)?;
    let failure = (!report.passed).then(|| "special-function identities failed; see report.json".to_string());
    Ok(RunOutcome { outputs: vec!["report.json".into()], n_max: Some(c.n_max), failure })
}
