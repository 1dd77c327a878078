//! TM plane wave hitting the anisotropic half-space `x > 0` with
//! `ε⁺ = μ⁺ = diag(2ρ², 2, 2)`, vacuum for `x < 0`. `H = h(x, z) ŷ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CloakError, Result};
use crate::quadrature::{adaptive, composite_doubling};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceParams {
    pub omega: f64,
    pub kz: f64,
    pub rho: f64,
    #[serde(default = "unit_amplitude")]
    pub hin: Complex64,
}

fn unit_amplitude() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl HalfspaceParams {
    pub fn new(omega: f64, kz: f64, rho: f64, hin: Complex64) -> Result<Self> {
        let p = Self { omega, kz, rho, hin };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(CloakError::InvalidInput(format!("omega = {} must be positive", self.omega)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(CloakError::InvalidInput(format!("rho = {} must be positive", self.rho)));
        }
        if !(self.kz > 0.0 && self.kz < self.omega) {
            return Err(CloakError::Domain(format!(
                "kz = {} outside (0, omega): no propagating incidence",
                self.kz
            )));
        }
        if !(self.hin.re.is_finite() && self.hin.im.is_finite()) {
            return Err(CloakError::InvalidInput("non-finite incident amplitude".into()));
        }
        Ok(())
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.omega, self.kz, rho, self.hin)
    }

    /// `4ω² < kz²/ρ²`: the transmitted wave decays.
    pub fn is_evanescent(&self) -> bool {
        4.0 * self.omega * self.omega < (self.kz / self.rho).powi(2)
    }

    /// `(ε_x, ε_z)` (equal to `(μ_x, μ_z)`) on the side `x > 0` or `x < 0`.
    fn eps_xz(&self, right: bool) -> (f64, f64) {
        if right {
            (2.0 * self.rho * self.rho, 2.0)
        } else {
            (1.0, 1.0)
        }
    }

    fn mu_y(&self, right: bool) -> f64 {
        if right {
            2.0
        } else {
            1.0
        }
    }
}

/// `(k_x⁻, k_x⁺)`, the latter on the branch with `Im k_x⁺ ≥ 0`.
pub fn dispersion_kx(p: &HalfspaceParams) -> Result<(f64, Complex64)> {
    p.validate()?;
    let minus = (p.omega * p.omega - p.kz * p.kz).sqrt();
    let radicand = 4.0 * p.omega * p.omega - (p.kz / p.rho).powi(2);
    let plus = if radicand < 0.0 {
        Complex64::new(0.0, (-radicand).sqrt())
    } else {
        Complex64::new(radicand.sqrt(), 0.0)
    };
    Ok((minus, plus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub kx_minus: f64,
    pub kx_plus: Complex64,
    pub h_plus: Complex64,
    pub h_sc: Complex64,
}

impl Amplitudes {
    /// `t(ρ) = Im k_x⁺`.
    pub fn decay_rate(&self) -> f64 {
        self.kx_plus.im
    }
}

pub fn solve_amplitudes(p: &HalfspaceParams) -> Result<Amplitudes> {
    let (km, kp) = dispersion_kx(p)?;
    let den = 2.0 * km + kp;
    if den.norm() <= f64::EPSILON * (2.0 * km + kp.norm()) {
        return Err(CloakError::Singularity("degenerate matching: 2 kx- + kx+ = 0".into()));
    }
    let ratio = 4.0 * km / den;
    Ok(Amplitudes {
        kx_minus: km,
        kx_plus: kp,
        h_plus: ratio * p.hin,
        h_sc: -(1.0 - ratio) * p.hin,
    })
}

/// `h` and `(∂h/∂x, ∂h/∂z)` from the side `x > 0` (`right`) or `x < 0`.
fn h_side(p: &HalfspaceParams, a: &Amplitudes, x: f64, z: f64, right: bool) -> (Complex64, Complex64, Complex64) {
    let i = Complex64::i();
    let phase_z = (i * p.kz * z).exp();
    if right {
        let h = a.h_plus * (i * a.kx_plus * x).exp() * phase_z;
        (h, i * a.kx_plus * h, i * p.kz * h)
    } else {
        let inc = p.hin * (i * a.kx_minus * x).exp() * phase_z;
        let sc = a.h_sc * (-i * a.kx_minus * x).exp() * phase_z;
        (inc + sc, i * a.kx_minus * (inc - sc), i * p.kz * (inc + sc))
    }
}

fn h_with_grad(p: &HalfspaceParams, a: &Amplitudes, x: f64, z: f64) -> (Complex64, Complex64, Complex64) {
    h_side(p, a, x, z, x >= 0.0)
}

/// `H_y(x, z)`.
pub fn eval_h_halfspace(p: &HalfspaceParams, x: f64, z: f64) -> Result<Complex64> {
    let a = solve_amplitudes(p)?;
    Ok(h_with_grad(p, &a, x, z).0)
}

/// `(E_x, E_z)` with `E_x = −(i/ω) ε_x⁻¹ ∂h/∂z`, `E_z = (i/ω) ε_z⁻¹ ∂h/∂x`.
pub fn eval_e_halfspace(p: &HalfspaceParams, x: f64, z: f64) -> Result<(Complex64, Complex64)> {
    let a = solve_amplitudes(p)?;
    let (_, hx, hz) = h_with_grad(p, &a, x, z);
    let (ex, ez) = p.eps_xz(x >= 0.0);
    let iw = Complex64::new(0.0, 1.0 / p.omega);
    Ok((-iw * hz / ex, iw * hx / ez))
}

/// Relative jumps of `h` and `E_z` across `x = 0` at height `z`.
pub fn transmission_residuals(p: &HalfspaceParams, z: f64) -> Result<(f64, f64)> {
    let a = solve_amplitudes(p)?;
    let iw = Complex64::new(0.0, 1.0 / p.omega);
    let (hl, hxl, _) = h_side(p, &a, 0.0, z, false);
    let (hr, hxr, _) = h_side(p, &a, 0.0, z, true);
    let (ezl, ezr) = (iw * hxl / p.eps_xz(false).1, iw * hxr / p.eps_xz(true).1);
    let rel = |u: Complex64, v: Complex64| (u - v).norm() / u.norm().max(v.norm()).max(f64::MIN_POSITIVE);
    Ok((rel(hl, hr), rel(ezl, ezr)))
}

/// `μ_y⁻¹[∂ₓ(ε_z⁻¹ ∂ₓh) + ∂_z(ε_x⁻¹ ∂_z h)] + ω²h` by central differences,
/// relative to `ω²|h|`. The stencil must stay on one side of `x = 0`.
pub fn pde_residual(p: &HalfspaceParams, x: f64, z: f64, step: f64) -> Result<f64> {
    if x != 0.0 && step >= x.abs() {
        return Err(CloakError::InvalidInput("stencil crosses the interface".into()));
    }
    let a = solve_amplitudes(p)?;
    let right = x > 0.0;
    let (ex, ez) = p.eps_xz(right);
    let h = |x: f64, z: f64| h_with_grad(p, &a, x, z).0;
    let c = h(x, z);
    let dxx = (h(x + step, z) - 2.0 * c + h(x - step, z)) / (step * step);
    let dzz = (h(x, z + step) - 2.0 * c + h(x, z - step)) / (step * step);
    let res = (dxx / ez + dzz / ex) / p.mu_y(right) + p.omega * p.omega * c;
    Ok(res.norm() / (p.omega * p.omega * c.norm()))
}

/// One-dimensional test functions on the line `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LineTestFunction {
    /// `c (x − a)²(b − x)²` on `[a, b]`.
    Bump { a: f64, b: f64, scale: f64 },
    /// `c x (x − a)²(b − x)²` on `[a, b]`, vanishing at the origin.
    OddBump { a: f64, b: f64, scale: f64 },
}

impl LineTestFunction {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Bump { a, b, .. } | Self::OddBump { a, b, .. } => (a, b),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.support();
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(CloakError::InvalidInput(format!("test function support [{a}, {b}] is empty")));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a || x >= b {
            return 0.0;
        }
        let core = (x - a).powi(2) * (b - x).powi(2);
        match *self {
            Self::Bump { scale, .. } => scale * core,
            Self::OddBump { scale, .. } => scale * x * core,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceRow {
    pub rho: f64,
    pub evanescent: bool,
    pub h_plus: Complex64,
    pub h_sc: Complex64,
    /// `∫₀^∞ H(x, 0) dx = i h⁺/k_x⁺`, defined in the evanescent regime.
    pub transmitted_mass: Option<Complex64>,
    /// `∫_{x<0} H(x, 0) φ(x) dx`.
    pub reflected_pairing: Complex64,
    /// `∫_{x>0} H(x, 0) φ(x) dx`.
    pub transmitted_pairing: Complex64,
}

impl HalfspaceRow {
    pub fn pairing(&self) -> Complex64 {
        self.reflected_pairing + self.transmitted_pairing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStudy {
    pub rows: Vec<HalfspaceRow>,
    /// Least-squares fit `|mass| ≈ C ρ^s` over the evanescent rows.
    pub mass_exponent: Option<f64>,
    pub mass_prefactor: Option<f64>,
}

/// Log-log least-squares slope and prefactor.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((slope, (my - slope * mx).exp()))
}

/// `ρ`-sweep of the pairing `∫ H_ρ(x, 0) φ(x) dx`.
pub fn halfspace_limit_study(
    base: &HalfspaceParams,
    rhos: &[f64],
    phi: &LineTestFunction,
    tol: f64,
) -> Result<LimitStudy> {
    phi.validate()?;
    let (lo, hi) = phi.support();
    let mut rows = Vec::with_capacity(rhos.len());
    for &rho in rhos {
        let p = base.with_rho(rho)?;
        let a = solve_amplitudes(&p)?;
        let f = |x: f64| h_with_grad(&p, &a, x, 0.0).0 * phi.value(x);
        let reflected = if lo < 0.0 {
            adaptive(&f, lo, hi.min(0.0), tol, 1e-300)?
        } else {
            Complex64::new(0.0, 0.0)
        };
        let transmitted = if hi > 0.0 {
            let start = lo.max(0.0);
            // geometric panels clustered at the interface
            let mut breaks = vec![start];
            let mut width = 1e-3 / a.decay_rate().max(1.0);
            while breaks.last().unwrap() + width < hi {
                breaks.push(breaks.last().unwrap() + width);
                width *= 2.0;
            }
            breaks.push(hi);
            composite_doubling(&f, &breaks, f64::INFINITY, tol, 1e-300)?
        } else {
            Complex64::new(0.0, 0.0)
        };
        let evanescent = p.is_evanescent();
        rows.push(HalfspaceRow {
            rho,
            evanescent,
            h_plus: a.h_plus,
            h_sc: a.h_sc,
            transmitted_mass: evanescent.then(|| Complex64::i() * a.h_plus / a.kx_plus),
            reflected_pairing: reflected,
            transmitted_pairing: transmitted,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.transmitted_mass.map(|m| (r.rho, m.norm())))
        .unzip();
    let fit = fit_power_law(&xs, &ys);
    Ok(LimitStudy {
        rows,
        mass_exponent: fit.map(|f| f.0),
        mass_prefactor: fit.map(|f| f.1),
    })
}

/// `∫_{x<0} (e^{ik_x⁻x} − e^{−ik_x⁻x}) h^in φ(x) dx`, the standing-wave limit.
pub fn standing_wave_pairing(base: &HalfspaceParams, phi: &LineTestFunction, tol: f64) -> Result<Complex64> {
    let (km, _) = dispersion_kx(base)?;
    let (lo, hi) = phi.support();
    if lo >= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let i = Complex64::i();
    let f = |x: f64| ((i * km * x).exp() - (-i * km * x).exp()) * base.hin * phi.value(x);
    adaptive(&f, lo, hi.min(0.0), tol, 1e-300)
}
