//! Closed-form `ρ → 0` limits of the interior coefficients and of the
//! interface concentration of the exterior normal fields.

use num_complex::Complex64;

use super::tables::SourceCoeffs;
use super::transfer::RadialData;
use crate::error::Result;
use crate::geometry::Scenario;
use crate::harmonics::ModeIndex;
use crate::specfun::{gamma_half_int_scaled, BesselTable, ScaledComplex};

#[derive(Debug, Clone, Copy)]
pub struct LimitCoeffs {
    /// `β₀ = −hₙ(kω)/jₙ(kω) · q`
    pub beta0: ScaledComplex,
    /// `α₀ = −hₙ(kω)/jₙ(kω) · p`
    pub alpha0: ScaledComplex,
    /// `d(ρ) ≈ d_prefactor · ρ^{n+1}`
    pub d_prefactor: ScaledComplex,
    /// Strength of the electric normal concentration on `|x| = 1`.
    pub sigma: ScaledComplex,
    /// Strength of the magnetic normal concentration on `|x| = 1`.
    pub sigma_magnetic: ScaledComplex,
}

impl LimitCoeffs {
    pub fn beta0(&self) -> Complex64 {
        self.beta0.to_complex()
    }
    pub fn sigma(&self) -> Complex64 {
        self.sigma.to_complex()
    }
}

/// `𝒥h − ℋj` at `kω`, the Wronskian combination (`= −i/(kω)`).
fn wronskian(t: &BesselTable, n: usize) -> ScaledComplex {
    t.jcal(n) * t.h(n) - t.hcal(n) * t.j(n)
}

pub(crate) fn limit_from(n: usize, p: Complex64, q: Complex64, scenario: &Scenario, data: &RadialData) -> Result<LimitCoeffs> {
    data.check_interior(n)?;
    let t = &data.inner;
    let (j, h) = (t.j(n), t.h(n));
    let k = scenario.k();
    let w = scenario.omega();
    let nf = n as f64;
    let sqrt_mu = scenario.mu0().sqrt();
    let (p, q) = (ScaledComplex::from(p), ScaledComplex::from(q));
    let wr = wronskian(t, n);
    let ratio = h / j;

    // (ω/2)^{n+1} via its logarithm to stay in range for large n
    let half_w = ScaledComplex::from_log_real((nf + 1.0) * (0.5 * w).ln(), false);
    let d_prefactor = ScaledComplex::from(Complex64::new(0.0, 2.0 * std::f64::consts::PI.sqrt())) * wr * half_w * q
        / (gamma_half_int_scaled(n) * j * (k * nf / sqrt_mu));
    Ok(LimitCoeffs {
        beta0: -(ratio * q),
        alpha0: -(ratio * p),
        d_prefactor,
        sigma: wr * q * sqrt_mu / (j * k),
        sigma_magnetic: -(p / (j * (k * k * w * w * sqrt_mu))),
    })
}

pub fn limit_coeffs(mode: ModeIndex, p: Complex64, q: Complex64, scenario: &Scenario) -> Result<LimitCoeffs> {
    let data = RadialData::new(mode.n(), scenario, None)?;
    limit_from(mode.n(), p, q, scenario, &data)
}

/// Smallest `N` with `Σ_{n>N} S_n² (|p| + |q|) |hₙ(kω r₁)| < tol`, the
/// tail summed over all modes of the table.
pub fn truncation_order(source: &SourceCoeffs, scenario: &Scenario, tol: f64) -> Result<usize> {
    let n_max = source.max_order();
    if n_max == 0 {
        return Ok(0);
    }
    let table = BesselTable::new(n_max, scenario.k() * scenario.omega() * scenario.r1())?;
    let mut per_order = vec![0.0f64; n_max + 1];
    for (k, (p, q)) in source.iter() {
        let v = (table.h(k.n()) * ((p.norm() + q.norm()) * k.s_sq() as f64)).abs();
        per_order[k.n()] += v;
    }
    let mut tail = 0.0;
    for n in (0..=n_max).rev() {
        // tail currently holds Σ_{m>n}
        if tail >= tol {
            return Ok(n + 1);
        }
        tail += per_order[n];
    }
    Ok(0)
}
