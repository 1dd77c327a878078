//! Interface transfer coefficients: the interior coefficients and the inner
//! exterior ones in terms of the outer exterior ones and the source,
//!
//! ```text
//! c = t1 γ + t1' p,   α = t2 γ + t2' p,
//! d = t3 η + t3' q,   β = t4 η + t4' q.
//! ```

use crate::error::{CloakError, Result};
use crate::geometry::{CloakParams, Scenario};
use crate::specfun::{BesselTable, ScaledComplex};

/// Relative cancellation below which a sum counts as vanishing.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// `|jₙ(kω)|` relative to `|jₙ| + |kω jₙ'|` below which `ω` is treated as an
/// interior eigenfrequency for order `n`.
pub const INTERIOR_FLOOR: f64 = 1e-10;

/// `|x| / Σ|terms|`, evaluated in scaled arithmetic.
pub(crate) fn relative_to(x: ScaledComplex, terms: &[ScaledComplex]) -> f64 {
    let biggest = terms
        .iter()
        .copied()
        .filter(|t| !t.is_zero())
        .max_by(|a, b| a.log_mag().total_cmp(&b.log_mag()));
    match biggest {
        None => 0.0,
        Some(b) => {
            let denom: f64 = terms.iter().map(|t| (*t / b).abs()).sum();
            (x / b).abs() / denom
        }
    }
}

/// Sum of scaled terms with its cancellation ratio `|Σ| / Σ|terms|`.
pub(crate) fn guarded_sum(terms: &[ScaledComplex]) -> (ScaledComplex, f64) {
    let sum = terms.iter().fold(ScaledComplex::ZERO, |acc, t| acc + *t);
    (sum, relative_to(sum, terms))
}

/// Bessel data shared by every mode of one scenario (and one `ρ`).
#[derive(Debug, Clone)]
pub struct RadialData {
    /// argument `kω`
    pub inner: BesselTable,
    /// argument `2ω`
    pub outer: BesselTable,
    /// argument `ωρ`; absent for the `ρ → 0` problem
    pub virt: Option<BesselTable>,
}

impl RadialData {
    pub fn new(n_max: usize, scenario: &Scenario, rho: Option<f64>) -> Result<Self> {
        let w = scenario.omega();
        Ok(Self {
            inner: BesselTable::new(n_max, scenario.k() * w)?,
            outer: BesselTable::new(n_max, 2.0 * w)?,
            virt: rho.map(|r| BesselTable::new(n_max, w * r)).transpose()?,
        })
    }

    pub fn for_params(n_max: usize, params: &CloakParams) -> Result<Self> {
        Self::new(n_max, params.scenario(), Some(params.rho()))
    }

    /// Interior-resonance guard on `jₙ(kω)`.
    pub fn check_interior(&self, n: usize) -> Result<()> {
        let t = self.inner.arg();
        let j = self.inner.j(n);
        if relative_to(j, &[j, self.inner.dj(n) * t]) < INTERIOR_FLOOR {
            return Err(CloakError::InteriorResonance { n, magnitude: j.abs() });
        }
        Ok(())
    }
}

/// The eight transfer coefficients of one order and their two denominators.
#[derive(Debug, Clone, Copy)]
pub struct TransferSet {
    n: usize,
    t: [ScaledComplex; 4],
    tp: [ScaledComplex; 4],
    dn: ScaledComplex,
    dnp: ScaledComplex,
    params: CloakParams,
}

impl TransferSet {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn params(&self) -> &CloakParams {
        &self.params
    }
    pub fn t1(&self) -> ScaledComplex {
        self.t[0]
    }
    pub fn t2(&self) -> ScaledComplex {
        self.t[1]
    }
    pub fn t3(&self) -> ScaledComplex {
        self.t[2]
    }
    pub fn t4(&self) -> ScaledComplex {
        self.t[3]
    }
    pub fn t1p(&self) -> ScaledComplex {
        self.tp[0]
    }
    pub fn t2p(&self) -> ScaledComplex {
        self.tp[1]
    }
    pub fn t3p(&self) -> ScaledComplex {
        self.tp[2]
    }
    pub fn t4p(&self) -> ScaledComplex {
        self.tp[3]
    }
    pub fn dn(&self) -> ScaledComplex {
        self.dn
    }
    pub fn dnp(&self) -> ScaledComplex {
        self.dnp
    }
}

pub fn transfer_coeffs(n: usize, params: &CloakParams) -> Result<TransferSet> {
    if n == 0 {
        return Err(CloakError::InvalidInput("transfer coefficients need n >= 1".into()));
    }
    transfer_from(n, params, &RadialData::for_params(n, params)?)
}

/// Transfer coefficients from precomputed Bessel data (which must carry the
/// `ωρ` table for `params.rho()`).
pub fn transfer_from(n: usize, params: &CloakParams, data: &RadialData) -> Result<TransferSet> {
    data.check_interior(n)?;
    let virt = data
        .virt
        .as_ref()
        .ok_or_else(|| CloakError::InvalidInput("radial data lacks the ωρ table".into()))?;
    let rho = params.rho();
    let k = params.k();
    let ie = params.eps0().powf(-0.5);
    let im = params.mu0().powf(-0.5);

    let (jr, hr, jcr, hcr) = (virt.j(n), virt.h(n), virt.jcal(n), virt.hcal(n));
    let (jk, hk, jck, hck) = (data.inner.j(n), data.inner.h(n), data.inner.jcal(n), data.inner.hcal(n));

    let (dn, rel) = guarded_sum(&[hr * jck * (im * rho), -(hcr * jk * (ie * k))]);
    if rel < DENOMINATOR_FLOOR {
        return Err(CloakError::TransferResonance { n, which: "D_n", relative: rel });
    }
    let (dnp, rel) = guarded_sum(&[hr * jck * (ie * rho), -(hcr * jk * (im * k))]);
    if rel < DENOMINATOR_FLOOR {
        return Err(CloakError::TransferResonance { n, which: "D_n'", relative: rel });
    }

    // h𝒥 − ℋj at kω; the Wronskian makes this −i/(kω)
    let wk = hk * jck - hck * jk;

    let t1 = (jcr * jk * (ie * k) - jr * jck * (im * rho)) / dn;
    let t2 = (jcr * hr - jr * hcr) * (k * rho) / dn;
    let t3 = (jcr * jk * (im * k) - jr * jck * (ie * rho)) / dnp;
    let t4 = (jcr * hr - jr * hcr) * rho / dnp;

    let t1p = wk * (ie * im) / dn;
    let t2p = (hk * hcr * (ie * k) - hck * hr * (im * rho)) / dn;
    let t3p = wk / dnp;
    let t4p = (hk * hcr * (im * k) - hck * hr * (ie * rho)) / dnp;

    Ok(TransferSet {
        n,
        t: [t1, t2, t3, t4],
        tp: [t1p, t2p, t3p, t4p],
        dn,
        dnp,
        params: *params,
    })
}
