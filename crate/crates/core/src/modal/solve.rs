use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rayon::prelude::*;

use super::tables::{BoundaryCoeffs, SourceCoeffs};
use super::transfer::{guarded_sum, transfer_from, RadialData, TransferSet, DENOMINATOR_FLOOR};
use crate::error::{CloakError, Result};
use crate::geometry::CloakParams;
use crate::harmonics::ModeIndex;
use crate::specfun::{BesselTable, ScaledComplex};

/// Field coefficients of one mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModeCoeffs {
    pub gamma: ScaledComplex,
    pub eta: ScaledComplex,
    pub c: ScaledComplex,
    pub d: ScaledComplex,
    pub alpha: ScaledComplex,
    pub beta: ScaledComplex,
}

impl ModeCoeffs {
    pub fn as_complex(&self) -> [Complex64; 6] {
        [self.gamma, self.eta, self.c, self.d, self.alpha, self.beta].map(|z| z.to_complex())
    }
}

/// Per-mode data entering the solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeData {
    pub p: Complex64,
    pub q: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
}

fn solve_with(t: &TransferSet, data: &RadialData, input: ModeData) -> Result<ModeCoeffs> {
    let n = t.n();
    let out = &data.outer;
    let (h2, j2, hc2, jc2) = (out.h(n), out.j(n), out.hcal(n), out.jcal(n));
    let p = ScaledComplex::from(input.p);
    let q = ScaledComplex::from(input.q);

    let (den_g, rel) = guarded_sum(&[t.t1() * h2, j2]);
    if rel < DENOMINATOR_FLOOR {
        return Err(CloakError::ExteriorResonance { n, polarization: "gamma", relative: rel });
    }
    let (den_e, rel) = guarded_sum(&[t.t3() * hc2, jc2]);
    if rel < DENOMINATOR_FLOOR {
        return Err(CloakError::ExteriorResonance { n, polarization: "eta", relative: rel });
    }
    let gamma = (ScaledComplex::from(input.f1) - p * t.t1p() * h2) / den_g;
    let eta = (ScaledComplex::from(input.f2 * 2.0) - t.t3p() * q * hc2) / den_e;
    Ok(ModeCoeffs {
        gamma,
        eta,
        c: t.t1() * gamma + t.t1p() * p,
        d: t.t3() * eta + t.t3p() * q,
        alpha: t.t2() * gamma + t.t2p() * p,
        beta: t.t4() * eta + t.t4p() * q,
    })
}

pub fn solve_mode(
    mode: ModeIndex,
    p: Complex64,
    q: Complex64,
    f1: Complex64,
    f2: Complex64,
    params: &CloakParams,
) -> Result<ModeCoeffs> {
    let data = RadialData::for_params(mode.n(), params)?;
    let t = transfer_from(mode.n(), params, &data)?;
    solve_with(&t, &data, ModeData { p, q, f1, f2 })
}

/// Relative residuals of the six scalar matching conditions (outer
/// boundary, electric transmission, magnetic transmission; two each),
/// recomputed from fresh Bessel tables.
pub fn system_residuals(n: usize, c: &ModeCoeffs, input: ModeData, params: &CloakParams) -> Result<[f64; 6]> {
    let w = params.omega();
    let k = params.k();
    let rho = params.rho();
    let ie = params.eps0().powf(-0.5);
    let im = params.mu0().powf(-0.5);
    let b2 = BesselTable::new(n, 2.0 * w)?;
    let br = BesselTable::new(n, w * rho)?;
    let bk = BesselTable::new(n, k * w)?;
    let p = ScaledComplex::from(input.p);
    let q = ScaledComplex::from(input.q);
    let f1 = ScaledComplex::from(input.f1);
    let f2 = ScaledComplex::from(input.f2 * 2.0);

    let res = |lhs: &[ScaledComplex]| guarded_sum(lhs).1;
    Ok([
        res(&[c.c * b2.h(n), c.gamma * b2.j(n), -f1]),
        res(&[c.d * b2.hcal(n), c.eta * b2.jcal(n), -f2]),
        res(&[
            c.c * br.h(n) * rho,
            c.gamma * br.j(n) * rho,
            -(c.alpha * bk.j(n) * ie),
            -(p * bk.h(n) * ie),
        ]),
        res(&[
            c.d * br.hcal(n),
            c.eta * br.jcal(n),
            -(c.beta * bk.jcal(n) * ie),
            -(q * bk.hcal(n) * ie),
        ]),
        res(&[
            c.c * br.hcal(n) * k,
            c.gamma * br.jcal(n) * k,
            -(c.alpha * bk.jcal(n) * im),
            -(p * bk.hcal(n) * im),
        ]),
        res(&[
            c.d * br.h(n) * rho,
            c.eta * br.j(n) * rho,
            -(c.beta * bk.j(n) * (im * k)),
            -(q * bk.h(n) * (im * k)),
        ]),
    ])
}

/// All field coefficients for one `ρ`.
#[derive(Debug, Clone)]
pub struct ModalSolution {
    params: CloakParams,
    source: SourceCoeffs,
    boundary: BoundaryCoeffs,
    modes: BTreeMap<ModeIndex, ModeCoeffs>,
}

impl ModalSolution {
    /// Solves every mode of the source truncated at `n_max` together with
    /// every boundary mode. Orders are solved in parallel; the result does
    /// not depend on scheduling.
    pub fn solve(params: &CloakParams, source: &SourceCoeffs, boundary: &BoundaryCoeffs, n_max: usize) -> Result<Self> {
        let source = source.truncated(n_max);
        let modes: BTreeSet<ModeIndex> = source.modes().chain(boundary.modes()).collect();
        let top = modes.iter().map(|k| k.n()).max().unwrap_or(0);
        if top == 0 {
            return Ok(Self {
                params: *params,
                source,
                boundary: boundary.clone(),
                modes: BTreeMap::new(),
            });
        }
        let data = RadialData::for_params(top, params)?;
        let orders: Vec<usize> = modes.iter().map(|k| k.n()).collect::<BTreeSet<_>>().into_iter().collect();
        let transfers: Vec<TransferSet> = orders
            .par_iter()
            .map(|&n| transfer_from(n, params, &data))
            .collect::<Result<_>>()?;
        let by_order: BTreeMap<usize, TransferSet> = orders.iter().copied().zip(transfers).collect();
        let list: Vec<ModeIndex> = modes.into_iter().collect();
        let solved: Vec<ModeCoeffs> = list
            .par_iter()
            .map(|k| {
                let (p, q) = source.get(*k);
                let (f1, f2) = boundary.get(*k);
                solve_with(&by_order[&k.n()], &data, ModeData { p, q, f1, f2 })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            params: *params,
            source,
            boundary: boundary.clone(),
            modes: list.into_iter().zip(solved).collect(),
        })
    }

    pub fn params(&self) -> &CloakParams {
        &self.params
    }
    pub fn source(&self) -> &SourceCoeffs {
        &self.source
    }
    pub fn boundary(&self) -> &BoundaryCoeffs {
        &self.boundary
    }
    pub fn modes(&self) -> &BTreeMap<ModeIndex, ModeCoeffs> {
        &self.modes
    }
    pub fn get(&self, mode: ModeIndex) -> Option<&ModeCoeffs> {
        self.modes.get(&mode)
    }
    pub fn n_max(&self) -> usize {
        self.modes.keys().map(|k| k.n()).max().unwrap_or(0)
    }

    pub fn input(&self, mode: ModeIndex) -> ModeData {
        let (p, q) = self.source.get(mode);
        let (f1, f2) = self.boundary.get(mode);
        ModeData { p, q, f1, f2 }
    }

    /// Largest relative matching residual over all modes.
    pub fn max_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (k, c) in &self.modes {
            let r = system_residuals(k.n(), c, self.input(*k), &self.params)?;
            worst = r.iter().copied().fold(worst, f64::max);
        }
        Ok(worst)
    }
}
