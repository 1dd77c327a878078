//! Pointwise electromagnetic fields of a modal solution, in virtual and
//! physical space, and of the ideal (singular) cloak. Conventions:
//! `∇×E = iωμH`, `∇×H = −iωεE` away from the source.

use std::collections::BTreeMap;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CloakError, Result};
use crate::geometry::{pushforward_field, pushforward_tensor, CVec3, CloakParams, Point, RadialMap};
use crate::harmonics::{HarmonicTable, ModeIndex};
use crate::modal::{BoundaryCoeffs, ModalSolution};
use crate::specfun::{BesselTable, ScaledComplex};

const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Virtual,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: Point,
    pub e: CVec3,
    pub h: CVec3,
    pub space: Space,
}

impl FieldSample {
    pub fn is_finite(&self) -> bool {
        self.e.iter().chain(self.h.iter()).all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Radial amplitudes of one mode along `(V, U, Y x̂)` for `E` and `H`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Amplitudes {
    pub(crate) e: [Complex64; 3],
    pub(crate) h: [Complex64; 3],
}

fn c(z: ScaledComplex) -> Complex64 {
    z.to_complex()
}

/// Field of a combination `a M + b ∇×M + a' N + b' ∇×N` (wave number `κ`)
/// and its dual magnetic combination, evaluated at radius `r`:
///
/// ```text
/// E = a·M + b·∇×M + a'·N + b'·∇×N
/// H = (1/(iκ)) [κ² b M + a ∇×M + κ² b' N + a' ∇×N]
/// ```
pub(crate) fn amplitudes(
    mode: ModeIndex,
    kappa: f64,
    r: f64,
    table: &BesselTable,
    (a, b, a2, b2): (ScaledComplex, ScaledComplex, ScaledComplex, ScaledComplex),
) -> Amplitudes {
    let n = mode.n();
    let s = mode.s();
    let (j, h, jc, hc) = (table.j(n), table.h(n), table.jcal(n), table.hcal(n));
    let tang_ab = c(a * j + a2 * h);
    let tang_bb = c(b * j + b2 * h);
    let cal_b = c(b * jc + b2 * hc);
    let cal_a = c(a * jc + a2 * hc);
    let inv = Complex64::new(0.0, -1.0 / kappa);
    Amplitudes {
        e: [tang_ab * (-s), cal_b * (s / r), tang_bb * (s * s / r)],
        h: [
            inv * tang_bb * (-s * kappa * kappa),
            inv * cal_a * (s / r),
            inv * tang_ab * (s * s / r),
        ],
    }
}

fn assemble<'a>(
    dir: &Point,
    n_max: usize,
    terms: impl Iterator<Item = (ModeIndex, Amplitudes)> + 'a,
) -> Result<(CVec3, CVec3)> {
    let harm = HarmonicTable::new(n_max, dir)?;
    let xh = dir.map(|v| Complex64::new(v, 0.0));
    let (mut e, mut h) = (CVec3::zeros(), CVec3::zeros());
    for (mode, amp) in terms {
        let basis = harm.basis(mode);
        let radial = xh * basis.y;
        e += basis.v * amp.e[0] + basis.u * amp.e[1] + radial * amp.e[2];
        h += basis.v * amp.h[0] + basis.u * amp.h[1] + radial * amp.h[2];
    }
    Ok((e, h))
}

fn unit_dir(x: &Point) -> Result<(f64, Point)> {
    let r = x.norm();
    if r == 0.0 {
        return Err(CloakError::Singularity("field evaluated at the origin".into()));
    }
    Ok((r, x / r))
}

/// `(E⁺, H⁺)` on the virtual annulus `ρ ≤ |y| ≤ 2`.
pub fn eval_virtual_exterior(sol: &ModalSolution, y: &Point) -> Result<FieldSample> {
    let params = sol.params();
    let (r, dir) = unit_dir(y)?;
    if r < params.rho() * (1.0 - SLACK) || r > 2.0 + SLACK {
        return Err(CloakError::Domain(format!(
            "|y| = {r} outside the virtual annulus ({}, 2)",
            params.rho()
        )));
    }
    let (e, h) = if sol.modes().is_empty() {
        (CVec3::zeros(), CVec3::zeros())
    } else {
        let w = params.omega();
        let table = BesselTable::new(sol.n_max(), w * r)?;
        let terms = sol
            .modes()
            .iter()
            .map(|(k, co)| (*k, amplitudes(*k, w, r, &table, (co.gamma, co.eta, co.c, co.d))));
        assemble(&dir, sol.n_max(), terms)?
    };
    Ok(FieldSample { point: *y, e, h, space: Space::Virtual })
}

/// `(Ẽ⁻, H̃⁻)` in the cloaked shell `r₁ ≤ |x| < 1`.
pub fn eval_interior(sol: &ModalSolution, x: &Point) -> Result<FieldSample> {
    let params = sol.params();
    let (r, dir) = unit_dir(x)?;
    if r < params.r1() * (1.0 - SLACK) || r > 1.0 + SLACK {
        return Err(CloakError::Domain(format!("|x| = {r} outside the shell ({}, 1)", params.r1())));
    }
    let (e, h) = if sol.modes().is_empty() {
        (CVec3::zeros(), CVec3::zeros())
    } else {
        let kappa = params.k() * params.omega();
        let table = BesselTable::new(sol.n_max(), kappa * r)?;
        let terms = sol.modes().iter().map(|(k, co)| {
            let (p, q) = sol.source().get(*k);
            let amp = amplitudes(*k, kappa, r, &table, (co.alpha, co.beta, p.into(), q.into()));
            (*k, amp)
        });
        let (e, h) = assemble(&dir, sol.n_max(), terms)?;
        let se = Complex64::new(params.eps0().powf(-0.5), 0.0);
        // the magnetic prefactor is μ₀^{-1/2}/(ikω); amplitudes() supplied 1/(ikω)
        let sm = Complex64::new(params.mu0().powf(-0.5), 0.0);
        (e * se, h * sm)
    };
    Ok(FieldSample { point: *x, e, h, space: Space::Physical })
}

/// `(Ẽ, H̃)` at a physical point `r₁ ≤ |x| ≤ 2`, `|x| ≠ 1`.
pub fn eval_physical(sol: &ModalSolution, x: &Point) -> Result<FieldSample> {
    let r = x.norm();
    if r == 1.0 {
        return Err(CloakError::Interface);
    }
    if r > 2.0 + SLACK {
        return Err(CloakError::Domain(format!("|x| = {r} outside B_2")));
    }
    if r < 1.0 {
        return eval_interior(sol, x);
    }
    let map = sol.params().outer_map();
    let y = map.inverse(x)?;
    let v = eval_virtual_exterior(sol, &y)?;
    Ok(FieldSample {
        point: *x,
        e: pushforward_field(&map, &y, &v.e)?,
        h: pushforward_field(&map, &y, &v.h)?,
        space: Space::Physical,
    })
}

/// Source-free solution in the unit-medium ball `B₂` with tangential data
/// `f` on `∂B₂`; the field the ideal cloak shows outside `B₁`.
#[derive(Debug, Clone)]
pub struct BackgroundField {
    omega: f64,
    modes: BTreeMap<ModeIndex, (ScaledComplex, ScaledComplex)>,
}

impl BackgroundField {
    /// `γ₀ = f⁽¹⁾/jₙ(2ω)`, `η₀ = 2f⁽²⁾/𝒥ₙ(2ω)`.
    pub fn from_boundary(boundary: &BoundaryCoeffs, omega: f64) -> Result<Self> {
        let n_max = boundary.max_order();
        let mut modes = BTreeMap::new();
        if n_max > 0 {
            let t = BesselTable::new(n_max, 2.0 * omega)?;
            for (k, (f1, f2)) in boundary.iter() {
                let n = k.n();
                let (j, jc) = (t.j(n), t.jcal(n));
                let dj = t.dj(n) * (2.0 * omega);
                for (val, which, other) in [(j, "gamma", dj), (jc, "eta", t.j(n - 1) * (2.0 * omega))] {
                    let rel = crate::modal::transfer::relative_to(val, &[val, other]);
                    if rel < crate::modal::DENOMINATOR_FLOOR {
                        return Err(CloakError::ExteriorResonance { n, polarization: which, relative: rel });
                    }
                }
                modes.insert(k, (ScaledComplex::from(f1) / j, ScaledComplex::from(f2 * 2.0) / jc));
            }
        }
        Ok(Self { omega, modes })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coefficients(&self) -> &BTreeMap<ModeIndex, (ScaledComplex, ScaledComplex)> {
        &self.modes
    }

    fn n_max(&self) -> usize {
        self.modes.keys().map(|k| k.n()).max().unwrap_or(0)
    }

    /// `(E, H)` at `0 < |y| ≤ 2`.
    pub fn eval(&self, y: &Point) -> Result<FieldSample> {
        let (r, dir) = unit_dir(y)?;
        if r > 2.0 + SLACK {
            return Err(CloakError::Domain(format!("|y| = {r} outside B_2")));
        }
        let (e, h) = if self.modes.is_empty() {
            (CVec3::zeros(), CVec3::zeros())
        } else {
            let table = BesselTable::new(self.n_max(), self.omega * r)?;
            let z = ScaledComplex::ZERO;
            let terms = self
                .modes
                .iter()
                .map(|(k, (g, e))| (*k, amplitudes(*k, self.omega, r, &table, (*g, *e, z, z))));
            assemble(&dir, self.n_max(), terms)?
        };
        Ok(FieldSample { point: *y, e, h, space: Space::Virtual })
    }
}

/// `(F₁)_*` of the background field at `1 < |x| ≤ 2`.
pub fn eval_ideal_exterior(bg: &BackgroundField, x: &Point) -> Result<FieldSample> {
    let r = x.norm();
    if !(r > 1.0) || r > 2.0 + SLACK {
        return Err(CloakError::Domain(format!("|x| = {r} outside the cloaking layer (1, 2]")));
    }
    let map = RadialMap::Singular;
    let y = map.inverse(x)?;
    let v = bg.eval(&y)?;
    Ok(FieldSample {
        point: *x,
        e: pushforward_field(&map, &y, &v.e)?,
        h: pushforward_field(&map, &y, &v.h)?,
        space: Space::Physical,
    })
}

/// `F₁_* I` at a physical point of the cloaking layer.
pub fn ideal_material(x: &Point) -> Result<Matrix3<f64>> {
    let y = RadialMap::Singular.inverse(x)?;
    Ok(pushforward_tensor(&RadialMap::Singular, &y, &Matrix3::identity())?.tensor)
}

/// Evaluates `f` at every point in parallel, preserving order.
pub fn eval_batch<F>(points: &[Point], f: F) -> Vec<Result<FieldSample>>
where
    F: Fn(&Point) -> Result<FieldSample> + Sync + Send,
{
    points.par_iter().map(f).collect()
}

/// Central-difference curl of a vector field.
pub fn fd_curl<F>(f: F, x: &Point, h: f64) -> Result<CVec3>
where
    F: Fn(&Point) -> Result<CVec3>,
{
    let mut d = [CVec3::zeros(); 3];
    for (j, dj) in d.iter_mut().enumerate() {
        let mut e = Point::zeros();
        e[j] = h;
        *dj = (f(&(x + e))? - f(&(x - e))?) / Complex64::new(2.0 * h, 0.0);
    }
    Ok(CVec3::new(d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]))
}

/// Relative Maxwell residuals at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellResidual {
    /// `|∇×E − iωμH| / |iωμH|`
    pub faraday: f64,
    /// `|∇×H + iωεE| / |iωεE|`
    pub ampere: f64,
}

/// FD-curl check of both Maxwell equations with step `h_rel·|x|`.
pub fn maxwell_residual<F, M>(eval: F, material: M, omega: f64, x: &Point, h_rel: f64) -> Result<MaxwellResidual>
where
    F: Fn(&Point) -> Result<FieldSample>,
    M: Fn(&Point) -> Result<(Matrix3<f64>, Matrix3<f64>)>,
{
    let h = h_rel * x.norm();
    let here = eval(x)?;
    let (eps, mu) = material(x)?;
    let to_c = |m: Matrix3<f64>| m.map(|v| Complex64::new(v, 0.0));
    let iw = Complex64::new(0.0, omega);
    let curl_e = fd_curl(|p| eval(p).map(|s| s.e), x, h)?;
    let curl_h = fd_curl(|p| eval(p).map(|s| s.h), x, h)?;
    let rhs_f = to_c(mu) * here.h * iw;
    let rhs_a = -(to_c(eps) * here.e * iw);
    Ok(MaxwellResidual {
        faraday: (curl_e - rhs_f).norm() / rhs_f.norm().max(f64::MIN_POSITIVE),
        ampere: (curl_h - rhs_a).norm() / rhs_a.norm().max(f64::MIN_POSITIVE),
    })
}

/// Material pair `(ε̃, μ̃)` of the regularized cloak at a physical point.
pub fn cloak_material(params: &CloakParams, x: &Point) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    Ok((params.permittivity(x)?, params.permeability(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Scenario;
    use crate::modal::SourceCoeffs;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dipole_solution(rho: f64, eps0: f64, mu0: f64) -> ModalSolution {
        let p = CloakParams::new(Scenario::new(1.0, eps0, mu0, 0.5).unwrap(), rho).unwrap();
        let mut src = SourceCoeffs::new();
        src.insert(ModeIndex::new(1, 0).unwrap(), z(0.0, 0.0), z(1.0, 0.0)).unwrap();
        src.insert(ModeIndex::new(2, 1).unwrap(), z(0.3, -0.2), z(0.0, 0.5)).unwrap();
        let bnd = BoundaryCoeffs::single(ModeIndex::new(1, -1).unwrap(), z(0.2, 0.0), z(0.0, 0.1)).unwrap();
        ModalSolution::solve(&p, &src, &bnd, 10).unwrap()
    }

    #[test]
    fn zero_solution_gives_zero_fields() {
        let p = CloakParams::new(Scenario::new(1.0, 1.0, 1.0, 0.5).unwrap(), 0.1).unwrap();
        let sol = ModalSolution::solve(&p, &SourceCoeffs::new(), &BoundaryCoeffs::new(), 0).unwrap();
        for x in [Point::new(0.0, 0.3, 1.2), Point::new(0.7, 0.0, 0.0)] {
            let s = eval_physical(&sol, &x).unwrap();
            assert_eq!(s.e, CVec3::zeros());
            assert_eq!(s.h, CVec3::zeros());
        }
    }

    #[test]
    fn domain_and_interface_errors() {
        let sol = dipole_solution(0.1, 1.0, 1.0);
        assert!(matches!(eval_physical(&sol, &Point::new(1.0, 0.0, 0.0)), Err(CloakError::Interface)));
        assert!(matches!(eval_physical(&sol, &Point::new(0.2, 0.0, 0.0)), Err(CloakError::Domain(_))));
        assert!(matches!(eval_virtual_exterior(&sol, &Point::new(0.05, 0.0, 0.0)), Err(CloakError::Domain(_))));
        let bg = BackgroundField::from_boundary(sol.boundary(), 1.0).unwrap();
        assert!(matches!(eval_ideal_exterior(&bg, &Point::new(0.0, 0.9, 0.0)), Err(CloakError::Domain(_))));
    }

    #[test]
    fn maxwell_holds_in_every_region() {
        let sol = dipole_solution(0.1, 1.7, 0.8);
        let params = *sol.params();
        let unit = |_: &Point| Ok((Matrix3::identity(), Matrix3::identity()));
        for y in [Point::new(0.3, 0.2, -0.5), Point::new(-1.1, 0.4, 0.9)] {
            let r = maxwell_residual(|p| eval_virtual_exterior(&sol, p), unit, 1.0, &y, 1e-4).unwrap();
            assert!(r.faraday < 1e-6 && r.ampere < 1e-6, "{r:?}");
        }
        for x in [Point::new(0.5, 0.4, 0.2), Point::new(1.2, -0.3, 0.6), Point::new(0.1, 1.6, -0.7)] {
            let r = maxwell_residual(|p| eval_physical(&sol, p), |p| cloak_material(&params, p), 1.0, &x, 1e-4).unwrap();
            assert!(r.faraday < 1e-6 && r.ampere < 1e-6, "{x} {r:?}");
        }
    }

    #[test]
    fn tangential_continuity_across_interface() {
        let sol = dipole_solution(0.1, 1.0, 1.0);
        for dir in [Point::new(0.6, 0.0, 0.8), Point::new(-0.48, 0.6, 0.64)] {
            let dir: Point = dir.normalize();
            let inside = eval_physical(&sol, &(dir * (1.0 - 1e-8))).unwrap();
            let outside = eval_physical(&sol, &(dir * (1.0 + 1e-8))).unwrap();
            let xh = dir.map(|v| z(v, 0.0));
            let scale = inside.e.norm().max(outside.e.norm());
            assert!((xh.cross(&inside.e) - xh.cross(&outside.e)).norm() < 1e-6 * scale);
            let scale = inside.h.norm().max(outside.h.norm());
            assert!((xh.cross(&inside.h) - xh.cross(&outside.h)).norm() < 1e-6 * scale);
        }
    }

    #[test]
    fn interior_normal_component_formula() {
        let sol = dipole_solution(0.05, 2.0, 0.5);
        let params = sol.params();
        let x = Point::new(0.3, -0.4, 0.5);
        let r = x.norm();
        let dir = x / r;
        let s = eval_physical(&sol, &x).unwrap();
        let kw = params.k() * params.omega();
        let mut expected = z(0.0, 0.0);
        for (k, co) in sol.modes() {
            let (_, q) = sol.source().get(*k);
            let b = BesselTable::new(k.n(), kw * r).unwrap();
            let radial = (co.beta * b.j(k.n()) + ScaledComplex::from(q) * b.h(k.n())).to_complex();
            expected += radial * (k.s_sq() as f64 / r) * crate::harmonics::scalar_y(*k, &dir).unwrap();
        }
        expected /= params.eps0().sqrt();
        let got = dir.map(|v| z(v, 0.0)).dot(&s.e);
        assert!((got - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn physical_exterior_is_pushforward_of_virtual() {
        let sol = dipole_solution(0.2, 1.0, 1.0);
        let map = sol.params().outer_map();
        let x = Point::new(0.9, 0.8, -0.7);
        let y = map.inverse(&x).unwrap();
        let v = eval_virtual_exterior(&sol, &y).unwrap();
        let p = eval_physical(&sol, &x).unwrap();
        assert!((p.e - pushforward_field(&map, &y, &v.e).unwrap()).norm() <= 1e-12 * p.e.norm());
    }

    #[test]
    fn single_mode_has_no_other_azimuthal_content() {
        let p = CloakParams::new(Scenario::new(1.0, 1.0, 1.0, 0.5).unwrap(), 0.1).unwrap();
        let src = SourceCoeffs::single(ModeIndex::new(1, 0).unwrap(), z(0.0, 0.0), z(1.0, 0.0)).unwrap();
        let sol = ModalSolution::solve(&p, &src, &BoundaryCoeffs::new(), 1).unwrap();
        // project x̂·E on e^{imφ} around a latitude circle
        let r = 0.8;
        let nphi = 32;
        for m in [1i32, 2, -1] {
            let mut acc = z(0.0, 0.0);
            let mut scale = 0.0f64;
            for k in 0..nphi {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / nphi as f64;
                let dir = Point::new(0.6 * phi.cos(), 0.6 * phi.sin(), 0.8);
                let e = eval_virtual_exterior(&sol, &(dir * r)).unwrap().e;
                let radial = dir.map(|v| z(v, 0.0)).dot(&e);
                scale = scale.max(radial.norm());
                acc += radial * Complex64::from_polar(1.0, -(m as f64) * phi) / nphi as f64;
            }
            assert!(acc.norm() < 1e-10 * scale, "m={m}");
        }
    }

    #[test]
    fn ideal_exterior_behaviour() {
        let bnd = BoundaryCoeffs::single(ModeIndex::new(1, 1).unwrap(), z(1.0, 0.0), z(0.5, 0.5)).unwrap();
        let bg = BackgroundField::from_boundary(&bnd, 1.0).unwrap();
        let dir = Point::new(0.0, 0.6, 0.8);
        // tangential data on |x| = 2 are untouched (the radial stretch there is 1/2)
        let xh = dir.map(|v| z(v, 0.0));
        let s = eval_ideal_exterior(&bg, &(dir * 2.0)).unwrap();
        let b = bg.eval(&(dir * 2.0)).unwrap();
        for (u, v) in [(s.e, b.e), (s.h, b.h)] {
            assert!((xh.cross(&u) - xh.cross(&v)).norm() < 1e-13 * v.norm());
        }
        // tangential field vanishes linearly at the interface
        let deltas = [1e-4, 1e-3, 1e-2];
        let t: Vec<f64> = deltas
            .iter()
            .map(|d| xh.cross(&eval_ideal_exterior(&bg, &(dir * (1.0 + d))).unwrap().e).norm())
            .collect();
        let slope = (t[2] / t[0]).ln() / (deltas[2] / deltas[0]).ln();
        assert!((slope - 1.0).abs() < 0.1, "{slope}");
        // Maxwell with the singular medium away from the interface
        let mat = |p: &Point| ideal_material(p).map(|m| (m, m));
        for x in [Point::new(0.3, 1.1, 0.5), Point::new(-1.5, 0.2, 0.4)] {
            let r = maxwell_residual(|p| eval_ideal_exterior(&bg, p), mat, 1.0, &x, 1e-4).unwrap();
            assert!(r.faraday < 1e-6 && r.ampere < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn fd_residual_converges_at_second_order() {
        let sol = dipole_solution(0.1, 1.0, 1.0);
        let params = *sol.params();
        let x = Point::new(0.9, -0.6, 0.7);
        let res: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&h| {
                maxwell_residual(|p| eval_physical(&sol, p), |p| cloak_material(&params, p), 1.0, &x, h)
                    .unwrap()
                    .faraday
            })
            .collect();
        for k in 0..2 {
            let order = (res[k] / res[k + 1]).log2();
            assert!((order - 2.0).abs() < 0.2, "{order}");
        }
    }
}
