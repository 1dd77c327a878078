//! Radial transformation-optics maps, their Jacobians, and the induced
//! transformations of media, field 1-forms and current 2-forms.
//!
//! Every map here is radial, `x = g(|y|) ŷ`, so the Jacobian splits into a
//! radial stretch `g'(r)` along `ŷ` and a tangential stretch `g(r)/r`:
//!
//! ```text
//! DF(y) = g'(r) ŷŷᵀ + (g(r)/r) (I − ŷŷᵀ),     det DF = g'(r) (g(r)/r)²
//! ```

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{CloakError, Result};

pub type Point = Vector3<f64>;
pub type CVec3 = Vector3<Complex64>;

/// Cloak-independent part of a scenario: frequency, cloaked medium, and
/// source support radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    omega: f64,
    eps0: f64,
    mu0: f64,
    k: f64,
    r1: f64,
}

impl Scenario {
    pub fn new(omega: f64, eps0: f64, mu0: f64, r1: f64) -> Result<Self> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(omega) || !positive(eps0) || !positive(mu0) {
            return Err(CloakError::InvalidInput(format!(
                "omega, eps0, mu0 must be positive (got {omega}, {eps0}, {mu0})"
            )));
        }
        if !(r1 > 0.0 && r1 < 1.0) {
            return Err(CloakError::InvalidInput(format!(
                "source support radius r1 must lie in (0, 1), got {r1}"
            )));
        }
        Ok(Self {
            omega,
            eps0,
            mu0,
            k: (eps0 * mu0).sqrt(),
            r1,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn eps0(&self) -> f64 {
        self.eps0
    }
    pub fn mu0(&self) -> f64 {
        self.mu0
    }
    /// `k = (μ₀ε₀)^{1/2}`.
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
}

/// A scenario together with the regularization parameter `ρ` of the
/// approximate cloak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakParams {
    scenario: Scenario,
    rho: f64,
    a: f64,
    b: f64,
}

impl CloakParams {
    pub fn new(scenario: Scenario, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(CloakError::InvalidInput(format!(
                "regularization parameter rho must lie in (0, 1), got {rho}"
            )));
        }
        Ok(Self {
            scenario,
            rho,
            a: 2.0 * (1.0 - rho) / (2.0 - rho),
            b: 1.0 / (2.0 - rho),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    /// `a = 2(1−ρ)/(2−ρ)`.
    pub fn a(&self) -> f64 {
        self.a
    }
    /// `b = 1/(2−ρ)`.
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn omega(&self) -> f64 {
        self.scenario.omega
    }
    pub fn eps0(&self) -> f64 {
        self.scenario.eps0
    }
    pub fn mu0(&self) -> f64 {
        self.scenario.mu0
    }
    pub fn k(&self) -> f64 {
        self.scenario.k
    }
    pub fn r1(&self) -> f64 {
        self.scenario.r1
    }

    /// Outer branch `F_ρ⁽¹⁾`.
    pub fn outer_map(&self) -> RadialMap {
        RadialMap::RegularizedOuter {
            a: self.a,
            b: self.b,
            rho: self.rho,
        }
    }

    /// Inner branch `F_ρ⁽²⁾(y) = y/ρ`.
    pub fn inner_map(&self) -> RadialMap {
        RadialMap::RegularizedInner { rho: self.rho }
    }

    /// Physical permittivity tensor `ε̃_ρ(x)`. The permeability is the same
    /// with `μ₀` in the cloaked region.
    pub fn permittivity(&self, x: &Point) -> Result<Matrix3<f64>> {
        self.material(x, self.eps0())
    }

    pub fn permeability(&self, x: &Point) -> Result<Matrix3<f64>> {
        self.material(x, self.mu0())
    }

    fn material(&self, x: &Point, inner: f64) -> Result<Matrix3<f64>> {
        let r = x.norm();
        if r < 1.0 {
            Ok(Matrix3::identity() * inner)
        } else if r > 1.0 {
            let map = self.outer_map();
            let y = map.inverse(x)?;
            Ok(pushforward_tensor(&map, &y, &Matrix3::identity())?.tensor)
        } else {
            Err(CloakError::Interface)
        }
    }
}

/// The radial maps used by the construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialMap {
    Identity,
    /// `F₁(y) = (1 + |y|/2) ŷ`, `0 < |y| < 2`; blows the origin up to `∂B₁`.
    Singular,
    /// `F_ρ⁽¹⁾(y) = (a + b|y|) ŷ`, `ρ < |y| ≤ 2`.
    RegularizedOuter { a: f64, b: f64, rho: f64 },
    /// `F_ρ⁽²⁾(y) = y/ρ`, `|y| ≤ ρ`.
    RegularizedInner { rho: f64 },
}

const DOMAIN_SLACK: f64 = 1e-12;

impl RadialMap {
    fn check_domain(&self, r: f64) -> Result<()> {
        let ok = match *self {
            RadialMap::Identity => r > 0.0,
            RadialMap::Singular => r > 0.0 && r <= 2.0 + DOMAIN_SLACK,
            RadialMap::RegularizedOuter { rho, .. } => {
                r >= rho * (1.0 - DOMAIN_SLACK) && r <= 2.0 + DOMAIN_SLACK
            }
            RadialMap::RegularizedInner { rho } => r > 0.0 && r <= rho * (1.0 + DOMAIN_SLACK),
        };
        if ok {
            Ok(())
        } else if r == 0.0 {
            Err(CloakError::Singularity(
                "radial map evaluated at the origin".into(),
            ))
        } else {
            Err(CloakError::Domain(format!("|y| = {r} outside the domain of {self:?}")))
        }
    }

    /// `g(r)`.
    pub fn radius(&self, r: f64) -> f64 {
        match *self {
            RadialMap::Identity => r,
            RadialMap::Singular => 1.0 + 0.5 * r,
            RadialMap::RegularizedOuter { a, b, .. } => a + b * r,
            RadialMap::RegularizedInner { rho } => r / rho,
        }
    }

    /// `g'(r)`.
    pub fn radial_stretch(&self, _r: f64) -> f64 {
        match *self {
            RadialMap::Identity => 1.0,
            RadialMap::Singular => 0.5,
            RadialMap::RegularizedOuter { b, .. } => b,
            RadialMap::RegularizedInner { rho } => 1.0 / rho,
        }
    }

    /// `g(r)/r`.
    pub fn tangential_stretch(&self, r: f64) -> f64 {
        match *self {
            RadialMap::RegularizedInner { rho } => 1.0 / rho,
            RadialMap::Identity => 1.0,
            _ => self.radius(r) / r,
        }
    }

    /// Inverse radius `g⁻¹(R)`.
    pub fn inverse_radius(&self, big_r: f64) -> f64 {
        match *self {
            RadialMap::Identity => big_r,
            RadialMap::Singular => 2.0 * (big_r - 1.0),
            RadialMap::RegularizedOuter { a, b, .. } => (big_r - a) / b,
            RadialMap::RegularizedInner { rho } => rho * big_r,
        }
    }

    pub fn apply(&self, y: &Point) -> Result<Point> {
        let r = y.norm();
        self.check_domain(r)?;
        Ok(y * (self.radius(r) / r))
    }

    pub fn inverse(&self, x: &Point) -> Result<Point> {
        let big_r = x.norm();
        if big_r == 0.0 {
            return Err(CloakError::Singularity("inverse map at the origin".into()));
        }
        let r = self.inverse_radius(big_r);
        if !(r > 0.0) {
            return Err(CloakError::Domain(format!(
                "|x| = {big_r} outside the range of {self:?}"
            )));
        }
        self.check_domain(r)?;
        Ok(x * (r / big_r))
    }

    /// Analytic Jacobian `DF(y)`.
    pub fn jacobian(&self, y: &Point) -> Result<Matrix3<f64>> {
        let r = y.norm();
        self.check_domain(r)?;
        let yhat = y / r;
        let radial = yhat * yhat.transpose();
        let tangential = Matrix3::identity() - radial;
        Ok(radial * self.radial_stretch(r) + tangential * self.tangential_stretch(r))
    }

    pub fn jacobian_det(&self, y: &Point) -> Result<f64> {
        let r = y.norm();
        self.check_domain(r)?;
        let s = self.tangential_stretch(r);
        Ok(self.radial_stretch(r) * s * s)
    }

    /// `DF(y)^{-T}`; symmetric for radial maps.
    fn jacobian_inv_t(&self, y: &Point) -> Result<Matrix3<f64>> {
        let r = y.norm();
        self.check_domain(r)?;
        let (gr, gt) = (self.radial_stretch(r), self.tangential_stretch(r));
        if !(gr > 0.0 && gt > 0.0 && gr.is_finite() && gt.is_finite()) {
            return Err(CloakError::DegenerateMap(format!("Jacobian singular at |y| = {r}")));
        }
        let yhat = y / r;
        let radial = yhat * yhat.transpose();
        Ok(radial / gr + (Matrix3::identity() - radial) / gt)
    }
}

/// `F_ρ` on all of `B₂`: inner branch for `|y| ≤ ρ`, outer branch beyond.
pub fn map_frho(y: &Point, params: &CloakParams) -> Result<Point> {
    let r = y.norm();
    if r > 2.0 + DOMAIN_SLACK {
        return Err(CloakError::Domain(format!("|y| = {r} outside B_2")));
    }
    if r == 0.0 {
        return Ok(Point::zeros());
    }
    if r <= params.rho() {
        params.inner_map().apply(y)
    } else {
        params.outer_map().apply(y)
    }
}

pub fn map_frho_inverse(x: &Point, params: &CloakParams) -> Result<Point> {
    let big_r = x.norm();
    if big_r > 2.0 + DOMAIN_SLACK {
        return Err(CloakError::Domain(format!("|x| = {big_r} outside B_2")));
    }
    if big_r == 0.0 {
        return Ok(Point::zeros());
    }
    if big_r <= 1.0 {
        params.inner_map().inverse(x)
    } else {
        params.outer_map().inverse(x)
    }
}

pub fn map_f1(y: &Point) -> Result<Point> {
    RadialMap::Singular.apply(y)
}

pub fn map_f1_inverse(x: &Point) -> Result<Point> {
    RadialMap::Singular.inverse(x)
}

/// A material tensor reported at its physical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialTensor {
    pub point: Point,
    pub tensor: Matrix3<f64>,
}

/// `F_*M = DF · M · DFᵀ / det DF`, evaluated at `y` and reported at `x = F(y)`.
pub fn pushforward_tensor(map: &RadialMap, y: &Point, m: &Matrix3<f64>) -> Result<MaterialTensor> {
    let jac = map.jacobian(y)?;
    let det = map.jacobian_det(y)?;
    if !(det > 0.0 && det.is_finite()) {
        return Err(CloakError::DegenerateMap(format!(
            "det DF = {det} at |y| = {}",
            y.norm()
        )));
    }
    Ok(MaterialTensor {
        point: map.apply(y)?,
        tensor: jac * m * jac.transpose() / det,
    })
}

/// Closed form of `F₁_* I` at `1 < |x| < 2`: the radial eigenvalue
/// `2(|x|−1)²/|x|²` degenerates at the interface, the tangential one is 2.
pub fn singular_cloak_tensor(x: &Point) -> Result<Matrix3<f64>> {
    let r = x.norm();
    if !(r > 1.0 && r <= 2.0 + DOMAIN_SLACK) {
        return Err(CloakError::Domain(format!("|x| = {r} outside the cloaking layer")));
    }
    let xhat = x / r;
    let radial = xhat * xhat.transpose();
    let tangential = Matrix3::identity() - radial;
    Ok(radial * (2.0 * (r - 1.0).powi(2) / (r * r)) + tangential * 2.0)
}

fn real_mat_times(m: &Matrix3<f64>, v: &CVec3) -> CVec3 {
    m.map(|e| Complex64::new(e, 0.0)) * v
}

/// Transport of a field 1-form from virtual to physical space:
/// `Ẽ(F(y)) = DF(y)^{-T} E(y)`.
pub fn pushforward_field(map: &RadialMap, y: &Point, field: &CVec3) -> Result<CVec3> {
    Ok(real_mat_times(&map.jacobian_inv_t(y)?, field))
}

/// Inverse of [`pushforward_field`]: `E(y) = DF(y)ᵀ Ẽ(F(y))`.
pub fn pullback_field(map: &RadialMap, y: &Point, field: &CVec3) -> Result<CVec3> {
    Ok(real_mat_times(&map.jacobian(y)?.transpose(), field))
}

/// Transport of a current 2-form from virtual to physical space:
/// `J̃(F(y)) = DF(y) J(y) / det DF(y)`.
pub fn pushforward_current(map: &RadialMap, y: &Point, current: &CVec3) -> Result<CVec3> {
    let det = map.jacobian_det(y)?;
    if !(det > 0.0 && det.is_finite()) {
        return Err(CloakError::DegenerateMap(format!("det DF = {det}")));
    }
    Ok(real_mat_times(&(map.jacobian(y)? / det), current))
}

/// Inverse of [`pushforward_current`]: `J(y) = det DF · DF⁻¹ J̃(F(y))`.
pub fn pullback_current(map: &RadialMap, y: &Point, current: &CVec3) -> Result<CVec3> {
    let det = map.jacobian_det(y)?;
    let inv = map.jacobian_inv_t(y)?.transpose();
    Ok(real_mat_times(&(inv * det), current))
}
