//! Distributional pairings of the normal fields against radial test
//! functions, their `ρ → 0` limits, one-sided interface traces, and the
//! degenerate-weight energy.
//!
//! Test functions are expanded as `φ(x) = Σ φₙᵐ(|x|) conj(Yₙᵐ(x̂))`, which
//! makes every pairing diagonal in the modes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CloakError, Result};
use crate::fields::amplitudes;
use crate::geometry::Scenario;
use crate::harmonics::ModeIndex;
use crate::modal::{limit_coeffs, ModalSolution, RadialData, SourceCoeffs};
use crate::quadrature::{adaptive, composite_doubling};
use crate::specfun::{BesselTable, ScaledComplex};

const NAN: Complex64 = Complex64::new(f64::NAN, f64::NAN);

/// `c·(r − r_a)²(r_b − r)²` on `[r_a, r_b]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialBump {
    pub r_a: f64,
    pub r_b: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl PolynomialBump {
    pub fn new(r_a: f64, r_b: f64, scale: f64) -> Result<Self> {
        let b = Self { r_a, r_b, scale };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0 <= self.r_a && self.r_a < self.r_b && self.r_b <= 2.0) || !self.scale.is_finite() {
            return Err(CloakError::InvalidInput(format!(
                "bump support [{}, {}] must lie in [0, 2]",
                self.r_a, self.r_b
            )));
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.r_a || r >= self.r_b {
            return 0.0;
        }
        let (u, v) = (r - self.r_a, self.r_b - r);
        self.scale * u * u * v * v
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.r_a || r >= self.r_b {
            return 0.0;
        }
        let (u, v) = (r - self.r_a, self.r_b - r);
        2.0 * self.scale * u * v * (v - u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplineSpec {
    knots: Vec<f64>,
    values: Vec<f64>,
}

/// Natural cubic spline through user knots, closed by the knot `(2, 0)`.
/// Constant to the left of the first knot, zero beyond `r = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SplineSpec", into = "SplineSpec")]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
    user_len: usize,
}

impl TryFrom<SplineSpec> for CubicSpline {
    type Error = CloakError;
    fn try_from(s: SplineSpec) -> Result<Self> {
        CubicSpline::new(&s.knots, &s.values)
    }
}

impl From<CubicSpline> for SplineSpec {
    fn from(s: CubicSpline) -> Self {
        SplineSpec {
            knots: s.knots[..s.user_len].to_vec(),
            values: s.values[..s.user_len].to_vec(),
        }
    }
}

impl CubicSpline {
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        let bad = |msg: &str| Err(CloakError::InvalidInput(format!("spline: {msg}")));
        if knots.len() != values.len() || knots.is_empty() {
            return bad("need matching, non-empty knots and values");
        }
        if knots.iter().chain(values).any(|v| !v.is_finite()) {
            return bad("non-finite entry");
        }
        if knots[0] < 0.0 || knots.windows(2).any(|w| w[1] <= w[0]) || *knots.last().unwrap() > 2.0 {
            return bad("knots must increase within [0, 2]");
        }
        let (mut xs, mut ys) = (knots.to_vec(), values.to_vec());
        if *xs.last().unwrap() == 2.0 {
            if *ys.last().unwrap() != 0.0 {
                return bad("value at r = 2 must be 0");
            }
        } else {
            xs.push(2.0);
            ys.push(0.0);
        }
        let second = natural_second_derivatives(&xs, &ys);
        Ok(Self { knots: xs, values: ys, second, user_len: knots.len() })
    }

    fn segment(&self, r: f64) -> usize {
        self.knots.partition_point(|&k| k <= r).clamp(1, self.knots.len() - 1) - 1
    }

    pub fn value(&self, r: f64) -> f64 {
        if r >= 2.0 {
            return 0.0;
        }
        if r <= self.knots[0] {
            return self.values[0];
        }
        let i = self.segment(r);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - r) / h, (r - x0) / h);
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r >= 2.0 || r <= self.knots[0] {
            return 0.0;
        }
        let i = self.segment(r);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - r) / h, (r - x0) / h);
        (self.values[i + 1] - self.values[i]) / h
            + ((1.0 - 3.0 * a * a) * self.second[i] + (3.0 * b * b - 1.0) * self.second[i + 1]) * h / 6.0
    }
}

/// Tridiagonal solve for the natural end conditions `s₀ = s_last = 0`.
fn natural_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut s = vec![0.0; n];
    if n < 3 {
        return s;
    }
    let (mut diag, mut rhs) = (vec![0.0; n], vec![0.0; n]);
    for i in 1..n - 1 {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        diag[i] = 2.0 * (h0 + h1);
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        if i > 1 {
            let w = h0 / diag[i - 1];
            diag[i] -= w * h0;
            rhs[i] -= w * rhs[i - 1];
        }
    }
    for i in (1..n - 1).rev() {
        let upper = if i + 1 < n - 1 { (x[i + 1] - x[i]) * s[i + 1] } else { 0.0 };
        s[i] = (rhs[i] - upper) / diag[i];
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Bump(PolynomialBump),
    Spline(CubicSpline),
}

impl Profile {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            Profile::Bump(b) => b.value(r),
            Profile::Spline(s) => s.value(r),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Profile::Bump(b) => b.derivative(r),
            Profile::Spline(s) => s.derivative(r),
        }
    }

    /// Radii where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Bump(b) => vec![b.r_a, b.r_b],
            Profile::Spline(s) => s.knots.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionRow {
    pub n: usize,
    pub m: i64,
    #[serde(default = "one")]
    pub weight_re: f64,
    #[serde(default)]
    pub weight_im: f64,
    pub profile: Profile,
}

/// `φ = Σ φₙᵐ(r) conj(Yₙᵐ)` with each `φₙᵐ` a weighted sum of profiles.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TestFunctionRow>", into = "Vec<TestFunctionRow>")]
pub struct RadialTestFunction {
    modes: BTreeMap<ModeIndex, Vec<(Complex64, Profile)>>,
}

impl TryFrom<Vec<TestFunctionRow>> for RadialTestFunction {
    type Error = CloakError;
    fn try_from(rows: Vec<TestFunctionRow>) -> Result<Self> {
        let mut f = Self::new();
        for r in rows {
            if let Profile::Bump(b) = &r.profile {
                b.validate()?;
            }
            f.add(ModeIndex::new(r.n, r.m)?, Complex64::new(r.weight_re, r.weight_im), r.profile);
        }
        Ok(f)
    }
}

impl From<RadialTestFunction> for Vec<TestFunctionRow> {
    fn from(f: RadialTestFunction) -> Self {
        f.modes
            .into_iter()
            .flat_map(|(k, terms)| {
                terms.into_iter().map(move |(w, profile)| TestFunctionRow {
                    n: k.n(),
                    m: k.m(),
                    weight_re: w.re,
                    weight_im: w.im,
                    profile,
                })
            })
            .collect()
    }
}

impl RadialTestFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(mode: ModeIndex, profile: Profile) -> Self {
        let mut f = Self::new();
        f.add(mode, Complex64::new(1.0, 0.0), profile);
        f
    }

    pub fn add(&mut self, mode: ModeIndex, weight: Complex64, profile: Profile) {
        self.modes.entry(mode).or_default().push((weight, profile));
    }

    /// `Σ cᵢ φᵢ`.
    pub fn combination(parts: &[(Complex64, &RadialTestFunction)]) -> Self {
        let mut out = Self::new();
        for (c, f) in parts {
            for (k, terms) in &f.modes {
                for (w, p) in terms {
                    out.add(*k, *c * *w, p.clone());
                }
            }
        }
        out
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        self.modes.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `φₙᵐ(r)`.
    pub fn component(&self, mode: ModeIndex, r: f64) -> Complex64 {
        self.modes
            .get(&mode)
            .map_or(Complex64::new(0.0, 0.0), |t| t.iter().map(|(w, p)| w * p.value(r)).sum())
    }

    pub fn component_derivative(&self, mode: ModeIndex, r: f64) -> Complex64 {
        self.modes
            .get(&mode)
            .map_or(Complex64::new(0.0, 0.0), |t| t.iter().map(|(w, p)| w * p.derivative(r)).sum())
    }

    fn breakpoints(&self, mode: ModeIndex) -> Vec<f64> {
        self.modes
            .get(&mode)
            .map_or_else(Vec::new, |t| t.iter().flat_map(|(_, p)| p.breakpoints()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Electric,
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSettings {
    pub tol: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    1e-30
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { tol: 1e-10, floor: default_floor() }
    }
}

/// Breakpoints of `[a, b]`: the ends plus interior knots, sorted.
fn segments(a: f64, b: f64, knots: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v = vec![a, b];
    v.extend(knots.into_iter().filter(|&k| k > a && k < b));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn integrate_segments<F: Fn(f64) -> Complex64>(f: &F, breaks: &[f64], quad: QuadSettings) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        total += adaptive(f, w[0], w[1], quad.tol, quad.floor)?;
    }
    finite(total, quad)
}

fn finite(z: Complex64, quad: QuadSettings) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(CloakError::Accuracy { requested: quad.tol, achieved: f64::INFINITY })
    }
}

/// Deterministic ascending-mode sum of per-mode results computed in parallel.
fn mode_sum<F>(modes: Vec<ModeIndex>, f: F) -> Result<Complex64>
where
    F: Fn(ModeIndex) -> Result<Complex64> + Sync + Send,
{
    let parts: Vec<Result<Complex64>> = modes.into_par_iter().map(f).collect();
    parts.into_iter().sum()
}

fn shared_modes(sol: &ModalSolution, phi: &RadialTestFunction) -> Vec<ModeIndex> {
    phi.modes().filter(|k| sol.get(*k).is_some()).collect()
}

/// `∫_{r₁}^{1} S² pref [a jₙ(κr) + b hₙ(κr)] φ(r) r dr`.
fn interior_mode(
    mode: ModeIndex,
    (a, b): (ScaledComplex, ScaledComplex),
    pref: Complex64,
    scenario: &Scenario,
    phi: &RadialTestFunction,
    quad: QuadSettings,
) -> Result<Complex64> {
    let n = mode.n();
    let kappa = scenario.k() * scenario.omega();
    let s2 = mode.s_sq() as f64;
    let f = |r: f64| {
        let phi_r = phi.component(mode, r);
        if phi_r == Complex64::new(0.0, 0.0) {
            return phi_r;
        }
        BesselTable::new(n, kappa * r)
            .map(|t| (a * t.j(n) + b * t.h(n)).to_complex() * pref * phi_r * (s2 * r))
            .unwrap_or(NAN)
    };
    integrate_segments(&f, &segments(scenario.r1(), 1.0, phi.breakpoints(mode)), quad)
}

fn interior_pref(scenario: &Scenario, component: Component) -> Complex64 {
    match component {
        Component::Electric => Complex64::new(scenario.eps0().powf(-0.5), 0.0),
        Component::Magnetic => {
            Complex64::new(0.0, -1.0 / (scenario.k() * scenario.omega())) * scenario.mu0().powf(-0.5)
        }
    }
}

/// `⟨x̂·Ẽ, φ⟩` (or `x̂·H̃`) over the cloaked shell `r₁ < |x| < 1`.
pub fn pairing_interior(
    sol: &ModalSolution,
    phi: &RadialTestFunction,
    component: Component,
    quad: QuadSettings,
) -> Result<Complex64> {
    let scenario = sol.params().scenario();
    let pref = interior_pref(scenario, component);
    mode_sum(shared_modes(sol, phi), |k| {
        let co = sol.get(k).expect("shared mode");
        let (p, q) = sol.source().get(k);
        let ab = match component {
            Component::Electric => (co.beta, q.into()),
            Component::Magnetic => (co.alpha, p.into()),
        };
        interior_mode(k, ab, pref, scenario, phi, quad)
    })
}

/// `⟨x̂·Ẽ, φ⟩` (or `x̂·H̃`) over the cloaking layer `1 < |x| < 2`, computed in
/// virtual coordinates with `r = ρ eᵘ` to resolve the layer at `r = ρ`.
pub fn pairing_exterior_normal(
    sol: &ModalSolution,
    phi: &RadialTestFunction,
    component: Component,
    quad: QuadSettings,
) -> Result<Complex64> {
    let params = sol.params();
    let (rho, a, b, w) = (params.rho(), params.a(), params.b(), params.omega());
    let u_max = (2.0 / rho).ln();
    let pref = match component {
        Component::Electric => Complex64::new(1.0, 0.0),
        Component::Magnetic => Complex64::new(0.0, -1.0 / w),
    };
    mode_sum(shared_modes(sol, phi), |k| {
        let co = sol.get(k).expect("shared mode");
        let (radiating, regular) = match component {
            Component::Electric => (co.d, co.eta),
            Component::Magnetic => (co.c, co.gamma),
        };
        let n = k.n();
        let s2 = k.s_sq() as f64;
        let f = |u: f64| {
            let r = rho * u.exp();
            let x = a + b * r;
            let phi_x = phi.component(k, x);
            if phi_x == Complex64::new(0.0, 0.0) {
                return phi_x;
            }
            BesselTable::new(n, w * r)
                .map(|t| (radiating * t.h(n) + regular * t.j(n)).to_complex() * pref * phi_x * (s2 * x * x))
                .unwrap_or(NAN)
        };
        let knots = phi
            .breakpoints(k)
            .into_iter()
            .filter(|&x| x > 1.0 && x < 2.0)
            .map(|x| ((x - a) / b / rho).ln());
        let breaks = segments(0.0, u_max, knots);
        finite(composite_doubling(&f, &breaks, 1.0, quad.tol, quad.floor)?, quad)
    })
}

/// Sum of both one-sided pairings: `⟨x̂·Ẽ_ρ, φ⟩` over `r₁ < |x| < 2`.
pub fn pairing_total(
    sol: &ModalSolution,
    phi: &RadialTestFunction,
    component: Component,
    quad: QuadSettings,
) -> Result<Complex64> {
    Ok(pairing_interior(sol, phi, component, quad)? + pairing_exterior_normal(sol, phi, component, quad)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedLimit {
    /// Pairing of the limit field away from the interface.
    pub measurable: Complex64,
    /// `Σ σₙᵐ φₙᵐ(1)`.
    pub delta: Complex64,
}

impl PredictedLimit {
    pub fn total(&self) -> Complex64 {
        self.measurable + self.delta
    }
}

/// `ρ → 0` limit of [`pairing_total`] for a source with zero boundary data.
pub fn predicted_limit(
    source: &SourceCoeffs,
    phi: &RadialTestFunction,
    scenario: &Scenario,
    component: Component,
    quad: QuadSettings,
) -> Result<PredictedLimit> {
    let pref = interior_pref(scenario, component);
    let modes: Vec<ModeIndex> = phi.modes().filter(|k| source.iter().any(|(s, _)| s == *k)).collect();
    let parts: Vec<Result<(Complex64, Complex64)>> = modes
        .into_par_iter()
        .map(|k| {
            let (p, q) = source.get(k);
            let l = limit_coeffs(k, p, q, scenario)?;
            let (ab, sigma) = match component {
                Component::Electric => ((l.beta0, q.into()), l.sigma),
                Component::Magnetic => ((l.alpha0, p.into()), l.sigma_magnetic),
            };
            let measurable = interior_mode(k, ab, pref, scenario, phi, quad)?;
            Ok((measurable, sigma.to_complex() * phi.component(k, 1.0)))
        })
        .collect();
    let mut out = PredictedLimit { measurable: Complex64::new(0.0, 0.0), delta: Complex64::new(0.0, 0.0) };
    for part in parts {
        let (m, d) = part?;
        out.measurable += m;
        out.delta += d;
    }
    Ok(out)
}

/// Two-point first-order extrapolation to `ρ = 0` from values at `ρ₁ ≠ ρ₂`.
pub fn richardson_first_order(rho1: f64, v1: Complex64, rho2: f64, v2: Complex64) -> Complex64 {
    (v2 * rho1 - v1 * rho2) / (rho1 - rho2)
}

fn checked_table(n: usize, scenario: &Scenario) -> Result<BesselTable> {
    let data = RadialData::new(n, scenario, None)?;
    data.check_interior(n)?;
    Ok(data.inner)
}

/// Limit normal-trace coefficients `S² r⁻¹[β₀ jₙ(kωr) + q hₙ(kωr)]`, in the
/// cross-product form `q S² r⁻¹ [jₙ(kω) hₙ(kωr) − hₙ(kω) jₙ(kωr)] / jₙ(kω)`
/// so that `r = 1` gives exactly zero.
pub fn interior_trace_normal(source: &SourceCoeffs, scenario: &Scenario, r: f64) -> Result<Vec<(ModeIndex, Complex64)>> {
    if !(r > scenario.r1() && r <= 1.0) {
        return Err(CloakError::Domain(format!("trace radius {r} outside ({}, 1]", scenario.r1())));
    }
    let kappa = scenario.k() * scenario.omega();
    source
        .iter()
        .map(|(k, (_, q))| {
            let n = k.n();
            let at_one = checked_table(n, scenario)?;
            let at_r = BesselTable::new(n, kappa * r)?;
            let cross = at_one.j(n) * at_r.h(n) - at_one.h(n) * at_r.j(n);
            let v = ScaledComplex::from(q) * cross / at_one.j(n) * (k.s_sq() as f64 / r);
            Ok((k, v.to_complex()))
        })
        .collect()
}

/// Finite-`ρ` normal-trace coefficients `S² r⁻¹[β jₙ(kωr) + q hₙ(kωr)]`.
pub fn interior_trace_normal_at(sol: &ModalSolution, r: f64) -> Result<Vec<(ModeIndex, Complex64)>> {
    let scenario = sol.params().scenario();
    if !(r > scenario.r1() && r <= 1.0) {
        return Err(CloakError::Domain(format!("trace radius {r} outside ({}, 1]", scenario.r1())));
    }
    let t = BesselTable::new(sol.n_max().max(1), scenario.k() * scenario.omega() * r)?;
    Ok(sol
        .modes()
        .iter()
        .map(|(k, co)| {
            let n = k.n();
            let (_, q) = sol.source().get(*k);
            let v = (co.beta * t.j(n) + ScaledComplex::from(q) * t.h(n)) * (k.s_sq() as f64 / r);
            (*k, v.to_complex())
        })
        .collect())
}

/// Tangential trace coefficients at `|x| = 1⁻`: `T⁽¹⁾` from the `(β, q)`
/// chain (`β𝒥ₙ + qℋₙ`), `T⁽²⁾` from the `(α, p)` chain (`αjₙ + phₙ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentialTrace {
    pub t1: Complex64,
    pub t2: Complex64,
}

/// `ρ → 0` limits of the tangential traces, in cross-product form:
/// `T⁽¹⁾ = q (ℋₙjₙ − hₙ𝒥ₙ)/jₙ = iq/(kω jₙ)`, `T⁽²⁾ = p (hₙjₙ − jₙhₙ)/jₙ = 0`.
pub fn tangential_trace_limit(source: &SourceCoeffs, scenario: &Scenario) -> Result<Vec<(ModeIndex, TangentialTrace)>> {
    source
        .iter()
        .map(|(k, (p, q))| {
            let n = k.n();
            let t = checked_table(n, scenario)?;
            let (j, h) = (t.j(n), t.h(n));
            let t1 = ScaledComplex::from(q) * (t.hcal(n) * j - h * t.jcal(n)) / j;
            let t2 = ScaledComplex::from(p) * (h * j - j * h) / j;
            Ok((k, TangentialTrace { t1: t1.to_complex(), t2: t2.to_complex() }))
        })
        .collect()
}

/// Finite-`ρ` tangential traces `β𝒥ₙ(kω) + qℋₙ(kω)` and `αjₙ(kω) + phₙ(kω)`.
pub fn tangential_trace(sol: &ModalSolution) -> Result<Vec<(ModeIndex, TangentialTrace)>> {
    let scenario = sol.params().scenario();
    let t = BesselTable::new(sol.n_max().max(1), scenario.k() * scenario.omega())?;
    Ok(sol
        .modes()
        .iter()
        .map(|(k, co)| {
            let n = k.n();
            let (p, q) = sol.source().get(*k);
            let t1 = co.beta * t.jcal(n) + ScaledComplex::from(q) * t.hcal(n);
            let t2 = co.alpha * t.j(n) + ScaledComplex::from(p) * t.h(n);
            (*k, TangentialTrace { t1: t1.to_complex(), t2: t2.to_complex() })
        })
        .collect())
}

fn norm_sq(v: &[Complex64; 3]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Degenerate-weight energy `∫ ε̃Ẽ·conj(Ẽ) + μ̃H̃·conj(H̃)` over
/// `(B₂∖B_{1+δ}) ∪ (B_{1−δ}∖B_{r₁})`.
///
/// The angular integral is done exactly through the orthonormality of
/// `(V, U, Y x̂)`; the layer is integrated in virtual coordinates, where the
/// weight is the identity.
pub fn energy_integral(sol: &ModalSolution, delta: f64, quad: QuadSettings) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(CloakError::InvalidInput(format!("exclusion half-width {delta} < 0")));
    }
    if sol.modes().is_empty() {
        return Ok(0.0);
    }
    let params = sol.params();
    let n_max = sol.n_max();
    let (rho, w) = (params.rho(), params.omega());

    let mut total = 0.0;
    let r_lo = ((1.0 + delta - params.a()) / params.b()).max(rho);
    if r_lo < 2.0 {
        let f = |u: f64| {
            let r = rho * u.exp();
            let Ok(t) = BesselTable::new(n_max, w * r) else { return NAN };
            let dens: f64 = sol
                .modes()
                .iter()
                .map(|(k, co)| {
                    let amp = amplitudes(*k, w, r, &t, (co.gamma, co.eta, co.c, co.d));
                    norm_sq(&amp.e) + norm_sq(&amp.h)
                })
                .sum();
            Complex64::new(dens * r * r * r, 0.0)
        };
        let breaks = [(r_lo / rho).ln(), (2.0 / rho).ln()];
        total += finite(composite_doubling(&f, &breaks, 1.0, quad.tol, quad.floor)?, quad)?.re;
    }

    let r_hi = 1.0 - delta;
    if r_hi > params.r1() {
        let kappa = params.k() * w;
        // ε₀|ε₀^{-1/2}e|² + μ₀|μ₀^{-1/2}h|² leaves the raw amplitudes
        let f = |r: f64| {
            let Ok(t) = BesselTable::new(n_max, kappa * r) else { return NAN };
            let dens: f64 = sol
                .modes()
                .iter()
                .map(|(k, co)| {
                    let (p, q) = sol.source().get(*k);
                    let amp = amplitudes(*k, kappa, r, &t, (co.alpha, co.beta, p.into(), q.into()));
                    norm_sq(&amp.e) + norm_sq(&amp.h)
                })
                .sum();
            Complex64::new(dens * r * r, 0.0)
        };
        total += integrate_segments(&f, &[params.r1(), r_hi], quad)?.re;
    }
    Ok(total)
}
