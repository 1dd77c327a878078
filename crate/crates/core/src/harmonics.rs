//! Orthonormal spherical harmonics (Condon–Shortley phase), the tangential
//! vector harmonics `U = Grad Y / S_n`, `V = x̂ × U`, and the vector wave
//! functions built on them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CloakError, Result};
use crate::geometry::{CVec3, Point};
use crate::specfun::{BesselTable, N_CAP};

/// `(n, m)` with `1 ≤ n`, `|m| ≤ n`. Orders by `n`, then `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(usize, i64)", into = "(usize, i64)")]
pub struct ModeIndex {
    n: usize,
    m: i64,
}

impl ModeIndex {
    pub fn new(n: usize, m: i64) -> Result<Self> {
        if n == 0 || m.unsigned_abs() as usize > n {
            return Err(CloakError::InvalidInput(format!("invalid mode (n={n}, m={m})")));
        }
        if n > N_CAP {
            return Err(CloakError::Capability { n, cap: N_CAP });
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> i64 {
        self.m
    }

    /// `n(n+1)`, exact.
    pub fn s_sq(&self) -> u64 {
        (self.n as u64) * (self.n as u64 + 1)
    }

    /// `S_n = √(n(n+1))`.
    pub fn s(&self) -> f64 {
        (self.s_sq() as f64).sqrt()
    }

    /// All modes of orders `1..=n_max`.
    pub fn all_up_to(n_max: usize) -> impl Iterator<Item = ModeIndex> {
        (1..=n_max).flat_map(|n| (-(n as i64)..=n as i64).map(move |m| ModeIndex { n, m }))
    }
}

impl TryFrom<(usize, i64)> for ModeIndex {
    type Error = CloakError;
    fn try_from((n, m): (usize, i64)) -> Result<Self> {
        Self::new(n, m)
    }
}

impl From<ModeIndex> for (usize, i64) {
    fn from(k: ModeIndex) -> Self {
        (k.n, k.m)
    }
}

fn check_unit(dir: &Point) -> Result<()> {
    let r = dir.norm();
    if (r - 1.0).abs() > 1e-12 {
        return Err(CloakError::Domain(format!("direction has norm {r}, expected 1")));
    }
    Ok(())
}

/// `Y`, `U`, `V` of one mode at one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularBasis {
    pub y: Complex64,
    pub u: CVec3,
    pub v: CVec3,
}

/// Normalized associated Legendre data for all `0 ≤ m ≤ n ≤ n_max` at one
/// direction, plus the local spherical frame.
///
/// Besides `p̄ₙᵐ` the table keeps `p̄ₙᵐ/sinθ` (m ≥ 1), run through the same
/// recurrence from a seed with one power of `sinθ` removed, so nothing is
/// divided by `sinθ` and the poles need no special case.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    n_max: usize,
    dir: Point,
    p: Vec<f64>,
    p_over_s: Vec<f64>,
    dp: Vec<f64>,
    phi: f64,
    theta_hat: Point,
    phi_hat: Point,
}

fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

impl HarmonicTable {
    pub fn new(n_max: usize, dir: &Point) -> Result<Self> {
        check_unit(dir)?;
        if n_max > N_CAP {
            return Err(CloakError::Capability { n: n_max, cap: N_CAP });
        }
        let dir = *dir;
        let x = dir.z.clamp(-1.0, 1.0);
        let s = dir.x.hypot(dir.y);
        let phi = dir.y.atan2(dir.x);
        let (sp, cp) = phi.sin_cos();
        let theta_hat = Point::new(x * cp, x * sp, -s);
        let phi_hat = Point::new(-sp, cp, 0.0);

        let len = tri(n_max, n_max) + 1;
        let mut p = vec![0.0; len];
        let mut q = vec![0.0; len];
        let mut dp = vec![0.0; len];

        let mut pmm = (4.0 * PI).sqrt().recip();
        let mut qmm = 0.0;
        for m in 0..=n_max {
            if m >= 1 {
                let f = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
                qmm = if m == 1 { f * pmm } else { f * s * qmm };
                pmm *= f * s;
            }
            // upward in degree at fixed order
            let (mut p2, mut p1) = (0.0, pmm);
            let (mut q2, mut q1) = (0.0, qmm);
            p[tri(m, m)] = pmm;
            q[tri(m, m)] = qmm;
            for n in (m + 1)..=n_max {
                let nf = n as f64;
                let mf = m as f64;
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let b = if n == m + 1 {
                    0.0
                } else {
                    (((nf - 1.0).powi(2) - mf * mf) / (4.0 * (nf - 1.0).powi(2) - 1.0)).sqrt()
                };
                let pn = a * (x * p1 - b * p2);
                let qn = a * (x * q1 - b * q2);
                p2 = p1;
                p1 = pn;
                q2 = q1;
                q1 = qn;
                p[tri(n, m)] = pn;
                q[tri(n, m)] = qn;
            }
        }
        for n in 1..=n_max {
            let nf = n as f64;
            dp[tri(n, 0)] = (nf * (nf + 1.0)).sqrt() * p[tri(n, 1)];
            for m in 1..=n {
                let mf = m as f64;
                let below = if n > m {
                    let c = ((2.0 * nf + 1.0) * (nf * nf - mf * mf) / (2.0 * nf - 1.0)).sqrt();
                    c * q[tri(n - 1, m)]
                } else {
                    0.0
                };
                dp[tri(n, m)] = nf * x * q[tri(n, m)] - below;
            }
        }
        Ok(Self {
            n_max,
            dir,
            p,
            p_over_s: q,
            dp,
            phi,
            theta_hat,
            phi_hat,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn direction(&self) -> &Point {
        &self.dir
    }

    fn check(&self, mode: ModeIndex) {
        assert!(mode.n <= self.n_max, "mode {mode:?} beyond table order {}", self.n_max);
    }

    pub fn y(&self, mode: ModeIndex) -> Complex64 {
        self.check(mode);
        let ma = mode.m.unsigned_abs() as usize;
        let val = Complex64::from_polar(self.p[tri(mode.n, ma)], ma as f64 * self.phi);
        reflect(mode.m, val)
    }

    pub fn basis(&self, mode: ModeIndex) -> AngularBasis {
        self.check(mode);
        let ma = mode.m.unsigned_abs() as usize;
        let idx = tri(mode.n, ma);
        let e = Complex64::from_polar(1.0, ma as f64 * self.phi);
        let y = reflect(mode.m, self.p[idx] * e);
        let d_theta = self.dp[idx] * e;
        let d_phi = Complex64::new(0.0, ma as f64) * self.p_over_s[idx] * e;
        let inv_s = mode.s().recip();
        let th = self.theta_hat.map(|c| Complex64::new(c, 0.0));
        let ph = self.phi_hat.map(|c| Complex64::new(c, 0.0));
        let grad = (th * d_theta + ph * d_phi) * Complex64::new(inv_s, 0.0);
        let u = if mode.m < 0 {
            let sign = if ma.is_multiple_of(2) { 1.0 } else { -1.0 };
            grad.map(|c| c.conj() * sign)
        } else {
            grad
        };
        let xh = self.dir.map(|c| Complex64::new(c, 0.0));
        AngularBasis { y, u, v: xh.cross(&u) }
    }
}

/// `Yₙ⁻ᵐ = (−1)ᵐ conj(Yₙᵐ)`.
fn reflect(m: i64, val: Complex64) -> Complex64 {
    if m >= 0 {
        val
    } else if m % 2 == 0 {
        val.conj()
    } else {
        -val.conj()
    }
}

pub fn scalar_y(mode: ModeIndex, dir: &Point) -> Result<Complex64> {
    Ok(HarmonicTable::new(mode.n, dir)?.y(mode))
}

pub fn vector_uv(mode: ModeIndex, dir: &Point) -> Result<(CVec3, CVec3)> {
    let b = HarmonicTable::new(mode.n, dir)?.basis(mode);
    Ok((b.u, b.v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    /// `M`, built on `jₙ`.
    Regular,
    /// `N`, built on `hₙ⁽¹⁾`.
    Radiating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveValue {
    pub value: CVec3,
    pub curl: CVec3,
}

/// `M = −Sₙ jₙ(ω|x|) Vₙᵐ(x̂)` (or `N` with `hₙ⁽¹⁾`) and its curl
/// `Sₙ|x|⁻¹ 𝒥ₙ Uₙᵐ + Sₙ²|x|⁻¹ jₙ Yₙᵐ x̂`.
pub fn wave_mn(mode: ModeIndex, omega: f64, x: &Point, kind: WaveKind) -> Result<WaveValue> {
    let r = x.norm();
    if r == 0.0 {
        return Err(CloakError::Singularity("wave function at the origin".into()));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(CloakError::InvalidInput(format!("omega must be positive, got {omega}")));
    }
    let xhat = x / r;
    let basis = HarmonicTable::new(mode.n, &xhat)?.basis(mode);
    let table = BesselTable::new(mode.n, omega * r)?;
    let (f, fcal) = match kind {
        WaveKind::Regular => (table.j(mode.n), table.jcal(mode.n)),
        WaveKind::Radiating => (table.h(mode.n), table.hcal(mode.n)),
    };
    let (f, fcal) = (f.to_complex(), fcal.to_complex());
    let s = mode.s();
    let xh = xhat.map(|c| Complex64::new(c, 0.0));
    Ok(WaveValue {
        value: basis.v * (-s * f),
        curl: basis.u * (s * fcal / r) + xh * (s * s * f * basis.y / r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dir(rng: &mut ChaCha8Rng) -> Point {
        loop {
            let v = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n < 1.0 {
                return v / n;
            }
        }
    }

    /// Product rule: Gauss–Legendre in cosθ, uniform in φ.
    fn sphere_integral(n_max: usize, f: impl Fn(&HarmonicTable) -> f64) -> f64 {
        let (nodes, weights) = crate::quadrature::gauss_legendre(n_max + 4);
        let nphi = 2 * n_max + 4;
        let mut total = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let s = (1.0 - x * x).sqrt();
            for k in 0..nphi {
                let phi = 2.0 * PI * k as f64 / nphi as f64;
                let dir = Point::new(s * phi.cos(), s * phi.sin(), *x);
                total += w * 2.0 * PI / nphi as f64 * f(&HarmonicTable::new(n_max, &dir).unwrap());
            }
        }
        total
    }

    #[test]
    fn mode_index_rules() {
        assert!(ModeIndex::new(0, 0).is_err());
        assert!(ModeIndex::new(2, 3).is_err());
        assert!(matches!(ModeIndex::new(201, 0), Err(CloakError::Capability { .. })));
        let k = ModeIndex::new(3, -2).unwrap();
        assert_eq!(k.s_sq(), 12);
        let mut v = vec![ModeIndex::new(2, 1).unwrap(), ModeIndex::new(1, 1).unwrap(), ModeIndex::new(2, -2).unwrap()];
        v.sort();
        assert_eq!(v.iter().map(|k| (k.n(), k.m())).collect::<Vec<_>>(), vec![(1, 1), (2, -2), (2, 1)]);
        assert_eq!(ModeIndex::all_up_to(3).count(), 15);
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, "[3,-2]");
        assert_eq!(serde_json::from_str::<ModeIndex>(&json).unwrap(), k);
        assert!(serde_json::from_str::<ModeIndex>("[1,2]").is_err());
    }

    #[test]
    fn low_order_values() {
        let z = Point::z();
        let y10 = scalar_y(ModeIndex::new(1, 0).unwrap(), &z).unwrap();
        assert!((y10.re - 0.4886025119029199).abs() < 1e-15);
        // Y_2^1 = −√(15/8π) sinθ cosθ e^{iφ}
        let dir = Point::new(0.48, 0.36, 0.8);
        let (s, c) = (0.6, 0.8);
        let phi = 0.36f64.atan2(0.48);
        let y21 = scalar_y(ModeIndex::new(2, 1).unwrap(), &dir).unwrap();
        let expected = Complex64::from_polar(-(15.0 / (8.0 * PI)).sqrt() * s * c, phi);
        assert!((y21 - expected).norm() < 1e-15);
        assert!(matches!(scalar_y(ModeIndex::new(1, 0).unwrap(), &(z * 1.1)), Err(CloakError::Domain(_))));
    }

    #[test]
    fn conjugation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = random_dir(&mut rng);
            let t = HarmonicTable::new(12, &d).unwrap();
            for n in 1..=12 {
                for m in 1..=n as i64 {
                    let pos = t.y(ModeIndex::new(n, m).unwrap());
                    let neg = t.y(ModeIndex::new(n, -m).unwrap());
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((neg - pos.conj() * sign).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn orthonormality() {
        let n_max = 8;
        let modes: Vec<_> = ModeIndex::all_up_to(n_max).collect();
        for &a in modes.iter().step_by(5) {
            for &b in modes.iter().step_by(7) {
                let yy = sphere_integral(n_max, |t| (t.y(a) * t.y(b).conj()).re);
                let uu = sphere_integral(n_max, |t| {
                    let (ba, bb) = (t.basis(a), t.basis(b));
                    ba.u.dot(&bb.u.map(|c| c.conj())).re
                });
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((yy - expected).abs() < 1e-8, "{a:?} {b:?} {yy}");
                assert!((uu - expected).abs() < 1e-8, "{a:?} {b:?} {uu}");
            }
        }
    }

    #[test]
    fn tangency_and_cross_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let d = random_dir(&mut rng);
            let t = HarmonicTable::new(10, &d).unwrap();
            let xh = d.map(|c| Complex64::new(c, 0.0));
            for mode in ModeIndex::all_up_to(10) {
                let b = t.basis(mode);
                let scale = b.u.norm().max(1e-300);
                assert!(xh.dot(&b.u).norm() < 1e-12 * scale.max(1.0));
                assert!(xh.dot(&b.v).norm() < 1e-12 * scale.max(1.0));
                assert!((xh.cross(&b.v) + b.u).norm() < 1e-12 * scale.max(1.0));
                assert!((xh.cross(&b.u) - b.v).norm() < 1e-12 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn surface_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = 1e-6;
        for _ in 0..20 {
            let d = random_dir(&mut rng);
            for mode in ModeIndex::all_up_to(5) {
                let u = vector_uv(mode, &d).unwrap().0;
                // gradient of the degree-0 extension Y(x/|x|), restricted to the sphere
                let mut grad = CVec3::zeros();
                for j in 0..3 {
                    let mut e = Point::zeros();
                    e[j] = h;
                    let f = |p: Point| scalar_y(mode, &p.normalize()).unwrap();
                    grad[j] = (f(d + e) - f(d - e)) / (2.0 * h);
                }
                let expected = grad / Complex64::new(mode.s(), 0.0);
                assert!((u - expected).norm() < 1e-7, "{mode:?}");
            }
        }
    }

    #[test]
    fn poles_are_finite_and_tangent() {
        for dir in [Point::z(), -Point::z()] {
            let t = HarmonicTable::new(30, &dir).unwrap();
            for mode in ModeIndex::all_up_to(30) {
                let b = t.basis(mode);
                assert!(b.u.iter().chain(b.v.iter()).all(|c| c.re.is_finite() && c.im.is_finite()));
                assert!(b.u[2].norm() < 1e-14);
                if mode.m().abs() != 1 {
                    assert!(b.u.norm() < 1e-14, "{mode:?}");
                }
            }
        }
        // continuity approaching the pole
        let mode = ModeIndex::new(3, 1).unwrap();
        let near = Point::new(1e-9, 0.0, 1.0).normalize();
        let (u0, _) = vector_uv(mode, &Point::z()).unwrap();
        let (u1, _) = vector_uv(mode, &near).unwrap();
        assert!((u0 - u1).norm() < 1e-7);
    }

    fn fd_curl(f: &impl Fn(Point) -> CVec3, x: &Point, h: f64) -> CVec3 {
        let d = |j: usize| {
            let mut e = Point::zeros();
            e[j] = h;
            (f(x + e) - f(x - e)) / Complex64::new(2.0 * h, 0.0)
        };
        let (dx, dy, dz) = (d(0), d(1), d(2));
        CVec3::new(dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0])
    }

    #[test]
    fn wave_function_curls() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10 {
            let x = random_dir(&mut rng) * rng.gen_range(0.3..1.8);
            let omega = rng.gen_range(0.5..3.0);
            for kind in [WaveKind::Regular, WaveKind::Radiating] {
                for mode in [ModeIndex::new(1, 0).unwrap(), ModeIndex::new(3, -2).unwrap(), ModeIndex::new(4, 1).unwrap()] {
                    let w = wave_mn(mode, omega, &x, kind).unwrap();
                    let xh = x.normalize().map(|c| Complex64::new(c, 0.0));
                    assert!(xh.dot(&w.value).norm() < 1e-12 * w.value.norm().max(1.0));
                    let val = |p: Point| wave_mn(mode, omega, &p, kind).unwrap().value;
                    let curl_fd = fd_curl(&val, &x, 1e-4);
                    let scale = w.curl.norm().max(1.0);
                    assert!((curl_fd - w.curl).norm() < 1e-6 * scale, "{mode:?} {kind:?}");
                    // curl curl M = ω² M
                    let cur = |p: Point| wave_mn(mode, omega, &p, kind).unwrap().curl;
                    let cc = fd_curl(&cur, &x, 1e-4);
                    assert!((cc - w.value * Complex64::new(omega * omega, 0.0)).norm() < 1e-5 * scale);
                }
            }
        }
    }

    #[test]
    fn curl_convergence_order() {
        let mode = ModeIndex::new(2, 1).unwrap();
        let x = Point::new(0.4, -0.7, 0.5);
        let w = wave_mn(mode, 1.7, &x, WaveKind::Radiating).unwrap();
        let val = |p: Point| wave_mn(mode, 1.7, &p, WaveKind::Radiating).unwrap().value;
        let errs: Vec<f64> = [1e-3, 5e-4, 2.5e-4].iter().map(|&h| (fd_curl(&val, &x, h) - w.curl).norm()).collect();
        for k in 0..2 {
            let order = (errs[k] / errs[k + 1]).log2();
            assert!((order - 2.0).abs() < 0.2, "{order}");
        }
    }

    #[test]
    fn high_orders_stay_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let x = random_dir(&mut rng) * rng.gen_range(0.05..2.0);
            let omega = rng.gen_range(0.5..5.0);
            for m in [-60i64, -7, 0, 31, 60] {
                let mode = ModeIndex::new(60, m).unwrap();
                for kind in [WaveKind::Regular, WaveKind::Radiating] {
                    let w = wave_mn(mode, omega, &x, kind).unwrap();
                    assert!(w.value.iter().chain(w.curl.iter()).all(|c| c.re.is_finite() && c.im.is_finite()));
                }
            }
        }
    }
}
