//! Spherical Bessel and Hankel functions of real argument.
//!
//! `j_n` comes from Miller's downward recurrence normalized against the
//! closed forms of `j_0` or `j_1`; `y_n` from the upward recurrence seeded
//! with `y_0`, `y_1`. Both recurrences rescale by exact powers of two so the
//! results stay meaningful where the plain doubles would underflow
//! (`j_n`, `n ≫ t`) or overflow (`y_n`, `n ≫ t`).
//!
//! ```text
//! f_{n-1}(t) + f_{n+1}(t) = (2n+1)/t · f_n(t)
//! f_n'(t)                 = f_{n-1}(t) - (n+1)/t · f_n(t)
//! 𝒥_n(t) = j_n + t j_n' = t j_{n-1} - n j_n
//! ℋ_n(t) = h_n + t h_n' = t h_{n-1} - n h_n
//! ```

use num_complex::Complex64;

use super::scaled::ScaledComplex;
use crate::error::{CloakError, Result};

/// Largest supported order.
pub const N_CAP: usize = 200;

// 2^332 ≈ 8.7e99; rescaling by a power of two is exact
const RESCALE_BITS: i64 = 332;
const RESCALE_AT: f64 = 8.749_002_899_132_048e99;

/// Values `j_k(t)`, `y_k(t)` for `k = 0..=n_max` at one argument, in scaled form.
#[derive(Debug, Clone)]
pub struct BesselTable {
    t: f64,
    n_max: usize,
    j: Vec<ScaledComplex>,
    y: Vec<ScaledComplex>,
}

impl BesselTable {
    pub fn new(n_max: usize, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CloakError::Domain(format!(
                "spherical Bessel argument must be positive and finite, got {t}"
            )));
        }
        if n_max > N_CAP {
            return Err(CloakError::Capability { n: n_max, cap: N_CAP });
        }
        // one extra order so that derivatives at n = 0 are available
        let top = n_max.max(1);
        Ok(Self {
            t,
            n_max,
            j: miller_j(top, t),
            y: upward_y(top, t),
        })
    }

    pub fn arg(&self) -> f64 {
        self.t
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn j(&self, n: usize) -> ScaledComplex {
        self.j[n]
    }

    pub fn y(&self, n: usize) -> ScaledComplex {
        self.y[n]
    }

    pub fn h(&self, n: usize) -> ScaledComplex {
        self.j[n] + ScaledComplex::i() * self.y[n]
    }

    /// `j_n'(t)`.
    pub fn dj(&self, n: usize) -> ScaledComplex {
        derivative(&self.j, n, self.t)
    }

    /// `y_n'(t)`.
    pub fn dy(&self, n: usize) -> ScaledComplex {
        derivative(&self.y, n, self.t)
    }

    /// `h_n'(t)`.
    pub fn dh(&self, n: usize) -> ScaledComplex {
        self.dj(n) + ScaledComplex::i() * self.dy(n)
    }

    /// `𝒥_n(t) = j_n(t) + t j_n'(t)`.
    pub fn jcal(&self, n: usize) -> ScaledComplex {
        riccati(&self.j, n, self.t)
    }

    /// `t y_n'(t) + y_n(t)`, the second-kind companion of `𝒥_n`.
    pub fn ycal(&self, n: usize) -> ScaledComplex {
        riccati(&self.y, n, self.t)
    }

    /// `ℋ_n(t) = h_n(t) + t h_n'(t)`.
    pub fn hcal(&self, n: usize) -> ScaledComplex {
        self.jcal(n) + ScaledComplex::i() * self.ycal(n)
    }
}

fn derivative(f: &[ScaledComplex], n: usize, t: f64) -> ScaledComplex {
    if n == 0 {
        -f[1]
    } else {
        f[n - 1] - f[n] * ((n as f64 + 1.0) / t)
    }
}

fn riccati(f: &[ScaledComplex], n: usize, t: f64) -> ScaledComplex {
    if n == 0 {
        f[0] - f[1] * t
    } else {
        f[n - 1] * t - f[n] * (n as f64)
    }
}

/// Downward recurrence from `n_top + max(15, ⌈2t⌉)`, normalized against
/// whichever of `j_0`, `j_1` is larger in magnitude.
fn miller_j(n_top: usize, t: f64) -> Vec<ScaledComplex> {
    let start = n_top + 15usize.max((2.0 * t).ceil() as usize);
    let mut mant = vec![0.0; n_top + 1];
    let mut exp2 = vec![0_i64; n_top + 1];

    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1.0_f64; // J_k
    let mut scale = 0_i64;
    for k in (1..=start).rev() {
        if k <= n_top {
            mant[k] = cur;
            exp2[k] = scale;
        }
        let prev = (2 * k + 1) as f64 / t * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            next /= RESCALE_AT;
            scale += RESCALE_BITS;
        }
    }
    mant[0] = cur;
    exp2[0] = scale;

    let (s, c) = t.sin_cos();
    let j0 = s / t;
    let j1 = s / (t * t) - c / t;
    let (reference, exact) = if j0.abs() >= j1.abs() { (0, j0) } else { (1, j1) };
    let norm = ScaledComplex::from_real(exact / mant[reference]).mul_pow2(-exp2[reference]);

    (0..=n_top)
        .map(|k| ScaledComplex::from_real(mant[k]).mul_pow2(exp2[k]) * norm)
        .collect()
}

fn upward_y(n_top: usize, t: f64) -> Vec<ScaledComplex> {
    let (s, c) = t.sin_cos();
    let mut out = Vec::with_capacity(n_top + 1);
    let mut prev = -c / t;
    let mut cur = -c / (t * t) - s / t;
    let mut scale = 0_i64;
    out.push(ScaledComplex::from_real(prev));
    if n_top >= 1 {
        out.push(ScaledComplex::from_real(cur));
    }
    for k in 1..n_top {
        let next = (2 * k + 1) as f64 / t * cur - prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            scale += RESCALE_BITS;
        }
        out.push(ScaledComplex::from_real(cur).mul_pow2(scale));
    }
    out
}

/// Plain-double view of `j_n`, `y_n`, `h_n^(1)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphBessel {
    pub j: f64,
    pub y: f64,
    pub h: Complex64,
}

#[derive(Debug, Clone, Copy)]
pub struct ScaledSphBessel {
    pub j: ScaledComplex,
    pub y: ScaledComplex,
    pub h: ScaledComplex,
}

pub fn sph_bessel_scaled(n: usize, t: f64) -> Result<ScaledSphBessel> {
    let table = BesselTable::new(n, t)?;
    Ok(ScaledSphBessel {
        j: table.j(n),
        y: table.y(n),
        h: table.h(n),
    })
}

/// `j_n(t)`, `y_n(t)`, `h_n^(1)(t)`. Values outside the double range come
/// back as zero or infinity; use [`sph_bessel_scaled`] there.
pub fn sph_bessel(n: usize, t: f64) -> Result<SphBessel> {
    let s = sph_bessel_scaled(n, t)?;
    let j = s.j.to_complex().re;
    let y = s.y.to_complex().re;
    Ok(SphBessel {
        j,
        y,
        h: Complex64::new(j, y),
    })
}

/// `(𝒥_n(t), ℋ_n(t))` in scaled form.
pub fn riccati_combo_scaled(n: usize, t: f64) -> Result<(ScaledComplex, ScaledComplex)> {
    let table = BesselTable::new(n, t)?;
    Ok((table.jcal(n), table.hcal(n)))
}

pub fn riccati_combo(n: usize, t: f64) -> Result<(f64, Complex64)> {
    let (jc, hc) = riccati_combo_scaled(n, t)?;
    Ok((jc.to_complex().re, hc.to_complex()))
}

/// `ln Γ(n + 1/2)` summed exactly from `Γ(1/2) = √π`.
pub fn ln_gamma_half_int(n: usize) -> f64 {
    let mut acc = 0.5 * std::f64::consts::PI.ln();
    for k in 1..=n {
        acc += (k as f64 - 0.5).ln();
    }
    acc
}

/// `Γ(n + 1/2) = (2n-1)!!/2^n · √π`. Overflows to infinity past `n ≈ 170`.
pub fn gamma_half_int(n: usize) -> f64 {
    let mut acc = std::f64::consts::PI.sqrt();
    for k in 1..=n {
        acc *= k as f64 - 0.5;
    }
    acc
}

pub fn gamma_half_int_scaled(n: usize) -> ScaledComplex {
    ScaledComplex::from_log_real(ln_gamma_half_int(n), false)
}

/// Leading small-argument forms of `j_n`, `h_n^(1)`, `𝒥_n`, `ℋ_n`.
#[derive(Debug, Clone, Copy)]
pub struct LeadingForms {
    pub j: ScaledComplex,
    pub h: ScaledComplex,
    pub jcal: ScaledComplex,
    pub hcal: ScaledComplex,
}

/// ```text
/// j_n ≈ √π / (2Γ(n+3/2)) · (t/2)^n        𝒥_n ≈ (n+1) · j_n lead
/// h_n ≈ -i Γ(n+1/2)/(2√π) · (2/t)^(n+1)   ℋ_n ≈ -n · h_n lead
/// ```
/// Valid for `n ≫ t`; the caller is responsible for the regime.
pub fn small_arg_leading(n: usize, t: f64) -> LeadingForms {
    let ln_sqrt_pi = 0.5 * std::f64::consts::PI.ln();
    let ln2 = std::f64::consts::LN_2;
    let nf = n as f64;
    let ln_j = ln_sqrt_pi - ln2 - ln_gamma_half_int(n + 1) + nf * (0.5 * t).ln();
    let ln_h = ln_gamma_half_int(n) - ln2 - ln_sqrt_pi + (nf + 1.0) * (2.0 / t).ln();
    let j = ScaledComplex::from_log_real(ln_j, false);
    let h = ScaledComplex::from_log_phase(ln_h, Complex64::new(0.0, -1.0));
    LeadingForms {
        j,
        h,
        jcal: j * (nf + 1.0),
        hcal: h * (-nf),
    }
}
