use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CloakError, Result};
use crate::geometry::Scenario;
use crate::harmonics::ModeIndex;
use crate::specfun::BesselTable;

/// Multipole coefficients `(p, q)` of the radiating field of the cloaked
/// source, declared supported in `B_{r1}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceCoeffs {
    entries: BTreeMap<ModeIndex, (Complex64, Complex64)>,
}

/// Boundary data `(f⁽¹⁾, f⁽²⁾)` on `∂B₂`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryCoeffs {
    entries: BTreeMap<ModeIndex, (Complex64, Complex64)>,
}

/// One row of a source table document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRow {
    pub n: usize,
    pub m: i64,
    #[serde(default)]
    pub p_re: f64,
    #[serde(default)]
    pub p_im: f64,
    #[serde(default)]
    pub q_re: f64,
    #[serde(default)]
    pub q_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRow {
    pub n: usize,
    pub m: i64,
    #[serde(default)]
    pub f1_re: f64,
    #[serde(default)]
    pub f1_im: f64,
    #[serde(default)]
    pub f2_re: f64,
    #[serde(default)]
    pub f2_im: f64,
}

fn finite(z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(CloakError::InvalidInput(format!("non-finite coefficient {z}")))
    }
}

macro_rules! coeff_table {
    ($ty:ident, $row:ident, $a:ident, $b:ident, $a_re:ident, $a_im:ident, $b_re:ident, $b_im:ident) => {
        impl $ty {
            pub fn new() -> Self {
                Self::default()
            }

            /// Adds to any coefficients already present for `mode`.
            pub fn insert(&mut self, mode: ModeIndex, $a: Complex64, $b: Complex64) -> Result<()> {
                let ($a, $b) = (finite($a)?, finite($b)?);
                let e = self.entries.entry(mode).or_default();
                e.0 += $a;
                e.1 += $b;
                Ok(())
            }

            pub fn single(mode: ModeIndex, $a: Complex64, $b: Complex64) -> Result<Self> {
                let mut t = Self::new();
                t.insert(mode, $a, $b)?;
                Ok(t)
            }

            pub fn get(&self, mode: ModeIndex) -> (Complex64, Complex64) {
                self.entries.get(&mode).copied().unwrap_or_default()
            }

            pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, (Complex64, Complex64))> + '_ {
                self.entries.iter().map(|(k, v)| (*k, *v))
            }

            pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
                self.entries.keys().copied()
            }

            pub fn is_empty(&self) -> bool {
                self.entries.is_empty()
            }

            pub fn max_order(&self) -> usize {
                self.entries.keys().map(|k| k.n()).max().unwrap_or(0)
            }

            /// Keeps only modes with `n ≤ n_max`.
            pub fn truncated(&self, n_max: usize) -> Self {
                Self {
                    entries: self.entries.iter().filter(|(k, _)| k.n() <= n_max).map(|(k, v)| (*k, *v)).collect(),
                }
            }

            pub fn from_rows(rows: &[$row]) -> Result<Self> {
                let mut t = Self::new();
                for r in rows {
                    let mode = ModeIndex::new(r.n, r.m)?;
                    t.insert(mode, Complex64::new(r.$a_re, r.$a_im), Complex64::new(r.$b_re, r.$b_im))?;
                }
                Ok(t)
            }

            pub fn to_rows(&self) -> Vec<$row> {
                self.iter()
                    .map(|(k, ($a, $b))| $row {
                        n: k.n(),
                        m: k.m(),
                        $a_re: $a.re,
                        $a_im: $a.im,
                        $b_re: $b.re,
                        $b_im: $b.im,
                    })
                    .collect()
            }
        }

        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                self.to_rows().serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let rows = Vec::<$row>::deserialize(d)?;
                Self::from_rows(&rows).map_err(serde::de::Error::custom)
            }
        }
    };
}

coeff_table!(SourceCoeffs, SourceRow, p, q, p_re, p_im, q_re, q_im);
coeff_table!(BoundaryCoeffs, BoundaryRow, f1, f2, f1_re, f1_im, f2_re, f2_im);

impl SourceCoeffs {
    /// `max_m S_n² (|p| + |q|) |hₙ(kω r₁)|` per order. For a source that is
    /// genuinely supported in `B_{r1}` this decays faster than any power of
    /// `n`; a table whose last orders dominate its first ones is suspect.
    pub fn decay_certificate(&self, scenario: &Scenario) -> Result<Vec<(usize, f64)>> {
        let n_max = self.max_order();
        if n_max == 0 {
            return Ok(Vec::new());
        }
        let table = BesselTable::new(n_max, scenario.k() * scenario.omega() * scenario.r1())?;
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (k, (p, q)) in self.iter() {
            let v = (table.h(k.n()) * ((p.norm() + q.norm()) * k.s_sq() as f64)).abs();
            let e = out.entry(k.n()).or_insert(0.0);
            *e = e.max(v);
        }
        Ok(out.into_iter().collect())
    }
}
