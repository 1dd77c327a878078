use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CloakError {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("order {n} exceeds the supported maximum {cap}")]
    Capability { n: usize, cap: usize },

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("degenerate map: {0}")]
    DegenerateMap(String),

    /// `j_n(kω)` vanishes: ω is an interior (cloaked-region) eigenfrequency for mode `n`.
    #[error("interior resonance at mode n={n}: |j_n(kω)| = {magnitude:e} is below the admissibility floor")]
    InteriorResonance { n: usize, magnitude: f64 },

    /// One of the transfer denominators `D_n`, `D_n'` cancels.
    #[error("transfer denominator {which} vanishes at mode n={n} (relative size {relative:e})")]
    TransferResonance {
        n: usize,
        which: &'static str,
        relative: f64,
    },

    /// The outer boundary-matching denominator cancels: ω is an eigenvalue of the background problem.
    #[error("exterior resonance at mode n={n} in the {polarization} chain (relative size {relative:e})")]
    ExteriorResonance {
        n: usize,
        polarization: &'static str,
        relative: f64,
    },

    #[error("quadrature did not reach tolerance {requested:e}; last estimate changed by {achieved:e}")]
    Accuracy { requested: f64, achieved: f64 },

    #[error("point lies on the cloaking interface |x| = 1; use the one-sided trace operations")]
    Interface,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl CloakError {
    /// True for every error that signals an inadmissible frequency.
    pub fn is_resonance(&self) -> bool {
        matches!(
            self,
            CloakError::InteriorResonance { .. }
                | CloakError::TransferResonance { .. }
                | CloakError::ExteriorResonance { .. }
        )
    }

    /// Mode order named by a resonance error.
    pub fn mode(&self) -> Option<usize> {
        match self {
            CloakError::InteriorResonance { n, .. }
            | CloakError::TransferResonance { n, .. }
            | CloakError::ExteriorResonance { n, .. } => Some(*n),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, CloakError>;
