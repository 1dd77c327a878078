//! Overflow-safe spherical Bessel/Hankel functions and related constants.

mod bessel;
mod scaled;

pub use bessel::{
    gamma_half_int, gamma_half_int_scaled, ln_gamma_half_int, riccati_combo,
    riccati_combo_scaled, small_arg_leading, sph_bessel, sph_bessel_scaled, BesselTable,
    LeadingForms, ScaledSphBessel, SphBessel, N_CAP,
};
pub use scaled::ScaledComplex;
