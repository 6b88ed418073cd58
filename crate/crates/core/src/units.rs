//! Physical constants and unit conversions.
//!
//! Energies and rates are carried in meV throughout, lengths in nm. SI values
//! are only used where a figure of merit is reported in watts or W/cm².

/// ħ²/(2 m_e) in meV·nm² (38.0998 to six digits).
pub const HBAR2_OVER_2ME: f64 = 38.099_821_2;

/// Reduced Planck constant in meV·s.
pub const HBAR_MEV_S: f64 = 6.582_119_569e-13;

/// Angular frequency of a 1 meV energy (rad/s), 1/ħ ≈ 1.519×10¹².
pub const MEV_TO_RAD_PER_S: f64 = 1.0 / HBAR_MEV_S;

/// h·c in meV·µm, converts photon energy to vacuum wavelength.
pub const HC_MEV_UM: f64 = 1_239.841_984;

pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;
pub const HBAR_J_S: f64 = 1.054_571_817e-34;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;
pub const BOLTZMANN_MEV_PER_K: f64 = 8.617_333_262e-2;

/// Joules per meV.
pub const MEV_TO_J: f64 = ELEMENTARY_CHARGE_C * 1e-3;

/// Photon energy (meV) for a vacuum wavelength in µm.
pub fn photon_energy_mev(wavelength_um: f64) -> f64 {
    HC_MEV_UM / wavelength_um
}

/// Vacuum wavelength (µm) of a photon with the given energy in meV.
pub fn wavelength_um(photon_energy_mev: f64) -> f64 {
    HC_MEV_UM / photon_energy_mev
}

/// Energy width (meV) of an ordinary-frequency linewidth given in GHz (h·Δν).
pub fn ghz_to_mev(ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * HBAR_MEV_S * ghz * 1e9
}

/// Rate in rad/s for an energy-scale rate in meV.
pub fn mev_to_rad_per_s(mev: f64) -> f64 {
    mev * MEV_TO_RAD_PER_S
}
