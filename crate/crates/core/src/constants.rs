//! Physical constants and the unit conversion table.
//!
//! Internal units are nm, meV and V/m. Every conversion between those and SI
//! goes through the constants in this file.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Standard gravity used by the growth estimates, m/s^2.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Joules per meV.
pub const JOULE_PER_MEV: f64 = ELEMENTARY_CHARGE * 1e-3;
/// Joules per ueV.
pub const JOULE_PER_UEV: f64 = ELEMENTARY_CHARGE * 1e-6;
/// Metres per nm.
pub const METRE_PER_NM: f64 = 1e-9;
/// nm^2 per mm^2.
pub const NM2_PER_MM2: f64 = 1e12;
/// Energy gained by one electron charge across 1 nm in a 1 V/m field, in meV.
pub const MEV_PER_NM_PER_V_PER_M: f64 = 1e-6;
/// meV per ueV.
pub const MEV_PER_UEV: f64 = 1e-3;

/// The record of physical constants shared by every solver.
///
/// `hbar2_over_2me` and `image_prefactor` default to values derived from the
/// SI constants above. The barrier, cutoff and permittivities are model
/// parameters that the CLI may override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// hbar^2 / (2 m_e), meV nm^2.
    pub hbar2_over_2me: f64,
    /// e^2 / (8 pi eps0), meV nm.
    pub image_prefactor: f64,
    /// Pauli barrier inside the neon, meV.
    pub barrier_height: f64,
    /// Image-potential cutoff above the neon surface, nm.
    pub cutoff_zc: f64,
    /// Relative permittivity of solid neon.
    pub eps_neon_default: f64,
    /// Relative permittivity of silicon.
    pub eps_si_default: f64,
}

impl PhysicalConstants {
    pub fn codata() -> Self {
        let hbar2_over_2me = HBAR * HBAR / (2.0 * ELECTRON_MASS) / JOULE_PER_MEV / (METRE_PER_NM * METRE_PER_NM);
        let image_prefactor = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
            / (8.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY)
            / JOULE_PER_MEV
            / METRE_PER_NM;
        Self {
            hbar2_over_2me,
            image_prefactor,
            barrier_height: 700.0,
            cutoff_zc: 0.23,
            eps_neon_default: 1.244,
            eps_si_default: 12.0,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derived_constants_match_reference_values() {
        let c = PhysicalConstants::codata();
        assert_relative_eq!(c.hbar2_over_2me, 38.0998, max_relative = 1e-6);
        assert_relative_eq!(c.image_prefactor, 719.982, max_relative = 1e-6);
        assert_eq!(c.barrier_height, 700.0);
        assert_eq!(c.cutoff_zc, 0.23);
    }
}
