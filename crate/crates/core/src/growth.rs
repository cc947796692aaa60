//! Scalar estimates for neon growth on patterned substrates.

use crate::constants::{ATOMIC_MASS_UNIT, JOULE_PER_MEV, METRE_PER_NM, NM2_PER_MM2, STANDARD_GRAVITY};
use crate::error::{Error, Result};

/// Bulk neon material parameters in SI units unless noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeonMaterialData {
    /// Solid-liquid surface energy, J/m^2.
    pub gamma_sl: f64,
    /// m^3/mol.
    pub molar_volume: f64,
    /// Latent heat of fusion, J/mol.
    pub enthalpy_fusion: f64,
    /// Bulk melting point, K.
    pub t_bulk: f64,
    /// Atomic mass, u.
    pub atomic_mass: f64,
    /// Self-diffusion coefficient, mm^2/s.
    pub diffusion_coefficient: f64,
}

impl Default for NeonMaterialData {
    fn default() -> Self {
        Self {
            gamma_sl: 4.36e-3,
            molar_volume: 13.98e-6,
            enthalpy_fusion: 328.0,
            t_bulk: 24.56,
            atomic_mass: 20.18,
            diffusion_coefficient: 1e-3,
        }
    }
}

impl NeonMaterialData {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_sl", self.gamma_sl),
            ("molar_volume", self.molar_volume),
            ("enthalpy_fusion", self.enthalpy_fusion),
            ("t_bulk", self.t_bulk),
            ("atomic_mass", self.atomic_mass),
            ("diffusion_coefficient", self.diffusion_coefficient),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `Delta T * r_c = -2 gamma V_m T / Delta H`, K nm.
pub fn gibbs_thomson_coefficient(material: &NeonMaterialData) -> f64 {
    -2.0 * material.gamma_sl * material.molar_volume * material.t_bulk / material.enthalpy_fusion / METRE_PER_NM
}

/// Melting-point shift at signed radius of curvature `r_c` (nm, positive for bumps), K.
pub fn gibbs_thomson_shift(material: &NeonMaterialData, r_c: f64) -> Result<f64> {
    if r_c == 0.0 || !r_c.is_finite() {
        return Err(Error::Domain(format!(
            "radius of curvature must be finite and non-zero, got {r_c}"
        )));
    }
    Ok(gibbs_thomson_coefficient(material) / r_c)
}

/// `sqrt(D t)` for `t` in seconds, nm.
pub fn diffusion_length(material: &NeonMaterialData, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be non-negative, got {t} s")));
    }
    Ok((material.diffusion_coefficient * NM2_PER_MM2 * t).sqrt())
}

/// `m g delta_h` for one neon atom, meV.
pub fn gravity_potential_difference(material: &NeonMaterialData, delta_h: f64) -> Result<f64> {
    if !(delta_h >= 0.0 && delta_h.is_finite()) {
        return Err(Error::Domain(format!(
            "height difference must be non-negative, got {delta_h} nm"
        )));
    }
    Ok(material.atomic_mass * ATOMIC_MASS_UNIT * STANDARD_GRAVITY * delta_h * METRE_PER_NM / JOULE_PER_MEV)
}
