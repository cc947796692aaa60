//! Electrostatics of an electron above a vacuum / neon / substrate stack.
//!
//! The image potential is `P * integral_0^inf Lambda_L(k) exp(-2kz) dk` with
//! `P = e^2 / (8 pi eps0)`. The reflection coefficient tends to the bulk value
//! `Lambda_inf = (1 - eps_ne) / (1 + eps_ne)` for `kL >> 1`, so the integral is
//! split into the closed-form bulk part `Lambda_inf / (2z)` and a residual that
//! decays like `exp(-2k(z + L))` and is integrated numerically.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::constants::{PhysicalConstants, MEV_PER_NM_PER_V_PER_M};
use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Relative tolerance on the numerically integrated residual.
pub const QUADRATURE_REL_TOL: f64 = 1e-8;
/// Neglected tail of the residual integrand, relative to its value at k = 0.
pub const QUADRATURE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Substrate {
    /// Perfect conductor (eps_b -> infinity).
    Superconductor,
    /// Dielectric with relative permittivity `eps_b`.
    Dielectric { eps_b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thickness {
    /// Layer thickness in nm. Zero is accepted for the mirror-charge limit.
    Finite(f64),
    /// Bulk neon.
    Infinite,
}

impl Thickness {
    pub fn finite(self) -> Option<f64> {
        match self {
            Thickness::Finite(l) => Some(l),
            Thickness::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Thickness::Infinite)
    }
}

impl std::fmt::Display for Thickness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Thickness::Finite(l) => write!(f, "{l} nm"),
            Thickness::Infinite => write!(f, "inf nm"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricStack {
    eps_neon: f64,
    substrate: Substrate,
    thickness: Thickness,
}

impl DielectricStack {
    pub fn new(eps_neon: f64, substrate: Substrate, thickness: Thickness) -> Result<Self> {
        if !(eps_neon > 1.0 && eps_neon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps_neon must exceed 1, got {eps_neon}"
            )));
        }
        if let Substrate::Dielectric { eps_b } = substrate {
            if !(eps_b >= 1.0 && eps_b.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "eps_b must be at least 1, got {eps_b}"
                )));
            }
        }
        if let Thickness::Finite(l) = thickness {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "thickness must be non-negative, got {l}"
                )));
            }
        }
        Ok(Self {
            eps_neon,
            substrate,
            thickness,
        })
    }

    /// Neon on a superconductor with the default neon permittivity.
    pub fn superconductor(thickness: Thickness) -> Result<Self> {
        Self::new(
            PhysicalConstants::codata().eps_neon_default,
            Substrate::Superconductor,
            thickness,
        )
    }

    /// Neon on silicon with the default permittivities.
    pub fn silicon(thickness: Thickness) -> Result<Self> {
        let c = PhysicalConstants::codata();
        Self::new(
            c.eps_neon_default,
            Substrate::Dielectric {
                eps_b: c.eps_si_default,
            },
            thickness,
        )
    }

    pub fn with_thickness(&self, thickness: Thickness) -> Result<Self> {
        Self::new(self.eps_neon, self.substrate, thickness)
    }

    pub fn eps_neon(&self) -> f64 {
        self.eps_neon
    }

    pub fn substrate(&self) -> Substrate {
        self.substrate
    }

    pub fn thickness(&self) -> Thickness {
        self.thickness
    }

    /// `Lambda_inf = (1 - eps_ne) / (1 + eps_ne)`.
    pub fn bulk_reflection(&self) -> f64 {
        (1.0 - self.eps_neon) / (1.0 + self.eps_neon)
    }
}

/// Uniform external field along +z (away from the substrate), V/m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSpec {
    e_ex: f64,
}

impl FieldSpec {
    pub fn new(e_ex: f64) -> Result<Self> {
        if !e_ex.is_finite() {
            return Err(Error::InvalidParameter(format!("field must be finite, got {e_ex}")));
        }
        Ok(Self { e_ex })
    }

    pub fn zero() -> Self {
        Self { e_ex: 0.0 }
    }

    /// Field in V/m.
    pub fn volts_per_metre(&self) -> f64 {
        self.e_ex
    }

    /// Field as force on one electron charge, meV/nm.
    pub fn mev_per_nm(&self) -> f64 {
        self.e_ex * MEV_PER_NM_PER_V_PER_M
    }
}

pub fn reflection_coefficient(stack: &DielectricStack, k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("wavenumber must be non-negative, got {k}")));
    }
    let l = match stack.thickness {
        Thickness::Infinite => return Ok(stack.bulk_reflection()),
        Thickness::Finite(l) => l,
    };
    let t = (k * l).tanh();
    let ne = stack.eps_neon;
    Ok(match stack.substrate {
        Substrate::Superconductor => (t - ne) / (t + ne),
        Substrate::Dielectric { eps_b } => {
            ((1.0 - eps_b) * ne + (eps_b - ne * ne) * t) / ((1.0 + eps_b) * ne + (eps_b + ne * ne) * t)
        }
    })
}

/// Image potential `V_perp(L, z)` in meV for an electron at height `z` nm.
pub fn perpendicular_potential(stack: &DielectricStack, consts: &PhysicalConstants, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("image potential diverges at z = {z} nm")));
    }
    let bulk_lambda = stack.bulk_reflection();
    let bulk = bulk_lambda / (2.0 * z);
    let l = match stack.thickness {
        Thickness::Infinite => return Ok(consts.image_prefactor * bulk),
        Thickness::Finite(l) => l,
    };
    let k_max = -QUADRATURE_TAIL.ln() / (2.0 * (z + l));
    let tol = Tolerance {
        absolute: 1e-12 * bulk.abs(),
        relative: QUADRATURE_REL_TOL,
        max_intervals: 500,
    };
    let residual = quadrature::integrate(
        |k| {
            let lambda = reflection_coefficient(stack, k).unwrap_or(f64::NAN);
            (lambda - bulk_lambda) * (-2.0 * k * z).exp()
        },
        0.0,
        k_max,
        tol,
    )?;
    Ok(consts.image_prefactor * (bulk + residual.value))
}

/// Partial sum of the multiple-image expansion of the image potential.
///
/// Writing `q = exp(-2kL)`, the reflection coefficient is a ratio of linear
/// functions of `q` and expands as a geometric series `sum_n c_n q^n`. Each
/// term integrates in closed form to `c_n / (2 (z + n L))`. `n_terms` counts
/// the bulk term `c_0 / (2z)` as the first term. Independent of the
/// quadrature path; used to verify it.
pub fn image_series_oracle(stack: &DielectricStack, consts: &PhysicalConstants, z: f64, n_terms: usize) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("image potential diverges at z = {z} nm")));
    }
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be at least 1".into()));
    }
    let l = match stack.thickness {
        Thickness::Infinite => {
            return Err(Error::Unsupported("image series needs a finite layer".into()));
        }
        Thickness::Finite(l) => l,
    };
    let ne = stack.eps_neon;
    // Lambda = (a + b t) / (c + d t), t = tanh(kL) = (1 - q) / (1 + q).
    let (a, b, c, d) = match stack.substrate {
        Substrate::Superconductor => (-ne, 1.0, ne, 1.0),
        Substrate::Dielectric { eps_b } => ((1.0 - eps_b) * ne, eps_b - ne * ne, (1.0 + eps_b) * ne, eps_b + ne * ne),
    };
    let (num0, num1) = (a + b, a - b);
    let (den0, den1) = (c + d, c - d);
    let ratio = -den1 / den0;
    let lead = num0 / den0;
    let slope = num1 / den0;

    let mut sum = lead / (2.0 * z);
    let mut ratio_pow = 1.0; // ratio^(n-1)
    for n in 1..n_terms {
        let coeff = lead * ratio_pow * ratio + slope * ratio_pow;
        sum += coeff / (2.0 * (z + n as f64 * l));
        ratio_pow *= ratio;
    }
    Ok(consts.image_prefactor * sum)
}

/// `dV_ex/dE_ex` at height `z`, meV per (V/m).
///
/// The zero of potential is the grounded substrate surface `z = -L`; for bulk
/// neon it is the neon surface.
pub fn field_coupling(stack: &DielectricStack, z: f64) -> Result<f64> {
    let inside = 1.0 / stack.eps_neon;
    let lever = match stack.thickness {
        Thickness::Finite(l) => {
            if z < -l {
                return Err(Error::Domain(format!(
                    "z = {z} nm lies inside the substrate (L = {l} nm)"
                )));
            }
            if z < 0.0 {
                inside * (z + l)
            } else {
                inside * l + z
            }
        }
        Thickness::Infinite => {
            if z < 0.0 {
                inside * z
            } else {
                z
            }
        }
    };
    Ok(lever * MEV_PER_NM_PER_V_PER_M)
}

/// Potential energy of the electron in the external field, meV.
pub fn external_potential(stack: &DielectricStack, field: &FieldSpec, z: f64) -> Result<f64> {
    Ok(field.volts_per_metre() * field_coupling(stack, z)?)
}

/// Image potential with the short-distance cutoff applied: `V_perp(max(z, z_c))`.
pub fn clamped_image_potential(stack: &DielectricStack, consts: &PhysicalConstants, z: f64) -> Result<f64> {
    perpendicular_potential(stack, consts, z.max(consts.cutoff_zc))
}

/// Total potential seen by the electron, meV.
///
/// Inside the neon (`z < 0`) the electron meets the Pauli barrier; between the
/// surface and the cutoff the image potential is held at its cutoff value.
pub fn total_perpendicular_potential(
    stack: &DielectricStack,
    field: &FieldSpec,
    consts: &PhysicalConstants,
    z: f64,
) -> Result<f64> {
    let v_ex = external_potential(stack, field, z)?;
    if z < 0.0 {
        Ok(consts.barrier_height + v_ex)
    } else {
        Ok(clamped_image_potential(stack, consts, z)? + v_ex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey {
    thickness: Option<u64>,
    substrate: Option<u64>,
    eps_neon: u64,
    prefactor: u64,
    cutoff: u64,
    grid: (u64, u64, usize),
}

/// Memoized clamped image potential on solver grids, keyed by stack,
/// constants and grid. Safe to share between threads.
#[derive(Debug, Default)]
pub struct ImagePotentialCache {
    tables: RwLock<HashMap<CacheKey, Arc<[f64]>>>,
}

impl ImagePotentialCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tables.read().map(|t| t.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        if let Ok(mut t) = self.tables.write() {
            t.clear();
        }
    }

    /// Clamped image potential at every node of a uniform grid
    /// `z_min + i (z_max - z_min) / (n - 1)`.
    pub fn table(
        &self,
        stack: &DielectricStack,
        consts: &PhysicalConstants,
        z_min: f64,
        z_max: f64,
        n_points: usize,
    ) -> Result<Arc<[f64]>> {
        let key = CacheKey {
            thickness: stack.thickness.finite().map(f64::to_bits),
            substrate: match stack.substrate {
                Substrate::Superconductor => None,
                Substrate::Dielectric { eps_b } => Some(eps_b.to_bits()),
            },
            eps_neon: stack.eps_neon.to_bits(),
            prefactor: consts.image_prefactor.to_bits(),
            cutoff: consts.cutoff_zc.to_bits(),
            grid: (z_min.to_bits(), z_max.to_bits(), n_points),
        };
        if let Some(hit) = self.tables.read().ok().and_then(|t| t.get(&key).cloned()) {
            return Ok(hit);
        }
        let step = (z_max - z_min) / (n_points - 1) as f64;
        let values = (0..n_points)
            .into_par_iter()
            .map(|i| clamped_image_potential(stack, consts, z_min + i as f64 * step))
            .collect::<Result<Vec<f64>>>()?;
        let table: Arc<[f64]> = values.into();
        if let Ok(mut t) = self.tables.write() {
            return Ok(t.entry(key).or_insert(table).clone());
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::codata()
    }

    fn sc(l: f64) -> DielectricStack {
        DielectricStack::superconductor(Thickness::Finite(l)).unwrap()
    }

    #[test]
    fn reflection_limits() {
        assert_eq!(reflection_coefficient(&sc(10.0), 0.0).unwrap(), -1.0);
        let expected = (1.0f64.tanh() - 1.244) / (1.0f64.tanh() + 1.244);
        assert_relative_eq!(
            reflection_coefficient(&sc(10.0), 0.1).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(expected, -0.24053, max_relative = 1e-4);
        assert_relative_eq!(
            reflection_coefficient(&sc(10.0), 1e3).unwrap(),
            -0.108734,
            max_relative = 1e-5
        );
        let si = DielectricStack::silicon(Thickness::Finite(10.0)).unwrap();
        assert_relative_eq!(
            reflection_coefficient(&si, 0.0).unwrap(),
            -11.0 / 13.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            reflection_coefficient(&si, 1e3).unwrap(),
            -0.108734,
            max_relative = 1e-5
        );
        let bulk = DielectricStack::superconductor(Thickness::Infinite).unwrap();
        assert_eq!(reflection_coefficient(&bulk, 0.3).unwrap(), bulk.bulk_reflection());
    }

    #[test]
    fn negative_wavenumber_rejected() {
        assert!(matches!(reflection_coefficient(&sc(10.0), -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn stack_validation() {
        assert!(DielectricStack::new(1.0, Substrate::Superconductor, Thickness::Infinite).is_err());
        assert!(DielectricStack::new(1.244, Substrate::Dielectric { eps_b: 0.5 }, Thickness::Infinite).is_err());
        assert!(DielectricStack::new(1.244, Substrate::Superconductor, Thickness::Finite(-1.0)).is_err());
        assert!(DielectricStack::new(1.244, Substrate::Superconductor, Thickness::Finite(0.0)).is_ok());
    }

    #[test]
    fn bulk_and_mirror_limits() {
        let c = consts();
        let bulk = DielectricStack::superconductor(Thickness::Infinite).unwrap();
        let v = perpendicular_potential(&bulk, &c, 1.0).unwrap();
        assert_relative_eq!(v, -39.14, max_relative = 1e-3);
        assert_relative_eq!(
            v,
            c.image_prefactor * bulk.bulk_reflection() / 2.0,
            max_relative = 1e-15
        );
        let mirror = perpendicular_potential(&sc(0.0), &c, 1.0).unwrap();
        assert_relative_eq!(mirror, -359.991, max_relative = 1e-5);
    }

    #[test]
    fn potential_rejects_nonpositive_height() {
        assert!(perpendicular_potential(&sc(10.0), &consts(), 0.0).is_err());
        assert!(perpendicular_potential(&sc(10.0), &consts(), -1.0).is_err());
    }

    #[test]
    fn series_first_term_is_bulk() {
        let c = consts();
        for stack in [sc(10.0), DielectricStack::silicon(Thickness::Finite(5.0)).unwrap()] {
            let v = image_series_oracle(&stack, &c, 2.0, 1).unwrap();
            assert_relative_eq!(
                v,
                c.image_prefactor * stack.bulk_reflection() / 4.0,
                max_relative = 1e-14
            );
        }
        let bulk = DielectricStack::superconductor(Thickness::Infinite).unwrap();
        assert!(matches!(
            image_series_oracle(&bulk, &c, 1.0, 5),
            Err(Error::Unsupported(_))
        ));
        assert!(image_series_oracle(&sc(1.0), &c, 1.0, 0).is_err());
    }

    #[test]
    fn quadrature_matches_series() {
        let c = consts();
        let stack = sc(10.0);
        let quad = perpendicular_potential(&stack, &c, 2.0).unwrap();
        let series = image_series_oracle(&stack, &c, 2.0, 50).unwrap();
        assert_relative_eq!(quad, series, max_relative = 1e-6);
    }

    #[test]
    fn far_above_thin_superconducting_layer_approaches_mirror_charge() {
        let c = consts();
        let stack = sc(10.0);
        let z = 100.0;
        let series = image_series_oracle(&stack, &c, z, 200).unwrap();
        let quad = perpendicular_potential(&stack, &c, z).unwrap();
        assert_relative_eq!(quad, series, max_relative = 1e-6);
        let mirror = -c.image_prefactor / (2.0 * z);
        let bulk = c.image_prefactor * stack.bulk_reflection() / (2.0 * z);
        assert!(((series - mirror) / mirror).abs() < 0.1);
        assert!(series < 5.0 * bulk);
    }

    #[test]
    fn external_potential_values() {
        let stack = sc(10.0);
        let f = FieldSpec::new(1e6).unwrap();
        assert_eq!(external_potential(&stack, &f, -10.0).unwrap(), 0.0);
        assert_relative_eq!(
            external_potential(&stack, &f, 0.0).unwrap(),
            8.0386,
            max_relative = 1e-4
        );
        let below = external_potential(&stack, &f, -1e-12).unwrap();
        let above = external_potential(&stack, &f, 0.0).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-12);
        assert!(external_potential(&stack, &f, -10.5).is_err());
    }

    #[test]
    fn external_potential_is_linear() {
        let stack = sc(7.0);
        for z in [-3.0, 0.0, 0.5, 12.0] {
            let one = external_potential(&stack, &FieldSpec::new(3.7e5).unwrap(), z).unwrap();
            let two = external_potential(&stack, &FieldSpec::new(7.4e5).unwrap(), z).unwrap();
            assert_eq!(two, 2.0 * one);
        }
    }

    #[test]
    fn total_potential_regions() {
        let c = consts();
        let stack = sc(10.0);
        let f = FieldSpec::new(2e5).unwrap();
        let inside = total_perpendicular_potential(&stack, &f, &c, -0.05).unwrap();
        assert_relative_eq!(inside, 700.0 + external_potential(&stack, &f, -0.05).unwrap());
        let half = 0.5 * c.cutoff_zc;
        let clamped = total_perpendicular_potential(&stack, &f, &c, half).unwrap();
        let expected =
            perpendicular_potential(&stack, &c, c.cutoff_zc).unwrap() + external_potential(&stack, &f, half).unwrap();
        assert_relative_eq!(clamped, expected, max_relative = 1e-14);
        let zero = FieldSpec::zero();
        assert_eq!(
            total_perpendicular_potential(&stack, &zero, &c, 5.0).unwrap(),
            perpendicular_potential(&stack, &c, 5.0).unwrap()
        );
        let bulk = DielectricStack::superconductor(Thickness::Infinite).unwrap();
        assert_relative_eq!(
            total_perpendicular_potential(&bulk, &zero, &c, 1.0).unwrap(),
            -39.14,
            max_relative = 1e-3
        );
    }

    #[test]
    fn cache_reuses_tables() {
        let cache = ImagePotentialCache::new();
        let c = consts();
        let a = cache.table(&sc(10.0), &c, -2.0, 40.0, 600).unwrap();
        let b = cache.table(&sc(10.0), &c, -2.0, 40.0, 600).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.table(&sc(11.0), &c, -2.0, 40.0, 600).unwrap();
        assert_eq!(cache.len(), 2);
        assert_eq!(a[0], perpendicular_potential(&sc(10.0), &c, c.cutoff_zc).unwrap());
    }
}
