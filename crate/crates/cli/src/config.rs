//! Run configuration: strict TOML with unit-tagged values.

use std::path::{Path, PathBuf};

use neontrap_core::bound_states::{PerpendicularGridSpec, MIN_GRID_POINTS};
use neontrap_core::lateral::{CURVE_RANGE, DEFAULT_KNOTS, DEFAULT_RADIAL_POINTS, MIN_KNOTS};
use neontrap_core::{NeonMaterialData, PhysicalConstants, Quantity, Substrate, Thickness, Unit};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub substrate: RawSubstrate,
    #[serde(default)]
    pub constants: RawConstants,
    #[serde(default)]
    pub grid: RawGrid,
    #[serde(default)]
    pub potential: RawPotential,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub lateral: RawLateral,
    #[serde(default)]
    pub growth: RawGrowth,
    #[serde(default)]
    pub output: RawOutput,
    #[serde(default)]
    pub run: RawRun,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawSubstrate {
    pub kind: Option<String>,
    pub eps_b: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConstants {
    pub eps_neon: Option<f64>,
    pub barrier_height: Option<String>,
    pub cutoff_zc: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub n_points: Option<usize>,
    pub z_max: Option<String>,
    pub depth_below_surface: Option<String>,
    pub rho_max: Option<String>,
    pub radial_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawPotential {
    pub z_step: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub thickness: Option<Vec<String>>,
    pub field: Option<Vec<String>>,
    pub delta_l: Option<Vec<String>>,
    pub radius: Option<Vec<String>>,
    pub smoothness: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawLateral {
    pub profile: Option<String>,
    pub l0: Option<String>,
    pub beta0: Option<String>,
    pub alpha_max: Option<u32>,
    pub n_knots: Option<usize>,
    pub table_step: Option<String>,
    pub field_sweep: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrowth {
    pub gamma_sl: Option<String>,
    pub molar_volume: Option<String>,
    pub enthalpy_fusion: Option<String>,
    pub t_bulk: Option<String>,
    pub atomic_mass: Option<String>,
    pub diffusion_coefficient: Option<String>,
    pub radius: Option<String>,
    pub time: Option<String>,
    pub delta_h: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::Config(format!(
                "output.format: expected csv or json, got '{other}'"
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Pillar,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LateralSettings {
    pub profile: ProfileKind,
    pub l0: f64,
    pub beta0: f64,
    pub alpha_max: u32,
    pub n_knots: usize,
    pub table_step: f64,
    pub field_sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSettings {
    pub material: NeonMaterialData,
    pub radius: f64,
    pub time: f64,
    pub delta_h: f64,
}

/// Fully resolved, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub substrate: Substrate,
    pub eps_neon: f64,
    pub constants: PhysicalConstants,
    pub grid: PerpendicularGridSpec,
    pub rho_max: Option<f64>,
    pub radial_points: usize,
    pub z_step: f64,
    pub thicknesses: Vec<Thickness>,
    pub fields: Vec<f64>,
    pub delta_l: Vec<f64>,
    pub radius: Vec<f64>,
    pub smoothness: Vec<f64>,
    pub lateral: LateralSettings,
    pub growth: GrowthSettings,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

fn quantity(key: &str, raw: &str, unit: Unit) -> Result<f64, CliError> {
    let q: Quantity = raw.parse().map_err(|e| CliError::Config(format!("{key}: {e}")))?;
    q.expect(unit).map_err(|e| CliError::Config(format!("{key}: {e}")))
}

fn optional(key: &str, raw: &Option<String>, unit: Unit, default: f64) -> Result<f64, CliError> {
    raw.as_deref().map_or(Ok(default), |s| quantity(key, s, unit))
}

fn list(key: &str, raw: &Option<Vec<String>>, unit: Unit, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let values = match raw {
        None => default.to_vec(),
        Some(items) => items
            .iter()
            .enumerate()
            .map(|(i, s)| quantity(&format!("{key}[{i}]"), s, unit))
            .collect::<Result<_, _>>()?,
    };
    if values.is_empty() {
        return Err(CliError::Config(format!("{key}: list must not be empty")));
    }
    Ok(values)
}

fn check(ok: bool, key: &str, what: &str, value: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{key}: {what}, got {value}")))
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn unit_string(value: f64, unit: Unit) -> String {
    Quantity::new(value, unit).to_string()
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_raw(&raw)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let codata = PhysicalConstants::codata();

        let eps_neon = raw.constants.eps_neon.unwrap_or(codata.eps_neon_default);
        check(
            eps_neon > 1.0 && eps_neon.is_finite(),
            "constants.eps_neon",
            "must exceed 1",
            eps_neon,
        )?;
        let substrate = match raw.substrate.kind.as_deref().unwrap_or("superconductor") {
            "superconductor" => {
                if raw.substrate.eps_b.is_some() {
                    return Err(CliError::Config(
                        "substrate.eps_b: only valid for kind = \"dielectric\"".into(),
                    ));
                }
                Substrate::Superconductor
            }
            "dielectric" => {
                let eps_b = raw.substrate.eps_b.unwrap_or(codata.eps_si_default);
                check(
                    eps_b >= 1.0 && eps_b.is_finite(),
                    "substrate.eps_b",
                    "must be at least 1",
                    eps_b,
                )?;
                Substrate::Dielectric { eps_b }
            }
            other => {
                return Err(CliError::Config(format!(
                    "substrate.kind: expected superconductor or dielectric, got '{other}'"
                )))
            }
        };

        let barrier_height = optional(
            "constants.barrier_height",
            &raw.constants.barrier_height,
            Unit::MilliElectronVolt,
            codata.barrier_height,
        )?;
        check(
            barrier_height > 0.0 && barrier_height.is_finite(),
            "constants.barrier_height",
            "must be positive",
            barrier_height,
        )?;
        let cutoff_zc = optional(
            "constants.cutoff_zc",
            &raw.constants.cutoff_zc,
            Unit::Nanometre,
            codata.cutoff_zc,
        )?;
        check(
            cutoff_zc > 0.0 && cutoff_zc < 5.0,
            "constants.cutoff_zc",
            "must lie in (0, 5) nm",
            cutoff_zc,
        )?;
        let constants = PhysicalConstants {
            barrier_height,
            cutoff_zc,
            eps_neon_default: eps_neon,
            ..codata
        };

        let defaults = PerpendicularGridSpec::default();
        let n_points = raw.grid.n_points.unwrap_or(defaults.n_points);
        check(
            (MIN_GRID_POINTS..=1 << 20).contains(&n_points),
            "grid.n_points",
            "must lie in [500, 1048576]",
            n_points,
        )?;
        let z_max = optional("grid.z_max", &raw.grid.z_max, Unit::Nanometre, defaults.z_max)?;
        check(
            z_max > cutoff_zc + 1.0 && z_max <= 1e3,
            "grid.z_max",
            "must exceed the cutoff by 1 nm and be at most 1000 nm",
            z_max,
        )?;
        let depth = optional(
            "grid.depth_below_surface",
            &raw.grid.depth_below_surface,
            Unit::Nanometre,
            defaults.depth_below_surface,
        )?;
        check(
            depth > 0.0 && depth <= 10.0,
            "grid.depth_below_surface",
            "must lie in (0, 10] nm",
            depth,
        )?;
        let rho_max = raw
            .grid
            .rho_max
            .as_deref()
            .map(|s| quantity("grid.rho_max", s, Unit::Nanometre))
            .transpose()?;
        if let Some(r) = rho_max {
            check(r > 0.0 && r <= 1e5, "grid.rho_max", "must lie in (0, 1e5] nm", r)?;
        }
        let radial_points = raw.grid.radial_points.unwrap_or(DEFAULT_RADIAL_POINTS);
        check(
            (16..=1 << 20).contains(&radial_points),
            "grid.radial_points",
            "must lie in [16, 1048576]",
            radial_points,
        )?;

        let z_step = optional("potential.z_step", &raw.potential.z_step, Unit::Nanometre, 0.01)?;
        check(
            z_step > 0.0 && (z_max - cutoff_zc) / z_step <= 1e6,
            "potential.z_step",
            "must be positive and give at most 1e6 rows",
            z_step,
        )?;

        let thicknesses = match &raw.sweep.thickness {
            None => vec![3.0, 5.0, 10.0, 20.0, 50.0, f64::INFINITY],
            Some(_) => list("sweep.thickness", &raw.sweep.thickness, Unit::Nanometre, &[])?,
        };
        for l in &thicknesses {
            check(*l >= 0.0 && !l.is_nan(), "sweep.thickness", "must be non-negative", l)?;
        }
        let thicknesses = sorted_unique(thicknesses)
            .into_iter()
            .map(|l| {
                if l.is_infinite() {
                    Thickness::Infinite
                } else {
                    Thickness::Finite(l)
                }
            })
            .collect();
        let field_check = |key: &str, v: &[f64]| -> Result<(), CliError> {
            for e in v {
                check(
                    e.is_finite() && e.abs() <= 1e8,
                    key,
                    "must be finite with |E| <= 1e8 V/m",
                    e,
                )?;
            }
            Ok(())
        };
        let fields = sorted_unique(list("sweep.field", &raw.sweep.field, Unit::VoltPerMetre, &[0.0])?);
        field_check("sweep.field", &fields)?;
        let delta_l = sorted_unique(list("sweep.delta_l", &raw.sweep.delta_l, Unit::Nanometre, &[0.5])?);
        let radius = sorted_unique(list("sweep.radius", &raw.sweep.radius, Unit::Nanometre, &[110.0])?);
        let smoothness = sorted_unique(list(
            "sweep.smoothness",
            &raw.sweep.smoothness,
            Unit::Nanometre,
            &[2.0],
        )?);
        for r in &radius {
            check(*r > 0.0 && r.is_finite(), "sweep.radius", "must be positive", r)?;
        }
        for b in &smoothness {
            check(*b > 0.0 && b.is_finite(), "sweep.smoothness", "must be positive", b)?;
        }

        let profile = match raw.lateral.profile.as_deref().unwrap_or("pillar") {
            "pillar" => ProfileKind::Pillar,
            "quadratic" => ProfileKind::Quadratic,
            other => {
                return Err(CliError::Config(format!(
                    "lateral.profile: expected pillar or quadratic, got '{other}'"
                )))
            }
        };
        let l0 = optional("lateral.l0", &raw.lateral.l0, Unit::Nanometre, 10.0)?;
        check(
            l0 >= CURVE_RANGE.0 && l0 <= CURVE_RANGE.1,
            "lateral.l0",
            "must lie in [1, 200] nm",
            l0,
        )?;
        for d in &delta_l {
            check(
                *d > 0.0 && l0 - d >= CURVE_RANGE.0,
                "sweep.delta_l",
                "must be positive and keep L0 - delta_L >= 1 nm",
                d,
            )?;
        }
        let beta0 = optional("lateral.beta0", &raw.lateral.beta0, Unit::InverseSquareNanometre, 1e-4)?;
        check(
            beta0 > 0.0 && beta0.is_finite(),
            "lateral.beta0",
            "must be positive",
            beta0,
        )?;
        if profile == ProfileKind::Quadratic {
            let r =
                rho_max.ok_or_else(|| CliError::Config("grid.rho_max: required for the quadratic profile".into()))?;
            let l_edge = l0 * (1.0 + beta0 * r * r);
            check(
                l_edge <= CURVE_RANGE.1,
                "grid.rho_max",
                "must keep L(rho_max) <= 200 nm for the quadratic profile",
                r,
            )?;
        }
        let alpha_max = raw.lateral.alpha_max.unwrap_or(2);
        check(
            (1..=10).contains(&alpha_max),
            "lateral.alpha_max",
            "must lie in [1, 10]",
            alpha_max,
        )?;
        let n_knots = raw.lateral.n_knots.unwrap_or(DEFAULT_KNOTS);
        check(
            (MIN_KNOTS..=400).contains(&n_knots),
            "lateral.n_knots",
            "must lie in [20, 400]",
            n_knots,
        )?;
        let table_step = optional("lateral.table_step", &raw.lateral.table_step, Unit::Nanometre, 1.0)?;
        check(
            table_step > 0.0 && table_step.is_finite(),
            "lateral.table_step",
            "must be positive",
            table_step,
        )?;
        let field_sweep = sorted_unique(list(
            "lateral.field_sweep",
            &raw.lateral.field_sweep,
            Unit::VoltPerMetre,
            &[-2e5, -1e5, 0.0, 1e5, 2e5],
        )?);
        field_check("lateral.field_sweep", &field_sweep)?;

        let dm = NeonMaterialData::default();
        let g = &raw.growth;
        let material = NeonMaterialData {
            gamma_sl: optional(
                "growth.gamma_sl",
                &g.gamma_sl,
                Unit::MilliJoulePerSquareMetre,
                dm.gamma_sl * 1e3,
            )? * 1e-3,
            molar_volume: optional(
                "growth.molar_volume",
                &g.molar_volume,
                Unit::CubicMetrePerMole,
                dm.molar_volume,
            )?,
            enthalpy_fusion: optional(
                "growth.enthalpy_fusion",
                &g.enthalpy_fusion,
                Unit::JoulePerMole,
                dm.enthalpy_fusion,
            )?,
            t_bulk: optional("growth.t_bulk", &g.t_bulk, Unit::Kelvin, dm.t_bulk)?,
            atomic_mass: optional(
                "growth.atomic_mass",
                &g.atomic_mass,
                Unit::AtomicMassUnit,
                dm.atomic_mass,
            )?,
            diffusion_coefficient: optional(
                "growth.diffusion_coefficient",
                &g.diffusion_coefficient,
                Unit::SquareMillimetrePerSecond,
                dm.diffusion_coefficient,
            )?,
        };
        material
            .validate()
            .map_err(|e| CliError::Config(format!("growth: {e}")))?;
        let growth_radius = optional("growth.radius", &g.radius, Unit::Nanometre, 10.0)?;
        check(
            growth_radius != 0.0 && growth_radius.is_finite(),
            "growth.radius",
            "must be finite and non-zero",
            growth_radius,
        )?;
        let time = optional("growth.time", &g.time, Unit::Second, 1e-5)?;
        check(time > 0.0 && time.is_finite(), "growth.time", "must be positive", time)?;
        let delta_h = optional("growth.delta_h", &g.delta_h, Unit::Nanometre, 25.0)?;
        check(
            delta_h >= 0.0 && delta_h.is_finite(),
            "growth.delta_h",
            "must be non-negative",
            delta_h,
        )?;

        let format = Format::parse(raw.output.format.as_deref().unwrap_or("csv"))?;
        if let Some(t) = raw.run.threads {
            check(t >= 1, "run.threads", "must be at least 1", t)?;
        }

        Ok(Self {
            substrate,
            eps_neon,
            constants,
            grid: PerpendicularGridSpec {
                depth_below_surface: depth,
                z_max,
                n_points,
            },
            rho_max,
            radial_points,
            z_step,
            thicknesses,
            fields,
            delta_l,
            radius,
            smoothness,
            lateral: LateralSettings {
                profile,
                l0,
                beta0,
                alpha_max,
                n_knots,
                table_step,
                field_sweep,
            },
            growth: GrowthSettings {
                material,
                radius: growth_radius,
                time,
                delta_h,
            },
            output_path: raw.output.path.clone(),
            format,
            threads: raw.run.threads,
        })
    }

    /// Every setting written out explicitly.
    pub fn to_raw(&self) -> RawConfig {
        let nm = |v: f64| unit_string(v, Unit::Nanometre);
        let nms = |v: &[f64]| Some(v.iter().map(|&x| nm(x)).collect());
        let vpm = |v: &[f64]| Some(v.iter().map(|&x| unit_string(x, Unit::VoltPerMetre)).collect());
        let (kind, eps_b) = match self.substrate {
            Substrate::Superconductor => ("superconductor", None),
            Substrate::Dielectric { eps_b } => ("dielectric", Some(eps_b)),
        };
        let m = &self.growth.material;
        RawConfig {
            substrate: RawSubstrate {
                kind: Some(kind.into()),
                eps_b,
            },
            constants: RawConstants {
                eps_neon: Some(self.eps_neon),
                barrier_height: Some(unit_string(self.constants.barrier_height, Unit::MilliElectronVolt)),
                cutoff_zc: Some(nm(self.constants.cutoff_zc)),
            },
            grid: RawGrid {
                n_points: Some(self.grid.n_points),
                z_max: Some(nm(self.grid.z_max)),
                depth_below_surface: Some(nm(self.grid.depth_below_surface)),
                rho_max: self.rho_max.map(nm),
                radial_points: Some(self.radial_points),
            },
            potential: RawPotential {
                z_step: Some(nm(self.z_step)),
            },
            sweep: RawSweep {
                thickness: Some(
                    self.thicknesses
                        .iter()
                        .map(|t| nm(t.finite().unwrap_or(f64::INFINITY)))
                        .collect(),
                ),
                field: vpm(&self.fields),
                delta_l: nms(&self.delta_l),
                radius: nms(&self.radius),
                smoothness: nms(&self.smoothness),
            },
            lateral: RawLateral {
                profile: Some(
                    match self.lateral.profile {
                        ProfileKind::Pillar => "pillar",
                        ProfileKind::Quadratic => "quadratic",
                    }
                    .into(),
                ),
                l0: Some(nm(self.lateral.l0)),
                beta0: Some(unit_string(self.lateral.beta0, Unit::InverseSquareNanometre)),
                alpha_max: Some(self.lateral.alpha_max),
                n_knots: Some(self.lateral.n_knots),
                table_step: Some(nm(self.lateral.table_step)),
                field_sweep: vpm(&self.lateral.field_sweep),
            },
            growth: RawGrowth {
                gamma_sl: Some(unit_string(m.gamma_sl * 1e3, Unit::MilliJoulePerSquareMetre)),
                molar_volume: Some(unit_string(m.molar_volume, Unit::CubicMetrePerMole)),
                enthalpy_fusion: Some(unit_string(m.enthalpy_fusion, Unit::JoulePerMole)),
                t_bulk: Some(unit_string(m.t_bulk, Unit::Kelvin)),
                atomic_mass: Some(unit_string(m.atomic_mass, Unit::AtomicMassUnit)),
                diffusion_coefficient: Some(unit_string(m.diffusion_coefficient, Unit::SquareMillimetrePerSecond)),
                radius: Some(nm(self.growth.radius)),
                time: Some(unit_string(self.growth.time, Unit::Second)),
                delta_h: Some(nm(self.growth.delta_h)),
            },
            output: RawOutput {
                path: self.output_path.clone(),
                format: Some(self.format.extension().into()),
            },
            run: RawRun { threads: self.threads },
        }
    }

    /// Resolved configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(&self.to_raw()).expect("configuration serializes")
    }

    /// SHA-256 of the resolved physics configuration. Output location,
    /// format and worker count do not enter the hash.
    pub fn hash(&self) -> String {
        let mut raw = self.to_raw();
        raw.output = RawOutput::default();
        raw.run = RawRun::default();
        let text = toml::to_string(&raw).expect("configuration serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
