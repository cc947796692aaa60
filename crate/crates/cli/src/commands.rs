//! Subcommand bodies. Each returns its tables in a fixed order.

use log::warn;
use neontrap_core::lateral::{lta_validity_warning, HarmonicFit};
use neontrap_core::{
    diffusion_length, external_potential, field_response, gibbs_thomson_coefficient, gibbs_thomson_shift,
    gravity_potential_difference, lateral_spectrum, mean_height, perpendicular_gap, perpendicular_potential,
    potential_depth, DielectricStack, EnergyCurve, Error as CoreError, FieldSpec, HarmonicFieldModel, LateralOptions,
    PerpendicularSolver, RadialGrid, Substrate, Thickness, ThicknessProfile,
};
use rayon::prelude::*;

use crate::config::{ProfileKind, Settings};
use crate::error::CliError;
use crate::table::{format_g9, Cell, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    PotentialZ,
    GroundSweep,
    Lateral,
    FieldSweep,
    Growth,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::PotentialZ,
        Command::GroundSweep,
        Command::Lateral,
        Command::FieldSweep,
        Command::Growth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::PotentialZ => "potential-z",
            Command::GroundSweep => "ground-sweep",
            Command::Lateral => "lateral",
            Command::FieldSweep => "field-sweep",
            Command::Growth => "growth",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// A table plus the suffix that distinguishes it among a command's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedTable {
    pub suffix: Option<String>,
    pub table: ResultTable,
}

impl NamedTable {
    pub fn label(&self, command: Command) -> String {
        self.suffix.clone().unwrap_or_else(|| command.name().to_string())
    }
}

fn num(v: f64) -> Cell {
    Cell::Num(v)
}

fn text(s: &str) -> Cell {
    Cell::Text(s.to_string())
}

fn thickness_value(t: Thickness) -> f64 {
    t.finite().unwrap_or(f64::INFINITY)
}

fn substrate_label(settings: &Settings) -> String {
    match settings.substrate {
        Substrate::Superconductor => "superconductor".into(),
        Substrate::Dielectric { eps_b } => format!("dielectric(eps_b={})", format_g9(eps_b)),
    }
}

fn solver(settings: &Settings) -> PerpendicularSolver {
    PerpendicularSolver::new(settings.constants, settings.grid)
}

fn stack(settings: &Settings, thickness: Thickness) -> Result<DielectricStack, CliError> {
    DielectricStack::new(settings.eps_neon, settings.substrate, thickness).map_err(|e| CliError::Config(e.to_string()))
}

fn field(e: f64) -> Result<FieldSpec, CliError> {
    FieldSpec::new(e).map_err(|e| CliError::Config(e.to_string()))
}

/// Runs `command` and stamps the shared metadata on each table.
pub fn run(command: Command, settings: &Settings) -> Result<Vec<NamedTable>, CliError> {
    let mut tables = match command {
        Command::PotentialZ => potential_z(settings)?,
        Command::GroundSweep => ground_sweep(settings)?,
        Command::Lateral => lateral(settings)?,
        Command::FieldSweep => field_sweep(settings)?,
        Command::Growth => growth(settings)?,
    };
    let hash = settings.hash();
    let substrate = substrate_label(settings);
    for named in &mut tables {
        let label = named.label(command);
        let t = &mut named.table;
        t.meta("tool", "neontrap");
        t.meta("version", env!("CARGO_PKG_VERSION"));
        t.meta("command", command.name());
        t.meta("table", label);
        t.meta("config_hash", &hash);
        t.meta("substrate", &substrate);
        t.meta("eps_neon", format_g9(settings.eps_neon));
    }
    Ok(tables)
}

fn potential_z(settings: &Settings) -> Result<Vec<NamedTable>, CliError> {
    let zc = settings.constants.cutoff_zc;
    let step = settings.z_step;
    let first = (zc / step - 1e-9).ceil() as i64;
    let last = (settings.grid.z_max / step + 1e-9).floor() as i64;
    let zs: Vec<f64> = (first..=last).map(|k| k as f64 * step).collect();

    settings
        .thicknesses
        .iter()
        .map(|&thickness| {
            let stack = stack(settings, thickness)?;
            let v_perp = zs
                .par_iter()
                .map(|&z| perpendicular_potential(&stack, &settings.constants, z))
                .collect::<Result<Vec<f64>, CoreError>>()?;
            let mut table = ResultTable::new(&[
                ("E_ex", "V/m"),
                ("z", "nm"),
                ("V_perp", "meV"),
                ("V_ex", "meV"),
                ("V_total", "meV"),
            ]);
            for &e in &settings.fields {
                let f = field(e)?;
                for (&z, &vp) in zs.iter().zip(&v_perp) {
                    let vx = external_potential(&stack, &f, z)?;
                    table.push(vec![num(e), num(z), num(vp), num(vx), num(vp + vx)]);
                }
            }
            table.meta("thickness_nm", format_g9(thickness_value(thickness)));
            Ok(NamedTable {
                suffix: Some(format!("L{}", format_g9(thickness_value(thickness)))),
                table,
            })
        })
        .collect()
}

fn ground_sweep(settings: &Settings) -> Result<Vec<NamedTable>, CliError> {
    let solver = solver(settings);
    let points: Vec<(Thickness, f64)> = settings
        .thicknesses
        .iter()
        .flat_map(|&l| settings.fields.iter().map(move |&e| (l, e)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(thickness, e)| -> Result<Vec<Cell>, CliError> {
            let stack = stack(settings, thickness)?;
            let f = field(e)?;
            let head = [num(thickness_value(thickness)), num(e)];
            let flagged = |status: &str| {
                let mut row = head.to_vec();
                row.extend([num(f64::NAN), num(f64::NAN), num(f64::NAN), text(status)]);
                row
            };
            let solution = solver.solve(&stack, &f, 2)?;
            match solver.check_bound(&solution) {
                Ok(()) => {}
                Err(CoreError::Unbound(_)) => return Ok(flagged("unbound")),
                Err(CoreError::NotConverged { .. }) => return Ok(flagged("unconverged")),
                Err(other) => return Err(other.into()),
            }
            let height = mean_height(&solution)?;
            let (gap, status) = if solution.converged[1] {
                (perpendicular_gap(&solution)?, "ok")
            } else {
                (f64::NAN, "gap_unconverged")
            };
            let mut row = head.to_vec();
            row.extend([num(solution.energies[0]), num(height), num(gap), text(status)]);
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = ResultTable::new(&[
        ("L", "nm"),
        ("E_ex", "V/m"),
        ("W_G", "meV"),
        ("h_e", "nm"),
        ("gap", "meV"),
        ("status", ""),
    ]);
    let flagged = rows.iter().filter(|r| r[5] != text("ok")).count();
    for row in rows {
        table.push(row);
    }
    table.meta("flagged_rows", flagged);
    Ok(vec![NamedTable { suffix: None, table }])
}

struct Geometry {
    delta_l: f64,
    radius: f64,
    smoothness: f64,
    profile: ThicknessProfile,
    grid: RadialGrid,
}

fn geometries(settings: &Settings) -> Result<Vec<Geometry>, CliError> {
    let lat = &settings.lateral;
    let bad = |e: CoreError| CliError::Config(e.to_string());
    match lat.profile {
        ProfileKind::Quadratic => {
            let profile = ThicknessProfile::quadratic(lat.l0, lat.beta0).map_err(bad)?;
            let rho_max = settings.rho_max.expect("validated with the configuration");
            Ok(vec![Geometry {
                delta_l: f64::NAN,
                radius: f64::NAN,
                smoothness: f64::NAN,
                profile,
                grid: RadialGrid::new(rho_max, settings.radial_points).map_err(bad)?,
            }])
        }
        ProfileKind::Pillar => {
            let mut out = Vec::new();
            for &delta_l in &settings.delta_l {
                for &radius in &settings.radius {
                    for &smoothness in &settings.smoothness {
                        let profile = ThicknessProfile::pillar(lat.l0, delta_l, radius, smoothness).map_err(bad)?;
                        let grid = match settings.rho_max {
                            Some(r) => RadialGrid::new(r, settings.radial_points),
                            None => RadialGrid::for_profile(&profile, settings.radial_points),
                        }
                        .map_err(bad)?;
                        out.push(Geometry {
                            delta_l,
                            radius,
                            smoothness,
                            profile,
                            grid,
                        });
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Thickness interval covering every geometry and the base thickness.
fn curve_range(settings: &Settings, geometries: &[Geometry]) -> (f64, f64) {
    let l0 = settings.lateral.l0;
    geometries.iter().fold((l0, l0), |(lo, hi), g| {
        let (a, b) = g.profile.thickness_range(g.grid.rho_max());
        (lo.min(a), hi.max(b))
    })
}

fn lateral(settings: &Settings) -> Result<Vec<NamedTable>, CliError> {
    let solver = solver(settings);
    let template = stack(settings, Thickness::Finite(settings.lateral.l0))?;
    let geometries = geometries(settings)?;
    let range = curve_range(settings, &geometries);
    let step = settings.lateral.table_step;

    let mut potential = ResultTable::new(&[
        ("E_ex", "V/m"),
        ("delta_L", "nm"),
        ("R", "nm"),
        ("b", "nm"),
        ("rho", "nm"),
        ("L_rho", "nm"),
        ("V_par", "meV"),
    ]);
    let mut spectrum = ResultTable::new(&[
        ("E_ex", "V/m"),
        ("delta_L", "nm"),
        ("R", "nm"),
        ("b", "nm"),
        ("alpha", ""),
        ("U_alpha", "ueV"),
        ("delta_U", "ueV"),
        ("rho_e", "nm"),
        ("rho_e_flat", "nm"),
        ("V0", "meV"),
        ("bound", ""),
        ("converged", ""),
    ]);
    let mut warnings = 0usize;
    for &e in &settings.fields {
        let curve = EnergyCurve::build(&solver, &template, field(e)?, range, settings.lateral.n_knots)?;
        let results = geometries
            .par_iter()
            .map(|g| {
                lateral_spectrum(
                    &curve,
                    &g.profile,
                    &settings.constants,
                    settings.lateral.alpha_max,
                    &g.grid,
                )
            })
            .collect::<Result<Vec<_>, CoreError>>()?;
        let reference = curve.eval(settings.lateral.l0)?;
        for (g, s) in geometries.iter().zip(&results) {
            if let Some(msg) = lta_validity_warning(&curve, &g.profile) {
                warn!("{msg}");
                warnings += 1;
            }
            let head = [num(e), num(g.delta_l), num(g.radius), num(g.smoothness)];
            let rho_max = g.grid.rho_max();
            let n = (rho_max / step + 1e-9).floor() as usize;
            let mut rhos: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
            if rhos.last().is_some_and(|&r| rho_max - r > 1e-9 * rho_max) {
                rhos.push(rho_max);
            }
            for rho in rhos {
                let l = g.profile.thickness_at(rho);
                let mut row = head.to_vec();
                row.extend([num(rho), num(l), num(curve.eval(l)? - reference)]);
                potential.push(row);
            }
            let depth = potential_depth(&curve, &g.profile).unwrap_or(f64::NAN);
            for level in &s.levels {
                let mut row = head.to_vec();
                row.extend([
                    Cell::Int(i64::from(level.alpha)),
                    num(level.energy_uev()),
                    num(s.delta_u_uev),
                    num(s.rho_e),
                    num(s.rho_e_flat),
                    num(depth),
                    Cell::Int(i64::from(s.bound)),
                    Cell::Int(i64::from(level.converged)),
                ]);
                spectrum.push(row);
            }
        }
    }
    for t in [&mut potential, &mut spectrum] {
        t.meta("l0_nm", format_g9(settings.lateral.l0));
        t.meta(
            "curve_range_nm",
            format!("{}..{}", format_g9(range.0), format_g9(range.1)),
        );
        t.meta("lta_warnings", warnings);
    }
    Ok(vec![
        NamedTable {
            suffix: Some("potential".into()),
            table: potential,
        },
        NamedTable {
            suffix: Some("spectrum".into()),
            table: spectrum,
        },
    ])
}

fn field_sweep(settings: &Settings) -> Result<Vec<NamedTable>, CliError> {
    let solver = solver(settings);
    let template = stack(settings, Thickness::Finite(settings.lateral.l0))?;
    let geometry = geometries(settings)?.remove(0);
    let fields = settings
        .lateral
        .field_sweep
        .iter()
        .map(|&e| field(e))
        .collect::<Result<Vec<_>, _>>()?;
    let options = LateralOptions {
        alpha_max: settings.lateral.alpha_max,
        n_knots: settings.lateral.n_knots,
        grid: geometry.grid,
    };
    let response = field_response(&solver, &template, &geometry.profile, &fields, &options)?;

    let mut table = ResultTable::new(&[
        ("E_ex", "V/m"),
        ("delta_U", "ueV"),
        ("rho_e", "nm"),
        ("V0", "meV"),
        ("bound_flag", ""),
    ]);
    for row in &response.rows {
        table.push(vec![
            num(row.e_ex),
            num(row.delta_u_uev),
            num(row.rho_e),
            num(row.depth.unwrap_or(f64::NAN)),
            Cell::Int(i64::from(row.bound)),
        ]);
    }
    table.meta("delta_L_nm", format_g9(geometry.delta_l));
    table.meta("R_nm", format_g9(geometry.radius));
    table.meta("b_nm", format_g9(geometry.smoothness));
    match response.asymmetry {
        Some(a) => {
            table.meta("slope_negative_ueV_per_V_per_m", format_g9(a.slope_negative));
            table.meta("slope_positive_ueV_per_V_per_m", format_g9(a.slope_positive));
            table.meta("asymmetry_ratio", format_g9(a.ratio));
        }
        None => table.meta("asymmetry_ratio", "unavailable"),
    }

    let bound: Vec<_> = response.rows.iter().filter(|r| r.bound).collect();
    let e: Vec<f64> = bound.iter().map(|r| r.e_ex).collect();
    let du: Vec<f64> = bound.iter().map(|r| r.delta_u_uev).collect();
    let mut fit_table = ResultTable::new(&[("quantity", ""), ("value", ""), ("unit", "")]);
    match HarmonicFieldModel::fit(&e, &du) {
        Ok(fit) => {
            let roundtrip = synthetic_roundtrip(&fit, &e)?;
            let m = fit.model;
            for (q, v, u) in [
                ("hbar_omega0", m.hbar_omega0_uev(), "ueV"),
                ("beta1", m.beta1(), "kg/s^2/(V/m)"),
                ("critical_field", m.critical_field(), "V/m"),
                ("rms_residual", fit.rms_residual_uev, "ueV"),
                ("synthetic_roundtrip_error", roundtrip, "1"),
            ] {
                fit_table.push(vec![text(q), num(v), text(u)]);
            }
        }
        Err(err) => fit_table.meta("fit_error", err),
    }
    Ok(vec![
        NamedTable {
            suffix: Some("response".into()),
            table,
        },
        NamedTable {
            suffix: Some("fit".into()),
            table: fit_table,
        },
    ])
}

/// Largest relative parameter error after refitting data generated by `fit`.
fn synthetic_roundtrip(fit: &HarmonicFit, fields: &[f64]) -> Result<f64, CliError> {
    let synthetic = fields
        .iter()
        .map(|&e| fit.model.delta_u_uev(e))
        .collect::<Result<Vec<_>, _>>()?;
    let again = HarmonicFieldModel::fit(fields, &synthetic)?.model;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    Ok(rel(again.hbar_omega0_uev(), fit.model.hbar_omega0_uev()).max(rel(again.beta1(), fit.model.beta1())))
}

fn growth(settings: &Settings) -> Result<Vec<NamedTable>, CliError> {
    let g = &settings.growth;
    let m = &g.material;
    let mut table = ResultTable::new(&[("quantity", ""), ("value", ""), ("unit", "")]);
    let rows = [
        ("gibbs_thomson_coefficient", gibbs_thomson_coefficient(m), "K*nm"),
        ("gibbs_thomson_shift_bump", gibbs_thomson_shift(m, g.radius.abs())?, "K"),
        (
            "gibbs_thomson_shift_valley",
            gibbs_thomson_shift(m, -g.radius.abs())?,
            "K",
        ),
        ("diffusion_length", diffusion_length(m, g.time)?, "nm"),
        (
            "gravity_potential_difference",
            gravity_potential_difference(m, g.delta_h)?,
            "meV",
        ),
    ];
    for (q, v, u) in rows {
        table.push(vec![text(q), num(v), text(u)]);
    }
    table.meta("radius_nm", format_g9(g.radius.abs()));
    table.meta("time_s", format_g9(g.time));
    table.meta("delta_h_nm", format_g9(g.delta_h));
    Ok(vec![NamedTable { suffix: None, table }])
}
