//! Lateral trapping from a non-uniform neon layer.
//!
//! The local-thickness approximation maps a thickness profile `L(rho)` to a
//! lateral potential `V(rho) = W^G(L(rho)) - W^G(L_0)` using an interpolated
//! curve of perpendicular ground-state energies. The cylindrically symmetric
//! radial problem is then solved per angular momentum.

use log::warn;
use rayon::prelude::*;

use crate::bound_states::{count_sign_changes, PerpendicularSolver};
use crate::constants::{PhysicalConstants, ELECTRON_MASS, HBAR, JOULE_PER_UEV, MEV_PER_NM_PER_V_PER_M, MEV_PER_UEV};
use crate::dielectric::{DielectricStack, FieldSpec, Thickness};
use crate::error::{Error, Result};
use crate::spline::CubicSpline;
use crate::tridiag::SymTridiagonal;

/// Largest tolerated spline error at the held-out thicknesses, meV.
pub const SPLINE_BUDGET_MEV: f64 = 0.01;
pub const DEFAULT_KNOTS: usize = 60;
pub const MIN_KNOTS: usize = 20;
pub const DEFAULT_RADIAL_POINTS: usize = 16384;
/// Allowed thickness range for energy curves, nm.
pub const CURVE_RANGE: (f64, f64) = (1.0, 200.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThicknessProfile {
    /// Smoothed step of height `delta_l` at radius `radius` over the pillar.
    Pillar {
        l0: f64,
        delta_l: f64,
        radius: f64,
        smoothness: f64,
    },
    /// `L(rho) = l0 (1 + beta0 rho^2)`.
    Quadratic { l0: f64, beta0: f64 },
}

impl ThicknessProfile {
    pub fn pillar(l0: f64, delta_l: f64, radius: f64, smoothness: f64) -> Result<Self> {
        let ok = l0.is_finite()
            && delta_l > 0.0
            && delta_l < l0
            && radius > 0.0
            && radius.is_finite()
            && smoothness > 0.0
            && smoothness.is_finite();
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "pillar needs 0 < delta_L < L0, R > 0, b > 0 (L0 = {l0}, delta_L = {delta_l}, R = {radius}, b = {smoothness})"
            )));
        }
        Ok(Self::Pillar {
            l0,
            delta_l,
            radius,
            smoothness,
        })
    }

    pub fn quadratic(l0: f64, beta0: f64) -> Result<Self> {
        if !(l0 > 0.0 && l0.is_finite() && beta0 > 0.0 && beta0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quadratic profile needs L0 > 0 and beta0 > 0 (L0 = {l0}, beta0 = {beta0})"
            )));
        }
        Ok(Self::Quadratic { l0, beta0 })
    }

    pub fn base_thickness(&self) -> f64 {
        match *self {
            Self::Pillar { l0, .. } | Self::Quadratic { l0, .. } => l0,
        }
    }

    pub fn thickness_at(&self, rho: f64) -> f64 {
        match *self {
            Self::Pillar {
                l0,
                delta_l,
                radius,
                smoothness,
            } => {
                let d = rho - radius;
                l0 - 0.5 * delta_l * (1.0 - d / d.hypot(smoothness))
            }
            Self::Quadratic { l0, beta0 } => l0 * (1.0 + beta0 * rho * rho),
        }
    }

    /// Thickness interval an energy curve must cover for `rho <= rho_max`.
    pub fn thickness_range(&self, rho_max: f64) -> (f64, f64) {
        match *self {
            Self::Pillar { l0, delta_l, .. } => (l0 - delta_l, l0),
            Self::Quadratic { l0, .. } => (l0, self.thickness_at(rho_max)),
        }
    }

    /// Default outer radius of the radial domain.
    pub fn default_rho_max(&self) -> Option<f64> {
        match *self {
            Self::Pillar { radius, .. } => Some((3.0 * radius).max(radius + 200.0)),
            Self::Quadratic { .. } => None,
        }
    }
}

/// Spline-vs-solve comparison at a held-out thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineCheck {
    pub thickness: f64,
    pub spline: f64,
    pub direct: f64,
}

/// `W^G(L)` at fixed substrate and field, interpolated over thickness.
#[derive(Debug, Clone)]
pub struct EnergyCurve {
    template: DielectricStack,
    field: FieldSpec,
    spline: CubicSpline,
    heights: Vec<f64>,
    validation: Vec<SplineCheck>,
}

impl EnergyCurve {
    /// Solves at `n_knots` log-spaced thicknesses in `range` (in parallel),
    /// fits the spline and checks it against fresh solves at held-out points.
    pub fn build(
        solver: &PerpendicularSolver,
        template: &DielectricStack,
        field: FieldSpec,
        range: (f64, f64),
        n_knots: usize,
    ) -> Result<Self> {
        let (lo, hi) = range;
        if !(lo >= CURVE_RANGE.0 && hi <= CURVE_RANGE.1 && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "thickness range [{lo}, {hi}] nm must lie inside [{}, {}] nm",
                CURVE_RANGE.0, CURVE_RANGE.1
            )));
        }
        if n_knots < MIN_KNOTS {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_KNOTS} knots, got {n_knots}"
            )));
        }
        let ratio = hi / lo;
        let mut knots: Vec<f64> = (0..n_knots)
            .map(|i| lo * ratio.powf(i as f64 / (n_knots - 1) as f64))
            .collect();
        knots[0] = lo;
        knots[n_knots - 1] = hi;
        let held_out: Vec<f64> = [0, (n_knots - 1) / 2, n_knots - 2]
            .iter()
            .map(|&i| (knots[i] * knots[i + 1]).sqrt())
            .collect();

        let solve = |l: f64| -> Result<(f64, f64)> {
            let stack = template.with_thickness(Thickness::Finite(l))?;
            let g = solver.ground_state(&stack, &field)?;
            Ok((g.energy, g.mean_height))
        };
        let results: Vec<Result<(f64, f64)>> = knots.par_iter().chain(held_out.par_iter()).map(|&l| solve(l)).collect();

        let mut unbound = Vec::new();
        let mut values = Vec::with_capacity(results.len());
        for (l, r) in knots.iter().chain(&held_out).zip(results) {
            match r {
                Ok(v) => values.push(v),
                Err(Error::Unbound(_)) | Err(Error::NotConverged { .. }) => {
                    unbound.push(*l);
                    values.push((f64::NAN, f64::NAN));
                }
                Err(e) => return Err(e),
            }
        }
        if !unbound.is_empty() {
            return Err(Error::UnboundKnots(unbound));
        }
        let energies: Vec<f64> = values[..n_knots].iter().map(|v| v.0).collect();
        let heights: Vec<f64> = values[..n_knots].iter().map(|v| v.1).collect();
        let spline = CubicSpline::not_a_knot(knots, energies)?;
        let validation: Vec<SplineCheck> = held_out
            .iter()
            .zip(&values[n_knots..])
            .map(|(&l, v)| SplineCheck {
                thickness: l,
                spline: spline.eval(l),
                direct: v.0,
            })
            .collect();
        for check in &validation {
            let error = (check.spline - check.direct).abs();
            if error > SPLINE_BUDGET_MEV {
                return Err(Error::SplineValidation {
                    thickness: check.thickness,
                    error,
                    budget: SPLINE_BUDGET_MEV,
                });
            }
        }
        Ok(Self {
            template: *template,
            field,
            spline,
            heights,
            validation,
        })
    }

    pub fn template(&self) -> &DielectricStack {
        &self.template
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn range(&self) -> (f64, f64) {
        self.spline.domain()
    }

    pub fn knots(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn knot_energies(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn validation(&self) -> &[SplineCheck] {
        &self.validation
    }

    /// Interpolated `W^G(L)`, meV.
    pub fn eval(&self, thickness: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        let slack = 1e-9 * hi;
        if !(thickness >= lo - slack && thickness <= hi + slack) {
            return Err(Error::OutOfRange {
                value: thickness,
                lo,
                hi,
            });
        }
        Ok(self.spline.eval(thickness.clamp(lo, hi)))
    }

    /// Mean electron height at `thickness`, linearly interpolated between knots.
    pub fn mean_height_at(&self, thickness: f64) -> f64 {
        let x = self.spline.knots();
        let t = thickness.clamp(x[0], x[x.len() - 1]);
        let i = x.partition_point(|&v| v <= t).clamp(1, x.len() - 1) - 1;
        let w = (t - x[i]) / (x[i + 1] - x[i]);
        self.heights[i] * (1.0 - w) + self.heights[i + 1] * w
    }
}

pub fn build_energy_curve(
    solver: &PerpendicularSolver,
    template: &DielectricStack,
    field: FieldSpec,
    range: (f64, f64),
    n_knots: usize,
) -> Result<EnergyCurve> {
    EnergyCurve::build(solver, template, field, range, n_knots)
}

/// `V(rho) = W^G(L(rho)) - W^G(L_0)`, meV.
pub fn lta_potential(curve: &EnergyCurve, profile: &ThicknessProfile, rho: f64) -> Result<f64> {
    Ok(curve.eval(profile.thickness_at(rho))? - curve.eval(profile.base_thickness())?)
}

/// Trap depth `V_0 = W^G(L_0) - W^G(L_0 - delta_L)`, meV. Pillar profiles only.
pub fn potential_depth(curve: &EnergyCurve, profile: &ThicknessProfile) -> Result<f64> {
    match *profile {
        ThicknessProfile::Pillar { l0, delta_l, .. } => Ok(curve.eval(l0)? - curve.eval(l0 - delta_l)?),
        ThicknessProfile::Quadratic { .. } => Err(Error::Usage("trap depth is defined for pillar profiles".into())),
    }
}

/// Warning text when the profile varies faster than the electron height.
pub fn lta_validity_warning(curve: &EnergyCurve, profile: &ThicknessProfile) -> Option<String> {
    let ThicknessProfile::Pillar { l0, smoothness, .. } = *profile else {
        return None;
    };
    let height = curve.mean_height_at(l0);
    (smoothness < height).then(|| {
        format!("smoothness b = {smoothness} nm is below the electron height {height:.3} nm; local-thickness approximation is questionable")
    })
}

/// Cell-centred radial grid `rho_i = (i + 1/2) h` with a hard wall at `rho_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    rho_max: f64,
    n_points: usize,
}

impl RadialGrid {
    pub fn new(rho_max: f64, n_points: usize) -> Result<Self> {
        if !(rho_max > 0.0 && rho_max.is_finite()) || n_points < 16 {
            return Err(Error::InvalidParameter(format!(
                "radial grid needs rho_max > 0 and at least 16 points (rho_max = {rho_max}, n = {n_points})"
            )));
        }
        Ok(Self { rho_max, n_points })
    }

    /// Default grid for a pillar profile.
    pub fn for_profile(profile: &ThicknessProfile, n_points: usize) -> Result<Self> {
        let rho_max = profile
            .default_rho_max()
            .ok_or_else(|| Error::Usage("quadratic profiles need an explicit rho_max".into()))?;
        Self::new(rho_max, n_points)
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.rho_max / (self.n_points as f64 + 0.5)
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLevel {
    pub alpha: u32,
    /// Lowest radial eigenvalue for this angular momentum, meV.
    pub energy: f64,
    pub converged: bool,
}

impl RadialLevel {
    pub fn energy_uev(&self) -> f64 {
        self.energy / MEV_PER_UEV
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LateralSpectrum {
    pub levels: Vec<RadialLevel>,
    /// `U_1 - U_0`, ueV.
    pub delta_u_uev: f64,
    /// Mean radius of the alpha = 1 state with measure `rho drho`, nm.
    pub rho_e: f64,
    /// Same, with the flat measure `drho`.
    pub rho_e_flat: f64,
    /// `(rho, V)` at every radial node.
    pub potential_table: Vec<(f64, f64)>,
    /// False when `U_0` does not lie below the potential at the outer wall.
    pub bound: bool,
    pub grid: RadialGrid,
}

impl LateralSpectrum {
    pub fn energy(&self, alpha: u32) -> Option<f64> {
        self.levels.iter().find(|l| l.alpha == alpha).map(|l| l.energy)
    }
}

struct RadialState {
    level: RadialLevel,
    u: Vec<f64>,
}

/// Finite-volume radial operator for angular momentum `alpha` acting on
/// `u = sqrt(rho) R`, with the potential sampled at the grid nodes.
pub fn radial_hamiltonian(
    samples: &[f64],
    hbar2_over_2me: f64,
    alpha: u32,
    grid: &RadialGrid,
) -> Result<SymTridiagonal> {
    let h = grid.spacing();
    let kinetic = hbar2_over_2me / (h * h);
    let a2 = f64::from(alpha * alpha);
    let diag: Vec<f64> = grid
        .nodes()
        .zip(samples)
        .map(|(rho, v)| 2.0 * kinetic + hbar2_over_2me * a2 / (rho * rho) + v)
        .collect();
    let off: Vec<f64> = (0..grid.n_points - 1)
        .map(|i| {
            let (r0, r1) = (grid.node(i), grid.node(i + 1));
            -kinetic * (r0 + 0.5 * h) / (r0 * r1).sqrt()
        })
        .collect();
    SymTridiagonal::new(diag, off)
}

fn radial_state(samples: &[f64], hbar2_over_2me: f64, alpha: u32, grid: &RadialGrid) -> Result<RadialState> {
    let h = grid.spacing();
    let t = radial_hamiltonian(samples, hbar2_over_2me, alpha, grid)?;
    let pair = t.lowest_eigenpairs(1)?.remove(0);
    let scale = pair
        .vector
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m })
        .signum()
        / h.sqrt();
    let u: Vec<f64> = pair.vector.iter().map(|v| v * scale).collect();
    let nodeless = count_sign_changes(&u) == 0;
    Ok(RadialState {
        level: RadialLevel {
            alpha,
            energy: pair.value,
            converged: pair.converged && nodeless,
        },
        u,
    })
}

/// Lowest radial eigenvalue for each `alpha` in `0..=alpha_max`, from the
/// potential sampled at the radial grid nodes (meV).
pub fn radial_spectrum_from_samples(
    samples: &[f64],
    hbar2_over_2me: f64,
    alpha_max: u32,
    grid: &RadialGrid,
) -> Result<LateralSpectrum> {
    if alpha_max < 1 {
        return Err(Error::Usage(
            "alpha_max must be at least 1 to form the excitation energy".into(),
        ));
    }
    if samples.len() != grid.n_points {
        return Err(Error::InvalidParameter(format!(
            "{} samples for {} radial nodes",
            samples.len(),
            grid.n_points
        )));
    }
    if let Some((i, v)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinitePotential {
            z: grid.node(i),
            value: *v,
        });
    }
    let states = (0..=alpha_max)
        .into_par_iter()
        .map(|alpha| radial_state(samples, hbar2_over_2me, alpha, grid))
        .collect::<Result<Vec<RadialState>>>()?;

    let h = grid.spacing();
    let excited = &states[1].u;
    let rho_e = grid.nodes().zip(excited).map(|(rho, u)| rho * u * u).sum::<f64>() * h;
    let flat_norm = grid.nodes().zip(excited).map(|(rho, u)| u * u / rho).sum::<f64>() * h;
    let u0 = states[0].level.energy;
    let rim = samples[samples.len() - 1];
    Ok(LateralSpectrum {
        delta_u_uev: (states[1].level.energy - u0) / MEV_PER_UEV,
        rho_e,
        rho_e_flat: 1.0 / flat_norm,
        potential_table: grid.nodes().zip(samples.iter().copied()).collect(),
        bound: u0 < rim,
        levels: states.into_iter().map(|s| s.level).collect(),
        grid: *grid,
    })
}

pub fn radial_spectrum<F: Fn(f64) -> f64>(
    potential: F,
    hbar2_over_2me: f64,
    alpha_max: u32,
    grid: &RadialGrid,
) -> Result<LateralSpectrum> {
    let samples: Vec<f64> = grid.nodes().map(potential).collect();
    radial_spectrum_from_samples(&samples, hbar2_over_2me, alpha_max, grid)
}

/// Radial spectrum of the LTA potential built from `curve` and `profile`.
pub fn lateral_spectrum(
    curve: &EnergyCurve,
    profile: &ThicknessProfile,
    consts: &PhysicalConstants,
    alpha_max: u32,
    grid: &RadialGrid,
) -> Result<LateralSpectrum> {
    if let Some(msg) = lta_validity_warning(curve, profile) {
        warn!("{msg}");
    }
    let reference = curve.eval(profile.base_thickness())?;
    let samples = grid
        .nodes()
        .map(|rho| Ok(curve.eval(profile.thickness_at(rho))? - reference))
        .collect::<Result<Vec<f64>>>()?;
    radial_spectrum_from_samples(&samples, consts.hbar2_over_2me, alpha_max, grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralOptions {
    pub alpha_max: u32,
    pub n_knots: usize,
    pub grid: RadialGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldResponseRow {
    pub e_ex: f64,
    pub delta_u_uev: f64,
    pub rho_e: f64,
    /// Trap depth `V_0`, meV (pillar profiles).
    pub depth: Option<f64>,
    pub bound: bool,
    /// Why the row is unbound, when it is.
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymmetry {
    /// `dDeltaU/dE` between the nearest negative field and zero, ueV per V/m.
    pub slope_negative: f64,
    /// Same between zero and the nearest positive field.
    pub slope_positive: f64,
    /// `|slope_negative / slope_positive|`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldResponse {
    pub rows: Vec<FieldResponseRow>,
    pub asymmetry: Option<Asymmetry>,
}

impl FieldResponse {
    fn asymmetry_of(rows: &[FieldResponseRow]) -> Option<Asymmetry> {
        let bound: Vec<&FieldResponseRow> = rows.iter().filter(|r| r.bound).collect();
        let zero = bound.iter().find(|r| r.e_ex == 0.0)?;
        let neg = bound
            .iter()
            .filter(|r| r.e_ex < 0.0)
            .max_by(|a, b| a.e_ex.total_cmp(&b.e_ex))?;
        let pos = bound
            .iter()
            .filter(|r| r.e_ex > 0.0)
            .min_by(|a, b| a.e_ex.total_cmp(&b.e_ex))?;
        let slope_negative = (zero.delta_u_uev - neg.delta_u_uev) / (0.0 - neg.e_ex);
        let slope_positive = (pos.delta_u_uev - zero.delta_u_uev) / pos.e_ex;
        Some(Asymmetry {
            slope_negative,
            slope_positive,
            ratio: (slope_negative / slope_positive).abs(),
        })
    }
}

/// `Delta U`, `rho_e` and depth for each field, one energy curve per field.
/// Rows come back sorted by field; unbound fields are kept and marked.
pub fn field_response(
    solver: &PerpendicularSolver,
    template: &DielectricStack,
    profile: &ThicknessProfile,
    fields: &[FieldSpec],
    options: &LateralOptions,
) -> Result<FieldResponse> {
    let range = profile.thickness_range(options.grid.rho_max());
    let mut sorted: Vec<FieldSpec> = fields.to_vec();
    sorted.sort_by(|a, b| a.volts_per_metre().total_cmp(&b.volts_per_metre()));
    let rows = sorted
        .par_iter()
        .map(|field| -> Result<FieldResponseRow> {
            let e_ex = field.volts_per_metre();
            let unbound = |note: String| FieldResponseRow {
                e_ex,
                delta_u_uev: f64::NAN,
                rho_e: f64::NAN,
                depth: None,
                bound: false,
                note: Some(note),
            };
            let curve = match EnergyCurve::build(solver, template, *field, range, options.n_knots) {
                Ok(c) => c,
                Err(e @ Error::UnboundKnots(_)) => return Ok(unbound(e.to_string())),
                Err(e) => return Err(e),
            };
            let spectrum = lateral_spectrum(&curve, profile, solver.constants(), options.alpha_max, &options.grid)?;
            let depth = potential_depth(&curve, profile).ok();
            Ok(FieldResponseRow {
                e_ex,
                delta_u_uev: spectrum.delta_u_uev,
                rho_e: spectrum.rho_e,
                depth,
                bound: spectrum.bound,
                note: (!spectrum.bound).then(|| "lateral ground state above the potential rim".to_string()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let asymmetry = FieldResponse::asymmetry_of(&rows);
    Ok(FieldResponse { rows, asymmetry })
}

/// First-order estimate of the change of `V_0` with field: `E delta_L / eps_ne`, meV.
pub fn depth_shift_estimate(field: &FieldSpec, delta_l: f64, eps_neon: f64) -> f64 {
    field.volts_per_metre() * MEV_PER_NM_PER_V_PER_M * delta_l / eps_neon
}

/// Harmonic trap whose stiffness is tuned linearly by the field:
/// `Delta U = hbar sqrt(omega0^2 + beta1 E / m_e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFieldModel {
    hbar_omega0_uev: f64,
    /// Field coupling of the trap stiffness, kg s^-2 per (V/m).
    beta1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub model: HarmonicFieldModel,
    /// Root-mean-square residual of `Delta U`, ueV.
    pub rms_residual_uev: f64,
}

impl HarmonicFieldModel {
    pub fn new(hbar_omega0_uev: f64, beta1: f64) -> Result<Self> {
        if !(hbar_omega0_uev > 0.0 && hbar_omega0_uev.is_finite() && beta1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need hbar omega0 > 0 and finite beta1 (got {hbar_omega0_uev}, {beta1})"
            )));
        }
        Ok(Self { hbar_omega0_uev, beta1 })
    }

    pub fn hbar_omega0_uev(&self) -> f64 {
        self.hbar_omega0_uev
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    /// omega0 in rad/s.
    pub fn omega0(&self) -> f64 {
        self.hbar_omega0_uev * JOULE_PER_UEV / HBAR
    }

    /// `hbar^2 beta1 / m_e` in ueV^2 per (V/m).
    fn field_slope(&self) -> f64 {
        beta1_to_slope(self.beta1)
    }

    /// Field at which the trap frequency vanishes, `-m_e omega0^2 / beta1`.
    pub fn critical_field(&self) -> f64 {
        -ELECTRON_MASS * self.omega0().powi(2) / self.beta1
    }

    pub fn delta_u_uev(&self, e_ex: f64) -> Result<f64> {
        let radicand = self.hbar_omega0_uev.powi(2) + self.field_slope() * e_ex;
        if radicand < 0.0 {
            return Err(Error::ModelInvalid(format!(
                "trap destroyed at E = {e_ex} V/m (critical field {} V/m)",
                self.critical_field()
            )));
        }
        Ok(radicand.sqrt())
    }

    /// Least squares of `Delta U^2 = (hbar omega0)^2 + (hbar^2 beta1 / m_e) E`.
    pub fn fit(fields: &[f64], delta_u_uev: &[f64]) -> Result<HarmonicFit> {
        let pts: Vec<(f64, f64)> = fields
            .iter()
            .zip(delta_u_uev)
            .filter(|(e, u)| e.is_finite() && u.is_finite())
            .map(|(&e, &u)| (e, u * u))
            .collect();
        if fields.len() != delta_u_uev.len() || pts.len() < 2 {
            return Err(Error::InvalidParameter(
                "fit needs at least two finite (E, Delta U) pairs".into(),
            ));
        }
        let n = pts.len() as f64;
        let mean_e = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mean_e).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::InvalidParameter("fit needs at least two distinct fields".into()));
        }
        let sxy: f64 = pts.iter().map(|p| (p.0 - mean_e) * (p.1 - mean_y)).sum();
        let slope = sxy / sxx;
        let intercept = mean_y - slope * mean_e;
        if intercept <= 0.0 {
            return Err(Error::ModelInvalid(format!(
                "fitted (hbar omega0)^2 = {intercept} is not positive"
            )));
        }
        let model = Self::new(intercept.sqrt(), slope_to_beta1(slope))?;
        let rms = (fields
            .iter()
            .zip(delta_u_uev)
            .filter(|(e, u)| e.is_finite() && u.is_finite())
            .map(|(&e, &u)| {
                let predicted = (intercept + slope * e).max(0.0).sqrt();
                (predicted - u).powi(2)
            })
            .sum::<f64>()
            / n)
            .sqrt();
        Ok(HarmonicFit {
            model,
            rms_residual_uev: rms,
        })
    }
}

fn beta1_to_slope(beta1: f64) -> f64 {
    HBAR * HBAR * beta1 / ELECTRON_MASS / (JOULE_PER_UEV * JOULE_PER_UEV)
}

fn slope_to_beta1(slope: f64) -> f64 {
    slope * JOULE_PER_UEV * JOULE_PER_UEV * ELECTRON_MASS / (HBAR * HBAR)
}
