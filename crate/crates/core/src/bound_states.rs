//! One-dimensional bound states of the perpendicular motion.
//!
//! The Hamiltonian `-(hbar^2/2m) d^2/dz^2 + V(z)` is discretized with
//! second-order central differences on a uniform grid with hard walls at both
//! ends. Only the lowest few eigenpairs are extracted.

use std::sync::Arc;

use once_cell::sync::Lazy;

use crate::constants::PhysicalConstants;
use crate::dielectric::{field_coupling, DielectricStack, FieldSpec, ImagePotentialCache, Thickness};
use crate::error::{Error, Result};
use crate::tridiag::SymTridiagonal;

pub const MIN_GRID_POINTS: usize = 500;
pub const MAX_STATES: usize = 10;
/// Width of the region below `z_max` checked by the quasi-bound detector, nm.
pub const TAIL_WIDTH: f64 = 4.0;
/// Largest ground-state probability tolerated in the tail region.
pub const TAIL_PROBABILITY: f64 = 1e-6;

/// Uniform grid with Dirichlet values at both end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    z_min: f64,
    z_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(z_min: f64, z_max: f64, n_points: usize) -> Result<Self> {
        if !(z_min.is_finite() && z_max.is_finite() && z_min < z_max) {
            return Err(Error::InvalidParameter(format!("bad grid extent [{z_min}, {z_max}]")));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self { z_min, z_max, n_points })
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    /// Nodes carrying unknowns (everything except the two walls).
    pub fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        (1..self.n_points - 1).map(move |i| self.node(i))
    }
}

/// Hamiltonian from potential values at the interior nodes.
pub fn build_hamiltonian_from_samples(potential: &[f64], grid: &Grid1D, hbar2_over_2me: f64) -> Result<SymTridiagonal> {
    let unknowns = grid.n_points - 2;
    if potential.len() != unknowns {
        return Err(Error::InvalidParameter(format!(
            "{} potential samples for {unknowns} interior nodes",
            potential.len()
        )));
    }
    if let Some((i, v)) = potential.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinitePotential {
            z: grid.node(i + 1),
            value: *v,
        });
    }
    let h = grid.spacing();
    let kinetic = hbar2_over_2me / (h * h);
    let diag = potential.iter().map(|v| 2.0 * kinetic + v).collect();
    SymTridiagonal::new(diag, vec![-kinetic; unknowns - 1])
}

/// Hamiltonian with the potential sampled pointwise at the interior nodes.
pub fn build_hamiltonian<F: Fn(f64) -> f64>(
    potential: F,
    grid: &Grid1D,
    hbar2_over_2me: f64,
) -> Result<SymTridiagonal> {
    let samples: Vec<f64> = grid.interior().map(potential).collect();
    build_hamiltonian_from_samples(&samples, grid, hbar2_over_2me)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSolution {
    /// Ascending eigenvalues, meV.
    pub energies: Vec<f64>,
    /// Wavefunctions on every grid node (walls included), `sum psi^2 h = 1`.
    pub wavefunctions: Vec<Vec<f64>>,
    pub grid: Grid1D,
    pub converged: Vec<bool>,
    /// Interior sign changes of each wavefunction.
    pub nodes: Vec<usize>,
}

impl BoundStateSolution {
    pub fn n_states(&self) -> usize {
        self.energies.len()
    }

    /// `sum f(z) psi_state(z)^2 h`.
    pub fn expectation<F: Fn(f64) -> f64>(&self, state: usize, f: F) -> f64 {
        let h = self.grid.spacing();
        self.wavefunctions[state]
            .iter()
            .zip(self.grid.nodes())
            .map(|(psi, z)| f(z) * psi * psi)
            .sum::<f64>()
            * h
    }

    /// Probability of finding `state` above `z`.
    pub fn probability_above(&self, state: usize, z: f64) -> f64 {
        self.expectation(state, |zz| if zz > z { 1.0 } else { 0.0 })
    }

    fn require_converged(&self, state: usize) -> Result<()> {
        match self.converged.get(state) {
            Some(true) => Ok(()),
            Some(false) => Err(Error::NotConverged { index: state }),
            None => Err(Error::Usage(format!("state {state} was not requested"))),
        }
    }
}

pub(crate) fn count_sign_changes(psi: &[f64]) -> usize {
    let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-6 * peak;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in psi.iter().filter(|v| v.abs() > floor) {
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Lowest `n_states` eigenpairs, normalized on the grid and node-checked.
///
/// A state whose inverse iteration stalls, or whose node count differs from
/// its index, is reported with `converged = false`.
pub fn solve_lowest(hamiltonian: &SymTridiagonal, grid: &Grid1D, n_states: usize) -> Result<BoundStateSolution> {
    if n_states == 0 || n_states > MAX_STATES {
        return Err(Error::Usage(format!(
            "n_states must be in 1..={MAX_STATES}, got {n_states}"
        )));
    }
    if hamiltonian.len() != grid.n_points - 2 {
        return Err(Error::InvalidParameter("hamiltonian does not match grid".into()));
    }
    let h = grid.spacing();
    let pairs = hamiltonian.lowest_eigenpairs(n_states)?;
    let mut solution = BoundStateSolution {
        energies: Vec::with_capacity(n_states),
        wavefunctions: Vec::with_capacity(n_states),
        grid: *grid,
        converged: Vec::with_capacity(n_states),
        nodes: Vec::with_capacity(n_states),
    };
    for (index, pair) in pairs.into_iter().enumerate() {
        let peak = pair
            .vector
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        let scale = peak.signum() / h.sqrt();
        let mut psi = Vec::with_capacity(grid.n_points);
        psi.push(0.0);
        psi.extend(pair.vector.iter().map(|v| v * scale));
        psi.push(0.0);
        let nodes = count_sign_changes(&psi);
        solution.energies.push(pair.value);
        solution.converged.push(pair.converged && nodes == index);
        solution.nodes.push(nodes);
        solution.wavefunctions.push(psi);
    }
    Ok(solution)
}

/// `h_e = sum z psi_0^2 h`.
pub fn mean_height(solution: &BoundStateSolution) -> Result<f64> {
    solution.require_converged(0)?;
    Ok(solution.expectation(0, |z| z))
}

/// First excitation energy `E_1 - E_0`, meV.
pub fn perpendicular_gap(solution: &BoundStateSolution) -> Result<f64> {
    if solution.n_states() < 2 {
        return Err(Error::Usage("the gap needs at least two states".into()));
    }
    solution.require_converged(0)?;
    solution.require_converged(1)?;
    Ok(solution.energies[1] - solution.energies[0])
}

/// Domain settings for the perpendicular problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpendicularGridSpec {
    /// How far the domain extends into the neon, nm (capped by the layer).
    pub depth_below_surface: f64,
    pub z_max: f64,
    pub n_points: usize,
}

impl Default for PerpendicularGridSpec {
    fn default() -> Self {
        Self {
            depth_below_surface: 2.0,
            z_max: 40.0,
            n_points: 8192,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub mean_height: f64,
    pub solution: BoundStateSolution,
}

/// Finite-difference check of `dW/dE = <psi_0| dV/dE |psi_0>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HellmannFeynman {
    /// Central difference of the ground-state energy, meV per (V/m).
    pub finite_difference: f64,
    /// Expectation of the field coupling, meV per (V/m).
    pub expectation: f64,
    pub residual: f64,
}

impl HellmannFeynman {
    fn new(w_minus: f64, w_plus: f64, expectation: f64, delta: f64) -> Self {
        let finite_difference = (w_plus - w_minus) / (2.0 * delta);
        let diff = (finite_difference - expectation).abs();
        let residual = if diff == 0.0 { 0.0 } else { diff / expectation.abs() };
        Self {
            finite_difference,
            expectation,
            residual,
        }
    }
}

/// Hellmann-Feynman check for `V(E) = base + E coupling` on an arbitrary grid.
pub fn hellmann_feynman_residual(
    grid: &Grid1D,
    hbar2_over_2me: f64,
    base: &[f64],
    coupling: &[f64],
    field: f64,
    delta: f64,
) -> Result<HellmannFeynman> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let ground = |e: f64| -> Result<BoundStateSolution> {
        let v: Vec<f64> = base.iter().zip(coupling).map(|(b, c)| b + e * c).collect();
        let h = build_hamiltonian_from_samples(&v, grid, hbar2_over_2me)?;
        solve_lowest(&h, grid, 1)
    };
    let minus = ground(field - delta)?;
    let plus = ground(field + delta)?;
    let centre = ground(field)?;
    centre.require_converged(0)?;
    let psi = &centre.wavefunctions[0][1..grid.n_points - 1];
    let expectation = psi.iter().zip(coupling).map(|(p, c)| c * p * p).sum::<f64>() * grid.spacing();
    Ok(HellmannFeynman::new(
        minus.energies[0],
        plus.energies[0],
        expectation,
        delta,
    ))
}

/// Solver for the perpendicular Schrodinger problem of a given stack.
#[derive(Debug, Clone)]
pub struct PerpendicularSolver {
    constants: PhysicalConstants,
    grid: PerpendicularGridSpec,
    cache: Arc<ImagePotentialCache>,
}

static SHARED: Lazy<PerpendicularSolver> = Lazy::new(PerpendicularSolver::default);

impl Default for PerpendicularSolver {
    fn default() -> Self {
        Self::new(PhysicalConstants::codata(), PerpendicularGridSpec::default())
    }
}

impl PerpendicularSolver {
    pub fn new(constants: PhysicalConstants, grid: PerpendicularGridSpec) -> Self {
        Self {
            constants,
            grid,
            cache: Arc::new(ImagePotentialCache::new()),
        }
    }

    /// Process-wide solver with default constants and grid.
    pub fn shared() -> &'static PerpendicularSolver {
        &SHARED
    }

    pub fn with_cache(mut self, cache: Arc<ImagePotentialCache>) -> Self {
        self.cache = cache;
        self
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn grid_spec(&self) -> &PerpendicularGridSpec {
        &self.grid
    }

    pub fn cache(&self) -> &Arc<ImagePotentialCache> {
        &self.cache
    }

    pub fn grid_for(&self, stack: &DielectricStack) -> Result<Grid1D> {
        let depth = match stack.thickness() {
            Thickness::Finite(l) => l.min(self.grid.depth_below_surface),
            Thickness::Infinite => self.grid.depth_below_surface,
        };
        let grid = Grid1D::new(-depth, self.grid.z_max, self.grid.n_points)?;
        if !(grid.z_max() > self.constants.cutoff_zc) {
            return Err(Error::InvalidParameter(format!(
                "z_max = {} nm must exceed the cutoff",
                grid.z_max()
            )));
        }
        Ok(grid)
    }

    /// Potential at the interior nodes. The node whose cell straddles the
    /// neon surface gets the cell average of the barrier step.
    pub fn potential_samples(&self, stack: &DielectricStack, field: &FieldSpec, grid: &Grid1D) -> Result<Vec<f64>> {
        let image = self
            .cache
            .table(stack, &self.constants, grid.z_min(), grid.z_max(), grid.n_points())?;
        let h = grid.spacing();
        (1..grid.n_points() - 1)
            .map(|i| {
                let z = grid.node(i);
                let inside = ((0.5 * h - z) / h).clamp(0.0, 1.0);
                let v = inside * self.constants.barrier_height
                    + (1.0 - inside) * image[i]
                    + field.volts_per_metre() * field_coupling(stack, z)?;
                Ok(v)
            })
            .collect()
    }

    pub fn solve(&self, stack: &DielectricStack, field: &FieldSpec, n_states: usize) -> Result<BoundStateSolution> {
        let grid = self.grid_for(stack)?;
        let v = self.potential_samples(stack, field, &grid)?;
        let h = build_hamiltonian_from_samples(&v, &grid, self.constants.hbar2_over_2me)?;
        solve_lowest(&h, &grid, n_states)
    }

    /// Errors with `Unbound` when the ground state leaks into the tail region.
    pub fn check_bound(&self, solution: &BoundStateSolution) -> Result<()> {
        solution.require_converged(0)?;
        let tail = solution.probability_above(0, solution.grid.z_max() - TAIL_WIDTH);
        if tail > TAIL_PROBABILITY {
            return Err(Error::Unbound(format!(
                "ground-state probability {tail:.3e} within {TAIL_WIDTH} nm of z_max"
            )));
        }
        Ok(())
    }

    pub fn ground_state(&self, stack: &DielectricStack, field: &FieldSpec) -> Result<GroundState> {
        let solution = self.solve(stack, field, 1)?;
        self.check_bound(&solution)?;
        Ok(GroundState {
            energy: solution.energies[0],
            mean_height: mean_height(&solution)?,
            solution,
        })
    }

    /// `W^G(L, E_ex)`, meV.
    pub fn ground_state_energy(&self, stack: &DielectricStack, field: &FieldSpec) -> Result<f64> {
        Ok(self.ground_state(stack, field)?.energy)
    }

    pub fn hellmann_feynman_check(
        &self,
        stack: &DielectricStack,
        field: &FieldSpec,
        delta: f64,
    ) -> Result<HellmannFeynman> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let e = field.volts_per_metre();
        let w_minus = self.ground_state_energy(stack, &FieldSpec::new(e - delta)?)?;
        let w_plus = self.ground_state_energy(stack, &FieldSpec::new(e + delta)?)?;
        let centre = self.ground_state(stack, field)?;
        let expectation = centre
            .solution
            .expectation(0, |z| field_coupling(stack, z).unwrap_or(0.0));
        Ok(HellmannFeynman::new(w_minus, w_plus, expectation, delta))
    }
}

/// `W^G` with the shared default solver.
pub fn ground_state_energy(stack: &DielectricStack, field: &FieldSpec) -> Result<f64> {
    PerpendicularSolver::shared().ground_state_energy(stack, field)
}

/// Hellmann-Feynman residual with the shared default solver.
pub fn hellmann_feynman_check(stack: &DielectricStack, field: &FieldSpec, delta: f64) -> Result<f64> {
    Ok(PerpendicularSolver::shared()
        .hellmann_feynman_check(stack, field, delta)?
        .residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const H2M: f64 = 38.0998;

    #[test]
    fn particle_in_a_box() {
        let width = 10.0;
        let exact = PI * PI * H2M / (width * width);
        let mut errors = Vec::new();
        for n in [1001, 2001] {
            let grid = Grid1D::new(0.0, width, n).unwrap();
            let h = build_hamiltonian(|_| 0.0, &grid, H2M).unwrap();
            let sol = solve_lowest(&h, &grid, 3).unwrap();
            assert_relative_eq!(sol.energies[0], exact, max_relative = 1e-5);
            assert_eq!(sol.nodes, vec![0, 1, 2]);
            errors.push((sol.energies[0] - exact).abs());
        }
        // Second order: halving h cuts the error by ~4.
        let ratio = errors[0] / errors[1];
        assert!((3.9..4.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn constant_shift_is_a_gauge() {
        let grid = Grid1D::new(-5.0, 5.0, 800).unwrap();
        let v = |z: f64| 0.3 * z * z;
        let base = solve_lowest(&build_hamiltonian(v, &grid, H2M).unwrap(), &grid, 3).unwrap();
        let moved = solve_lowest(&build_hamiltonian(|z| v(z) + 17.5, &grid, H2M).unwrap(), &grid, 3).unwrap();
        for (a, b) in base.energies.iter().zip(&moved.energies) {
            assert_relative_eq!(b - a, 17.5, max_relative = 1e-9);
        }
    }

    #[test]
    fn normalization_and_symmetric_box_height() {
        let grid = Grid1D::new(-4.0, 4.0, 1001).unwrap();
        let h = build_hamiltonian(|_| 0.0, &grid, H2M).unwrap();
        let sol = solve_lowest(&h, &grid, 2).unwrap();
        for state in 0..2 {
            assert_relative_eq!(sol.expectation(state, |_| 1.0), 1.0, max_relative = 1e-8);
        }
        assert!(mean_height(&sol).unwrap().abs() < 1e-8);
    }

    #[test]
    fn non_finite_potential_names_position() {
        let grid = Grid1D::new(0.0, 1.0, 501).unwrap();
        let err = build_hamiltonian(|z| if z > 0.5 { f64::INFINITY } else { 0.0 }, &grid, H2M).unwrap_err();
        match err {
            Error::NonFinitePotential { z, .. } => assert!(z > 0.5 && z < 0.5 + 2.0 * grid.spacing()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn usage_errors() {
        let grid = Grid1D::new(0.0, 1.0, 501).unwrap();
        let h = build_hamiltonian(|_| 0.0, &grid, H2M).unwrap();
        assert!(matches!(solve_lowest(&h, &grid, 0), Err(Error::Usage(_))));
        assert!(matches!(solve_lowest(&h, &grid, 11), Err(Error::Usage(_))));
        let one = solve_lowest(&h, &grid, 1).unwrap();
        assert!(matches!(perpendicular_gap(&one), Err(Error::Usage(_))));
        assert!(Grid1D::new(0.0, 1.0, 499).is_err());
        assert!(Grid1D::new(1.0, 0.0, 600).is_err());
    }

    #[test]
    fn field_independent_potential_has_zero_derivative() {
        let grid = Grid1D::new(-3.0, 3.0, 600).unwrap();
        let base: Vec<f64> = grid.interior().map(|z| z * z).collect();
        let coupling = vec![0.0; base.len()];
        let hf = hellmann_feynman_residual(&grid, H2M, &base, &coupling, 0.0, 1e4).unwrap();
        assert_eq!(hf.finite_difference, 0.0);
        assert_eq!(hf.expectation, 0.0);
        assert_eq!(hf.residual, 0.0);
    }

    #[test]
    fn linear_coupling_hellmann_feynman() {
        // V = z^2 + E z: exact dW/dE = <z> = -E / 2 (in these units).
        let grid = Grid1D::new(-8.0, 8.0, 2000).unwrap();
        let base: Vec<f64> = grid.interior().map(|z| z * z).collect();
        let coupling: Vec<f64> = grid.interior().collect();
        let hf = hellmann_feynman_residual(&grid, 1.0, &base, &coupling, 0.7, 1e-3).unwrap();
        assert_relative_eq!(hf.expectation, -0.35, max_relative = 1e-6);
        assert!(hf.residual < 1e-6, "{hf:?}");
    }
}
