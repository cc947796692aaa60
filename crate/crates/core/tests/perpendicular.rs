use approx::assert_relative_eq;
use neontrap_core::bound_states::{build_hamiltonian, solve_lowest, Grid1D, PerpendicularGridSpec};
use neontrap_core::{
    image_series_oracle, perpendicular_gap, perpendicular_potential, DielectricStack, FieldSpec, PerpendicularSolver,
    PhysicalConstants, Substrate, Thickness,
};

fn consts() -> PhysicalConstants {
    PhysicalConstants::codata()
}

fn superconductor(l: f64) -> DielectricStack {
    DielectricStack::superconductor(Thickness::Finite(l)).unwrap()
}

fn bulk() -> DielectricStack {
    DielectricStack::superconductor(Thickness::Infinite).unwrap()
}

#[test]
fn hydrogen_like_oracle() {
    // -A / z above a hard wall at z = 0: E_n = -A^2 / (4 H n^2), <z> = 3 H / A.
    let c = consts();
    let strength = c.image_prefactor * bulk().bulk_reflection().abs();
    let grid = Grid1D::new(0.0, 60.0, 20001).unwrap();
    let h = build_hamiltonian(|z| -strength / z, &grid, c.hbar2_over_2me).unwrap();
    let sol = solve_lowest(&h, &grid, 2).unwrap();
    let rydberg = strength * strength / (4.0 * c.hbar2_over_2me);
    assert!((rydberg - 40.22).abs() < 0.01);
    assert!((sol.energies[0] + 40.22).abs() <= 0.1, "{}", sol.energies[0]);
    assert!((perpendicular_gap(&sol).unwrap() - 30.16).abs() <= 0.1);
    assert_relative_eq!(sol.energies[1], sol.energies[0] / 4.0, max_relative = 5e-3);
    let bohr = 2.0 * c.hbar2_over_2me / strength;
    let z_mean = sol.expectation(0, |z| z);
    assert!((z_mean - 1.5 * bohr).abs() <= 0.01);
    assert!((z_mean - 1.460).abs() <= 0.01);
}

#[test]
fn harmonic_ladder() {
    let c = consts();
    let hw = 5.0;
    let grid = Grid1D::new(-20.0, 20.0, 8001).unwrap();
    let h = build_hamiltonian(|z| hw * hw * z * z / (4.0 * c.hbar2_over_2me), &grid, c.hbar2_over_2me).unwrap();
    let sol = solve_lowest(&h, &grid, 5).unwrap();
    for (n, e) in sol.energies.iter().enumerate() {
        assert_relative_eq!(*e, hw * (n as f64 + 0.5), max_relative = 1e-4);
        assert_eq!(sol.nodes[n], n);
    }
}

#[test]
fn series_matches_quadrature_across_stacks() {
    let c = consts();
    let stacks = [
        superconductor(1.0),
        superconductor(10.0),
        superconductor(50.0),
        DielectricStack::silicon(Thickness::Finite(2.0)).unwrap(),
        DielectricStack::silicon(Thickness::Finite(10.0)).unwrap(),
        DielectricStack::new(1.244, Substrate::Dielectric { eps_b: 4.0 }, Thickness::Finite(5.0)).unwrap(),
    ];
    for stack in &stacks {
        for z in [0.23, 0.5, 1.0, 3.0, 10.0] {
            let q = perpendicular_potential(stack, &c, z).unwrap();
            let s = image_series_oracle(stack, &c, z, 4000).unwrap();
            assert!((q - s).abs() <= 1e-6 * s.abs().max(1e-3), "{stack:?} z={z}: {q} vs {s}");
        }
    }
}

#[test]
fn thickness_limits() {
    let c = consts();
    let b = perpendicular_potential(&bulk(), &c, 1.0).unwrap();
    // The leading correction decays only as 1/L.
    let at_1e3 = perpendicular_potential(&superconductor(1e3), &c, 1.0).unwrap();
    assert!((at_1e3 / b - 1.0).abs() < 2e-2);
    let thick = perpendicular_potential(&superconductor(1e6), &c, 1.0).unwrap();
    assert_relative_eq!(thick, b, max_relative = 1e-4);
    let at_1e_3 = perpendicular_potential(&superconductor(1e-3), &c, 1.0).unwrap();
    assert!((at_1e_3 / (-c.image_prefactor / 2.0) - 1.0).abs() < 2e-3);
    let thin = perpendicular_potential(&superconductor(1e-6), &c, 1.0).unwrap();
    let mirror = -c.image_prefactor / 2.0;
    assert_relative_eq!(thin, mirror, max_relative = 1e-4);
}

#[test]
fn image_potential_shape() {
    let c = consts();
    for l in [2.0, 10.0] {
        let stack = superconductor(l);
        let mut last = f64::NEG_INFINITY;
        for i in 0..200 {
            let z = 0.23 + 0.1 * f64::from(i);
            let v = perpendicular_potential(&stack, &c, z).unwrap();
            assert!(v > last);
            last = v;
        }
    }
    for z in [0.3, 1.0, 5.0] {
        let thin = perpendicular_potential(&superconductor(5.0), &c, z).unwrap();
        let thick = perpendicular_potential(&superconductor(20.0), &c, z).unwrap();
        assert!(thin < thick);
    }
}

#[test]
fn ground_state_energies() {
    let solver = PerpendicularSolver::default();
    let zero = FieldSpec::zero();
    let w_bulk = solver.ground_state(&bulk(), &zero).unwrap();
    let w_sc = solver.ground_state(&superconductor(10.0), &zero).unwrap();
    let w_si = solver
        .ground_state(&DielectricStack::silicon(Thickness::Finite(10.0)).unwrap(), &zero)
        .unwrap();
    eprintln!(
        "bulk {:.4} sc {:.4} si {:.4} h_e {:.4}",
        w_bulk.energy, w_sc.energy, w_si.energy, w_sc.mean_height
    );
    assert!((w_bulk.energy + 15.7).abs() <= 0.5);
    assert!((w_sc.energy + 44.6).abs() <= 1.0);
    assert!((w_si.energy + 40.0).abs() <= 1.0);
    assert!((w_sc.mean_height - 1.7).abs() <= 0.2);
    let sol = solver.solve(&superconductor(10.0), &zero, 2).unwrap();
    let gap = perpendicular_gap(&sol).unwrap();
    assert!((gap - 21.1).abs() <= 1.0, "gap {gap}");
}

#[test]
fn grid_refinement_converges() {
    let coarse = PerpendicularSolver::default();
    let fine = PerpendicularSolver::new(
        consts(),
        PerpendicularGridSpec {
            n_points: 16384,
            ..PerpendicularGridSpec::default()
        },
    );
    let stack = superconductor(10.0);
    let a = coarse.ground_state_energy(&stack, &FieldSpec::zero()).unwrap();
    let b = fine.ground_state_energy(&stack, &FieldSpec::zero()).unwrap();
    assert!((a - b).abs() <= 0.05, "{a} vs {b}");
}

#[test]
fn thinner_layers_bind_deeper() {
    let solver = PerpendicularSolver::shared();
    let mut last = f64::NEG_INFINITY;
    for l in [2.0, 4.0, 7.0, 10.0, 20.0, 50.0] {
        let w = solver
            .ground_state_energy(&superconductor(l), &FieldSpec::zero())
            .unwrap();
        assert!(w > last, "L = {l}: {w}");
        last = w;
    }
    let w7 = solver
        .ground_state_energy(&superconductor(7.0), &FieldSpec::zero())
        .unwrap();
    let w10 = solver
        .ground_state_energy(&superconductor(10.0), &FieldSpec::zero())
        .unwrap();
    let depth = w10 - w7;
    assert!((7.0..=13.0).contains(&depth), "depth {depth}");
}

#[test]
fn field_moves_height_modestly() {
    let solver = PerpendicularSolver::shared();
    let stack = superconductor(10.0);
    let heights: Vec<f64> = [-1e6, 0.0, 1e6]
        .iter()
        .map(|&e| {
            solver
                .ground_state(&stack, &FieldSpec::new(e).unwrap())
                .unwrap()
                .mean_height
        })
        .collect();
    assert!(heights[0] > heights[1] && heights[1] > heights[2]);
    assert!((heights[0] - heights[2]).abs() / heights[1] <= 0.2);
}

#[test]
fn hellmann_feynman_agrees() {
    let solver = PerpendicularSolver::shared();
    let stack = superconductor(10.0);
    for e in [-5e5, 0.0, 5e5] {
        let hf = solver
            .hellmann_feynman_check(&stack, &FieldSpec::new(e).unwrap(), 1e4)
            .unwrap();
        assert!(hf.residual <= 1e-3, "E = {e}: {hf:?}");
    }
}

#[test]
fn density_decays_inside_barrier() {
    let solver = PerpendicularSolver::shared();
    let sol = solver.solve(&superconductor(10.0), &FieldSpec::zero(), 1).unwrap();
    let grid = sol.grid;
    let psi = &sol.wavefunctions[0];
    let idx = |z: f64| ((z - grid.z_min()) / grid.spacing()).round() as usize;
    let (a, b) = (idx(-0.6), idx(-0.3));
    let rate = (psi[b].powi(2) / psi[a].powi(2)).ln() / (grid.node(b) - grid.node(a));
    let decay_length = 1.0 / rate;
    assert!((0.08..=0.13).contains(&decay_length), "{decay_length}");
}
