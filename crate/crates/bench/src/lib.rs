//! Fixtures shared by the solver benchmarks.

use neontrap_core::{DielectricStack, PhysicalConstants, RadialGrid, Thickness, ThicknessProfile};

pub fn superconductor(thickness_nm: f64) -> DielectricStack {
    DielectricStack::superconductor(Thickness::Finite(thickness_nm)).expect("valid stack")
}

pub fn constants() -> PhysicalConstants {
    PhysicalConstants::codata()
}

/// Reference pillar: L0 = 10 nm, delta_L = 0.5 nm, R = 110 nm, b = 2 nm.
pub fn reference_pillar() -> ThicknessProfile {
    ThicknessProfile::pillar(10.0, 0.5, 110.0, 2.0).expect("valid profile")
}

pub fn radial_grid(n_points: usize) -> RadialGrid {
    RadialGrid::for_profile(&reference_pillar(), n_points).expect("valid grid")
}
