//! Parisi PDE: measures, the backward solver, the Parisi functional and its
//! minimization, plus independent oracles (Hopf–Cole recursion and the dual SDE).

pub mod functional;
pub mod hopf_cole;
pub mod measure;
pub mod pde;

pub use functional::{
    energy_target, functional_gradient, minimize_measure, parisi_functional, process_moments, MinimizeOptions,
    MinimizeResult, ProcessMoments,
};
pub use hopf_cole::{heat_solution, heat_solution_x, hopf_cole_atomic, hopf_cole_checked};
pub use measure::ParisiMeasure;
pub use pde::{solve_pde, time_grid, ParisiSolution, PdeGrid, PhiPoint};
