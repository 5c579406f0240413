//! One-dimensional solver for second-order mean field games with possibly
//! degenerate diffusion.
//!
//! The system couples a backward Hamilton-Jacobi-Bellman equation for the
//! value of an average player with a forward Fokker-Planck equation for the
//! population density. Both are discretized on a shared uniform space-time
//! lattice:
//!
//! * [`hjb`] — semi-Lagrangian value iteration with a quadratic Hamiltonian;
//! * [`mollifier`] — Gaussian smoothing of the value table and drift
//!   extraction by central differences;
//! * [`fokker_planck`] — conservative barycentric push-forward of the
//!   density, with a Markov-chain sampler for validation;
//! * [`fixed_point`] — the Picard loop coupling the two sweeps;
//! * [`problem`] — cost and diffusion data, including three reference
//!   configurations (no diffusion, constant diffusion, degenerate
//!   diffusion);
//! * [`metrics`] — exact 1D Wasserstein-1 distance, sup norms and moments.

pub mod error;
pub mod fixed_point;
pub mod fokker_planck;
pub mod grid;
pub mod hjb;
pub mod metrics;
pub mod mollifier;
pub mod problem;

pub use error::{Error, Result};
pub use fixed_point::{default_epsilon, solve, FixedPointConfig, MfgSolution};
pub use fokker_planck::{
    build_transition_kernel, flows, initial_density, push_forward, reconstruct_continuous,
    simulate_markov_chain, simulate_scheme, solve_forward, ContinuousDensity, DensityField,
    FlowPair, FlowSlice, TransitionKernel,
};
pub use grid::{BarycentricWeights, Grid};
pub use hjb::{s_hat, solve_backward, solve_backward_with_costs, MinimizerConfig, ValueField};
pub use metrics::{
    second_moment, sup_norm_diff, wasserstein1_1d, wasserstein1_point_masses, ErrorReport,
};
pub use mollifier::{
    build_kernel, drift_field, gradient, mollify_slice, DriftField, MollifierKernel,
};
pub use problem::{
    cost_table, interaction_cost, test_problem, CostTable, InteractionKernel, MfgProblem,
};
