//! Benchmark plates with known solutions and goal weights.

pub mod goal;
pub mod jet;
pub mod poly;
pub mod problems;

pub use goal::{GoalWeight, Region};
pub use jet::Jet4;
pub use poly::{bilaplacian_poly, BivariatePolynomial};
pub use problems::{
    example_1_gradient, example_1_solution, example_1_u, reference_goal, singular_u, singular_u_and_f, PolynomialLoad,
    Problem, ProblemId, SingularLoad, ALPHA, OMEGA,
};
