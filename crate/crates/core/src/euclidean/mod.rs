//! Weighted Onofri inequalities on the plane for radial densities.

pub mod el;
pub mod keller_segel;
pub mod weight;

pub use el::{
    capital_lambda_quotient, dilation_family, el_residual_weighted, multistart_weighted, onofri_deficit_weighted,
    perturbation_bound, solve_el_weighted, CapitalLambda, PerturbationBound, WeightedElSolution,
};
pub use keller_segel::{ks_decomposition_error, solve_keller_segel, KsConfig};
pub use weight::{lambda_star_weight, LambdaStarWeight, Lorentzian, RadialFunction, Weight, WeightKind};
