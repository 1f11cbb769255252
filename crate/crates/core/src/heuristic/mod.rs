//! The conjectural distribution of class numbers over `Q(sqrt p)`:
//! `P(h = q) = lambda_q P_0` for odd `q`.

pub mod constants;
pub mod identity;
pub mod lambda;
pub mod real;

pub use constants::{
    p0_constant, power_sum_limit, prob_nondivisible, zeta, Bounded, HeuristicConstants,
    P0Evaluation, DEFAULT_PRIME_LIMIT, DEFAULT_ZETA_TERMS,
};
pub use identity::{euler_product_eval, identity_check, nested_identity_eval, IdentityCheck, ProductForm};
pub use lambda::{
    format_rational, lambda, lambda_mass, lambda_power_sum, lambda_prime_power, parse_rational,
    LambdaValue, PrimePowerFactor,
};
pub use real::Real;
