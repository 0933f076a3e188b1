//! Special functions and quadrature primitives.

mod gamma;
mod laguerre;
mod quadrature;

pub use gamma::{gamma_ratio, ln_gamma, log_gamma};
pub use laguerre::{
    laguerre, laguerre_all, orthonormal_laguerre, radial_functions,
    radial_functions_with_derivative,
};
pub use quadrature::{
    build_rule, gauss_laguerre, gauss_legendre, integrate, integrate_adaptive,
    integrate_adaptive_tol, Domain, Integral, PanelGrid, QuadValue, QuadratureRule, RuleKind,
    DEFAULT_ABS_TOL, DEFAULT_MAX_DEPTH, DEFAULT_REL_TOL, MAX_LAGUERRE_ORDER,
};
