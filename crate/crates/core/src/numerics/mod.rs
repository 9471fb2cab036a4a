//! Quadrature with endpoint singularities, function tabulation, weighted
//! Laplace transforms, and the marching solvers for the Dickman-type delay
//! equations.

pub mod laplace;
pub mod quad;
pub mod tabulated;
pub mod volterra;

pub use laplace::{laplace_weighted, Bracketed};
pub use quad::{quad, quad_complex, quad_exp_tail, EndpointWeights};
pub use tabulated::{InterpOrder, TableMeta, TabulatedFunction};
pub use volterra::{renewal_march, volterra_march, MarchGrid};
