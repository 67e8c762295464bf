//! Numerical building blocks shared by the solver modules.

pub mod interp;
pub mod ode;
pub mod quadrature;
pub mod roots;
