//! Fractional calculus toolkit and damped-wave simulator with nonlinear memory.

pub mod fracops;
pub mod quad;
pub mod special;
pub mod testfn;
pub mod volterra;
pub mod wavesim;
