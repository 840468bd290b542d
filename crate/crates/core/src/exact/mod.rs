//! Special functions and closed-form reference solutions.

mod reference;
pub mod special;

pub use reference::{Barenblatt, ReferenceSolution};
pub use special::{beta, erf, erfc, erfinv, gamma, inv_reg_inc_beta, ln_gamma, reg_inc_beta};
