pub mod ball;
pub mod constants;

pub use ball::{bits_for_digits, CertifiedReal};
pub use constants::{
    binet_error_check, binet_error_check_with, compute_constants, first_binet_violation, minimal_poly_check_c_alpha, ConstantEntry,
    MinimalPolyReport, TribConstants,
};
