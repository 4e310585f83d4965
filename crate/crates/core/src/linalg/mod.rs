//! Exact linear algebra over `Z/p^s`.

mod howell;
mod matrix;
mod modulus;
mod profile;
mod smith;

pub use howell::{canonical_form, image_basis, kernel, left_kernel, HowellForm, Kernel};
pub use matrix::{dot, row_echelon_mod_p, Matrix};
pub use modulus::{is_prime, prime_power_decompose, RingModulus, MAX_ORDER};
pub use profile::ModuleProfile;
pub use smith::{smith_form, solve, solve_with, SmithForm, SolveOutcome};
