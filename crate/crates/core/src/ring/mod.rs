//! Exact arithmetic over Z/p: scalars, dense matrices, windows and block kernels.

mod matrix;
mod modulus;
mod ops;
mod view;

pub use matrix::Matrix;
pub use modulus::{is_prime, Elem, Modulus, DEFAULT_MODULUS};
pub use ops::{block_addsub, block_lincomb, block_scale, classical_mul};
pub use view::{BufId, MatView, Workspace};
