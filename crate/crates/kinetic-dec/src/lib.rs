//! Kinetic (BGK relaxation) discretisation of 2D hyperbolic systems.
//!
//! The scheme relaxes a discrete-velocity kinetic system towards a
//! conservation law `u_t + A1(u)_x + A2(u)_y = 0`. Time stepping uses
//! defect correction, space uses upwind interpolatory differences, and the
//! stiff relaxation is solved node by node so the whole method stays
//! explicit for any relaxation time.
//!
//! The crate is `no_std` (with `alloc`). Enable `parallel` to spread the
//! stencil sweeps over a rayon pool.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// NaN must fail positivity checks, and index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::wrong_self_convention)]

extern crate alloc;

pub mod cases;
pub mod dec;
mod error;
pub mod fourier;
pub mod grid;
pub mod kinetic;
mod par;
pub mod solver;
pub mod space;
pub mod stabilize;
pub mod systems;
pub mod transport;

pub use error::{Error, Result};
