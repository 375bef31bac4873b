// SPDX-License-Identifier: Apache-2.0
//! Lattice-based accountable tracing signatures over R_q = Z_q[X]/(X^n+1), q = 3^k.

pub mod ats_scheme;
pub mod codec;
pub mod decomp;
pub mod dm_signature;
pub mod error;
pub mod koe;
pub mod layout;
pub mod params;
pub mod perm_toolkit;
pub mod relations;
pub mod ring_arith;
mod scratch;
pub mod stern_core;

pub use error::{Error, Result};
pub use params::{ParamSpec, Params};
pub use ring_arith::{IntMatQ, IntVecQ, Ring, RingElem, RingVec, SparseMatQ};
