//! Default settings, in one place.
//!
//! | setting                    | value      |
//! |----------------------------|------------|
//! | quadrature relative tol    | 1e-10      |
//! | quadrature absolute tol    | 1e-15      |
//! | tail mass δ                | 1e-12      |
//! | max subdivisions           | 4000       |
//! | IHR grid size / tolerance  | 64 / 1e-9  |
//! | IHR grid tail              | 1e-12      |
//! | check max order            | 8          |
//! | witness order cap          | 12         |
//! | MC samples / seed / shards | 100000 / 0x5eed / 1 |
//! | MC block size              | 4096       |
//! | n range                    | 2..=10     |

pub const REL_TOL: f64 = 1e-10;
pub const ABS_TOL: f64 = 1e-15;
pub const TAIL_MASS: f64 = 1e-12;
pub const MAX_SUBDIVISIONS: usize = 4000;

pub const IHR_GRID_SIZE: usize = 64;
pub const IHR_TOLERANCE: f64 = 1e-9;
pub const IHR_GRID_TAIL: f64 = 1e-12;

pub const MAX_ORDER: usize = 8;
pub const WITNESS_ORDER_CAP: usize = 12;

pub const MC_SAMPLES: u64 = 100_000;
pub const MC_SEED: u64 = 0x5eed;
pub const MC_SHARDS: usize = 1;
/// Samples per accumulator block; shards own whole blocks.
pub const MC_BLOCK: u64 = 4096;

pub const N_MIN: u64 = 2;
pub const N_MAX: u64 = 10;
