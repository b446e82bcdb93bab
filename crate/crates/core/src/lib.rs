//! Computer-assisted proofs of symmetric homoclinic orbits of
//! `u'''' + beta u'' + e^u - 1 = 0`.

pub mod interval;
pub mod linalg;
pub mod manifold;
pub mod radii;
pub mod seq;
pub mod bvp;
pub mod bvp_proof;
pub mod config;
pub mod cert;
pub mod continuation;
pub mod export;
