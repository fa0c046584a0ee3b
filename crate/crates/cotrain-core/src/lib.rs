#![no_std]

extern crate alloc;

pub mod admm;
pub mod arith;
pub mod codec;
pub mod fixedpoint;
pub mod linalg;
pub mod mpc;
pub mod paillier;
pub mod protocol;
pub mod testkeys;
pub mod transcript;
pub mod zkp;
