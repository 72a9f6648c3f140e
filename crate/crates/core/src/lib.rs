// Tensor code reads best with explicit index loops.
#![allow(clippy::needless_range_loop)]

pub mod connections;
pub mod geometry;
pub mod symexpr;
pub mod variational;
pub mod models;
pub mod verify;
pub mod dsl;
