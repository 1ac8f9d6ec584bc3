#![allow(clippy::needless_range_loop)]

pub mod builder;
pub mod extension;
pub mod homotopy;
pub mod io;
pub mod katetov;
pub mod lp;
pub mod metric;
pub mod random;
pub mod rational;
pub mod stabilizer;
pub mod suite;
