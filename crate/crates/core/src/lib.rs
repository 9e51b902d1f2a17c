pub mod approx;
pub mod exactreal;
pub mod funcalg;
pub mod lattice;
pub mod pointsets;
pub mod runner;
pub mod scenario;
pub mod syntax;
