pub mod dynamics;
pub mod error;
pub mod gaussian_core;
pub mod linalg;
pub mod mc_oracle;
pub mod network;
pub mod qd;
pub mod teleportation;
