pub mod arith;
pub mod jacobi;
pub mod lpcore;
pub mod cutpoly;
pub mod gapbound;
pub mod instances;
pub mod kernels;
pub mod sampling;
