pub mod cavity;
pub mod constants;
pub mod coupling;
pub mod ensemble;
pub mod error;
pub mod heating;
pub mod hyperfine;
pub mod numerics;
pub mod scenario;
pub mod spectrum;
