//! Problem and certificate files, the verification pipeline, and the
//! back-substitution for `x² + y³ = z¹⁰`.

pub mod fermat;
pub mod fixtures;
pub mod pipeline;
pub mod problem;
pub mod report;
