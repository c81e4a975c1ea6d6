pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod jet;
pub mod pipeline;
pub mod r3_fields;
pub mod s3_construct;
pub mod specfun;
pub mod t3_construct;

pub use error::{BeltramiError, Result};
