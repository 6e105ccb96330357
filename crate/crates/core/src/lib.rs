pub mod arith;
pub mod chebotarev;
pub mod curves;
pub mod decision;
pub mod error;

pub use error::{Error, Result};
pub mod finitefield;
pub mod numberfield;
pub mod pointcount;
