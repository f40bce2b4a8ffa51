pub mod capacity;
pub mod channels;
pub mod degrade;
pub mod entropic;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod sdp;
pub mod spinalign;

pub use error::{Error, Result};
