pub mod error;
pub mod lightcone;
pub mod numerics;
pub mod observables;
pub mod circlemaps;
pub mod profiles;
pub mod transport;

pub use error::{Error, Result};
