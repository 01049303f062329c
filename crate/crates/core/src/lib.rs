pub mod error;
pub mod fmt;
pub mod hilbert;
pub mod lindblad;
pub mod observables;
pub mod ode;
pub mod pipeline;
pub mod semiclassical;
pub mod sparse;
pub mod steady;

pub use error::{JcError, Result};
