//! Zone (difference-bound matrix) abstract domain with minimal changed-set
//! slicing, a worklist dataflow engine, and a domain comparison harness.

pub mod bound;
pub mod domains;
pub mod engine;
pub mod harness;
pub mod ir;
pub mod minimizer;
pub mod zone;

pub use bound::Bound;
pub use minimizer::{DeltaSet, MinMethod, NeighborVariant, Subgraph};
pub use zone::{VarId, ZoneState};
