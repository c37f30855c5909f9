//! Oriented rays in finite digraphs.
//!
//! The crate covers both directions of the ubiquity classification for
//! oriented rays at finite scale:
//!
//! * [`ray`] describes rays by orientation sequences and classifies them.
//! * [`digraph`] holds multidigraphs assembled from labeled ray prefixes,
//!   with vertex identification, path enumeration and pattern tracing.
//! * [`tribe`] and [`packing`] implement the positive side: forked
//!   subtribes, the Menger-based family extension and the final assembly
//!   of disjoint copies.
//! * [`counterexample`] builds the identification hosts for rays with
//!   bounded and unbounded representing sequences and re-checks every
//!   condition they rely on.
//! * [`audit`] bundles the plan checks with the oracle suites.
//! * [`oracle`] contains the deliberately naive brute-force searches the
//!   test-suites compare against.

pub mod audit;
pub mod counterexample;
pub mod digraph;
pub mod error;
pub mod instances;
pub mod oracle;
pub mod packing;
pub mod ray;
pub mod tribe;

pub use digraph::{Arc, ArcId, Digraph, DigraphBuilder, Embedding, Identification, RayLabel, VertexId};
pub use error::{GraphError, ParseSpecError};
pub use ray::{classify, prefix_isomorphic, Orientation, PhaseView, RaySpec, TailGen, Verdict};
pub use tribe::Tribe;
