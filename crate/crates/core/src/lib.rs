//! Interaction-net rewriting: nets over a signature, interaction rules,
//! a located strategy language, and branching rewrite traces.

pub mod iso;
pub mod net;
pub mod report;
pub mod rewrite;
pub mod signature;
pub mod strategy;
pub mod textio;
pub mod trace;

pub use iso::iso_equal;
pub use net::{AgentId, Edge, EdgeId, Net, NetError, PortRef, Redex};
pub use report::{Violation, ViolationCode};
pub use rewrite::{apply_rule, InteractionRule, RedexSet, RewriteDelta, RuleSet};
pub use signature::{Signature, SymbolId};
pub use trace::{Document, NodeId, TraceError, TraceLabel, TraceTree};
