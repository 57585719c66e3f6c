//! Two-party session types and behavioural subtyping checkers.
//!
//! The crate parses session types, derives their labelled transition
//! systems (LTS) and decides three subtyping relations by playing
//! simulation games:
//!
//! - **synchronous** subtyping (covariant outputs, contravariant inputs),
//! - **asynchronous** subtyping over unbounded FIFO channels, where the
//!   candidate subtype may anticipate outputs while inputs accumulate in
//!   an input tree (sound but incomplete: verdicts are `true`, `false`
//!   or `maybe`),
//! - **fair asynchronous** subtyping, where input accumulation is tracked
//!   with recursive input contexts and both peers must be able to reach
//!   clean termination.
//!
//! Every check produces a [`SimGraph`] describing the simulation game,
//! which can be rendered to Graphviz DOT via [`sim_to_dot`]. A bounded
//! executor of communicating machines ([`oracle`]) cross-validates
//! verdicts by brute force.
//!
//! See the `checker` binary for the command-line front end and the
//! `examples/` directory for runnable walkthroughs of each capability.

pub mod async_checker;
pub mod input_ctx;
pub mod lts;
pub mod oracle;
pub mod simgraph;
pub mod sync_checker;
pub mod types;

pub use async_checker::{check_async, AsyncOpts, AsyncState};
pub use input_ctx::{intree, rec_intree, InputTree, RecInputContext};
pub use oracle::{explore, ExploreMode, ExploreResult, Outcome, Violation, ViolationKind};
pub use simgraph::{lts_to_dot, sim_to_dot, FailureReason, SimGraph, SimNode, Verdict};
pub use sync_checker::{check_sync, SyncMode};
pub use lts::{build_lts, Action, Lts, Polarity, StateId};
pub use types::{parse, Label, ParseError, SessionType};
