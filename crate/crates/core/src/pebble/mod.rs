//! Exhaustive search for low-memory schedules as a pebble game on the task graph.

mod convert;
mod graph;
mod search;

pub use convert::trace_to_schedule;
pub use graph::{Edge, EdgeKind, Node, TaskGraph};
pub use search::{rectangular_feasible, search, Game, Limits, Outcome, Pebble, ProductModel, SearchResult, Step, Trace};
