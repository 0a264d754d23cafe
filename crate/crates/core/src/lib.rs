//! Workbench for finite memory systems: neighbourhood-structured signalling
//! automata, their configuration-graph dynamics, exact decision of emergence
//! of collective memory, model checking of a past/future temporal logic with
//! counting, and the bridge from computed predicates to semilinear sets.

pub mod emergence;
pub mod family;
pub mod parikh;
pub mod presburger;
pub mod semilinear;
pub mod tri;
pub mod fixtures;
pub mod gen;
pub mod graph;
pub mod loader;
pub mod logic;
pub mod sim;
pub mod system;
