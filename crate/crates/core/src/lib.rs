//! Train platforming at a busy station.
//!
//! Trains are routed through a two-level space-time network: a macroscopic
//! per-train DAG of inbound routes, siding waits and outbound routes, linked to
//! microscopic switch-group and siding resources that carry the capacity
//! constraints. [`lr`] dualizes those constraints and prices arcs with the
//! multipliers; [`heuristic`] builds feasible plans; [`oracle`] checks plans and
//! solves small instances exactly.
//!
//! ```no_run
//! use platforming::io::{generate_virtual_station, VirtualStationConfig};
//! use platforming::lr::{self, LrParams};
//!
//! let inst = generate_virtual_station(&VirtualStationConfig { trains: 6, seed: 1, ..Default::default() })?;
//! let net = inst.network()?;
//! let out = lr::run(&net, &inst.weights, LrParams::default());
//! println!("UB {} LB {}", out.bounds.ub_best, out.bounds.lb_best);
//! # Ok::<(), platforming::Error>(())
//! ```

pub mod error;
pub mod heuristic;
pub mod infrastructure;
pub mod io;
pub mod lr;
pub mod network;
pub mod oracle;
pub mod solution;
pub mod timetable;
pub mod train_dp;

pub use error::{Error, Result};
pub use infrastructure::{InterlockingMode, NodeKind, PhysicalNode, PhysicalRoute, RouteKind, Seconds, Station};
pub use network::{ArcKind, LinkSets, MicroResource, ResourceId, SpaceTimeNetwork, TimeGrid, TrackOutage};
pub use solution::{objective_value, Solution, TrainPath};
pub use timetable::{BalanceParams, ShiftWindow, Train, Weights};
