//! Files in and out: instances, generators, scenarios, solution files and plots.

pub mod gantt;
pub mod generate;
pub mod instance;
pub mod perturb;
pub mod report;

pub use gantt::emit_gantt;
pub use generate::{generate_large_station, generate_virtual_station, station_layout, LargeStationConfig, VirtualStationConfig};
pub use instance::Instance;
pub use perturb::{perturb_instance, Scenario};
pub use report::{SolutionFile, SolveSummary, Totals, TrainRow, TrainStatus};
