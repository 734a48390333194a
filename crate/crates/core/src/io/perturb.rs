//! Operational disturbances applied to an instance before re-solving.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::{NodeKind, Seconds};
use crate::io::Instance;
use crate::network::TrackOutage;

/// Slack granted beyond a train's delay.
pub const DELAY_SLACK: Seconds = 300;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// Trains with a desired arrival in `[from, to]` are delayed by a random
    /// amount in `[0, max_delay]`. Their arrival window becomes
    /// `[delay, delay + 300]` around the planned time.
    Delays { from: Seconds, to: Seconds, max_delay: Seconds, seed: u64 },
    /// A siding is unavailable from `from` (until `until`, if given).
    TrackOutage {
        node: String,
        from: Seconds,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        until: Option<Seconds>,
    },
}

/// Applies `scenarios` in order. Train delays are drawn in whole grid periods.
pub fn perturb_instance(instance: &Instance, scenarios: &[Scenario]) -> Result<Instance> {
    let mut out = instance.clone();
    for s in scenarios {
        match s {
            Scenario::Delays { from, to, max_delay, seed } => {
                if max_delay < &0 || from > to {
                    return Err(Error::Scenario("delay scenario needs from <= to and max_delay >= 0".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let g = out.grid.macro_granularity;
                let h = out.grid.horizon;
                for t in out.trains.iter_mut() {
                    if t.desired_arrival < *from || t.desired_arrival > *to {
                        continue;
                    }
                    let delay = rng.gen_range(0..=max_delay / g) * g;
                    let arr_latest = (delay + DELAY_SLACK).min(h - t.desired_arrival);
                    t.arrival_window.earliest = delay.min(arr_latest);
                    t.arrival_window.latest = arr_latest;
                    let dep_latest = t.departure_window.latest.max(delay + DELAY_SLACK);
                    t.departure_window.latest = dep_latest.min(h - t.desired_departure);
                    t.departure_window.earliest = t.departure_window.earliest.min(t.departure_window.latest);
                }
            }
            Scenario::TrackOutage { node, from, until } => {
                match out.station.node(node) {
                    Some(n) if n.kind == NodeKind::Siding => {}
                    Some(_) => return Err(Error::Scenario(format!("`{node}` is not a siding"))),
                    None => return Err(Error::Scenario(format!("no track named `{node}`"))),
                }
                out.outages.push(TrackOutage { node: node.clone(), from: *from, until: *until });
            }
        }
    }
    Ok(out)
}
