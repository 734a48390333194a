//! Trains, their desired times and flexibility, and objective weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::{NodeKind, Seconds, Station};

/// Allowed deviation from a desired time, as `[earliest, latest]` seconds
/// relative to that time. Negative values are earlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[Seconds; 2]", into = "[Seconds; 2]")]
pub struct ShiftWindow {
    pub earliest: Seconds,
    pub latest: Seconds,
}

impl ShiftWindow {
    pub const fn new(earliest: Seconds, latest: Seconds) -> Self {
        Self { earliest, latest }
    }

    pub fn contains(&self, delta: Seconds) -> bool {
        self.earliest <= delta && delta <= self.latest
    }

    /// Largest absolute shift admitted by the window.
    pub fn max_abs(&self) -> Seconds {
        self.earliest.abs().max(self.latest.abs())
    }
}

impl From<[Seconds; 2]> for ShiftWindow {
    fn from(v: [Seconds; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<ShiftWindow> for [Seconds; 2] {
    fn from(w: ShiftWindow) -> Self {
        [w.earliest, w.latest]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Train {
    pub id: String,
    /// Entering boundary node.
    pub origin: String,
    /// Leaving boundary node.
    pub destination: String,
    pub desired_arrival: Seconds,
    pub desired_departure: Seconds,
    pub arrival_window: ShiftWindow,
    pub departure_window: ShiftWindow,
    /// Minimum dwell in seconds; converted to whole macro periods (rounded up).
    pub dwell_min: Seconds,
    /// Maximum dwell in seconds; converted to whole macro periods (rounded down).
    pub dwell_max: Seconds,
    pub stops: bool,
    /// Cost of the virtual (cancellation) path. `None` selects the default,
    /// see [`Train::default_cancellation_cost`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cancellation_cost: Option<f64>,
}

impl Train {
    /// `w1 * horizon + w2 * (max arrival shift + max departure shift) + 1`:
    /// strictly above the cost of any schedulable path.
    pub fn default_cancellation_cost(&self, weights: &Weights, horizon: Seconds) -> f64 {
        weights.w1 * horizon as f64
            + weights.w2 * (self.arrival_window.max_abs() + self.departure_window.max_abs()) as f64
            + 1.0
    }

    pub fn cancellation_cost(&self, weights: &Weights, horizon: Seconds) -> f64 {
        self.cancellation_cost
            .unwrap_or_else(|| self.default_cancellation_cost(weights, horizon))
    }

    pub fn validate(&self, station: &Station) -> Result<()> {
        let fail = |reason: String| Error::InvalidTrain { train: self.id.clone(), reason };
        match station.node(&self.origin) {
            Some(n) if n.kind == NodeKind::Entering => {}
            Some(_) => return Err(fail(format!("origin `{}` is not an entering node", self.origin))),
            None => return Err(fail(format!("unknown origin `{}`", self.origin))),
        }
        match station.node(&self.destination) {
            Some(n) if n.kind == NodeKind::Leaving => {}
            Some(_) => {
                return Err(fail(format!("destination `{}` is not a leaving node", self.destination)))
            }
            None => return Err(fail(format!("unknown destination `{}`", self.destination))),
        }
        if self.desired_departure < self.desired_arrival {
            return Err(fail("desired departure precedes desired arrival".into()));
        }
        if self.dwell_min < 0 || self.dwell_min > self.dwell_max {
            return Err(fail(format!("dwell bounds [{}, {}] are empty", self.dwell_min, self.dwell_max)));
        }
        if self.arrival_window.earliest > self.arrival_window.latest {
            return Err(fail("arrival window is empty".into()));
        }
        if self.departure_window.earliest > self.departure_window.latest {
            return Err(fail("departure window is empty".into()));
        }
        if let Some(c) = self.cancellation_cost {
            if !c.is_finite() || c < 0.0 {
                return Err(fail("cancellation cost must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Objective weights: `w1` on travel time, `w2` on arrival/departure shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { w1: 1.0, w2: 1.0 }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<()> {
        let ok = self.w1 >= 0.0 && self.w2 >= 0.0 && (self.w1 > 0.0 || self.w2 > 0.0);
        if ok && self.w1.is_finite() && self.w2.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!(
                "weights must be nonnegative and not both zero, got w1={} w2={}",
                self.w1, self.w2
            )))
        }
    }
}

/// Balanced track use: at most `average_usage + tolerance` trains per siding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceParams {
    /// Overrides the average usage, otherwise `ceil(stopping trains / sidings)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_usage: Option<u32>,
    /// `None` means unbounded, which disables the constraint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<u32>,
}

impl BalanceParams {
    pub fn with_tolerance(tolerance: u32) -> Self {
        Self { average_usage: None, tolerance: Some(tolerance) }
    }

    pub fn average(&self, trains: &[Train], sidings: usize) -> u32 {
        self.average_usage.unwrap_or_else(|| {
            let stopping = trains.iter().filter(|t| t.stops).count();
            if sidings == 0 {
                0
            } else {
                stopping.div_ceil(sidings) as u32
            }
        })
    }

    /// Per-siding assignment cap, or `None` when unconstrained.
    pub fn cap(&self, trains: &[Train], sidings: usize) -> Option<u32> {
        self.tolerance.map(|t| self.average(trains, sidings) + t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_serializes_as_pair() {
        let w = ShiftWindow::new(-60, 120);
        assert_eq!(serde_json::to_string(&w).unwrap(), "[-60,120]");
        let back: ShiftWindow = serde_json::from_str("[-60,120]").unwrap();
        assert_eq!(back, w);
        assert_eq!(w.max_abs(), 120);
        assert!(w.contains(0) && !w.contains(121));
    }

    #[test]
    fn default_cancellation_cost_formula() {
        let t = Train {
            id: "t".into(),
            origin: "a".into(),
            destination: "b".into(),
            desired_arrival: 0,
            desired_departure: 0,
            arrival_window: ShiftWindow::new(-60, 120),
            departure_window: ShiftWindow::new(-30, 90),
            dwell_min: 0,
            dwell_max: 0,
            stops: false,
            cancellation_cost: None,
        };
        let w = Weights { w1: 1.0, w2: 2.0 };
        assert_eq!(t.cancellation_cost(&w, 2400), 2400.0 + 2.0 * 210.0 + 1.0);
    }

    #[test]
    fn balance_cap() {
        let mut t = Train {
            id: "t".into(),
            origin: "a".into(),
            destination: "b".into(),
            desired_arrival: 0,
            desired_departure: 0,
            arrival_window: ShiftWindow::new(0, 0),
            departure_window: ShiftWindow::new(0, 0),
            dwell_min: 0,
            dwell_max: 0,
            stops: true,
            cancellation_cost: None,
        };
        let mut trains = vec![t.clone(); 9];
        t.stops = false;
        trains.push(t);
        assert_eq!(BalanceParams::default().cap(&trains, 4), None);
        assert_eq!(BalanceParams::with_tolerance(2).cap(&trains, 4), Some(5));
        let fixed = BalanceParams { average_usage: Some(1), tolerance: Some(0) };
        assert_eq!(fixed.cap(&trains, 4), Some(1));
    }

    #[test]
    fn weights_validation() {
        assert!(Weights { w1: 0.0, w2: 0.0 }.validate().is_err());
        assert!(Weights { w1: -1.0, w2: 1.0 }.validate().is_err());
        assert!(Weights { w1: 0.0, w2: 1.0 }.validate().is_ok());
    }
}
