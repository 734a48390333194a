//! Priority-rule upper bounding: trains with fewer conflicts in the relaxed
//! solution are scheduled first, each on its cheapest path among the arcs
//! whose resources are still free.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::network::{ArcKind, SpaceTimeNetwork};
use crate::solution::{Solution, TrainPath};
use crate::train_dp::solve_block;

/// Retries after a train's own arrival and departure overlap on a resource.
const SELF_OVERLAP_RETRIES: usize = 64;

/// For each train, how many other trains share an over-capacity resource with it.
pub fn conflict_counts(net: &SpaceTimeNetwork, solution: &Solution) -> Vec<u32> {
    let n = net.train_count();
    let occ = net.occupancy(solution);
    let mut holders: Vec<Vec<u32>> = Vec::new();
    let mut slot = vec![u32::MAX; occ.len()];
    for (f, p) in solution.paths.iter().enumerate() {
        for r in net.occupied_resources(f, p) {
            let r = r.0 as usize;
            if occ[r] <= 1 {
                continue;
            }
            if slot[r] == u32::MAX {
                slot[r] = holders.len() as u32;
                holders.push(Vec::new());
            }
            let h = &mut holders[slot[r] as usize];
            if h.last() != Some(&(f as u32)) {
                h.push(f as u32);
            }
        }
    }
    let mut conflict = vec![false; n * n];
    for h in &holders {
        for (i, &a) in h.iter().enumerate() {
            for &b in &h[i + 1..] {
                conflict[a as usize * n + b as usize] = true;
                conflict[b as usize * n + a as usize] = true;
            }
        }
    }
    (0..n).map(|f| conflict[f * n..(f + 1) * n].iter().filter(|&&c| c).count() as u32).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrioritizedOrder {
    pub order: Vec<usize>,
    pub conflicts: Vec<u32>,
}

/// Ascending conflict count; ties in random order.
pub fn prioritized_order<R: Rng + ?Sized>(conflicts: Vec<u32>, rng: &mut R) -> PrioritizedOrder {
    let mut order: Vec<usize> = (0..conflicts.len()).collect();
    order.shuffle(rng);
    order.sort_by_key(|&f| conflicts[f]);
    PrioritizedOrder { order, conflicts }
}

/// Schedules trains one by one in `order`. Each train takes its cheapest path
/// under `raw` costs over arcs whose linking sets avoid every resource already
/// claimed; sidings that reached `cap` assignments are closed. Trains left
/// without a path are cancelled.
pub fn schedule_sequentially<R: Rng + ?Sized>(
    net: &SpaceTimeNetwork,
    order: &[usize],
    raw: &[Vec<f64>],
    cap: Option<u32>,
    rng: &mut R,
) -> Solution {
    let mut claimed = vec![false; net.resources.len()];
    let mut assigned = vec![0u32; net.index.sidings()];
    let mut solution = Solution::all_cancelled(net.train_count());
    let mut costs = Vec::new();
    let mut links = Vec::new();
    for &f in order {
        let block = &net.blocks[f];
        costs.clear();
        costs.extend_from_slice(&raw[f]);
        for g in 0..block.arcs.len() as u32 {
            if block.links(g).iter().any(|r| claimed[r.0 as usize]) {
                costs[g as usize] = f64::INFINITY;
            } else if let (Some(cap), Some(s)) = (cap, net.arrival_siding(f, g)) {
                if assigned[s as usize] >= cap {
                    costs[g as usize] = f64::INFINITY;
                }
            }
        }
        let mut path = TrainPath::Cancelled;
        for _ in 0..SELF_OVERLAP_RETRIES {
            let sol = solve_block(block, &costs, rng);
            let TrainPath::Scheduled(arcs) = &sol.path else { break };
            links.clear();
            links.extend(arcs.iter().flat_map(|&g| block.links(g).iter().copied()));
            links.sort_unstable();
            if links.windows(2).all(|w| w[0] != w[1]) {
                path = sol.path;
                break;
            }
            let dep = arcs.iter().copied().find(|&g| block.arcs[g as usize].kind == ArcKind::Departure);
            costs[dep.expect("scheduled path has a departure") as usize] = f64::INFINITY;
        }
        if let TrainPath::Scheduled(arcs) = &path {
            for &g in arcs {
                for r in block.links(g) {
                    claimed[r.0 as usize] = true;
                }
                if let Some(s) = net.arrival_siding(f, g) {
                    assigned[s as usize] += 1;
                }
            }
        }
        solution.paths[f] = path;
    }
    solution
}

/// Upper bound from a relaxed solution: prioritize by its conflicts, then
/// schedule sequentially.
pub fn upper_bound<R: Rng + ?Sized>(
    net: &SpaceTimeNetwork,
    raw: &[Vec<f64>],
    relaxed: &Solution,
    cap: Option<u32>,
    rng: &mut R,
) -> Solution {
    let order = prioritized_order(conflict_counts(net, relaxed), rng);
    schedule_sequentially(net, &order.order, raw, cap, rng)
}

/// Standalone heuristic: relaxed solution with all multipliers at zero, then
/// [`upper_bound`].
pub fn solve_heuristic<R: Rng + ?Sized>(
    net: &SpaceTimeNetwork,
    raw: &[Vec<f64>],
    cap: Option<u32>,
    rng: &mut R,
) -> Solution {
    let relaxed = Solution {
        paths: net.blocks.iter().zip(raw).map(|(b, c)| solve_block(b, c, rng).path).collect(),
    };
    upper_bound(net, raw, &relaxed, cap, rng)
}
