//! Feasibility checking and an exact solver for small instances.
//!
//! The exact solver enumerates each train's candidate paths by depth-first
//! search over its network (independently of the label-setting DP) and runs a
//! branch-and-bound over trains with exclusive resource claims.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{ArcKind, MicroResource, ResourceId, SpaceTimeNetwork, TrainNetwork};
use crate::solution::{path_cost, validate_path, Solution, TrainPath};
use crate::timetable::Weights;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceViolation {
    #[serde(skip)]
    pub resource: MicroResource,
    pub kind: String,
    pub space: String,
    pub micro_period: u32,
    pub trains: Vec<String>,
    pub total: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceViolation {
    pub siding: String,
    pub count: u32,
    pub cap: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<ResourceViolation>,
    pub balance_violations: Vec<BalanceViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty() && self.balance_violations.is_empty()
    }
}

/// Reports every resource used more than once and, when `cap` is given, every
/// siding with more than `cap` assigned trains. Paths must be valid walks.
pub fn check_feasibility(net: &SpaceTimeNetwork, solution: &Solution, cap: Option<u32>) -> Result<FeasibilityReport> {
    if solution.paths.len() != net.train_count() {
        return Err(Error::SolutionFile(format!(
            "solution has {} paths for {} trains",
            solution.paths.len(),
            net.train_count()
        )));
    }
    for (f, p) in solution.paths.iter().enumerate() {
        validate_path(net, f, p)?;
    }
    let occ = net.occupancy(solution);
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); occ.len()];
    for (f, p) in solution.paths.iter().enumerate() {
        for r in net.occupied_resources(f, p) {
            if occ[r.0 as usize] > 1 {
                holders[r.0 as usize].push(f);
            }
        }
    }
    let mut report = FeasibilityReport::default();
    for (r, &total) in occ.iter().enumerate() {
        if total <= 1 {
            continue;
        }
        let res = net.resources.resource(ResourceId(r as u32));
        let mut trains = holders[r].clone();
        trains.dedup();
        let (kind, space) = match res.kind {
            crate::network::ResourceKind::SwitchGroup => ("sg", net.index.sg_ids[res.space as usize].clone()),
            crate::network::ResourceKind::Siding => (
                "siding",
                net.index.node_ids[net.index.siding_nodes[res.space as usize] as usize].clone(),
            ),
        };
        report.violations.push(ResourceViolation {
            resource: res,
            kind: kind.into(),
            space,
            micro_period: res.time,
            trains: trains.iter().map(|&f| net.trains[f].id.clone()).collect(),
            total,
        });
    }
    if let Some(cap) = cap {
        for (s, &count) in net.siding_assignments(solution).iter().enumerate() {
            if count > cap {
                report.balance_violations.push(BalanceViolation {
                    siding: net.index.node_ids[net.index.siding_nodes[s] as usize].clone(),
                    count,
                    cap,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    /// Search-tree nodes before refusing.
    pub max_nodes: u64,
    /// Candidate paths per train before refusing.
    pub max_candidates: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self { max_nodes: 10_000_000, max_candidates: 200_000 }
    }
}

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub optimum: f64,
    pub solution: Solution,
    pub nodes: u64,
}

#[derive(Debug, Clone)]
struct Candidate {
    cost: f64,
    path: TrainPath,
    resources: Vec<u32>,
    siding: Option<u32>,
}

/// All dwell-feasible source-to-sink paths of one train, by plain DFS.
pub fn enumerate_paths(tn: &TrainNetwork, limit: usize) -> Option<Vec<Vec<u32>>> {
    fn dfs(
        tn: &TrainNetwork,
        v: u32,
        dwell: u32,
        stack: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
        limit: usize,
    ) -> bool {
        if v == tn.sink {
            out.push(stack.clone());
            return out.len() <= limit;
        }
        for &g in tn.out_arcs(v) {
            let a = &tn.arcs[g as usize];
            let next = match a.kind {
                ArcKind::SidingWait if dwell + 1 > tn.dwell_max => continue,
                ArcKind::SidingWait => dwell + 1,
                ArcKind::Departure if tn.siding_vertex[v as usize] && dwell < tn.dwell_min => continue,
                _ => 0,
            };
            stack.push(g);
            let ok = dfs(tn, a.to, next, stack, out, limit);
            stack.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut out = Vec::new();
    dfs(tn, tn.source, 0, &mut Vec::new(), &mut out, limit).then_some(out)
}

fn candidates(net: &SpaceTimeNetwork, f: usize, weights: &Weights, limits: &ExactLimits) -> Result<Vec<Candidate>> {
    let tn = &net.blocks[f];
    let paths = enumerate_paths(tn, limits.max_candidates).ok_or_else(|| {
        Error::EnumerationCap(format!(
            "train `{}` has more than {} candidate paths",
            net.trains[f].id, limits.max_candidates
        ))
    })?;
    let mut out = Vec::with_capacity(paths.len() + 1);
    for arcs in paths {
        let path = TrainPath::Scheduled(arcs);
        let mut resources: Vec<u32> = net.occupied_resources(f, &path).iter().map(|r| r.0).collect();
        resources.sort_unstable();
        if resources.windows(2).any(|w| w[0] == w[1]) {
            // Overlaps itself, so it can never be part of a feasible plan.
            continue;
        }
        let siding = path.arcs().iter().find_map(|&g| net.arrival_siding(f, g));
        out.push(Candidate { cost: path_cost(net, f, &path, weights), path, resources, siding });
    }
    out.push(Candidate {
        cost: net.cancellation_cost(f, weights),
        path: TrainPath::Cancelled,
        resources: Vec::new(),
        siding: None,
    });
    out.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    Ok(out)
}

struct Search<'a> {
    cands: &'a [Vec<Candidate>],
    order: Vec<usize>,
    cap: Option<u32>,
    used: Vec<bool>,
    assigned: Vec<u32>,
    choice: Vec<usize>,
    best: f64,
    best_choice: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
}

impl Search<'_> {
    fn compatible(&self, c: &Candidate) -> bool {
        if let (Some(cap), Some(s)) = (self.cap, c.siding) {
            if self.assigned[s as usize] >= cap {
                return false;
            }
        }
        c.resources.iter().all(|&r| !self.used[r as usize])
    }

    fn cheapest(&self, f: usize) -> f64 {
        self.cands[f].iter().find(|c| self.compatible(c)).map_or(f64::INFINITY, |c| c.cost)
    }

    fn go(&mut self, depth: usize, cost: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::EnumerationCap(format!("search exceeded {} nodes", self.max_nodes)));
        }
        if depth == self.order.len() {
            if cost < self.best {
                self.best = cost;
                self.best_choice = self.choice.clone();
            }
            return Ok(());
        }
        let rest: f64 = self.order[depth + 1..].iter().map(|&f| self.cheapest(f)).sum();
        let f = self.order[depth];
        for i in 0..self.cands[f].len() {
            let c = &self.cands[f][i];
            if cost + c.cost + rest >= self.best - 1e-9 {
                break;
            }
            if !self.compatible(c) {
                continue;
            }
            for &r in &c.resources {
                self.used[r as usize] = true;
            }
            if let Some(s) = c.siding {
                self.assigned[s as usize] += 1;
            }
            self.choice[f] = i;
            let res = self.go(depth + 1, cost + c.cost);
            let c = &self.cands[f][i];
            for &r in &c.resources {
                self.used[r as usize] = false;
            }
            if let Some(s) = c.siding {
                self.assigned[s as usize] -= 1;
            }
            res?;
        }
        Ok(())
    }
}

/// Exact minimum of the objective subject to all capacity constraints (and the
/// balance cap if given).
pub fn solve_exact(
    net: &SpaceTimeNetwork,
    weights: &Weights,
    cap: Option<u32>,
    limits: &ExactLimits,
) -> Result<ExactSolution> {
    let n = net.train_count();
    let cands = (0..n).map(|f| candidates(net, f, weights, limits)).collect::<Result<Vec<_>>>()?;
    // Most constrained trains first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&f| (cands[f].len(), f));
    let cancel_choice: Vec<usize> = cands.iter().map(|c| c.iter().position(|x| x.path.is_cancelled()).unwrap()).collect();
    let all_cancelled: f64 = (0..n).map(|f| cands[f][cancel_choice[f]].cost).sum();
    let mut s = Search {
        cands: &cands,
        order,
        cap,
        used: vec![false; net.resources.len()],
        assigned: vec![0; net.index.sidings()],
        choice: vec![0; n],
        best: all_cancelled + 1e-6,
        best_choice: cancel_choice.clone(),
        nodes: 0,
        max_nodes: limits.max_nodes,
    };
    s.go(0, 0.0)?;
    let best_choice = s.best_choice;
    let solution = Solution { paths: (0..n).map(|f| cands[f][best_choice[f]].path.clone()).collect() };
    let optimum = (0..n).map(|f| cands[f][best_choice[f]].cost).sum();
    Ok(ExactSolution { optimum, solution, nodes: s.nodes })
}
