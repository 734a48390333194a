//! Two-level Lagrangian relaxation.
//!
//! Capacity constraints on microscopic resources (and, optionally, the
//! per-siding balance cap) are dualized. Multipliers are folded into the costs
//! of macroscopic arcs, so each train block is a shortest-path problem on its
//! own network. A priority-rule heuristic turns relaxed solutions into
//! feasible upper bounds.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::heuristic;
use crate::network::{ArcKind, ResourceId, ResourceKind, SpaceTimeNetwork};
use crate::solution::{objective_value, Solution, TrainPath};
use crate::timetable::{BalanceParams, Weights};
use crate::train_dp::{solve_block, BlockSolution};

/// α(m) = 1/(m+1), frozen at 1/(m_alpha+1) from iteration `m_alpha` on.
pub fn step_size(m: usize, m_alpha: usize) -> f64 {
    1.0 / (m.min(m_alpha) as f64 + 1.0)
}

/// (UB* − LB*) / UB*.
pub fn gap(ub: f64, lb: f64) -> f64 {
    (ub - lb) / ub
}

/// Occupation counts of one relaxed solution.
#[derive(Debug, Clone)]
pub struct Occupancy {
    pub counts: Vec<u32>,
    /// Resources with a nonzero count, ascending.
    pub occupied: Vec<u32>,
    /// Trains assigned to each siding.
    pub sidings: Vec<u32>,
}

impl Occupancy {
    pub fn of(net: &SpaceTimeNetwork, solution: &Solution) -> Self {
        let counts = net.occupancy(solution);
        let occupied = counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i as u32).collect();
        Self { counts, occupied, sidings: net.siding_assignments(solution) }
    }

    pub fn violated(&self) -> usize {
        self.occupied.iter().filter(|&&r| self.counts[r as usize] > 1).count()
    }
}

/// Lagrange multipliers. Capacity multipliers are kept densely for cost
/// evaluation; `members` lists the resources with a strictly positive value.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierPool {
    lambda: Vec<f64>,
    in_pool: Vec<bool>,
    members: Vec<u32>,
    /// Balance multipliers, one per siding.
    pub balance: Vec<f64>,
}

impl MultiplierPool {
    pub fn new(net: &SpaceTimeNetwork) -> Self {
        let n = net.resources.len();
        Self {
            lambda: vec![0.0; n],
            in_pool: vec![false; n],
            members: Vec::new(),
            balance: vec![0.0; net.index.sidings()],
        }
    }

    pub fn get(&self, r: ResourceId) -> f64 {
        self.lambda[r.0 as usize]
    }

    pub fn set(&mut self, r: ResourceId, value: f64) {
        assert!(value >= 0.0, "multipliers are nonnegative");
        let i = r.0 as usize;
        self.lambda[i] = value;
        if value > 0.0 && !self.in_pool[i] {
            self.in_pool[i] = true;
            self.members.push(r.0);
        } else if value == 0.0 && self.in_pool[i] {
            self.in_pool[i] = false;
            self.members.retain(|&m| m != r.0);
        }
    }

    pub fn dense(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.members.is_empty() && self.balance.iter().all(|&l| l == 0.0)
    }

    /// Pool entries in ascending resource order.
    pub fn entries(&self) -> Vec<(ResourceId, f64)> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m.into_iter().map(|r| (ResourceId(r), self.lambda[r as usize])).collect()
    }

    /// Σ λ over all capacity multipliers.
    pub fn sum(&self) -> f64 {
        self.lambda.iter().sum()
    }
}

/// Arrival and departure arcs whose switch-group resources have ever carried a
/// positive multiplier. Arcs outside the pool have a zero switch-group term.
#[derive(Debug, Clone)]
pub struct RouteArcPool {
    member: Vec<Vec<bool>>,
    /// Per train: `(route, start period, arc)` sorted.
    by_route: Vec<Vec<(u32, u32, u32)>>,
    /// Per switch group: `(route, position of the group in the route)`.
    routes_of_sg: Vec<Vec<(u32, usize)>>,
    size: usize,
}

impl RouteArcPool {
    pub fn new(net: &SpaceTimeNetwork) -> Self {
        let member = net.blocks.iter().map(|b| vec![false; b.arcs.len()]).collect();
        let by_route = net
            .blocks
            .iter()
            .map(|b| {
                let mut v: Vec<(u32, u32, u32)> = b
                    .arcs
                    .iter()
                    .enumerate()
                    .filter_map(|(g, a)| a.route.map(|r| (r, a.start, g as u32)))
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        let mut routes_of_sg = vec![Vec::new(); net.index.sg_ids.len()];
        for (r, route) in net.index.routes.iter().enumerate() {
            for (k, &(sg, _)) in route.sgs.iter().enumerate() {
                routes_of_sg[sg as usize].push((r as u32, k));
            }
        }
        Self { member, by_route, routes_of_sg, size: 0 }
    }

    pub fn contains(&self, train: usize, arc: u32) -> bool {
        self.member[train][arc as usize]
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Adds every arc linked to switch-group resource `r`.
    pub fn admit(&mut self, net: &SpaceTimeNetwork, r: ResourceId) {
        let res = net.resources.resource(r);
        if res.kind != ResourceKind::SwitchGroup {
            return;
        }
        let grid = &net.grid;
        let gm = grid.macro_granularity;
        let lo_s = res.time as i64 * grid.micro_granularity;
        let hi_s = lo_s + grid.micro_granularity;
        for &(route, k) in &self.routes_of_sg[res.space as usize] {
            let rt = &net.index.routes[route as usize];
            let span = net.index.effective_offset(rt, k) + net.index.sg_headway;
            // Starts whose interval [start, start + span) meets [lo_s, hi_s).
            let first = ((lo_s - span).div_euclid(gm) + 1).max(0) as u32;
            let last = (hi_s - 1).div_euclid(gm).max(0) as u32;
            for (f, list) in self.by_route.iter().enumerate() {
                let from = list.partition_point(|&(ro, s, _)| (ro, s) < (route, first));
                for &(ro, s, g) in &list[from..] {
                    if ro != route || s > last {
                        break;
                    }
                    if !self.member[f][g as usize] && net.blocks[f].sg_links(g).contains(&r) {
                        self.member[f][g as usize] = true;
                        self.size += 1;
                    }
                }
            }
        }
    }
}

/// Arc costs of one train with multipliers folded in. Without a route pool
/// every switch-group link is scanned.
pub fn train_costs(
    net: &SpaceTimeNetwork,
    train: usize,
    raw: &[f64],
    pool: &MultiplierPool,
    route_pool: Option<&RouteArcPool>,
    out: &mut Vec<f64>,
) {
    let b = &net.blocks[train];
    let lambda = pool.dense();
    out.clear();
    out.extend_from_slice(raw);
    for g in 0..b.arcs.len() as u32 {
        let kind = b.arcs[g as usize].kind;
        if matches!(kind, ArcKind::Source | ArcKind::Sink | ArcKind::VirtualPath) {
            continue;
        }
        let mut c = out[g as usize];
        if route_pool.is_none_or(|p| p.contains(train, g)) {
            for r in b.sg_links(g) {
                c += lambda[r.0 as usize];
            }
        }
        for r in b.siding_links(g) {
            c += lambda[r.0 as usize];
        }
        if let Some(s) = net.arrival_siding(train, g) {
            c += pool.balance[s as usize];
        }
        out[g as usize] = c;
    }
}

pub fn aggregated_costs(
    net: &SpaceTimeNetwork,
    raw: &[Vec<f64>],
    pool: &MultiplierPool,
    route_pool: Option<&RouteArcPool>,
) -> Vec<Vec<f64>> {
    (0..net.train_count())
        .into_par_iter()
        .map(|f| {
            let mut out = Vec::new();
            train_costs(net, f, &raw[f], pool, route_pool, &mut out);
            out
        })
        .collect()
}

/// Σ_f Z_f − Σ λ − Σ λ_i · cap.
pub fn lower_bound(block_costs: &[f64], pool: &MultiplierPool, cap: Option<u32>) -> f64 {
    let z: f64 = block_costs.iter().sum();
    let bal: f64 = match cap {
        Some(c) => pool.balance.iter().sum::<f64>() * c as f64,
        None => 0.0,
    };
    z - pool.sum() - bal
}

/// Lagrangian value of an arbitrary solution, evaluated from its occupations.
pub fn lagrangian_value(
    net: &SpaceTimeNetwork,
    solution: &Solution,
    weights: &Weights,
    pool: &MultiplierPool,
    cap: Option<u32>,
) -> f64 {
    let occ = Occupancy::of(net, solution);
    let mut z = objective_value(net, solution, weights);
    for (r, &l) in pool.dense().iter().enumerate() {
        z += l * (occ.counts[r] as f64 - 1.0);
    }
    if let Some(c) = cap {
        for (i, &l) in pool.balance.iter().enumerate() {
            z += l * (occ.sidings[i] as f64 - c as f64);
        }
    }
    z
}

fn balance_update(pool: &mut MultiplierPool, occ: &Occupancy, alpha: f64, cap: Option<u32>) {
    if let Some(c) = cap {
        for (l, &n) in pool.balance.iter_mut().zip(&occ.sidings) {
            *l = f64::max(0.0, *l + alpha * (n as f64 - c as f64));
        }
    }
}

/// Projected subgradient step over every resource.
pub fn subgradient_update(pool: &mut MultiplierPool, occ: &Occupancy, alpha: f64, cap: Option<u32>) {
    for (r, l) in pool.lambda.iter_mut().enumerate() {
        *l = f64::max(0.0, *l + alpha * (occ.counts[r] as f64 - 1.0));
    }
    pool.members.clear();
    for (r, &l) in pool.lambda.iter().enumerate() {
        pool.in_pool[r] = l > 0.0;
        if l > 0.0 {
            pool.members.push(r as u32);
        }
    }
    balance_update(pool, occ, alpha, cap);
}

/// The same step restricted to pooled, occupied and violated resources.
/// Returns the switch-group resources that entered the pool.
pub fn dynamic_pool_update(
    pool: &mut MultiplierPool,
    occ: &Occupancy,
    alpha: f64,
    cap: Option<u32>,
    route_pool: Option<(&mut RouteArcPool, &SpaceTimeNetwork)>,
) -> Vec<ResourceId> {
    let mut kept = Vec::with_capacity(pool.members.len());
    for &r in &pool.members {
        let i = r as usize;
        let c = occ.counts[i];
        if c > 0 {
            pool.lambda[i] += alpha * (c as f64 - 1.0);
            kept.push(r);
        } else {
            let v = f64::max(0.0, pool.lambda[i] + alpha * (c as f64 - 1.0));
            pool.lambda[i] = v;
            if v > 0.0 {
                kept.push(r);
            } else {
                pool.in_pool[i] = false;
            }
        }
    }
    let mut entered = Vec::new();
    for &r in &occ.occupied {
        let i = r as usize;
        let c = occ.counts[i];
        if c > 1 && !pool.in_pool[i] {
            pool.lambda[i] += alpha * (c as f64 - 1.0);
            pool.in_pool[i] = true;
            kept.push(r);
            entered.push(ResourceId(r));
        }
    }
    pool.members = kept;
    balance_update(pool, occ, alpha, cap);
    if let Some((rp, net)) = route_pool {
        for &r in &entered {
            if net.resources.is_switch_group(r) {
                rp.admit(net, r);
            }
        }
    }
    entered
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UbPolicy {
    /// Heuristic after every iteration.
    #[default]
    Iterative,
    /// Heuristic once, after the last iteration.
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolStrategy {
    #[default]
    Dynamic,
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrParams {
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
    pub gap_tolerance: f64,
    pub m_alpha: usize,
    pub seed: u64,
    pub ub_policy: UbPolicy,
    pub pool_strategy: PoolStrategy,
    pub balance: BalanceParams,
    /// Stop when UB* − LB* < 1. `None` decides from the instance data.
    pub integer_valued: Option<bool>,
}

impl Default for LrParams {
    fn default() -> Self {
        Self {
            max_iterations: 1500,
            time_limit: None,
            gap_tolerance: 1e-4,
            m_alpha: 20,
            seed: 0,
            ub_policy: UbPolicy::Iterative,
            pool_strategy: PoolStrategy::Dynamic,
            balance: BalanceParams::default(),
            integer_valued: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The relaxed solution was feasible with all multipliers zero.
    RelaxationFeasible,
    Gap,
    IntegralGap,
    MaxIterations,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub m: usize,
    pub lb: f64,
    /// UB of this iteration, if one was computed.
    pub ub: Option<f64>,
    pub lb_best: f64,
    pub ub_best: f64,
    pub alpha: f64,
    pub pool_size: usize,
    pub violated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRecord {
    pub ub_best: f64,
    pub lb_best: f64,
    pub iterations: Vec<IterationRecord>,
    pub termination: Option<Termination>,
    pub elapsed: Duration,
}

impl BoundsRecord {
    pub fn gap(&self) -> f64 {
        gap(self.ub_best, self.lb_best)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> crate::error::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "lb_m", "ub_m", "lb_best", "ub_best", "alpha", "pool_size", "violated"])?;
        for r in &self.iterations {
            w.write_record([
                r.m.to_string(),
                r.lb.to_string(),
                r.ub.map(|u| u.to_string()).unwrap_or_default(),
                r.lb_best.to_string(),
                r.ub_best.to_string(),
                r.alpha.to_string(),
                r.pool_size.to_string(),
                r.violated.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LrOutcome {
    /// Best feasible solution found, if any.
    pub solution: Option<Solution>,
    pub bounds: BoundsRecord,
}

/// Result of one iteration.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub record: IterationRecord,
    pub relaxed: Solution,
    /// Feasible solution produced this iteration, with its objective.
    pub upper: Option<(Solution, f64)>,
    pub done: Option<Termination>,
}

/// Iterative driver; [`run`] loops it to termination.
pub struct LagrangianSolver<'a> {
    net: &'a SpaceTimeNetwork,
    params: LrParams,
    raw: Vec<Vec<f64>>,
    pool: MultiplierPool,
    route_pool: Option<RouteArcPool>,
    cap: Option<u32>,
    integer_valued: bool,
    m: usize,
    ub_rng: ChaCha8Rng,
    best: Option<Solution>,
    last_relaxed: Option<Solution>,
    bounds: BoundsRecord,
    start: Instant,
}

impl<'a> LagrangianSolver<'a> {
    pub fn new(net: &'a SpaceTimeNetwork, weights: &Weights, params: LrParams) -> Self {
        let raw = net.raw_costs(weights);
        let cap = params.balance.cap(&net.trains, net.index.sidings());
        let integer_valued = params.integer_valued.unwrap_or_else(|| {
            let int = |x: f64| x.fract() == 0.0;
            int(weights.w1)
                && int(weights.w2)
                && (0..net.train_count()).all(|f| int(net.cancellation_cost(f, weights)))
        });
        let route_pool = match params.pool_strategy {
            PoolStrategy::Dynamic => Some(RouteArcPool::new(net)),
            PoolStrategy::Dense => None,
        };
        let ub_rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x9e37_79b9_7f4a_7c15);
        Self {
            net,
            raw,
            pool: MultiplierPool::new(net),
            route_pool,
            cap,
            integer_valued,
            m: 0,
            ub_rng,
            best: None,
            last_relaxed: None,
            bounds: BoundsRecord {
                ub_best: f64::INFINITY,
                lb_best: f64::NEG_INFINITY,
                iterations: Vec::new(),
                termination: None,
                elapsed: Duration::ZERO,
            },
            start: Instant::now(),
            params,
        }
    }

    pub fn pool(&self) -> &MultiplierPool {
        &self.pool
    }

    pub fn route_pool(&self) -> Option<&RouteArcPool> {
        self.route_pool.as_ref()
    }

    pub fn bounds(&self) -> &BoundsRecord {
        &self.bounds
    }

    pub fn raw_costs(&self) -> &[Vec<f64>] {
        &self.raw
    }

    pub fn balance_cap(&self) -> Option<u32> {
        self.cap
    }

    fn block_rng(&self, f: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        rng.set_stream(((self.m as u64) << 32) | f as u64);
        rng
    }

    /// Solves every train block under the current multipliers.
    pub fn relax(&self) -> Vec<BlockSolution> {
        let net = self.net;
        (0..net.train_count())
            .into_par_iter()
            .map(|f| {
                let mut costs = Vec::new();
                train_costs(net, f, &self.raw[f], &self.pool, self.route_pool.as_ref(), &mut costs);
                let mut rng = self.block_rng(f);
                solve_block(&net.blocks[f], &costs, &mut rng)
            })
            .collect()
    }

    fn offer(&mut self, solution: &Solution, value: f64) {
        if value < self.bounds.ub_best {
            self.bounds.ub_best = value;
            self.best = Some(solution.clone());
        }
    }

    fn is_feasible(&self, occ: &Occupancy) -> bool {
        occ.violated() == 0 && self.cap.is_none_or(|c| occ.sidings.iter().all(|&n| n <= c))
    }

    pub fn iterate(&mut self) -> IterationOutcome {
        let net = self.net;
        let alpha = step_size(self.m, self.params.m_alpha);
        let blocks = self.relax();
        let block_costs: Vec<f64> = blocks.iter().map(|b| b.cost).collect();
        let lb = lower_bound(&block_costs, &self.pool, self.cap);
        let relaxed = Solution { paths: blocks.into_iter().map(|b| b.path).collect() };
        let occ = Occupancy::of(net, &relaxed);
        let violated = occ.violated();
        let feasible = self.is_feasible(&occ);
        let lambda_zero = self.pool.is_zero();

        let mut upper = None;
        let mut done = None;
        if feasible {
            let value = objective_value_raw(net, &self.raw, &relaxed);
            self.offer(&relaxed, value);
            upper = Some((relaxed.clone(), value));
            if lambda_zero {
                done = Some(Termination::RelaxationFeasible);
            }
        }
        if self.params.ub_policy == UbPolicy::Iterative && done.is_none() {
            let sol = heuristic::upper_bound(net, &self.raw, &relaxed, self.cap, &mut self.ub_rng);
            let value = objective_value_raw(net, &self.raw, &sol);
            self.offer(&sol, value);
            if upper.as_ref().is_none_or(|(_, v)| value < *v) {
                upper = Some((sol, value));
            }
        }

        if done == Some(Termination::RelaxationFeasible) {
            self.bounds.lb_best = self.bounds.ub_best;
        } else {
            self.bounds.lb_best = self.bounds.lb_best.max(lb);
        }
        let record = IterationRecord {
            m: self.m,
            lb,
            ub: upper.as_ref().map(|u| u.1),
            lb_best: self.bounds.lb_best,
            ub_best: self.bounds.ub_best,
            alpha,
            pool_size: self.pool.len(),
            violated,
        };
        self.bounds.iterations.push(record);

        if done.is_none() {
            let (ub, lbb) = (self.bounds.ub_best, self.bounds.lb_best);
            done = if ub.is_finite() && gap(ub, lbb) <= self.params.gap_tolerance {
                Some(Termination::Gap)
            } else if self.integer_valued && ub - lbb < 1.0 {
                Some(Termination::IntegralGap)
            } else if self.m + 1 >= self.params.max_iterations {
                Some(Termination::MaxIterations)
            } else if self.params.time_limit.is_some_and(|t| self.start.elapsed() >= t) {
                Some(Termination::TimeLimit)
            } else {
                None
            };
        }
        if done.is_none() {
            match self.params.pool_strategy {
                PoolStrategy::Dense => subgradient_update(&mut self.pool, &occ, alpha, self.cap),
                PoolStrategy::Dynamic => {
                    dynamic_pool_update(&mut self.pool, &occ, alpha, self.cap, self.route_pool.as_mut().map(|p| (p, net)));
                }
            }
        }
        self.m += 1;
        self.last_relaxed = Some(relaxed.clone());
        if done.is_some() {
            self.bounds.termination = done;
        }
        self.bounds.elapsed = self.start.elapsed();
        IterationOutcome { record, relaxed, upper, done }
    }

    /// Runs the final upper-bounding step if the policy asks for it and
    /// returns the outcome.
    pub fn finish(mut self) -> LrOutcome {
        if self.params.ub_policy == UbPolicy::Final
            && self.bounds.termination != Some(Termination::RelaxationFeasible)
        {
            if let Some(relaxed) = self.last_relaxed.take() {
                let sol = heuristic::upper_bound(self.net, &self.raw, &relaxed, self.cap, &mut self.ub_rng);
                let value = objective_value_raw(self.net, &self.raw, &sol);
                self.offer(&sol, value);
            }
        }
        self.bounds.elapsed = self.start.elapsed();
        LrOutcome { solution: self.best, bounds: self.bounds }
    }

    pub fn run(mut self) -> LrOutcome {
        if self.params.time_limit.is_some_and(|t| t.is_zero()) {
            self.bounds.termination = Some(Termination::TimeLimit);
            return self.finish();
        }
        loop {
            if self.iterate().done.is_some() {
                break;
            }
        }
        self.finish()
    }
}

fn objective_value_raw(net: &SpaceTimeNetwork, raw: &[Vec<f64>], solution: &Solution) -> f64 {
    solution
        .paths
        .iter()
        .enumerate()
        .map(|(f, p)| match p {
            TrainPath::Cancelled => raw[f][net.blocks[f].virtual_arc as usize],
            TrainPath::Scheduled(arcs) => arcs.iter().map(|&g| raw[f][g as usize]).sum(),
        })
        .sum()
}

/// Runs the relaxation to termination.
pub fn run(net: &SpaceTimeNetwork, weights: &Weights, params: LrParams) -> LrOutcome {
    LagrangianSolver::new(net, weights, params).run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_size_schedule() {
        assert_eq!(step_size(0, 20), 1.0);
        assert_eq!(step_size(3, 10), 0.25);
        assert_eq!(step_size(50, 10), 1.0 / 11.0);
        assert_eq!(step_size(10, 10), 1.0 / 11.0);
    }

    #[test]
    fn gap_formula() {
        let g = gap(201720.0, 197951.0);
        assert!((g * 100.0 - 1.87).abs() < 0.005, "{g}");
    }
}
