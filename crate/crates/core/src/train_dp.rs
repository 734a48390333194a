//! Shortest path for a single train under arc costs, with dwell bounds.
//!
//! Label setting over the train's time-ordered DAG. A label carries the dwell
//! periods accumulated at the current siding so the dwell window can be
//! enforced exactly. Arcs with an infinite cost are treated as absent.

use rand::Rng;

use crate::network::{ArcKind, TrainNetwork};
use crate::solution::TrainPath;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Label {
    cost: f64,
    dwell: u32,
    arc: u32,
    pred: u32,
    ties: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    pub path: TrainPath,
    pub cost: f64,
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Whether a label `(cost_a, dwell_a)` makes `(cost_b, dwell_b)` redundant at a
/// vertex. At siding vertices the dwell state matters: both labels must be able
/// to reach the same futures.
pub fn dominates(cost_a: f64, dwell_a: u32, cost_b: f64, dwell_b: u32, siding: bool, dwell_min: u32) -> bool {
    if cost_a > cost_b && !approx_eq(cost_a, cost_b) {
        return false;
    }
    !siding || dwell_a == dwell_b || (dwell_min <= dwell_a && dwell_a <= dwell_b)
}

/// Minimum-cost path of one train. `costs` is indexed by arc id and includes the
/// virtual arc. Ties between cheapest physical labels are broken at random; the
/// virtual path is chosen only when strictly cheaper or when no physical path
/// exists.
pub fn solve_block<R: Rng + ?Sized>(tn: &TrainNetwork, costs: &[f64], rng: &mut R) -> BlockSolution {
    debug_assert_eq!(costs.len(), tn.arcs.len());
    let n = tn.vertices.len();
    let mut arena: Vec<Label> = Vec::with_capacity(n * 2);
    let mut at: Vec<Vec<u32>> = vec![Vec::new(); n];
    arena.push(Label { cost: 0.0, dwell: 0, arc: NONE, pred: NONE, ties: 1 });
    at[tn.source as usize].push(0);

    for v in 0..n as u32 {
        if v == tn.sink {
            continue;
        }
        let labels = std::mem::take(&mut at[v as usize]);
        for &li in &labels {
            let l = arena[li as usize];
            for &g in tn.out_arcs(v) {
                let c = costs[g as usize];
                if !c.is_finite() {
                    continue;
                }
                let arc = &tn.arcs[g as usize];
                let dwell = match arc.kind {
                    ArcKind::SidingWait => {
                        if l.dwell + 1 > tn.dwell_max {
                            continue;
                        }
                        l.dwell + 1
                    }
                    ArcKind::Departure => {
                        if tn.siding_vertex[v as usize] && l.dwell < tn.dwell_min {
                            continue;
                        }
                        0
                    }
                    _ => 0,
                };
                let cand = Label { cost: l.cost + c, dwell, arc: g, pred: li, ties: 1 };
                insert(&mut arena, &mut at[arc.to as usize], cand, tn.siding_vertex[arc.to as usize], tn.dwell_min, rng);
            }
        }
        at[v as usize] = labels;
    }

    let virtual_cost = costs[tn.virtual_arc as usize];
    let sink = &at[tn.sink as usize];
    let best = sink.iter().map(|&i| arena[i as usize].cost).fold(f64::INFINITY, f64::min);
    if !best.is_finite() || virtual_cost < best && !approx_eq(virtual_cost, best) {
        return BlockSolution { path: TrainPath::Cancelled, cost: virtual_cost };
    }
    let ties: Vec<u32> = sink.iter().copied().filter(|&i| approx_eq(arena[i as usize].cost, best)).collect();
    let mut li = ties[rng.gen_range(0..ties.len())];
    let cost = arena[li as usize].cost;
    let mut arcs = Vec::new();
    while arena[li as usize].arc != NONE {
        arcs.push(arena[li as usize].arc);
        li = arena[li as usize].pred;
    }
    arcs.reverse();
    BlockSolution { path: TrainPath::Scheduled(arcs), cost }
}

fn insert<R: Rng + ?Sized>(
    arena: &mut Vec<Label>,
    list: &mut Vec<u32>,
    cand: Label,
    siding: bool,
    dwell_min: u32,
    rng: &mut R,
) {
    if siding {
        return insert_siding(arena, list, cand, dwell_min, rng);
    }
    // Off sidings every label has the same state, so at most one survives.
    match list.first() {
        None => {
            list.push(arena.len() as u32);
            arena.push(cand);
        }
        Some(&i) => {
            let e = &mut arena[i as usize];
            if approx_eq(e.cost, cand.cost) {
                keep_one(e, cand, rng);
            } else if cand.cost < e.cost {
                *e = cand;
            }
        }
    }
}

/// Equal labels: keep one of them uniformly at random.
fn keep_one<R: Rng + ?Sized>(e: &mut Label, cand: Label, rng: &mut R) {
    e.ties += 1;
    if rng.gen_range(0..e.ties) == 0 {
        e.arc = cand.arc;
        e.pred = cand.pred;
    }
}

/// Siding lists are kept sorted by dwell. Below `dwell_min` a label competes
/// only with the label of equal dwell; from `dwell_min` on, the list holds a
/// cost/dwell frontier.
fn insert_siding<R: Rng + ?Sized>(
    arena: &mut Vec<Label>,
    list: &mut Vec<u32>,
    cand: Label,
    dwell_min: u32,
    rng: &mut R,
) {
    let pos = list.partition_point(|&i| arena[i as usize].dwell < cand.dwell);
    if cand.dwell < dwell_min {
        match list.get(pos).copied() {
            Some(i) if arena[i as usize].dwell == cand.dwell => {
                let e = &mut arena[i as usize];
                if approx_eq(e.cost, cand.cost) {
                    keep_one(e, cand, rng);
                } else if cand.cost < e.cost {
                    *e = cand;
                }
            }
            _ => {
                list.insert(pos, arena.len() as u32);
                arena.push(cand);
            }
        }
        return;
    }
    let tail = list.partition_point(|&i| arena[i as usize].dwell < dwell_min);
    for &i in &list[tail..] {
        let e = &mut arena[i as usize];
        if e.dwell == cand.dwell && approx_eq(e.cost, cand.cost) {
            keep_one(e, cand, rng);
            return;
        }
        if dominates(e.cost, e.dwell, cand.cost, cand.dwell, true, dwell_min) {
            return;
        }
    }
    let mut k = tail;
    for j in tail..list.len() {
        let e = &arena[list[j] as usize];
        if !dominates(cand.cost, cand.dwell, e.cost, e.dwell, true, dwell_min) {
            list[k] = list[j];
            k += 1;
        }
    }
    list.truncate(k);
    let pos = tail + list[tail..].partition_point(|&i| arena[i as usize].dwell < cand.dwell);
    list.insert(pos, arena.len() as u32);
    arena.push(cand);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_respects_dwell_window() {
        // Outside siding vertices only cost matters.
        assert!(dominates(1.0, 5, 2.0, 0, false, 2));
        // Equal dwell, cheaper.
        assert!(dominates(1.0, 3, 2.0, 3, true, 2));
        // Both may depart, A has more waiting room.
        assert!(dominates(1.0, 2, 2.0, 4, true, 2));
        // A cannot depart yet while B can.
        assert!(!dominates(1.0, 1, 2.0, 4, true, 2));
        // A has less waiting room.
        assert!(!dominates(1.0, 4, 2.0, 2, true, 2));
        assert!(!dominates(3.0, 2, 2.0, 2, true, 2));
    }
}
