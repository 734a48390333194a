//! SVG occupation chart: one row per siding and per switch group, one
//! rectangle per contiguous run of micro resources held by a train.

use std::fmt::Write as _;

use crate::infrastructure::Seconds;
use crate::network::{ResourceKind, SpaceTimeNetwork};
use crate::solution::{Solution, TrainPath};

const LEFT: f64 = 70.0;
const TOP: f64 = 30.0;
const ROW: f64 = 18.0;
const WIDTH: f64 = 1200.0;
const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Style {
    /// Actually occupied (waiting on a siding, traversing a switch group).
    Occupied,
    /// Siding locked while the inbound route is run.
    Locked,
    /// Siding held for the headway after departure.
    Headway,
}

/// Renders `solution` as a standalone SVG document. Output depends only on the
/// inputs.
pub fn emit_gantt(net: &SpaceTimeNetwork, solution: &Solution) -> String {
    let gm = net.grid.micro_granularity;
    let rows_sidings = net.index.sidings();
    let rows = rows_sidings + net.index.sg_ids.len();
    let row_of = |kind: ResourceKind, space: u32| match kind {
        ResourceKind::Siding => space as usize,
        ResourceKind::SwitchGroup => rows_sidings + space as usize,
    };

    // (row, train, style, micro period)
    let mut cells: Vec<(usize, usize, Style, u32)> = Vec::new();
    for (f, p) in solution.paths.iter().enumerate() {
        let TrainPath::Scheduled(arcs) = p else { continue };
        for &g in arcs {
            let sets = net.linking_sets(f, g);
            let groups = [
                (&sets.phi_sg, Style::Occupied),
                (&sets.phi_ss, Style::Occupied),
                (&sets.phi_st, Style::Locked),
                (&sets.implicit_siding, Style::Headway),
            ];
            for (list, style) in groups {
                for r in list {
                    cells.push((row_of(r.kind, r.space), f, style, r.time));
                }
            }
        }
    }
    cells.sort_unstable();
    cells.dedup();
    let mut runs: Vec<(usize, usize, Style, u32, u32)> = Vec::new();
    for (row, f, style, j) in cells {
        match runs.last_mut() {
            Some(last) if last.0 == row && last.1 == f && last.2 == style && last.4 == j => last.4 = j + 1,
            _ => runs.push((row, f, style, j, j + 1)),
        }
    }

    let (t0, t1) = if runs.is_empty() {
        (0, net.grid.horizon)
    } else {
        let lo = runs.iter().map(|r| r.3).min().unwrap() as Seconds * gm;
        let hi = runs.iter().map(|r| r.4).max().unwrap() as Seconds * gm;
        ((lo - 300).max(0) / 600 * 600, ((hi + 300 + 599) / 600 * 600).min(net.grid.horizon))
    };
    let span = (t1 - t0).max(1) as f64;
    let x = |t: Seconds| LEFT + (t - t0) as f64 * WIDTH / span;
    let height = TOP + rows as f64 * ROW + 30.0;
    let total_w = LEFT + WIDTH + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w:.0}" height="{height:.0}" viewBox="0 0 {total_w:.0} {height:.0}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{total_w:.0}" height="{height:.0}" fill="white"/>"#);
    let names: Vec<String> = (0..rows_sidings)
        .map(|i| net.index.node_ids[net.index.siding_nodes[i] as usize].clone())
        .chain(net.index.sg_ids.iter().cloned())
        .collect();
    for (i, name) in names.iter().enumerate() {
        let y = TOP + i as f64 * ROW;
        let fill = if i % 2 == 0 { "#f4f4f4" } else { "#ffffff" };
        let _ = writeln!(s, r#"<rect x="{LEFT:.1}" y="{y:.1}" width="{WIDTH:.1}" height="{ROW:.1}" fill="{fill}"/>"#);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 13.0, xml(name));
    }
    let step = [60, 120, 300, 600, 900, 1800, 3600, 7200, 14400]
        .into_iter()
        .find(|&st| (t1 - t0) / st <= 20)
        .unwrap_or(14400);
    let axis_y = TOP + rows as f64 * ROW;
    let mut t = (t0 + step - 1) / step * step;
    while t <= t1 {
        let xt = x(t);
        let _ = writeln!(s, r##"<line x1="{xt:.1}" y1="{TOP:.1}" x2="{xt:.1}" y2="{axis_y:.1}" stroke="#cccccc" stroke-width="0.5"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{xt:.1}" y="{:.1}" text-anchor="middle">{:02}:{:02}:{:02}</text>"#,
            axis_y + 14.0,
            t / 3600,
            t / 60 % 60,
            t % 60
        );
        t += step;
    }
    for (row, f, style, j0, j1) in runs {
        let color = PALETTE[f % PALETTE.len()];
        let (x0, x1) = (x(j0 as Seconds * gm), x(j1 as Seconds * gm));
        let y = TOP + row as f64 * ROW + 2.0;
        let h = ROW - 4.0;
        let w = x1 - x0;
        let attrs = match style {
            Style::Occupied => format!(r#"fill="{color}""#),
            Style::Locked => format!(r#"fill="{color}" fill-opacity="0.4""#),
            Style::Headway => format!(r#"fill="none" stroke="{color}" stroke-dasharray="3,2""#),
        };
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{y:.1}" width="{w:.2}" height="{h:.1}" {attrs}><title>{}</title></rect>"#,
            xml(&net.trains[f].id)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
