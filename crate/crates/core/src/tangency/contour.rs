//! Zero contours of a smooth function on the doubly periodic chart
//! `[0, 2π)²` by marching squares.
//!
//! Edge crossings are located by bisection on the function itself rather
//! than by linear interpolation, so every vertex lies on the zero set to
//! working precision. Saddle cells are resolved by matching the chord
//! directions to the local level-set tangents; two zero curves crossing
//! inside a cell are therefore traced straight through each other.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

const BISECTION_STEPS: usize = 60;

/// Offset of grid vertices in cell units; keeps the symmetric curves of the
/// analytic cases off the vertices.
const GRID_OFFSET: f64 = 0.5;

/// A contour in chart coordinates, wrapped into `[0, 2π)²`.
pub(crate) type ChartLoop = Vec<(f64, f64)>;

pub(crate) struct Grid {
    pub n_u: usize,
    pub n_v: usize,
}

impl Grid {
    pub fn du(&self) -> f64 {
        TAU / self.n_u as f64
    }

    pub fn dv(&self) -> f64 {
        TAU / self.n_v as f64
    }

    fn u(&self, i: f64) -> f64 {
        (i + GRID_OFFSET) * self.du()
    }

    fn v(&self, j: f64) -> f64 {
        (j + GRID_OFFSET) * self.dv()
    }

    /// Samples `f` at every vertex, row-major in `j`.
    pub fn sample<F>(&self, f: &F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync + ?Sized,
    {
        (0..self.n_u * self.n_v)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % self.n_u, k / self.n_u);
                f(self.u(i as f64), self.v(j as f64))
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Edge {
    /// Between vertices `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between vertices `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

/// Closed zero contours of `f` given its vertex samples.
pub(crate) fn trace<F>(grid: &Grid, values: &[f64], f: &F) -> Vec<ChartLoop>
where
    F: Fn(f64, f64) -> f64 + Sync + ?Sized,
{
    let (n_u, n_v) = (grid.n_u, grid.n_v);
    let val = |i: usize, j: usize| values[(j % n_v) * n_u + (i % n_u)];
    let positive = |i: usize, j: usize| val(i, j) > 0.0;

    let mut points: HashMap<Edge, (f64, f64)> = HashMap::new();
    let mut crossing = |edge: Edge| -> (f64, f64) {
        *points.entry(edge).or_insert_with(|| locate(grid, edge, f))
    };

    let mut adjacency: HashMap<Edge, Vec<Edge>> = HashMap::new();
    for j in 0..n_v {
        for i in 0..n_u {
            let corners = [
                positive(i, j),
                positive(i + 1, j),
                positive(i + 1, j + 1),
                positive(i, j + 1),
            ];
            // bottom, right, top, left
            let edges = [
                Edge::H(i, j),
                Edge::V((i + 1) % n_u, j),
                Edge::H(i, (j + 1) % n_v),
                Edge::V(i, j),
            ];
            let cut: Vec<usize> = (0..4)
                .filter(|&k| corners[k] != corners[(k + 1) % 4])
                .collect();
            let pairs: Vec<(usize, usize)> = match cut.len() {
                2 => vec![(cut[0], cut[1])],
                4 => {
                    let local: Vec<(f64, f64)> = (0..4)
                        .map(|k| to_cell(grid, i, j, crossing(edges[k])))
                        .collect();
                    resolve_saddle(&local, f)
                }
                _ => Vec::new(),
            };
            for (a, b) in pairs {
                crossing(edges[a]);
                crossing(edges[b]);
                adjacency.entry(edges[a]).or_default().push(edges[b]);
                adjacency.entry(edges[b]).or_default().push(edges[a]);
            }
        }
    }

    let mut keys: Vec<Edge> = adjacency.keys().copied().collect();
    keys.sort_by_key(|e| match *e {
        Edge::H(i, j) => (j, i, 0),
        Edge::V(i, j) => (j, i, 1),
    });
    let mut visited: HashMap<Edge, bool> = HashMap::new();
    let mut loops = Vec::new();
    for start in keys {
        if visited.contains_key(&start) {
            continue;
        }
        let mut path = vec![start];
        visited.insert(start, true);
        let mut prev = start;
        let mut cur = match adjacency[&start].first() {
            Some(&next) => next,
            None => continue,
        };
        while cur != start {
            if visited.contains_key(&cur) {
                break;
            }
            visited.insert(cur, true);
            path.push(cur);
            let nexts = &adjacency[&cur];
            let next = nexts
                .iter()
                .copied()
                .find(|&e| e != prev)
                .unwrap_or(nexts[0]);
            prev = cur;
            cur = next;
        }
        loops.push(path.iter().map(|e| wrap(points[e])).collect());
    }
    loops
}

fn wrap((u, v): (f64, f64)) -> (f64, f64) {
    (u.rem_euclid(TAU), v.rem_euclid(TAU))
}

/// Chart coordinates of the crossing on `edge`, unwrapped to the edge's
/// own vertex coordinates.
fn locate<F: Fn(f64, f64) -> f64 + ?Sized>(grid: &Grid, edge: Edge, f: &F) -> (f64, f64) {
    let (a, b) = match edge {
        Edge::H(i, j) => (
            (grid.u(i as f64), grid.v(j as f64)),
            (grid.u(i as f64 + 1.0), grid.v(j as f64)),
        ),
        Edge::V(i, j) => (
            (grid.u(i as f64), grid.v(j as f64)),
            (grid.u(i as f64), grid.v(j as f64 + 1.0)),
        ),
    };
    let at = |s: f64| (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
    let (mut lo, mut hi) = (0.0, 1.0);
    let lo_positive = {
        let p = at(lo);
        f(p.0, p.1) > 0.0
    };
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let p = at(mid);
        if (f(p.0, p.1) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Moves a wrapped crossing point next to cell `(i, j)`.
fn to_cell(grid: &Grid, i: usize, j: usize, (u, v): (f64, f64)) -> (f64, f64) {
    let (cu, cv) = (grid.u(i as f64 + 0.5), grid.v(j as f64 + 0.5));
    let near = |x: f64, c: f64| x - TAU * ((x - c) / TAU).round();
    (near(u, cu), near(v, cv))
}

/// Chooses how the four crossings of a saddle cell pair up. Edge indices are
/// bottom, right, top, left.
fn resolve_saddle<F: Fn(f64, f64) -> f64 + ?Sized>(pts: &[(f64, f64)], f: &F) -> Vec<(usize, usize)> {
    let tangent = |(u, v): (f64, f64)| {
        let h = 1e-6;
        let gu = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
        let gv = (f(u, v + h) - f(u, v - h)) / (2.0 * h);
        let n = gu.hypot(gv);
        if n == 0.0 {
            (0.0, 0.0)
        } else {
            (-gv / n, gu / n)
        }
    };
    let tangents: Vec<(f64, f64)> = pts.iter().map(|&p| tangent(p)).collect();
    let misalignment = |a: usize, b: usize| {
        let (du, dv) = (pts[b].0 - pts[a].0, pts[b].1 - pts[a].1);
        let len = du.hypot(dv);
        if len == 0.0 {
            return 0.0;
        }
        let c = (du / len, dv / len);
        [a, b]
            .iter()
            .map(|&k| 1.0 - (tangents[k].0 * c.0 + tangents[k].1 * c.1).abs())
            .sum::<f64>()
    };
    let options = [
        vec![(0, 3), (1, 2)],
        vec![(0, 1), (2, 3)],
        vec![(0, 2), (1, 3)],
    ];
    options
        .into_iter()
        .min_by(|x, y| {
            let cx: f64 = x.iter().map(|&(a, b)| misalignment(a, b)).sum();
            let cy: f64 = y.iter().map(|&(a, b)| misalignment(a, b)).sum();
            cx.total_cmp(&cy)
        })
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<F: Fn(f64, f64) -> f64 + Sync>(n: usize, f: F) -> Vec<ChartLoop> {
        let grid = Grid { n_u: n, n_v: n };
        let values = grid.sample(&f);
        trace(&grid, &values, &f)
    }

    #[test]
    fn single_horizontal_line_wraps_into_one_loop() {
        let loops = run(32, |_, v: f64| v.sin() - 0.3);
        assert_eq!(loops.len(), 2);
        for l in &loops {
            assert_eq!(l.len(), 32);
            for &(_, v) in l {
                assert!((v.sin() - 0.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn crossing_lines_are_traced_straight() {
        // cos u · sin v: two vertical and two horizontal loops crossing.
        let loops = run(64, |u: f64, v: f64| u.cos() * v.sin());
        assert_eq!(loops.len(), 4);
        for l in &loops {
            let vertical = l.iter().all(|&(u, _)| (u.cos()).abs() < 1e-9);
            let horizontal = l.iter().all(|&(_, v)| (v.sin()).abs() < 1e-9);
            assert!(vertical ^ horizontal);
        }
    }

    #[test]
    fn closed_blob_is_one_loop() {
        let loops = run(48, |u: f64, v: f64| (u - 3.0).powi(2) + (v - 2.0).powi(2) - 1.0);
        assert_eq!(loops.len(), 1);
    }

    #[test]
    fn sign_definite_field_has_no_contours() {
        assert!(run(16, |u: f64, v: f64| 2.0 + u.sin() * v.cos()).is_empty());
    }
}
