//! Marching squares for the zero level set of a sampled scalar field.
//!
//! Nodes are classified by `v >= 0`. Crossings are linearly interpolated on
//! cell edges, ambiguous saddle cells are resolved by the sign of the cell
//! average, and segments sharing an edge crossing are chained into polylines.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelKind {
    ReZero,
    ImZero,
}

impl fmt::Display for LevelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevelKind::ReZero => "re_zero",
            LevelKind::ImZero => "im_zero",
        })
    }
}

/// One connected piece of a zero level set, as `(x, y)` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    pub id: usize,
    pub kind: LevelKind,
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

/// Node-sampled field: `values[i * ys.len() + j]` sits at `(xs[i], ys[j])`.
pub(crate) struct Field<'a> {
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub values: &'a [f64],
}

/// A cell edge: `X(i, j)` joins nodes `(i, j)`–`(i+1, j)`, `Y(i, j)` joins
/// `(i, j)`–`(i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Edge {
    X(usize, usize),
    Y(usize, usize),
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Segment {
    pub cell: (usize, usize),
    pub ends: [Edge; 2],
}

impl<'a> Field<'a> {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }

    fn inside(&self, i: usize, j: usize) -> bool {
        self.at(i, j) >= 0.0
    }

    fn nodes(edge: Edge) -> ((usize, usize), (usize, usize)) {
        match edge {
            Edge::X(i, j) => ((i, j), (i + 1, j)),
            Edge::Y(i, j) => ((i, j), (i, j + 1)),
        }
    }

    /// Interpolated zero on an edge whose end nodes are classified differently.
    pub fn crossing(&self, edge: Edge) -> [f64; 2] {
        let ((i0, j0), (i1, j1)) = Self::nodes(edge);
        let (v0, v1) = (self.at(i0, j0), self.at(i1, j1));
        let t = v0 / (v0 - v1);
        [
            self.xs[i0] + t * (self.xs[i1] - self.xs[i0]),
            self.ys[j0] + t * (self.ys[j1] - self.ys[j0]),
        ]
    }

    /// Zero-level segments inside cell `(i, j)`.
    pub fn cell_segments(&self, i: usize, j: usize, out: &mut Vec<Segment>) {
        // Corners counter-clockwise from (i, j); edge k joins corner k and k+1.
        let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        let edges = [Edge::X(i, j), Edge::Y(i + 1, j), Edge::X(i, j + 1), Edge::Y(i, j)];
        let b: [bool; 4] = corners.map(|(a, c)| self.inside(a, c));
        let cut: Vec<usize> = (0..4).filter(|&k| b[k] != b[(k + 1) % 4]).collect();
        let mut push = |p: usize, q: usize| {
            out.push(Segment {
                cell: (i, j),
                ends: [edges[p], edges[q]],
            })
        };
        match cut.len() {
            2 => push(cut[0], cut[1]),
            4 => {
                let mean: f64 = corners.iter().map(|&(a, c)| self.at(a, c)).sum::<f64>() / 4.0;
                if (mean >= 0.0) == b[0] {
                    // Corners 0 and 2 connect through the centre; isolate 1 and 3.
                    push(0, 1);
                    push(2, 3);
                } else {
                    push(3, 0);
                    push(1, 2);
                }
            }
            _ => {}
        }
    }

    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for i in 0..self.xs.len() - 1 {
            for j in 0..self.ys.len() - 1 {
                self.cell_segments(i, j, &mut out);
            }
        }
        out
    }
}

/// Chains segments into polylines. Open chains are traced from their loose
/// ends first, in segment order; whatever is left forms closed loops.
pub(crate) fn chain(field: &Field<'_>, segments: &[Segment], kind: LevelKind, first_id: usize) -> Vec<LevelCurve> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, s) in segments.iter().enumerate() {
        for e in s.ends {
            by_edge.entry(e).or_default().push(k);
        }
    }
    let degree = |e: &Edge| by_edge.get(e).map_or(0, Vec::len);
    let mut used = vec![false; segments.len()];
    let mut curves = Vec::new();

    let trace = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| -> LevelCurve {
        let mut points = vec![field.crossing(start_edge)];
        let (mut seg, mut edge) = (start_seg, start_edge);
        loop {
            used[seg] = true;
            let ends = segments[seg].ends;
            edge = if ends[0] == edge { ends[1] } else { ends[0] };
            points.push(field.crossing(edge));
            let next = by_edge[&edge].iter().copied().find(|&k| !used[k]);
            match next {
                Some(k) => seg = k,
                None => break,
            }
        }
        let closed = edge == start_edge && points.len() > 2;
        LevelCurve {
            id: 0,
            kind,
            points,
            closed,
        }
    };

    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        if let Some(&loose) = segments[k].ends.iter().find(|e| degree(e) == 1) {
            curves.push(trace(k, loose, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            curves.push(trace(k, segments[k].ends[0], &mut used));
        }
    }
    for (n, c) in curves.iter_mut().enumerate() {
        c.id = first_id + n;
    }
    curves
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, f: impl Fn(f64, f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let axis: Vec<f64> = (0..n).map(|i| -1.5 + 3.0 * i as f64 / (n - 1) as f64).collect();
        let mut values = Vec::with_capacity(n * n);
        for &x in &axis {
            for &y in &axis {
                values.push(f(x, y));
            }
        }
        (axis, values)
    }

    #[test]
    fn circle_is_one_closed_loop() {
        let (axis, values) = sample(41, |x, y| x * x + y * y - 1.0);
        let field = Field { xs: &axis, ys: &axis, values: &values };
        let curves = chain(&field, &field.segments(), LevelKind::ReZero, 7);
        assert_eq!(curves.len(), 1);
        let c = &curves[0];
        assert!(c.closed);
        assert_eq!(c.id, 7);
        assert_eq!(c.points.first(), c.points.last());
        for p in &c.points {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn line_is_one_open_chain() {
        let (axis, values) = sample(20, |x, y| x - 0.3 * y - 0.1);
        let field = Field { xs: &axis, ys: &axis, values: &values };
        let curves = chain(&field, &field.segments(), LevelKind::ImZero, 0);
        assert_eq!(curves.len(), 1);
        assert!(!curves[0].closed);
        for p in &curves[0].points {
            assert!((p[0] - 0.3 * p[1] - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_zero_edge_row_is_a_curve() {
        // Zero along y = ys[0], negative above: the level set is the edge itself.
        let (axis, values) = sample(12, |_, y| if y == -1.5 { 0.0 } else { -(y + 1.5) });
        let field = Field { xs: &axis, ys: &axis, values: &values };
        let curves = chain(&field, &field.segments(), LevelKind::ImZero, 0);
        assert_eq!(curves.len(), 1);
        assert_eq!(curves[0].points.len(), 12);
        assert!(curves[0].points.iter().all(|p| p[1] == -1.5));
    }

    #[test]
    fn saddle_follows_the_cell_average() {
        let xs = [0.0, 1.0];
        // Corners (0,0)=+, (1,0)=-, (1,1)=+, (0,1)=-, mean positive.
        let values = [1.0, -0.5, -0.5, 1.0];
        let field = Field { xs: &xs, ys: &xs, values: &values };
        let segs = field.segments();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].ends, [Edge::X(0, 0), Edge::Y(1, 0)]);
        // Same sign pattern, negative mean: corners 0 and 2 are cut off.
        let values = [0.5, -1.0, -1.0, 0.5];
        let field = Field { xs: &xs, ys: &xs, values: &values };
        assert_eq!(field.segments()[0].ends, [Edge::Y(0, 0), Edge::X(0, 0)]);
    }

    #[test]
    fn crossings_are_shared_between_neighbours() {
        let (axis, values) = sample(9, |x, y| (x * 3.0).sin() + y);
        let field = Field { xs: &axis, ys: &axis, values: &values };
        let curves = chain(&field, &field.segments(), LevelKind::ReZero, 0);
        let total: usize = curves.iter().map(|c| c.points.len() - 1).sum();
        assert_eq!(total, field.segments().len());
    }
}
