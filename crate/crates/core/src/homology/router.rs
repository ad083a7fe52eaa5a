//! Visibility-graph routing in ℂ∖Γ, also avoiding the poles 0 and ±i of the
//! g-differentials.

use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::curve::CurveModel;
use crate::Complex;

use super::{HomologyError, Path};

/// Where a route starts or ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Anchor {
    /// Endpoint of a cut: `end = false` is the start of the arc.
    Branch {
        arc: usize,
        end: bool,
    },
    Free(Complex),
}

#[derive(Clone, Debug)]
pub struct Router {
    arcs: Vec<crate::curve::Arc>,
    obstacles: Vec<Complex>,
    clear: f64,
    far: f64,
    nodes: Vec<Complex>,
    adj: Vec<Vec<(usize, f64)>>,
}

#[derive(PartialEq)]
struct Item(f64, usize);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl Router {
    pub fn new(model: &CurveModel) -> Router {
        let prm = &model.params;
        let mut crit: Vec<f64> = vec![1.0];
        for &x in prm.a().iter().chain(prm.b()) {
            crit.push(x);
            crit.push(1.0 / x);
        }
        crit.sort_by(f64::total_cmp);
        crit.dedup();
        let mut radii = vec![crit[0] * 0.35, crit[0] * 0.7];
        for w in crit.windows(2) {
            radii.push((w[0] * w[1]).sqrt());
        }
        let top = *crit.last().unwrap();
        radii.push(top * 1.4);
        radii.push(top * 2.5);

        let mut angs: Vec<f64> = vec![0.0, FRAC_PI_2, PI, 1.5 * PI];
        for &x in prm.c().iter().chain(prm.d()) {
            angs.extend([x, PI - x, PI + x, 2.0 * PI - x]);
        }
        angs.sort_by(f64::total_cmp);
        angs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut all = angs.clone();
        for k in 0..angs.len() {
            let a = angs[k];
            let b = if k + 1 < angs.len() {
                angs[k + 1]
            } else {
                angs[0] + 2.0 * PI
            };
            all.extend([a + 0.25 * (b - a), a + 0.5 * (b - a), a + 0.75 * (b - a)]);
        }

        let clear = (0.2 * model.min_feature()).min(0.02);
        let mut r = Router {
            arcs: model.arcs.clone(),
            obstacles: vec![Complex::new(0.0, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)],
            clear,
            far: 2.0 * top,
            nodes: Vec::new(),
            adj: Vec::new(),
        };
        let mut nodes = Vec::new();
        for &rad in &radii {
            for &a in &all {
                let z = Complex::from_polar(rad, a);
                if r.clearance(z, None) >= 2.0 * clear {
                    nodes.push(z);
                }
            }
        }
        let n = nodes.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if r.edge_ok(nodes[i], nodes[j], clear, None) {
                    let d = (nodes[i] - nodes[j]).norm();
                    adj[i].push((j, d));
                    adj[j].push((i, d));
                }
            }
        }
        r.nodes = nodes;
        r.adj = adj;
        r
    }

    /// Radius beyond which every target is reached radially.
    pub fn far_radius(&self) -> f64 {
        self.far
    }

    /// Distance from `z` to Γ and to the poles, ignoring the pole `skip`.
    pub fn clearance(&self, z: Complex, skip: Option<Complex>) -> f64 {
        let mut m = f64::INFINITY;
        for a in &self.arcs {
            m = m.min(a.distance(z));
        }
        for &o in &self.obstacles {
            if Some(o) != skip {
                m = m.min((z - o).norm());
            }
        }
        m
    }

    fn edge_ok(&self, a: Complex, b: Complex, need: f64, skip: Option<Complex>) -> bool {
        for arc in &self.arcs {
            let d = arc.segment_distance(a, b);
            if d <= 0.0 || d < need {
                return false;
            }
        }
        for &o in &self.obstacles {
            if Some(o) != skip && crate::curve::point_segment_distance(o, a, b) < need {
                return false;
            }
        }
        true
    }

    /// Point just beyond the endpoint of a cut along its continuation.
    pub fn escape(&self, arc: usize, end: bool) -> Complex {
        let a = &self.arcs[arc];
        let (e, dir) = if end {
            (a.end, a.tangent(1.0))
        } else {
            (a.start, -a.tangent(0.0))
        };
        let mut room = f64::INFINITY;
        for other in &self.arcs {
            if other.index != arc {
                room = room.min(other.distance(e));
            }
        }
        for &o in &self.obstacles {
            room = room.min((e - o).norm());
        }
        let other_end = if end { a.start } else { a.end };
        room = room.min(0.5 * (e - other_end).norm());
        e + dir * (0.3 * room).min(0.25)
    }

    fn resolve(&self, p: Anchor) -> (Option<Complex>, Complex) {
        match p {
            Anchor::Branch { arc, end } => {
                let a = &self.arcs[arc];
                (Some(if end { a.end } else { a.start }), self.escape(arc, end))
            }
            Anchor::Free(z) => (None, z),
        }
    }

    /// Shortest Γ-avoiding polyline between two anchors.
    pub fn route(&self, from: Anchor, to: Anchor) -> Result<Path, HomologyError> {
        let (b0, z0) = self.resolve(from);
        let (b1, z1) = self.resolve(to);
        let skip0 = self.obstacles.iter().copied().find(|&o| o == z0);
        let skip1 = self.obstacles.iter().copied().find(|&o| o == z1);
        let c0 = self.clearance(z0, skip0);
        let c1 = self.clearance(z1, skip1);
        let n = self.nodes.len();
        let s = n;
        let t = n + 1;
        let mut extra: Vec<Vec<(usize, f64)>> = vec![Vec::new(), Vec::new()];
        let mut into_t: Vec<(usize, f64)> = Vec::new();
        let need0 = self.clear.min(0.5 * c0);
        let need1 = self.clear.min(0.5 * c1);
        for (i, &w) in self.nodes.iter().enumerate() {
            if self.edge_ok(z0, w, need0, skip0) {
                extra[0].push((i, (z0 - w).norm()));
            }
            if self.edge_ok(w, z1, need1, skip1) {
                into_t.push((i, (z1 - w).norm()));
            }
        }
        if self.edge_ok(z0, z1, need0.min(need1), skip0.or(skip1)) {
            extra[0].push((t, (z0 - z1).norm()));
        }
        let mut into_t_of = vec![None; n];
        for &(i, d) in &into_t {
            into_t_of[i] = Some(d);
        }
        // Dijkstra on nodes ∪ {s, t}
        let mut dist = vec![f64::INFINITY; n + 2];
        let mut prev = vec![usize::MAX; n + 2];
        dist[s] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, s));
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] || u == t {
                continue;
            }
            let mut relax = |v: usize, w: f64, heap: &mut BinaryHeap<Item>| {
                if d + w < dist[v] {
                    dist[v] = d + w;
                    prev[v] = u;
                    heap.push(Item(dist[v], v));
                }
            };
            if u == s {
                for &(v, w) in &extra[0] {
                    relax(v, w, &mut heap);
                }
            } else {
                for &(v, w) in &self.adj[u] {
                    relax(v, w, &mut heap);
                }
                if let Some(w) = into_t_of[u] {
                    relax(t, w, &mut heap);
                }
            }
        }
        if !dist[t].is_finite() {
            return Err(HomologyError::PathThroughCut { target: z1 });
        }
        let mut pts = vec![z1];
        let mut u = prev[t];
        while u != s {
            pts.push(self.nodes[u]);
            u = prev[u];
        }
        pts.push(z0);
        pts.reverse();
        if let Some(e) = b0 {
            pts.insert(0, e);
        }
        if let Some(e) = b1 {
            pts.push(e);
        }
        Ok(Path {
            points: pts,
            start_at_branch: b0.is_some(),
            end_at_branch: b1.is_some(),
            radial_tail: false,
        })
    }

    /// Route to a far point on the ray through `z`, then radially out to `z`
    /// (or to infinity when `z` is `None`, along the positive real axis).
    pub fn route_far(&self, from: Anchor, z: Option<Complex>) -> Result<Path, HomologyError> {
        let dir = z.map(|z| z / z.norm()).unwrap_or(Complex::new(1.0, 0.0));
        let mid = dir * self.far;
        let mut path = self.route(from, Anchor::Free(mid))?;
        path.points.push(z.unwrap_or(Complex::new(f64::INFINITY, 0.0)));
        path.radial_tail = true;
        Ok(path)
    }
}
