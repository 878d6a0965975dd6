//! Orientability through bipartite max-flow.
//!
//! The network has a source, one node per edge, one node per vertex and a
//! sink. Edge node `u` receives `w - j` units from the source when `u` has
//! size `h - j`, sends one unit to each distinct incident vertex, and every
//! vertex forwards at most `k` units to the sink. An orientation exists iff
//! the max flow saturates the source arcs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypergraph::{
    distinct, w_density, w_induced_subgraph, Hypergraph, Orientation, OrientationParams, Rational,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub cap: u64,
}

/// Node layout: source `0`, edge nodes `1..=m`, vertex nodes
/// `m+1..=m+n`, sink `m+n+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowNetwork {
    pub m: usize,
    pub n: usize,
    pub arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn node_count(&self) -> usize {
        self.m + self.n + 2
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.m + self.n + 1
    }

    pub fn edge_node(&self, i: usize) -> usize {
        1 + i
    }

    pub fn vertex_node(&self, v: usize) -> usize {
        1 + self.m + v
    }

    /// Total capacity leaving the source.
    pub fn source_capacity(&self) -> u64 {
        self.arcs.iter().filter(|a| a.from == 0).map(|a| a.cap).sum()
    }

    pub fn sink_capacity(&self) -> u64 {
        let t = self.sink();
        self.arcs.iter().filter(|a| a.to == t).map(|a| a.cap).sum()
    }
}

pub fn build_network(hg: &Hypergraph, p: &OrientationParams) -> Result<FlowNetwork> {
    hg.check_sizes(p)?;
    let (m, n) = (hg.m(), hg.n());
    let mut arcs = Vec::new();
    for (i, e) in hg.edges().iter().enumerate() {
        let d = p.demand(e.len()).expect("sizes checked");
        arcs.push(Arc {
            from: 0,
            to: 1 + i,
            cap: d as u64,
        });
    }
    for (i, e) in hg.edges().iter().enumerate() {
        for v in distinct(e) {
            arcs.push(Arc {
                from: 1 + i,
                to: 1 + m + v,
                cap: 1,
            });
        }
    }
    for v in 0..n {
        arcs.push(Arc {
            from: 1 + m + v,
            to: m + n + 1,
            cap: p.k() as u64,
        });
    }
    Ok(FlowNetwork { m, n, arcs })
}

/// Integral max flow with per-arc flows and the residual reachability of
/// every node from the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: u64,
    pub flow: Vec<u64>,
    pub reachable: Vec<bool>,
}

struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
    level: Vec<i64>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(net: &FlowNetwork) -> Self {
        let nodes = net.node_count();
        let mut d = Self {
            head: vec![Vec::new(); nodes],
            to: Vec::with_capacity(2 * net.arcs.len()),
            cap: Vec::with_capacity(2 * net.arcs.len()),
            level: vec![-1; nodes],
            iter: vec![0; nodes],
        };
        for a in &net.arcs {
            d.head[a.from].push(d.to.len());
            d.to.push(a.to);
            d.cap.push(a.cap);
            d.head[a.to].push(d.to.len());
            d.to.push(a.from);
            d.cap.push(0);
        }
        d
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &self.head[u] {
                let v = self.to[id];
                if self.cap[id] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
    }

    // iterative blocking-flow search along the level graph
    fn augment(&mut self, s: usize, t: usize) -> u64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let f = path.iter().map(|&id| self.cap[id]).min().unwrap_or(0);
                for &id in &path {
                    self.cap[id] -= f;
                    self.cap[id ^ 1] += f;
                }
                return f;
            }
            let mut advanced = false;
            while self.iter[u] < self.head[u].len() {
                let id = self.head[u][self.iter[u]];
                let v = self.to[id];
                if self.cap[id] > 0 && self.level[v] == self.level[u] + 1 {
                    path.push(id);
                    u = v;
                    advanced = true;
                    break;
                }
                self.iter[u] += 1;
            }
            if !advanced {
                if u == s {
                    return 0;
                }
                // dead end: retreat and skip the arc that led here
                self.level[u] = -1;
                let id = path.pop().expect("non-source node has an entry arc");
                u = self.to[id ^ 1];
                self.iter[u] += 1;
            }
        }
    }

    fn run(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.augment(s, t);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }
}

pub fn max_flow(net: &FlowNetwork) -> MaxFlow {
    let mut d = Dinic::new(net);
    let value = d.run(net.source(), net.sink());
    d.bfs(net.source());
    let flow = net
        .arcs
        .iter()
        .enumerate()
        .map(|(i, a)| a.cap - d.cap[2 * i])
        .collect();
    MaxFlow {
        value,
        flow,
        reachable: d.level.iter().map(|&l| l >= 0).collect(),
    }
}

/// Vertex set whose w-induced subgraph is too dense to orient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutWitness {
    pub subset: Vec<usize>,
    /// Signs demanded inside the subset divided by its size:
    /// `sum_u max(0, (w - j_u) - |u \ S|) / |S|` over distinct vertices.
    pub kappa: Rational,
}

impl CutWitness {
    /// w-density of the w-induced subgraph on the subset. Equals `kappa`
    /// when no edge repeats a vertex.
    pub fn induced_density(&self, hg: &Hypergraph, p: &OrientationParams) -> Result<Rational> {
        w_density(&w_induced_subgraph(hg, &self.subset, p)?, p)
    }

    pub fn to_text(&self) -> String {
        let vs: Vec<String> = self.subset.iter().map(ToString::to_string).collect();
        format!("{}\nkappa {}\n", vs.join(" "), self.kappa)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrientOutcome {
    Orientable(Orientation),
    Dense(CutWitness),
    /// An edge with fewer distinct vertices than signs it needs.
    DegenerateEdge { edge: usize, distinct: usize, required: usize },
}

impl OrientOutcome {
    pub fn is_orientable(&self) -> bool {
        matches!(self, OrientOutcome::Orientable(_))
    }

    pub fn orientation(&self) -> Option<&Orientation> {
        match self {
            OrientOutcome::Orientable(o) => Some(o),
            _ => None,
        }
    }
}

/// Signs demanded inside `s` (given as a membership mask).
pub(crate) fn cut_demand(hg: &Hypergraph, mask: &[bool], p: &OrientationParams) -> u64 {
    hg.edges()
        .iter()
        .map(|e| {
            let d = p.demand(e.len()).unwrap_or(0);
            let outside = distinct(e).iter().filter(|&&v| !mask[v]).count();
            d.saturating_sub(outside) as u64
        })
        .sum()
}

pub fn orient(hg: &Hypergraph, p: &OrientationParams) -> Result<OrientOutcome> {
    hg.check_sizes(p)?;
    for (i, e) in hg.edges().iter().enumerate() {
        let required = p.demand(e.len()).expect("sizes checked");
        let d = distinct(e).len();
        if d < required {
            return Ok(OrientOutcome::DegenerateEdge {
                edge: i,
                distinct: d,
                required,
            });
        }
    }
    let net = build_network(hg, p)?;
    let mf = max_flow(&net);
    if mf.value == net.source_capacity() {
        let mut signs = vec![Vec::new(); hg.m()];
        for (a, &f) in net.arcs.iter().zip(&mf.flow) {
            if f > 0 && a.from != 0 && a.to != net.sink() {
                signs[a.from - 1].push(a.to - 1 - net.m);
            }
        }
        return Ok(OrientOutcome::Orientable(Orientation::from_signs(hg.n(), signs)?));
    }
    let mask: Vec<bool> = (0..hg.n()).map(|v| mf.reachable[net.vertex_node(v)]).collect();
    let subset: Vec<usize> = (0..hg.n()).filter(|&v| mask[v]).collect();
    let demand = cut_demand(hg, &mask, p);
    debug_assert!(demand > (p.k() * subset.len()) as u64);
    Ok(OrientOutcome::Dense(CutWitness {
        kappa: Rational::new(demand as i64, subset.len() as i64),
        subset,
    }))
}

/// Smallest `k` admitting a (w,k)-orientation, with such an orientation.
/// Edge sizes must lie in `[h - w + 1, h]`.
pub fn min_max_indegree(hg: &Hypergraph, h: usize, w: usize) -> Result<(usize, Orientation)> {
    let p1 = OrientationParams::new(h, w, 1)?;
    hg.check_sizes(&p1)?;
    for (i, e) in hg.edges().iter().enumerate() {
        let required = p1.demand(e.len()).expect("sizes checked");
        let d = distinct(e).len();
        if d < required {
            return Err(Error::DegenerateEdge {
                edge: i,
                distinct: d,
                required,
            });
        }
    }
    if hg.m() == 0 {
        return Ok((0, Orientation::from_signs(hg.n(), Vec::new())?));
    }
    let demand = hg.edge_counts(&p1)?.sign_demand(w) as usize;
    let mut lo = demand.div_ceil(hg.n()).max(1);
    let mut hi = hg.max_degree().max(lo);
    let mut best = match orient(hg, &p1.with_k(hi)?)? {
        OrientOutcome::Orientable(o) => o,
        _ => return invalid("no orientation at the maximum degree"),
    };
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match orient(hg, &p1.with_k(mid)?)? {
            OrientOutcome::Orientable(o) => {
                hi = mid;
                best = o;
            }
            _ => lo = mid + 1,
        }
    }
    Ok((hi, best))
}

/// Exhaustive check that every nonempty `S` has `kappa(H_S) <= k`, with
/// the w-induced subgraph taken under multiset semantics.
pub fn hakimi_check(hg: &Hypergraph, p: &OrientationParams, cap: usize) -> Result<bool> {
    let n = hg.n();
    if n > cap || n >= 64 {
        return Err(Error::TooLarge { n, cap });
    }
    hg.check_sizes(p)?;
    let (h, w, k) = (p.h(), p.w(), p.k() as u64);
    let floor = h - w;
    for s in 1u64..(1u64 << n) {
        let size = s.count_ones() as u64;
        let mut demand = 0u64;
        for e in hg.edges() {
            let inside = e.iter().filter(|&&v| s >> v & 1 == 1).count();
            if inside > floor {
                demand += (inside - floor) as u64;
            }
        }
        if demand > k * size {
            return Ok(false);
        }
    }
    Ok(true)
}
