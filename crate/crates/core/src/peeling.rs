//! The (w,k+1)-core by peeling light vertices.
//!
//! A vertex is light while its degree is at most `k`. Peeling a light vertex
//! from an edge gives that edge a positive sign on the vertex; an edge whose
//! size falls to `h - w` has all its signs and is dropped. Two modes are
//! provided. The deterministic mode drains a FIFO queue of light vertices.
//! The randomized mode removes one uniformly random light ball per step and
//! can record the ball counts along the way.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypergraph::{
    distinct, verify_orientation, EdgeCountVector, Hypergraph, Orientation, OrientationParams,
    Rational,
};
use crate::random::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeelMode {
    Deterministic,
    Randomized { seed: RngSeed },
}

/// What happened to an original edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeFate {
    /// Survives as core edge `id` with `size` remaining incidences.
    Core { id: usize, size: usize },
    Removed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeelResult {
    /// The core, relabelled to `0..core_vertices.len()`.
    pub core: Hypergraph,
    /// Original id of each core vertex.
    pub core_vertices: Vec<usize>,
    /// Peeled vertices in the order they became light, with the edges that
    /// signed them (one entry per incidence).
    pub elimination: Vec<(usize, Vec<usize>)>,
    pub edge_fate: Vec<EdgeFate>,
    /// Signs granted during peeling, per original edge.
    pub peel_signs: Vec<Vec<usize>>,
    pub original_n: usize,
    pub params: OrientationParams,
}

/// Ball counts at one step of the randomized process.
///
/// Per-size vectors are indexed by `j` for edges of size `h - j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub balls: u64,
    pub light: u64,
    pub light_by_size: Vec<u64>,
    pub heavy_by_size: Vec<u64>,
    pub heavy_vertices: u64,
    /// Heavy vertices of degree exactly `k + 1`.
    pub critical: u64,
}

impl TraceRecord {
    pub fn balls_by_size(&self, j: usize) -> u64 {
        self.light_by_size[j] + self.heavy_by_size[j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessTrace {
    /// Scaling `n` (the original vertex count).
    pub n: usize,
    pub params: OrientationParams,
    pub records: Vec<TraceRecord>,
}

impl ProcessTrace {
    /// Scaled columns `x, z_L, z_B, z_HV, z_A, z_{L,h-j}.., z_{H,h-j}..`.
    pub fn to_csv(&self) -> String {
        let w = self.params.w();
        let h = self.params.h();
        let mut out = String::from("x,z_L,z_B,z_HV,z_A");
        for j in 0..w {
            let _ = write!(out, ",z_L_{}", h - j);
        }
        for j in 0..w {
            let _ = write!(out, ",z_H_{}", h - j);
        }
        out.push('\n');
        let n = self.n as f64;
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                r.step as f64 / n,
                r.light as f64 / n,
                r.balls as f64 / n,
                r.heavy_vertices as f64 / n,
                r.critical as f64 / n
            );
            for x in r.light_by_size.iter().chain(&r.heavy_by_size) {
                let _ = write!(out, ",{}", *x as f64 / n);
            }
            out.push('\n');
        }
        out
    }
}

/// Peels `hg` down to its (w,k+1)-core. A trace is produced only in
/// randomized mode with `trace` set.
pub fn rancore(
    hg: &Hypergraph,
    p: &OrientationParams,
    mode: PeelMode,
    trace: bool,
) -> Result<(PeelResult, Option<ProcessTrace>)> {
    hg.check_sizes(p)?;
    match mode {
        PeelMode::Deterministic => Ok((peel_queue(hg, p), None)),
        PeelMode::Randomized { seed } => {
            let (pr, tr) = peel_balls(hg, p, &mut seed.rng(), trace);
            Ok((pr, tr))
        }
    }
}

fn incidence_lists(hg: &Hypergraph) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); hg.n()];
    for (i, e) in hg.edges().iter().enumerate() {
        for &v in e {
            inc[v].push(i);
        }
    }
    for l in &mut inc {
        l.dedup();
    }
    inc
}

fn peel_queue(hg: &Hypergraph, p: &OrientationParams) -> PeelResult {
    let (k, floor) = (p.k(), p.h() - p.w());
    let n = hg.n();
    let inc = incidence_lists(hg);
    let mut degree = hg.degrees();
    let mut size: Vec<usize> = hg.edges().iter().map(Vec::len).collect();
    let mut alive = vec![true; hg.m()];
    let mut peeled = vec![false; n];
    let mut queued = vec![false; n];
    let mut peel_signs = vec![Vec::new(); hg.m()];
    let mut elimination = Vec::new();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] <= k).collect();
    for &v in &queue {
        queued[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        peeled[v] = true;
        let mut signed = Vec::new();
        for &i in &inc[v] {
            if !alive[i] {
                continue;
            }
            let c = hg.edge(i).iter().filter(|&&u| u == v).count();
            for _ in 0..c {
                peel_signs[i].push(v);
                signed.push(i);
            }
            size[i] -= c;
            degree[v] -= c;
            if size[i] <= floor {
                alive[i] = false;
                for &u in hg.edge(i) {
                    if peeled[u] {
                        continue;
                    }
                    degree[u] -= 1;
                    if degree[u] <= k && !queued[u] {
                        queued[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        elimination.push((v, signed));
    }
    assemble(hg, p, &peeled, &alive, elimination, peel_signs)
}

fn assemble(
    hg: &Hypergraph,
    p: &OrientationParams,
    peeled: &[bool],
    alive: &[bool],
    elimination: Vec<(usize, Vec<usize>)>,
    peel_signs: Vec<Vec<usize>>,
) -> PeelResult {
    let n = hg.n();
    let mut label = vec![usize::MAX; n];
    let mut core_vertices = Vec::new();
    for v in 0..n {
        if !peeled[v] {
            label[v] = core_vertices.len();
            core_vertices.push(v);
        }
    }
    let mut edges = Vec::new();
    let mut edge_fate = Vec::with_capacity(hg.m());
    for (i, e) in hg.edges().iter().enumerate() {
        if alive[i] {
            let x: Vec<usize> = e.iter().filter(|&&v| !peeled[v]).map(|&v| label[v]).collect();
            edge_fate.push(EdgeFate::Core {
                id: edges.len(),
                size: x.len(),
            });
            edges.push(x);
        } else {
            edge_fate.push(EdgeFate::Removed);
        }
    }
    let core = Hypergraph::new(core_vertices.len(), edges).expect("core labels are in range");
    PeelResult {
        core,
        core_vertices,
        elimination,
        edge_fate,
        peel_signs,
        original_n: n,
        params: *p,
    }
}

/// Ball-level state of the randomized process.
struct BallProcess<'a> {
    hg: &'a Hypergraph,
    k: usize,
    floor: usize,
    h: usize,
    offset: Vec<usize>,
    ball_alive: Vec<bool>,
    /// Position in `light` or `usize::MAX`.
    light_pos: Vec<usize>,
    light: Vec<usize>,
    ball_edge: Vec<usize>,
    vertex_balls: Vec<Vec<usize>>,
    degree: Vec<usize>,
    is_light: Vec<bool>,
    size: Vec<usize>,
    edge_light: Vec<usize>,
    alive: Vec<bool>,
    light_by_size: Vec<u64>,
    heavy_by_size: Vec<u64>,
    heavy_vertices: u64,
    critical: u64,
    balls: u64,
    peel_signs: Vec<Vec<usize>>,
    elimination: Vec<(usize, Vec<usize>)>,
    elim_slot: Vec<usize>,
}

impl<'a> BallProcess<'a> {
    fn new(hg: &'a Hypergraph, p: &OrientationParams) -> Self {
        let (h, w, k) = (p.h(), p.w(), p.k());
        let mut offset = Vec::with_capacity(hg.m() + 1);
        let mut ball_edge = Vec::new();
        let mut vertex_balls = vec![Vec::new(); hg.n()];
        offset.push(0);
        for (i, e) in hg.edges().iter().enumerate() {
            for &v in e {
                vertex_balls[v].push(ball_edge.len());
                ball_edge.push(i);
            }
            offset.push(ball_edge.len());
        }
        let total = ball_edge.len();
        let mut s = Self {
            hg,
            k,
            floor: h - w,
            h,
            offset,
            ball_alive: vec![true; total],
            light_pos: vec![usize::MAX; total],
            light: Vec::new(),
            ball_edge,
            vertex_balls,
            degree: hg.degrees(),
            is_light: vec![false; hg.n()],
            size: hg.edges().iter().map(Vec::len).collect(),
            edge_light: vec![0; hg.m()],
            alive: vec![true; hg.m()],
            light_by_size: vec![0; w],
            heavy_by_size: vec![0; w],
            heavy_vertices: 0,
            critical: 0,
            balls: total as u64,
            peel_signs: vec![Vec::new(); hg.m()],
            elimination: Vec::new(),
            elim_slot: vec![usize::MAX; hg.n()],
        };
        for i in 0..hg.m() {
            s.heavy_by_size[h - s.size[i]] += s.size[i] as u64;
        }
        for v in 0..hg.n() {
            if s.degree[v] <= k {
                s.turn_light(v);
            } else {
                s.heavy_vertices += 1;
                if s.degree[v] == k + 1 {
                    s.critical += 1;
                }
            }
        }
        s
    }

    fn turn_light(&mut self, v: usize) {
        self.is_light[v] = true;
        self.elim_slot[v] = self.elimination.len();
        self.elimination.push((v, Vec::new()));
        for idx in 0..self.vertex_balls[v].len() {
            let b = self.vertex_balls[v][idx];
            if !self.ball_alive[b] {
                continue;
            }
            let e = self.ball_edge[b];
            let j = self.h - self.size[e];
            self.heavy_by_size[j] -= 1;
            self.light_by_size[j] += 1;
            self.edge_light[e] += 1;
            self.light_pos[b] = self.light.len();
            self.light.push(b);
        }
    }

    fn drop_light(&mut self, b: usize) {
        let pos = self.light_pos[b];
        let last = *self.light.last().expect("light ball present");
        self.light.swap_remove(pos);
        if last != b {
            self.light_pos[last] = pos;
        }
        self.light_pos[b] = usize::MAX;
    }

    fn vertex_of(&self, b: usize) -> usize {
        let e = self.ball_edge[b];
        self.hg.edge(e)[b - self.offset[e]]
    }

    /// Removes one ball from the degree of a heavy vertex.
    fn lower_heavy(&mut self, u: usize) {
        let d = self.degree[u];
        if d == self.k + 1 {
            self.critical -= 1;
        }
        self.degree[u] = d - 1;
        if d - 1 == self.k + 1 {
            self.critical += 1;
        }
        if d - 1 <= self.k {
            self.heavy_vertices -= 1;
            self.turn_light(u);
        }
    }

    fn step(&mut self, b: usize) {
        let e = self.ball_edge[b];
        let v = self.vertex_of(b);
        let j_old = self.h - self.size[e];
        self.drop_light(b);
        self.ball_alive[b] = false;
        self.balls -= 1;
        self.degree[v] -= 1;
        self.light_by_size[j_old] -= 1;
        self.edge_light[e] -= 1;
        self.peel_signs[e].push(v);
        let slot = self.elim_slot[v];
        self.elimination[slot].1.push(e);
        let old = self.size[e];
        self.size[e] = old - 1;
        let heavy_in = (old - 1 - self.edge_light[e]) as u64;
        let light_in = self.edge_light[e] as u64;
        self.light_by_size[j_old] -= light_in;
        self.heavy_by_size[j_old] -= heavy_in;
        if self.size[e] > self.floor {
            let j_new = j_old + 1;
            self.light_by_size[j_new] += light_in;
            self.heavy_by_size[j_new] += heavy_in;
            return;
        }
        self.alive[e] = false;
        self.edge_light[e] = 0;
        let rest: Vec<usize> = (self.offset[e]..self.offset[e + 1])
            .filter(|&c| self.ball_alive[c])
            .collect();
        for &c in &rest {
            self.ball_alive[c] = false;
            self.balls -= 1;
            if self.light_pos[c] != usize::MAX {
                self.drop_light(c);
            }
        }
        for &c in &rest {
            let u = self.vertex_of(c);
            if self.is_light[u] {
                self.degree[u] -= 1;
            } else {
                self.lower_heavy(u);
            }
        }
    }

    fn record(&self, step: u64) -> TraceRecord {
        TraceRecord {
            step,
            balls: self.balls,
            light: self.light_by_size.iter().sum(),
            light_by_size: self.light_by_size.clone(),
            heavy_by_size: self.heavy_by_size.clone(),
            heavy_vertices: self.heavy_vertices,
            critical: self.critical,
        }
    }
}

fn peel_balls<R: Rng + ?Sized>(
    hg: &Hypergraph,
    p: &OrientationParams,
    rng: &mut R,
    trace: bool,
) -> (PeelResult, Option<ProcessTrace>) {
    let mut bp = BallProcess::new(hg, p);
    let every = hg.n().div_ceil(1000).max(1) as u64;
    let mut records = Vec::new();
    let mut t = 0u64;
    if trace {
        records.push(bp.record(0));
    }
    while !bp.light.is_empty() {
        let b = bp.light[rng.gen_range(0..bp.light.len())];
        bp.step(b);
        t += 1;
        if trace && (t.is_multiple_of(every) || bp.light.is_empty()) {
            records.push(bp.record(t));
        }
    }
    let peeled = bp.is_light.clone();
    let alive = bp.alive.clone();
    let pr = assemble(hg, p, &peeled, &alive, bp.elimination, bp.peel_signs);
    let tr = trace.then(|| ProcessTrace {
        n: hg.n(),
        params: *p,
        records,
    });
    (pr, tr)
}

/// Combines the peel signs with an orientation of the core into an
/// orientation of the original hypergraph.
pub fn extend_orientation(
    pr: &PeelResult,
    core_orientation: &Orientation,
    p: &OrientationParams,
) -> Result<Orientation> {
    if !verify_orientation(&pr.core, core_orientation, p)?.is_valid() {
        return invalid("core orientation is not a valid orientation of the core");
    }
    let mut signs = pr.peel_signs.clone();
    for (i, fate) in pr.edge_fate.iter().enumerate() {
        if let EdgeFate::Core { id, .. } = *fate {
            signs[i].extend(core_orientation.signs()[id].iter().map(|&v| pr.core_vertices[v]));
        }
        if distinct(&signs[i]).len() != signs[i].len() {
            let mut s = signs[i].clone();
            s.sort_unstable();
            let vertex = s.windows(2).find(|x| x[0] == x[1]).map_or(0, |x| x[0]);
            return Err(Error::RepeatedPeelSign { edge: i, vertex });
        }
    }
    Orientation::from_signs(pr.original_n, signs)
}

/// Size, edge counts, w-density and mean degree of a core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreStatistics {
    pub n: usize,
    pub counts: EdgeCountVector,
    pub kappa: Rational,
    pub mean_degree: f64,
    pub empty: bool,
}

pub fn core_statistics(pr: &PeelResult) -> CoreStatistics {
    let p = &pr.params;
    let counts = pr.core.edge_counts(p).expect("core edges have valid sizes");
    let n = pr.core.n();
    if n == 0 {
        return CoreStatistics {
            n,
            counts,
            kappa: Rational::from_integer(0),
            mean_degree: 0.0,
            empty: true,
        };
    }
    let kappa = Rational::new(counts.sign_demand(p.w()) as i64, n as i64);
    CoreStatistics {
        n,
        mean_degree: counts.degree_sum() as f64 / n as f64,
        counts,
        kappa,
        empty: false,
    }
}
