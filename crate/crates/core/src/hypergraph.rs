//! Multihypergraphs, orientations and the subset statistics used by the
//! orientability criteria.
//!
//! Edges are multisets of vertex ids. Degrees and edge sizes count
//! multiplicity; positive signs are always placed on distinct vertices.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::peeling::{rancore, PeelMode};

/// Exact rational used for densities and cut arithmetic.
pub type Rational = Ratio<i64>;

/// Default vertex-count cap for the exhaustive subset checks.
pub const BRUTE_FORCE_CAP: usize = 20;

/// Arity `h`, signs per full edge `w` and indegree capacity `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientationParams {
    h: usize,
    w: usize,
    k: usize,
}

impl OrientationParams {
    pub fn new(h: usize, w: usize, k: usize) -> Result<Self> {
        if !(h > w && w > 0) {
            return invalid(format!("need h > w > 0, got h = {h}, w = {w}"));
        }
        if k < 1 {
            return invalid("need k >= 1");
        }
        Ok(Self { h, w, k })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same `h` and `w` with a different capacity.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.h, self.w, k)
    }

    /// Smallest admissible edge size, `h - w + 1`.
    pub fn min_edge_size(&self) -> usize {
        self.h - self.w + 1
    }

    /// Signs still owed by an edge of the given size (`w - j` for size `h - j`).
    ///
    /// Returns `None` if the size is outside `[h - w + 1, h]`.
    pub fn demand(&self, size: usize) -> Option<usize> {
        if size < self.min_edge_size() || size > self.h {
            None
        } else {
            Some(self.w - (self.h - size))
        }
    }
}

/// Number of edges of each size `h - j`, `j = 0..w-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCountVector {
    h: usize,
    counts: Vec<u64>,
}

impl EdgeCountVector {
    /// `counts[j]` is the number of edges of size `h - j`.
    pub fn new(h: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() || counts.len() >= h {
            return invalid(format!(
                "edge count vector needs between 1 and h - 1 entries, got {}",
                counts.len()
            ));
        }
        Ok(Self { h, counts })
    }

    pub fn zeros(p: &OrientationParams) -> Self {
        Self {
            h: p.h(),
            counts: vec![0; p.w()],
        }
    }

    /// Only full-size edges.
    pub fn uniform(p: &OrientationParams, m: u64) -> Self {
        let mut v = Self::zeros(p);
        v.counts[0] = m;
        v
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of edges of size `h - j`.
    pub fn get(&self, j: usize) -> u64 {
        self.counts.get(j).copied().unwrap_or(0)
    }

    pub fn size_of(&self, j: usize) -> usize {
        self.h - j
    }

    pub fn total_edges(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Degree sum `D = sum (h - j) m_{h-j}`.
    pub fn degree_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(j, &c)| (self.h - j) as u64 * c)
            .sum()
    }

    /// Total positive signs demanded, `sum (w - j) m_{h-j}`.
    pub fn sign_demand(&self, w: usize) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(j, _)| *j < w)
            .map(|(j, &c)| (w - j) as u64 * c)
            .sum()
    }

    /// Average degree `D / n`.
    pub fn mean_degree(&self, n: usize) -> f64 {
        self.degree_sum() as f64 / n as f64
    }
}

/// A multihypergraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.is_empty() {
                return invalid(format!("edge {i} is empty"));
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return invalid(format!("edge {i} references vertex {v} but n = {n}"));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &[usize] {
        &self.edges[i]
    }

    /// Vertex degrees counting multiplicity.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                d[v] += 1;
            }
        }
        d
    }

    pub fn degree_sum(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Distinct vertices of edge `i`, sorted.
    pub fn distinct_vertices(&self, i: usize) -> Vec<usize> {
        distinct(&self.edges[i])
    }

    /// True if no edge repeats a vertex.
    pub fn has_simple_edges(&self) -> bool {
        (0..self.m()).all(|i| self.distinct_vertices(i).len() == self.edges[i].len())
    }

    /// Checks every edge size against `[h - w + 1, h]`.
    pub fn check_sizes(&self, p: &OrientationParams) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            if p.demand(e.len()).is_none() {
                return invalid(format!(
                    "edge {i} has size {} outside [{}, {}]",
                    e.len(),
                    p.min_edge_size(),
                    p.h()
                ));
            }
        }
        Ok(())
    }

    /// Per-size edge counts. Fails if a size is out of bounds.
    pub fn edge_counts(&self, p: &OrientationParams) -> Result<EdgeCountVector> {
        self.check_sizes(p)?;
        let mut v = EdgeCountVector::zeros(p);
        for e in &self.edges {
            v.counts[p.h() - e.len()] += 1;
        }
        Ok(v)
    }

    /// Parses the line-oriented text format: a header `n m`, then one edge
    /// per line. Lines starting with `#` and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing header line".into(),
        })?;
        let nums = parse_ids(hline, header)?;
        if nums.len() != 2 {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header must be `n m`, found {} fields", nums.len()),
            });
        }
        let (n, m) = (nums[0], nums[1]);
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            if edges.len() == m {
                return Err(Error::Parse {
                    line,
                    msg: format!("more than the declared {m} edges"),
                });
            }
            let e = parse_ids(line, l)?;
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::Parse {
                    line,
                    msg: format!("vertex {v} out of range for n = {n}"),
                });
            }
            edges.push(e);
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("declared {m} edges, found {}", edges.len()),
            });
        }
        Hypergraph::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(8 * self.degree_sum() + 16);
        let _ = writeln!(s, "{} {}", self.n, self.m());
        for e in &self.edges {
            let mut first = true;
            for v in e {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }
}

fn parse_ids(line: usize, l: &str) -> Result<Vec<usize>> {
    l.split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                line,
                msg: format!("`{t}` is not a nonnegative integer"),
            })
        })
        .collect()
}

pub(crate) fn distinct(e: &[usize]) -> Vec<usize> {
    let mut d = e.to_vec();
    d.sort_unstable();
    d.dedup();
    d
}

/// Positive signs per edge and the resulting indegrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation {
    signs: Vec<Vec<usize>>,
    indegree: Vec<usize>,
}

impl Orientation {
    /// Builds an orientation on `n` vertices; indegrees are derived.
    pub fn from_signs(n: usize, signs: Vec<Vec<usize>>) -> Result<Self> {
        let mut indegree = vec![0; n];
        for (i, s) in signs.iter().enumerate() {
            for &v in s {
                if v >= n {
                    return invalid(format!("edge {i} signs vertex {v} but n = {n}"));
                }
                indegree[v] += 1;
            }
        }
        Ok(Self { signs, indegree })
    }

    pub fn signs(&self) -> &[Vec<usize>] {
        &self.signs
    }

    pub fn indegree(&self) -> &[usize] {
        &self.indegree
    }

    pub fn max_indegree(&self) -> usize {
        self.indegree.iter().copied().max().unwrap_or(0)
    }

    /// One line per edge: `edge_id: v1 v2 ...`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, sg) in self.signs.iter().enumerate() {
            let _ = write!(s, "{i}:");
            for v in sg {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        s
    }
}

/// First problem found by [`verify_orientation`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    WrongSignCount {
        edge: usize,
        expected: usize,
        found: usize,
    },
    SignOutsideEdge {
        edge: usize,
        vertex: usize,
    },
    DuplicateSign {
        edge: usize,
        vertex: usize,
    },
    Overloaded {
        vertex: usize,
        indegree: usize,
    },
}

/// Outcome of [`verify_orientation`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrientationCheck {
    Valid,
    Invalid(Violation),
}

impl OrientationCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, OrientationCheck::Valid)
    }
}

/// Checks that every edge of size `h - j` carries exactly `w - j` distinct
/// signs on its own vertices and that no indegree exceeds `k`.
pub fn verify_orientation(
    hg: &Hypergraph,
    o: &Orientation,
    p: &OrientationParams,
) -> Result<OrientationCheck> {
    if o.signs.len() != hg.m() || o.indegree.len() != hg.n() {
        return invalid(format!(
            "orientation covers {} edges / {} vertices, hypergraph has {} / {}",
            o.signs.len(),
            o.indegree.len(),
            hg.m(),
            hg.n()
        ));
    }
    hg.check_sizes(p)?;
    for (i, e) in hg.edges().iter().enumerate() {
        let expected = p.demand(e.len()).unwrap_or(0);
        let s = &o.signs[i];
        for &v in s {
            if !e.contains(&v) {
                return Ok(OrientationCheck::Invalid(Violation::SignOutsideEdge {
                    edge: i,
                    vertex: v,
                }));
            }
        }
        let d = distinct(s);
        if d.len() != s.len() {
            let dup = s
                .iter()
                .find(|&&v| s.iter().filter(|&&u| u == v).count() > 1)
                .copied()
                .unwrap_or(0);
            return Ok(OrientationCheck::Invalid(Violation::DuplicateSign {
                edge: i,
                vertex: dup,
            }));
        }
        if s.len() != expected {
            return Ok(OrientationCheck::Invalid(Violation::WrongSignCount {
                edge: i,
                expected,
                found: s.len(),
            }));
        }
    }
    let mut indeg = vec![0usize; hg.n()];
    for s in &o.signs {
        for &v in s {
            indeg[v] += 1;
        }
    }
    if let Some((v, &d)) = indeg.iter().enumerate().find(|(_, &d)| d > p.k()) {
        return Ok(OrientationCheck::Invalid(Violation::Overloaded {
            vertex: v,
            indegree: d,
        }));
    }
    Ok(OrientationCheck::Valid)
}

/// The w-density `sum (w - j) m_{h-j} / n` as an exact fraction.
pub fn w_density(hg: &Hypergraph, p: &OrientationParams) -> Result<Rational> {
    if hg.n() == 0 {
        return Err(Error::Domain("w-density of an empty vertex set".into()));
    }
    let demand = hg.edge_counts(p)?.sign_demand(p.w());
    Ok(Rational::new(demand as i64, hg.n() as i64))
}

fn subset_mask(n: usize, s: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &v in s {
        if v >= n {
            return invalid(format!("subset vertex {v} out of range for n = {n}"));
        }
        mask[v] = true;
    }
    Ok(mask)
}

/// Subgraph w-induced by `s`: each edge is intersected with `s` and kept
/// when at least `h - w + 1` incidences survive. Vertices are relabelled to
/// their rank in the sorted, deduplicated `s`.
pub fn w_induced_subgraph(
    hg: &Hypergraph,
    s: &[usize],
    p: &OrientationParams,
) -> Result<Hypergraph> {
    let mask = subset_mask(hg.n(), s)?;
    let mut label = vec![usize::MAX; hg.n()];
    let mut next = 0;
    for v in 0..hg.n() {
        if mask[v] {
            label[v] = next;
            next += 1;
        }
    }
    let edges = hg
        .edges()
        .iter()
        .filter_map(|e| {
            let x: Vec<usize> = e.iter().filter(|&&v| mask[v]).map(|&v| label[v]).collect();
            (x.len() >= p.min_edge_size()).then_some(x)
        })
        .collect();
    Ok(Hypergraph { n: next, edges })
}

/// Counts relating a vertex subset to the edges of a hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetStats {
    /// Sorted, deduplicated subset.
    pub subset: Vec<usize>,
    /// Degree sum over the subset.
    pub degree_sum: u64,
    /// `by_size[j][i]`: edges of size `h - j` with exactly `i` incidences in the subset.
    pub by_size: Vec<Vec<u64>>,
    /// Edges with at least two incidences in the subset.
    pub rho: u64,
    /// Edges meeting the subset.
    pub nu: u64,
    /// Edges meeting both the subset and its complement.
    pub eta: u64,
    /// `q[j]`: degree contribution of size-`(h - j)` edges.
    pub q: Vec<u64>,
    /// Expansion measure: each edge contributes `min(i, w - j)`.
    pub dstar: u64,
}

impl SubsetStats {
    pub fn len(&self) -> usize {
        self.subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }
}

pub fn subset_stats(hg: &Hypergraph, s: &[usize], p: &OrientationParams) -> Result<SubsetStats> {
    let mask = subset_mask(hg.n(), s)?;
    hg.check_sizes(p)?;
    Ok(stats_from_mask(hg, &mask, p))
}

pub(crate) fn stats_from_mask(hg: &Hypergraph, mask: &[bool], p: &OrientationParams) -> SubsetStats {
    let (h, w) = (p.h(), p.w());
    let mut by_size: Vec<Vec<u64>> = (0..w).map(|j| vec![0; h - j + 1]).collect();
    let mut st = SubsetStats {
        subset: (0..hg.n()).filter(|&v| mask[v]).collect(),
        degree_sum: 0,
        by_size: Vec::new(),
        rho: 0,
        nu: 0,
        eta: 0,
        q: vec![0; w],
        dstar: 0,
    };
    for e in hg.edges() {
        let size = e.len();
        let j = h - size;
        let i = e.iter().filter(|&&v| mask[v]).count();
        by_size[j][i] += 1;
        st.degree_sum += i as u64;
        st.q[j] += i as u64;
        if i >= 2 {
            st.rho += 1;
        }
        if i >= 1 {
            st.nu += 1;
            if i < size {
                st.eta += 1;
            }
        }
        st.dstar += i.min(w - j) as u64;
    }
    st.by_size = by_size;
    st
}

/// Property T: the (w,k+1)-core is empty or has w-density at most `k`.
pub fn check_property_t(hg: &Hypergraph, p: &OrientationParams) -> Result<bool> {
    let (pr, _) = rancore(hg, p, PeelMode::Deterministic, false)?;
    if pr.core.n() == 0 {
        return Ok(true);
    }
    Ok(w_density(&pr.core, p)? <= Rational::from_integer(p.k() as i64))
}

/// Property A(gamma) by exhaustive search: every nonempty `S` with
/// `|S| < gamma n` has fewer than `k|S|/(2w)` edges partially contained in it.
pub fn check_property_a(
    hg: &Hypergraph,
    gamma: f64,
    p: &OrientationParams,
    cap: usize,
) -> Result<bool> {
    if hg.n() > cap {
        return Err(Error::TooLarge { n: hg.n(), cap });
    }
    hg.check_sizes(p)?;
    let n = hg.n();
    let limit = gamma * n as f64;
    let masks = edge_masks(hg);
    for bits in 1u64..(1u64 << n) {
        let size = bits.count_ones() as usize;
        if (size as f64) >= limit {
            continue;
        }
        let rho = masks
            .iter()
            .filter(|e| e.iter().filter(|&&b| bits & b != 0).count() >= 2)
            .count();
        // rho < k|S|/(2w)  <=>  2 w rho < k |S|
        if 2 * p.w() * rho >= p.k() * size {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-edge list of single-bit vertex masks (multiplicity preserved).
pub(crate) fn edge_masks(hg: &Hypergraph) -> Vec<Vec<u64>> {
    hg.edges()
        .iter()
        .map(|e| e.iter().map(|&v| 1u64 << v).collect())
        .collect()
}

/// The four consequences of a violated expansion condition for `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicConditions {
    /// `rho(S^c) > k |S^c| / w`
    pub complement_dense: bool,
    /// `nu(S) < k |S|`
    pub few_touching: bool,
    /// `(h - w) rho(S) > d(S) - k |S|`
    pub many_partial: bool,
    /// If `sum (w-j)/(h-j) q_{h-j} >= (1 - delta) k |S|` then
    /// `eta(S) < h^2 delta k |S|`; vacuously true otherwise.
    pub few_crossing: bool,
}

pub fn check_deterministic_conditions(
    hg: &Hypergraph,
    s: &[usize],
    p: &OrientationParams,
    delta: f64,
) -> Result<DeterministicConditions> {
    let mask = subset_mask(hg.n(), s)?;
    hg.check_sizes(p)?;
    let st = stats_from_mask(hg, &mask, p);
    let comp: Vec<bool> = mask.iter().map(|b| !b).collect();
    let cst = stats_from_mask(hg, &comp, p);
    let (h, w, k) = (p.h() as i64, p.w() as i64, p.k() as i64);
    let s_len = st.len() as i64;
    let c_len = cst.len() as i64;

    let weighted: f64 = st
        .q
        .iter()
        .enumerate()
        .map(|(j, &q)| (w - j as i64) as f64 / (h - j as i64) as f64 * q as f64)
        .sum();
    let hyp = weighted >= (1.0 - delta) * (k * s_len) as f64;
    let few_crossing = !hyp || (st.eta as f64) < (h * h) as f64 * delta * (k * s_len) as f64;

    Ok(DeterministicConditions {
        complement_dense: w * cst.rho as i64 > k * c_len,
        few_touching: (st.nu as i64) < k * s_len,
        many_partial: (h - w) * st.rho as i64 > st.degree_sum as i64 - k * s_len,
        few_crossing,
    })
}

/// Expansion inequality `dstar(S) >= k|S| + sum (w-j) m_{h-j} - k n`.
pub fn expansion_condition(hg: &Hypergraph, s: &[usize], p: &OrientationParams) -> Result<bool> {
    let mask = subset_mask(hg.n(), s)?;
    let demand = hg.edge_counts(p)?.sign_demand(p.w()) as i64;
    let st = stats_from_mask(hg, &mask, p);
    let k = p.k() as i64;
    Ok(st.dstar as i64 >= k * st.len() as i64 + demand - k * hg.n() as i64)
}

/// Small-set parameter `e^{-4} h^{-6} / 4`.
pub fn recommended_gamma(p: &OrientationParams) -> f64 {
    (-4.0f64).exp() * (p.h() as f64).powi(-6) / 4.0
}
