//! Extensions of a finite space `X` by enumerated copies of a pattern `F`.
//!
//! The space of all such extensions is modelled lazily: an
//! [`ExtensionGraph`] holds `X` plus, for each pattern index `i`, a finite
//! catalog of Katětov maps on `X` (the vertices of copy `i`). Edge weights
//! follow the rule
//!
//! * within one copy: the sup-distance of the two maps;
//! * between a point `x` of `X` and a vertex `f`: `f(x)`;
//! * between copies `i != j`: `d(a_i, a_j)` when that value is compatible
//!   with the triangle inequality through every point of `X`, and no edge
//!   otherwise.
//!
//! [`ExtensionGraph::closure_metric`] takes shortest paths. On every pair
//! that carries an edge the closure equals the edge weight, which is what
//! makes the realizations below exact.

use num_traits::Zero;

use crate::katetov::{check_katetov, sup_dist, KatetovError, KatetovMap};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::metric::{scan_matrix, FinMetric, MetricError, PointId, Violation};
use crate::rational::{abs_diff, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtensionError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
    #[error("cross matrix has {rows} rows of length {cols:?}; expected {n} rows of length {m}")]
    Shape {
        rows: usize,
        cols: Vec<usize>,
        n: usize,
        m: usize,
    },
    #[error("extension is not a metric extension: {0}")]
    Invalid(String),
    #[error("copy index {0} out of range")]
    NoSuchCopy(usize),
    #[error("catalog map is not total on the base space")]
    NotTotal,
    #[error("unknown vertex {0:?}")]
    UnknownVertex(Vertex),
}

/// Abstract extension of `base` by points `a'_1..a'_n` isometric to
/// `pattern`, with `cross[i][x] = d(a'_i, x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionSpec {
    base: FinMetric,
    pattern: FinMetric,
    cross: Vec<Vec<Rat>>,
}

impl ExtensionSpec {
    pub fn new(base: FinMetric, pattern: FinMetric, cross: Vec<Vec<Rat>>) -> Result<Self, ExtensionError> {
        let spec = ExtensionSpec { base, pattern, cross };
        spec.validate()?;
        Ok(spec)
    }

    /// The spec realized by actual points: `tuple` over `base` in `ambient`.
    pub fn from_points(ambient: &FinMetric, base: &[PointId], tuple: &[PointId]) -> Result<Self, ExtensionError> {
        let cross = tuple
            .iter()
            .map(|&t| base.iter().map(|&x| ambient.d(t, x).clone()).collect())
            .collect();
        Self::new(ambient.restrict(base)?, ambient.restrict(tuple)?, cross)
    }

    pub fn base(&self) -> &FinMetric {
        &self.base
    }

    pub fn pattern(&self) -> &FinMetric {
        &self.pattern
    }

    pub fn cross(&self) -> &[Vec<Rat>] {
        &self.cross
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    /// Distance matrix on `base ∪ {a'_1..a'_n}` (base points first).
    /// Entries between a new point and a base point may be zero.
    pub fn joint_matrix(&self) -> Vec<Vec<Rat>> {
        let m = self.base.len();
        let n = self.pattern.len();
        let mut d = vec![vec![Rat::zero(); m + n]; m + n];
        for x in 0..m {
            for y in 0..m {
                d[x][y] = self.base.d(x, y).clone();
            }
        }
        for i in 0..n {
            for x in 0..m {
                d[m + i][x] = self.cross[i][x].clone();
                d[x][m + i] = self.cross[i][x].clone();
            }
            for j in 0..n {
                d[m + i][m + j] = self.pattern.d(i, j).clone();
            }
        }
        d
    }

    fn validate(&self) -> Result<(), ExtensionError> {
        let (n, m) = (self.pattern.len(), self.base.len());
        if self.cross.len() != n || self.cross.iter().any(|r| r.len() != m) {
            return Err(ExtensionError::Shape {
                rows: self.cross.len(),
                cols: self.cross.iter().map(Vec::len).collect(),
                n,
                m,
            });
        }
        let joint = self.joint_matrix();
        scan_matrix(&joint, true).map_err(|v| {
            let name = |k: usize| {
                if k < m {
                    self.base.label(k).to_string()
                } else {
                    format!("{}'", self.pattern.label(k - m))
                }
            };
            ExtensionError::Invalid(match v {
                Violation::Negative(p, q) => format!("negative distance {}-{}", name(p), name(q)),
                Violation::Triangle(p, q, r) => format!("triangle ({},{},{}) violated", name(p), name(q), name(r)),
                other => format!("{other:?}"),
            })
        })
    }

    /// Row `i` as a Katětov map on the base.
    pub fn row_map(&self, i: usize) -> KatetovMap {
        KatetovMap::total(self.cross[i].clone())
    }
}

/// A vertex of an [`ExtensionGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    /// A point of the base space (shared by all copies).
    Base(PointId),
    /// Catalog entry `index` of copy `copy`.
    Copy { copy: usize, index: usize },
}

#[derive(Debug, Clone)]
pub struct ExtensionGraph {
    base: FinMetric,
    pattern: FinMetric,
    catalogs: Vec<Vec<KatetovMap>>,
}

impl ExtensionGraph {
    pub fn new(base: FinMetric, pattern: FinMetric) -> Self {
        let n = pattern.len();
        ExtensionGraph {
            base,
            pattern,
            catalogs: vec![Vec::new(); n],
        }
    }

    pub fn base(&self) -> &FinMetric {
        &self.base
    }

    pub fn pattern(&self) -> &FinMetric {
        &self.pattern
    }

    pub fn catalog(&self, copy: usize) -> &[KatetovMap] {
        &self.catalogs[copy]
    }

    /// Adds `map` to copy `copy`.
    ///
    /// A map vanishing at a base point `x` is `d(x, ·)` and is identified
    /// with `x`; a map already in the catalog returns the existing vertex.
    pub fn add(&mut self, copy: usize, map: KatetovMap) -> Result<Vertex, ExtensionError> {
        if copy >= self.catalogs.len() {
            return Err(ExtensionError::NoSuchCopy(copy));
        }
        if !map.is_total(&self.base) {
            return Err(ExtensionError::NotTotal);
        }
        check_katetov(&map, &self.base)?;
        if let Some((x, _)) = map.iter().find(|(_, v)| v.is_zero()) {
            return Ok(Vertex::Base(x));
        }
        if let Some(index) = self.catalogs[copy].iter().position(|g| *g == map) {
            return Ok(Vertex::Copy { copy, index });
        }
        self.catalogs[copy].push(map);
        Ok(Vertex::Copy {
            copy,
            index: self.catalogs[copy].len() - 1,
        })
    }

    /// Base points first, then each copy's catalog in order.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut v: Vec<Vertex> = (0..self.base.len()).map(Vertex::Base).collect();
        for (copy, cat) in self.catalogs.iter().enumerate() {
            v.extend((0..cat.len()).map(|index| Vertex::Copy { copy, index }));
        }
        v
    }

    /// Distance profile of a vertex on the base.
    pub fn map_of(&self, v: Vertex) -> Result<KatetovMap, ExtensionError> {
        match v {
            Vertex::Base(x) if x < self.base.len() => Ok(KatetovMap::point_map(&self.base, x)),
            Vertex::Copy { copy, index } => self
                .catalogs
                .get(copy)
                .and_then(|c| c.get(index))
                .cloned()
                .ok_or(ExtensionError::UnknownVertex(v)),
            _ => Err(ExtensionError::UnknownVertex(v)),
        }
    }

    /// Weight between `f` in copy `i` and `g` in copy `j`, both total on
    /// the base. `None` when the cross-copy value is incompatible.
    pub fn omega_maps(&self, f: &KatetovMap, i: usize, g: &KatetovMap, j: usize) -> Option<Rat> {
        if i == j {
            return sup_dist(f, g).ok();
        }
        let d = self.pattern.d(i, j);
        let compatible = f
            .iter()
            .zip(g.iter())
            .all(|((_, fx), (_, gx))| abs_diff(fx, gx) <= *d && *d <= fx + gx);
        compatible.then(|| d.clone())
    }

    /// Edge weight between two vertices, if defined.
    pub fn omega(&self, u: Vertex, v: Vertex) -> Option<Rat> {
        match (u, v) {
            (Vertex::Base(x), Vertex::Base(y)) => Some(self.base.d(x, y).clone()),
            (Vertex::Base(x), Vertex::Copy { copy, index }) | (Vertex::Copy { copy, index }, Vertex::Base(x)) => {
                Some(self.catalogs[copy][index].at(x).clone())
            }
            (Vertex::Copy { copy: i, index: a }, Vertex::Copy { copy: j, index: b }) => {
                self.omega_maps(&self.catalogs[i][a], i, &self.catalogs[j][b], j)
            }
        }
    }

    /// All-pairs shortest paths over the defined weights.
    pub fn closure_metric(&self) -> ClosureMetric {
        let vertices = self.vertices();
        let n = vertices.len();
        let mut dist: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n];
        for a in 0..n {
            dist[a][a] = Some(Rat::zero());
            for b in (a + 1)..n {
                let w = self.omega(vertices[a], vertices[b]);
                dist[a][b] = w.clone();
                dist[b][a] = w;
            }
        }
        for k in 0..n {
            for a in 0..n {
                let Some(ak) = dist[a][k].clone() else { continue };
                for b in 0..n {
                    let Some(kb) = &dist[k][b] else { continue };
                    let through = &ak + kb;
                    match &dist[a][b] {
                        Some(cur) if *cur <= through => {}
                        _ => dist[a][b] = Some(through),
                    }
                }
            }
        }
        // Base vertices connect everything, so every entry is finite.
        let dist = dist
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.expect("connected")).collect())
            .collect();
        ClosureMetric { vertices, dist }
    }

    /// Every defined weight equals the closure distance.
    pub fn audit_claim(&self, closure: &ClosureMetric) -> Result<(), (Vertex, Vertex)> {
        let vs = &closure.vertices;
        for (a, &u) in vs.iter().enumerate() {
            for (b, &v) in vs.iter().enumerate().skip(a + 1) {
                if let Some(w) = self.omega(u, v) {
                    if w != closure.dist[a][b] {
                        return Err((u, v));
                    }
                }
            }
        }
        Ok(())
    }

    /// Within each copy the closure distance is the sup-distance of the
    /// two profiles, and `d̄(x, f) = f(x)`.
    pub fn audit_condition_b(&self, closure: &ClosureMetric) -> Result<(), (Vertex, Vertex)> {
        let vs = &closure.vertices;
        for (a, &u) in vs.iter().enumerate() {
            for (b, &v) in vs.iter().enumerate().skip(a + 1) {
                let expected = match (u, v) {
                    (Vertex::Copy { copy: i, index: p }, Vertex::Copy { copy: j, index: q }) if i == j => {
                        sup_dist(&self.catalogs[i][p], &self.catalogs[j][q]).ok()
                    }
                    (Vertex::Base(_), _) | (_, Vertex::Base(_)) => self.omega(u, v),
                    _ => None,
                };
                if let Some(e) = expected {
                    if e != closure.dist[a][b] {
                        return Err((u, v));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Shortest-path distances on the vertices of an [`ExtensionGraph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureMetric {
    pub vertices: Vec<Vertex>,
    pub dist: Vec<Vec<Rat>>,
}

impl ClosureMetric {
    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&u| u == v)
    }

    pub fn d(&self, u: Vertex, v: Vertex) -> Option<&Rat> {
        Some(&self.dist[self.position(u)?][self.position(v)?])
    }
}

/// Result of [`dbar_exact`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbarResult {
    pub value: Rat,
    /// Set when chains longer than the depth bound could still beat
    /// `value`.
    pub bound_limited: bool,
    /// Copy-index sequence of the best relay chain; `None` when the best
    /// path runs through the base or is a direct edge.
    pub chain: Option<Vec<usize>>,
}

/// Exact path-metric distance between `f` in copy `i` and `g` in copy `j`
/// over the full (infinite) extension space, searching relay chains of up
/// to `depth_bound` cross-copy edges.
///
/// Relay vertices range over all Katětov maps on the base; for a fixed
/// copy-index sequence the optimal relays solve a linear program.
pub fn dbar_exact(
    graph: &ExtensionGraph,
    f: &KatetovMap,
    i: usize,
    g: &KatetovMap,
    j: usize,
    depth_bound: usize,
) -> Result<DbarResult, ExtensionError> {
    let n = graph.pattern.len();
    if i >= n {
        return Err(ExtensionError::NoSuchCopy(i));
    }
    if j >= n {
        return Err(ExtensionError::NoSuchCopy(j));
    }
    for h in [f, g] {
        if !h.is_total(&graph.base) {
            return Err(ExtensionError::NotTotal);
        }
        check_katetov(h, &graph.base)?;
    }
    if let Some(w) = graph.omega_maps(f, i, g, j) {
        return Ok(DbarResult {
            value: w,
            bound_limited: false,
            chain: None,
        });
    }
    let lower = sup_dist(f, g)?;

    // Upper bound from the finite catalog.
    let mut with_ends = graph.clone();
    let fv = with_ends.add(i, f.clone())?;
    let gv = with_ends.add(j, g.clone())?;
    let mut best = with_ends.closure_metric().d(fv, gv).expect("added").clone();
    let mut chain = None;

    let through_base = f.iter().map(|(x, fx)| fx + g.at(x)).min().expect("nonempty base");
    if through_base < best {
        best = through_base;
    }
    if best == lower {
        return Ok(DbarResult {
            value: best,
            bound_limited: false,
            chain,
        });
    }

    let d_min = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| graph.pattern.d(a, b).clone())
        .min()
        .expect("pattern has two points when i != j");

    let mut frontier: Vec<(Vec<usize>, Rat)> = vec![(vec![i], Rat::zero())];
    for _depth in 1..=depth_bound {
        let mut next = Vec::new();
        for (seq, sum) in &frontier {
            let last = *seq.last().expect("nonempty");
            for c in 0..n {
                if c == last {
                    continue;
                }
                let s = sum + graph.pattern.d(last, c);
                if s >= best {
                    continue;
                }
                let mut ext = seq.clone();
                ext.push(c);
                if c == j {
                    if let Some(v) = relay_chain_cost(graph, f, g, &ext) {
                        if v < best {
                            best = v;
                            chain = Some(ext.clone());
                        }
                    }
                }
                next.push((ext, s));
            }
        }
        if best == lower {
            return Ok(DbarResult {
                value: best,
                bound_limited: false,
                chain,
            });
        }
        frontier = next.into_iter().filter(|(_, s)| *s < best).collect();
        if frontier.is_empty() {
            break;
        }
    }
    let bound_limited = frontier.iter().any(|(_, s)| s + &d_min < best);
    Ok(DbarResult {
        value: best,
        bound_limited,
        chain,
    })
}

/// Minimal weight of a path from `f` (copy `seq[0]`) to `g` (copy
/// `seq.last()`) whose consecutive blocks live in the copies of `seq`,
/// with free relay maps. `None` if the relay constraints are infeasible.
pub(crate) fn relay_chain_cost(graph: &ExtensionGraph, f: &KatetovMap, g: &KatetovMap, seq: &[usize]) -> Option<Rat> {
    let r = seq.len() - 1;
    let m = graph.base.len();
    // Maps 0..2r: map 2t leaves copy seq[t], map 2t+1 enters seq[t+1].
    let maps = 2 * r;
    let var = |map: usize, x: usize| map * m + x;
    let s_var = |t: usize| maps * m + t;
    let mut lp = LinearProgram::new(maps * m + r + 1);
    let one = || Rat::from_integer(1.into());
    let neg = || Rat::from_integer((-1).into());
    for t in 0..=r {
        lp.set_objective(s_var(t), one());
    }
    // Katětov conditions on every relay map.
    for k in 0..maps {
        for x in 0..m {
            for y in (x + 1)..m {
                let d = graph.base.d(x, y).clone();
                lp.constrain(vec![(var(k, x), one()), (var(k, y), neg())], Cmp::Le, d.clone());
                lp.constrain(vec![(var(k, y), one()), (var(k, x), neg())], Cmp::Le, d.clone());
                lp.constrain(vec![(var(k, x), one()), (var(k, y), one())], Cmp::Ge, d);
            }
        }
    }
    // Intra-copy sup-norms: block t runs from its entry to its exit.
    for t in 0..=r {
        for x in 0..m {
            let entry = if t == 0 { None } else { Some(var(2 * t - 1, x)) };
            let exit = if t == r { None } else { Some(var(2 * t, x)) };
            // s_t >= entry - exit and s_t >= exit - entry
            for sign in [1i64, -1] {
                let mut coeffs = vec![(s_var(t), one())];
                let mut rhs = Rat::zero();
                let sg = Rat::from_integer(sign.into());
                match entry {
                    Some(v) => coeffs.push((v, -&sg)),
                    None => rhs += &sg * f.at(x),
                }
                match exit {
                    Some(v) => coeffs.push((v, sg.clone())),
                    None => rhs -= &sg * g.at(x),
                }
                lp.constrain(coeffs, Cmp::Ge, rhs);
            }
        }
    }
    // Cross-copy edges must carry a defined weight.
    let mut index_sum = Rat::zero();
    for t in 0..r {
        let d = graph.pattern.d(seq[t], seq[t + 1]).clone();
        index_sum += &d;
        for x in 0..m {
            let (a, b) = (var(2 * t, x), var(2 * t + 1, x));
            lp.constrain(vec![(a, one()), (b, neg())], Cmp::Le, d.clone());
            lp.constrain(vec![(b, one()), (a, neg())], Cmp::Le, d.clone());
            lp.constrain(vec![(a, one()), (b, one())], Cmp::Ge, d.clone());
        }
    }
    match lp.minimize() {
        LpOutcome::Optimal { value, .. } => Some(value + index_sum),
        _ => None,
    }
}

/// The catalog vertices realizing `spec`: row `i` as a map in copy `i`.
pub fn embed_spec(spec: &ExtensionSpec) -> Vec<(usize, KatetovMap)> {
    (0..spec.len()).map(|i| (i, spec.row_map(i))).collect()
}

/// Adds the rows of `spec` to `graph` and returns their vertices.
pub fn embed_into(graph: &mut ExtensionGraph, spec: &ExtensionSpec) -> Result<Vec<Vertex>, ExtensionError> {
    embed_spec(spec).into_iter().map(|(i, f)| graph.add(i, f)).collect()
}

/// Reads back the spec realized by `vertices` from a closure metric.
pub fn spec_from_closure(
    graph: &ExtensionGraph,
    closure: &ClosureMetric,
    vertices: &[Vertex],
) -> Result<ExtensionSpec, ExtensionError> {
    let pos = |v: Vertex| closure.position(v).ok_or(ExtensionError::UnknownVertex(v));
    let mut cross = Vec::with_capacity(vertices.len());
    for &v in vertices {
        let p = pos(v)?;
        cross.push((0..graph.base.len()).map(|x| closure.dist[p][x].clone()).collect());
    }
    ExtensionSpec::new(graph.base.clone(), graph.pattern.clone(), cross)
}
