//! Growing finite approximations of the rational Urysohn space.
//!
//! A [`GrowingSpace`] is an append-only finite metric space. New points
//! are realized from Katětov maps: the map is extended over the whole
//! current space by its Katětov extension and appended as a new row, unless
//! the extension is already the profile of an existing point.

use std::collections::{HashMap, HashSet};

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::extension::{ClosureMetric, ExtensionError, ExtensionGraph, ExtensionSpec, Vertex};
use crate::katetov::{check_katetov, katetov_extension, KatetovError, KatetovMap};
use crate::metric::{check_partial_isometry, FinMetric, IsometryError, MetricError, PartialIsometry, PointId};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error("partial isometry: {0}")]
    Isometry(#[from] IsometryError),
    #[error("spec base does not match the chosen points of the space")]
    BaseMismatch,
    #[error("distance set must be nonempty and positive")]
    BadDistanceSet,
    #[error("realized distances do not match the request")]
    RealizationMismatch,
}

/// Where a point of a [`GrowingSpace`] came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Present in the initial space.
    Seed,
    /// Realized from this (possibly partial) Katětov map.
    Realized(KatetovMap),
}

#[derive(Debug, Clone)]
pub struct GrowingSpace {
    space: FinMetric,
    provenance: Vec<Provenance>,
    labels: HashSet<String>,
    next_label: usize,
    verify_appends: bool,
}

impl GrowingSpace {
    pub fn new(space: FinMetric) -> Self {
        let labels = space.labels().iter().cloned().collect();
        let provenance = vec![Provenance::Seed; space.len()];
        GrowingSpace {
            space,
            provenance,
            labels,
            next_label: 0,
            verify_appends: cfg!(debug_assertions),
        }
    }

    /// Rebuilds a space together with its provenance log.
    pub fn with_provenance(space: FinMetric, provenance: Vec<Provenance>) -> Self {
        let mut g = Self::new(space);
        g.provenance = provenance;
        g
    }

    pub fn single_point(label: &str) -> Self {
        Self::new(FinMetric::new(vec![label.to_string()], vec![vec![Rat::zero()]]).expect("one point"))
    }

    /// Re-checks the metric axioms on every append (default in debug builds).
    pub fn set_verify_appends(&mut self, on: bool) {
        self.verify_appends = on;
    }

    pub fn space(&self) -> &FinMetric {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn d(&self, p: PointId, q: PointId) -> &Rat {
        self.space.d(p, q)
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    fn fresh_label(&mut self) -> String {
        loop {
            let l = format!("u{}", self.next_label);
            self.next_label += 1;
            if !self.labels.contains(&l) {
                return l;
            }
        }
    }

    fn append(&mut self, row: Vec<Rat>, provenance: Provenance) -> PointId {
        if self.verify_appends {
            self.space
                .check_new_row(&row)
                .expect("realized row keeps the space metric");
        }
        let label = self.fresh_label();
        self.labels.insert(label.clone());
        self.space.push_unchecked(label, row);
        self.provenance.push(provenance);
        self.space.len() - 1
    }

    /// Does `w` realize `f` on `f`'s domain?
    pub fn realizes(&self, w: PointId, f: &KatetovMap) -> bool {
        f.iter().all(|(p, v)| self.space.d(w, p) == v)
    }

    /// First existing point realizing `f` on its domain.
    pub fn find_realizer(&self, f: &KatetovMap) -> Option<PointId> {
        (0..self.len()).find(|&w| self.realizes(w, f))
    }

    /// Realizes `f`, returning an existing point when the Katětov
    /// extension of `f` is that point's profile.
    pub fn realize_katetov(&mut self, f: &KatetovMap) -> Result<PointId, BuildError> {
        check_katetov(f, &self.space)?;
        let full = katetov_extension(f, &self.space)?;
        let row = full.values_on(&(0..self.len()).collect::<Vec<_>>())?;
        if let Some(w) = row.iter().position(|v| v.is_zero()) {
            debug_assert!(self.space.row(w) == &row[..]);
            return Ok(w);
        }
        Ok(self.append(row, Provenance::Realized(f.clone())))
    }

    /// Realizes extra points over `base` with prescribed distances:
    /// `cross[i][x]` to `base[x]` and `internal[i][j]` among themselves.
    /// Points are placed one at a time, each by the Katětov extension of its
    /// constraints over `base` and the points placed before it.
    pub fn realize_rows(
        &mut self,
        base: &[PointId],
        internal: &[Vec<Rat>],
        cross: &[Vec<Rat>],
    ) -> Result<Vec<PointId>, BuildError> {
        let mut placed: Vec<PointId> = Vec::with_capacity(cross.len());
        for (i, row) in cross.iter().enumerate() {
            let mut f = KatetovMap::default();
            for (&x, v) in base.iter().zip(row) {
                f.insert(x, v.clone());
            }
            for (j, &z) in placed.iter().enumerate() {
                if let Some(existing) = f.get(z) {
                    if *existing != internal[i][j] {
                        return Err(BuildError::RealizationMismatch);
                    }
                }
                f.insert(z, internal[i][j].clone());
            }
            placed.push(self.realize_katetov(&f)?);
        }
        Ok(placed)
    }

    /// Realizes `spec` over the points `base` of this space. `spec.base()`
    /// must be the subspace on `base` in that order.
    pub fn realize_spec(&mut self, base: &[PointId], spec: &ExtensionSpec) -> Result<Vec<PointId>, BuildError> {
        self.check_base(base, spec.base())?;
        self.realize_rows(base, spec.pattern().matrix(), spec.cross())
    }

    fn check_base(&self, base: &[PointId], m: &FinMetric) -> Result<(), BuildError> {
        if m.len() != base.len() {
            return Err(BuildError::BaseMismatch);
        }
        for i in 0..base.len() {
            for j in 0..base.len() {
                if self.space.d(base[i], base[j]) != m.d(i, j) {
                    return Err(BuildError::BaseMismatch);
                }
            }
        }
        Ok(())
    }

    /// Realizes every vertex of `graph` with the distances of `closure`.
    /// Base vertex `x` is the point `base[x]`; catalog vertices are placed
    /// in the order of `closure.vertices`.
    pub fn realize_closure(
        &mut self,
        base: &[PointId],
        graph: &ExtensionGraph,
        closure: &ClosureMetric,
    ) -> Result<HashMap<Vertex, PointId>, BuildError> {
        self.check_base(base, graph.base())?;
        let known: Vec<(Vertex, PointId)> = (0..base.len()).map(|x| (Vertex::Base(x), base[x])).collect();
        self.realize_vertices(closure, &known)
    }

    /// Realizes the vertices of `closure` not listed in `known`. The closure
    /// distances among `known` vertices must match the space.
    pub fn realize_vertices(
        &mut self,
        closure: &ClosureMetric,
        known: &[(Vertex, PointId)],
    ) -> Result<HashMap<Vertex, PointId>, BuildError> {
        let pos = |v: Vertex| {
            closure
                .position(v)
                .ok_or(BuildError::Extension(ExtensionError::UnknownVertex(v)))
        };
        let kpos = known.iter().map(|&(v, _)| pos(v)).collect::<Result<Vec<_>, _>>()?;
        for (a, &(_, p)) in kpos.iter().zip(known) {
            for (b, &(_, q)) in kpos.iter().zip(known) {
                if &closure.dist[*a][*b] != self.space.d(p, q) {
                    return Err(BuildError::RealizationMismatch);
                }
            }
        }
        let fresh: Vec<usize> = (0..closure.vertices.len()).filter(|a| !kpos.contains(a)).collect();
        let internal: Vec<Vec<Rat>> = fresh
            .iter()
            .map(|&a| fresh.iter().map(|&b| closure.dist[a][b].clone()).collect())
            .collect();
        let cross: Vec<Vec<Rat>> = fresh
            .iter()
            .map(|&a| kpos.iter().map(|&b| closure.dist[a][b].clone()).collect())
            .collect();
        let points: Vec<PointId> = known.iter().map(|&(_, p)| p).collect();
        let placed = self.realize_rows(&points, &internal, &cross)?;
        let mut out: HashMap<Vertex, PointId> = known.iter().copied().collect();
        for (&a, z) in fresh.iter().zip(placed) {
            out.insert(closure.vertices[a], z);
        }
        Ok(out)
    }

    /// `prefer` if it realizes `f`, else an existing realizer, else a new
    /// point.
    fn realize_preferring(&mut self, f: &KatetovMap, prefer: PointId) -> Result<PointId, BuildError> {
        if f.is_empty() || self.realizes(prefer, f) {
            return Ok(prefer);
        }
        if let Some(w) = self.find_realizer(f) {
            return Ok(w);
        }
        self.realize_katetov(f)
    }

    /// Extends `phi` so that its domain contains `forth` and its range
    /// contains `back`.
    pub fn extend_isometry(
        &mut self,
        phi: &PartialIsometry,
        forth: &[PointId],
        back: &[PointId],
    ) -> Result<PartialIsometry, BuildError> {
        check_partial_isometry(phi, &self.space, &self.space)?;
        let mut out = phi.clone();
        for &z in forth {
            if out.apply(z).is_some() {
                continue;
            }
            let f = KatetovMap::from_pairs(
                out.domain
                    .iter()
                    .zip(&out.range)
                    .map(|(&p, &q)| (q, self.space.d(z, p).clone())),
            );
            let w = self.realize_preferring(&f, z)?;
            out.push(z, w);
        }
        for &w in back {
            if out.range.contains(&w) {
                continue;
            }
            let f = KatetovMap::from_pairs(
                out.domain
                    .iter()
                    .zip(&out.range)
                    .map(|(&p, &q)| (p, self.space.d(w, q).clone())),
            );
            let v = self.realize_preferring(&f, w)?;
            out.domain.push(v);
            out.range.push(w);
        }
        check_partial_isometry(&out, &self.space, &self.space)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrysohnConfig {
    pub distances: Vec<Rat>,
    pub rounds: usize,
    pub cap: usize,
    pub seed: u64,
    /// Stop realizing once the space has this many points.
    pub max_points: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SaturationReport {
    /// Space size at the start of each completed round, plus the final size.
    pub round_starts: Vec<usize>,
    pub realized_per_round: Vec<usize>,
    /// Maps skipped because `max_points` was reached.
    pub unrealized: usize,
    pub budget_exhausted: bool,
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<PointId>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Every Katětov map with values in `distances` over every subset of
/// `0..prefix` with at most `cap` points, in lexicographic order of
/// (subset, value vector).
pub fn enumerate_maps(space: &FinMetric, prefix: usize, distances: &[Rat], cap: usize) -> Vec<KatetovMap> {
    let mut out = Vec::new();
    for size in 1..=cap.min(prefix) {
        for subset in combinations(prefix, size) {
            let mut idx = vec![0usize; size];
            loop {
                let vals: Vec<Rat> = idx.iter().map(|&k| distances[k].clone()).collect();
                let f = KatetovMap::new(subset.clone(), vals).expect("distinct subset");
                if check_katetov(&f, space).is_ok() {
                    out.push(f);
                }
                // odometer, last position fastest
                let mut pos = size;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < distances.len() {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX {
                    break;
                }
            }
        }
    }
    out
}

fn normalize_distances(distances: &[Rat]) -> Result<Vec<Rat>, BuildError> {
    let mut ds = distances.to_vec();
    ds.sort();
    ds.dedup();
    if ds.is_empty() || ds.iter().any(|d| !d.is_positive()) {
        return Err(BuildError::BadDistanceSet);
    }
    Ok(ds)
}

/// Fraïssé-style saturation: each round realizes every Katětov map with
/// values in the distance set over every subset of at most `cap` points
/// present at the start of the round.
pub fn generate_rational_urysohn(
    mut space: GrowingSpace,
    cfg: &UrysohnConfig,
) -> Result<(GrowingSpace, SaturationReport), BuildError> {
    let distances = normalize_distances(&cfg.distances)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = SaturationReport::default();
    for _round in 0..cfg.rounds {
        let start = space.len();
        report.round_starts.push(start);
        let mut maps = enumerate_maps(space.space(), start, &distances, cfg.cap);
        maps.shuffle(&mut rng);
        let mut realized = 0;
        for f in &maps {
            if space.find_realizer(f).is_some() {
                continue;
            }
            if space.len() >= cfg.max_points {
                report.unrealized += 1;
                report.budget_exhausted = true;
                continue;
            }
            space.realize_katetov(f)?;
            realized += 1;
        }
        report.realized_per_round.push(realized);
        if report.budget_exhausted {
            break;
        }
    }
    report.round_starts.push(space.len());
    Ok((space, report))
}

/// Maps over subsets of `0..prefix` that no point of the space realizes.
pub fn saturation_audit(
    space: &GrowingSpace,
    prefix: usize,
    distances: &[Rat],
    cap: usize,
) -> Result<Vec<KatetovMap>, BuildError> {
    let distances = normalize_distances(distances)?;
    Ok(enumerate_maps(space.space(), prefix, &distances, cap)
        .into_iter()
        .filter(|f| space.find_realizer(f).is_none())
        .collect())
}

/// A partial isometry and a point it could not be extended to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionFailure {
    pub phi: PartialIsometry,
    pub point: PointId,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HomogeneityReport {
    pub isometries_checked: usize,
    pub extensions_checked: usize,
    pub failures: Vec<ExtensionFailure>,
}

/// Checks one-point extendability inside the space: for every partial
/// isometry between subsets of `0..prefix` with at most `cap` points and
/// every further point `z < prefix` whose distances to the domain lie in
/// `distances`, some point of the space is a valid image of `z`.
///
/// Back steps are covered because the inverse of each checked isometry is
/// itself checked.
pub fn audit_one_point_extensions(
    space: &GrowingSpace,
    prefix: usize,
    distances: &[Rat],
    cap: usize,
) -> Result<HomogeneityReport, BuildError> {
    let distances: HashSet<Rat> = normalize_distances(distances)?.into_iter().collect();
    let m = space.space();
    // (subset, profile on subset) -> some realizer
    let mut index: HashMap<(Vec<PointId>, Vec<Rat>), PointId> = HashMap::new();
    let mut subsets = Vec::new();
    for size in 1..=cap.min(prefix) {
        subsets.extend(combinations(prefix, size));
    }
    for t in &subsets {
        for w in 0..m.len() {
            let profile: Vec<Rat> = t.iter().map(|&p| m.d(w, p).clone()).collect();
            index.entry((t.clone(), profile)).or_insert(w);
        }
    }
    let mut report = HomogeneityReport::default();
    for s in &subsets {
        for t in subsets.iter().filter(|t| t.len() == s.len()) {
            for perm in permutations(t) {
                let phi = PartialIsometry::new(s.clone(), perm.clone(), Default::default());
                if check_partial_isometry(&phi, m, m).is_err() {
                    continue;
                }
                report.isometries_checked += 1;
                // Key the profile by the sorted target subset.
                let mut order: Vec<usize> = (0..t.len()).collect();
                order.sort_by_key(|&i| perm[i]);
                for z in (0..prefix).filter(|z| !s.contains(z)) {
                    let dz: Vec<Rat> = s.iter().map(|&p| m.d(z, p).clone()).collect();
                    if !dz.iter().all(|v| distances.contains(v)) {
                        continue;
                    }
                    report.extensions_checked += 1;
                    let sorted_t: Vec<PointId> = order.iter().map(|&i| perm[i]).collect();
                    let profile: Vec<Rat> = order.iter().map(|&i| dz[i].clone()).collect();
                    if !index.contains_key(&(sorted_t, profile)) {
                        report.failures.push(ExtensionFailure {
                            phi: phi.clone(),
                            point: z,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

fn permutations(items: &[PointId]) -> Vec<Vec<PointId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{validate_metric, FixedTag};
    use crate::rational::int;

    fn two_point(d: i64) -> GrowingSpace {
        GrowingSpace::new(
            FinMetric::new(
                vec!["p".into(), "q".into()],
                vec![vec![int(0), int(d)], vec![int(d), int(0)]],
            )
            .unwrap(),
        )
    }

    #[test]
    fn realize_partial_map() {
        let mut s = two_point(2);
        let f = KatetovMap::new(vec![0], vec![int(1)]).unwrap();
        let z = s.realize_katetov(&f).unwrap();
        assert_eq!(z, 2);
        assert_eq!(s.d(z, 0), &int(1));
        assert_eq!(s.d(z, 1), &int(3));
        assert_eq!(s.provenance()[z], Provenance::Realized(f));
    }

    #[test]
    fn realize_dedups_existing_profile() {
        let mut s = two_point(2);
        let f = KatetovMap::point_map(s.space(), 0);
        assert_eq!(s.realize_katetov(&f).unwrap(), 0);
        assert_eq!(s.len(), 2);
        let g = KatetovMap::total(vec![int(1), int(1)]);
        let z = s.realize_katetov(&g).unwrap();
        assert_eq!((s.d(z, 0), s.d(z, 1)), (&int(1), &int(1)));
    }

    #[test]
    fn realize_spec_two_points() {
        let mut s = GrowingSpace::single_point("x");
        let pattern = FinMetric::new(
            vec!["a1".into(), "a2".into()],
            vec![vec![int(0), int(1)], vec![int(1), int(0)]],
        )
        .unwrap();
        let spec = ExtensionSpec::new(s.space().clone(), pattern, vec![vec![int(1)], vec![int(2)]]).unwrap();
        let zs = s.realize_spec(&[0], &spec).unwrap();
        assert_eq!(s.d(zs[0], 0), &int(1));
        assert_eq!(s.d(zs[1], 0), &int(2));
        assert_eq!(s.d(zs[0], zs[1]), &int(1));
    }

    #[test]
    fn forth_on_swap() {
        let mut s = two_point(2);
        let z = s
            .realize_katetov(&KatetovMap::new(vec![0, 1], vec![int(1), int(3)]).unwrap())
            .unwrap();
        let swap = PartialIsometry::new(vec![0, 1], vec![1, 0], FixedTag::None);
        let ext = s.extend_isometry(&swap, &[z], &[]).unwrap();
        let w = ext.apply(z).unwrap();
        assert_eq!(s.d(w, 1), &int(1));
        assert_eq!(s.d(w, 0), &int(3));
        assert!(check_partial_isometry(&ext, s.space(), s.space()).is_ok());
    }

    #[test]
    fn identity_extends_to_identity() {
        let mut s = two_point(2);
        s.realize_katetov(&KatetovMap::new(vec![0], vec![int(1)]).unwrap())
            .unwrap();
        let id = PartialIsometry::identity(&[0]);
        let ext = s.extend_isometry(&id, &[1, 2], &[]).unwrap();
        assert_eq!(ext.apply(1), Some(1));
        assert_eq!(ext.apply(2), Some(2));
    }

    #[test]
    fn back_step_hits_target() {
        let mut s = two_point(2);
        let w = s
            .realize_katetov(&KatetovMap::new(vec![0, 1], vec![int(3), int(1)]).unwrap())
            .unwrap();
        let swap = PartialIsometry::new(vec![0, 1], vec![1, 0], FixedTag::None);
        let ext = s.extend_isometry(&swap, &[], &[w]).unwrap();
        assert!(ext.range.contains(&w));
        assert!(check_partial_isometry(&ext, s.space(), s.space()).is_ok());
        assert!(validate_metric(s.space().labels(), s.space().matrix()).is_ok());
    }

    #[test]
    fn one_round_from_one_point() {
        let cfg = UrysohnConfig {
            distances: vec![int(1), int(2)],
            rounds: 1,
            cap: 1,
            seed: 0,
            max_points: 1000,
        };
        let (s, report) = generate_rational_urysohn(GrowingSpace::single_point("o"), &cfg).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(report.realized_per_round, vec![2]);
        assert!(saturation_audit(&s, 1, &cfg.distances, 1).unwrap().is_empty());

        let cfg0 = UrysohnConfig { rounds: 0, ..cfg };
        let (s0, _) = generate_rational_urysohn(GrowingSpace::single_point("o"), &cfg0).unwrap();
        assert_eq!(s0.len(), 1);
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let cfg = UrysohnConfig {
            distances: vec![int(1), int(2)],
            rounds: 2,
            cap: 2,
            seed: 42,
            max_points: 1000,
        };
        let (a, _) = generate_rational_urysohn(GrowingSpace::single_point("o"), &cfg).unwrap();
        let (b, _) = generate_rational_urysohn(GrowingSpace::single_point("o"), &cfg).unwrap();
        assert_eq!(a.space(), b.space());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = UrysohnConfig {
            distances: vec![int(1), int(2)],
            rounds: 3,
            cap: 2,
            seed: 1,
            max_points: 4,
        };
        let (s, report) = generate_rational_urysohn(GrowingSpace::single_point("o"), &cfg).unwrap();
        assert_eq!(s.len(), 4);
        assert!(report.budget_exhausted);
        assert!(report.unrealized > 0);
    }
}
