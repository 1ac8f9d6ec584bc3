//! Finite metric spaces over exact rationals.
//!
//! A [`FinMetric`] is an enumerated point set with a symmetric distance
//! matrix. Points are addressed by index ([`PointId`]); labels are carried
//! for I/O and error reports.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_rat, Rat};

pub type PointId = usize;

/// Labels and distances of a triple with `d(p,q) + d(q,r) < d(p,r)`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("triangle violation ({p},{q},{r}): {pq}+{qr} < {pr}")]
pub struct TriangleViolation {
    pub p: String,
    pub q: String,
    pub r: String,
    pub pq: String,
    pub qr: String,
    pub pr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("{labels} labels but {rows} matrix rows")]
    LabelCount { labels: usize, rows: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("asymmetric entries d({p},{q}) != d({q},{p})")]
    Asymmetric { p: String, q: String },
    #[error("nonzero diagonal entry at {0}")]
    NonzeroDiagonal(String),
    #[error("negative distance d({p},{q})")]
    NegativeDistance { p: String, q: String },
    #[error("zero distance between distinct points {p} and {q}")]
    ZeroDistance { p: String, q: String },
    #[error("{0}")]
    Triangle(Box<TriangleViolation>),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("points are not distinct")]
    PointsNotDistinct,
    #[error("spaces have different label lists")]
    LabelMismatch,
    #[error("empty input")]
    Empty,
    #[error("weight {index} is not positive")]
    NonPositiveWeight { index: usize },
    #[error("weights sum to {0}, expected 1")]
    WeightSum(String),
    #[error("common points {p},{q} have different distances in the two spaces")]
    CommonDistanceMismatch { p: String, q: String },
}

impl MetricError {
    /// Structural errors concern the shape of the input rather than the
    /// metric axioms.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            MetricError::LabelCount { .. }
                | MetricError::NotSquare { .. }
                | MetricError::DuplicateLabel(_)
                | MetricError::Asymmetric { .. }
                | MetricError::NonzeroDiagonal(_)
        )
    }
}

/// Index-level description of the first axiom failure in a matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Violation {
    NotSquare {
        row: usize,
        len: usize,
    },
    Asymmetric(usize, usize),
    NonzeroDiagonal(usize),
    Negative(usize, usize),
    Zero(usize, usize),
    /// `d(p,q) + d(q,r) < d(p,r)`
    Triangle(usize, usize, usize),
}

/// Scans a square matrix for the first violation of the (pseudo)metric
/// axioms. With `allow_zero` distinct points may sit at distance zero.
pub(crate) fn scan_matrix(dist: &[Vec<Rat>], allow_zero: bool) -> Result<(), Violation> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Violation::NotSquare { row: i, len: row.len() });
        }
    }
    for i in 0..n {
        if !dist[i][i].is_zero() {
            return Err(Violation::NonzeroDiagonal(i));
        }
        for j in (i + 1)..n {
            if dist[i][j] != dist[j][i] {
                return Err(Violation::Asymmetric(i, j));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i][j].is_negative() {
                return Err(Violation::Negative(i, j));
            }
            if !allow_zero && dist[i][j].is_zero() {
                return Err(Violation::Zero(i, j));
            }
        }
    }
    for p in 0..n {
        for r in (p + 1)..n {
            for q in 0..n {
                if q == p || q == r {
                    continue;
                }
                if &dist[p][q] + &dist[q][r] < dist[p][r] {
                    return Err(Violation::Triangle(p, q, r));
                }
            }
        }
    }
    Ok(())
}

fn violation_to_error(v: Violation, labels: &[String], dist: &[Vec<Rat>]) -> MetricError {
    let l = |i: usize| labels.get(i).cloned().unwrap_or_else(|| format!("#{i}"));
    match v {
        Violation::NotSquare { row, len } => MetricError::NotSquare {
            row,
            len,
            expected: dist.len(),
        },
        Violation::Asymmetric(p, q) => MetricError::Asymmetric { p: l(p), q: l(q) },
        Violation::NonzeroDiagonal(i) => MetricError::NonzeroDiagonal(l(i)),
        Violation::Negative(p, q) => MetricError::NegativeDistance { p: l(p), q: l(q) },
        Violation::Zero(p, q) => MetricError::ZeroDistance { p: l(p), q: l(q) },
        Violation::Triangle(p, q, r) => MetricError::Triangle(Box::new(TriangleViolation {
            p: l(p),
            q: l(q),
            r: l(r),
            pq: format_rat(&dist[p][q]),
            qr: format_rat(&dist[q][r]),
            pr: format_rat(&dist[p][r]),
        })),
    }
}

/// Checks labels and matrix against the metric axioms. Structural problems
/// (shape, symmetry, diagonal, duplicate labels) are reported before axiom
/// violations.
pub fn validate_metric(labels: &[String], dist: &[Vec<Rat>]) -> Result<(), MetricError> {
    if labels.len() != dist.len() {
        return Err(MetricError::LabelCount {
            labels: labels.len(),
            rows: dist.len(),
        });
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(MetricError::DuplicateLabel(l.clone()));
        }
    }
    scan_matrix(dist, false).map_err(|v| violation_to_error(v, labels, dist))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinMetric {
    labels: Vec<String>,
    dist: Vec<Vec<Rat>>,
}

impl FinMetric {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rat>>) -> Result<Self, MetricError> {
        validate_metric(&labels, &dist)?;
        Ok(FinMetric { labels, dist })
    }

    /// Builds a space from a distance function on indices.
    pub fn from_fn(labels: Vec<String>, d: impl Fn(usize, usize) -> Rat) -> Result<Self, MetricError> {
        let n = labels.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rat::zero() } else { d(i, j) }).collect())
            .collect();
        Self::new(labels, dist)
    }

    pub fn empty() -> Self {
        FinMetric {
            labels: Vec::new(),
            dist: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.labels[p]
    }

    pub fn index_of(&self, label: &str) -> Option<PointId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn point(&self, label: &str) -> Result<PointId, MetricError> {
        self.index_of(label)
            .ok_or_else(|| MetricError::UnknownPoint(label.to_string()))
    }

    #[inline]
    pub fn d(&self, p: PointId, q: PointId) -> &Rat {
        &self.dist[p][q]
    }

    pub fn row(&self, p: PointId) -> &[Rat] {
        &self.dist[p]
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.dist
    }

    pub fn diameter(&self) -> Rat {
        self.dist
            .iter()
            .flat_map(|row| row.iter())
            .max()
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// The subspace on `points`, in the given order.
    pub fn restrict(&self, points: &[PointId]) -> Result<FinMetric, MetricError> {
        let labels = points.iter().map(|&p| self.labels[p].clone()).collect();
        let dist = points
            .iter()
            .map(|&p| points.iter().map(|&q| self.dist[p][q].clone()).collect())
            .collect();
        FinMetric::new(labels, dist)
    }

    /// Checks that a new point with the given distance row (one entry per
    /// existing point) keeps the space metric. Only triangles through the
    /// new point are inspected.
    pub fn check_new_row(&self, row: &[Rat]) -> Result<(), MetricError> {
        let n = self.len();
        let new_label = || "<new>".to_string();
        if row.len() != n {
            return Err(MetricError::NotSquare {
                row: n,
                len: row.len(),
                expected: n + 1,
            });
        }
        for (p, v) in row.iter().enumerate() {
            if v.is_negative() {
                return Err(MetricError::NegativeDistance {
                    p: new_label(),
                    q: self.labels[p].clone(),
                });
            }
            if v.is_zero() {
                return Err(MetricError::ZeroDistance {
                    p: new_label(),
                    q: self.labels[p].clone(),
                });
            }
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let dpq = &self.dist[p][q];
                let tri = |a: &Rat, b: &Rat, c: &Rat, pl: String, ql: String, rl: String| {
                    if a + b < *c {
                        Err(MetricError::Triangle(Box::new(TriangleViolation {
                            p: pl,
                            q: ql,
                            r: rl,
                            pq: format_rat(a),
                            qr: format_rat(b),
                            pr: format_rat(c),
                        })))
                    } else {
                        Ok(())
                    }
                };
                let (lp, lq) = (self.labels[p].clone(), self.labels[q].clone());
                tri(&row[p], &row[q], dpq, lp.clone(), new_label(), lq.clone())?;
                tri(&row[p], dpq, &row[q], new_label(), lp.clone(), lq.clone())?;
                tri(&row[q], dpq, &row[p], new_label(), lq, lp)?;
            }
        }
        Ok(())
    }

    /// Appends a point without checking the axioms.
    pub(crate) fn push_unchecked(&mut self, label: String, row: Vec<Rat>) {
        debug_assert_eq!(row.len(), self.len());
        for (r, v) in self.dist.iter_mut().zip(row.iter()) {
            r.push(v.clone());
        }
        let mut own = row;
        own.push(Rat::zero());
        self.dist.push(own);
        self.labels.push(label);
    }

    /// Appends a point after checking the axioms.
    pub fn push_point(&mut self, label: String, row: Vec<Rat>) -> Result<PointId, MetricError> {
        if self.index_of(&label).is_some() {
            return Err(MetricError::DuplicateLabel(label));
        }
        self.check_new_row(&row)?;
        self.push_unchecked(label, row);
        Ok(self.len() - 1)
    }
}

/// True iff one of the three triangle inequalities on `{a, b, c}` is an
/// equality.
pub fn is_flat(m: &FinMetric, a: PointId, b: PointId, c: PointId) -> Result<bool, MetricError> {
    if a == b || b == c || a == c {
        return Err(MetricError::PointsNotDistinct);
    }
    if a.max(b).max(c) >= m.len() {
        return Err(MetricError::UnknownPoint(format!("#{}", a.max(b).max(c))));
    }
    Ok(is_flat_triple(m.d(a, b), m.d(b, c), m.d(a, c)))
}

/// Flatness from the three side lengths `ab`, `bc`, `ac`.
pub fn is_flat_triple(ab: &Rat, bc: &Rat, ac: &Rat) -> bool {
    ab + bc == *ac || ac + bc == *ab || ab + ac == *bc
}

/// Entrywise convex combination of metrics on a common label list.
pub fn average_metrics(ms: &[FinMetric], weights: &[Rat]) -> Result<FinMetric, MetricError> {
    let first = ms.first().ok_or(MetricError::Empty)?;
    if weights.len() != ms.len() {
        return Err(MetricError::LabelMismatch);
    }
    if ms.iter().any(|m| m.labels != first.labels) {
        return Err(MetricError::LabelMismatch);
    }
    if let Some(index) = weights.iter().position(|w| !w.is_positive()) {
        return Err(MetricError::NonPositiveWeight { index });
    }
    let total: Rat = weights.iter().sum();
    if !total.is_one() {
        return Err(MetricError::WeightSum(format_rat(&total)));
    }
    let n = first.len();
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| ms.iter().zip(weights).map(|(m, w)| w * m.d(i, j)).sum())
                .collect()
        })
        .collect();
    FinMetric::new(first.labels.clone(), dist)
}

/// Free amalgamation of `ma` and `mb` over the points named in `common`.
///
/// The result lists `ma`'s points first, then `mb`'s points outside
/// `common`. Cross distances are shortest paths through the common part;
/// with no common points every cross distance is `max(diam ma, diam mb, 1)`.
pub fn amalgamate_free(ma: &FinMetric, mb: &FinMetric, common: &[String]) -> Result<FinMetric, MetricError> {
    let common_set: HashSet<&str> = common.iter().map(String::as_str).collect();
    let in_a: Vec<PointId> = common.iter().map(|c| ma.point(c)).collect::<Result<_, _>>()?;
    let in_b: Vec<PointId> = common.iter().map(|c| mb.point(c)).collect::<Result<_, _>>()?;
    for i in 0..common.len() {
        for j in (i + 1)..common.len() {
            if ma.d(in_a[i], in_a[j]) != mb.d(in_b[i], in_b[j]) {
                return Err(MetricError::CommonDistanceMismatch {
                    p: common[i].clone(),
                    q: common[j].clone(),
                });
            }
        }
    }
    let b_only: Vec<PointId> = (0..mb.len()).filter(|&q| !common_set.contains(mb.label(q))).collect();
    for &q in &b_only {
        if ma.index_of(mb.label(q)).is_some() {
            return Err(MetricError::DuplicateLabel(mb.label(q).to_string()));
        }
    }
    let a_to_common: HashMap<PointId, PointId> = in_a.iter().copied().zip(in_b.iter().copied()).collect();
    let empty_gap = ma.diameter().max(mb.diameter()).max(Rat::one());

    // Distance from a point of ma to a point of mb outside the common part.
    let cross = |p: PointId, q: PointId| -> Rat {
        if let Some(&pb) = a_to_common.get(&p) {
            return mb.d(pb, q).clone();
        }
        if in_a.is_empty() {
            return empty_gap.clone();
        }
        in_a.iter()
            .zip(&in_b)
            .map(|(&wa, &wb)| ma.d(p, wa) + mb.d(wb, q))
            .min()
            .expect("nonempty common part")
    };

    let mut labels: Vec<String> = ma.labels.clone();
    labels.extend(b_only.iter().map(|&q| mb.label(q).to_string()));
    let na = ma.len();
    let n = labels.len();
    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match (i < na, j < na) {
                (true, true) => ma.d(i, j).clone(),
                (true, false) => cross(i, b_only[j - na]),
                (false, false) => mb.d(b_only[i - na], b_only[j - na]).clone(),
                (false, true) => unreachable!("i < j"),
            };
            dist[i][j] = v.clone();
            dist[j][i] = v;
        }
    }
    FinMetric::new(labels, dist)
}

/// Which pointwise-fixed set a certificate isometry is tagged with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum FixedTag {
    FixesA,
    FixesB,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IsometryError {
    #[error("domain has {domain} points but range has {range}")]
    LengthMismatch { domain: usize, range: usize },
    #[error("point index {0} out of range")]
    OutOfRange(usize),
    #[error("distances differ at pair ({0}, {1})")]
    ViolatingPair(usize, usize),
}

/// Enumerated correspondence `domain[i] -> range[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialIsometry {
    pub domain: Vec<PointId>,
    pub range: Vec<PointId>,
    pub fixed_tag: FixedTag,
}

impl PartialIsometry {
    pub fn new(domain: Vec<PointId>, range: Vec<PointId>, fixed_tag: FixedTag) -> Self {
        PartialIsometry {
            domain,
            range,
            fixed_tag,
        }
    }

    pub fn identity(points: &[PointId]) -> Self {
        Self::new(points.to_vec(), points.to_vec(), FixedTag::None)
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.range.clone(), self.domain.clone(), self.fixed_tag)
    }

    /// Image of `p`, if `p` is in the domain.
    pub fn apply(&self, p: PointId) -> Option<PointId> {
        self.domain.iter().position(|&q| q == p).map(|i| self.range[i])
    }

    /// Every point of `set` is in the domain and maps to itself.
    pub fn fixes_all(&self, set: &[PointId]) -> bool {
        set.iter().all(|&p| self.apply(p) == Some(p))
    }

    /// Every point of `set` that lies in the domain maps to itself.
    pub fn fixes_pointwise(&self, set: &[PointId]) -> bool {
        set.iter().all(|&p| self.apply(p).is_none_or(|q| q == p))
    }

    /// Appends `p -> q` unless `p` is already in the domain.
    pub fn push(&mut self, p: PointId, q: PointId) {
        if self.apply(p).is_none() {
            self.domain.push(p);
            self.range.push(q);
        }
    }
}

/// Checks that `f` preserves every pairwise distance, reading the domain in
/// `src` and the range in `dst`.
pub fn check_partial_isometry(f: &PartialIsometry, src: &FinMetric, dst: &FinMetric) -> Result<(), IsometryError> {
    if f.domain.len() != f.range.len() {
        return Err(IsometryError::LengthMismatch {
            domain: f.domain.len(),
            range: f.range.len(),
        });
    }
    if let Some(&p) = f.domain.iter().find(|&&p| p >= src.len()) {
        return Err(IsometryError::OutOfRange(p));
    }
    if let Some(&p) = f.range.iter().find(|&&p| p >= dst.len()) {
        return Err(IsometryError::OutOfRange(p));
    }
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            if src.d(f.domain[i], f.domain[j]) != dst.d(f.range[i], f.range[j]) {
                return Err(IsometryError::ViolatingPair(i, j));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    /// Triangle on p, q, r with d(p,q), d(q,r), d(p,r).
    fn tri(pq: Rat, qr: Rat, pr: Rat) -> Vec<Vec<Rat>> {
        let z = Rat::zero();
        vec![
            vec![z.clone(), pq.clone(), pr.clone()],
            vec![pq, z.clone(), qr.clone()],
            vec![pr, qr, z],
        ]
    }

    #[test]
    fn validate_examples() {
        let l = labels(&["p", "q", "r"]);
        assert!(validate_metric(&l, &tri(int(1), int(1), int(2))).is_ok());
        let err = validate_metric(&l, &tri(int(1), int(1), int(3))).unwrap_err();
        match err {
            MetricError::Triangle(t) => {
                assert_eq!((t.p.as_str(), t.q.as_str(), t.r.as_str()), ("p", "q", "r"))
            }
            e => panic!("unexpected {e:?}"),
        }
        let two = labels(&["p", "q"]);
        let zero = vec![vec![int(0), int(0)], vec![int(0), int(0)]];
        assert!(matches!(
            validate_metric(&two, &zero),
            Err(MetricError::ZeroDistance { .. })
        ));
    }

    #[test]
    fn structural_errors_are_distinct() {
        let two = labels(&["p", "q"]);
        let asym = vec![vec![int(0), int(1)], vec![int(2), int(0)]];
        let e = validate_metric(&two, &asym).unwrap_err();
        assert!(e.is_structural());
        let ragged = vec![vec![int(0), int(1)], vec![int(1)]];
        assert!(validate_metric(&two, &ragged).unwrap_err().is_structural());
        let bad = tri(int(1), int(1), int(3));
        assert!(!validate_metric(&labels(&["p", "q", "r"]), &bad)
            .unwrap_err()
            .is_structural());
    }

    #[test]
    fn flatness_examples() {
        let l = labels(&["a", "b", "c"]);
        let m = FinMetric::new(l.clone(), tri(int(1), int(1), int(2))).unwrap();
        assert!(is_flat(&m, 0, 1, 2).unwrap());
        let m = FinMetric::new(l.clone(), tri(int(2), int(2), int(3))).unwrap();
        assert!(!is_flat(&m, 0, 1, 2).unwrap());
        let m = FinMetric::new(l, tri(int(1), int(1), int(1))).unwrap();
        assert!(!is_flat(&m, 0, 1, 2).unwrap());
        assert_eq!(is_flat(&m, 0, 0, 2), Err(MetricError::PointsNotDistinct));
    }

    #[test]
    fn average_examples() {
        let l = labels(&["p", "q", "r"]);
        let m1 = FinMetric::new(l.clone(), tri(int(1), int(1), int(2))).unwrap();
        let m2 = FinMetric::new(l.clone(), tri(int(1), int(1), int(1))).unwrap();
        let avg = average_metrics(&[m1.clone(), m2], &[rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(avg.d(0, 2), &rat(3, 2));
        assert!(!is_flat(&avg, 0, 1, 2).unwrap());
        assert_eq!(average_metrics(std::slice::from_ref(&m1), &[int(1)]).unwrap(), m1);
        assert!(matches!(
            average_metrics(&[m1.clone(), m1.clone()], &[int(1), int(0)]),
            Err(MetricError::NonPositiveWeight { index: 1 })
        ));
        assert!(matches!(
            average_metrics(&[m1.clone(), m1.clone()], &[rat(1, 2), rat(1, 3)]),
            Err(MetricError::WeightSum(_))
        ));
        let other = FinMetric::new(labels(&["x", "y", "z"]), tri(int(1), int(1), int(1))).unwrap();
        assert_eq!(
            average_metrics(&[m1, other], &[rat(1, 2), rat(1, 2)]),
            Err(MetricError::LabelMismatch)
        );
    }

    #[test]
    fn amalgam_examples() {
        let ma = FinMetric::new(labels(&["o", "a"]), vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        let mb = FinMetric::new(labels(&["o", "b"]), vec![vec![int(0), int(2)], vec![int(2), int(0)]]).unwrap();
        let m = amalgamate_free(&ma, &mb, &labels(&["o"])).unwrap();
        assert_eq!(m.labels(), &labels(&["o", "a", "b"])[..]);
        assert_eq!(m.d(1, 2), &int(3));
        assert_eq!(m.restrict(&[0, 1]).unwrap(), ma);

        let same = amalgamate_free(&ma, &ma, &labels(&["o", "a"])).unwrap();
        assert_eq!(same, ma);

        let mc = FinMetric::new(labels(&["c", "e"]), vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        let m = amalgamate_free(&ma, &mc, &[]).unwrap();
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(m.d(i, j), &int(1));
            }
        }
    }

    #[test]
    fn amalgam_errors() {
        let ma = FinMetric::new(labels(&["o", "a"]), vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        let mb = FinMetric::new(labels(&["o", "a"]), vec![vec![int(0), int(2)], vec![int(2), int(0)]]).unwrap();
        assert!(matches!(
            amalgamate_free(&ma, &mb, &labels(&["o", "a"])),
            Err(MetricError::CommonDistanceMismatch { .. })
        ));
        assert!(matches!(
            amalgamate_free(&ma, &mb, &labels(&["o"])),
            Err(MetricError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn partial_isometry_examples() {
        let m = FinMetric::new(labels(&["p", "q", "r"]), tri(int(1), int(2), int(2))).unwrap();
        let id = PartialIsometry::identity(&[0, 1, 2]);
        assert!(check_partial_isometry(&id, &m, &m).is_ok());
        let swap = PartialIsometry::new(vec![0, 1], vec![1, 0], FixedTag::None);
        assert!(check_partial_isometry(&swap, &m, &m).is_ok());
        let bad = PartialIsometry::new(vec![0, 1], vec![0, 2], FixedTag::None);
        assert_eq!(
            check_partial_isometry(&bad, &m, &m),
            Err(IsometryError::ViolatingPair(0, 1))
        );
        let short = PartialIsometry::new(vec![0, 1], vec![0], FixedTag::None);
        assert!(matches!(
            check_partial_isometry(&short, &m, &m),
            Err(IsometryError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn incremental_row_check_matches_full_validation() {
        let mut m = FinMetric::new(labels(&["p", "q"]), vec![vec![int(0), int(2)], vec![int(2), int(0)]]).unwrap();
        assert!(m.check_new_row(&[int(1), int(4)]).is_err());
        assert!(m.check_new_row(&[int(1), int(0)]).is_err());
        let z = m.push_point("z".into(), vec![int(1), int(3)]).unwrap();
        assert_eq!(z, 2);
        assert!(validate_metric(m.labels(), m.matrix()).is_ok());
    }
}
