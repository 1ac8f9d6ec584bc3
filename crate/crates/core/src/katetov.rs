//! Katětov maps on finite spaces.
//!
//! A Katětov map `f` on a metric space satisfies
//! `|f(x) - f(y)| <= d(x,y) <= f(x) + f(y)` for all `x, y` in its domain; it
//! is the distance profile `d(z, ·)` of a possible new point `z`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::metric::{FinMetric, PointId};
use crate::rational::{abs_diff, format_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KatetovError {
    #[error("{domain} domain points but {values} values")]
    LengthMismatch { domain: usize, values: usize },
    #[error("point {0} listed twice")]
    DuplicatePoint(PointId),
    #[error("point {0} is outside the base space")]
    OutOfRange(PointId),
    #[error("negative value at point {0}")]
    NegativeValue(PointId),
    #[error("pair ({p},{q}): |{fp}-{fq}| > {d}")]
    Lipschitz {
        p: PointId,
        q: PointId,
        fp: String,
        fq: String,
        d: String,
    },
    #[error("pair ({p},{q}): {fp}+{fq} < {d}")]
    Triangle {
        p: PointId,
        q: PointId,
        fp: String,
        fq: String,
        d: String,
    },
    #[error("maps have different domains")]
    DomainMismatch,
    #[error("empty domain")]
    EmptyDomain,
    #[error("point {0} is not in the domain")]
    NotInDomain(PointId),
    #[error("weights must be nonnegative and sum to 1")]
    BadWeights,
}

impl KatetovError {
    /// True for violations of the two Katětov inequalities on a pair.
    pub fn is_pair_violation(&self) -> bool {
        matches!(self, KatetovError::Lipschitz { .. } | KatetovError::Triangle { .. })
    }
}

/// A rational-valued map on a subset of a base space's points.
///
/// The base space is not stored; every operation takes it explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KatetovMap {
    values: BTreeMap<PointId, Rat>,
}

impl KatetovMap {
    pub fn new(domain: Vec<PointId>, values: Vec<Rat>) -> Result<Self, KatetovError> {
        if domain.len() != values.len() {
            return Err(KatetovError::LengthMismatch {
                domain: domain.len(),
                values: values.len(),
            });
        }
        let mut map = BTreeMap::new();
        for (p, v) in domain.into_iter().zip(values) {
            if map.insert(p, v).is_some() {
                return Err(KatetovError::DuplicatePoint(p));
            }
        }
        Ok(KatetovMap { values: map })
    }

    /// Map defined on `0..values.len()`.
    pub fn total(values: Vec<Rat>) -> Self {
        KatetovMap {
            values: values.into_iter().enumerate().collect(),
        }
    }

    /// The distance profile `d(z, ·)` of an existing point.
    pub fn point_map(m: &FinMetric, z: PointId) -> Self {
        Self::total(m.row(z).to_vec())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (PointId, Rat)>) -> Self {
        KatetovMap {
            values: pairs.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Domain points in increasing order.
    pub fn domain(&self) -> impl Iterator<Item = PointId> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &Rat)> + '_ {
        self.values.iter().map(|(&p, v)| (p, v))
    }

    pub fn get(&self, p: PointId) -> Option<&Rat> {
        self.values.get(&p)
    }

    /// Value at `p`; panics when `p` is outside the domain.
    pub fn at(&self, p: PointId) -> &Rat {
        &self.values[&p]
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.values.contains_key(&p)
    }

    pub fn insert(&mut self, p: PointId, v: Rat) {
        self.values.insert(p, v);
    }

    pub fn same_domain(&self, other: &KatetovMap) -> bool {
        self.values.len() == other.values.len() && self.values.keys().zip(other.values.keys()).all(|(a, b)| a == b)
    }

    pub fn restrict(&self, points: &[PointId]) -> Result<KatetovMap, KatetovError> {
        let mut out = BTreeMap::new();
        for &p in points {
            let v = self.get(p).ok_or(KatetovError::NotInDomain(p))?;
            out.insert(p, v.clone());
        }
        Ok(KatetovMap { values: out })
    }

    /// Values on `points`, in that order.
    pub fn values_on(&self, points: &[PointId]) -> Result<Vec<Rat>, KatetovError> {
        points
            .iter()
            .map(|&p| self.get(p).cloned().ok_or(KatetovError::NotInDomain(p)))
            .collect()
    }

    /// Defined on every point of `m`.
    pub fn is_total(&self, m: &FinMetric) -> bool {
        self.values.len() == m.len() && self.values.keys().all(|&p| p < m.len())
    }
}

/// Checks nonnegativity, then both Katětov inequalities on every pair.
pub fn check_katetov(f: &KatetovMap, m: &FinMetric) -> Result<(), KatetovError> {
    for (p, v) in f.iter() {
        if p >= m.len() {
            return Err(KatetovError::OutOfRange(p));
        }
        if v.is_negative() {
            return Err(KatetovError::NegativeValue(p));
        }
    }
    let pts: Vec<(PointId, &Rat)> = f.iter().collect();
    for (i, &(p, fp)) in pts.iter().enumerate() {
        for &(q, fq) in &pts[i + 1..] {
            let d = m.d(p, q);
            if fp + fq < *d {
                return Err(KatetovError::Triangle {
                    p,
                    q,
                    fp: format_rat(fp),
                    fq: format_rat(fq),
                    d: format_rat(d),
                });
            }
            if abs_diff(fp, fq) > *d {
                return Err(KatetovError::Lipschitz {
                    p,
                    q,
                    fp: format_rat(fp),
                    fq: format_rat(fq),
                    d: format_rat(d),
                });
            }
        }
    }
    Ok(())
}

/// The sup-distance `max |f(x) - g(x)|` over the common domain.
pub fn sup_dist(f: &KatetovMap, g: &KatetovMap) -> Result<Rat, KatetovError> {
    if !f.same_domain(g) {
        return Err(KatetovError::DomainMismatch);
    }
    Ok(f.values
        .values()
        .zip(g.values.values())
        .map(|(a, b)| abs_diff(a, b))
        .max()
        .unwrap_or_else(Rat::zero))
}

/// Value of the Katětov extension of `f` at `x`: `min_y f(y) + d(x, y)`.
pub(crate) fn extension_value(f: &KatetovMap, m: &FinMetric, x: PointId) -> Rat {
    if let Some(v) = f.get(x) {
        return v.clone();
    }
    f.iter().map(|(y, fy)| fy + m.d(x, y)).min().expect("nonempty domain")
}

/// Extends `f` to the points in `target`, keeping the values already set.
pub fn katetov_extension_to(f: &KatetovMap, m: &FinMetric, target: &[PointId]) -> Result<KatetovMap, KatetovError> {
    if f.is_empty() {
        return Err(KatetovError::EmptyDomain);
    }
    if let Some(&p) = target.iter().find(|&&p| p >= m.len()) {
        return Err(KatetovError::OutOfRange(p));
    }
    let mut out = f.clone();
    for &x in target {
        if !out.contains(x) {
            out.insert(x, extension_value(f, m, x));
        }
    }
    Ok(out)
}

/// Extends `f` to every point of `m`.
pub fn katetov_extension(f: &KatetovMap, m: &FinMetric) -> Result<KatetovMap, KatetovError> {
    let all: Vec<PointId> = (0..m.len()).collect();
    katetov_extension_to(f, m, &all)
}

/// True iff `f(x) = min_{s in S} f(s) + d(x, s)` for every `x` in the
/// domain of `f`.
pub fn is_supported_by(f: &KatetovMap, m: &FinMetric, support: &[PointId]) -> Result<bool, KatetovError> {
    if support.is_empty() {
        return Err(KatetovError::EmptyDomain);
    }
    let restricted = f.restrict(support)?;
    Ok(f.iter().all(|(x, fx)| *fx == extension_value(&restricted, m, x)))
}

/// The Katětov map on all of `m` that agrees with `psi` on its domain and
/// takes the least possible value at `p`.
///
/// The value at `p` is `max_{y in K} |d(p,y) - psi(y)|`; the map on
/// `K ∪ {p}` is then extended to the whole space.
pub fn minimal_value_extension(psi: &KatetovMap, m: &FinMetric, p: PointId) -> Result<KatetovMap, KatetovError> {
    if psi.is_empty() {
        return Err(KatetovError::EmptyDomain);
    }
    if p >= m.len() {
        return Err(KatetovError::OutOfRange(p));
    }
    let mut tau = psi.clone();
    if !tau.contains(p) {
        let v = minimal_value_at(psi, m, p);
        tau.insert(p, v);
    }
    katetov_extension(&tau, m)
}

/// `max_{y in K} |d(p,y) - psi(y)|`.
pub fn minimal_value_at(psi: &KatetovMap, m: &FinMetric, p: PointId) -> Rat {
    psi.iter()
        .map(|(y, v)| abs_diff(m.d(p, y), v))
        .max()
        .unwrap_or_else(Rat::zero)
}

/// Pointwise convex combination. Weights must be nonnegative and sum to 1.
pub fn convex_combination(fs: &[KatetovMap], weights: &[Rat]) -> Result<KatetovMap, KatetovError> {
    let first = fs.first().ok_or(KatetovError::EmptyDomain)?;
    if weights.len() != fs.len() || weights.iter().any(|w| w.is_negative()) || !weights.iter().sum::<Rat>().is_one() {
        return Err(KatetovError::BadWeights);
    }
    if fs.iter().any(|f| !f.same_domain(first)) {
        return Err(KatetovError::DomainMismatch);
    }
    Ok(KatetovMap::from_pairs(first.domain().map(|p| {
        let v: Rat = fs.iter().zip(weights).map(|(f, w)| w * f.at(p)).sum();
        (p, v)
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn two_point(d: i64) -> FinMetric {
        FinMetric::new(
            vec!["p".into(), "q".into()],
            vec![vec![int(0), int(d)], vec![int(d), int(0)]],
        )
        .unwrap()
    }

    /// p, q, r with d(p,q)=2, d(p,r)=1, d(q,r)=2.
    fn pqr() -> FinMetric {
        FinMetric::from_fn(vec!["p".into(), "q".into(), "r".into()], |i, j| {
            match (i.min(j), i.max(j)) {
                (0, 1) => int(2),
                (0, 2) => int(1),
                _ => int(2),
            }
        })
        .unwrap()
    }

    fn map(vals: &[i64]) -> KatetovMap {
        KatetovMap::total(vals.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn check_examples() {
        let m = two_point(2);
        assert!(check_katetov(&map(&[1, 1]), &m).is_ok());
        let e = check_katetov(&map(&[0, 1]), &m).unwrap_err();
        assert!(matches!(e, KatetovError::Triangle { p: 0, q: 1, .. }));
        let e = check_katetov(&map(&[5, 1]), &m).unwrap_err();
        assert!(matches!(e, KatetovError::Lipschitz { p: 0, q: 1, .. }));
        let e = check_katetov(&map(&[-1, 1]), &m).unwrap_err();
        assert_eq!(e, KatetovError::NegativeValue(0));
        assert!(!e.is_pair_violation());
    }

    #[test]
    fn sup_dist_examples() {
        assert_eq!(sup_dist(&map(&[1, 1]), &map(&[2, 3])).unwrap(), int(2));
        assert_eq!(sup_dist(&map(&[1, 1]), &map(&[1, 1])).unwrap(), int(0));
        assert_eq!(sup_dist(&map(&[1, 1]), &map(&[1, 2])).unwrap(), int(1));
        let partial = KatetovMap::new(vec![0], vec![int(1)]).unwrap();
        assert_eq!(sup_dist(&map(&[1, 1]), &partial), Err(KatetovError::DomainMismatch));
    }

    #[test]
    fn extension_examples() {
        let m = pqr();
        let f = KatetovMap::new(vec![0, 1], vec![int(1), int(1)]).unwrap();
        let fh = katetov_extension(&f, &m).unwrap();
        assert_eq!(fh.at(2), &int(2));
        assert_eq!(fh.at(0), &int(1));
        assert!(check_katetov(&fh, &m).is_ok());

        let total = map(&[1, 1, 2]);
        assert_eq!(katetov_extension(&total, &m).unwrap(), total);

        let dp = KatetovMap::point_map(&m, 0).restrict(&[0, 1]).unwrap();
        assert_eq!(katetov_extension(&dp, &m).unwrap(), KatetovMap::point_map(&m, 0));

        assert_eq!(
            katetov_extension(&KatetovMap::default(), &m),
            Err(KatetovError::EmptyDomain)
        );
    }

    #[test]
    fn support_examples() {
        let m = pqr();
        let f = KatetovMap::new(vec![0, 1], vec![int(1), int(1)]).unwrap();
        let fh = katetov_extension(&f, &m).unwrap();
        assert!(is_supported_by(&fh, &m, &[0, 1]).unwrap());
        assert!(is_supported_by(&KatetovMap::point_map(&m, 0), &m, &[0]).unwrap());
        assert!(!is_supported_by(&map(&[1, 1]), &two_point(2), &[0]).unwrap());
        assert_eq!(is_supported_by(&fh, &m, &[]), Err(KatetovError::EmptyDomain));
    }

    /// Y = {p, q, w}, d(p,q) = 2, d(w,p) = d(w,q) = `dw`.
    fn pqw(dw: i64) -> FinMetric {
        FinMetric::from_fn(vec!["p".into(), "q".into(), "w".into()], |i, j| {
            if i.min(j) == 0 && i.max(j) == 1 {
                int(2)
            } else {
                int(dw)
            }
        })
        .unwrap()
    }

    /// Smallest value `v` on a rational grid such that `psi ∪ {p -> v}` is
    /// Katětov; independent of the closed form.
    fn brute_min_value(psi: &KatetovMap, m: &FinMetric, p: PointId) -> Rat {
        (0..=80)
            .map(|k| rat(k, 8))
            .find(|v| {
                let mut h = psi.clone();
                h.insert(p, v.clone());
                check_katetov(&h, m).is_ok()
            })
            .expect("grid covers the minimum")
    }

    #[test]
    fn minimal_value_examples() {
        let m = pqw(3);
        let psi = KatetovMap::new(vec![0, 1], vec![int(1), int(1)]).unwrap();
        let tau = minimal_value_extension(&psi, &m, 2).unwrap();
        assert_eq!(tau.at(2), &int(2));
        assert_eq!(brute_min_value(&psi, &m, 2), int(2));
        assert_eq!(tau.restrict(&[0, 1]).unwrap(), psi);

        let tau = minimal_value_extension(&psi, &m, 0).unwrap();
        assert_eq!(tau.at(0), &int(1));

        let m = pqw(1);
        let tau = minimal_value_extension(&psi, &m, 2).unwrap();
        assert_eq!(tau.at(2), &int(0));
        assert_eq!(brute_min_value(&psi, &m, 2), int(0));
    }

    #[test]
    fn convex_examples() {
        let f = map(&[1, 1]);
        let g = map(&[3, 3]);
        assert_eq!(
            convex_combination(&[f.clone(), g.clone()], &[int(1), int(0)]).unwrap(),
            f
        );
        let h = convex_combination(&[f.clone(), g.clone()], &[rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(h, map(&[2, 2]));
        assert!(check_katetov(&h, &two_point(2)).is_ok());
        assert_eq!(
            convex_combination(&[f, g], &[rat(1, 2), rat(1, 3)]),
            Err(KatetovError::BadWeights)
        );
    }
}
