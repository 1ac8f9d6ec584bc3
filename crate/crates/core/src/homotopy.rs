//! Convex-combination paths between two embeddings of a finite pattern.
//!
//! Tuples at every grid parameter are realized jointly through one
//! extension graph, so within-tuple-slot distances between samples are the
//! sup-distances of their blended rows.

use num_traits::{One, Signed, Zero};

use crate::builder::{BuildError, GrowingSpace};
use crate::extension::{ExtensionError, ExtensionGraph, ExtensionSpec, Vertex};
use crate::katetov::{convex_combination, KatetovError, KatetovMap};
use crate::metric::{FinMetric, PointId};
use crate::rational::{abs_diff, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HomotopyError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
    #[error("tuples have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("tuples are not isometric at slots {0} and {1}")]
    NotIsometric(usize, usize),
    #[error("parameter {0} is outside [0, 1]")]
    BadParameter(Rat),
    #[error("grid must increase strictly from 0 to 1")]
    BadGrid,
    #[error("anchor radius must be positive")]
    BadRadius,
    #[error("anchor index {0} is outside the tuple")]
    AnchorIndex(usize),
    #[error("{which} endpoint violates anchor {anchor}")]
    EndpointOutside { which: &'static str, anchor: usize },
    #[error("realized path breaks the within-slot distance identity")]
    ConditionB,
}

/// One constraint `d(tuple[index], target) < radius`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub index: usize,
    pub target: PointId,
    pub radius: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BasicOpenSet {
    pub anchors: Vec<Anchor>,
}

impl BasicOpenSet {
    pub fn new(anchors: Vec<Anchor>) -> Result<Self, HomotopyError> {
        if anchors.iter().any(|a| !a.radius.is_positive()) {
            return Err(HomotopyError::BadRadius);
        }
        Ok(BasicOpenSet { anchors })
    }

    /// `radius - d(tuple[index], target)` per anchor.
    pub fn margins(&self, m: &FinMetric, tuple: &[PointId]) -> Result<Vec<Rat>, HomotopyError> {
        self.anchors
            .iter()
            .map(|a| {
                let p = *tuple.get(a.index).ok_or(HomotopyError::AnchorIndex(a.index))?;
                Ok(&a.radius - m.d(p, a.target))
            })
            .collect()
    }

    pub fn contains(&self, m: &FinMetric, tuple: &[PointId]) -> Result<bool, HomotopyError> {
        Ok(self.margins(m, tuple)?.iter().all(|r| r.is_positive()))
    }
}

fn check_isometric(m: &FinMetric, a: &[PointId], b: &[PointId]) -> Result<(), HomotopyError> {
    if a.len() != b.len() {
        return Err(HomotopyError::LengthMismatch(a.len(), b.len()));
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if m.d(a[i], a[j]) != m.d(b[i], b[j]) {
                return Err(HomotopyError::NotIsometric(i, j));
            }
        }
    }
    Ok(())
}

fn blend_rows(m: &FinMetric, phi0: &[PointId], phi1: &[PointId], y: &[PointId], t: &Rat) -> Vec<Vec<Rat>> {
    let s = Rat::one() - t;
    phi0.iter()
        .zip(phi1)
        .map(|(&p, &q)| y.iter().map(|&v| &s * m.d(p, v) + t * m.d(q, v)).collect())
        .collect()
}

/// Spec over `y` whose row `i` is `(1-t) d(phi0_i, ·) + t d(phi1_i, ·)`,
/// with the internal distances of `phi0`.
pub fn blend_spec(
    m: &FinMetric,
    phi0: &[PointId],
    phi1: &[PointId],
    y: &[PointId],
    t: &Rat,
) -> Result<ExtensionSpec, HomotopyError> {
    if t.is_negative() || *t > Rat::one() {
        return Err(HomotopyError::BadParameter(t.clone()));
    }
    check_isometric(m, phi0, phi1)?;
    let base = m.restrict(y).map_err(ExtensionError::from)?;
    let pattern = m.restrict(phi0).map_err(ExtensionError::from)?;
    Ok(ExtensionSpec::new(base, pattern, blend_rows(m, phi0, phi1, y, t))?)
}

/// `k/m` for `k = 0..=m`.
pub fn uniform_grid(m: usize) -> Vec<Rat> {
    let m = m.max(1);
    (0..=m)
        .map(|k| Rat::new((k as i64).into(), (m as i64).into()))
        .collect()
}

/// One row of the modulus table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusEntry {
    pub a: usize,
    pub b: usize,
    /// `max_i d(z_i(t_a), z_i(t_b))`.
    pub realized: Rat,
    /// `|t_a - t_b| * lipschitz`.
    pub bound: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuplePath {
    pub grid: Vec<Rat>,
    pub tuples: Vec<Vec<PointId>>,
    /// Reference points the blend was computed over.
    pub reference: Vec<PointId>,
    /// `max_i max_y |d(phi0_i, y) - d(phi1_i, y)|` over the reference set.
    pub lipschitz: Rat,
    pub margins: Vec<Vec<Rat>>,
    pub modulus: Vec<ModulusEntry>,
}

impl TuplePath {
    pub fn within_open_set(&self) -> bool {
        self.margins.iter().flatten().all(|r| r.is_positive())
    }

    pub fn modulus_holds(&self) -> bool {
        self.modulus.iter().all(|e| e.realized <= e.bound)
    }
}

/// Samples the convex-combination path from `phi0` to `phi1` on `grid`.
///
/// The reference set is `y` together with the anchor targets and the
/// points of both endpoint tuples, which makes the endpoint samples equal
/// to `phi0` and `phi1`.
pub fn sample_path(
    s: &mut GrowingSpace,
    phi0: &[PointId],
    phi1: &[PointId],
    y: &[PointId],
    grid: &[Rat],
    v: &BasicOpenSet,
) -> Result<TuplePath, HomotopyError> {
    check_isometric(s.space(), phi0, phi1)?;
    if grid.first() != Some(&Rat::zero()) || grid.last() != Some(&Rat::one()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HomotopyError::BadGrid);
    }
    for (which, tuple) in [("initial", phi0), ("final", phi1)] {
        let margins = v.margins(s.space(), tuple)?;
        if let Some(anchor) = margins.iter().position(|r| !r.is_positive()) {
            return Err(HomotopyError::EndpointOutside { which, anchor });
        }
    }

    let mut reference: Vec<PointId> = Vec::new();
    for &p in y
        .iter()
        .chain(v.anchors.iter().map(|a| &a.target))
        .chain(phi0)
        .chain(phi1)
    {
        if !reference.contains(&p) {
            reference.push(p);
        }
    }
    let m = s.space().clone();
    let base = m.restrict(&reference).map_err(ExtensionError::from)?;
    let pattern = m.restrict(phi0).map_err(ExtensionError::from)?;
    let mut graph = ExtensionGraph::new(base, pattern);
    let mut vertices: Vec<Vec<Vertex>> = Vec::with_capacity(grid.len());
    for t in grid {
        let rows = blend_rows(&m, phi0, phi1, &reference, t);
        let vs = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| graph.add(i, KatetovMap::total(r)))
            .collect::<Result<Vec<_>, _>>()?;
        vertices.push(vs);
    }
    let closure = graph.closure_metric();
    graph
        .audit_condition_b(&closure)
        .map_err(|_| HomotopyError::ConditionB)?;
    let placed = s.realize_closure(&reference, &graph, &closure)?;
    let tuples: Vec<Vec<PointId>> = vertices
        .iter()
        .map(|vs| vs.iter().map(|v| placed[v]).collect())
        .collect();

    let lipschitz = phi0
        .iter()
        .zip(phi1)
        .flat_map(|(&p, &q)| reference.iter().map(move |&r| (p, q, r)))
        .map(|(p, q, r)| abs_diff(m.d(p, r), m.d(q, r)))
        .max()
        .unwrap_or_else(Rat::zero);
    let sm = s.space();
    let margins = tuples.iter().map(|t| v.margins(sm, t)).collect::<Result<Vec<_>, _>>()?;
    let mut modulus = Vec::new();
    for a in 0..tuples.len() {
        for b in (a + 1)..tuples.len() {
            let realized = tuples[a]
                .iter()
                .zip(&tuples[b])
                .map(|(&p, &q)| sm.d(p, q).clone())
                .max()
                .unwrap_or_else(Rat::zero);
            let bound = abs_diff(&grid[a], &grid[b]) * &lipschitz;
            modulus.push(ModulusEntry { a, b, realized, bound });
        }
    }
    Ok(TuplePath {
        grid: grid.to_vec(),
        tuples,
        reference,
        lipschitz,
        margins,
        modulus,
    })
}

/// Weighted blend of three maps with nonnegative weights summing to one.
pub fn partition_blend(taus: &[KatetovMap; 3], weights: &[Rat; 3]) -> Result<KatetovMap, KatetovError> {
    convex_combination(taus, weights)
}
