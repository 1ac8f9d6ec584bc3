use num_traits::{Signed, Zero};

use super::{Side, StabilizerError, StabilizerInstance};
use crate::extension::{ExtensionGraph, ExtensionSpec, Vertex};
use crate::katetov::KatetovMap;
use crate::metric::{check_partial_isometry, FixedTag, PartialIsometry, PointId};
use crate::rational::Rat;

/// A new tuple together with the isometry certifying it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub tuple: Vec<PointId>,
    pub objective: Rat,
    pub certificate: PartialIsometry,
}

/// `fixed ++ from -> fixed ++ to`, skipping points of `from` that are
/// already fixed.
fn certificate(
    inst: &StabilizerInstance,
    fixed: &[PointId],
    from: &[PointId],
    to: &[PointId],
    tag: FixedTag,
) -> Result<PartialIsometry, StabilizerError> {
    let mut cert = PartialIsometry::new(fixed.to_vec(), fixed.to_vec(), tag);
    for (&x, &z) in from.iter().zip(to) {
        match cert.apply(x) {
            Some(w) if w == z => {}
            Some(_) => return Err(StabilizerError::Invalid("move displaces a fixed point".into())),
            None => cert.push(x, z),
        }
    }
    let m = inst.space.space();
    check_partial_isometry(&cert, m, m)?;
    Ok(cert)
}

fn row_over(inst: &StabilizerInstance, p: PointId, over: &[PointId]) -> KatetovMap {
    KatetovMap::total(over.iter().map(|&y| inst.space.d(p, y).clone()).collect())
}

/// Realizes a tuple with the given distance rows over `over`, placing
/// row `i` in the same extension-graph copy as `c_i` so that
/// `d(z_i, c_i)` is the sup-distance of the two rows.
pub(crate) fn realize_rows_near_target(
    inst: &mut StabilizerInstance,
    over: &[PointId],
    rows: Vec<Vec<Rat>>,
) -> Result<Vec<PointId>, StabilizerError> {
    let m = inst.space.space();
    let mut graph = ExtensionGraph::new(m.restrict(over)?, m.restrict(&inst.c)?);
    let mut known: Vec<(Vertex, PointId)> = (0..over.len()).map(|j| (Vertex::Base(j), over[j])).collect();
    let mut zv = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let cv = graph.add(i, row_over(inst, inst.c[i], over))?;
        if !known.iter().any(|(v, _)| *v == cv) {
            known.push((cv, inst.c[i]));
        }
        zv.push(graph.add(i, KatetovMap::total(row))?);
    }
    let closure = graph.closure_metric();
    graph
        .audit_condition_b(&closure)
        .map_err(|_| StabilizerError::Invalid("closure breaks within-copy distances".into()))?;
    let placed = inst.space.realize_vertices(&closure, &known)?;
    Ok(zv.iter().map(|v| placed[v]).collect())
}

/// Certified move to a tuple realizing `rows` over `over`; the rows must
/// agree with `x` on the fixed set of `side`.
pub(crate) fn move_to_rows(
    inst: &mut StabilizerInstance,
    x: &[PointId],
    side: Side,
    over: &[PointId],
    rows: Vec<Vec<Rat>>,
) -> Result<Move, StabilizerError> {
    let tuple = realize_rows_near_target(inst, over, rows)?;
    let fixed = inst.fixed(side).to_vec();
    let certificate = certificate(inst, &fixed, x, &tuple, side.tag())?;
    Ok(Move {
        objective: inst.objective(&tuple),
        tuple,
        certificate,
    })
}

/// Moves `x` by an isometry fixing `side`, bringing each `x_i` as close to
/// `c_i` as the distances to the fixed set allow:
/// `d(z_i, c_i) = max_j |d(c_i, f_j) - d(x_i, f_j)|`.
fn lemma1_move(inst: &mut StabilizerInstance, x: &[PointId], side: Side) -> Result<Move, StabilizerError> {
    let fixed = inst.fixed(side).to_vec();
    let rows = x
        .iter()
        .map(|&p| {
            row_over(inst, p, &fixed)
                .values_on(&(0..fixed.len()).collect::<Vec<_>>())
                .expect("total")
        })
        .collect();
    move_to_rows(inst, x, side, &fixed, rows)
}

/// Move by an isometry fixing `B` pointwise.
pub fn b_move(inst: &mut StabilizerInstance, x: &[PointId]) -> Result<Move, StabilizerError> {
    lemma1_move(inst, x, Side::B)
}

/// Move by an isometry fixing `A` pointwise.
pub fn a_move(inst: &mut StabilizerInstance, x: &[PointId]) -> Result<Move, StabilizerError> {
    lemma1_move(inst, x, Side::A)
}

/// Sign of the perturbation of `d(x_i, p)` that shrinks the flat witness
/// at `p`: `+1` when `d(c_i, p) - d(x_i, p) = d(c_i, x_i)`, `-1` when
/// `d(x_i, p) - d(c_i, p) = d(c_i, x_i)`.
fn witness_sign(inst: &StabilizerInstance, x: &[PointId], i: usize, p: PointId) -> Option<i32> {
    let (xi, ci) = (x[i], inst.c[i]);
    let dxc = inst.space.d(xi, ci);
    if dxc.is_zero() {
        return None;
    }
    let (dcp, dxp) = (inst.space.d(ci, p), inst.space.d(xi, p));
    if &(dcp - dxp) == dxc {
        Some(1)
    } else if &(dxp - dcp) == dxc {
        Some(-1)
    } else {
        None
    }
}

/// Flat witnesses `(i, j)` against the non-shared points of `side`.
pub(crate) fn flat_witnesses(inst: &StabilizerInstance, x: &[PointId], side: Side) -> Vec<(usize, usize)> {
    let set = inst.fixed(side);
    let mut out = Vec::new();
    for i in inst.k..inst.n() {
        for j in inst.k..set.len() {
            if witness_sign(inst, x, i, set[j]).is_some() {
                out.push((i, j));
            }
        }
    }
    out
}

/// Changes `d(x_i, s_j)` by `±delta` for each `(i, j)` in `adjust`, where
/// `s` is the tuple of `side`, keeping every other distance to
/// `A ∪ B ∪ C` and within the tuple. The certificate fixes the other side.
/// `delta` is halved until the perturbed configuration is a metric, down to
/// `delta / 2^20`; returns the move and the step used.
pub fn perturb(
    inst: &mut StabilizerInstance,
    x: &[PointId],
    side: Side,
    adjust: &[(usize, usize)],
    delta: &Rat,
) -> Result<(Move, Rat), StabilizerError> {
    let keep = side.other();
    let fixed = inst.fixed(keep).to_vec();
    if delta.is_zero() || adjust.is_empty() {
        let certificate = certificate(inst, &fixed, x, x, keep.tag())?;
        let mv = Move {
            tuple: x.to_vec(),
            objective: inst.objective(x),
            certificate,
        };
        return Ok((mv, Rat::zero()));
    }
    let set = inst.fixed(side).to_vec();
    let mut signed = Vec::with_capacity(adjust.len());
    for &(i, j) in adjust {
        let p = set[j];
        if fixed.contains(&p) {
            return Err(StabilizerError::Invalid(
                "cannot perturb a distance to a fixed point".into(),
            ));
        }
        let s = witness_sign(inst, x, i, p).ok_or(StabilizerError::NotFlat { i, x: x[i], p })?;
        signed.push((i, p, s));
    }
    let reference = inst.reference();
    let m = inst.space.space();
    let base = m.restrict(&reference)?;
    let pattern = m.restrict(x)?;
    let floor = delta / Rat::from_integer((1i64 << 20).into());
    let mut step = delta.clone();
    while step >= floor {
        let mut cross: Vec<Vec<Rat>> = x
            .iter()
            .map(|&xi| reference.iter().map(|&y| m.d(xi, y).clone()).collect())
            .collect();
        let mut positive = true;
        for &(i, p, s) in &signed {
            let col = reference.iter().position(|&y| y == p).expect("reference point");
            if s > 0 {
                cross[i][col] += &step;
            } else {
                cross[i][col] -= &step;
            }
            positive &= cross[i][col].is_positive();
        }
        if positive {
            if let Ok(spec) = ExtensionSpec::new(base.clone(), pattern.clone(), cross) {
                let tuple = inst.space.realize_spec(&reference, &spec)?;
                let certificate = certificate(inst, &fixed, x, &tuple, keep.tag())?;
                let mv = Move {
                    objective: inst.objective(&tuple),
                    tuple,
                    certificate,
                };
                return Ok((mv, step));
            }
        }
        step /= Rat::from_integer(2.into());
    }
    Err(StabilizerError::PerturbFloor)
}

/// Single-witness perturbation of `d(x_{i0}, b_{j0})`, fixing `A`.
pub fn plateau_perturb(
    inst: &mut StabilizerInstance,
    x: &[PointId],
    i0: usize,
    j0: usize,
    delta: &Rat,
) -> Result<Move, StabilizerError> {
    perturb(inst, x, Side::B, &[(i0, j0)], delta).map(|(m, _)| m)
}
