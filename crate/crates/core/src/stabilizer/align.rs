use num_traits::Zero;

use super::StabilizerError;
use crate::builder::GrowingSpace;
use crate::homotopy::{Anchor, BasicOpenSet};
use crate::katetov::KatetovMap;
use crate::metric::{amalgamate_free, FixedTag, PartialIsometry, PointId};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aligned {
    pub tuple: Vec<PointId>,
    pub phi: PartialIsometry,
    /// Anchors `d(psi(tuple_i), phi(tuple_i)) < epsilon / 3`.
    pub open_set: BasicOpenSet,
}

/// Moves every point of `x0` outside `a` that lies in `b` to a new point at
/// distance `epsilon / 6`, off `b`, and shrinks the neighbourhood of `phi`
/// to radius `epsilon / 3`.
pub fn align_instance(
    space: &mut GrowingSpace,
    x0: &[PointId],
    a: &[PointId],
    b: &[PointId],
    phi: &PartialIsometry,
    epsilon: &Rat,
) -> Result<Aligned, StabilizerError> {
    if !a.iter().all(|p| x0.contains(p)) {
        return Err(StabilizerError::Invalid("tuple must contain A".into()));
    }
    let offset = epsilon / Rat::from_integer(6.into());
    let mut tuple = Vec::with_capacity(x0.len());
    for &x in x0 {
        if a.contains(&x) || !b.contains(&x) {
            tuple.push(x);
            continue;
        }
        let values = (0..space.len()).map(|y| space.d(x, y) + &offset).collect();
        let z = space.realize_katetov(&KatetovMap::total(values))?;
        tuple.push(z);
    }
    let forth: Vec<PointId> = tuple.iter().copied().filter(|&p| phi.apply(p).is_none()).collect();
    let phi = space.extend_isometry(phi, &forth, &[])?;
    let radius = epsilon / Rat::from_integer(3.into());
    let anchors = tuple
        .iter()
        .enumerate()
        .map(|(index, &p)| Anchor {
            index,
            target: phi.apply(p).expect("extended"),
            radius: radius.clone(),
        })
        .collect();
    let open_set = BasicOpenSet::new(anchors).map_err(|e| StabilizerError::Invalid(e.to_string()))?;
    Ok(Aligned { tuple, phi, open_set })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Duplicate {
    pub copy: Vec<PointId>,
    /// `x -> copy`, fixing the common points.
    pub correspondence: PartialIsometry,
}

/// Realizes a copy of `x` glued to it along `common` by the free
/// amalgam, so the copy meets `x` exactly in `common`.
pub fn duplicate_over(
    space: &mut GrowingSpace,
    x: &[PointId],
    common: &[PointId],
) -> Result<Duplicate, StabilizerError> {
    if !common.iter().all(|p| x.contains(p)) {
        return Err(StabilizerError::Invalid("common points must lie in the tuple".into()));
    }
    let mx = space.space().restrict(x)?;
    let labels: Vec<String> = (0..x.len()).map(|i| format!("x{i}")).collect();
    let copy_labels: Vec<String> = x
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if common.contains(p) {
                format!("x{i}")
            } else {
                format!("y{i}")
            }
        })
        .collect();
    let left = crate::metric::FinMetric::new(labels.clone(), mx.matrix().to_vec())?;
    let right = crate::metric::FinMetric::new(copy_labels.clone(), mx.matrix().to_vec())?;
    let shared: Vec<String> = x
        .iter()
        .enumerate()
        .filter(|(_, p)| common.contains(p))
        .map(|(i, _)| format!("x{i}"))
        .collect();
    let joint = amalgamate_free(&left, &right, &shared)?;
    let fresh: Vec<usize> = (0..x.len()).filter(|&i| !common.contains(&x[i])).collect();
    let pos = |l: &str| joint.index_of(l).expect("amalgam label");
    let internal: Vec<Vec<Rat>> = fresh
        .iter()
        .map(|&i| fresh.iter().map(|&j| mx.d(i, j).clone()).collect())
        .collect();
    let cross: Vec<Vec<Rat>> = fresh
        .iter()
        .map(|&i| {
            let pi = pos(&copy_labels[i]);
            labels.iter().map(|l| joint.d(pi, pos(l)).clone()).collect()
        })
        .collect();
    let placed = space.realize_rows(x, &internal, &cross)?;
    let mut copy = x.to_vec();
    for (&i, z) in fresh.iter().zip(placed) {
        copy[i] = z;
    }
    let correspondence = PartialIsometry::new(x.to_vec(), copy.clone(), FixedTag::None);
    let m = space.space();
    crate::metric::check_partial_isometry(&correspondence, m, m)?;
    for (&p, &q) in x.iter().zip(&copy) {
        if p != q && (x.contains(&q) || m.d(p, q).is_zero()) {
            return Err(StabilizerError::Invalid(
                "copy meets the tuple outside the common points".into(),
            ));
        }
    }
    Ok(Duplicate { copy, correspondence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FinMetric;
    use crate::rational::{int, rat};
    use num_traits::Signed;

    fn oab() -> GrowingSpace {
        GrowingSpace::new(
            FinMetric::new(
                vec!["o".into(), "a".into(), "b".into()],
                vec![
                    vec![int(0), int(1), int(1)],
                    vec![int(1), int(0), int(2)],
                    vec![int(1), int(2), int(0)],
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn duplicate_examples() {
        let mut s = oab();
        let d = duplicate_over(&mut s, &[0, 1], &[0]).unwrap();
        let at = d.copy[1];
        assert_eq!(d.copy[0], 0);
        assert_eq!(s.d(0, at), &int(1));
        assert_eq!(s.d(1, at), &int(2));
        let same = duplicate_over(&mut s, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(same.copy, vec![0, 1]);
    }

    #[test]
    fn align_moves_points_off_b() {
        let mut s = oab();
        // X0 = {o, b}, A = {o}, B = {b}: b must be replaced.
        let phi = PartialIsometry::identity(&[0, 2]);
        let eps = rat(3, 10);
        let al = align_instance(&mut s, &[0, 2], &[0], &[2], &phi, &eps).unwrap();
        let moved = al.tuple[1];
        assert_ne!(moved, 2);
        assert_eq!(s.d(moved, 2), &rat(1, 20));
        assert!(s.d(moved, 2).is_positive());
        assert_eq!(al.tuple[0], 0);
        assert!(al.open_set.anchors.iter().all(|a| a.radius == rat(1, 10)));
        // unchanged when nothing overlaps
        let al = align_instance(&mut s, &[0, 1], &[0], &[2], &PartialIsometry::identity(&[0, 1]), &eps).unwrap();
        assert_eq!(al.tuple, vec![0, 1]);
    }
}
