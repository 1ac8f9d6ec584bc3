#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use urykit::builder::GrowingSpace;
use urykit::extension::ExtensionSpec;
use urykit::io::{from_json, to_json, SpaceFile};
use urykit::katetov::{check_katetov, convex_combination, katetov_extension, sup_dist, KatetovMap};
use urykit::lp::{Cmp, LinearProgram, LpOutcome};
use urykit::metric::{check_partial_isometry, validate_metric, FinMetric, FixedTag, PartialIsometry, PointId};
use urykit::rational::{abs_diff, format_rat, int, parse_rat, rat, zero, Rat};
use urykit::stabilizer::{
    random_instance, stabilize, Role, StabilizerError, StabilizerInstance, Strategy as Descent, Triangle,
};

/// Shortest-path closure of pairwise weights in `{1..6}/2`.
fn metric_from(n: usize, weights: &[i64]) -> FinMetric {
    let mut d = vec![vec![zero(); n]; n];
    let mut w = weights.iter();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rat(*w.next().unwrap(), 2);
            d[i][j] = v.clone();
            d[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FinMetric::new((0..n).map(|i| format!("x{i}")).collect(), d).unwrap()
}

fn metric(max: usize) -> impl Strategy<Value = FinMetric> {
    (1..=max)
        .prop_flat_map(|n| proptest::collection::vec(1i64..=6, n * (n - 1) / 2).prop_map(move |w| metric_from(n, &w)))
}

/// Katětov map on `domain`, each value picked by `choice` among the
/// multiples of 1/2 left open by the earlier values.
fn katetov_from(m: &FinMetric, domain: &[PointId], choices: &[u8]) -> KatetovMap {
    let mut values: Vec<Rat> = Vec::new();
    for (i, &y) in domain.iter().enumerate() {
        let mut lo = rat(1, 2);
        let mut hi = int(4);
        for (&z, v) in domain[..i].iter().zip(&values) {
            lo = lo.max(abs_diff(m.d(z, y), v));
            hi = hi.min(v + m.d(z, y));
        }
        let (a, b) = ((lo * int(2)).ceil().to_integer(), (hi * int(2)).floor().to_integer());
        let span: i64 = (&b - &a).try_into().unwrap();
        let pick = if span > 0 {
            &a + i64::from(choices[i]) % (span + 1)
        } else {
            a
        };
        values.push(Rat::new(pick, 2.into()));
    }
    KatetovMap::new(domain.to_vec(), values).unwrap()
}

/// A space with two Katětov maps on a common nonempty domain.
fn space_and_maps() -> impl Strategy<Value = (FinMetric, KatetovMap, KatetovMap)> {
    metric(6).prop_flat_map(|m| {
        let n = m.len();
        (
            Just(m),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<u8>(), n),
            proptest::collection::vec(any::<u8>(), n),
        )
            .prop_map(|(m, mask, cf, cg)| {
                let mut dom: Vec<PointId> = (0..m.len()).filter(|&i| mask[i]).collect();
                if dom.is_empty() {
                    dom.push(0);
                }
                let f = katetov_from(&m, &dom, &cf);
                let g = katetov_from(&m, &dom, &cg);
                (m, f, g)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rationals_round_trip(n in any::<i64>(), d in 1i64..1_000_000) {
        let r = rat(n, d);
        prop_assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
    }

    #[test]
    fn closures_are_metrics_and_serialize_exactly(m in metric(7)) {
        prop_assert!(validate_metric(m.labels(), m.matrix()).is_ok());
        let back: SpaceFile = from_json(&to_json(&SpaceFile::from_metric(&m))).unwrap();
        prop_assert_eq!(back.to_metric().unwrap(), m);
    }

    #[test]
    fn extension_is_a_katetov_isometry((m, f, g) in space_and_maps()) {
        let fe = katetov_extension(&f, &m).unwrap();
        let ge = katetov_extension(&g, &m).unwrap();
        prop_assert!(check_katetov(&fe, &m).is_ok());
        for (p, v) in f.iter() {
            prop_assert_eq!(fe.at(p), v);
        }
        prop_assert_eq!(sup_dist(&fe, &ge).unwrap(), sup_dist(&f, &g).unwrap());
    }

    #[test]
    fn convex_combinations_stay_katetov((m, f, g) in space_and_maps(), t in 0i64..=12) {
        let h = convex_combination(&[f, g], &[rat(t, 12), rat(12 - t, 12)]).unwrap();
        prop_assert!(check_katetov(&h, &m).is_ok());
    }

    #[test]
    fn realization_matches_and_dedups((m, f, _) in space_and_maps()) {
        let mut s = GrowingSpace::new(m.clone());
        let z = s.realize_katetov(&f).unwrap();
        for (p, v) in f.iter() {
            prop_assert_eq!(s.d(z, p), v);
        }
        // An existing point comes back exactly when the extended map is its row.
        let before = s.len();
        let fe = katetov_extension(&f, s.space()).unwrap();
        let w = s.realize_katetov(&f).unwrap();
        let row_match = (0..before).find(|&p| (0..before).all(|q| s.d(p, q) == fe.at(q)));
        prop_assert_eq!(w < before, row_match.is_some());
        for p in 0..before {
            prop_assert_eq!(s.realize_katetov(&KatetovMap::point_map(s.space(), p)).unwrap(), p);
        }
        prop_assert!(validate_metric(s.space().labels(), s.space().matrix()).is_ok());
        for p in 0..m.len() {
            for q in 0..m.len() {
                prop_assert_eq!(s.d(p, q), m.d(p, q));
            }
        }
    }

    #[test]
    fn spec_of_a_tuple_realizes_isometrically(m in metric(7), split in 1usize..7) {
        prop_assume!(m.len() >= 2);
        let split = split.min(m.len() - 1);
        let base: Vec<PointId> = (0..split).collect();
        let tuple: Vec<PointId> = (split..m.len()).collect();
        let spec = ExtensionSpec::from_points(&m, &base, &tuple).unwrap();
        let mut s = GrowingSpace::new(m.clone());
        let placed = s.realize_spec(&base, &spec).unwrap();
        for (i, &z) in placed.iter().enumerate() {
            for (x, &b) in base.iter().enumerate() {
                prop_assert_eq!(s.d(z, b), &spec.cross()[i][x]);
            }
            for (j, &w) in placed.iter().enumerate() {
                prop_assert_eq!(s.d(z, w), m.d(tuple[i], tuple[j]));
            }
        }
    }

    #[test]
    fn back_and_forth_extends((m, f, _) in space_and_maps(), rot in 0usize..6) {
        // A second copy of the domain realized through `f` gives a
        // nontrivial isometry between the copy and the domain's profile.
        let mut s = GrowingSpace::new(m.clone());
        let z = s.realize_katetov(&f).unwrap();
        let dom: Vec<PointId> = f.domain().collect();
        let mut phi = PartialIsometry::identity(&dom);
        phi.push(z, z);
        let n = m.len();
        let forth: Vec<PointId> = (0..n).map(|i| (i + rot) % n).collect();
        let back = forth.clone();
        let ext = s.extend_isometry(&phi, &forth, &back).unwrap();
        prop_assert!(check_partial_isometry(&ext, s.space(), s.space()).is_ok());
        for (&p, &q) in phi.domain.iter().zip(&phi.range) {
            prop_assert_eq!(ext.apply(p), Some(q));
        }
        for &p in &forth {
            prop_assert!(ext.apply(p).is_some());
        }
        for &w in &back {
            prop_assert!(ext.range.contains(&w));
        }
    }

    #[test]
    fn lp_matches_vertex_enumeration(
        rows in proptest::collection::vec((-3i64..=3, -3i64..=3, 0i64..=6), 1..5),
        c in (1i64..=4, 1i64..=4),
    ) {
        // maximize c.x subject to rows a x + b y <= r and 0 <= x, y <= 5.
        let mut all: Vec<(Rat, Rat, Rat)> = rows.iter().map(|&(a, b, r)| (int(a), int(b), int(r))).collect();
        all.push((int(1), int(0), int(5)));
        all.push((int(0), int(1), int(5)));
        all.push((int(-1), int(0), zero()));
        all.push((int(0), int(-1), zero()));
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, int(c.0));
        lp.set_objective(1, int(c.1));
        for (a, b, r) in &all {
            lp.constrain(vec![(0, a.clone()), (1, b.clone())], Cmp::Le, r.clone());
        }
        let feasible = |x: &Rat, y: &Rat| all.iter().all(|(a, b, r)| a * x + b * y <= *r);
        let mut best: Option<Rat> = None;
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                let (a1, b1, r1) = &all[i];
                let (a2, b2, r2) = &all[j];
                let det = a1 * b2 - a2 * b1;
                if det == zero() {
                    continue;
                }
                let x = (r1 * b2 - r2 * b1) / &det;
                let y = (a1 * r2 - a2 * r1) / &det;
                if feasible(&x, &y) {
                    let v = int(c.0) * &x + int(c.1) * &y;
                    if best.as_ref().is_none_or(|b| v > *b) {
                        best = Some(v);
                    }
                }
            }
        }
        match (lp.maximize(), best) {
            (LpOutcome::Optimal { value, x }, Some(b)) => {
                prop_assert_eq!(&value, &b);
                prop_assert!(feasible(&x[0], &x[1]));
            }
            (LpOutcome::Infeasible, None) => {}
            (other, b) => prop_assert!(false, "lp {:?} vs enumeration {:?}", other, b),
        }
    }
}

/// Whether the triangle is flat for every admissible target: its one
/// free edge, from a non-shared target point to a point of `A ∪ B`, is
/// pinned by the triangle inequalities through the shared points, and the
/// pinned value is flat.
fn forced_flat(inst: &StabilizerInstance, t: &Triangle) -> bool {
    let m = inst.space.space();
    let shared = &inst.a[..inst.k];
    // Distance from the target slot q to y when it is fixed for every target.
    let fixed_to = |q: usize, y: PointId| -> Option<Rat> {
        if q < inst.k {
            return Some(m.d(inst.a[q], y).clone());
        }
        shared
            .iter()
            .position(|&s| s == y)
            .map(|p| m.d(inst.a[q], inst.a[p]).clone())
    };
    let point = |r: Role| match r {
        Role::A(i) => inst.a[i],
        Role::B(i) => inst.b[i],
        Role::C(i) => inst.c[i],
    };
    let mut edges = Vec::new();
    let mut free = Vec::new();
    for (u, v) in [(0, 1), (1, 2), (0, 2)] {
        let (ru, rv) = (t.roles[u], t.roles[v]);
        let d = match (ru, rv) {
            (Role::C(q), Role::C(r)) => Some(m.d(inst.a[q], inst.a[r]).clone()),
            (Role::C(q), o) | (o, Role::C(q)) => fixed_to(q, point(o)),
            _ => Some(m.d(point(ru), point(rv)).clone()),
        };
        match d {
            Some(d) => edges.push(d),
            None => free.push((ru, rv)),
        }
    }
    let [(ru, rv)] = free[..] else { return false };
    let (q, y) = match (ru, rv) {
        (Role::C(q), o) | (o, Role::C(q)) => (q, point(o)),
        _ => return false,
    };
    let lo = shared.iter().map(|&s| abs_diff(m.d(inst.a[q], s), m.d(y, s))).max();
    let hi = shared.iter().map(|&s| m.d(inst.a[q], s) + m.d(y, s)).min();
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo == hi => {
            edges.push(lo);
            let (x, y, z) = (&edges[0], &edges[1], &edges[2]);
            x + y == *z || x + z == *y || y + z == *x
        }
        _ => false,
    }
}

#[test]
fn forced_flat_instance_is_certified() {
    let mut inst = random_instance(8559387686524852439, rat(1, 100)).unwrap();
    match stabilize(&mut inst, 10_000, Descent::Steered) {
        Err(StabilizerError::NoWitness(t)) => assert!(forced_flat(&inst, &t)),
        other => panic!(
            "expected a forced flat triangle, got {:?}",
            other.map(|o| o.within_epsilon)
        ),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn descent_traces_are_monotone_chained_and_tagged(seed in any::<u64>()) {
        let mut inst = random_instance(seed, rat(1, 100)).unwrap();
        let out = match stabilize(&mut inst, 10_000, Descent::Steered) {
            Ok(out) => out,
            Err(StabilizerError::NoWitness(t)) => {
                prop_assert!(forced_flat(&inst, &t), "unforced triangle reported: {}", t);
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let m = inst.space.space();
        prop_assert!(out.trace.is_monotone());
        prop_assert!(out.trace.is_chained());
        for step in &out.trace.steps {
            prop_assert!(check_partial_isometry(&step.certificate, m, m).is_ok());
            let fixed = match step.certificate.fixed_tag {
                FixedTag::FixesA => &inst.a,
                FixedTag::FixesB => &inst.b,
                FixedTag::None => {
                    prop_assert!(false, "untagged certificate");
                    unreachable!()
                }
            };
            prop_assert!(step.certificate.fixes_all(fixed));
        }
        if out.trace.converged {
            prop_assert!(out.errors.iter().all(|e| *e <= rat(1, 100)));
        }
    }
}
