//! Seeded random inputs for the property suites.
//!
//! Metrics are shortest-path closures of random weights in `{1..6}/2`, so
//! every distance is again in that set.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::extension::ExtensionSpec;
use crate::katetov::KatetovMap;
use crate::metric::{FinMetric, PointId};
use crate::rational::Rat;

/// A multiple of `1/2` in `[1/2, max_halves/2]`.
pub fn half<R: Rng>(rng: &mut R, max_halves: i64) -> Rat {
    Rat::new(rng.gen_range(1..=max_halves).into(), 2.into())
}

fn closure(w: &mut [Vec<Rat>]) {
    let n = w.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &w[i][k] + &w[k][j];
                if via < w[i][j] {
                    w[i][j] = via;
                }
            }
        }
    }
}

/// Random metric on `n` points labelled `{prefix}0..`.
pub fn metric<R: Rng>(rng: &mut R, n: usize, prefix: &str) -> FinMetric {
    let mut w = vec![vec![Rat::from_integer(0.into()); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = half(rng, 6);
            w[i][j] = v.clone();
            w[j][i] = v;
        }
    }
    closure(&mut w);
    let labels = (0..n).map(|i| format!("{prefix}{i}")).collect();
    FinMetric::new(labels, w).expect("shortest-path closure is a metric")
}

/// Random Katětov map on `domain` with values in the multiples of `1/2`,
/// each drawn from the interval the earlier values leave open.
pub fn katetov<R: Rng>(rng: &mut R, m: &FinMetric, domain: &[PointId]) -> KatetovMap {
    let mut values: Vec<Rat> = Vec::with_capacity(domain.len());
    for (i, &y) in domain.iter().enumerate() {
        let mut lo = Rat::new(1.into(), 2.into());
        let mut hi = Rat::from_integer(3.into());
        for (&z, v) in domain[..i].iter().zip(&values) {
            let d = m.d(z, y);
            lo = lo.max(d - v).max(v - d);
            hi = hi.min(v + d);
        }
        let hi = hi.max(lo.clone());
        let two = Rat::from_integer(2.into());
        let (a, b) = ((&lo * &two).to_integer(), (&hi * &two).to_integer());
        let pick: num_bigint::BigInt = if a < b {
            let span: i64 = (&b - &a).try_into().expect("small span");
            &a + rng.gen_range(0..=span)
        } else {
            a
        };
        values.push(Rat::new(pick, 2.into()));
    }
    KatetovMap::new(domain.to_vec(), values).expect("values chosen inside the Katětov interval")
}

/// Nonempty random subset of `0..n`, sorted.
pub fn subset<R: Rng>(rng: &mut R, n: usize) -> Vec<PointId> {
    loop {
        let s: Vec<PointId> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// `k` distinct points of `0..n` in random order.
pub fn distinct<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<PointId> {
    let mut all: Vec<PointId> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// A random metric on `n + m` points split into a base `x*` and a pattern
/// `a*`, returned as the joint space and the spec it induces.
pub fn spec<R: Rng>(rng: &mut R, n: usize, m: usize) -> (FinMetric, ExtensionSpec) {
    let joint = metric(rng, n + m, "p");
    let labels: Vec<String> = (0..n)
        .map(|i| format!("x{i}"))
        .chain((0..m).map(|i| format!("a{i}")))
        .collect();
    let joint = FinMetric::new(labels, joint.matrix().to_vec()).expect("relabelled");
    let base: Vec<PointId> = (0..n).collect();
    let pattern: Vec<PointId> = (n..n + m).collect();
    let spec = ExtensionSpec::from_points(&joint, &base, &pattern).expect("points of one space");
    (joint, spec)
}

/// Another valid extension of the same base by the same pattern: `spec`
/// blended, with weight in `{0, 1/4, .., 1}`, with the extension whose
/// cross distances are shortest paths through a random part `S` of the
/// base (constant `diam` when `S` is empty).
pub fn respec<R: Rng>(rng: &mut R, spec: &ExtensionSpec) -> ExtensionSpec {
    let base = spec.base();
    let through = subset(rng, base.len() + 1);
    let through: Vec<PointId> = through.into_iter().filter(|&s| s < base.len()).collect();
    let diam = base
        .diameter()
        .max(spec.pattern().diameter())
        .max(Rat::from_integer(1.into()));
    let t = Rat::new(rng.gen_range(0..=4).into(), 4.into());
    let keep = Rat::from_integer(1.into()) - &t;
    let cross = spec
        .cross()
        .iter()
        .map(|row| {
            (0..base.len())
                .map(|x| {
                    let free = through
                        .iter()
                        .map(|&s| &row[s] + base.d(s, x))
                        .min()
                        .unwrap_or_else(|| diam.clone());
                    &row[x] * &keep + free * &t
                })
                .collect()
        })
        .collect();
    ExtensionSpec::new(base.clone(), spec.pattern().clone(), cross).expect("convex combination of valid specs")
}
