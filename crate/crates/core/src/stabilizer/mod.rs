//! Approximating a target tuple by words in the pointwise stabilizers of
//! two finite sets.
//!
//! Given finite tuples `A`, `B` sharing their first `k` points and a target
//! `C` isometric to `A` with `c_i = a_i` for `i < k`, the descent builds a
//! word of partial isometries, each fixing `A` or `B` pointwise, that moves
//! `A` close to `C`.

mod align;
mod deflatten;
mod descent;
mod displacement;
mod moves;

pub use align::{align_instance, duplicate_over, Aligned, Duplicate};
pub use deflatten::{deflatten, flat_triangles, DeflattenReport};
pub use descent::{
    compose_word, descend, stabilize, DescentConfig, DescentTrace, MoveTag, StabilizeOutcome, Strategy, TraceStep,
};
pub use displacement::{displacement_audit, extend_word_to, DisplacementReport, GeneratorCheck};
pub use moves::{a_move, b_move, perturb, plateau_perturb, Move};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builder::{BuildError, GrowingSpace};
use crate::extension::ExtensionError;
use crate::katetov::KatetovMap;
use crate::metric::{FinMetric, FixedTag, IsometryError, MetricError, PointId};
use crate::rational::{int, rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StabilizerError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("certificate: {0}")]
    Isometry(#[from] IsometryError),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("every admissible target keeps the triangle {0} flat")]
    NoWitness(Triangle),
    #[error("triangle ({x}, c_{i}, {p}) is not flat")]
    NotFlat { i: usize, x: PointId, p: PointId },
    #[error("no valid perturbation down to the step floor")]
    PerturbFloor,
    #[error("no flat witness to perturb")]
    NotPlateau,
    #[error("generator {step} is undefined at the current point")]
    DomainGap { step: usize },
    #[error("generator {step} has no fixed-set tag")]
    Untagged { step: usize },
    #[error("generator {step} does not fix its tagged set")]
    NotFixing { step: usize },
}

impl StabilizerError {
    /// The instance itself is out of reach, as opposed to a failed
    /// internal check: some flat triangle is forced by the fixed distances.
    pub fn rejects_instance(&self) -> bool {
        matches!(self, StabilizerError::NoWitness(_))
    }
}

/// Which of the two sets a move keeps fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    pub fn tag(self) -> FixedTag {
        match self {
            Side::A => FixedTag::FixesA,
            Side::B => FixedTag::FixesB,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StabilizerInstance {
    pub space: GrowingSpace,
    pub a: Vec<PointId>,
    pub b: Vec<PointId>,
    /// `a[i] == b[i]` exactly for `i < k`.
    pub k: usize,
    pub c: Vec<PointId>,
    pub epsilon: Rat,
}

impl StabilizerInstance {
    pub fn new(
        space: GrowingSpace,
        a: Vec<PointId>,
        b: Vec<PointId>,
        c: Vec<PointId>,
        k: usize,
        epsilon: Rat,
    ) -> Result<Self, StabilizerError> {
        let inst = StabilizerInstance {
            space,
            a,
            b,
            k,
            c,
            epsilon,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance from unordered sets, moving the common points of
    /// `a` and `b` to the front. `c` follows `a`'s order.
    pub fn from_sets(
        space: GrowingSpace,
        a: &[PointId],
        b: &[PointId],
        c: &[PointId],
        epsilon: Rat,
    ) -> Result<Self, StabilizerError> {
        if a.len() != c.len() {
            return Err(StabilizerError::Invalid("A and C differ in length".into()));
        }
        let mut order: Vec<usize> = (0..a.len()).filter(|&i| b.contains(&a[i])).collect();
        let k = order.len();
        order.extend((0..a.len()).filter(|&i| !b.contains(&a[i])));
        let na: Vec<PointId> = order.iter().map(|&i| a[i]).collect();
        let nc: Vec<PointId> = order.iter().map(|&i| c[i]).collect();
        let mut nb: Vec<PointId> = na[..k].to_vec();
        nb.extend(b.iter().filter(|p| !na[..k].contains(p)));
        Self::new(space, na, nb, nc, k, epsilon)
    }

    fn validate(&self) -> Result<(), StabilizerError> {
        let bad = |s: &str| Err(StabilizerError::Invalid(s.into()));
        let m = self.space.space();
        let n = m.len();
        if self.a.is_empty() {
            return bad("A is empty");
        }
        if self.a.len() != self.c.len() {
            return bad("A and C differ in length");
        }
        if self.k > self.a.len() || self.k > self.b.len() {
            return bad("overlap exceeds a tuple length");
        }
        if self.a.iter().chain(&self.b).chain(&self.c).any(|&p| p >= n) {
            return bad("point out of range");
        }
        if !self.epsilon.is_positive() {
            return bad("epsilon must be positive");
        }
        for (set, name) in [(&self.a, "A"), (&self.b, "B"), (&self.c, "C")] {
            for i in 0..set.len() {
                if set[..i].contains(&set[i]) {
                    return Err(StabilizerError::Invalid(format!("{name} repeats a point")));
                }
            }
        }
        for i in 0..self.a.len() {
            for j in 0..self.b.len() {
                if (self.a[i] == self.b[j]) != (i == j && i < self.k) {
                    return bad("A and B must share exactly their first k points");
                }
            }
        }
        for i in 0..self.k {
            if self.c[i] != self.a[i] {
                return bad("target must fix the shared points");
            }
        }
        for i in 0..self.a.len() {
            for j in 0..self.a.len() {
                if m.d(self.a[i], self.a[j]) != m.d(self.c[i], self.c[j]) {
                    return bad("C is not isometric to A");
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn fixed(&self, side: Side) -> &[PointId] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    /// `F(x) = sum_i d(x_i, c_i)`.
    pub fn objective(&self, x: &[PointId]) -> Rat {
        x.iter().zip(&self.c).map(|(&p, &q)| self.space.d(p, q).clone()).sum()
    }

    /// `A ∪ B ∪ C` without repeats, in that order.
    pub fn reference(&self) -> Vec<PointId> {
        let mut out = Vec::new();
        for &p in self.a.iter().chain(&self.b).chain(&self.c) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

/// A vertex of a triangle by its role in the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    A(usize),
    B(usize),
    C(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    pub roles: [Role; 3],
    pub points: [PointId; 3],
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Role::A(i) => write!(f, "a_{i}"),
            Role::B(i) => write!(f, "b_{i}"),
            Role::C(i) => write!(f, "c_{i}"),
        }
    }
}

impl std::fmt::Display for Triangle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [r, s, t] = &self.roles;
        let [p, q, u] = &self.points;
        write!(f, "{{{r}, {s}, {t}}} at points {p}, {q}, {u}")
    }
}

/// Triangles through a non-shared target point that deflattening must
/// make non-flat: `{a_p, c_q, b_r}`, `{a_p, c_q, c_r}`, `{b_p, c_q, c_r}`,
/// `{a_p, c_q, a_r}` and `{b_p, c_q, b_r}`, skipping those whose other two
/// vertices are both shared points.
pub(crate) fn triangle_families(n: usize, m: usize, k: usize) -> Vec<[Role; 3]> {
    // Shared points are named through A.
    let norm = |r: Role| match r {
        Role::B(p) if p < k => Role::A(p),
        Role::C(p) if p < k => Role::A(p),
        other => other,
    };
    let shared = |r: Role| matches!(r, Role::A(p) if p < k);
    let mut out: Vec<[Role; 3]> = Vec::new();
    let mut push = |x: Role, y: Role, z: Role| {
        let mut t = [norm(x), norm(y), norm(z)];
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return;
        }
        let others: Vec<Role> = t.iter().copied().filter(|r| !matches!(r, Role::C(_))).collect();
        let cs = t.iter().filter(|r| matches!(r, Role::C(_))).count();
        if cs == 1 && others.iter().all(|&r| shared(r)) {
            return;
        }
        t.sort();
        if !out.contains(&t) {
            out.push(t);
        }
    };
    for q in k..n {
        for p in 0..n {
            for r in 0..m {
                push(Role::A(p), Role::C(q), Role::B(r));
            }
            for r in 0..n {
                push(Role::A(p), Role::C(q), Role::A(r));
            }
        }
        for p in 0..m {
            for r in 0..m {
                push(Role::B(p), Role::C(q), Role::B(r));
            }
        }
        for r in 0..n {
            for p in k..n {
                push(Role::A(p), Role::C(q), Role::C(r));
            }
            for p in k..m {
                push(Role::B(p), Role::C(q), Role::C(r));
            }
        }
    }
    out
}

/// Random instance for the empirical suites: `|A|, |B| <= 3`, distances
/// from `{1, 3/2, 2, 3}`.
pub fn random_instance(seed: u64, epsilon: Rat) -> Result<StabilizerInstance, StabilizerError> {
    if !epsilon.is_positive() {
        return Err(StabilizerError::Invalid("epsilon must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = [int(1), rat(3, 2), int(2), int(3)];
    loop {
        let n = rng.gen_range(1..=3usize);
        let m = rng.gen_range(1..=3usize);
        let k = rng.gen_range(0..=n.min(m).min(n - 1));
        let size = n + m - k;
        // Rejection-sample a metric on A ∪ B.
        let Some(base) = (0..200).find_map(|_| {
            let mut d = vec![vec![Rat::zero(); size]; size];
            for i in 0..size {
                for j in (i + 1)..size {
                    let v = values[rng.gen_range(0..values.len())].clone();
                    d[i][j] = v.clone();
                    d[j][i] = v;
                }
            }
            let labels = (0..size).map(|i| format!("p{i}")).collect();
            FinMetric::new(labels, d).ok()
        }) else {
            continue;
        };
        let a: Vec<PointId> = (0..n).collect();
        let b: Vec<PointId> = (0..k).chain(n..size).collect();
        let mut space = GrowingSpace::new(base);
        // Target rows for the non-shared points of C over A ∪ B.
        let mut c: Vec<PointId> = a[..k].to_vec();
        let mut ok = true;
        for i in k..n {
            let placed = (0..100).find_map(|_| {
                let mut f = KatetovMap::default();
                for y in 0..size {
                    f.insert(y, values[rng.gen_range(0..values.len())].clone());
                }
                for (j, &cj) in c.iter().enumerate() {
                    f.insert(cj, space.d(a[i], a[j]).clone());
                }
                for j in 0..k {
                    f.insert(a[j], space.d(a[i], a[j]).clone());
                }
                crate::katetov::check_katetov(&f, space.space()).ok()?;
                let z = space.realize_katetov(&f).ok()?;
                (!c.contains(&z)).then_some(z)
            });
            match placed {
                Some(z) => c.push(z),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if let Ok(inst) = StabilizerInstance::new(space, a, b, c, k, epsilon.clone()) {
            return Ok(inst);
        }
    }
}
