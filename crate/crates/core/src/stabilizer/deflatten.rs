use num_traits::{One, Signed, Zero};

use super::{triangle_families, Role, StabilizerError, StabilizerInstance, Triangle};
use crate::extension::{ExtensionGraph, Vertex};
use crate::katetov::KatetovMap;
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::metric::{is_flat_triple, PointId};
use crate::rational::{abs_diff, Rat};

fn point_of(inst: &StabilizerInstance, r: Role) -> PointId {
    match r {
        Role::A(p) => inst.a[p],
        Role::B(p) => inst.b[p],
        Role::C(q) => inst.c[q],
    }
}

/// Flat triangles of the deflattening families for the current target.
pub fn flat_triangles(inst: &StabilizerInstance) -> Vec<Triangle> {
    let m = inst.space.space();
    triangle_families(inst.n(), inst.b.len(), inst.k)
        .into_iter()
        .filter_map(|roles| {
            let points = roles.map(|r| point_of(inst, r));
            let [x, y, z] = points;
            is_flat_triple(m.d(x, y), m.d(y, z), m.d(x, z)).then_some(Triangle { roles, points })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeflattenReport {
    pub original: Vec<PointId>,
    pub flat_before: Vec<Triangle>,
    /// Smallest slack of the witness over the flat triangles.
    pub witness_slack: Option<Rat>,
    /// Blend weight given to the witness.
    pub weight: Rat,
    pub moved: Vec<Rat>,
}

/// A distance in the witness program: constant plus at most one variable.
#[derive(Clone)]
enum Dist {
    Known(Rat),
    Var(usize),
}

/// Node of the witness program: a point of `A ∪ B` or a free target point.
#[derive(Clone, Copy, PartialEq)]
enum Node {
    Y(usize),
    U(usize),
}

struct WitnessProgram {
    ys: Vec<PointId>,
    free: Vec<usize>,
    /// Distances among the target points.
    pattern: Vec<Vec<Rat>>,
    base: Vec<Vec<Rat>>,
    /// `shared[j] = Some(p)` when `ys[j]` is the shared point `a_p`.
    shared: Vec<Option<usize>>,
    k: usize,
}

impl WitnessProgram {
    fn new(inst: &StabilizerInstance) -> Self {
        let m = inst.space.space();
        let mut ys: Vec<PointId> = Vec::new();
        for &p in inst.a.iter().chain(&inst.b) {
            if !ys.contains(&p) {
                ys.push(p);
            }
        }
        let base = ys
            .iter()
            .map(|&p| ys.iter().map(|&q| m.d(p, q).clone()).collect())
            .collect();
        let pattern = inst
            .a
            .iter()
            .map(|&p| inst.a.iter().map(|&q| m.d(p, q).clone()).collect())
            .collect();
        let shared = ys
            .iter()
            .map(|y| inst.a[..inst.k].iter().position(|a| a == y))
            .collect();
        WitnessProgram {
            shared,
            ys,
            free: (inst.k..inst.n()).collect(),
            pattern,
            base,
            k: inst.k,
        }
    }

    fn var(&self, u: usize, y: usize) -> usize {
        u * self.ys.len() + y
    }

    fn slack_var(&self) -> usize {
        self.free.len() * self.ys.len()
    }

    fn node(&self, inst: &StabilizerInstance, r: Role) -> Node {
        match r {
            Role::C(q) if q >= self.k => Node::U(q - self.k),
            other => {
                let p = point_of(inst, other);
                Node::Y(self.ys.iter().position(|&y| y == p).expect("point of A ∪ B"))
            }
        }
    }

    fn dist(&self, x: Node, y: Node) -> Dist {
        match (x, y) {
            (Node::Y(i), Node::Y(j)) => Dist::Known(self.base[i][j].clone()),
            (Node::U(u), Node::Y(j)) | (Node::Y(j), Node::U(u)) => match self.shared[j] {
                Some(p) => Dist::Known(self.pattern[self.free[u]][p].clone()),
                None => Dist::Var(self.var(u, j)),
            },
            (Node::U(u), Node::U(v)) => Dist::Known(self.pattern[self.free[u]][self.free[v]].clone()),
        }
    }

    /// Adds `d(p,q) + d(q,r) - d(p,r) >= t_coeff * t`.
    fn add_inequality(&self, lp: &mut LinearProgram, p: Node, q: Node, r: Node, with_slack: bool) {
        let mut coeffs: Vec<(usize, Rat)> = Vec::new();
        let mut constant = Rat::zero();
        for (d, sign) in [(self.dist(p, q), 1), (self.dist(q, r), 1), (self.dist(p, r), -1)] {
            let s = Rat::from_integer(sign.into());
            match d {
                Dist::Known(v) => constant += v * &s,
                Dist::Var(i) => coeffs.push((i, s)),
            }
        }
        if coeffs.is_empty() && !with_slack {
            return;
        }
        if with_slack {
            coeffs.push((self.slack_var(), -Rat::one()));
        }
        lp.constrain(coeffs, Cmp::Ge, -constant);
    }

    /// Maximizes the smallest slack over `targets` among extensions of
    /// `A ∪ B` by a copy of the pattern that keeps the shared points.
    fn solve(&self, inst: &StabilizerInstance, targets: &[[Role; 3]]) -> Option<(Rat, Vec<Vec<Rat>>)> {
        let nv = self.slack_var() + 1;
        let mut lp = LinearProgram::new(nv);
        let t = self.slack_var();
        lp.set_objective(t, Rat::one());
        lp.constrain(vec![(t, Rat::one())], Cmp::Le, Rat::one());
        let mut nodes: Vec<Node> = (0..self.ys.len()).map(Node::Y).collect();
        nodes.extend((0..self.free.len()).map(Node::U));
        for u in 0..self.free.len() {
            for j in (0..self.ys.len()).filter(|&j| self.shared[j].is_none()) {
                lp.constrain(
                    vec![(self.var(u, j), Rat::one()), (t, -Rat::one())],
                    Cmp::Ge,
                    Rat::zero(),
                );
            }
        }
        let target_nodes: Vec<[Node; 3]> = targets.iter().map(|roles| roles.map(|r| self.node(inst, r))).collect();
        let is_target = |a: Node, b: Node, c: Node| {
            target_nodes
                .iter()
                .any(|tn| tn.contains(&a) && tn.contains(&b) && tn.contains(&c))
        };
        let n = nodes.len();
        for i in 0..n {
            for j in (i + 1)..n {
                for l in (j + 1)..n {
                    let (a, b, c) = (nodes[i], nodes[j], nodes[l]);
                    if [a, b, c].iter().all(|x| matches!(x, Node::Y(_))) {
                        continue;
                    }
                    let slack = is_target(a, b, c);
                    self.add_inequality(&mut lp, a, b, c, slack);
                    self.add_inequality(&mut lp, b, a, c, slack);
                    self.add_inequality(&mut lp, a, c, b, slack);
                }
            }
        }
        let LpOutcome::Optimal { value, x } = lp.maximize() else {
            return None;
        };
        if !value.is_positive() {
            return None;
        }
        let m = inst.space.space();
        let rows = (0..inst.n())
            .map(|q| {
                if q < self.k {
                    self.ys.iter().map(|&y| m.d(inst.a[q], y).clone()).collect()
                } else {
                    (0..self.ys.len())
                        .map(|y| match self.shared[y] {
                            Some(p) => self.pattern[q][p].clone(),
                            None => x[self.var(q - self.k, y)].clone(),
                        })
                        .collect()
                }
            })
            .collect();
        Some((value, rows))
    }
}

/// Replaces the target by a nearby one (each point moves at most `delta`)
/// for which no triangle of the deflattening families is flat.
///
/// A single witness configuration making every flat triangle non-flat at
/// once is found by an exact linear program; the new target blends the old
/// target with it and is realized through an extension graph that keeps
/// each new point in the copy of its old one.
pub fn deflatten(inst: &mut StabilizerInstance, delta: &Rat) -> Result<DeflattenReport, StabilizerError> {
    if !delta.is_positive() {
        return Err(StabilizerError::Invalid("delta must be positive".into()));
    }
    let original = inst.c.clone();
    let flat_before = flat_triangles(inst);
    let unchanged = |flat_before| DeflattenReport {
        original: original.clone(),
        flat_before,
        witness_slack: None,
        weight: Rat::zero(),
        moved: vec![Rat::zero(); original.len()],
    };
    if flat_before.is_empty() {
        return Ok(unchanged(flat_before));
    }
    let program = WitnessProgram::new(inst);
    let roles: Vec<[Role; 3]> = flat_before.iter().map(|t| t.roles).collect();
    let Some((slack, witness)) = program.solve(inst, &roles) else {
        // Name the first triangle that has no witness of its own.
        let culprit = flat_before
            .iter()
            .find(|t| program.solve(inst, &[t.roles]).is_none())
            .unwrap_or(&flat_before[0]);
        return Err(StabilizerError::NoWitness(culprit.clone()));
    };

    let m = inst.space.space();
    let ys = program.ys.clone();
    let current: Vec<Vec<Rat>> = inst
        .c
        .iter()
        .map(|&c| ys.iter().map(|&y| m.d(c, y).clone()).collect())
        .collect();
    let maxdiff = current
        .iter()
        .flatten()
        .zip(witness.iter().flatten())
        .map(|(a, b)| abs_diff(a, b))
        .max()
        .unwrap_or_else(Rat::zero);
    let half = Rat::new(1.into(), 2.into());
    let weight = if maxdiff.is_zero() {
        half.clone()
    } else {
        (delta / &maxdiff).min(half)
    };
    let blended: Vec<Vec<Rat>> = current
        .iter()
        .zip(&witness)
        .map(|(c, w)| {
            c.iter()
                .zip(w)
                .map(|(cv, wv)| (Rat::one() - &weight) * cv + &weight * wv)
                .collect()
        })
        .collect();

    let mut graph = ExtensionGraph::new(m.restrict(&ys)?, m.restrict(&inst.c)?);
    let mut known: Vec<(Vertex, PointId)> = (0..ys.len()).map(|j| (Vertex::Base(j), ys[j])).collect();
    let mut new_vertices = Vec::with_capacity(inst.n());
    for q in 0..inst.n() {
        let cv = graph.add(q, KatetovMap::total(current[q].clone()))?;
        if !known.iter().any(|(v, _)| *v == cv) {
            known.push((cv, inst.c[q]));
        }
        new_vertices.push(graph.add(q, KatetovMap::total(blended[q].clone()))?);
    }
    let closure = graph.closure_metric();
    graph
        .audit_condition_b(&closure)
        .map_err(|_| StabilizerError::Invalid("closure breaks within-copy distances".into()))?;
    let placed = inst.space.realize_vertices(&closure, &known)?;
    let new_c: Vec<PointId> = new_vertices.iter().map(|v| placed[v]).collect();
    let moved = new_c
        .iter()
        .zip(&original)
        .map(|(&p, &q)| inst.space.d(p, q).clone())
        .collect();
    inst.c = new_c;
    inst.validate()?;
    let remaining = flat_triangles(inst);
    if let Some(t) = remaining.into_iter().next() {
        return Err(StabilizerError::NoWitness(t));
    }
    Ok(DeflattenReport {
        original,
        flat_before,
        witness_slack: Some(slack),
        weight,
        moved,
    })
}
