//! Seeded property suites behind `urykit check`.
//!
//! Every property runs `budget` independent cases from its own ChaCha
//! stream, so a report depends only on the seed and the budget. The first
//! failing case is kept as a JSON counterexample.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::builder::GrowingSpace;
use crate::extension::{embed_into, spec_from_closure, ExtensionGraph, Vertex};
use crate::homotopy::{sample_path, uniform_grid, Anchor, BasicOpenSet};
use crate::io::{labels, IsometryFile, MapFile, SpaceFile};
use crate::katetov::{check_katetov, convex_combination, katetov_extension, KatetovError, KatetovMap};
use crate::metric::{check_partial_isometry, FinMetric, FixedTag, PartialIsometry, PointId};
use crate::random;
use crate::rational::{abs_diff, format_rat, Rat};
use crate::stabilizer::{displacement_audit, flat_triangles, random_instance, stabilize, MoveTag, Strategy};

pub type SupDistFn = fn(&KatetovMap, &KatetovMap) -> Result<Rat, KatetovError>;

/// Library functions the suites call through, replaceable for mutation
/// checks of the suites themselves.
#[derive(Clone, Copy)]
pub struct Hooks {
    pub sup_dist: SupDistFn,
}

impl Default for Hooks {
    fn default() -> Self {
        Hooks {
            sup_dist: crate::katetov::sup_dist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Katetov,
    Lemma1,
    Homotopy,
    Stabilizer,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite {0:?}; expected katetov, lemma1, homotopy, stabilizer or all")]
pub struct UnknownSuite(pub String);

impl FromStr for SuiteName {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "katetov" => Ok(SuiteName::Katetov),
            "lemma1" => Ok(SuiteName::Lemma1),
            "homotopy" => Ok(SuiteName::Homotopy),
            "stabilizer" => Ok(SuiteName::Stabilizer),
            "all" => Ok(SuiteName::All),
            other => Err(UnknownSuite(other.to_string())),
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SuiteName::Katetov => "katetov",
            SuiteName::Lemma1 => "lemma1",
            SuiteName::Homotopy => "homotopy",
            SuiteName::Stabilizer => "stabilizer",
            SuiteName::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub suite: SuiteName,
    pub property: String,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub seed: u64,
    pub budget: usize,
    pub passed: bool,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

pub fn run_suite(name: SuiteName, seed: u64, budget: usize) -> SuiteReport {
    run_suite_with(name, seed, budget, Hooks::default())
}

pub fn run_suite_with(name: SuiteName, seed: u64, budget: usize, hooks: Hooks) -> SuiteReport {
    let mut results = Vec::new();
    if budget > 0 {
        let mut r = Runner {
            seed,
            budget,
            hooks,
            stream: 0,
            out: &mut results,
        };
        let all = name == SuiteName::All;
        if all || name == SuiteName::Katetov {
            r.katetov();
        }
        if all || name == SuiteName::Lemma1 {
            r.lemma1();
        }
        if all || name == SuiteName::Homotopy {
            r.homotopy();
        }
        if all || name == SuiteName::Stabilizer {
            r.stabilizer();
        }
    }
    SuiteReport {
        suite: name,
        seed,
        budget,
        passed: results.iter().all(|r| r.passed),
        results,
    }
}

type Case = Result<(), Value>;

struct Runner<'a> {
    seed: u64,
    budget: usize,
    hooks: Hooks,
    stream: u64,
    out: &'a mut Vec<PropertyResult>,
}

fn fail(reason: impl fmt::Display) -> Value {
    json!({ "reason": reason.to_string() })
}

fn with_reason(mut v: Value, reason: impl fmt::Display) -> Value {
    v["reason"] = json!(reason.to_string());
    v
}

fn space_json(m: &FinMetric) -> Value {
    serde_json::to_value(SpaceFile::from_metric(m)).expect("serializable")
}

fn map_json(m: &FinMetric, f: &KatetovMap) -> Value {
    serde_json::to_value(MapFile::from_map(m, f)).expect("serializable")
}

impl Runner<'_> {
    fn rng(&mut self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        self.stream += 1;
        rng
    }

    fn property(&mut self, suite: SuiteName, name: &str, mut case: impl FnMut(&mut ChaCha8Rng, Hooks) -> Case) {
        let mut rng = self.rng();
        let mut result = PropertyResult {
            suite,
            property: name.to_string(),
            cases: 0,
            passed: true,
            counterexample: None,
        };
        for _ in 0..self.budget {
            result.cases += 1;
            if let Err(cex) = case(&mut rng, self.hooks) {
                result.passed = false;
                result.counterexample = Some(cex);
                break;
            }
        }
        self.out.push(result);
    }

    fn katetov(&mut self) {
        let s = SuiteName::Katetov;
        self.property(s, "sup_dist_matches_pointwise_max", |rng, h| {
            let (m, f, g) = katetov_pair(rng);
            let expected = f
                .iter()
                .map(|(p, v)| abs_diff(v, g.at(p)))
                .max()
                .unwrap_or_else(Rat::zero);
            let got = (h.sup_dist)(&f, &g).map_err(fail)?;
            let back = (h.sup_dist)(&g, &f).map_err(fail)?;
            if got != expected || back != expected {
                return Err(json!({
                    "space": space_json(&m),
                    "f": map_json(&m, &f),
                    "g": map_json(&m, &g),
                    "sup_dist_fg": format_rat(&got),
                    "sup_dist_gf": format_rat(&back),
                    "expected": format_rat(&expected),
                }));
            }
            Ok(())
        });
        self.property(s, "extension_is_isometric", |rng, h| {
            let (m, f, g) = katetov_pair(rng);
            let fe = katetov_extension(&f, &m).map_err(fail)?;
            let ge = katetov_extension(&g, &m).map_err(fail)?;
            let before = (h.sup_dist)(&f, &g).map_err(fail)?;
            let after = (h.sup_dist)(&fe, &ge).map_err(fail)?;
            if before != after {
                return Err(json!({
                    "space": space_json(&m),
                    "f": map_json(&m, &f),
                    "g": map_json(&m, &g),
                    "before": format_rat(&before),
                    "after": format_rat(&after),
                }));
            }
            Ok(())
        });
        self.property(s, "extension_is_katetov_and_extends", |rng, _| {
            let (m, f, _) = katetov_pair(rng);
            let fe = katetov_extension(&f, &m).map_err(fail)?;
            let cex = |r: &dyn fmt::Display| with_reason(json!({ "space": space_json(&m), "f": map_json(&m, &f) }), r);
            check_katetov(&fe, &m).map_err(|e| cex(&e))?;
            if f.iter().any(|(p, v)| fe.at(p) != v) {
                return Err(cex(&"extension changes a value on the domain"));
            }
            Ok(())
        });
        self.property(s, "convex_combination_is_katetov", |rng, _| {
            let (m, f, g) = katetov_pair(rng);
            let t = Rat::new(rng.gen_range(0..=8).into(), 8.into());
            let w = [t.clone(), Rat::from_integer(1.into()) - t];
            let h = convex_combination(&[f.clone(), g.clone()], &w).map_err(fail)?;
            check_katetov(&h, &m).map_err(|e| {
                with_reason(
                    json!({ "space": space_json(&m), "f": map_json(&m, &f), "g": map_json(&m, &g) }),
                    e,
                )
            })
        });
    }

    fn lemma1(&mut self) {
        let s = SuiteName::Lemma1;
        self.property(s, "closure_equals_omega", |rng, _| {
            let (graph, closure, _, _) = lemma1_case(rng)?;
            graph
                .audit_claim(&closure)
                .map_err(|(u, v)| with_reason(graph_json(&graph), format!("{u:?} {v:?}")))
        });
        self.property(s, "condition_b_within_copies", |rng, _| {
            let (graph, closure, _, _) = lemma1_case(rng)?;
            graph
                .audit_condition_b(&closure)
                .map_err(|(u, v)| with_reason(graph_json(&graph), format!("{u:?} {v:?}")))
        });
        self.property(s, "closure_restricts_to_base", |rng, _| {
            let (graph, closure, _, _) = lemma1_case(rng)?;
            let base = graph.base();
            for x in 0..base.len() {
                for y in 0..base.len() {
                    if closure.d(Vertex::Base(x), Vertex::Base(y)) != Some(base.d(x, y)) {
                        return Err(with_reason(graph_json(&graph), format!("base pair {x},{y}")));
                    }
                }
                for v in graph.vertices() {
                    let f = graph.map_of(v).map_err(fail)?;
                    if closure.d(Vertex::Base(x), v) != Some(f.at(x)) {
                        return Err(with_reason(graph_json(&graph), format!("base {x} to {v:?}")));
                    }
                }
            }
            Ok(())
        });
        self.property(s, "embed_spec_round_trip", |rng, _| {
            let (graph, closure, spec, verts) = lemma1_case(rng)?;
            let back = spec_from_closure(&graph, &closure, &verts).map_err(fail)?;
            if back != spec {
                return Err(with_reason(graph_json(&graph), "spec changed"));
            }
            Ok(())
        });
    }

    fn homotopy(&mut self) {
        self.property(SuiteName::Homotopy, "path_stays_in_open_set_with_modulus", |rng, _| {
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=3);
            let (joint, spec) = random::spec(rng, n, m);
            let other = random::respec(rng, &spec);
            let mut s = GrowingSpace::new(joint.clone());
            let base: Vec<PointId> = (0..n).collect();
            let phi0: Vec<PointId> = (n..n + m).collect();
            let phi1 = s
                .realize_rows(&base, spec.pattern().matrix(), other.cross())
                .map_err(fail)?;
            let mut anchors = Vec::new();
            for i in 0..m {
                if rng.gen_bool(0.5) {
                    let target = rng.gen_range(0..n);
                    let far = s.d(phi0[i], target).max(s.d(phi1[i], target)).clone();
                    let radius = far + Rat::new(rng.gen_range(1..=4).into(), 4.into());
                    anchors.push(Anchor {
                        index: i,
                        target,
                        radius,
                    });
                }
            }
            let v = BasicOpenSet::new(anchors).map_err(fail)?;
            let grid = uniform_grid(rng.gen_range(1..=8));
            let cex = |r: &dyn fmt::Display, s: &GrowingSpace| {
                with_reason(
                    json!({
                        "space": space_json(s.space()),
                        "phi0": labels(s.space(), &phi0),
                        "phi1": labels(s.space(), &phi1),
                        "grid": grid.len() - 1,
                    }),
                    r,
                )
            };
            let path = match sample_path(&mut s, &phi0, &phi1, &base, &grid, &v) {
                Ok(p) => p,
                Err(e) => return Err(cex(&e, &s)),
            };
            if !path.within_open_set() {
                return Err(cex(&"sample leaves the open set", &s));
            }
            if !path.modulus_holds() {
                return Err(cex(&"modulus bound fails", &s));
            }
            Ok(())
        });
    }

    fn stabilizer(&mut self) {
        let s = SuiteName::Stabilizer;
        let base_seed: u64 = self.rng().gen();
        let epsilon = Rat::new(1.into(), 100.into());
        let names = [
            "deflatten_removes_flat_triangles",
            "trace_is_monotone_and_chained",
            "certificates_are_tagged_isometries",
            "word_lands_within_epsilon",
            "displacement_bound_on_certificates",
        ];
        let mut results: Vec<PropertyResult> = names
            .iter()
            .map(|n| PropertyResult {
                suite: s,
                property: n.to_string(),
                cases: 0,
                passed: true,
                counterexample: None,
            })
            .collect();
        let mut converged = 0usize;
        let mut first_miss = None;
        for case in 0..self.budget as u64 {
            let seed = base_seed.wrapping_add(case);
            let checks = stabilizer_case(seed, &epsilon);
            let (verdicts, summary) = match checks {
                Ok(c) => c,
                Err(e) => {
                    for r in results.iter_mut().filter(|r| r.passed) {
                        r.cases += 1;
                        r.passed = false;
                        r.counterexample = Some(json!({ "instance_seed": seed, "reason": e }));
                    }
                    continue;
                }
            };
            if summary.converged {
                converged += 1;
            } else if first_miss.is_none() {
                first_miss = Some(json!({ "instance_seed": seed, "reason": summary.failure }));
            }
            for (r, verdict) in results.iter_mut().zip(verdicts) {
                if !r.passed {
                    continue;
                }
                r.cases += 1;
                if let Err(reason) = verdict {
                    r.passed = false;
                    r.counterexample = Some(json!({ "instance_seed": seed, "reason": reason }));
                }
            }
        }
        // At least 95% of the instances must converge under the cap.
        let enough = converged * 100 >= self.budget * 95;
        results.push(PropertyResult {
            suite: s,
            property: "descent_converges".into(),
            cases: self.budget,
            passed: enough,
            counterexample: if enough { None } else { first_miss },
        });
        self.out.extend(results);
        self.property(s, "displacement_bound_single_generator", |rng, _| {
            single_generator_case(rng)
        });
    }
}

fn katetov_pair(rng: &mut ChaCha8Rng) -> (FinMetric, KatetovMap, KatetovMap) {
    let n = rng.gen_range(1..=6);
    let m = random::metric(rng, n, "x");
    let dom = random::subset(rng, n);
    let f = random::katetov(rng, &m, &dom);
    let g = random::katetov(rng, &m, &dom);
    (m, f, g)
}

fn graph_json(graph: &ExtensionGraph) -> Value {
    let copies: Vec<Vec<Value>> = (0..graph.pattern().len())
        .map(|i| graph.catalog(i).iter().map(|f| map_json(graph.base(), f)).collect())
        .collect();
    json!({
        "base": space_json(graph.base()),
        "pattern": space_json(graph.pattern()),
        "catalogs": copies,
    })
}

type Lemma1Case = (
    ExtensionGraph,
    crate::extension::ClosureMetric,
    crate::extension::ExtensionSpec,
    Vec<Vertex>,
);

/// A random spec embedded in a graph whose catalogs also hold a second
/// spec and a few random total maps.
fn lemma1_case(rng: &mut ChaCha8Rng) -> Result<Lemma1Case, Value> {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(1..=3);
    let (_, spec) = random::spec(rng, n, m);
    let mut graph = ExtensionGraph::new(spec.base().clone(), spec.pattern().clone());
    let verts = embed_into(&mut graph, &spec).map_err(fail)?;
    let other = random::respec(rng, &spec);
    embed_into(&mut graph, &other).map_err(fail)?;
    let all: Vec<PointId> = (0..n).collect();
    for copy in 0..m {
        for _ in 0..rng.gen_range(0..=2) {
            let f = random::katetov(rng, spec.base(), &all);
            graph.add(copy, f).map_err(fail)?;
        }
    }
    let closure = graph.closure_metric();
    Ok((graph, closure, spec, verts))
}

struct Summary {
    converged: bool,
    failure: Option<String>,
}

type Verdicts = Vec<Result<(), String>>;

/// Runs one random instance end to end and judges each stabilizer
/// property on it.
fn stabilizer_case(seed: u64, epsilon: &Rat) -> Result<(Verdicts, Summary), String> {
    let mut inst = random_instance(seed, epsilon.clone()).map_err(|e| e.to_string())?;
    let original = inst.c.clone();
    let out = match stabilize(&mut inst, 10_000, Strategy::Steered) {
        Ok(out) => out,
        // Counts against convergence; there is no trace to judge.
        Err(e) if e.rejects_instance() => {
            return Ok((
                Vec::new(),
                Summary {
                    converged: false,
                    failure: Some(e.to_string()),
                },
            ));
        }
        Err(e) => return Err(e.to_string()),
    };
    let m = inst.space.space();
    let half = epsilon / Rat::from_integer(2.into());

    let mut verdicts = Vec::new();
    let flat = flat_triangles(&inst);
    let drift = original.iter().zip(&inst.c).any(|(&p, &q)| *m.d(p, q) > half);
    verdicts.push(match (flat.is_empty(), drift) {
        (false, _) => Err(format!("{} flat triangles remain", flat.len())),
        (_, true) => Err("deflatten moved a point more than delta".into()),
        _ => Ok(()),
    });

    let trace = &out.trace;
    verdicts.push(if !trace.is_monotone() {
        Err("objective increases".into())
    } else if !trace.is_chained() {
        Err("certificates do not chain the tuples".into())
    } else {
        Ok(())
    });

    let mut cert = Ok(());
    for (i, step) in trace.steps.iter().enumerate() {
        let fixed = match (step.tag, step.certificate.fixed_tag) {
            (MoveTag::BMove, FixedTag::FixesB) => &inst.b,
            (MoveTag::AMove, FixedTag::FixesA) => &inst.a,
            (MoveTag::Perturb, FixedTag::FixesA) => &inst.a,
            (MoveTag::Perturb, FixedTag::FixesB) => &inst.b,
            _ => {
                cert = Err(format!("step {i}: tag does not match the fixed set"));
                break;
            }
        };
        if let Err(e) = check_partial_isometry(&step.certificate, m, m) {
            cert = Err(format!("step {i}: {e}"));
            break;
        }
        if !step.certificate.fixes_pointwise(fixed) {
            cert = Err(format!("step {i}: fixed set moves"));
            break;
        }
    }
    verdicts.push(cert);

    verdicts.push(if !trace.converged || out.errors.iter().all(|e| e <= epsilon) {
        Ok(())
    } else {
        Err(format!(
            "errors {:?}",
            out.errors.iter().map(format_rat).collect::<Vec<_>>()
        ))
    });

    let word = trace.word();
    let mut disp = Ok(());
    for &a in &inst.a {
        match displacement_audit(m, &word, &inst.a, &inst.b, a) {
            Ok(r) if r.all_hold() => {}
            Ok(_) => {
                disp = Err(format!("bound fails along the orbit of {}", m.label(a)));
                break;
            }
            Err(e) => {
                disp = Err(e.to_string());
                break;
            }
        }
    }
    verdicts.push(disp);

    Ok((
        verdicts,
        Summary {
            converged: trace.converged,
            failure: trace.failure.clone(),
        },
    ))
}

/// A random isometry fixing a random set `Fix` and moving one point `y` to
/// a point `z` with the same distances to `Fix`; checks
/// `d(y, z) <= 2 d(y, Fix)`.
fn single_generator_case(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.gen_range(2..=5);
    let m = random::metric(rng, n, "x");
    let mut s = GrowingSpace::new(m);
    let y = rng.gen_range(0..n);
    let fix: Vec<PointId> = random::subset(rng, n).into_iter().filter(|&p| p != y).collect();
    if fix.is_empty() {
        return Ok(());
    }
    let mut f = KatetovMap::from_pairs(fix.iter().map(|&p| (p, s.d(y, p).clone())));
    let reach = fix
        .iter()
        .map(|&p| s.d(y, p) * Rat::from_integer(2.into()))
        .min()
        .expect("nonempty");
    let quarters: i64 = (&reach * Rat::from_integer(4.into()))
        .to_integer()
        .try_into()
        .unwrap_or(0);
    f.insert(y, Rat::new(rng.gen_range(0..=quarters).into(), 4.into()));
    let z = s.realize_katetov(&f).map_err(fail)?;
    let mut domain = fix.clone();
    domain.push(y);
    let mut range = fix.clone();
    range.push(z);
    let g = PartialIsometry::new(domain, range, FixedTag::FixesA);
    let m = s.space();
    let cex = |r: &str| {
        with_reason(
            json!({ "space": space_json(m), "generator": IsometryFile::from_isometry(m, &g), "point": m.label(y) }),
            r,
        )
    };
    check_partial_isometry(&g, m, m).map_err(|e| cex(&e.to_string()))?;
    let r = displacement_audit(m, std::slice::from_ref(&g), &fix, &[], y).map_err(fail)?;
    if !r.all_hold() {
        return Err(cex("displacement exceeds twice the distance to the fixed set"));
    }
    Ok(())
}
