//! JSON file formats used by the command-line tool.
//!
//! Rationals are always strings (`"3/2"`, `"2"`). Points are referred to by
//! label; the parsers resolve labels against a space and report unknown
//! ones as validation errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::builder::{GrowingSpace, Provenance};
use crate::homotopy::{Anchor, BasicOpenSet};
use crate::katetov::KatetovMap;
use crate::metric::{
    check_partial_isometry, validate_metric, FinMetric, FixedTag, MetricError, PartialIsometry, PointId,
};
use crate::rational::{serde_rat, serde_rat_matrix, serde_rat_vec, Rat};
use crate::stabilizer::{MoveTag, StabilizeOutcome, StabilizerInstance, Strategy};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl IoError {
    /// 1 for unreadable or malformed input, 2 for well-formed input that
    /// fails validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Read { .. } | IoError::Parse(_) => 1,
            IoError::Invalid(_) => 2,
        }
    }
}

impl From<MetricError> for IoError {
    fn from(e: MetricError) -> Self {
        if e.is_structural() {
            IoError::Parse(e.to_string())
        } else {
            IoError::Invalid(e.to_string())
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&text)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFile {
    pub domain: Vec<String>,
    #[serde(with = "serde_rat_vec")]
    pub values: Vec<Rat>,
}

impl MapFile {
    pub fn from_map(m: &FinMetric, f: &KatetovMap) -> Self {
        let (domain, values) = f.iter().map(|(p, v)| (m.label(p).to_string(), v.clone())).unzip();
        MapFile { domain, values }
    }

    pub fn to_map(&self, m: &FinMetric) -> Result<KatetovMap, IoError> {
        let domain = points(m, &self.domain)?;
        KatetovMap::new(domain, self.values.clone()).map_err(|e| IoError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProvenanceEntry {
    Seed,
    Realized { map: MapFile },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub points: Vec<String>,
    #[serde(with = "serde_rat_matrix")]
    pub dist: Vec<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Vec<ProvenanceEntry>>,
}

impl SpaceFile {
    pub fn from_metric(m: &FinMetric) -> Self {
        SpaceFile {
            points: m.labels().to_vec(),
            dist: m.matrix().to_vec(),
            provenance: None,
        }
    }

    pub fn from_growing(s: &GrowingSpace) -> Self {
        let m = s.space();
        let provenance = s
            .provenance()
            .iter()
            .map(|p| match p {
                Provenance::Seed => ProvenanceEntry::Seed,
                Provenance::Realized(f) => ProvenanceEntry::Realized {
                    map: MapFile::from_map(m, f),
                },
            })
            .collect();
        SpaceFile {
            provenance: Some(provenance),
            ..Self::from_metric(m)
        }
    }

    /// Validates the matrix. Shape, symmetry and diagonal problems are
    /// parse errors; axiom violations are validation errors.
    pub fn to_metric(&self) -> Result<FinMetric, IoError> {
        validate_metric(&self.points, &self.dist)?;
        Ok(FinMetric::new(self.points.clone(), self.dist.clone())?)
    }

    pub fn to_growing(&self) -> Result<GrowingSpace, IoError> {
        let m = self.to_metric()?;
        let Some(entries) = &self.provenance else {
            return Ok(GrowingSpace::new(m));
        };
        if entries.len() != m.len() {
            return Err(IoError::Invalid(
                "provenance length differs from the point count".into(),
            ));
        }
        let provenance = entries
            .iter()
            .map(|e| match e {
                ProvenanceEntry::Seed => Ok(Provenance::Seed),
                ProvenanceEntry::Realized { map } => map.to_map(&m).map(Provenance::Realized),
            })
            .collect::<Result<_, _>>()?;
        Ok(GrowingSpace::with_provenance(m, provenance))
    }
}

pub fn parse_space_str(text: &str) -> Result<FinMetric, IoError> {
    from_json::<SpaceFile>(text)?.to_metric()
}

pub fn parse_space(path: &Path) -> Result<FinMetric, IoError> {
    read_json::<SpaceFile>(path)?.to_metric()
}

/// Cross distances of an extension: one row per pattern point, one column
/// per base point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(with = "serde_rat_matrix")]
    pub cross: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometryFile {
    pub domain: Vec<String>,
    pub range: Vec<String>,
    #[serde(default)]
    pub fixed_tag: FixedTag,
}

impl IsometryFile {
    pub fn from_isometry(m: &FinMetric, phi: &PartialIsometry) -> Self {
        IsometryFile {
            domain: labels(m, &phi.domain),
            range: labels(m, &phi.range),
            fixed_tag: phi.fixed_tag,
        }
    }

    pub fn to_isometry(&self, m: &FinMetric) -> Result<PartialIsometry, IoError> {
        if self.domain.len() != self.range.len() {
            return Err(IoError::Invalid("domain and range differ in length".into()));
        }
        Ok(PartialIsometry::new(
            points(m, &self.domain)?,
            points(m, &self.range)?,
            self.fixed_tag,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorFile {
    pub index: usize,
    pub target: String,
    #[serde(with = "serde_rat")]
    pub radius: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSetFile {
    pub anchors: Vec<AnchorFile>,
}

impl OpenSetFile {
    pub fn to_open_set(&self, m: &FinMetric) -> Result<BasicOpenSet, IoError> {
        let anchors = self
            .anchors
            .iter()
            .map(|a| {
                Ok(Anchor {
                    index: a.index,
                    target: point(m, &a.target)?,
                    radius: a.radius.clone(),
                })
            })
            .collect::<Result<_, IoError>>()?;
        BasicOpenSet::new(anchors).map_err(|e| IoError::Invalid(e.to_string()))
    }
}

pub fn point(m: &FinMetric, label: &str) -> Result<PointId, IoError> {
    m.index_of(label)
        .ok_or_else(|| IoError::Invalid(format!("unknown point {label:?}")))
}

pub fn points(m: &FinMetric, labels: &[String]) -> Result<Vec<PointId>, IoError> {
    labels.iter().map(|l| point(m, l)).collect()
}

pub fn labels(m: &FinMetric, points: &[PointId]) -> Vec<String> {
    points.iter().map(|&p| m.label(p).to_string()).collect()
}

/// Splits a comma-separated label list, ignoring blanks.
pub fn split_labels(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// A stabilizer instance with target `phi(A)`, from labels.
pub fn instance_from_labels(
    space: GrowingSpace,
    a: &[String],
    b: &[String],
    phi: &IsometryFile,
    epsilon: Rat,
) -> Result<StabilizerInstance, IoError> {
    let m = space.space();
    let a = points(m, a)?;
    let b = points(m, b)?;
    let phi = phi.to_isometry(m)?;
    check_partial_isometry(&phi, m, m).map_err(|e| IoError::Invalid(e.to_string()))?;
    let c = a
        .iter()
        .map(|&p| {
            phi.apply(p)
                .ok_or_else(|| IoError::Invalid(format!("phi is undefined at {}", m.label(p))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    StabilizerInstance::from_sets(space, &a, &b, &c, epsilon).map_err(|e| IoError::Invalid(e.to_string()))
}

/// One accepted move of a descent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFile {
    pub tuple: Vec<String>,
    #[serde(with = "serde_rat")]
    pub objective: Rat,
    pub tag: MoveTag,
    pub certificate: IsometryFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeflattenFile {
    pub flat_before: usize,
    #[serde(with = "serde_rat")]
    pub weight: Rat,
    #[serde(with = "serde_rat_vec")]
    pub moved: Vec<Rat>,
}

/// A stabilize run with the final space and its provenance, enough to
/// re-check every certificate without running the descent again.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub k: usize,
    pub original_target: Vec<String>,
    pub target: Vec<String>,
    #[serde(with = "serde_rat")]
    pub epsilon: Rat,
    pub strategy: Strategy,
    pub deflatten: DeflattenFile,
    pub initial: Vec<String>,
    #[serde(with = "serde_rat")]
    pub initial_objective: Rat,
    pub steps: Vec<StepFile>,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<String>,
    #[serde(with = "serde_rat_vec")]
    pub errors: Vec<Rat>,
    pub within_epsilon: bool,
    pub space: SpaceFile,
}

impl TraceFile {
    pub fn new(inst: &StabilizerInstance, strategy: Strategy, out: &StabilizeOutcome) -> Self {
        let m = inst.space.space();
        let t = &out.trace;
        TraceFile {
            a: labels(m, &inst.a),
            b: labels(m, &inst.b),
            k: inst.k,
            original_target: labels(m, &out.deflatten.original),
            target: labels(m, &inst.c),
            epsilon: inst.epsilon.clone(),
            strategy,
            deflatten: DeflattenFile {
                flat_before: out.deflatten.flat_before.len(),
                weight: out.deflatten.weight.clone(),
                moved: out.deflatten.moved.clone(),
            },
            initial: labels(m, &t.initial),
            initial_objective: t.initial_objective.clone(),
            steps: t
                .steps
                .iter()
                .map(|s| StepFile {
                    tuple: labels(m, &s.tuple),
                    objective: s.objective.clone(),
                    tag: s.tag,
                    certificate: IsometryFile::from_isometry(m, &s.certificate),
                })
                .collect(),
            iterations: t.iterations,
            converged: t.converged,
            failure: t.failure.clone(),
            errors: out.errors.clone(),
            within_epsilon: out.within_epsilon,
            space: SpaceFile::from_growing(&inst.space),
        }
    }

    /// The certificates as isometries of the embedded space.
    pub fn word(&self, m: &FinMetric) -> Result<Vec<PartialIsometry>, IoError> {
        self.steps.iter().map(|s| s.certificate.to_isometry(m)).collect()
    }

    /// Re-checks the trace against its embedded space: every certificate
    /// is an isometry fixing its tagged set and carries each tuple to the
    /// next, the recorded objectives are correct and never increase.
    pub fn verify(&self) -> Result<(), IoError> {
        let m = self.space.to_metric()?;
        let a = points(&m, &self.a)?;
        let b = points(&m, &self.b)?;
        let c = points(&m, &self.target)?;
        let objective = |x: &[PointId]| -> Rat { x.iter().zip(&c).map(|(&p, &q)| m.d(p, q).clone()).sum() };
        let bad = |step: usize, why: &str| IoError::Invalid(format!("step {step}: {why}"));
        let mut prev = points(&m, &self.initial)?;
        let mut f = objective(&prev);
        if f != self.initial_objective {
            return Err(IoError::Invalid("initial objective is wrong".into()));
        }
        for (i, step) in self.steps.iter().enumerate() {
            let g = step.certificate.to_isometry(&m)?;
            check_partial_isometry(&g, &m, &m).map_err(|e| bad(i, &e.to_string()))?;
            let fixed = match g.fixed_tag {
                FixedTag::FixesA => &a,
                FixedTag::FixesB => &b,
                FixedTag::None => return Err(bad(i, "untagged certificate")),
            };
            if !g.fixes_pointwise(fixed) {
                return Err(bad(i, "certificate moves its fixed set"));
            }
            let tuple = points(&m, &step.tuple)?;
            if prev.iter().zip(&tuple).any(|(&p, &q)| g.apply(p) != Some(q)) {
                return Err(bad(i, "certificate does not carry the previous tuple"));
            }
            let next = objective(&tuple);
            if next != step.objective {
                return Err(bad(i, "recorded objective is wrong"));
            }
            if next > f {
                return Err(bad(i, "objective increases"));
            }
            prev = tuple;
            f = next;
        }
        Ok(())
    }
}
