use num_traits::Zero;

use super::StabilizerError;
use crate::builder::GrowingSpace;
use crate::metric::{FinMetric, FixedTag, PartialIsometry, PointId};
use crate::rational::Rat;

fn dist_to_set(m: &FinMetric, x: PointId, set: &[PointId]) -> Rat {
    set.iter().map(|&p| m.d(x, p).clone()).min().unwrap_or_else(Rat::zero)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorCheck {
    pub point: PointId,
    pub image: PointId,
    pub displacement: Rat,
    /// `2 d(point, Fix)` for the generator's fixed set.
    pub bound: Rat,
    /// `2 d(point, A ∪ B)`.
    pub union_bound: Rat,
}

impl GeneratorCheck {
    pub fn holds(&self) -> bool {
        self.displacement <= self.bound
    }

    pub fn union_form_holds(&self) -> bool {
        self.displacement <= self.union_bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplacementReport {
    pub point: PointId,
    pub image: PointId,
    pub generators: Vec<GeneratorCheck>,
    pub displacement: Rat,
    /// Sum of the per-generator bounds along the orbit of the point.
    pub word_bound: Rat,
}

impl DisplacementReport {
    pub fn all_hold(&self) -> bool {
        self.generators.iter().all(GeneratorCheck::holds) && self.displacement <= self.word_bound
    }

    /// Minimum of `bound - displacement` over the generators.
    pub fn margin(&self) -> Rat {
        self.generators
            .iter()
            .map(|g| &g.bound - &g.displacement)
            .min()
            .unwrap_or_else(|| &self.word_bound - &self.displacement)
    }
}

/// Follows `x` through `word` and checks, for every generator `g` moving
/// the current point `y`, that `d(y, g(y)) <= 2 d(y, Fix(g))`, and for the
/// whole word that `d(x, w(x))` is at most the sum of those bounds.
pub fn displacement_audit(
    m: &FinMetric,
    word: &[PartialIsometry],
    a: &[PointId],
    b: &[PointId],
    x: PointId,
) -> Result<DisplacementReport, StabilizerError> {
    let union: Vec<PointId> = a.iter().chain(b).copied().collect();
    let mut y = x;
    let mut generators = Vec::with_capacity(word.len());
    let mut word_bound = Rat::zero();
    for (step, g) in word.iter().enumerate() {
        let fix = match g.fixed_tag {
            FixedTag::FixesA => a,
            FixedTag::FixesB => b,
            FixedTag::None => return Err(StabilizerError::Untagged { step }),
        };
        if !g.fixes_pointwise(fix) {
            return Err(StabilizerError::NotFixing { step });
        }
        let image = g.apply(y).ok_or(StabilizerError::DomainGap { step })?;
        let check = GeneratorCheck {
            point: y,
            image,
            displacement: m.d(y, image).clone(),
            bound: dist_to_set(m, y, fix) * Rat::from_integer(2.into()),
            union_bound: dist_to_set(m, y, &union) * Rat::from_integer(2.into()),
        };
        word_bound += &check.bound;
        generators.push(check);
        y = image;
    }
    Ok(DisplacementReport {
        point: x,
        image: y,
        generators,
        displacement: m.d(x, y).clone(),
        word_bound,
    })
}

/// Extends each generator of `word` forward so the word is defined at `x`.
pub fn extend_word_to(
    space: &mut GrowingSpace,
    word: &[PartialIsometry],
    x: PointId,
) -> Result<Vec<PartialIsometry>, StabilizerError> {
    let mut y = x;
    let mut out = Vec::with_capacity(word.len());
    for g in word {
        let g = if g.apply(y).is_some() {
            g.clone()
        } else {
            space.extend_isometry(g, &[y], &[])?
        };
        y = g.apply(y).expect("extended");
        out.push(g);
    }
    Ok(out)
}
