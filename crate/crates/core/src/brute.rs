//! Ground truth by exhaustive enumeration of the feature space.

use std::collections::BTreeSet;

use crate::dl::{eval_term, ClassId, DecisionList, FeatureSet, Instance, Literal};
use crate::error::BoundError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteBounds {
    pub max_points: u128,
    pub max_features: usize,
}

impl Default for BruteBounds {
    fn default() -> Self {
        BruteBounds {
            max_points: 1_000_000,
            max_features: 12,
        }
    }
}

impl BruteBounds {
    pub fn check(&self, dl: &DecisionList) -> Result<(), BoundError> {
        let space = dl.space();
        let m = space.num_features();
        if m > self.max_features || m > 63 {
            return Err(BoundError::TooManyFeatures {
                features: m,
                max: self.max_features.min(63),
            });
        }
        let points = space.num_points().unwrap_or(u128::MAX);
        if points > self.max_points {
            return Err(BoundError::TooManyPoints {
                points,
                max: self.max_points,
            });
        }
        Ok(())
    }
}

/// All AXps (`axps`) and all CXps (`cxps`) of one instance, each sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExplanationSets {
    pub axps: Vec<FeatureSet>,
    pub cxps: Vec<FeatureSet>,
}

fn to_set(mask: u64) -> FeatureSet {
    (0..64).filter(|j| mask >> j & 1 == 1).collect()
}

fn sorted(mut sets: Vec<FeatureSet>) -> Vec<FeatureSet> {
    sets.sort_by(|a, b| a.iter().cmp(b.iter()));
    sets
}

/// Keeps the subset-minimal masks, smallest first.
fn minimal(masks: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut all: Vec<u64> = masks.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    all.sort_by_key(|m| (m.count_ones(), *m));
    let mut kept: Vec<u64> = Vec::new();
    for m in all {
        if !kept.iter().any(|k| k & m == *k) {
            kept.push(m);
        }
    }
    kept
}

/// For every point with a different prediction, the features where it
/// differs from the instance.
fn difference_masks(dl: &DecisionList, inst: &Instance, bounds: &BruteBounds) -> Result<Vec<u64>, BoundError> {
    bounds.check(dl)?;
    let (class, _) = dl.classify_point(&inst.point);
    let mut masks = BTreeSet::new();
    for x in dl.space().points() {
        if dl.classify_point(&x).0 != class {
            let d = x
                .iter()
                .zip(&inst.point)
                .enumerate()
                .filter(|(_, (a, b))| a != b)
                .fold(0u64, |acc, (j, _)| acc | 1 << j);
            masks.insert(d);
        }
    }
    Ok(masks.into_iter().collect())
}

/// Minimal hitting sets of `sets` over `m` elements, by ascending cardinality
/// with supersets of found sets pruned.
fn minimal_hitting_sets(sets: &[u64], m: usize) -> Vec<u64> {
    let mut candidates: Vec<u64> = (0..1u64 << m).collect();
    candidates.sort_by_key(|c| (c.count_ones(), *c));
    let mut found: Vec<u64> = Vec::new();
    for c in candidates {
        if found.iter().any(|f| f & c == *f) {
            continue;
        }
        if sets.iter().all(|s| s & c != 0) {
            found.push(c);
        }
    }
    found
}

pub fn bf_all_cxps(dl: &DecisionList, inst: &Instance, bounds: &BruteBounds) -> Result<Vec<FeatureSet>, BoundError> {
    let d = difference_masks(dl, inst, bounds)?;
    Ok(sorted(minimal(d).into_iter().map(to_set).collect()))
}

pub fn bf_all_axps(dl: &DecisionList, inst: &Instance, bounds: &BruteBounds) -> Result<Vec<FeatureSet>, BoundError> {
    Ok(bf_all_explanations(dl, inst, bounds)?.axps)
}

pub fn bf_all_explanations(dl: &DecisionList, inst: &Instance, bounds: &BruteBounds) -> Result<ExplanationSets, BoundError> {
    let cxps = minimal(difference_masks(dl, inst, bounds)?);
    let axps = minimal_hitting_sets(&cxps, dl.space().num_features());
    Ok(ExplanationSets {
        axps: sorted(axps.into_iter().map(to_set).collect()),
        cxps: sorted(cxps.into_iter().map(to_set).collect()),
    })
}

fn is_minimal_hitting_set(h: &FeatureSet, sets: &[FeatureSet]) -> bool {
    let hits = |h: &FeatureSet| sets.iter().all(|s| !s.is_disjoint(h));
    if !hits(h) {
        return false;
    }
    h.iter().all(|j| {
        let mut smaller = h.clone();
        smaller.remove(j);
        !hits(&smaller)
    })
}

/// Every AXp is a minimal hitting set of the CXps and every CXp a minimal
/// hitting set of the AXps.
pub fn check_duality(sets: &ExplanationSets) -> bool {
    sets.axps.iter().all(|x| is_minimal_hitting_set(x, &sets.cxps))
        && sets.cxps.iter().all(|y| is_minimal_hitting_set(y, &sets.axps))
}

/// Whether some point is classified as `target`.
pub fn bf_dlsat(dl: &DecisionList, target: ClassId, bounds: &BruteBounds) -> Result<bool, BoundError> {
    bounds.check(dl)?;
    Ok(dl.space().points().any(|x| dl.classify_point(&x).0 == target))
}

/// Whether every point satisfying `term` is classified as `target`.
pub fn bf_dlim(dl: &DecisionList, term: &[Literal], target: ClassId, bounds: &BruteBounds) -> Result<bool, BoundError> {
    bounds.check(dl)?;
    Ok(dl
        .space()
        .points()
        .filter(|x| eval_term(term, x))
        .all(|x| dl.classify_point(&x).0 == target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::Explanation;
    use crate::model_io::parse_model;

    fn fs(xs: &[usize]) -> FeatureSet {
        xs.iter().map(|x| x - 1).collect()
    }

    const MHS: &str = "\
feature x1 : 0, 1, 2
feature x2 : 0, 1, 2
feature x3 : 0, 1, 2
feature x4 : 0, 1, 2
feature x5 : 0, 1, 2
classes : neg, pos
rule : x1=1 & x2=1 => neg
rule : x3!=1 => pos
default => neg
";

    #[test]
    fn three_rule_list() {
        let dl = parse_model(MHS).unwrap();
        let inst = Instance::new(dl.space(), vec![1; 5]).unwrap();
        let b = BruteBounds::default();
        let sets = bf_all_explanations(&dl, &inst, &b).unwrap();
        assert_eq!(sets.axps, vec![fs(&[1, 2]), fs(&[3])]);
        assert_eq!(sets.cxps, vec![fs(&[1, 3]), fs(&[2, 3])]);
        assert!(check_duality(&sets));
        for x in &sets.axps {
            let term = Explanation::axp(x.clone()).term(&inst.point);
            assert!(bf_dlim(&dl, &term, ClassId(0), &b).unwrap());
        }
    }

    #[test]
    fn two_boolean_rules() {
        let dl = parse_model(
            "feature x1 : 0, 1\nfeature x2 : 0, 1\nclasses : neg, pos\nrule : x1=1 => pos\nrule : x2=1 => pos\ndefault => neg\n",
        )
        .unwrap();
        let inst = Instance::new(dl.space(), vec![0, 1]).unwrap();
        let b = BruteBounds::default();
        assert_eq!(bf_all_axps(&dl, &inst, &b).unwrap(), vec![fs(&[2])]);
        assert_eq!(bf_all_cxps(&dl, &inst, &b).unwrap(), vec![fs(&[2])]);
    }

    #[test]
    fn constant_classifier() {
        let dl = parse_model("feature a : 0, 1\nfeature b : 0, 1\nclasses : c\ndefault => c\n").unwrap();
        let inst = Instance::new(dl.space(), vec![0, 1]).unwrap();
        let b = BruteBounds::default();
        assert_eq!(bf_all_axps(&dl, &inst, &b).unwrap(), vec![FeatureSet::new()]);
        assert!(bf_all_cxps(&dl, &inst, &b).unwrap().is_empty());
        assert!(bf_dlsat(&dl, ClassId(0), &b).unwrap());
    }

    #[test]
    fn duality_checks() {
        let yes = ExplanationSets {
            axps: vec![fs(&[1, 2]), fs(&[3])],
            cxps: vec![fs(&[1, 3]), fs(&[2, 3])],
        };
        assert!(check_duality(&yes));
        let no = ExplanationSets { axps: vec![fs(&[1])], cxps: vec![fs(&[2])] };
        assert!(!check_duality(&no));
        let constant = ExplanationSets { axps: vec![FeatureSet::new()], cxps: vec![] };
        assert!(check_duality(&constant));
        let not_minimal = ExplanationSets {
            axps: vec![fs(&[1, 2, 3])],
            cxps: vec![fs(&[1, 3]), fs(&[2, 3])],
        };
        assert!(!check_duality(&not_minimal));
    }

    #[test]
    fn bounds_enforced() {
        let dl = parse_model(MHS).unwrap();
        let inst = Instance::new(dl.space(), vec![1; 5]).unwrap();
        let tight = BruteBounds { max_points: 100, max_features: 12 };
        assert_eq!(
            bf_all_axps(&dl, &inst, &tight),
            Err(BoundError::TooManyPoints { points: 243, max: 100 })
        );
        let narrow = BruteBounds { max_points: 1000, max_features: 4 };
        assert_eq!(
            bf_dlsat(&dl, ClassId(0), &narrow),
            Err(BoundError::TooManyFeatures { features: 5, max: 4 })
        );
    }

    #[test]
    fn mask_round_trip() {
        assert_eq!(to_set(0b1001), fs(&[1, 4]));
        assert_eq!(minimal([0b110, 0b010, 0b011, 0b100]), vec![0b010, 0b100]);
    }
}
