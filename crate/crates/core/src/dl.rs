//! Decision-list data model and execution semantics.
//!
//! Features are categorical: every feature owns an ordered domain of named
//! values and is referred to by its position in the [`FeatureSpace`]. Values
//! and classes are likewise positional. A [`DecisionList`] is an ordered list
//! of [`Rule`]s followed by a default prediction; the first rule whose
//! antecedent holds fires.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::ModelError;

/// Set of feature indices. Ordered so that iteration is ascending.
pub type FeatureSet = BTreeSet<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpace {
    features: Vec<Feature>,
    classes: Vec<String>,
}

impl FeatureSpace {
    pub fn new(features: Vec<Feature>, classes: Vec<String>) -> Result<Self, ModelError> {
        let mut names = HashSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(ModelError::Invalid(format!("duplicate feature `{}`", f.name)));
            }
            if f.domain.is_empty() {
                return Err(ModelError::Invalid(format!("feature `{}` has an empty domain", f.name)));
            }
            let mut values = HashSet::new();
            for v in &f.domain {
                if !values.insert(v.as_str()) {
                    return Err(ModelError::Invalid(format!(
                        "duplicate value `{v}` in domain of `{}`",
                        f.name
                    )));
                }
            }
        }
        if classes.is_empty() {
            return Err(ModelError::Invalid("no classes declared".into()));
        }
        let mut seen = HashSet::new();
        for c in &classes {
            if !seen.insert(c.as_str()) {
                return Err(ModelError::Invalid(format!("duplicate class `{c}`")));
            }
        }
        Ok(FeatureSpace { features, classes })
    }

    /// Boolean space `x1..xn` with domains `{0, 1}`.
    pub fn boolean(num_features: usize, classes: &[&str]) -> Self {
        let features = (1..=num_features)
            .map(|i| Feature {
                name: format!("x{i}"),
                domain: vec!["0".into(), "1".into()],
            })
            .collect();
        FeatureSpace::new(features, classes.iter().map(|c| c.to_string()).collect())
            .expect("boolean space is well formed")
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature(&self, i: usize) -> &Feature {
        &self.features[i]
    }

    pub fn domain_size(&self, i: usize) -> usize {
        self.features[i].domain.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_name(&self, c: ClassId) -> &str {
        &self.classes[c.0]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn value_index(&self, feature: usize, value: &str) -> Option<usize> {
        self.features[feature].domain.iter().position(|v| v == value)
    }

    pub fn class_index(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c == name).map(ClassId)
    }

    /// Size of the feature space, `None` on overflow.
    pub fn num_points(&self) -> Option<u128> {
        self.features
            .iter()
            .try_fold(1u128, |acc, f| acc.checked_mul(f.domain.len() as u128))
    }

    /// Iterate over every point in lexicographic order (last feature fastest).
    pub fn points(&self) -> PointIter<'_> {
        PointIter {
            space: self,
            next: Some(vec![0; self.features.len()]),
        }
    }

    pub fn check_point(&self, point: &[usize]) -> Result<(), ModelError> {
        if point.len() != self.features.len() {
            return Err(ModelError::Invalid(format!(
                "point has {} values, space has {} features",
                point.len(),
                self.features.len()
            )));
        }
        for (j, &v) in point.iter().enumerate() {
            if v >= self.features[j].domain.len() {
                return Err(ModelError::Invalid(format!(
                    "value index {v} outside the domain of `{}`",
                    self.features[j].name
                )));
            }
        }
        Ok(())
    }
}

pub struct PointIter<'a> {
    space: &'a FeatureSpace,
    next: Option<Vec<usize>>,
}

impl Iterator for PointIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut j = succ.len();
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            succ[j] += 1;
            if succ[j] < self.space.domain_size(j) {
                self.next = Some(succ);
                break;
            }
            succ[j] = 0;
        }
        Some(current)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Eq,
    Neq,
}

/// `x_feature = value` or `x_feature != value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub feature: usize,
    pub polarity: Polarity,
    pub value: usize,
}

impl Literal {
    pub fn eq(feature: usize, value: usize) -> Self {
        Literal {
            feature,
            polarity: Polarity::Eq,
            value,
        }
    }

    pub fn neq(feature: usize, value: usize) -> Self {
        Literal {
            feature,
            polarity: Polarity::Neq,
            value,
        }
    }

    #[inline]
    pub fn holds(&self, point: &[usize]) -> bool {
        match self.polarity {
            Polarity::Eq => point[self.feature] == self.value,
            Polarity::Neq => point[self.feature] != self.value,
        }
    }

    pub fn display<'a>(&'a self, space: &'a FeatureSpace) -> impl fmt::Display + 'a {
        LiteralDisplay { lit: self, space }
    }
}

struct LiteralDisplay<'a> {
    lit: &'a Literal,
    space: &'a FeatureSpace,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let feat = self.space.feature(self.lit.feature);
        let op = match self.lit.polarity {
            Polarity::Eq => "=",
            Polarity::Neq => "!=",
        };
        write!(f, "{}{}{}", feat.name, op, feat.domain[self.lit.value])
    }
}

/// Per-feature sets of values still allowed by a conjunction of literals.
/// Features not mentioned are absent from the map.
fn allowed_values<'a>(
    terms: impl IntoIterator<Item = &'a Literal>,
    space: &FeatureSpace,
) -> Vec<(usize, Vec<bool>)> {
    let mut allowed: Vec<(usize, Vec<bool>)> = Vec::new();
    for lit in terms {
        let slot = match allowed.iter().position(|(f, _)| *f == lit.feature) {
            Some(i) => i,
            None => {
                allowed.push((lit.feature, vec![true; space.domain_size(lit.feature)]));
                allowed.len() - 1
            }
        };
        let set = &mut allowed[slot].1;
        match lit.polarity {
            Polarity::Eq => {
                for (v, ok) in set.iter_mut().enumerate() {
                    if v != lit.value {
                        *ok = false;
                    }
                }
            }
            Polarity::Neq => set[lit.value] = false,
        }
    }
    allowed
}

/// True iff `a ∧ b` has a model in `space`.
pub fn terms_consistent(a: &[Literal], b: &[Literal], space: &FeatureSpace) -> bool {
    allowed_values(a.iter().chain(b.iter()), space)
        .iter()
        .all(|(_, set)| set.iter().any(|&ok| ok))
}

/// True iff every literal holds under `point`; the empty term is true.
pub fn eval_term(term: &[Literal], point: &[usize]) -> bool {
    term.iter().all(|l| l.holds(point))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    antecedent: Vec<Literal>,
    prediction: ClassId,
    consistent: bool,
}

impl Rule {
    /// Builds a rule, sorting and deduplicating the antecedent. A rule whose
    /// antecedent has no model is kept but flagged; it can never fire.
    pub fn new(
        mut antecedent: Vec<Literal>,
        prediction: ClassId,
        space: &FeatureSpace,
    ) -> Result<Self, ModelError> {
        for lit in &antecedent {
            if lit.feature >= space.num_features() {
                return Err(ModelError::Invalid(format!("unknown feature index {}", lit.feature)));
            }
            if lit.value >= space.domain_size(lit.feature) {
                return Err(ModelError::Invalid(format!(
                    "value index {} outside the domain of `{}`",
                    lit.value,
                    space.feature(lit.feature).name
                )));
            }
        }
        if prediction.0 >= space.num_classes() {
            return Err(ModelError::Invalid(format!("unknown class index {}", prediction.0)));
        }
        antecedent.sort();
        antecedent.dedup();
        let consistent = terms_consistent(&antecedent, &[], space);
        Ok(Rule {
            antecedent,
            prediction,
            consistent,
        })
    }

    pub fn antecedent(&self) -> &[Literal] {
        &self.antecedent
    }

    pub fn prediction(&self) -> ClassId {
        self.prediction
    }

    /// False when the antecedent is unsatisfiable on its own.
    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn fires(&self, point: &[usize]) -> bool {
        eval_term(&self.antecedent, point)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionList {
    space: FeatureSpace,
    rules: Vec<Rule>,
    default: ClassId,
}

impl DecisionList {
    pub fn new(space: FeatureSpace, rules: Vec<Rule>, default: ClassId) -> Result<Self, ModelError> {
        if default.0 >= space.num_classes() {
            return Err(ModelError::Invalid(format!("unknown default class index {}", default.0)));
        }
        if !rules.is_empty() && space.num_classes() < 2 {
            return Err(ModelError::Invalid(
                "at least two classes are required unless the model is a single default rule".into(),
            ));
        }
        for r in &rules {
            if r.prediction.0 >= space.num_classes() {
                return Err(ModelError::Invalid(format!("unknown class index {}", r.prediction.0)));
            }
            for l in &r.antecedent {
                if l.feature >= space.num_features() || l.value >= space.domain_size(l.feature) {
                    return Err(ModelError::Invalid("rule literal outside the feature space".into()));
                }
            }
        }
        Ok(DecisionList {
            space,
            rules,
            default,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    /// Non-default rules in order.
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn default_class(&self) -> ClassId {
        self.default
    }

    /// Index of the default rule, which is one past the last regular rule.
    pub fn default_index(&self) -> usize {
        self.rules.len()
    }

    pub fn is_default(&self, index: usize) -> bool {
        index == self.rules.len()
    }

    /// Prediction of rule `index`, the default included.
    pub fn prediction(&self, index: usize) -> ClassId {
        if self.is_default(index) {
            self.default
        } else {
            self.rules[index].prediction
        }
    }

    /// Antecedent of rule `index`; empty for the default.
    pub fn antecedent(&self, index: usize) -> &[Literal] {
        if self.is_default(index) {
            &[]
        } else {
            &self.rules[index].antecedent
        }
    }

    /// Classification without domain validation.
    #[inline]
    pub fn classify_point(&self, point: &[usize]) -> (ClassId, usize) {
        for (i, r) in self.rules.iter().enumerate() {
            if r.fires(point) {
                return (r.prediction, i);
            }
        }
        (self.default, self.rules.len())
    }
}

/// Predicted class and firing rule index (the default rule has index
/// `dl.num_rules()`).
pub fn classify(dl: &DecisionList, point: &[usize]) -> Result<(ClassId, usize), ModelError> {
    dl.space.check_point(point)?;
    Ok(dl.classify_point(point))
}

/// A rule is self-determining when its antecedent clashes with the
/// antecedent of every preceding rule.
pub fn is_self_determining(dl: &DecisionList, i: usize) -> bool {
    let ante = dl.antecedent(i);
    dl.rules[..i]
        .iter()
        .all(|prev| !terms_consistent(prev.antecedent(), ante, &dl.space))
}

/// `x_j = v_j` for every feature, in feature order.
pub fn instance_literals(space: &FeatureSpace, point: &[usize]) -> Vec<Literal> {
    debug_assert_eq!(point.len(), space.num_features());
    point
        .iter()
        .enumerate()
        .map(|(j, &v)| Literal::eq(j, v))
        .collect()
}

/// A full assignment of the feature space, optionally carrying an expected
/// label read from a data file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub point: Vec<usize>,
    pub label: Option<ClassId>,
}

impl Instance {
    pub fn new(space: &FeatureSpace, point: Vec<usize>) -> Result<Self, ModelError> {
        space.check_point(&point)?;
        Ok(Instance { point, label: None })
    }

    pub fn literals(&self, space: &FeatureSpace) -> Vec<Literal> {
        instance_literals(space, &self.point)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExplanationKind {
    Axp,
    Cxp,
}

impl fmt::Display for ExplanationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExplanationKind::Axp => "axp",
            ExplanationKind::Cxp => "cxp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Explanation {
    pub kind: ExplanationKind,
    pub features: FeatureSet,
}

impl Explanation {
    pub fn axp(features: FeatureSet) -> Self {
        Explanation {
            kind: ExplanationKind::Axp,
            features,
        }
    }

    pub fn cxp(features: FeatureSet) -> Self {
        Explanation {
            kind: ExplanationKind::Cxp,
            features,
        }
    }

    /// The literal term of the explanation: the instance literals of the
    /// features in an AXp, or of the features outside a CXp.
    pub fn term(&self, point: &[usize]) -> Vec<Literal> {
        point
            .iter()
            .enumerate()
            .filter(|(j, _)| match self.kind {
                ExplanationKind::Axp => self.features.contains(j),
                ExplanationKind::Cxp => !self.features.contains(j),
            })
            .map(|(j, &v)| Literal::eq(j, v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(f: usize, v: usize) -> Literal {
        Literal::eq(f, v)
    }

    /// `x1=1 ∧ x2=1 → neg; x3≠1 → pos; default neg` over D = {0,1,2}.
    fn mhs_example() -> DecisionList {
        let features = (1..=5)
            .map(|i| Feature {
                name: format!("x{i}"),
                domain: vec!["0".into(), "1".into(), "2".into()],
            })
            .collect();
        let space = FeatureSpace::new(features, vec!["neg".into(), "pos".into()]).unwrap();
        let r0 = Rule::new(vec![lit(0, 1), lit(1, 1)], ClassId(0), &space).unwrap();
        let r1 = Rule::new(vec![Literal::neq(2, 1)], ClassId(1), &space).unwrap();
        DecisionList::new(space, vec![r0, r1], ClassId(0)).unwrap()
    }

    #[test]
    fn classify_first_rule_fires() {
        let dl = mhs_example();
        assert_eq!(classify(&dl, &[1, 1, 1, 1, 1]).unwrap(), (ClassId(0), 0));
        assert_eq!(classify(&dl, &[0, 1, 0, 1, 1]).unwrap(), (ClassId(1), 1));
        assert_eq!(classify(&dl, &[0, 1, 1, 1, 1]).unwrap(), (ClassId(0), 2));
        assert!(classify(&dl, &[3, 1, 1, 1, 1]).is_err());
        assert!(classify(&dl, &[1, 1]).is_err());
    }

    #[test]
    fn single_default_always_fires() {
        let space = FeatureSpace::boolean(2, &["c"]);
        let dl = DecisionList::new(space, vec![], ClassId(0)).unwrap();
        for p in dl.space().points() {
            assert_eq!(classify(&dl, &p).unwrap(), (ClassId(0), 0));
        }
    }

    #[test]
    fn eval_term_cases() {
        assert!(eval_term(&[lit(0, 1), lit(1, 1)], &[1, 1, 0, 0, 0]));
        assert!(eval_term(&[], &[2, 0]));
        assert!(!eval_term(&[Literal::neq(2, 1)], &[0, 0, 1, 0, 0]));
    }

    #[test]
    fn consistency_by_allowed_sets() {
        let b = FeatureSpace::boolean(4, &["n", "p"]);
        // ¬a∧¬c∧¬d vs a∧c∧d
        let r0 = [lit(0, 0), lit(2, 0), lit(3, 0)];
        let r5 = [lit(0, 1), lit(2, 1), lit(3, 1)];
        assert!(!terms_consistent(&r0, &r5, &b));
        assert!(terms_consistent(&[lit(0, 1)], &[lit(1, 1)], &b));

        let tern = FeatureSpace::new(
            vec![Feature {
                name: "x1".into(),
                domain: vec!["0".into(), "1".into(), "2".into()],
            }],
            vec!["n".into(), "p".into()],
        )
        .unwrap();
        assert!(terms_consistent(&[Literal::neq(0, 0)], &[Literal::neq(0, 1)], &tern));
        assert!(!terms_consistent(
            &[Literal::neq(0, 0), Literal::neq(0, 1)],
            &[Literal::neq(0, 2)],
            &tern
        ));
    }

    #[test]
    fn self_inconsistent_rules_are_flagged() {
        let b = FeatureSpace::boolean(2, &["n", "p"]);
        let r = Rule::new(vec![lit(0, 0), lit(0, 1)], ClassId(0), &b).unwrap();
        assert!(!r.is_consistent());
        let r = Rule::new(vec![lit(0, 0), lit(0, 0), lit(1, 1)], ClassId(0), &b).unwrap();
        assert!(r.is_consistent());
        assert_eq!(r.antecedent().len(), 2);
    }

    #[test]
    fn instance_literals_in_feature_order() {
        let dl = mhs_example();
        let lits = instance_literals(dl.space(), &[1, 1, 1, 1, 1]);
        assert_eq!(lits, (0..5).map(|j| lit(j, 1)).collect::<Vec<_>>());
        let one = FeatureSpace::boolean(1, &["n", "p"]);
        assert_eq!(instance_literals(&one, &[0]), vec![lit(0, 0)]);
    }

    #[test]
    fn first_rule_is_self_determining() {
        let dl = mhs_example();
        assert!(is_self_determining(&dl, 0));
        // x3≠1 is consistent with x1=1 ∧ x2=1
        assert!(!is_self_determining(&dl, 1));
    }

    #[test]
    fn space_validation() {
        let dup = FeatureSpace::new(
            vec![
                Feature {
                    name: "a".into(),
                    domain: vec!["0".into()],
                },
                Feature {
                    name: "a".into(),
                    domain: vec!["0".into()],
                },
            ],
            vec!["c".into()],
        );
        assert!(dup.is_err());
        let empty = FeatureSpace::new(
            vec![Feature {
                name: "a".into(),
                domain: vec![],
            }],
            vec!["c".into()],
        );
        assert!(empty.is_err());
        let one_class = FeatureSpace::boolean(1, &["c"]);
        let r = Rule::new(vec![lit(0, 1)], ClassId(0), &one_class).unwrap();
        assert!(DecisionList::new(one_class, vec![r], ClassId(0)).is_err());
    }

    #[test]
    fn point_iteration_covers_space() {
        let dl = mhs_example();
        assert_eq!(dl.space().points().count() as u128, dl.space().num_points().unwrap());
        assert_eq!(dl.space().num_points(), Some(243));
    }

    #[test]
    fn explanation_terms() {
        let p = [1, 0, 1, 1];
        let x = Explanation::axp([2, 3].into_iter().collect());
        assert_eq!(x.term(&p), vec![lit(2, 1), lit(3, 1)]);
        let y = Explanation::cxp([2].into_iter().collect());
        assert_eq!(y.term(&p), vec![lit(0, 1), lit(1, 0), lit(3, 1)]);
    }
}
