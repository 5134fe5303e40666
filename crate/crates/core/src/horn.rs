//! Polynomial-time AXp for decision lists whose rules are self-determining.
//!
//! Variable `u[i]` means "feature `i` is left free". Every constraint is then
//! a clause of negative literals, so one MCS of the soft units `u[i]` is found
//! by linear search with unit propagation alone.

use crate::dl::{classify, is_self_determining, DecisionList, Explanation, FeatureSet, Instance};
use crate::error::HornError;

/// How strictly [`check_restricted`] reads the precondition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictionMode {
    /// Also requires the default class to be predicted by no other rule.
    Strict,
    /// Only requires self-determining, self-consistent rules.
    Relaxed,
}

/// Horn clause over `u[0..num_vars]`: `neg` are negated variables, `pos` at
/// most one positive variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornClause {
    pub neg: Vec<usize>,
    pub pos: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornQuery {
    pub num_vars: usize,
    pub hard: Vec<HornClause>,
    /// Soft positive units `u[i]`, tried in this order.
    pub soft: Vec<usize>,
    pub target_rule: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HornStats {
    /// Satisfiability checks, each a single unit-propagation pass.
    pub checks: usize,
    pub propagations: usize,
}

pub fn check_restricted(dl: &DecisionList, mode: RestrictionMode) -> bool {
    let rules = dl.rules();
    let local = (0..rules.len()).all(|i| rules[i].is_consistent() && is_self_determining(dl, i));
    match mode {
        RestrictionMode::Relaxed => local,
        RestrictionMode::Strict => local && rules.iter().all(|r| r.prediction() != dl.default_class()),
    }
}

/// Builds the Horn query for `inst`.
pub fn horn_query(dl: &DecisionList, inst: &Instance, mode: RestrictionMode) -> Result<HornQuery, HornError> {
    let (class, k) = classify(dl, &inst.point)?;
    if !check_restricted(dl, mode) {
        return Err(HornError::NotRestricted(format!("{mode:?} precondition fails")));
    }
    if mode == RestrictionMode::Relaxed && dl.is_default(k) {
        return Err(HornError::NotRestricted(
            "default rule fires and other rules share its class".into(),
        ));
    }
    let m = dl.space().num_features();
    let mut hard = Vec::new();
    for (j, rule) in dl.rules()[..k].iter().enumerate() {
        if rule.prediction() == class && !dl.is_default(k) {
            continue;
        }
        if !rule.is_consistent() {
            continue;
        }
        let mut clashing: Vec<usize> = rule
            .antecedent()
            .iter()
            .filter(|l| !l.holds(&inst.point))
            .map(|l| l.feature)
            .collect();
        clashing.dedup();
        if clashing.is_empty() {
            return Err(HornError::Contract(format!("rule {j} precedes the firing rule but fires")));
        }
        hard.push(HornClause { neg: clashing, pos: None });
    }
    if !dl.is_default(k) {
        let mut forced: Vec<usize> = dl.antecedent(k).iter().map(|l| l.feature).collect();
        forced.dedup();
        for i in forced {
            hard.push(HornClause { neg: vec![i], pos: None });
        }
    }
    Ok(HornQuery {
        num_vars: m,
        hard,
        soft: (0..m).collect(),
        target_rule: k,
    })
}

/// Unit propagation from the facts `u[i]`, `i ∈ facts`. Returns whether the
/// hard clauses are satisfied by the least model.
fn propagate(q: &HornQuery, facts: &[bool], stats: &mut HornStats) -> bool {
    stats.checks += 1;
    let mut value = vec![false; q.num_vars];
    let mut remaining: Vec<usize> = q.hard.iter().map(|c| c.neg.len()).collect();
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); q.num_vars];
    for (ci, c) in q.hard.iter().enumerate() {
        for &v in &c.neg {
            watch[v].push(ci);
        }
    }
    let mut queue: Vec<usize> = Vec::new();
    let assign = |v: usize, value: &mut Vec<bool>, queue: &mut Vec<usize>| {
        if !value[v] {
            value[v] = true;
            queue.push(v);
        }
    };
    for (v, &f) in facts.iter().enumerate() {
        if f {
            assign(v, &mut value, &mut queue);
        }
    }
    for (ci, c) in q.hard.iter().enumerate() {
        if remaining[ci] == 0 {
            match c.pos {
                Some(p) => assign(p, &mut value, &mut queue),
                None => return false,
            }
        }
    }
    while let Some(v) = queue.pop() {
        stats.propagations += 1;
        for &ci in &watch[v] {
            remaining[ci] -= 1;
            if remaining[ci] == 0 {
                match q.hard[ci].pos {
                    Some(p) => assign(p, &mut value, &mut queue),
                    None => return false,
                }
            }
        }
    }
    true
}

/// One MCS of the soft units by linear search, ascending.
pub fn horn_mcs(q: &HornQuery) -> Result<(FeatureSet, HornStats), HornError> {
    if q.hard.iter().any(|c| c.pos.is_some_and(|p| p >= q.num_vars) || c.neg.iter().any(|&v| v >= q.num_vars)) {
        return Err(HornError::Contract("variable out of range".into()));
    }
    let mut stats = HornStats::default();
    let mut facts = vec![false; q.num_vars];
    if !propagate(q, &facts, &mut stats) {
        return Err(HornError::Contract("hard clauses are unsatisfiable".into()));
    }
    let mut mcs = FeatureSet::new();
    for &i in &q.soft {
        facts[i] = true;
        if !propagate(q, &facts, &mut stats) {
            facts[i] = false;
            mcs.insert(i);
        }
    }
    Ok((mcs, stats))
}

/// AXp of `inst`: the features that must stay fixed in the Horn MCS.
pub fn horn_axp(dl: &DecisionList, inst: &Instance, mode: RestrictionMode) -> Result<Explanation, HornError> {
    horn_axp_with_stats(dl, inst, mode).map(|(e, _)| e)
}

pub fn horn_axp_with_stats(
    dl: &DecisionList,
    inst: &Instance,
    mode: RestrictionMode,
) -> Result<(Explanation, HornStats), HornError> {
    let q = horn_query(dl, inst, mode)?;
    let (mcs, stats) = horn_mcs(&q)?;
    Ok((Explanation::axp(mcs), stats))
}
