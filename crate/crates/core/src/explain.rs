//! Single-explanation extraction.
//!
//! An AXp is a minimal subset of the soft units that keeps the hard clauses
//! unsatisfiable (an MUS); a CXp is a minimal subset whose removal makes them
//! satisfiable (an MCS). Both are computed against an [`ExplainSession`],
//! which keeps one SAT oracle alive for a whole decision list and switches
//! between instances with selectors.

use std::collections::HashMap;
use std::time::Instant;

use crate::dl::{ClassId, DecisionList, Explanation, ExplanationKind, FeatureSet, Instance};
use crate::encode::{encode, Encoding, EncodingKind};
use crate::error::ExplainError;
use crate::sat::{Lit, Model, OracleSession, OracleStats, Selector, SolveOutcome, Var};

struct ClassGroup {
    selector: Selector,
    /// Session variable of the first class-local encoding variable.
    offset: u32,
}

/// One SAT oracle bound to a decision list and an encoding kind.
///
/// The instance-independent clauses are loaded once. Clauses that depend on
/// the predicted class live under one selector per class, and every prepared
/// instance gets a fresh selector for its blocking clauses.
pub struct ExplainSession<'a> {
    dl: &'a DecisionList,
    kind: EncodingKind,
    oracle: OracleSession,
    shared_vars: u32,
    groups: HashMap<ClassId, ClassGroup>,
    active_class: Option<ClassId>,
    active_instance: Option<Selector>,
}

impl<'a> ExplainSession<'a> {
    pub fn new(dl: &'a DecisionList, kind: EncodingKind) -> Result<Self, ExplainError> {
        let mut oracle = OracleSession::new();
        let probe = Instance {
            point: vec![0; dl.space().num_features()],
            label: None,
        };
        let enc = encode(kind, dl, &probe)?;
        oracle.reserve_vars(enc.varmap.shared_vars());
        oracle.add_clauses(enc.shared_clauses(), None)?;
        Ok(ExplainSession {
            dl,
            kind,
            oracle,
            shared_vars: enc.varmap.shared_vars(),
            groups: HashMap::new(),
            active_class: None,
            active_instance: None,
        })
    }

    pub fn decision_list(&self) -> &'a DecisionList {
        self.dl
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn oracle(&self) -> &OracleSession {
        &self.oracle
    }

    pub fn oracle_mut(&mut self) -> &mut OracleSession {
        &mut self.oracle
    }

    pub fn stats(&self) -> OracleStats {
        self.oracle.stats()
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.oracle.set_deadline(deadline);
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.oracle.deadline()
    }

    /// Encodes `inst`, loads whatever is missing and makes it the active
    /// instance. Blocking clauses of the previous instance are switched off.
    pub fn prepare(&mut self, inst: &Instance) -> Result<Query, ExplainError> {
        let enc = encode(self.kind, self.dl, inst)?;
        if enc.varmap.shared_vars() != self.shared_vars {
            return Err(ExplainError::Contract("encoding does not match the session".into()));
        }
        if let Some(prev) = self.active_instance.take() {
            self.oracle.retire_selector(prev)?;
        }
        if let Some(prev) = self.active_class.take() {
            let sel = self.groups[&prev].selector;
            self.oracle.set_selector(sel, false)?;
        }

        if let Some(group) = self.groups.get(&enc.class) {
            self.oracle.set_selector(group.selector, true)?;
        } else {
            let selector = self.oracle.new_selector();
            let offset = self.oracle.num_vars() + 1;
            let local = enc.varmap.num_vars() - self.shared_vars;
            self.oracle.reserve_vars(offset - 1 + local);
            let shared = self.shared_vars;
            for clause in enc.class_clauses() {
                let mapped: Vec<Lit> = clause
                    .iter()
                    .map(|&l| {
                        let v = l.var().0;
                        if v <= shared {
                            l
                        } else {
                            let nv = Var(v - shared - 1 + offset);
                            if l.is_positive() {
                                nv.pos()
                            } else {
                                nv.neg()
                            }
                        }
                    })
                    .collect();
                self.oracle.add_clause(&mapped, Some(selector))?;
            }
            self.groups.insert(enc.class, ClassGroup { selector, offset });
        }
        self.active_class = Some(enc.class);
        let instance_selector = self.oracle.new_selector();
        self.active_instance = Some(instance_selector);

        let soft_index = enc.soft.iter().enumerate().map(|(j, &l)| (l, j)).collect();
        Ok(Query {
            soft: enc.soft.clone(),
            soft_index,
            instance_selector,
            encoding: enc,
        })
    }

    /// Session variable for an encoding variable of the active class.
    pub fn map_var(&self, var: Var) -> Var {
        if var.0 <= self.shared_vars {
            return var;
        }
        let class = self.active_class.expect("no active instance");
        Var(var.0 - self.shared_vars - 1 + self.groups[&class].offset)
    }
}

/// An explanation query loaded into a session.
pub struct Query {
    soft: Vec<Lit>,
    soft_index: HashMap<Lit, usize>,
    instance_selector: Selector,
    encoding: Encoding,
}

impl Query {
    pub fn num_features(&self) -> usize {
        self.soft.len()
    }

    pub fn soft(&self) -> &[Lit] {
        &self.soft
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn class(&self) -> ClassId {
        self.encoding.class
    }

    pub fn point(&self) -> &[usize] {
        &self.encoding.point
    }

    pub fn instance_selector(&self) -> Selector {
        self.instance_selector
    }

    fn softs_of(&self, features: impl IntoIterator<Item = usize>) -> Vec<Lit> {
        features.into_iter().map(|j| self.soft[j]).collect()
    }

    fn features_of(&self, lits: &[Lit]) -> Vec<usize> {
        lits.iter().filter_map(|l| self.soft_index.get(l).copied()).collect()
    }

    /// Features whose soft unit is false in `model`.
    pub fn falsified(&self, model: &Model) -> FeatureSet {
        (0..self.soft.len()).filter(|&j| !model.lit_value(self.soft[j])).collect()
    }

    /// Solves the hard clauses together with the soft units of `kept`.
    pub fn check(
        &self,
        sess: &mut ExplainSession<'_>,
        kept: impl IntoIterator<Item = usize>,
    ) -> Result<SolveOutcome, ExplainError> {
        let assumptions = self.softs_of(kept);
        Ok(sess.oracle.solve(&assumptions)?)
    }

    /// Adds a clause that stays active until the next instance is prepared.
    pub fn add_instance_clause(&self, sess: &mut ExplainSession<'_>, clause: &[Lit]) -> Result<(), ExplainError> {
        Ok(sess.oracle.add_clause(clause, Some(self.instance_selector))?)
    }

    /// Clause requiring one of the soft units of `features` to hold.
    pub fn block_clause(&self, features: &FeatureSet) -> Vec<Lit> {
        self.softs_of(features.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoftStatus {
    Kept,
    Dropped,
    Undecided,
}

/// Working set of a deletion-based search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoftState {
    status: Vec<SoftStatus>,
}

impl SoftState {
    pub fn new(m: usize) -> Self {
        SoftState {
            status: vec![SoftStatus::Undecided; m],
        }
    }

    pub fn status(&self, j: usize) -> SoftStatus {
        self.status[j]
    }

    pub fn set(&mut self, j: usize, s: SoftStatus) {
        self.status[j] = s;
    }

    /// Features still assumed (kept or undecided).
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.status
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != SoftStatus::Dropped)
            .map(|(j, _)| j)
    }

    pub fn kept(&self) -> FeatureSet {
        self.status
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == SoftStatus::Kept)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Deletion-based MUS extraction restricted to `candidate`, ascending.
fn shrink_axp(sess: &mut ExplainSession<'_>, q: &Query, candidate: &FeatureSet) -> Result<FeatureSet, ExplainError> {
    let m = q.num_features();
    let mut state = SoftState::new(m);
    for j in 0..m {
        if !candidate.contains(&j) {
            state.set(j, SoftStatus::Dropped);
        }
    }
    for j in 0..m {
        if state.status(j) != SoftStatus::Undecided {
            continue;
        }
        state.set(j, SoftStatus::Dropped);
        let active: Vec<usize> = state.active().collect();
        match q.check(sess, active)? {
            SolveOutcome::Sat(_) => state.set(j, SoftStatus::Kept),
            SolveOutcome::Unsat(core) => {
                let in_core: FeatureSet = q.features_of(&core).into_iter().collect();
                for i in j + 1..m {
                    if state.status(i) == SoftStatus::Undecided && !in_core.contains(&i) {
                        state.set(i, SoftStatus::Dropped);
                    }
                }
            }
        }
    }
    Ok(state.kept())
}

/// One AXp by deletion-based linear search in ascending feature order.
pub fn one_axp(sess: &mut ExplainSession<'_>, q: &Query) -> Result<Explanation, ExplainError> {
    let all: FeatureSet = (0..q.num_features()).collect();
    Ok(Explanation::axp(shrink_axp(sess, q, &all)?))
}

/// One AXp by divide and conquer.
pub fn one_axp_quickxplain(sess: &mut ExplainSession<'_>, q: &Query) -> Result<Explanation, ExplainError> {
    if !q.check(sess, [])?.is_sat() {
        return Ok(Explanation::axp(FeatureSet::new()));
    }
    let all: Vec<usize> = (0..q.num_features()).collect();
    if q.check(sess, all.iter().copied())?.is_sat() {
        return Err(ExplainError::Contract("hard and soft clauses are satisfiable".into()));
    }
    let mut background = Vec::new();
    let found = quickxplain(sess, q, &mut background, false, &all)?;
    Ok(Explanation::axp(found.into_iter().collect()))
}

fn quickxplain(
    sess: &mut ExplainSession<'_>,
    q: &Query,
    background: &mut Vec<usize>,
    delta_nonempty: bool,
    candidates: &[usize],
) -> Result<Vec<usize>, ExplainError> {
    if delta_nonempty && !q.check(sess, background.iter().copied())?.is_sat() {
        return Ok(Vec::new());
    }
    if candidates.len() == 1 {
        return Ok(candidates.to_vec());
    }
    let (left, right) = candidates.split_at(candidates.len() / 2);
    let mark = background.len();
    background.extend_from_slice(left);
    let right_part = quickxplain(sess, q, background, !left.is_empty(), right)?;
    background.truncate(mark);
    background.extend_from_slice(&right_part);
    let left_part = quickxplain(sess, q, background, !right_part.is_empty(), left)?;
    background.truncate(mark);
    let mut out = left_part;
    out.extend(right_part);
    Ok(out)
}

/// One CXp: grow a satisfiable subset of the soft units from a model of the
/// hard clauses, using a clause over all still-falsified units to satisfy
/// several at once.
pub fn one_cxp(sess: &mut ExplainSession<'_>, q: &Query) -> Result<Explanation, ExplainError> {
    let model = match q.check(sess, [])? {
        SolveOutcome::Sat(m) => m,
        SolveOutcome::Unsat(_) => return Err(ExplainError::NoCxpExists),
    };
    let mut falsified = q.falsified(&model);
    loop {
        if falsified.is_empty() {
            return Err(ExplainError::Contract("hard and soft clauses are satisfiable".into()));
        }
        let satisfied: Vec<usize> = (0..q.num_features()).filter(|j| !falsified.contains(j)).collect();
        let d = sess.oracle.new_selector();
        let clause = q.block_clause(&falsified);
        sess.oracle.add_clause(&clause, Some(d))?;
        let outcome = q.check(sess, satisfied);
        sess.oracle.retire_selector(d)?;
        match outcome? {
            SolveOutcome::Sat(m) => falsified.retain(|&j| !m.lit_value(q.soft[j])),
            SolveOutcome::Unsat(_) => return Ok(Explanation::cxp(falsified)),
        }
    }
}

/// Linear-search MCS reduction of `candidate`, given a model that satisfies
/// every soft unit outside it.
fn shrink_cxp(
    sess: &mut ExplainSession<'_>,
    q: &Query,
    candidate: &FeatureSet,
    model: &Model,
) -> Result<FeatureSet, ExplainError> {
    let mut correction: FeatureSet = candidate
        .iter()
        .copied()
        .filter(|&j| !model.lit_value(q.soft[j]))
        .collect();
    let mut necessary = FeatureSet::new();
    while let Some(&j) = correction.iter().find(|j| !necessary.contains(j)) {
        let kept = (0..q.num_features()).filter(|i| !correction.contains(i) || *i == j);
        match q.check(sess, kept)? {
            SolveOutcome::Sat(m) => correction.retain(|&i| i != j && !m.lit_value(q.soft[i])),
            SolveOutcome::Unsat(_) => {
                necessary.insert(j);
            }
        }
    }
    Ok(correction)
}

/// Reduces a sufficient set (AXP) or a correction set (CXP) to a
/// subset-minimal explanation of the same kind.
pub fn reduce_dual(
    sess: &mut ExplainSession<'_>,
    q: &Query,
    kind: ExplanationKind,
    candidate: &FeatureSet,
) -> Result<Explanation, ExplainError> {
    if let Some(&j) = candidate.iter().find(|&&j| j >= q.num_features()) {
        return Err(ExplainError::Contract(format!("feature {j} outside the instance")));
    }
    match kind {
        ExplanationKind::Axp => {
            if q.check(sess, candidate.iter().copied())?.is_sat() {
                return Err(ExplainError::Contract("AXp candidate is not sufficient".into()));
            }
            Ok(Explanation::axp(shrink_axp(sess, q, candidate)?))
        }
        ExplanationKind::Cxp => {
            let rest = (0..q.num_features()).filter(|j| !candidate.contains(j));
            match q.check(sess, rest)? {
                SolveOutcome::Sat(model) => Ok(Explanation::cxp(shrink_cxp(sess, q, candidate, &model)?)),
                SolveOutcome::Unsat(_) => Err(ExplainError::Contract("CXp candidate does not allow a change".into())),
            }
        }
    }
}

pub(crate) fn reduce_cxp_from_model(
    sess: &mut ExplainSession<'_>,
    q: &Query,
    model: &Model,
) -> Result<FeatureSet, ExplainError> {
    let candidate = q.falsified(model);
    shrink_cxp(sess, q, &candidate, model)
}

/// Every feature whose release alone lets the prediction change.
pub fn unit_cxps(sess: &mut ExplainSession<'_>, q: &Query) -> Result<Vec<usize>, ExplainError> {
    let m = q.num_features();
    let mut out = Vec::new();
    for j in 0..m {
        if q.check(sess, (0..m).filter(|&i| i != j))?.is_sat() {
            out.push(j);
        }
    }
    Ok(out)
}
