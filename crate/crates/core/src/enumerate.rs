//! Enumeration of all AXps or all CXps of one instance.

use std::time::{Duration, Instant};

use crate::dl::{ClassId, FeatureSet};
use crate::error::{ExplainError, OracleError};
use crate::explain::{one_cxp, reduce_cxp_from_model, reduce_dual, unit_cxps, ExplainSession, Query};
use crate::dl::ExplanationKind;
use crate::sat::{Lit, OracleSession, SolveOutcome, Var};

/// Answer of [`HittingSetOracle::next_set`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MhsAnswer {
    Set(FeatureSet),
    Exhausted,
}

/// Minimum-cardinality hitting sets over `0..universe`, smallest first,
/// ties broken by the lexicographically smallest sorted element vector.
pub struct HittingSetOracle {
    universe: usize,
    solver: OracleSession,
    x: Vec<Var>,
    /// `at_least[k]` is implied by `k + 1` or more chosen elements.
    at_least: Vec<Lit>,
    bound: usize,
    calls: u64,
}

impl HittingSetOracle {
    pub fn new(universe: usize, deadline: Option<Instant>) -> Self {
        let mut solver = OracleSession::new();
        solver.set_deadline(deadline);
        let x: Vec<Var> = (0..universe).map(|_| solver.new_var()).collect();
        let mut oracle = HittingSetOracle {
            universe,
            solver,
            x: x.clone(),
            at_least: Vec::new(),
            bound: 0,
            calls: 0,
        };
        let inputs: Vec<Lit> = x.iter().map(|v| v.pos()).collect();
        oracle.at_least = oracle.totalizer(&inputs);
        oracle
    }

    /// Unary counter outputs for `inputs` (only the upward implications).
    fn totalizer(&mut self, inputs: &[Lit]) -> Vec<Lit> {
        if inputs.len() <= 1 {
            return inputs.to_vec();
        }
        let (l, r) = inputs.split_at(inputs.len() / 2);
        let a = self.totalizer(l);
        let b = self.totalizer(r);
        let out: Vec<Lit> = (0..inputs.len()).map(|_| self.solver.new_var().pos()).collect();
        for i in 0..=a.len() {
            for j in 0..=b.len() {
                if i + j == 0 {
                    continue;
                }
                let mut clause = Vec::with_capacity(3);
                if i > 0 {
                    clause.push(!a[i - 1]);
                }
                if j > 0 {
                    clause.push(!b[j - 1]);
                }
                clause.push(out[i + j - 1]);
                self.solver.add_clause(&clause, None).expect("no selector");
            }
        }
        out
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    fn check(&mut self, set: &FeatureSet) -> Result<(), ExplainError> {
        match set.iter().find(|&&j| j >= self.universe) {
            Some(j) => Err(ExplainError::Contract(format!("element {j} outside the universe"))),
            None => Ok(()),
        }
    }

    /// Requires every later answer to intersect `set`.
    pub fn add_set(&mut self, set: &FeatureSet) -> Result<(), ExplainError> {
        if set.is_empty() {
            return Err(ExplainError::Contract("cannot hit the empty set".into()));
        }
        self.check(set)?;
        let clause: Vec<Lit> = set.iter().map(|&j| self.x[j].pos()).collect();
        Ok(self.solver.add_clause(&clause, None)?)
    }

    /// Excludes `set` and all of its supersets from later answers.
    pub fn block(&mut self, set: &FeatureSet) -> Result<(), ExplainError> {
        self.check(set)?;
        let clause: Vec<Lit> = set.iter().map(|&j| self.x[j].neg()).collect();
        Ok(self.solver.add_clause(&clause, None)?)
    }

    fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, OracleError> {
        self.calls += 1;
        self.solver.solve(assumptions)
    }

    pub fn next_set(&mut self) -> Result<MhsAnswer, ExplainError> {
        while self.bound <= self.universe {
            let k = self.bound;
            let mut assumptions = Vec::new();
            if k < self.universe {
                assumptions.push(!self.at_least[k]);
            }
            let mut model = match self.solve(&assumptions)? {
                SolveOutcome::Sat(m) => m,
                SolveOutcome::Unsat(_) => {
                    self.bound += 1;
                    continue;
                }
            };
            let mut chosen = FeatureSet::new();
            for j in 0..self.universe {
                let lit = self.x[j].pos();
                if chosen.len() == k {
                    break;
                }
                if !model.lit_value(lit) {
                    assumptions.push(lit);
                    match self.solve(&assumptions)? {
                        SolveOutcome::Sat(m) => model = m,
                        SolveOutcome::Unsat(_) => {
                            assumptions.pop();
                            assumptions.push(!lit);
                            continue;
                        }
                    }
                } else {
                    assumptions.push(lit);
                }
                chosen.insert(j);
            }
            return Ok(MhsAnswer::Set(chosen));
        }
        Ok(MhsAnswer::Exhausted)
    }
}

/// Result of enumerating the explanations of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplanationReport {
    pub point: Vec<usize>,
    pub class: ClassId,
    /// Sorted lexicographically.
    pub axps: Vec<FeatureSet>,
    pub cxps: Vec<FeatureSet>,
    /// False when the budget ran out before enumeration finished.
    pub complete: bool,
    pub oracle_calls: u64,
    pub mhs_calls: u64,
    pub elapsed: Duration,
}

impl ExplanationReport {
    fn new(q: &Query) -> Self {
        ExplanationReport {
            point: q.point().to_vec(),
            class: q.class(),
            axps: Vec::new(),
            cxps: Vec::new(),
            complete: true,
            oracle_calls: 0,
            mhs_calls: 0,
            elapsed: Duration::ZERO,
        }
    }

    fn finish(mut self, start: Instant, calls_before: u64, sess: &ExplainSession<'_>) -> Self {
        self.axps.sort_by(|a, b| a.iter().cmp(b.iter()));
        self.cxps.sort_by(|a, b| a.iter().cmp(b.iter()));
        self.oracle_calls = sess.stats().calls - calls_before;
        self.elapsed = start.elapsed();
        self
    }

    pub fn num_axps(&self) -> usize {
        self.axps.len()
    }

    pub fn num_cxps(&self) -> usize {
        self.cxps.len()
    }

    pub fn avg_axp_size(&self) -> f64 {
        avg_size(&self.axps)
    }

    pub fn avg_cxp_size(&self) -> f64 {
        avg_size(&self.cxps)
    }
}

fn avg_size(sets: &[FeatureSet]) -> f64 {
    if sets.is_empty() {
        return 0.0;
    }
    sets.iter().map(|s| s.len()).sum::<usize>() as f64 / sets.len() as f64
}

/// Splits a timeout off from other errors.
fn budget<T>(r: Result<T, ExplainError>) -> Result<Option<T>, ExplainError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(ExplainError::Timeout) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Enumerates all explanations of kind `target` by alternating hitting-set
/// proposals with oracle checks; the dual explanations found along the way
/// are reported too. A unit-size CXp pass seeds the hitting sets.
pub fn enumerate_marco(
    sess: &mut ExplainSession<'_>,
    q: &Query,
    target: ExplanationKind,
) -> Result<ExplanationReport, ExplainError> {
    let start = Instant::now();
    let calls_before = sess.stats().calls;
    let mut report = ExplanationReport::new(q);
    let mut mhs = HittingSetOracle::new(q.num_features(), sess.deadline());
    let done = budget(marco_loop(sess, q, target, &mut mhs, &mut report))?;
    report.complete = done.is_some();
    report.mhs_calls = mhs.calls();
    Ok(report.finish(start, calls_before, sess))
}

fn marco_loop(
    sess: &mut ExplainSession<'_>,
    q: &Query,
    target: ExplanationKind,
    mhs: &mut HittingSetOracle,
    report: &mut ExplanationReport,
) -> Result<(), ExplainError> {
    let m = q.num_features();
    for j in unit_cxps(sess, q)? {
        let y: FeatureSet = [j].into_iter().collect();
        match target {
            ExplanationKind::Axp => mhs.add_set(&y)?,
            ExplanationKind::Cxp => mhs.block(&y)?,
        }
        report.cxps.push(y);
    }
    loop {
        let h = match mhs.next_set()? {
            MhsAnswer::Set(h) => h,
            MhsAnswer::Exhausted => return Ok(()),
        };
        match target {
            ExplanationKind::Axp => match q.check(sess, h.iter().copied())? {
                SolveOutcome::Unsat(_) => {
                    mhs.block(&h)?;
                    report.axps.push(h);
                }
                SolveOutcome::Sat(model) => {
                    let y = reduce_cxp_from_model(sess, q, &model)?;
                    mhs.add_set(&y)?;
                    report.cxps.push(y);
                }
            },
            ExplanationKind::Cxp => {
                let rest = (0..m).filter(|j| !h.contains(j));
                match q.check(sess, rest)? {
                    SolveOutcome::Sat(_) => {
                        mhs.block(&h)?;
                        report.cxps.push(h);
                    }
                    SolveOutcome::Unsat(core) => {
                        let candidate: FeatureSet = (0..m).filter(|&j| core.contains(&q.soft()[j])).collect();
                        let x = reduce_dual(sess, q, ExplanationKind::Axp, &candidate)?.features;
                        if x.is_empty() {
                            report.axps.push(x);
                            return Ok(());
                        }
                        mhs.add_set(&x)?;
                        report.axps.push(x);
                    }
                }
            }
        }
    }
}

/// Enumerates all CXps by repeated extraction, blocking each one found.
pub fn enumerate_cxp_lbx(sess: &mut ExplainSession<'_>, q: &Query) -> Result<ExplanationReport, ExplainError> {
    let start = Instant::now();
    let calls_before = sess.stats().calls;
    let mut report = ExplanationReport::new(q);
    let done = budget(lbx_loop(sess, q, &mut report))?;
    report.complete = done.is_some();
    Ok(report.finish(start, calls_before, sess))
}

fn lbx_loop(sess: &mut ExplainSession<'_>, q: &Query, report: &mut ExplanationReport) -> Result<(), ExplainError> {
    loop {
        match one_cxp(sess, q) {
            Ok(y) => {
                let clause: Vec<Lit> = q.block_clause(&y.features);
                q.add_instance_clause(sess, &clause)?;
                report.cxps.push(y.features);
            }
            Err(ExplainError::NoCxpExists) => return Ok(()),
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::Instance;
    use crate::encode::EncodingKind;
    use crate::model_io::parse_model;

    fn fs(xs: &[usize]) -> FeatureSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn mhs_order_and_blocking() {
        let mut o = HittingSetOracle::new(4, None);
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Set(fs(&[])));
        o.add_set(&fs(&[1, 2])).unwrap();
        o.add_set(&fs(&[2, 3])).unwrap();
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Set(fs(&[2])));
        o.block(&fs(&[2])).unwrap();
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Set(fs(&[1, 3])));
        o.block(&fs(&[1, 3])).unwrap();
        // {0,1,3} etc. are supersets of a blocked set; {0,...} alone cannot hit both
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Exhausted);
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Exhausted);
    }

    #[test]
    fn mhs_rejects_bad_sets() {
        let mut o = HittingSetOracle::new(2, None);
        assert!(matches!(o.add_set(&fs(&[])), Err(ExplainError::Contract(_))));
        assert!(matches!(o.add_set(&fs(&[2])), Err(ExplainError::Contract(_))));
        o.block(&fs(&[])).unwrap();
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Exhausted);
    }

    #[test]
    fn mhs_empty_universe() {
        let mut o = HittingSetOracle::new(0, None);
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Set(fs(&[])));
        o.block(&fs(&[])).unwrap();
        assert_eq!(o.next_set().unwrap(), MhsAnswer::Exhausted);
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
    fn all_modes_agree_on_three_rule_list() {
        let dl = parse_model(MHS).unwrap();
        let inst = Instance::new(dl.space(), vec![1; 5]).unwrap();
        let mut sess = ExplainSession::new(&dl, EncodingKind::Main).unwrap();
        let q = sess.prepare(&inst).unwrap();
        let axp = enumerate_marco(&mut sess, &q, ExplanationKind::Axp).unwrap();
        let q = sess.prepare(&inst).unwrap();
        let cxp = enumerate_marco(&mut sess, &q, ExplanationKind::Cxp).unwrap();
        let q = sess.prepare(&inst).unwrap();
        let lbx = enumerate_cxp_lbx(&mut sess, &q).unwrap();
        let xs = vec![fs(&[0, 1]), fs(&[2])];
        let ys = vec![fs(&[0, 2]), fs(&[1, 2])];
        assert_eq!(axp.axps, xs);
        assert_eq!(axp.cxps, ys);
        assert_eq!(cxp.axps, xs);
        assert_eq!(cxp.cxps, ys);
        assert_eq!(lbx.cxps, ys);
        assert!(axp.complete && cxp.complete && lbx.complete);
    }

    #[test]
    fn constant_list_has_empty_axp_and_no_cxp() {
        let dl = parse_model("feature a : 0, 1\nclasses : c\ndefault => c\n").unwrap();
        let inst = Instance::new(dl.space(), vec![1]).unwrap();
        let mut sess = ExplainSession::new(&dl, EncodingKind::Main).unwrap();
        for target in [ExplanationKind::Axp, ExplanationKind::Cxp] {
            let q = sess.prepare(&inst).unwrap();
            let r = enumerate_marco(&mut sess, &q, target).unwrap();
            assert_eq!(r.axps, vec![fs(&[])]);
            assert!(r.cxps.is_empty());
        }
        let q = sess.prepare(&inst).unwrap();
        assert!(enumerate_cxp_lbx(&mut sess, &q).unwrap().cxps.is_empty());
    }

    #[test]
    fn expired_deadline_gives_partial_report() {
        let dl = parse_model(MHS).unwrap();
        let inst = Instance::new(dl.space(), vec![1; 5]).unwrap();
        let mut sess = ExplainSession::new(&dl, EncodingKind::Main).unwrap();
        let q = sess.prepare(&inst).unwrap();
        sess.set_deadline(Some(Instant::now()));
        let r = enumerate_marco(&mut sess, &q, ExplanationKind::Axp).unwrap();
        assert!(!r.complete);
        let r = enumerate_cxp_lbx(&mut sess, &q).unwrap();
        assert!(!r.complete);
    }
}
