//! Propositional encodings of decision lists.
//!
//! Every encoding starts from the same instance-independent block: one
//! variable `b[j,v]` per feature value with exactly-one constraints (ALO plus
//! pairwise AMO), and one variable per non-default rule defined by a full
//! biconditional over its antecedent. The explanation query then adds hard
//! clauses stating that the prediction differs from the instance's class,
//! and one soft unit `b[j,v_j]` per feature.
//!
//! Variables `1..=shared_vars` and clauses `hard[..shared_hard]` only depend
//! on the decision list; everything after depends on the predicted class, so
//! a session can load the shared block once and the class blocks under
//! selectors.

use std::fmt::Write as _;

use crate::dl::{classify, ClassId, DecisionList, Instance, Literal, Polarity};
use crate::error::EncodeError;
use crate::sat::{Clause, Lit, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EncodingKind {
    /// Negated disjunction over same-class rules.
    Main,
    /// Sequential `s/p/q` encoding, binary classifiers only.
    Alternative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarMap {
    feature_base: Vec<u32>,
    domain_sizes: Vec<usize>,
    rule_vars: Vec<Var>,
    /// Alternative encoding: the ⊕-rule indices `n_1..n_L` and their `p`/`q`.
    fire_rules: Vec<usize>,
    p_vars: Vec<Var>,
    q_vars: Vec<Var>,
    /// DLSAT: per-rule "some earlier rule fires" chain and per-rule fire vars.
    chain_vars: Vec<Var>,
    shared_vars: u32,
    num_vars: u32,
}

impl VarMap {
    fn new() -> Self {
        VarMap {
            feature_base: Vec::new(),
            domain_sizes: Vec::new(),
            rule_vars: Vec::new(),
            fire_rules: Vec::new(),
            p_vars: Vec::new(),
            q_vars: Vec::new(),
            chain_vars: Vec::new(),
            shared_vars: 0,
            num_vars: 0,
        }
    }

    fn fresh(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    /// `b[j,v]`: feature `j` takes value `v`.
    pub fn value_var(&self, feature: usize, value: usize) -> Var {
        debug_assert!(value < self.domain_sizes[feature]);
        Var(self.feature_base[feature] + value as u32)
    }

    /// `t[k]` (main) or `s[k]` (alternative): rule `k`'s antecedent holds.
    pub fn rule_var(&self, rule: usize) -> Var {
        self.rule_vars[rule]
    }

    pub fn fire_rules(&self) -> &[usize] {
        &self.fire_rules
    }

    pub fn p_var(&self, r: usize) -> Var {
        self.p_vars[r]
    }

    pub fn q_var(&self, r: usize) -> Var {
        self.q_vars[r]
    }

    pub fn num_features(&self) -> usize {
        self.feature_base.len()
    }

    pub fn domain_size(&self, feature: usize) -> usize {
        self.domain_sizes[feature]
    }

    pub fn shared_vars(&self) -> u32 {
        self.shared_vars
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    fn literal(&self, lit: &Literal) -> Lit {
        let v = self.value_var(lit.feature, lit.value);
        match lit.polarity {
            Polarity::Eq => v.pos(),
            Polarity::Neq => v.neg(),
        }
    }

    /// The `b`-literals fixing `point`.
    pub fn point_lits(&self, point: &[usize]) -> Vec<Lit> {
        point
            .iter()
            .enumerate()
            .map(|(j, &v)| self.value_var(j, v).pos())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoding {
    pub kind: EncodingKind,
    pub varmap: VarMap,
    pub hard: Vec<Clause>,
    /// `hard[..shared_hard]` is instance-independent.
    pub shared_hard: usize,
    /// Soft units, one per feature in feature order.
    pub soft: Vec<Lit>,
    pub point: Vec<usize>,
    pub class: ClassId,
    pub firing_rule: usize,
}

impl Encoding {
    pub fn shared_clauses(&self) -> &[Clause] {
        &self.hard[..self.shared_hard]
    }

    pub fn class_clauses(&self) -> &[Clause] {
        &self.hard[self.shared_hard..]
    }
}

fn exactly_one(lits: &[Lit], out: &mut Vec<Clause>) {
    out.push(lits.to_vec());
    for (i, &a) in lits.iter().enumerate() {
        for &b in &lits[i + 1..] {
            out.push(vec![!a, !b]);
        }
    }
}

/// `out ↔ ⋀ conj`, both directions.
fn define_and(out_var: Lit, conj: &[Lit], clauses: &mut Vec<Clause>) {
    for &c in conj {
        clauses.push(vec![!out_var, c]);
    }
    let mut back: Clause = conj.iter().map(|&c| !c).collect();
    back.push(out_var);
    clauses.push(back);
}

/// `out ↔ ⋁ disj`, both directions.
fn define_or(out_var: Lit, disj: &[Lit], clauses: &mut Vec<Clause>) {
    for &d in disj {
        clauses.push(vec![!d, out_var]);
    }
    let mut fwd: Clause = disj.to_vec();
    fwd.push(!out_var);
    clauses.push(fwd);
}

/// Feature variables with exactly-one constraints, then one defined variable
/// per non-default rule. Self-inconsistent rules get a negative unit.
fn shared_block(dl: &DecisionList) -> (VarMap, Vec<Clause>) {
    let space = dl.space();
    let mut vm = VarMap::new();
    let mut hard = Vec::new();
    for j in 0..space.num_features() {
        let d = space.domain_size(j);
        vm.feature_base.push(vm.num_vars + 1);
        vm.domain_sizes.push(d);
        vm.num_vars += d as u32;
    }
    for j in 0..space.num_features() {
        let lits: Vec<Lit> = (0..vm.domain_sizes[j]).map(|v| vm.value_var(j, v).pos()).collect();
        exactly_one(&lits, &mut hard);
    }
    for _ in dl.rules() {
        let v = vm.fresh();
        vm.rule_vars.push(v);
    }
    for (k, rule) in dl.rules().iter().enumerate() {
        let t = vm.rule_vars[k].pos();
        if !rule.is_consistent() {
            hard.push(vec![!t]);
            continue;
        }
        let conj: Vec<Lit> = rule.antecedent().iter().map(|l| vm.literal(l)).collect();
        define_and(t, &conj, &mut hard);
    }
    vm.shared_vars = vm.num_vars;
    (vm, hard)
}

fn classify_instance(dl: &DecisionList, inst: &Instance) -> Result<(ClassId, usize), EncodeError> {
    Ok(classify(dl, &inst.point)?)
}

/// Explanation query for the main encoding: hard clauses say that no rule
/// predicting the instance's class fires.
pub fn encode_explanation_query(dl: &DecisionList, inst: &Instance) -> Result<Encoding, EncodeError> {
    let (class, firing_rule) = classify_instance(dl, inst)?;
    let (vm, mut hard) = shared_block(dl);
    let shared_hard = hard.len();

    for (j, rule) in dl.rules().iter().enumerate() {
        if rule.prediction() != class {
            continue;
        }
        let mut clause: Clause = Vec::with_capacity(j + 1);
        clause.push(vm.rule_var(j).neg());
        clause.extend((0..j).map(|p| vm.rule_var(p).pos()));
        hard.push(clause);
    }
    if dl.default_class() == class {
        hard.push((0..dl.num_rules()).map(|j| vm.rule_var(j).pos()).collect());
    }

    let soft = vm.point_lits(&inst.point);
    Ok(Encoding {
        kind: EncodingKind::Main,
        varmap: vm,
        hard,
        shared_hard,
        soft,
        point: inst.point.clone(),
        class,
        firing_rule,
    })
}

/// Sequential encoding for binary classifiers. `p[r]` holds when rule `n_r`
/// is the first firing rule, `q[r]` when one of `n_1..n_r` is; the hard unit
/// `¬q[L]` asks for a point with the other prediction.
pub fn encode_alternative(dl: &DecisionList, inst: &Instance) -> Result<Encoding, EncodeError> {
    let k = dl.space().num_classes();
    if k > 2 {
        return Err(EncodeError::MultiClassUnsupported(k));
    }
    let (class, firing_rule) = classify_instance(dl, inst)?;
    let (mut vm, mut hard) = shared_block(dl);
    let shared_hard = hard.len();

    let mut fire_rules: Vec<usize> = (0..dl.num_rules())
        .filter(|&i| dl.rules()[i].prediction() == class && dl.rules()[i].is_consistent())
        .collect();
    if dl.default_class() == class {
        fire_rules.push(dl.default_index());
    }
    for _ in &fire_rules {
        let p = vm.fresh();
        let q = vm.fresh();
        vm.p_vars.push(p);
        vm.q_vars.push(q);
    }

    for (r, &n) in fire_rules.iter().enumerate() {
        let mut conj: Vec<Lit> = Vec::new();
        if r > 0 {
            conj.push(vm.q_vars[r - 1].neg());
        }
        if !dl.is_default(n) {
            conj.push(vm.rule_var(n).pos());
        }
        conj.extend(
            (0..n)
                .filter(|&i| dl.rules()[i].prediction() != class)
                .map(|i| vm.rule_var(i).neg()),
        );
        define_and(vm.p_vars[r].pos(), &conj, &mut hard);
        let mut disj = vec![vm.p_vars[r].pos()];
        if r > 0 {
            disj.push(vm.q_vars[r - 1].pos());
        }
        define_or(vm.q_vars[r].pos(), &disj, &mut hard);
    }
    match vm.q_vars.last() {
        Some(q) => hard.push(vec![q.neg()]),
        // nothing can predict the class, which cannot happen for a fired rule
        None => hard.push(vec![]),
    }
    vm.fire_rules = fire_rules;

    let soft = vm.point_lits(&inst.point);
    Ok(Encoding {
        kind: EncodingKind::Alternative,
        varmap: vm,
        hard,
        shared_hard,
        soft,
        point: inst.point.clone(),
        class,
        firing_rule,
    })
}

pub fn encode(kind: EncodingKind, dl: &DecisionList, inst: &Instance) -> Result<Encoding, EncodeError> {
    match kind {
        EncodingKind::Main => encode_explanation_query(dl, inst),
        EncodingKind::Alternative => encode_alternative(dl, inst),
    }
}

/// CNF satisfiable iff some point is classified as `target`.
pub fn encode_dlsat(dl: &DecisionList, target: ClassId) -> (VarMap, Vec<Clause>) {
    let (mut vm, mut clauses) = shared_block(dl);
    let r = dl.num_rules();
    // before[i] ↔ some rule j < i fires; before[0] is false.
    let mut before: Vec<Option<Var>> = vec![None];
    for i in 0..r {
        let v = vm.fresh();
        vm.chain_vars.push(v);
        let mut disj = vec![vm.rule_var(i).pos()];
        if let Some(prev) = before[i] {
            disj.push(prev.pos());
        }
        define_or(v.pos(), &disj, &mut clauses);
        before.push(Some(v));
    }
    let mut goal: Clause = Vec::new();
    for (i, prev) in before.iter().enumerate().take(r + 1) {
        if dl.prediction(i) != target {
            continue;
        }
        let f = vm.fresh();
        let mut conj = Vec::new();
        if !dl.is_default(i) {
            conj.push(vm.rule_var(i).pos());
        }
        if let Some(prev) = prev {
            conj.push(prev.neg());
        }
        define_and(f.pos(), &conj, &mut clauses);
        goal.push(f.pos());
    }
    clauses.push(goal);
    (vm, clauses)
}

fn write_clause(out: &mut String, prefix: Option<u64>, clause: &[Lit]) {
    if let Some(w) = prefix {
        let _ = write!(out, "{w} ");
    }
    for l in clause {
        let _ = write!(out, "{} ", l.0);
    }
    out.push_str("0\n");
}

pub fn dump_dimacs(num_vars: u32, clauses: &[Clause]) -> String {
    let mut out = format!("p cnf {} {}\n", num_vars, clauses.len());
    for c in clauses {
        write_clause(&mut out, None, c);
    }
    out
}

/// Classic WCNF: hard clauses at weight `|soft| + 1`, soft units at weight 1.
pub fn dump_wcnf(enc: &Encoding) -> String {
    let top = enc.soft.len() as u64 + 1;
    let mut out = format!(
        "p wcnf {} {} {}\n",
        enc.varmap.num_vars(),
        enc.hard.len() + enc.soft.len(),
        top
    );
    for c in &enc.hard {
        write_clause(&mut out, Some(top), c);
    }
    for &s in &enc.soft {
        write_clause(&mut out, Some(1), &[s]);
    }
    out
}
