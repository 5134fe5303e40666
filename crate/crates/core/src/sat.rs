//! Incremental SAT oracle used by every explanation engine.
//!
//! An [`OracleSession`] owns one CDCL solver. Clauses are append-only; a
//! clause added under a [`Selector`] `a` is stored as `¬a ∨ clause` and only
//! participates in a call while `a` is enabled (enabled selectors are passed
//! as assumptions, disabled ones are left free). UNSAT cores never mention
//! selectors.

use std::fmt;
use std::time::Instant;

use crate::error::OracleError;
use varisat::ExtendFormula;

/// Propositional variable, numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn pos(self) -> Lit {
        Lit(self.0 as i32)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit(-(self.0 as i32))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// DIMACS-style literal: `+v` or `-v`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(pub i32);

impl Lit {
    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    fn to_backend(self) -> varisat::Lit {
        varisat::Lit::from_dimacs(self.0 as isize)
    }

    fn from_backend(l: varisat::Lit) -> Lit {
        Lit(l.to_dimacs() as i32)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Clause = Vec<Lit>;

/// Total assignment returned on SAT. Variables the solver never saw read as
/// false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, var: Var) -> bool {
        self.values.get(var.index()).copied().unwrap_or(false)
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Model),
    /// Subset of the caller's assumptions sufficient for unsatisfiability.
    Unsat(Vec<Lit>),
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selector(Var);

impl Selector {
    pub fn var(self) -> Var {
        self.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleStats {
    pub calls: u64,
    pub sat: u64,
    pub unsat: u64,
    pub clauses: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SelectorState {
    Enabled,
    Disabled,
    Retired,
}

pub struct OracleSession {
    solver: varisat::Solver<'static>,
    num_vars: u32,
    /// Indexed by selector variable.
    selectors: Vec<Option<SelectorState>>,
    enabled: Vec<Var>,
    deadline: Option<Instant>,
    stats: OracleStats,
}

impl Default for OracleSession {
    fn default() -> Self {
        Self::new()
    }
}

impl OracleSession {
    pub fn new() -> Self {
        OracleSession {
            solver: varisat::Solver::new(),
            num_vars: 0,
            selectors: Vec::new(),
            enabled: Vec::new(),
            deadline: None,
            stats: OracleStats::default(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Makes variables `1..=n` known to the session.
    pub fn reserve_vars(&mut self, n: u32) {
        self.num_vars = self.num_vars.max(n);
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    /// Calls made after `deadline` fail with [`OracleError::Timeout`].
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.deadline
    }

    /// Allocates a fresh selector, enabled.
    pub fn new_selector(&mut self) -> Selector {
        let v = self.new_var();
        let idx = v.index();
        if self.selectors.len() <= idx {
            self.selectors.resize(idx + 1, None);
        }
        self.selectors[idx] = Some(SelectorState::Enabled);
        self.enabled.push(v);
        Selector(v)
    }

    fn state(&self, sel: Selector) -> Result<SelectorState, OracleError> {
        self.selectors
            .get(sel.0.index())
            .copied()
            .flatten()
            .ok_or(OracleError::UnknownSelector(sel.0 .0))
    }

    pub fn is_enabled(&self, sel: Selector) -> Result<bool, OracleError> {
        Ok(self.state(sel)? == SelectorState::Enabled)
    }

    /// Toggles every clause tagged with `sel`. Retired selectors stay off.
    pub fn set_selector(&mut self, sel: Selector, enabled: bool) -> Result<(), OracleError> {
        let state = self.state(sel)?;
        let next = match (state, enabled) {
            (SelectorState::Retired, _) => SelectorState::Retired,
            (_, true) => SelectorState::Enabled,
            (_, false) => SelectorState::Disabled,
        };
        self.selectors[sel.0.index()] = Some(next);
        self.enabled.retain(|v| *v != sel.0);
        if next == SelectorState::Enabled {
            self.enabled.push(sel.0);
        }
        Ok(())
    }

    /// Permanently disables `sel` by asserting its negation.
    pub fn retire_selector(&mut self, sel: Selector) -> Result<(), OracleError> {
        self.state(sel)?;
        self.selectors[sel.0.index()] = Some(SelectorState::Retired);
        self.enabled.retain(|v| *v != sel.0);
        self.solver.add_clause(&[sel.0.neg().to_backend()]);
        Ok(())
    }

    pub fn add_clause(&mut self, clause: &[Lit], selector: Option<Selector>) -> Result<(), OracleError> {
        let mut lits: Vec<varisat::Lit> = Vec::with_capacity(clause.len() + 1);
        if let Some(sel) = selector {
            self.state(sel)?;
            lits.push(sel.0.neg().to_backend());
        }
        for &l in clause {
            debug_assert!(l.0 != 0);
            self.num_vars = self.num_vars.max(l.var().0);
            lits.push(l.to_backend());
        }
        self.solver.add_clause(&lits);
        self.stats.clauses += 1;
        Ok(())
    }

    pub fn add_clauses<'c>(
        &mut self,
        clauses: impl IntoIterator<Item = &'c Clause>,
        selector: Option<Selector>,
    ) -> Result<(), OracleError> {
        for c in clauses {
            self.add_clause(c, selector)?;
        }
        Ok(())
    }

    /// Solves under the enabled selectors plus `assumptions`.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, OracleError> {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return Err(OracleError::Timeout);
            }
        }
        let mut all: Vec<varisat::Lit> = Vec::with_capacity(self.enabled.len() + assumptions.len());
        all.extend(self.enabled.iter().map(|v| v.pos().to_backend()));
        for &a in assumptions {
            self.num_vars = self.num_vars.max(a.var().0);
            all.push(a.to_backend());
        }
        self.solver.assume(&all);
        self.stats.calls += 1;
        let sat = self.solver.solve().map_err(|e| OracleError::Backend(e.to_string()))?;
        if sat {
            self.stats.sat += 1;
            let mut values = vec![false; self.num_vars as usize + 1];
            for l in self.solver.model().unwrap_or_default() {
                let l = Lit::from_backend(l);
                if let Some(slot) = values.get_mut(l.var().index()) {
                    *slot = l.is_positive();
                }
            }
            Ok(SolveOutcome::Sat(Model { values }))
        } else {
            self.stats.unsat += 1;
            let failed = self.solver.failed_core().unwrap_or(&[]);
            let mut core: Vec<Lit> = failed
                .iter()
                .map(|&l| Lit::from_backend(l))
                .filter(|l| assumptions.contains(l))
                .collect();
            core.sort_by_key(|l| assumptions.iter().position(|a| a == l));
            core.dedup();
            Ok(SolveOutcome::Unsat(core))
        }
    }
}
