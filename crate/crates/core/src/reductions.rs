//! Decision lists built from CNF satisfiability and DNF implicant queries.
//!
//! Formulas use DIMACS literals: `i` is variable `i` true, `-i` false, with
//! variables numbered from 1. The generated lists use Boolean features
//! `x1..xn` with values `0`/`1` and classes `neg`/`pos`.

use rand::Rng;

use crate::dl::{ClassId, DecisionList, FeatureSpace, Literal, Rule};
use crate::encode::encode_dlsat;
use crate::error::{ModelError, OracleError};
use crate::sat::{Lit, OracleSession};

pub const NEG: ClassId = ClassId(0);
pub const POS: ClassId = ClassId(1);

fn check_lits(num_vars: usize, lits: &[i32]) -> Result<(), ModelError> {
    match lits.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > num_vars) {
        Some(l) => Err(ModelError::Invalid(format!("literal {l} out of range 1..={num_vars}"))),
        None => Ok(()),
    }
}

fn lit_holds(l: i32, x: &[bool]) -> bool {
    x[l.unsigned_abs() as usize - 1] == (l > 0)
}

fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1u64 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, ModelError> {
        for c in &clauses {
            check_lits(num_vars, c)?;
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Satisfiability by trying every assignment.
    pub fn brute_sat(&self) -> bool {
        assignments(self.num_vars).any(|x| self.clauses.iter().all(|c| c.iter().any(|&l| lit_holds(l, &x))))
    }

    pub fn random(rng: &mut impl Rng, max_vars: usize, max_clauses: usize) -> Self {
        let n = rng.gen_range(1..=max_vars);
        let k = rng.gen_range(0..=max_clauses);
        let clauses = (0..k).map(|_| random_lits(rng, n, 3)).collect();
        CnfFormula { num_vars: n, clauses }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DnfFormula {
    num_vars: usize,
    terms: Vec<Vec<i32>>,
}

impl DnfFormula {
    pub fn new(num_vars: usize, terms: Vec<Vec<i32>>) -> Result<Self, ModelError> {
        for t in &terms {
            check_lits(num_vars, t)?;
        }
        Ok(DnfFormula { num_vars, terms })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> &[Vec<i32>] {
        &self.terms
    }

    /// Whether every assignment satisfying `p` satisfies some term.
    pub fn brute_implicant(&self, p: &[i32]) -> bool {
        assignments(self.num_vars)
            .filter(|x| p.iter().all(|&l| lit_holds(l, x)))
            .all(|x| self.terms.iter().any(|t| t.iter().all(|&l| lit_holds(l, &x))))
    }

    pub fn random(rng: &mut impl Rng, max_vars: usize, max_terms: usize) -> Self {
        let n = rng.gen_range(1..=max_vars);
        let k = rng.gen_range(0..=max_terms);
        let terms = (0..k).map(|_| random_lits(rng, n, 4)).collect();
        DnfFormula { num_vars: n, terms }
    }
}

/// Between one and `max_len` random literals over `n` variables.
pub fn random_lits(rng: &mut impl Rng, n: usize, max_len: usize) -> Vec<i32> {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| {
            let v = rng.gen_range(1..=n) as i32;
            if rng.gen_bool(0.5) {
                v
            } else {
                -v
            }
        })
        .collect()
}

fn space(n: usize) -> FeatureSpace {
    FeatureSpace::boolean(n, &["neg", "pos"])
}

/// `x_i = 1` for `i`, `x_i = 0` for `-i`; when `negate`, the opposite.
fn term(lits: &[i32], negate: bool) -> Vec<Literal> {
    lits.iter()
        .map(|&l| {
            let value = usize::from((l > 0) != negate);
            Literal::eq(l.unsigned_abs() as usize - 1, value)
        })
        .collect()
}

/// One rule per clause whose antecedent falsifies the clause, predicting
/// `neg`; default `pos`. Some point reaches `pos` iff `phi` is satisfiable.
pub fn cnf_to_dl(phi: &CnfFormula) -> DecisionList {
    let sp = space(phi.num_vars);
    let rules = phi
        .clauses
        .iter()
        .map(|c| Rule::new(term(c, true), NEG, &sp).expect("literals checked on construction"))
        .collect();
    DecisionList::new(sp, rules, POS).expect("two classes")
}

/// One `neg` rule per term of `psi`, then `p => pos`, default `neg`. Some
/// point reaches `pos` iff `p` is not an implicant of `psi`.
pub fn dnfim_to_dl(psi: &DnfFormula, p: &[i32]) -> Result<DecisionList, ModelError> {
    check_lits(psi.num_vars, p)?;
    let sp = space(psi.num_vars);
    let mut rules: Vec<Rule> = psi
        .terms
        .iter()
        .map(|t| Rule::new(term(t, false), NEG, &sp))
        .collect::<Result<_, _>>()?;
    rules.push(Rule::new(term(p, false), POS, &sp)?);
    DecisionList::new(sp, rules, NEG)
}

/// Decides whether some point is classified as `target` with the SAT oracle.
pub fn sat_dlsat(dl: &DecisionList, target: ClassId) -> Result<bool, OracleError> {
    let (vm, clauses) = encode_dlsat(dl, target);
    let mut s = OracleSession::new();
    s.reserve_vars(vm.num_vars());
    s.add_clauses(&clauses, None)?;
    Ok(s.solve(&[] as &[Lit])?.is_sat())
}

fn parse_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        column: 1,
        message: message.into(),
    }
}

/// Reads `p <kind> V N` followed by `N` zero-terminated literal lists.
fn parse_dimacs(text: &str, kind: &str) -> Result<(usize, Vec<Vec<i32>>), ModelError> {
    let mut header: Option<(usize, usize)> = None;
    let mut lists = Vec::new();
    let mut current = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        if t.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(line, "duplicate header"));
            }
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != kind {
                return Err(parse_err(line, format!("expected `p {kind} <vars> <count>`")));
            }
            let v = parts[2].parse().map_err(|_| parse_err(line, "bad variable count"))?;
            let n = parts[3].parse().map_err(|_| parse_err(line, "bad list count"))?;
            header = Some((v, n));
            continue;
        }
        let (num_vars, _) = header.ok_or_else(|| parse_err(line, "literals before header"))?;
        for tok in t.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| parse_err(line, format!("bad literal `{tok}`")))?;
            if l == 0 {
                lists.push(std::mem::take(&mut current));
            } else if l.unsigned_abs() as usize > num_vars {
                return Err(parse_err(line, format!("literal {l} exceeds {num_vars} variables")));
            } else {
                current.push(l);
            }
        }
    }
    let (num_vars, count) = header.ok_or_else(|| parse_err(last_line.max(1), "missing header"))?;
    if !current.is_empty() {
        return Err(parse_err(last_line, "last list is not 0-terminated"));
    }
    if lists.len() != count {
        return Err(parse_err(
            last_line.max(1),
            format!("header declares {count} lists, found {}", lists.len()),
        ));
    }
    Ok((num_vars, lists))
}

pub fn parse_dimacs_cnf(text: &str) -> Result<CnfFormula, ModelError> {
    let (n, clauses) = parse_dimacs(text, "cnf")?;
    CnfFormula::new(n, clauses)
}

pub fn parse_dimacs_dnf(text: &str) -> Result<DnfFormula, ModelError> {
    let (n, terms) = parse_dimacs(text, "dnf")?;
    DnfFormula::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute::{bf_dlsat, BruteBounds};

    fn dlsat(dl: &DecisionList) -> bool {
        let bf = bf_dlsat(dl, POS, &BruteBounds::default()).unwrap();
        assert_eq!(sat_dlsat(dl, POS).unwrap(), bf);
        bf
    }

    #[test]
    fn cnf_gadget() {
        let phi = CnfFormula::new(2, vec![vec![1, 2], vec![-1, -2]]).unwrap();
        let dl = cnf_to_dl(&phi);
        assert_eq!(dl.num_rules(), 2);
        assert!(dlsat(&dl));
        let phi = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert!(!dlsat(&cnf_to_dl(&phi)));
        let phi = CnfFormula::new(2, vec![]).unwrap();
        let dl = cnf_to_dl(&phi);
        assert_eq!(dl.num_rules(), 0);
        assert!(dlsat(&dl));
    }

    #[test]
    fn tautologies_and_empty_clauses() {
        let phi = CnfFormula::new(2, vec![vec![1, -1, 1]]).unwrap();
        let dl = cnf_to_dl(&phi);
        assert!(!dl.rules()[0].is_consistent());
        assert!(dlsat(&dl));
        let phi = CnfFormula::new(2, vec![vec![]]).unwrap();
        assert!(!dlsat(&cnf_to_dl(&phi)));
    }

    #[test]
    fn dnf_gadget() {
        let psi = DnfFormula::new(2, vec![vec![1], vec![2]]).unwrap();
        assert!(!dlsat(&dnfim_to_dl(&psi, &[1]).unwrap()));
        let dl = dnfim_to_dl(&psi, &[-1]).unwrap();
        assert!(dlsat(&dl));
        assert_eq!(dl.classify_point(&[0, 0]).0, POS);
        assert!(!dlsat(&dnfim_to_dl(&psi, &[2]).unwrap()));
        assert!(dnfim_to_dl(&psi, &[3]).is_err());
    }

    #[test]
    fn brute_answers() {
        assert!(CnfFormula::new(2, vec![vec![1, 2], vec![-1, -2]]).unwrap().brute_sat());
        assert!(!CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap().brute_sat());
        let psi = DnfFormula::new(2, vec![vec![1], vec![2]]).unwrap();
        assert!(psi.brute_implicant(&[1]));
        assert!(!psi.brute_implicant(&[-1]));
    }

    #[test]
    fn dimacs_readers() {
        let phi = parse_dimacs_cnf("c demo\np cnf 3 2\n1 -2 0\n3\n 0\n").unwrap();
        assert_eq!(phi.num_vars(), 3);
        assert_eq!(phi.clauses(), &[vec![1, -2], vec![3]]);
        let psi = parse_dimacs_dnf("p dnf 2 2\n1 2 0\n-1 0\n").unwrap();
        assert_eq!(psi.terms(), &[vec![1, 2], vec![-1]]);
        for bad in ["1 0\n", "p cnf 1 1\n2 0\n", "p cnf 1 2\n1 0\n", "p cnf 1 1\n1\n", "p dnf 1 0\n", "p cnf 1 1\nx 0\n"] {
            assert!(matches!(parse_dimacs_cnf(bad), Err(ModelError::Parse { .. })), "{bad:?}");
        }
    }
}
