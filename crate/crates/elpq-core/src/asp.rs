//! Ground answer-set semantics: model checking, reducts, minimality,
//! and enumeration.
//!
//! Candidate models come from minimal-model enumeration of the rules
//! read as satisfaction clauses (every answer set is a minimal model of
//! the program, since any smaller model of the program also models the
//! reduct). Stability is then checked per candidate: for normal programs
//! by comparing against the least model of the reduct's definite part,
//! for disjunctive programs by searching for a model of the reduct
//! strictly below the candidate. Positive normal programs collapse to a
//! single least-model computation.

use std::fmt;

use thiserror::Error;

use crate::budget::Budgets;
use crate::grounder::GroundProgram;
use crate::model::{Atom, Rule};
use crate::sat::{self, Bits, Clause};

#[derive(Debug, Error)]
pub enum AspError {
    #[error("epistemic elements present; reduce them before answer-set reasoning")]
    EpistemicPresent,
    #[error("program has {atoms} ground atoms, cap is {cap}")]
    BudgetExceeded { atoms: usize, cap: usize },
    #[error("least models require a positive program with at most one head atom per rule")]
    NotHorn,
    #[error("a constraint body is satisfied by the least model")]
    ConstraintViolated,
}

/// A set of ground atoms as a dense bitset keyed by the atom ids of one
/// [`GroundProgram`]. At most 128 atoms are supported.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation {
    bits: Bits,
}

impl Interpretation {
    pub fn empty() -> Self {
        Interpretation { bits: 0 }
    }

    pub(crate) fn from_bits(bits: Bits) -> Self {
        Interpretation { bits }
    }

    pub(crate) fn bits(&self) -> Bits {
        self.bits
    }

    /// Build from atoms; atoms missing from the program's table are an
    /// error in the caller and are reported as `None`.
    pub fn from_atoms<'a>(
        program: &GroundProgram,
        atoms: impl IntoIterator<Item = &'a Atom>,
    ) -> Option<Self> {
        let mut bits = 0;
        for a in atoms {
            bits |= 1u128 << program.atom_id(a)?;
        }
        Some(Interpretation { bits })
    }

    pub fn contains_id(&self, id: usize) -> bool {
        self.bits >> id & 1 == 1
    }

    pub fn insert_id(&mut self, id: usize) {
        self.bits |= 1 << id;
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        (0..128).filter(|i| self.contains_id(*i))
    }

    pub fn atoms<'p>(&self, program: &'p GroundProgram) -> Vec<&'p Atom> {
        self.ids()
            .filter(|&i| i < program.atom_count())
            .map(|i| program.atom(i))
            .collect()
    }

    pub fn render(&self, program: &GroundProgram) -> String {
        let names: Vec<String> = self.atoms(program).iter().map(|a| a.to_string()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:b}", self.bits)
    }
}

/// Rules indexed into bitset form.
#[derive(Debug, Clone)]
pub(crate) struct IndexedRule {
    pub head: Bits,
    pub pos: Bits,
    pub neg: Bits,
}

impl IndexedRule {
    pub fn clause(&self) -> Clause {
        Clause {
            pos: self.head | self.neg,
            neg: self.pos,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Indexed {
    pub atom_count: usize,
    pub rules: Vec<IndexedRule>,
}

impl Indexed {
    pub fn from_ground(program: &GroundProgram) -> Result<Self, AspError> {
        if program.has_epistemic() {
            return Err(AspError::EpistemicPresent);
        }
        let bits_of = |atoms: &[Atom]| -> Bits {
            atoms.iter().fold(0, |b, a| {
                b | 1u128
                    << program
                        .atom_id(a)
                        .expect("ground program atoms are in its own table")
            })
        };
        Ok(Indexed {
            atom_count: program.atom_count(),
            rules: program
                .rules()
                .iter()
                .map(|r| IndexedRule {
                    head: bits_of(&r.head),
                    pos: bits_of(&r.body_pos),
                    neg: bits_of(&r.body_neg),
                })
                .collect(),
        })
    }

    pub fn is_normal(&self) -> bool {
        self.rules.iter().all(|r| r.head.count_ones() <= 1)
    }

    pub fn is_positive(&self) -> bool {
        self.rules.iter().all(|r| r.neg == 0)
    }

    pub fn clauses(&self) -> Vec<Clause> {
        self.rules.iter().map(|r| r.clause()).collect()
    }

    /// Least model of the definite part; `ConstraintViolated` when a
    /// constraint body is contained in it.
    pub fn least_model_bits(&self) -> Result<Bits, AspError> {
        if !self.is_positive() || !self.is_normal() {
            return Err(AspError::NotHorn);
        }
        let mut derived: Bits = 0;
        loop {
            let mut changed = false;
            for r in &self.rules {
                if r.head != 0 && r.pos & !derived == 0 && r.head & !derived != 0 {
                    derived |= r.head;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for r in &self.rules {
            if r.head == 0 && r.pos & !derived == 0 {
                return Err(AspError::ConstraintViolated);
            }
        }
        Ok(derived)
    }

    /// Stability of a candidate for a normal program: the least model of
    /// the reduct's definite part must equal the candidate and no reduct
    /// constraint may fire.
    fn stable_normal(&self, candidate: Bits) -> bool {
        let mut derived: Bits = 0;
        loop {
            let mut changed = false;
            for r in &self.rules {
                if r.neg & candidate == 0
                    && r.head != 0
                    && r.pos & !derived == 0
                    && r.head & !derived != 0
                {
                    derived |= r.head;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if derived != candidate {
            return false;
        }
        self.rules
            .iter()
            .filter(|r| r.head == 0 && r.neg & candidate == 0)
            .all(|r| r.pos & !candidate != 0)
    }

    /// Stability for the general case: no model of the reduct may lie
    /// strictly below the candidate.
    fn stable_disjunctive(&self, candidate: Bits) -> bool {
        let reduct: Vec<Clause> = self
            .rules
            .iter()
            .filter(|r| r.neg & candidate == 0)
            .map(|r| Clause {
                pos: r.head,
                neg: r.pos,
            })
            .collect();
        debug_assert!(reduct.iter().all(|c| c.satisfied_by(candidate)));
        !sat::has_model_strictly_below(self.atom_count, &reduct, candidate)
    }

    /// Visit all answer sets; the visitor returns false to abort.
    /// Returns false when aborted.
    pub fn visit_answer_sets(&self, mut visit: impl FnMut(Bits) -> bool) -> bool {
        if self.is_positive() && self.is_normal() {
            if let Ok(m) = self.least_model_bits() {
                return visit(m);
            }
            return true;
        }
        let clauses = self.clauses();
        let normal = self.is_normal();
        sat::minimal_models(self.atom_count, &clauses, |m| {
            let stable = if normal {
                self.stable_normal(m)
            } else {
                self.stable_disjunctive(m)
            };
            if stable {
                visit(m)
            } else {
                true
            }
        })
    }
}

fn check_atom_budget(program: &GroundProgram, budgets: &Budgets) -> Result<(), AspError> {
    let cap = budgets.atoms.min(Budgets::MAX_ATOMS);
    if program.atom_count() > cap {
        return Err(AspError::BudgetExceeded {
            atoms: program.atom_count(),
            cap,
        });
    }
    Ok(())
}

/// Truth of one epistemic-free ground rule under `m`: the rule holds iff
/// a head or default-negated body atom is in `m`, or some positive body
/// atom is not.
pub fn satisfies(program: &GroundProgram, m: &Interpretation, rule: &Rule) -> Result<bool, AspError> {
    if rule.has_epistemic() {
        return Err(AspError::EpistemicPresent);
    }
    let holds = |a: &Atom| program.atom_id(a).is_some_and(|id| m.contains_id(id));
    Ok(rule.head.iter().chain(rule.body_neg.iter()).any(holds)
        || rule.body_pos.iter().any(|a| !holds(a)))
}

pub fn satisfies_program(program: &GroundProgram, m: &Interpretation) -> Result<bool, AspError> {
    for r in program.rules() {
        if !satisfies(program, m, r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The reduct w.r.t. `m`: rules whose default-negated body avoids `m`,
/// stripped of default negation. The atom table is preserved.
pub fn gl_reduct(program: &GroundProgram, m: &Interpretation) -> Result<GroundProgram, AspError> {
    if program.has_epistemic() {
        return Err(AspError::EpistemicPresent);
    }
    let rules: Vec<Rule> = program
        .rules()
        .iter()
        .filter(|r| {
            !r.body_neg
                .iter()
                .any(|a| program.atom_id(a).is_some_and(|id| m.contains_id(id)))
        })
        .map(|r| Rule::new(r.head.clone(), r.body_pos.clone(), vec![], vec![]))
        .collect();
    Ok(GroundProgram::from_rules_with_atoms(
        rules,
        program.atoms().to_vec(),
    ))
}

/// Is `m` a minimal model of the reduct w.r.t. itself?
pub fn is_answer_set(program: &GroundProgram, m: &Interpretation) -> Result<bool, AspError> {
    let idx = Indexed::from_ground(program)?;
    let candidate = m.bits();
    let reduct: Vec<Clause> = idx
        .rules
        .iter()
        .filter(|r| r.neg & candidate == 0)
        .map(|r| Clause {
            pos: r.head,
            neg: r.pos,
        })
        .collect();
    if !reduct.iter().all(|c| c.satisfied_by(candidate)) {
        return Ok(false);
    }
    Ok(!sat::has_model_strictly_below(idx.atom_count, &reduct, candidate))
}

/// All answer sets in a deterministic (ascending bitset) order.
pub fn answer_sets(
    program: &GroundProgram,
    budgets: &Budgets,
) -> Result<Vec<Interpretation>, AspError> {
    check_atom_budget(program, budgets)?;
    let idx = Indexed::from_ground(program)?;
    let mut out = Vec::new();
    idx.visit_answer_sets(|m| {
        out.push(Interpretation::from_bits(m));
        true
    });
    out.sort();
    Ok(out)
}

/// Streaming variant; `visit` returns false to abort. The result is
/// false when the enumeration was aborted.
pub fn answer_sets_visit(
    program: &GroundProgram,
    budgets: &Budgets,
    mut visit: impl FnMut(&Interpretation) -> bool,
) -> Result<bool, AspError> {
    check_atom_budget(program, budgets)?;
    let idx = Indexed::from_ground(program)?;
    Ok(idx.visit_answer_sets(|m| visit(&Interpretation::from_bits(m))))
}

/// Least model of a positive program with at most one head atom per
/// rule; fails with `ConstraintViolated` when a constraint fires.
pub fn least_model(program: &GroundProgram) -> Result<Interpretation, AspError> {
    let idx = Indexed::from_ground(program)?;
    Ok(Interpretation::from_bits(idx.least_model_bits()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn gp(text: &str) -> GroundProgram {
        GroundProgram::from_rules(parse_program(text).unwrap().rules)
    }

    fn interp(program: &GroundProgram, atoms: &[&str]) -> Interpretation {
        let owned: Vec<Atom> = atoms.iter().map(|s| Atom::prop(*s)).collect();
        Interpretation::from_atoms(program, owned.iter()).unwrap()
    }

    fn as_sets(program: &GroundProgram) -> Vec<Vec<String>> {
        answer_sets(program, &Budgets::default())
            .unwrap()
            .iter()
            .map(|m| m.atoms(program).iter().map(|a| a.to_string()).collect())
            .collect()
    }

    #[test]
    fn satisfies_examples() {
        let p = gp("a :- b.");
        let fact_a = Rule::fact(Atom::prop("a"));
        assert!(!satisfies(&p, &Interpretation::empty(), &fact_a).unwrap());
        let rule = &p.rules()[0];
        assert!(!satisfies(&p, &interp(&p, &["b"]), rule).unwrap());
        assert!(satisfies(&p, &interp(&p, &["a", "b"]), rule).unwrap());

        let c = gp(":- not a.");
        assert!(!satisfies(&c, &Interpretation::empty(), &c.rules()[0]).unwrap());
    }

    #[test]
    fn gl_reduct_examples() {
        let p = gp("a :- not b.");
        let r = gl_reduct(&p, &Interpretation::empty()).unwrap();
        assert_eq!(r.rules(), gp("a.").rules());
        let r = gl_reduct(&p, &interp(&p, &["b"])).unwrap();
        assert!(r.rules().is_empty());
        assert_eq!(r.atom_count(), 2);

        let p = gp("a v b.");
        for m in [Interpretation::empty(), interp(&p, &["a", "b"])] {
            assert_eq!(gl_reduct(&p, &m).unwrap().rules(), p.rules());
        }
    }

    #[test]
    fn is_answer_set_examples() {
        let p = gp("a :- not a.");
        assert!(!is_answer_set(&p, &interp(&p, &["a"])).unwrap());
        assert!(!is_answer_set(&p, &Interpretation::empty()).unwrap());

        let p = gp("a v b.");
        assert!(is_answer_set(&p, &interp(&p, &["a"])).unwrap());
        assert!(!is_answer_set(&p, &interp(&p, &["a", "b"])).unwrap());

        let p = gp("a.");
        assert!(is_answer_set(&p, &interp(&p, &["a"])).unwrap());
    }

    #[test]
    fn answer_sets_examples() {
        assert_eq!(as_sets(&gp("a v b. :- a.")), vec![vec!["b".to_string()]]);
        assert_eq!(as_sets(&gp("")), vec![Vec::<String>::new()]);
        assert_eq!(
            as_sets(&gp("a :- not b. b :- not a.")),
            vec![vec!["a".to_string()], vec!["b".to_string()]]
        );
        // inconsistent: empty-bodied constraint
        assert!(as_sets(&gp(":-. a.")).is_empty());
    }

    #[test]
    fn least_model_examples() {
        let p = gp("a. b :- a.");
        let m = least_model(&p).unwrap();
        assert_eq!(m.len(), 2);

        let p = gp("a. :- a.");
        assert!(matches!(least_model(&p), Err(AspError::ConstraintViolated)));

        let p = gp("b :- a.");
        assert!(least_model(&p).unwrap().is_empty());

        let p = gp("a v b.");
        assert!(matches!(least_model(&p), Err(AspError::NotHorn)));
    }

    #[test]
    fn budget_guard() {
        let text: String = (0..30).map(|i| format!("p{i} :- not q{i}. ")).collect();
        let p = gp(&text);
        assert!(matches!(
            answer_sets(&p, &Budgets::default()),
            Err(AspError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn epistemic_rejected() {
        let p = gp("a :- knot b.");
        assert!(matches!(
            answer_sets(&p, &Budgets::default()),
            Err(AspError::EpistemicPresent)
        ));
    }
}
