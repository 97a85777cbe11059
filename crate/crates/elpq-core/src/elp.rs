//! World-view semantics: epistemic reduct, compatibility, guess-driven
//! enumeration and counting, and the polynomial path for the
//! negation-free fragment.
//!
//! Enumeration ranges over stances on the distinct epistemic inner
//! literals rather than over all signed-literal interpretations: the
//! reduct depends only on those stances, and compatibility pins every
//! remaining literal to the intersection/union of the reduct's answer
//! sets, so each accepted guess determines exactly one world view. The
//! cubic-per-atom interpretation sweep survives only as a test oracle.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use thiserror::Error;

use crate::asp::{AspError, Indexed, IndexedRule, Interpretation};
use crate::budget::Budgets;
use crate::grounder::GroundProgram;
use crate::model::{classify, Literal, ProgramClass, Rule};
use crate::sat::{mask, Bits};

#[derive(Debug, Error)]
pub enum ElpError {
    #[error(transparent)]
    Asp(#[from] AspError),
    #[error("{inner_literals} distinct epistemic inner literals, guess cap is {cap}")]
    BudgetExceeded { inner_literals: usize, cap: usize },
    #[error("expected a program in the negation-free fragment, found {found}")]
    WrongFragment { found: ProgramClass },
    #[error("cannot derive a world view interpretation from an empty answer-set collection")]
    EmptyCollection,
    #[error("guess does not cover inner literal `{literal}`")]
    IncompleteGuess { literal: Literal },
}

/// Membership stance of one inner literal in the candidate world view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stance {
    InWvi,
    NotInWvi,
}

/// Total assignment of stances to the distinct inner literals.
pub type EpistemicGuess = BTreeMap<Literal, Stance>;

/// A consistent set of signed ground literals: the atoms known to hold,
/// the atoms known to fail, with everything else varying.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Wvi {
    literals: Vec<Literal>,
}

impl Wvi {
    pub fn new(mut literals: Vec<Literal>) -> Self {
        literals.sort();
        literals.dedup();
        debug_assert!(
            literals
                .iter()
                .all(|l| !literals.contains(&l.negated())),
            "world view interpretations must be consistent"
        );
        Wvi { literals }
    }

    fn from_bits(program: &GroundProgram, pos: Bits, neg: Bits) -> Self {
        debug_assert_eq!(pos & neg, 0);
        let mut literals = Vec::new();
        for id in 0..program.atom_count() {
            if pos >> id & 1 == 1 {
                literals.push(Literal::positive(program.atom(id).clone()));
            } else if neg >> id & 1 == 1 {
                literals.push(Literal::negative(program.atom(id).clone()));
            }
        }
        Wvi::new(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn contains(&self, literal: &Literal) -> bool {
        self.literals.binary_search(literal).is_ok()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// A candidate world view together with the answer sets witnessing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldView {
    pub wvi: Wvi,
    pub witness_count: u64,
    pub witnesses: Option<Vec<Interpretation>>,
}

#[derive(Debug, Clone, Copy)]
pub struct WvOptions {
    /// Worker count for sharding the guess space; the result is
    /// independent of this value.
    pub jobs: usize,
    /// Keep the witnessing answer sets on each world view.
    pub store_witnesses: bool,
}

impl Default for WvOptions {
    fn default() -> Self {
        WvOptions {
            jobs: 1,
            store_witnesses: false,
        }
    }
}

/// Distinct inner literals of the program's epistemic elements, sorted.
pub fn inner_literals(program: &GroundProgram) -> Vec<Literal> {
    let mut lits: Vec<Literal> = program
        .rules()
        .iter()
        .flat_map(|r| r.body_epi.iter().map(|e| e.inner.clone()))
        .collect();
    lits.sort();
    lits.dedup();
    lits
}

/// Replace each epistemic element according to the guess:
/// `knot l` becomes the negation of `l` when `l` is guessed in (default
/// negation for positive `l`, a positive body atom for negative `l` —
/// double negation cancels) and disappears otherwise; `-knot l` becomes
/// `l` itself when `l` is guessed in and deletes the rule otherwise.
pub fn epistemic_reduct(
    program: &GroundProgram,
    guess: &EpistemicGuess,
) -> Result<GroundProgram, ElpError> {
    let mut rules = Vec::with_capacity(program.rules().len());
    'rules: for r in program.rules() {
        let mut body_pos = r.body_pos.clone();
        let mut body_neg = r.body_neg.clone();
        for e in &r.body_epi {
            let stance = *guess.get(&e.inner).ok_or_else(|| ElpError::IncompleteGuess {
                literal: e.inner.clone(),
            })?;
            match (e.negated_operator, stance) {
                (false, Stance::InWvi) | (true, Stance::InWvi) => {
                    // knot l -> not l;  -knot l -> l
                    let wants_positive = e.negated_operator == e.inner.positive;
                    if wants_positive {
                        body_pos.push(e.inner.atom.clone());
                    } else {
                        body_neg.push(e.inner.atom.clone());
                    }
                }
                (false, Stance::NotInWvi) => {} // satisfied, element dropped
                (true, Stance::NotInWvi) => continue 'rules, // body is falsified
            }
        }
        rules.push(Rule::new(r.head.clone(), body_pos, body_neg, vec![]));
    }
    Ok(GroundProgram::from_rules_with_atoms(
        rules,
        program.atoms().to_vec(),
    ))
}

/// The unique interpretation compatible with a non-empty answer-set
/// family: atoms in every set are known, atoms in none are known false,
/// the rest vary.
pub fn derive_wvi(
    answer_sets: &[Interpretation],
    program: &GroundProgram,
) -> Result<Wvi, ElpError> {
    if answer_sets.is_empty() {
        return Err(ElpError::EmptyCollection);
    }
    let all = mask(program.atom_count());
    let inter = answer_sets.iter().fold(all, |acc, m| acc & m.bits());
    let union = answer_sets.iter().fold(0, |acc, m| acc | m.bits());
    Ok(Wvi::from_bits(program, inter, all & !union))
}

/// The four compatibility conditions: the family is non-empty, known
/// atoms are in every member, known-false atoms in none, and unmentioned
/// atoms vary across members.
pub fn check_compatibility(
    wvi: &Wvi,
    answer_sets: &[Interpretation],
    program: &GroundProgram,
) -> bool {
    if answer_sets.is_empty() {
        return false;
    }
    let all = mask(program.atom_count());
    let inter = answer_sets.iter().fold(all, |acc, m| acc & m.bits());
    let union = answer_sets.iter().fold(0, |acc, m| acc | m.bits());
    let mut mentioned: Bits = 0;
    for l in &wvi.literals {
        let Some(id) = program.atom_id(&l.atom) else {
            return false;
        };
        let bit = 1u128 << id;
        mentioned |= bit;
        if l.positive && inter & bit == 0 {
            return false;
        }
        if !l.positive && union & bit != 0 {
            return false;
        }
    }
    let unmentioned = all & !mentioned;
    // every unmentioned atom must occur in some member and miss another
    unmentioned & !union == 0 && unmentioned & inter == 0
}

struct PreparedRule {
    head: Bits,
    pos: Bits,
    neg: Bits,
    /// (inner literal index, negated operator)
    epi: Vec<(usize, bool)>,
}

struct Prepared {
    atom_count: usize,
    /// per inner literal: (atom bit, positive)
    inner: Vec<(Bits, bool)>,
    rules: Vec<PreparedRule>,
    /// pairs of inner-literal indices over the same atom with opposite
    /// signs; both guessed in would be inconsistent
    conflicts: Vec<(usize, usize)>,
}

impl Prepared {
    fn new(program: &GroundProgram, inner: &[Literal]) -> Self {
        let bit_of = |a: &crate::model::Atom| -> Bits {
            1u128 << program.atom_id(a).expect("atom in table")
        };
        let inner_bits: Vec<(Bits, bool)> = inner
            .iter()
            .map(|l| (bit_of(&l.atom), l.positive))
            .collect();
        let mut conflicts = Vec::new();
        for i in 0..inner.len() {
            for j in i + 1..inner.len() {
                if inner[i].atom == inner[j].atom && inner[i].positive != inner[j].positive {
                    conflicts.push((i, j));
                }
            }
        }
        let rules = program
            .rules()
            .iter()
            .map(|r| PreparedRule {
                head: r.head.iter().map(&bit_of).fold(0, |a, b| a | b),
                pos: r.body_pos.iter().map(&bit_of).fold(0, |a, b| a | b),
                neg: r.body_neg.iter().map(&bit_of).fold(0, |a, b| a | b),
                epi: r
                    .body_epi
                    .iter()
                    .map(|e| {
                        let idx = inner.binary_search(&e.inner).expect("inner literal listed");
                        (idx, e.negated_operator)
                    })
                    .collect(),
            })
            .collect();
        Prepared {
            atom_count: program.atom_count(),
            inner: inner_bits,
            rules,
            conflicts,
        }
    }

    fn guess_consistent(&self, guess: u64) -> bool {
        self.conflicts
            .iter()
            .all(|&(i, j)| guess >> i & 1 == 0 || guess >> j & 1 == 0)
    }

    fn reduct(&self, guess: u64) -> Vec<IndexedRule> {
        let mut out = Vec::with_capacity(self.rules.len());
        'rules: for r in &self.rules {
            let mut pos = r.pos;
            let mut neg = r.neg;
            for &(idx, negated_operator) in &r.epi {
                let in_wvi = guess >> idx & 1 == 1;
                let (bit, positive) = self.inner[idx];
                match (negated_operator, in_wvi) {
                    (true, false) => continue 'rules,
                    (false, false) => {}
                    (true, true) | (false, true) => {
                        if negated_operator == positive {
                            pos |= bit;
                        } else {
                            neg |= bit;
                        }
                    }
                }
            }
            out.push(IndexedRule {
                head: r.head,
                pos,
                neg,
            });
        }
        out
    }

    /// Evaluate one guess; `Some` carries (known bits, known-false bits,
    /// answer-set count, witnesses).
    fn evaluate(
        &self,
        guess: u64,
        store_witnesses: bool,
    ) -> Option<(Bits, Bits, u64, Option<Vec<Interpretation>>)> {
        let rules = self.reduct(guess);
        let idx = Indexed {
            atom_count: self.atom_count,
            rules,
        };
        let all = mask(self.atom_count);
        // atoms that an accepted guess requires in every / in no answer set
        let mut must_hold: Bits = 0;
        let mut must_fail: Bits = 0;
        for (i, &(bit, positive)) in self.inner.iter().enumerate() {
            if guess >> i & 1 == 1 {
                if positive {
                    must_hold |= bit;
                } else {
                    must_fail |= bit;
                }
            }
        }
        let mut inter = all;
        let mut union: Bits = 0;
        let mut count: u64 = 0;
        let mut witnesses = store_witnesses.then(Vec::new);
        let completed = idx.visit_answer_sets(|m| {
            if must_hold & !m != 0 || must_fail & m != 0 {
                return false; // stance already refuted, stop early
            }
            inter &= m;
            union |= m;
            count += 1;
            if let Some(w) = witnesses.as_mut() {
                w.push(Interpretation::from_bits(m));
            }
            true
        });
        if !completed || count == 0 {
            return None;
        }
        // remaining match conditions for literals guessed out
        for (i, &(bit, positive)) in self.inner.iter().enumerate() {
            if guess >> i & 1 == 0 {
                let in_wvi = if positive {
                    inter & bit != 0
                } else {
                    union & bit == 0
                };
                if in_wvi {
                    return None;
                }
            }
        }
        if let Some(w) = witnesses.as_mut() {
            w.sort();
        }
        Some((inter, all & !union, count, witnesses))
    }
}

fn check_budgets(program: &GroundProgram, budgets: &Budgets, m: usize) -> Result<(), ElpError> {
    let guess_cap = budgets.guesses.min(63);
    if m > guess_cap {
        return Err(ElpError::BudgetExceeded {
            inner_literals: m,
            cap: guess_cap,
        });
    }
    let atom_cap = budgets.atoms.min(Budgets::MAX_ATOMS);
    if program.atom_count() > atom_cap {
        return Err(ElpError::Asp(AspError::BudgetExceeded {
            atoms: program.atom_count(),
            cap: atom_cap,
        }));
    }
    Ok(())
}

/// Enumerate all candidate world views. The guess space is sharded
/// across `opts.jobs` workers; results are merged in guess order and
/// deduplicated by interpretation, so output does not depend on
/// scheduling.
pub fn enumerate_world_views(
    program: &GroundProgram,
    budgets: &Budgets,
    opts: &WvOptions,
) -> Result<Vec<WorldView>, ElpError> {
    let inner = inner_literals(program);
    check_budgets(program, budgets, inner.len())?;
    let prepared = Prepared::new(program, &inner);
    let total: u64 = 1 << inner.len();
    let store = opts.store_witnesses;

    type Rec = (Bits, Bits, u64, Option<Vec<Interpretation>>);
    let run_range = |lo: u64, hi: u64| -> Vec<Rec> {
        (lo..hi)
            .filter(|g| prepared.guess_consistent(*g))
            .filter_map(|g| prepared.evaluate(g, store))
            .collect()
    };

    let jobs = opts.jobs.max(1).min(total as usize);
    let records: Vec<Rec> = if jobs <= 1 {
        run_range(0, total)
    } else {
        let chunk = total.div_ceil(jobs as u64);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs as u64)
                .map(|j| {
                    let lo = j * chunk;
                    let hi = (lo + chunk).min(total);
                    let run = &run_range;
                    scope.spawn(move || run(lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let mut merged: BTreeMap<Wvi, WorldView> = BTreeMap::new();
    for (pos, neg, witness_count, witnesses) in records {
        let wvi = Wvi::from_bits(program, pos, neg);
        debug_assert!(
            !merged.contains_key(&wvi),
            "distinct accepted guesses must yield distinct world views"
        );
        merged.entry(wvi.clone()).or_insert(WorldView {
            wvi,
            witness_count,
            witnesses,
        });
    }
    Ok(merged.into_values().collect())
}

/// Number of candidate world views, exactly.
pub fn count_world_views(program: &GroundProgram, budgets: &Budgets) -> Result<BigUint, ElpError> {
    let views = enumerate_world_views(program, budgets, &WvOptions::default())?;
    Ok(BigUint::from(views.len()))
}

/// Polynomial path for the negation-free fragment: replace `K a` / `M a`
/// by `a`, take the least model, and read the world view off it. `None`
/// means the program has no world view.
pub fn solve_nonneg(program: &GroundProgram) -> Result<Option<WorldView>, ElpError> {
    let class = classify(&program.to_program());
    if class != ProgramClass::NonNeg {
        return Err(ElpError::WrongFragment { found: class });
    }
    if program.atom_count() > Budgets::MAX_ATOMS {
        return Err(ElpError::Asp(AspError::BudgetExceeded {
            atoms: program.atom_count(),
            cap: Budgets::MAX_ATOMS,
        }));
    }
    let rules: Vec<Rule> = program
        .rules()
        .iter()
        .map(|r| {
            let mut body_pos = r.body_pos.clone();
            body_pos.extend(r.body_epi.iter().map(|e| e.inner.atom.clone()));
            Rule::new(r.head.clone(), body_pos, r.body_neg.clone(), vec![])
        })
        .collect();
    let horn = GroundProgram::from_rules_with_atoms(rules, program.atoms().to_vec());
    match crate::asp::least_model(&horn) {
        Ok(m) => {
            let wvi = derive_wvi(std::slice::from_ref(&m), program)?;
            Ok(Some(WorldView {
                wvi,
                witness_count: 1,
                witnesses: Some(vec![m]),
            }))
        }
        Err(AspError::ConstraintViolated) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Atom;
    use crate::parser::parse_program;

    fn gp(text: &str) -> GroundProgram {
        GroundProgram::from_rules(parse_program(text).unwrap().rules)
    }

    fn lit(spec: &str) -> Literal {
        match spec.strip_prefix('-') {
            Some(name) => Literal::negative(Atom::prop(name)),
            None => Literal::positive(Atom::prop(spec)),
        }
    }

    fn guess(assignments: &[(&str, Stance)]) -> EpistemicGuess {
        assignments
            .iter()
            .map(|(l, s)| (lit(l), *s))
            .collect()
    }

    fn views(text: &str) -> Vec<WorldView> {
        enumerate_world_views(&gp(text), &Budgets::default(), &WvOptions::default()).unwrap()
    }

    #[test]
    fn reduct_substitution_table() {
        let p = gp("v :- knot v.");
        let r = epistemic_reduct(&p, &guess(&[("v", Stance::NotInWvi)])).unwrap();
        assert_eq!(r.rules(), gp("v.").rules());
        let r = epistemic_reduct(&p, &guess(&[("v", Stance::InWvi)])).unwrap();
        assert_eq!(r.rules(), gp("v :- not v.").rules());

        let p = gp("b :- K a.");
        let r = epistemic_reduct(&p, &guess(&[("a", Stance::InWvi)])).unwrap();
        assert_eq!(r.rules(), gp("b :- a.").rules());
        let r = epistemic_reduct(&p, &guess(&[("a", Stance::NotInWvi)])).unwrap();
        assert!(r.rules().is_empty());
        assert_eq!(r.atom_count(), 2);

        // knot -a guessed in: double negation makes a positive body atom
        let p = gp("b :- knot -a.");
        let r = epistemic_reduct(&p, &guess(&[("-a", Stance::InWvi)])).unwrap();
        assert_eq!(r.rules(), gp("b :- a.").rules());
    }

    #[test]
    fn derive_wvi_examples() {
        let p = gp("a :- c. b :- a. c.");
        let m = |atoms: &[&str]| {
            let owned: Vec<Atom> = atoms.iter().map(|s| Atom::prop(*s)).collect();
            Interpretation::from_atoms(&p, owned.iter()).unwrap()
        };
        let wvi = derive_wvi(&[m(&["a"]), m(&["a", "b"])], &p).unwrap();
        assert_eq!(wvi.literals(), &[lit("a"), lit("-c")]);

        let wvi = derive_wvi(&[m(&[])], &p).unwrap();
        assert_eq!(wvi.len(), 3);
        assert!(wvi.contains(&lit("-a")));

        let wvi = derive_wvi(&[m(&["a", "b", "c"])], &p).unwrap();
        assert!(wvi.contains(&lit("a")));
        assert!(matches!(derive_wvi(&[], &p), Err(ElpError::EmptyCollection)));
    }

    #[test]
    fn compatibility_examples() {
        let p = gp("a.");
        let full = Interpretation::from_atoms(&p, [Atom::prop("a")].iter()).unwrap();
        assert!(check_compatibility(&Wvi::new(vec![lit("a")]), &[full], &p));
        // condition on unmentioned atoms: a must vary but never does
        assert!(!check_compatibility(&Wvi::new(vec![]), &[full], &p));
        // empty family fails outright
        assert!(!check_compatibility(&Wvi::new(vec![lit("a")]), &[], &p));
    }

    #[test]
    fn scholarship_example_has_one_world_view() {
        let text = "lowGPA(mark). highGPA(mia). lowGPA(maya) v highGPA(maya).\n\
                    inelig(X) :- lowGPA(X). elig(X) :- highGPA(X).\n\
                    :- elig(X), inelig(X).\n\
                    interview(X) :- knot elig(X), knot inelig(X).";
        let ground =
            crate::grounder::ground(&parse_program(text).unwrap(), &Budgets::default()).unwrap();
        let views =
            enumerate_world_views(&ground, &Budgets::default(), &WvOptions::default()).unwrap();
        assert_eq!(views.len(), 1);
        let wv = &views[0];
        assert_eq!(wv.witness_count, 2);
        let published = [
            "-interview(mark)",
            "lowGPA(mark)",
            "inelig(mark)",
            "-elig(mark)",
            "interview(maya)",
            "-interview(mia)",
            "highGPA(mia)",
            "elig(mia)",
            "-inelig(mia)",
        ];
        for spec in published {
            let (name, positive) = match spec.strip_prefix('-') {
                Some(n) => (n, false),
                None => (spec, true),
            };
            let (pred, arg) = name.split_once('(').unwrap();
            let arg = arg.trim_end_matches(')');
            let atom = Atom::new(pred, vec![crate::model::Term::constant(arg)]);
            let l = Literal { atom, positive };
            assert!(wv.wvi.contains(&l), "missing {spec}");
        }
        // the completion adds the two forced literals
        assert_eq!(wv.wvi.len(), 11);
    }

    #[test]
    fn killer_rule_alone_has_no_world_view() {
        assert!(views("v :- knot v.").is_empty());
    }

    #[test]
    fn empty_program_has_empty_world_view() {
        let vs = views("");
        assert_eq!(vs.len(), 1);
        assert!(vs[0].wvi.is_empty());
        assert_eq!(vs[0].witness_count, 1);
    }

    #[test]
    fn count_examples() {
        let count = |text: &str| count_world_views(&gp(text), &Budgets::default()).unwrap();
        assert_eq!(count("a :- knot b. b :- knot a."), BigUint::from(2u32));
        assert_eq!(count(":-. a."), BigUint::from(0u32));
        assert_eq!(count("a :- knot b. b :- knot a. :- a."), BigUint::from(1u32));
    }

    #[test]
    fn witnesses_on_demand() {
        let p = gp("a v b.");
        let opts = WvOptions {
            store_witnesses: true,
            ..WvOptions::default()
        };
        let vs = enumerate_world_views(&p, &Budgets::default(), &opts).unwrap();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].witnesses.as_ref().unwrap().len(), 2);
        let vs = enumerate_world_views(&p, &Budgets::default(), &WvOptions::default()).unwrap();
        assert!(vs[0].witnesses.is_none());
    }

    #[test]
    fn jobs_do_not_change_results() {
        let text = "a :- knot b. b :- knot a. c v d :- a. e :- K c.";
        let sequential = views(text);
        for jobs in [2, 3, 8] {
            let parallel = enumerate_world_views(
                &gp(text),
                &Budgets::default(),
                &WvOptions {
                    jobs,
                    store_witnesses: false,
                },
            )
            .unwrap();
            assert_eq!(sequential, parallel);
        }
    }

    #[test]
    fn solve_nonneg_examples() {
        let wv = solve_nonneg(&gp("a. b :- K a.")).unwrap().unwrap();
        assert_eq!(wv.wvi.literals(), &[lit("a"), lit("b")]);

        assert!(solve_nonneg(&gp("a. :- a.")).unwrap().is_none());

        let wv = solve_nonneg(&gp("c :- knot -c.")).unwrap().unwrap();
        assert_eq!(wv.wvi.literals(), &[lit("-c")]);

        assert!(matches!(
            solve_nonneg(&gp("a :- not b.")),
            Err(ElpError::WrongFragment { .. })
        ));
    }

    #[test]
    fn guess_budget_enforced() {
        let text: String = (0..25)
            .map(|i| format!("p{i} :- knot q{i}. "))
            .collect();
        assert!(matches!(
            count_world_views(&gp(&text), &Budgets::default()),
            Err(ElpError::BudgetExceeded { .. })
        ));
    }
}
