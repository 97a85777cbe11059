//! Herbrand machinery: universe computation, safety checking, domain
//! rewriting, and full naive instantiation.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::budget::Budgets;
use crate::model::{Atom, Program, Rule, Term};

/// Reserved constant used when a program mentions no constant at all.
pub const EMPTY_UNIVERSE_CONSTANT: &str = "c0";
/// Reserved unary predicate introduced by [`domain_rewrite`].
pub const DOMAIN_PREDICATE: &str = "dom";

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("grounding needs {needed} rule instantiations, cap is {cap}")]
    BudgetExceeded { needed: u128, cap: u64 },
    #[error("predicate `{name}` is reserved as the unary domain predicate but is used with arity {arity}")]
    ReservedPredicate { name: String, arity: usize },
}

/// A fully instantiated program together with a dense atom numbering.
/// Atom ids are assigned in sorted atom order and cover exactly the
/// atoms occurring in the rules (epistemic inner atoms included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundProgram {
    rules: Vec<Rule>,
    atoms: Vec<Atom>,
}

impl GroundProgram {
    /// Build from ground rules; rules are sorted and deduplicated.
    pub fn from_rules(mut rules: Vec<Rule>) -> Self {
        debug_assert!(rules.iter().all(|r| r.is_ground()));
        rules.sort();
        rules.dedup();
        let atoms: BTreeSet<Atom> = rules.iter().flat_map(|r| r.atoms().cloned()).collect();
        GroundProgram {
            rules,
            atoms: atoms.into_iter().collect(),
        }
    }

    /// Build from ground rules with a caller-provided atom table. The
    /// table must be sorted and cover every atom occurring in the rules;
    /// it may contain more. Reducts use this to stay aligned with their
    /// parent program's numbering.
    pub fn from_rules_with_atoms(mut rules: Vec<Rule>, atoms: Vec<Atom>) -> Self {
        debug_assert!(rules.iter().all(|r| r.is_ground()));
        debug_assert!(atoms.windows(2).all(|w| w[0] < w[1]));
        rules.sort();
        rules.dedup();
        debug_assert!(rules
            .iter()
            .flat_map(|r| r.atoms())
            .all(|a| atoms.binary_search(a).is_ok()));
        GroundProgram { rules, atoms }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, id: usize) -> &Atom {
        &self.atoms[id]
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<usize> {
        self.atoms.binary_search(atom).ok()
    }

    pub fn has_epistemic(&self) -> bool {
        self.rules.iter().any(|r| r.has_epistemic())
    }

    pub fn to_program(&self) -> Program {
        Program::new(self.rules.clone())
    }
}

/// Constants occurring in the program plus declared ones; the reserved
/// constant `c0` when that set is empty.
pub fn herbrand_universe(program: &Program) -> BTreeSet<String> {
    let mut universe: BTreeSet<String> = program
        .atoms()
        .flat_map(|a| a.args.iter())
        .filter(|t| !t.is_variable())
        .map(|t| t.name.clone())
        .collect();
    universe.extend(program.declared_constants.iter().cloned());
    if universe.is_empty() {
        universe.insert(EMPTY_UNIVERSE_CONSTANT.to_string());
    }
    universe
}

/// One rule that fails the safety condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyViolation {
    pub rule_index: usize,
    /// Variables not bound by the positive body.
    pub unbound: BTreeSet<String>,
    /// True when the rule is safe under the head/negative-body condition
    /// alone and only epistemic inner variables are unbound.
    pub epistemic_only: bool,
}

/// Safety requires every variable of the head, the negative body, and —
/// stricter than the head/negative-body condition alone — of epistemic
/// inner literals to occur in the positive body.
pub fn check_safety(program: &Program) -> Vec<SafetyViolation> {
    let mut out = Vec::new();
    for (rule_index, r) in program.rules.iter().enumerate() {
        let bound: BTreeSet<&str> = r.body_pos.iter().flat_map(|a| a.variables()).collect();
        let strict_unbound: BTreeSet<String> = r
            .head
            .iter()
            .chain(r.body_neg.iter())
            .flat_map(|a| a.variables())
            .filter(|v| !bound.contains(v))
            .map(str::to_string)
            .collect();
        let mut unbound = strict_unbound.clone();
        unbound.extend(
            r.body_epi
                .iter()
                .flat_map(|e| e.inner.atom.variables())
                .filter(|v| !bound.contains(v))
                .map(str::to_string),
        );
        if !unbound.is_empty() {
            out.push(SafetyViolation {
                rule_index,
                epistemic_only: strict_unbound.is_empty(),
                unbound,
            });
        }
    }
    out
}

/// Add the unary domain predicate: facts `dom(c)` for every universe
/// constant and a `dom(X)` body atom for every rule variable. Unless
/// `force` is set, a program that already passes [`check_safety`] is
/// returned unchanged. The rewrite is idempotent.
pub fn domain_rewrite(program: &Program, force: bool) -> Result<Program, GroundError> {
    for atom in program.atoms() {
        if atom.predicate == DOMAIN_PREDICATE && atom.arity() != 1 {
            return Err(GroundError::ReservedPredicate {
                name: DOMAIN_PREDICATE.to_string(),
                arity: atom.arity(),
            });
        }
    }
    if !force && check_safety(program).is_empty() {
        return Ok(program.clone());
    }
    let universe = herbrand_universe(program);
    let dom_fact = |c: &str| Rule::fact(Atom::new(DOMAIN_PREDICATE, vec![Term::constant(c)]));
    let mut rules: Vec<Rule> = universe
        .iter()
        .map(|c| dom_fact(c))
        .filter(|f| !program.rules.contains(f))
        .collect();
    for r in &program.rules {
        if r.variables().is_empty() {
            rules.push(r.clone());
            continue;
        }
        let mut body_pos = r.body_pos.clone();
        for v in r.variables() {
            body_pos.push(Atom::new(DOMAIN_PREDICATE, vec![Term::variable(v)]));
        }
        rules.push(Rule::new(
            r.head.clone(),
            body_pos,
            r.body_neg.clone(),
            r.body_epi.clone(),
        ));
    }
    let mut out = Program::new(rules);
    out.declared_constants = program.declared_constants.clone();
    Ok(out)
}

fn substitute_atom(atom: &Atom, binding: &BTreeMap<&str, &String>) -> Atom {
    Atom::new(
        atom.predicate.clone(),
        atom.args
            .iter()
            .map(|t| {
                if t.is_variable() {
                    Term::constant((*binding[t.name.as_str()]).clone())
                } else {
                    t.clone()
                }
            })
            .collect(),
    )
}

fn substitute_rule(rule: &Rule, binding: &BTreeMap<&str, &String>) -> Rule {
    let map_atoms = |atoms: &[Atom]| atoms.iter().map(|a| substitute_atom(a, binding)).collect();
    Rule::new(
        map_atoms(&rule.head),
        map_atoms(&rule.body_pos),
        map_atoms(&rule.body_neg),
        rule.body_epi
            .iter()
            .map(|e| crate::model::EpiElement {
                inner: crate::model::Literal {
                    atom: substitute_atom(&e.inner.atom, binding),
                    positive: e.inner.positive,
                },
                negated_operator: e.negated_operator,
            })
            .collect(),
    )
}

/// Number of instantiations full grounding would produce (before
/// deduplication): the sum over rules of `|universe|^|vars|`.
pub fn instantiation_count(program: &Program) -> u128 {
    let d = herbrand_universe(program).len() as u128;
    program
        .rules
        .iter()
        .map(|r| {
            let k = r.variables().len() as u32;
            d.checked_pow(k).unwrap_or(u128::MAX)
        })
        .fold(0u128, u128::saturating_add)
}

/// Replace every rule variable by every universe constant. Unsafe rules
/// are instantiated over the full cross product; callers wanting the
/// usual semantics apply [`domain_rewrite`] first.
pub fn ground(program: &Program, budgets: &Budgets) -> Result<GroundProgram, GroundError> {
    let needed = instantiation_count(program);
    if needed > budgets.ground_rules as u128 {
        return Err(GroundError::BudgetExceeded {
            needed,
            cap: budgets.ground_rules,
        });
    }
    let universe: Vec<String> = herbrand_universe(program).into_iter().collect();
    let mut rules = Vec::new();
    for r in &program.rules {
        let vars: Vec<&str> = r.variables().into_iter().collect();
        if vars.is_empty() {
            rules.push(r.clone());
            continue;
        }
        // odometer over universe^|vars|
        let mut counters = vec![0usize; vars.len()];
        loop {
            let binding: BTreeMap<&str, &String> = vars
                .iter()
                .zip(counters.iter())
                .map(|(v, &i)| (*v, &universe[i]))
                .collect();
            rules.push(substitute_rule(r, &binding));
            let mut pos = 0;
            loop {
                if pos == counters.len() {
                    break;
                }
                counters[pos] += 1;
                if counters[pos] < universe.len() {
                    break;
                }
                counters[pos] = 0;
                pos += 1;
            }
            if pos == counters.len() {
                break;
            }
        }
    }
    Ok(GroundProgram::from_rules(rules))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn hu(text: &str) -> BTreeSet<String> {
        herbrand_universe(&parse_program(text).unwrap())
    }

    #[test]
    fn universe_examples() {
        let set: Vec<String> = hu("p(a). p(b).").into_iter().collect();
        assert_eq!(set, vec!["a".to_string(), "b".to_string()]);

        let set: Vec<String> = hu("q(X) :- p(X).").into_iter().collect();
        assert_eq!(set, vec![EMPTY_UNIVERSE_CONSTANT.to_string()]);

        let example = "lowGPA(mark). highGPA(mia). lowGPA(maya) v highGPA(maya).\n\
                       inelig(X) :- lowGPA(X). elig(X) :- highGPA(X).\n\
                       :- elig(X), inelig(X).\n\
                       interview(X) :- knot elig(X), knot inelig(X).";
        let set: Vec<String> = hu(example).into_iter().collect();
        assert_eq!(set, vec!["mark".to_string(), "maya".to_string(), "mia".to_string()]);
    }

    #[test]
    fn safety_examples() {
        assert!(check_safety(&parse_program("p(X) :- q(X).").unwrap()).is_empty());

        let v = check_safety(&parse_program("p(X) :- not q(X).").unwrap());
        assert_eq!(v.len(), 1);
        assert!(!v[0].epistemic_only);

        let v = check_safety(&parse_program("p(X) :- knot q(X).").unwrap());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].unbound.iter().collect::<Vec<_>>(), vec!["X"]);

        // unsafe only because of the strengthened epistemic condition
        let v = check_safety(&parse_program("p :- knot q(X).").unwrap());
        assert_eq!(v.len(), 1);
        assert!(v[0].epistemic_only);
    }

    #[test]
    fn domain_rewrite_makes_safe() {
        let mut p = parse_program("p(X) :- not q(X).").unwrap();
        p.declared_constants.insert("a".to_string());
        let rewritten = domain_rewrite(&p, false).unwrap();
        assert!(check_safety(&rewritten).is_empty());
        let expected = parse_program("dom(a). p(X) :- dom(X), not q(X).").unwrap();
        assert_eq!(rewritten.rules, expected.rules);
    }

    #[test]
    fn domain_rewrite_idempotent_and_lazy() {
        let p = parse_program("p(a). r(X) :- p(X).").unwrap();
        assert_eq!(domain_rewrite(&p, false).unwrap(), p);

        let forced = domain_rewrite(&p, true).unwrap();
        assert!(forced.rules.contains(&parse_program("dom(a).").unwrap().rules[0]));
        assert_eq!(domain_rewrite(&forced, false).unwrap(), forced);
        assert_eq!(domain_rewrite(&forced, true).unwrap(), forced);

        let empty = Program::default();
        assert_eq!(domain_rewrite(&empty, false).unwrap(), empty);
    }

    #[test]
    fn domain_predicate_arity_guard() {
        let p = parse_program("dom(a,b).").unwrap();
        assert!(domain_rewrite(&p, false).is_err());
    }

    #[test]
    fn ground_simple() {
        let p = parse_program("q(1). q(2). p(X) :- q(X).").unwrap();
        let g = ground(&p, &Budgets::default()).unwrap();
        let expected = parse_program("q(1). q(2). p(1) :- q(1). p(2) :- q(2).").unwrap();
        assert_eq!(g.rules(), GroundProgram::from_rules(expected.rules).rules());
    }

    #[test]
    fn ground_example_counts() {
        let example = "lowGPA(mark). highGPA(mia). lowGPA(maya) v highGPA(maya).\n\
                       inelig(X) :- lowGPA(X). elig(X) :- highGPA(X).\n\
                       :- elig(X), inelig(X).\n\
                       interview(X) :- knot elig(X), knot inelig(X).";
        let p = parse_program(example).unwrap();
        assert_eq!(instantiation_count(&p), 3 + 3 * 4);
        let g = ground(&p, &Budgets::default()).unwrap();
        assert_eq!(g.rules().len(), 15);
        assert_eq!(g.atom_count(), 15);
    }

    #[test]
    fn ground_cross_product() {
        let p = parse_program("d(1). d(2). d(3). p(X,Y) :- q(X,Y).").unwrap();
        assert_eq!(instantiation_count(&p), 3 + 9);
        let g = ground(&p, &Budgets::default()).unwrap();
        assert_eq!(g.rules().len(), 12);
    }

    #[test]
    fn ground_budget() {
        let p = parse_program("d(1). d(2). p(A,B,C) :- q(A,B,C).").unwrap();
        let tight = Budgets {
            ground_rules: 5,
            ..Budgets::default()
        };
        match ground(&p, &tight) {
            Err(GroundError::BudgetExceeded { needed, cap }) => {
                assert_eq!(needed, 2 + 8);
                assert_eq!(cap, 5);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn ground_idempotent() {
        let p = parse_program("q(1). q(2). p(X) :- q(X). r(X) :- p(X), q(X).").unwrap();
        let g1 = ground(&p, &Budgets::default()).unwrap();
        let g2 = ground(&g1.to_program(), &Budgets::default()).unwrap();
        assert_eq!(g1, g2);
    }
}
