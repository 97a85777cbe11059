//! Data model for epistemic logic programs: terms, atoms, literals,
//! epistemic body elements, rules and programs, plus structural
//! classification and dependency graphs.
//!
//! The modal shorthands `K l` and `M l` are desugared at construction
//! time into the single canonical epistemic form (an optionally negated
//! `knot` element), so downstream code only ever deals with one shape.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("predicate `{predicate}` used with arities {first} and {second}")]
    ArityMismatch {
        predicate: String,
        first: usize,
        second: usize,
    },
    #[error("{context}: program contains variables")]
    NonGround { context: String },
}

/// A term is either a constant or a variable; the two are disjoint
/// lexical classes (variables start with an uppercase letter).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Constant,
    Variable,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub kind: TermKind,
    pub name: String,
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(!name.is_empty());
        debug_assert!(!name.starts_with(|c: char| c.is_ascii_uppercase()));
        Term {
            kind: TermKind::Constant,
            name,
        }
    }

    pub fn variable(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(name.starts_with(|c: char| c.is_ascii_uppercase()));
        Term {
            kind: TermKind::Variable,
            name,
        }
    }

    pub fn is_variable(&self) -> bool {
        self.kind == TermKind::Variable
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Propositional atom (arity 0).
    pub fn prop(predicate: impl Into<String>) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_variable())
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter(|t| t.is_variable()).map(|t| t.name.as_str())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A classical literal: an atom or its (classical) negation. Double
/// negation is never stored; negating twice restores the original.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }

    pub fn negated(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            write!(f, "-")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Canonical epistemic body element. `negated_operator == false` encodes
/// `knot inner` (epistemic negation of the inner literal) and
/// `negated_operator == true` encodes its negation `-knot inner`.
///
/// The shorthands map as `K l` = `-knot l` and `M l` = `knot -l`; the
/// constructors below perform that desugaring, so neither `K` nor `M`
/// survives into this representation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EpiElement {
    pub inner: Literal,
    pub negated_operator: bool,
}

impl EpiElement {
    /// Plain epistemic negation `knot inner`.
    pub fn knot(inner: Literal) -> Self {
        EpiElement {
            inner,
            negated_operator: false,
        }
    }

    /// `K l`, stored as `-knot l`.
    pub fn k(inner: Literal) -> Self {
        EpiElement {
            inner,
            negated_operator: true,
        }
    }

    /// `M l`, stored as `knot -l`.
    pub fn m(inner: Literal) -> Self {
        EpiElement {
            inner: inner.negated(),
            negated_operator: false,
        }
    }

    /// True for the two element shapes that add edges to the dependency
    /// graph (`knot -a` and `-knot a`, i.e. the `M a` / `K a` images).
    pub fn adds_dependency_edge(&self) -> bool {
        self.negated_operator == self.inner.positive
    }
}

impl fmt::Display for EpiElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated_operator {
            // only `K lit` has a surface spelling for the negated operator
            write!(f, "K {}", self.inner)
        } else {
            write!(f, "knot {}", self.inner)
        }
    }
}

/// A rule `h1 v ... v hk :- body`. All components are kept sorted and
/// deduplicated, which gives every rule a canonical form.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body_pos: Vec<Atom>,
    pub body_neg: Vec<Atom>,
    pub body_epi: Vec<EpiElement>,
}

fn sorted_dedup<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

impl Rule {
    pub fn new(
        head: Vec<Atom>,
        body_pos: Vec<Atom>,
        body_neg: Vec<Atom>,
        body_epi: Vec<EpiElement>,
    ) -> Self {
        Rule {
            head: sorted_dedup(head),
            body_pos: sorted_dedup(body_pos),
            body_neg: sorted_dedup(body_neg),
            body_epi: sorted_dedup(body_epi),
        }
    }

    pub fn fact(atom: Atom) -> Self {
        Rule::new(vec![atom], vec![], vec![], vec![])
    }

    pub fn constraint(body_pos: Vec<Atom>, body_neg: Vec<Atom>, body_epi: Vec<EpiElement>) -> Self {
        Rule::new(vec![], body_pos, body_neg, body_epi)
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn has_epistemic(&self) -> bool {
        !self.body_epi.is_empty()
    }

    /// All atoms occurring in the rule, including epistemic inner atoms.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head
            .iter()
            .chain(self.body_pos.iter())
            .chain(self.body_neg.iter())
            .chain(self.body_epi.iter().map(|e| &e.inner.atom))
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.atoms().flat_map(|a| a.variables()).collect()
    }

    pub fn is_ground(&self) -> bool {
        self.atoms().all(|a| a.is_ground())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, " v ")?;
            }
            write!(f, "{a}")?;
        }
        let body_len = self.body_pos.len() + self.body_neg.len() + self.body_epi.len();
        if self.head.is_empty() || body_len > 0 {
            if self.head.is_empty() {
                write!(f, ":-")?;
            } else {
                write!(f, " :-")?;
            }
        }
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if first {
                first = false;
                write!(f, " ")
            } else {
                write!(f, ", ")
            }
        };
        for a in &self.body_pos {
            sep(f)?;
            write!(f, "{a}")?;
        }
        for a in &self.body_neg {
            sep(f)?;
            write!(f, "not {a}")?;
        }
        for e in &self.body_epi {
            sep(f)?;
            write!(f, "{e}")?;
        }
        write!(f, ".")
    }
}

/// A program is a finite list of rules; rule order is the input order so
/// that output stays reproducible. Constants may be declared on top of
/// the ones occurring in rules (they extend the Herbrand universe).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub declared_constants: BTreeSet<String>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program {
            rules,
            declared_constants: BTreeSet::new(),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.rules.iter().flat_map(|r| r.atoms())
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(|r| r.is_ground())
    }

    pub fn predicates(&self) -> BTreeSet<&str> {
        self.atoms().map(|a| a.predicate.as_str()).collect()
    }

    pub fn has_epistemic(&self) -> bool {
        self.rules.iter().any(|r| r.has_epistemic())
    }

    /// Arity consistency: every occurrence of a predicate must have the
    /// same arity. Returns the predicate arity map on success.
    pub fn predicate_arities(&self) -> Result<BTreeMap<String, usize>, ModelError> {
        let mut arities: BTreeMap<String, usize> = BTreeMap::new();
        for atom in self.atoms() {
            match arities.get(&atom.predicate) {
                Some(&n) if n != atom.arity() => {
                    return Err(ModelError::ArityMismatch {
                        predicate: atom.predicate.clone(),
                        first: n,
                        second: atom.arity(),
                    });
                }
                Some(_) => {}
                None => {
                    arities.insert(atom.predicate.clone(), atom.arity());
                }
            }
        }
        Ok(arities)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Program classes ordered from most to least restrictive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProgramClass {
    NonNeg,
    Tight,
    Normal,
    Disj,
}

impl fmt::Display for ProgramClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProgramClass::NonNeg => "nonneg",
            ProgramClass::Tight => "tight",
            ProgramClass::Normal => "normal",
            ProgramClass::Disj => "disjunctive",
        })
    }
}

/// Positive dependency graph. Vertices are ground atoms (ground mode) or
/// predicate names (non-ground mode), each rendered as a string label.
/// An edge `(a, b)` means some rule derives `b` from `a`: `b` is in the
/// head while `a` occurs in the positive body or in a `knot -a` /
/// `-knot a` body element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    labels: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl DependencyGraph {
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_labels(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.labels[a].as_str(), self.labels[b].as_str()))
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edge_labels().any(|(a, b)| a == from && b == to)
    }

    pub fn has_cycle(&self) -> bool {
        // iterative three-color DFS
        let n = self.labels.len();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            succ[a].push(b);
        }
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let mut color = vec![Color::White; n];
        for start in 0..n {
            if color[start] != Color::White {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = Color::Gray;
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if *i < succ[v].len() {
                    let w = succ[v][*i];
                    *i += 1;
                    match color[w] {
                        Color::Gray => return true,
                        Color::White => {
                            color[w] = Color::Gray;
                            stack.push((w, 0));
                        }
                        Color::Black => {}
                    }
                } else {
                    color[v] = Color::Black;
                    stack.pop();
                }
            }
        }
        false
    }
}

/// Vertex mode for [`dependency_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    /// Vertices are ground atoms; the program must be ground.
    GroundAtoms,
    /// Vertices are predicate names.
    Predicates,
}

pub fn dependency_graph(program: &Program, mode: GraphMode) -> Result<DependencyGraph, ModelError> {
    if mode == GraphMode::GroundAtoms && !program.is_ground() {
        return Err(ModelError::NonGround {
            context: "dependency graph over ground atoms".into(),
        });
    }
    let label = |a: &Atom| -> String {
        match mode {
            GraphMode::GroundAtoms => a.to_string(),
            GraphMode::Predicates => a.predicate.clone(),
        }
    };
    let mut labels: BTreeSet<String> = BTreeSet::new();
    let mut edge_labels: BTreeSet<(String, String)> = BTreeSet::new();
    for r in &program.rules {
        for a in r.head.iter().chain(r.body_pos.iter()) {
            labels.insert(label(a));
        }
        for b in &r.head {
            for a in &r.body_pos {
                edge_labels.insert((label(a), label(b)));
            }
            for e in &r.body_epi {
                if e.adds_dependency_edge() {
                    labels.insert(label(&e.inner.atom));
                    edge_labels.insert((label(&e.inner.atom), label(b)));
                }
            }
        }
    }
    let labels: Vec<String> = labels.into_iter().collect();
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let edges = edge_labels
        .iter()
        .map(|(a, b)| (index[a.as_str()], index[b.as_str()]))
        .collect();
    Ok(DependencyGraph { labels, edges })
}

/// Most restrictive class the program falls into.
///
/// A program with only `K a` / `M a` epistemic elements, no default
/// negation, and at most one head atom per rule sits in the negation-free
/// fragment, regardless of cycles. Tightness is checked on the dependency
/// graph over ground atoms when the program is ground, and over predicate
/// names otherwise.
pub fn classify(program: &Program) -> ProgramClass {
    let normal = program.rules.iter().all(|r| r.head.len() <= 1);
    if !normal {
        return ProgramClass::Disj;
    }
    let nonneg = program.rules.iter().all(|r| {
        r.body_neg.is_empty() && r.body_epi.iter().all(|e| e.adds_dependency_edge())
    });
    if nonneg {
        return ProgramClass::NonNeg;
    }
    let mode = if program.is_ground() {
        GraphMode::GroundAtoms
    } else {
        GraphMode::Predicates
    };
    let graph = dependency_graph(program, mode).expect("mode chosen to match groundness");
    if !graph.has_cycle() {
        ProgramClass::Tight
    } else {
        ProgramClass::Normal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prop(name: &str) -> Atom {
        Atom::prop(name)
    }

    #[test]
    fn knot_and_shorthand_desugaring() {
        let a = prop("a");
        let k = EpiElement::k(Literal::positive(a.clone()));
        assert!(k.negated_operator);
        assert!(k.inner.positive);
        let m = EpiElement::m(Literal::positive(a.clone()));
        assert!(!m.negated_operator);
        assert!(!m.inner.positive);
        // M -a coincides with plain knot a
        let m_neg = EpiElement::m(Literal::negative(a.clone()));
        assert_eq!(m_neg, EpiElement::knot(Literal::positive(a)));
    }

    #[test]
    fn classify_empty_is_nonneg() {
        assert_eq!(classify(&Program::default()), ProgramClass::NonNeg);
    }

    #[test]
    fn classify_k_cycle_stays_nonneg() {
        // a :- b.  b :- K a.
        // Only the K shorthand occurs, so the negation-free fragment
        // applies even though the dependency graph is cyclic.
        let p = Program::new(vec![
            Rule::new(vec![prop("a")], vec![prop("b")], vec![], vec![]),
            Rule::new(
                vec![prop("b")],
                vec![],
                vec![],
                vec![EpiElement::k(Literal::positive(prop("a")))],
            ),
        ]);
        assert_eq!(classify(&p), ProgramClass::NonNeg);
        let g = dependency_graph(&p, GraphMode::GroundAtoms).unwrap();
        assert!(g.has_cycle());
        assert!(g.has_edge("a", "b"));
        assert!(g.has_edge("b", "a"));
    }

    #[test]
    fn classify_plain_knot_cycle_is_normal() {
        // a :- b.  b :- knot a.  plain knot disqualifies the negation-free
        // fragment and adds no dependency edge, so the graph check decides.
        let p = Program::new(vec![
            Rule::new(vec![prop("a")], vec![prop("b")], vec![], vec![]),
            Rule::new(
                vec![prop("b")],
                vec![],
                vec![],
                vec![EpiElement::knot(Literal::positive(prop("a")))],
            ),
        ]);
        assert_eq!(classify(&p), ProgramClass::Tight);
        let p2 = Program::new(vec![
            Rule::new(vec![prop("a")], vec![], vec![prop("b")], vec![]),
            Rule::new(vec![prop("b")], vec![prop("a")], vec![], vec![]),
        ]);
        // a :- not b. b :- a. has edge a->b only: tight
        assert_eq!(classify(&p2), ProgramClass::Tight);
    }

    #[test]
    fn dependency_graph_examples() {
        // b :- a.
        let p = Program::new(vec![Rule::new(
            vec![prop("b")],
            vec![prop("a")],
            vec![],
            vec![],
        )]);
        let g = dependency_graph(&p, GraphMode::GroundAtoms).unwrap();
        assert!(g.has_edge("a", "b"));
        assert_eq!(g.edges().count(), 1);

        // b :- knot -a.   (the M a image)
        let p = Program::new(vec![Rule::new(
            vec![prop("b")],
            vec![],
            vec![],
            vec![EpiElement::knot(Literal::negative(prop("a")))],
        )]);
        let g = dependency_graph(&p, GraphMode::GroundAtoms).unwrap();
        assert!(g.has_edge("a", "b"));

        // a :- b. b :- a. two-cycle
        let p = Program::new(vec![
            Rule::new(vec![prop("a")], vec![prop("b")], vec![], vec![]),
            Rule::new(vec![prop("b")], vec![prop("a")], vec![], vec![]),
        ]);
        let g = dependency_graph(&p, GraphMode::GroundAtoms).unwrap();
        assert!(g.has_cycle());
        assert_eq!(g.edges().count(), 2);
    }

    #[test]
    fn dependency_graph_nonground_rejected_in_atom_mode() {
        let p = Program::new(vec![Rule::new(
            vec![Atom::new("p", vec![Term::variable("X")])],
            vec![Atom::new("q", vec![Term::variable("X")])],
            vec![],
            vec![],
        )]);
        assert!(dependency_graph(&p, GraphMode::GroundAtoms).is_err());
        let g = dependency_graph(&p, GraphMode::Predicates).unwrap();
        assert!(g.has_edge("q", "p"));
    }

    #[test]
    fn arity_consistency() {
        let p = Program::new(vec![
            Rule::fact(Atom::new("p", vec![Term::constant("a")])),
            Rule::fact(prop("p")),
        ]);
        assert!(p.predicate_arities().is_err());
    }

    #[test]
    fn rule_canonical_form_dedups() {
        let r = Rule::new(
            vec![prop("b"), prop("a"), prop("b")],
            vec![prop("c"), prop("c")],
            vec![],
            vec![],
        );
        assert_eq!(r.head, vec![prop("a"), prop("b")]);
        assert_eq!(r.body_pos, vec![prop("c")]);
    }
}
