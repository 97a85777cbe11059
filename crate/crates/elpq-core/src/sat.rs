//! Small propositional engine over fixed-width bitset interpretations.
//!
//! Rules become satisfaction clauses (`pos`: atoms wanted true, `neg`:
//! atoms wanted false). The solver is a plain recursive DPLL with unit
//! propagation and a false-first branching order; minimal models are
//! enumerated by shrink-then-block: every found model is shrunk to a
//! minimal one, reported, and all its supersets are blocked with one
//! clause.

pub(crate) type Bits = u128;

/// All-ones mask for `n` atoms.
pub(crate) fn mask(n: usize) -> Bits {
    debug_assert!(n <= 128);
    if n == 128 {
        !0
    } else {
        (1u128 << n) - 1
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Clause {
    pub pos: Bits,
    pub neg: Bits,
}

impl Clause {
    pub fn satisfied_by(&self, model: Bits) -> bool {
        self.pos & model != 0 || self.neg & !model != 0
    }

    /// Tautologies (an atom wanted both true and false) hold everywhere.
    fn tautology(&self) -> bool {
        self.pos & self.neg != 0
    }
}

/// Finds a model of the conjunction of all clause groups in which every
/// atom of `fixed_false` is false. Returns the model as a bitset over
/// `n` atoms, unassigned atoms resolved to false.
pub(crate) fn find_model(n: usize, groups: &[&[Clause]], fixed_false: Bits) -> Option<Bits> {
    let all = mask(n);
    search(all, groups, 0, fixed_false & all)
}

fn search(all: Bits, groups: &[&[Clause]], mut true_bits: Bits, mut false_bits: Bits) -> Option<Bits> {
    // unit propagation to fixpoint
    loop {
        let mut changed = false;
        for clause in groups.iter().flat_map(|g| g.iter()) {
            if clause.tautology()
                || clause.pos & true_bits != 0
                || clause.neg & false_bits != 0
            {
                continue;
            }
            let open_pos = clause.pos & !false_bits;
            let open_neg = clause.neg & !true_bits;
            let open = open_pos.count_ones() + open_neg.count_ones();
            if open == 0 {
                return None;
            }
            if open == 1 {
                if open_pos != 0 {
                    true_bits |= open_pos;
                } else {
                    false_bits |= open_neg;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let unassigned = all & !true_bits & !false_bits;
    if unassigned == 0 {
        return Some(true_bits);
    }
    let pick = unassigned & unassigned.wrapping_neg(); // lowest unassigned atom
    if let Some(m) = search(all, groups, true_bits, false_bits | pick) {
        return Some(m);
    }
    search(all, groups, true_bits | pick, false_bits)
}

/// Enumerate the minimal models of the clause set, invoking `visit` for
/// each one. Returns false when the visitor aborted the enumeration.
pub(crate) fn minimal_models(
    n: usize,
    clauses: &[Clause],
    mut visit: impl FnMut(Bits) -> bool,
) -> bool {
    let all = mask(n);
    let mut blocking: Vec<Clause> = Vec::new();
    loop {
        let Some(found) = find_model(n, &[clauses, &blocking], 0) else {
            return true;
        };
        let model = shrink(n, clauses, &blocking, found);
        if !visit(model) {
            return false;
        }
        // blocks the model itself and all of its supersets
        blocking.push(Clause {
            pos: 0,
            neg: model,
        });
        if model == 0 {
            return true; // the empty model subsumes everything else
        }
        let _ = all;
    }
}

/// Shrink a model to a minimal one by repeatedly searching for a model
/// that is a proper subset of the current one.
fn shrink(n: usize, clauses: &[Clause], blocking: &[Clause], mut model: Bits) -> Bits {
    loop {
        let proper_subset = [Clause {
            pos: 0,
            neg: model,
        }];
        match find_model(n, &[clauses, blocking, &proper_subset], !model) {
            Some(smaller) => {
                debug_assert!(smaller & !model == 0 && smaller != model);
                model = smaller;
            }
            None => return model,
        }
    }
}

/// Is there a model of `clauses` strictly below `model`?
pub(crate) fn has_model_strictly_below(n: usize, clauses: &[Clause], model: Bits) -> bool {
    let proper_subset = [Clause {
        pos: 0,
        neg: model,
    }];
    if model == 0 {
        return false;
    }
    find_model(n, &[clauses, &proper_subset], !model).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(pos: &[usize], neg: &[usize]) -> Clause {
        Clause {
            pos: pos.iter().fold(0, |b, i| b | 1 << i),
            neg: neg.iter().fold(0, |b, i| b | 1 << i),
        }
    }

    #[test]
    fn finds_models_and_respects_fixed() {
        // (x0 v x1) & (!x0 v x2)
        let cs = [c(&[0, 1], &[]), c(&[2], &[0])];
        let m = find_model(3, &[&cs], 0).unwrap();
        assert!(cs.iter().all(|cl| cl.satisfied_by(m)));
        // forcing x1 false makes x0 and then x2 true
        let m = find_model(3, &[&cs], 1 << 1).unwrap();
        assert_eq!(m, 0b101);
        // unsatisfiable
        let cs = [c(&[0], &[]), c(&[], &[0])];
        assert!(find_model(1, &[&cs], 0).is_none());
    }

    #[test]
    fn minimal_model_enumeration() {
        // (x0 v x1): minimal models {x0}, {x1}
        let cs = [c(&[0, 1], &[])];
        let mut found = Vec::new();
        assert!(minimal_models(2, &cs, |m| {
            found.push(m);
            true
        }));
        found.sort();
        assert_eq!(found, vec![0b01, 0b10]);

        // empty clause set over 2 atoms: only the empty model is minimal
        let mut found = Vec::new();
        assert!(minimal_models(2, &[], |m| {
            found.push(m);
            true
        }));
        assert_eq!(found, vec![0]);
    }

    #[test]
    fn strictly_below() {
        let cs = [c(&[0, 1], &[])];
        assert!(has_model_strictly_below(2, &cs, 0b11));
        assert!(!has_model_strictly_below(2, &cs, 0b01));
        assert!(!has_model_strictly_below(2, &[], 0));
    }
}
