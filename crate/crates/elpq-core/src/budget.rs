//! Resource caps. Worst cases here are exponential (grounding blow-up,
//! guess spaces, candidate enumeration), so every engine entry point
//! checks a configurable cap and fails fast instead of thrashing.

/// Caps for the expensive stages. Defaults are sized so the scholarship
/// example (15 ground atoms, 6 inner literals) solves comfortably.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Maximum number of rule instantiations produced by grounding.
    pub ground_rules: u64,
    /// Maximum number of ground atoms the answer-set engine accepts.
    /// The engine representation additionally limits this to 128.
    pub atoms: usize,
    /// Maximum number of distinct epistemic inner literals (the guess
    /// space is two to this power).
    pub guesses: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            ground_rules: 1_000_000,
            atoms: 24,
            guesses: 20,
        }
    }
}

impl Budgets {
    /// Hard ceiling imposed by the fixed-width interpretation bitset.
    pub const MAX_ATOMS: usize = 128;
}
