//! Quantitative reasoning: combining a program with an epistemic query,
//! plausibility levels, and exact probabilities.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::budget::Budgets;
use crate::elp::{self, ElpError, WvOptions};
use crate::grounder::{self, GroundError};
use crate::model::{Atom, EpiElement, Literal, Program, Rule};

/// Namespace for the per-item filter atoms added by [`query_union`].
pub const QUERY_ATOM_PREFIX: &str = "__q";

#[derive(Debug, Error)]
pub enum QuantError {
    #[error("program already uses the reserved query-atom namespace `{predicate}`")]
    ReservedNameCollision { predicate: String },
    #[error("query literal `{literal}` is not ground")]
    NonGroundQuery { literal: Literal },
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Elp(#[from] ElpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryOp {
    /// `K l`: l holds in every answer set of the world view.
    Known,
    /// `M l`: l holds in some answer set of the world view.
    Possible,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueryItem {
    pub op: QueryOp,
    pub literal: Literal,
}

/// A set of `K l` / `M l` expressions over ground literals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    pub items: Vec<QueryItem>,
}

impl Query {
    pub fn new(mut items: Vec<QueryItem>) -> Self {
        items.sort();
        items.dedup();
        Query { items }
    }

    pub fn empty() -> Self {
        Query::default()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl std::fmt::Display for Query {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match item.op {
                QueryOp::Known => write!(f, "K {}", item.literal)?,
                QueryOp::Possible => write!(f, "M {}", item.literal)?,
            }
        }
        Ok(())
    }
}

/// Extend the program with one filter rule per query item: a fresh guard
/// atom `__qN` with the rule `__qN :- knot __qN, <negated item>`. The
/// negation of `K l` is `knot l`; the negation of `M l` is `K -l`. World
/// views of the result are exactly the world views of the program that
/// satisfy the whole query.
pub fn query_union(program: &Program, query: &Query) -> Result<Program, QuantError> {
    if query.is_empty() {
        return Ok(program.clone());
    }
    for atom in program.atoms() {
        if atom.predicate.starts_with(QUERY_ATOM_PREFIX) {
            return Err(QuantError::ReservedNameCollision {
                predicate: atom.predicate.clone(),
            });
        }
    }
    let mut out = program.clone();
    for (i, item) in query.items.iter().enumerate() {
        if !item.literal.atom.is_ground() {
            return Err(QuantError::NonGroundQuery {
                literal: item.literal.clone(),
            });
        }
        let guard = Atom::prop(format!("{QUERY_ATOM_PREFIX}{}", i + 1));
        let negated_item = match item.op {
            QueryOp::Known => EpiElement::knot(item.literal.clone()),
            QueryOp::Possible => EpiElement::k(item.literal.negated()),
        };
        out.rules.push(Rule::new(
            vec![guard.clone()],
            vec![],
            vec![],
            vec![EpiElement::knot(Literal::positive(guard)), negated_item],
        ));
    }
    Ok(out)
}

/// Number of world views of the program extended with the query filter.
pub fn plausibility_level(
    program: &Program,
    query: &Query,
    budgets: &Budgets,
    opts: &WvOptions,
) -> Result<BigUint, QuantError> {
    let unioned = query_union(program, query)?;
    let rewritten = grounder::domain_rewrite(&unioned, false)?;
    let ground = grounder::ground(&rewritten, budgets)?;
    let views = elp::enumerate_world_views(&ground, budgets, opts)?;
    Ok(BigUint::from(views.len()))
}

/// Exact probability: the plausibility level of the query over the
/// plausibility level of the empty query (at least one).
pub fn probability(
    program: &Program,
    query: &Query,
    budgets: &Budgets,
    opts: &WvOptions,
) -> Result<BigRational, QuantError> {
    let level = plausibility_level(program, query, budgets, opts)?;
    let base = plausibility_level(program, &Query::empty(), budgets, opts)?;
    let denominator = if base.is_zero() { BigUint::one() } else { base };
    Ok(BigRational::new(
        BigInt::from(level),
        BigInt::from(denominator),
    ))
}

/// Render a non-negative rational with a fixed number of decimal places
/// (round half up).
pub fn decimal_string(value: &BigRational, places: u32) -> String {
    debug_assert!(!value.is_negative());
    let scale = BigInt::from(10u32).pow(places);
    let numer = value.numer() * &scale;
    let denom = value.denom();
    let scaled = (numer * 2i32 + denom) / (denom * 2i32);
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    if places == 0 {
        format!("{int_part}")
    } else {
        format!("{int_part}.{frac_part:0>width$}", width = places as usize)
    }
}
