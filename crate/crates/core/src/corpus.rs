//! Fixed regression formulas, reference derivations and seeded formula generators.

use std::sync::Arc;

use rand::Rng;

use crate::formula::{parse_formula, Formula, Logic};
use crate::hypersequent::{parse_hypersequent, HDerivation, HRule};
use crate::prover::Outcome;

/// A named formula with the logic it is decided in and the expected verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub name: &'static str,
    pub logic: Logic,
    pub formula: Formula,
    pub expected: Outcome,
}

fn f(s: &str) -> Formula {
    parse_formula(s).expect("corpus formulas parse")
}

fn cases(logic: Logic, expected: Outcome, items: &[(&'static str, &str)]) -> Vec<Case> {
    items.iter().map(|&(name, text)| Case { name, logic, formula: f(text), expected }).collect()
}

/// Instances of the Hilbert axioms for Goedel logic over `p`, `q`, `r`.
pub fn goedel_axioms() -> Vec<Case> {
    cases(
        Logic::G,
        Outcome::Valid,
        &[
            ("weakening", "p -> (q -> p)"),
            ("and-elim-left", "(p & q) -> p"),
            ("and-elim-right", "(p & q) -> q"),
            ("and-intro", "p -> (q -> (p & q))"),
            ("constants", "(bot -> p) & (p -> top)"),
            ("or-intro-left", "p -> (p | q)"),
            ("or-intro-right", "q -> (p | q)"),
            ("imp-composition", "(p -> q) -> ((r -> p) -> (r -> q))"),
            ("exchange", "(p -> (q -> r)) -> (q -> (p -> r))"),
            ("or-elim", "((p -> r) & (q -> r)) -> ((p | q) -> r)"),
            ("uncurrying", "(p -> (q -> r)) -> ((p & q) -> r)"),
            ("and-intro-under-imp", "((r -> p) & (r -> q)) -> (r -> (p & q))"),
            ("contraction", "(p -> (p -> q)) -> (p -> q)"),
            ("prelinearity", "(p -> q) | (q -> p)"),
        ],
    )
}

pub fn box_axioms() -> Vec<Case> {
    cases(Logic::GKBox, Outcome::Valid, &[("box-distribution", "[](p -> q) -> ([]p -> []q)"), ("box-double-negation", "~~[]p -> []~~p")])
}

/// The diamond axioms, valid over both crisp and fuzzy frames.
pub fn diamond_axioms(logic: Logic) -> Vec<Case> {
    cases(
        logic,
        Outcome::Valid,
        &[
            ("diamond-or-distribution", "<>(p | q) -> (<>p | <>q)"),
            ("diamond-double-negation", "<>~~p -> ~~<>p"),
            ("diamond-bottom", "~<>bot"),
        ],
    )
}

/// Every axiom case in its logics.
pub fn axiom_regression() -> Vec<Case> {
    let mut out = goedel_axioms();
    out.extend(box_axioms());
    out.extend(diamond_axioms(Logic::GKDia));
    out.extend(diamond_axioms(Logic::GKFDia));
    out
}

/// Formulas separating the logics from each other and from their finite-model counterparts.
pub fn separation_suite() -> Vec<Case> {
    let mut out = cases(Logic::GKBox, Outcome::Invalid, &[("box-double-negation-converse", "[]~~p -> ~~[]p")]);
    out.extend(cases(Logic::GKDia, Outcome::Invalid, &[("diamond-infinite-model", "(<>p -> <>q) -> ((<>q -> bot) | <>(p -> q))")]));
    out.extend(cases(Logic::GKDia, Outcome::Valid, &[("diamond-double-negation-converse", "~~<>p -> <>~~p")]));
    out.extend(cases(Logic::GKFDia, Outcome::Invalid, &[("diamond-double-negation-converse", "~~<>p -> <>~~p")]));
    out
}

/// All formulas of depth at most `depth` (atoms have depth 1) over `p`, `q`, `bot`, `top`, `&`, `|`, `->`.
pub fn exhaustive_propositional(depth: usize) -> Vec<Formula> {
    let atoms = vec![Formula::var("p"), Formula::var("q"), Formula::Bot, Formula::Top];
    if depth == 0 {
        return Vec::new();
    }
    let mut all = atoms;
    for _ in 1..depth {
        let prev = all.clone();
        let mut next = vec![Formula::var("p"), Formula::var("q"), Formula::Bot, Formula::Top];
        for a in &prev {
            for b in &prev {
                next.push(Formula::and(a.clone(), b.clone()));
                next.push(Formula::or(a.clone(), b.clone()));
                next.push(Formula::imp(a.clone(), b.clone()));
            }
        }
        all = next;
    }
    all
}

/// Shape of seeded random formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaParams {
    pub vars: Vec<String>,
    /// Upper bound on the number of syntax-tree nodes.
    pub max_size: usize,
    /// Language: `G` is propositional, the modal logics add their modality.
    pub logic: Logic,
    pub max_modal_depth: usize,
}

impl FormulaParams {
    pub fn new(vars: &[&str], max_size: usize, logic: Logic, max_modal_depth: usize) -> Self {
        FormulaParams { vars: vars.iter().map(|v| v.to_string()).collect(), max_size, logic, max_modal_depth }
    }
}

/// A random formula whose size is drawn uniformly from `1..=max_size`.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, p: &FormulaParams) -> Formula {
    let size = rng.gen_range(1..=p.max_size.max(1));
    sized(rng, p, size, p.max_modal_depth)
}

fn sized<R: Rng + ?Sized>(rng: &mut R, p: &FormulaParams, size: usize, modal_budget: usize) -> Formula {
    let modal = p.logic != Logic::G && modal_budget > 0;
    if size <= 1 || (size == 2 && !modal) {
        return match rng.gen_range(0..10) {
            0 => Formula::Bot,
            1 => Formula::Top,
            _ => Formula::var(&p.vars[rng.gen_range(0..p.vars.len())]),
        };
    }
    if modal && (size == 2 || rng.gen_bool(0.3)) {
        let body = sized(rng, p, size - 1, modal_budget - 1);
        return if p.logic == Logic::GKBox { Formula::boxed(body) } else { Formula::dia(body) };
    }
    let left = rng.gen_range(1..=size - 2);
    let (a, b) = (sized(rng, p, left, modal_budget), sized(rng, p, size - 1 - left, modal_budget));
    match rng.gen_range(0..4) {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        _ => Formula::imp(a, b),
    }
}

fn node(rule: HRule, conclusion: &str, premises: Vec<HDerivation>) -> HDerivation {
    HDerivation::new(
        rule,
        parse_hypersequent(conclusion).expect("reference hypersequents parse"),
        premises.into_iter().map(Arc::new).collect(),
    )
}

/// A derivation of the prelinearity hypersequent `=> (p -> q) | (q -> p)` by communication.
pub fn prelinearity_derivation() -> HDerivation {
    let com = node(HRule::Com, "p => q | q => p", vec![node(HRule::Id, "p => p", vec![]), node(HRule::Id, "q => q", vec![])]);
    node(
        HRule::Ec,
        "=> (p -> q) | (q -> p)",
        vec![node(
            HRule::OrR1,
            "=> (p -> q) | (q -> p) | => (p -> q) | (q -> p)",
            vec![node(
                HRule::OrR2,
                "=> p -> q | => (p -> q) | (q -> p)",
                vec![node(HRule::ImpR, "=> p -> q | => q -> p", vec![node(HRule::ImpR, "p => q | => q -> p", vec![com])])],
            )],
        )],
    )
}

/// A derivation of `=> ~~[]p -> []~~p` in the box extension, using the negation macros.
pub fn box_double_negation_derivation() -> HDerivation {
    let neg = || node(HRule::NegL, "p, ~p =>", vec![node(HRule::Id, "p => p", vec![])]);
    let com = node(HRule::Com, "p, p => | ~p, ~p =>", vec![neg(), neg()]);
    let cl = node(HRule::Cl, "p => | ~p =>", vec![node(HRule::Cl, "p, p => | ~p =>", vec![com])]);
    let bx = node(HRule::Box, "[]p => | => []~~p", vec![node(HRule::NegR, "p => | => ~~p", vec![cl])]);
    let chain = node(
        HRule::Wl,
        "~~[]p => | ~~[]p => []~~p",
        vec![node(HRule::NegL, "~~[]p => | => []~~p", vec![node(HRule::NegR, "=> ~[]p | => []~~p", vec![bx])])],
    );
    node(
        HRule::ImpR,
        "=> ~~[]p -> []~~p",
        vec![node(HRule::Ec, "~~[]p => []~~p", vec![node(HRule::Wr, "~~[]p => []~~p | ~~[]p => []~~p", vec![chain])])],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersequent::{check_derivation, expand_macros};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn corpus_sizes() {
        assert_eq!(goedel_axioms().len(), 14);
        assert_eq!(axiom_regression().len(), 22);
        assert_eq!(exhaustive_propositional(1).len(), 4);
        assert_eq!(exhaustive_propositional(2).len(), 52);
        let all = exhaustive_propositional(3);
        assert_eq!(all.len(), 8116);
        assert!(all.iter().all(|f| f.depth() <= 3));
    }

    #[test]
    fn random_formulas_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for logic in Logic::ALL {
            let p = FormulaParams::new(&["p", "q"], 8, logic, 2);
            for _ in 0..200 {
                let a = random_formula(&mut rng, &p);
                assert!(a.size() <= 8 && a.modal_depth() <= 2 && logic.admits(&a));
            }
        }
    }

    #[test]
    fn reference_derivations_check() {
        assert!(check_derivation(&prelinearity_derivation(), false));
        let d = box_double_negation_derivation();
        assert!(check_derivation(&d, true));
        assert!(!check_derivation(&d, false));
        assert!(check_derivation(&expand_macros(&d).unwrap(), true));
    }
}
