//! Sequents of relations: sets of comparisons `A < B` and `A <= B` read disjunctively.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formula::{modal_measure, Formula, Logic, ParseError, Parser};
use crate::lexer::{tokenize, Tok};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RelKind {
    Lt,
    Le,
}

impl RelKind {
    pub fn symbol(self) -> &'static str {
        match self {
            RelKind::Lt => "<",
            RelKind::Le => "<=",
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Relation {
    pub lhs: Formula,
    pub kind: RelKind,
    pub rhs: Formula,
}

impl Relation {
    pub fn new(lhs: Formula, kind: RelKind, rhs: Formula) -> Self {
        Relation { lhs, kind, rhs }
    }

    pub fn le(lhs: Formula, rhs: Formula) -> Self {
        Relation::new(lhs, RelKind::Le, rhs)
    }

    pub fn lt(lhs: Formula, rhs: Formula) -> Self {
        Relation::new(lhs, RelKind::Lt, rhs)
    }

    pub fn is_quasi_atomic(&self) -> bool {
        self.lhs.is_quasi_atom() && self.rhs.is_quasi_atom()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.kind.symbol(), self.rhs)
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let seq = parse_sequent(&s).map_err(serde::de::Error::custom)?;
        let mut it = seq.relations.into_iter();
        match (it.next(), it.next()) {
            (Some(r), None) => Ok(r),
            _ => Err(serde::de::Error::custom("expected exactly one relation")),
        }
    }
}

/// A finite set of relations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SequentOfRelations {
    pub relations: BTreeSet<Relation>,
}

impl SequentOfRelations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, r: Relation) -> bool {
        self.relations.insert(r)
    }

    pub fn remove(&mut self, r: &Relation) -> bool {
        self.relations.remove(r)
    }

    pub fn contains(&self, r: &Relation) -> bool {
        self.relations.contains(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Relation> {
        self.relations.iter()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Copy with extra relations added.
    pub fn with(&self, extra: impl IntoIterator<Item = Relation>) -> Self {
        let mut s = self.clone();
        s.relations.extend(extra);
        s
    }

    pub fn is_quasi_atomic(&self) -> bool {
        self.relations.iter().all(Relation::is_quasi_atomic)
    }

    pub fn is_atomic(&self) -> bool {
        self.relations.iter().all(|r| r.lhs.is_atom() && r.rhs.is_atom())
    }

    /// Every side formula, in order, each listed once.
    pub fn sides(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        for r in &self.relations {
            out.insert(r.lhs.clone());
            out.insert(r.rhs.clone());
        }
        out
    }

    /// Largest modal measure over all sides.
    pub fn modal_measure(&self) -> usize {
        self.relations.iter().map(|r| modal_measure(&r.lhs).max(modal_measure(&r.rhs))).max().unwrap_or(0)
    }

    pub fn admitted_by(&self, logic: Logic) -> bool {
        self.relations.iter().all(|r| logic.admits(&r.lhs) && logic.admits(&r.rhs))
    }
}

impl FromIterator<Relation> for SequentOfRelations {
    fn from_iter<I: IntoIterator<Item = Relation>>(iter: I) -> Self {
        SequentOfRelations { relations: iter.into_iter().collect() }
    }
}

impl fmt::Display for SequentOfRelations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for r in &self.relations {
            if !first {
                f.write_str(" ; ")?;
            }
            first = false;
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Parses `REL (';' REL)*` where each relation is `F <= F` or `F < F`.
pub fn parse_sequent(text: &str) -> Result<SequentOfRelations, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser::new(&toks, text.len());
    let mut out = SequentOfRelations::new();
    loop {
        let lhs = p.formula()?;
        let kind = match p.peek() {
            Some(Tok::Le) => RelKind::Le,
            Some(Tok::Lt) => RelKind::Lt,
            None | Some(Tok::Semi) => return Err(ParseError::Syntax { pos: p.pos(), msg: "relation missing comparator".into() }),
            Some(_) => return Err(p.unexpected()),
        };
        p.bump();
        let rhs = p.formula()?;
        out.insert(Relation::new(lhs, kind, rhs));
        match p.peek() {
            None => break,
            Some(Tok::Semi) => {
                p.bump();
            }
            Some(_) => return Err(p.unexpected()),
        }
    }
    Ok(out)
}

/// True when the text contains a top-level comparator, i.e. it should be read as a sequent.
pub fn looks_like_sequent(text: &str) -> bool {
    tokenize(text).map(|ts| ts.iter().any(|t| matches!(t.tok, Tok::Le | Tok::Lt | Tok::Semi))).unwrap_or(false)
}

/// The formula `/\(B_i -> A_i) -> \/(C_j -> D_j)` over strict relations `A_i < B_i` and weak ones `C_j <= D_j`.
pub fn interp_sequent(s: &SequentOfRelations) -> Formula {
    let strict = s.iter().filter(|r| r.kind == RelKind::Lt).map(|r| Formula::imp(r.rhs.clone(), r.lhs.clone()));
    let weak = s.iter().filter(|r| r.kind == RelKind::Le).map(|r| Formula::imp(r.lhs.clone(), r.rhs.clone()));
    Formula::imp(Formula::conj(strict), Formula::disj(weak))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `[A_1, ..., A_n] kind other`
    ListLeft,
    /// `other kind [A_1, ..., A_n]`
    ListRight,
}

/// Expands the block notation in which one side of a relation is a list of formulas.
pub fn expand_block(side: &[Formula], kind: RelKind, other: &Formula, orientation: Orientation) -> BTreeSet<Relation> {
    match (side.is_empty(), kind, orientation) {
        (true, RelKind::Lt, _) => BTreeSet::new(),
        (true, RelKind::Le, Orientation::ListLeft) => BTreeSet::from([Relation::le(Formula::Top, other.clone())]),
        (true, RelKind::Le, Orientation::ListRight) => BTreeSet::from([Relation::le(other.clone(), Formula::Bot)]),
        (false, _, Orientation::ListLeft) => side.iter().map(|a| Relation::new(a.clone(), kind, other.clone())).collect(),
        (false, _, Orientation::ListRight) => side.iter().map(|b| Relation::new(other.clone(), kind, b.clone())).collect(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationsError {
    #[error("relation `{0}` is not quasi-atomic")]
    NotQuasiAtomic(Relation),
    #[error("relation `{0}` has a shape outside the modal-part inventory for {1}")]
    UnexpectedShape(Relation, Logic),
}

/// Replacement of modal sides by fresh variables, and its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abstraction {
    pub sequent: SequentOfRelations,
    /// Fresh variable name to the modal formula it stands for.
    pub mapping: BTreeMap<Arc<str>, Formula>,
}

impl Abstraction {
    pub fn restore(&self) -> SequentOfRelations {
        let back = |f: &Formula| match f {
            Formula::Var(v) => self.mapping.get(v).cloned().unwrap_or_else(|| f.clone()),
            _ => f.clone(),
        };
        self.sequent.iter().map(|r| Relation::new(back(&r.lhs), r.kind, back(&r.rhs))).collect()
    }
}

/// Replaces each distinct modal side by a fresh variable; fresh names begin with `_` so they cannot clash with
/// parsed variables.
pub fn abstract_modals(s: &SequentOfRelations) -> Result<Abstraction, RelationsError> {
    if let Some(r) = s.iter().find(|r| !r.is_quasi_atomic()) {
        return Err(RelationsError::NotQuasiAtomic(r.clone()));
    }
    let modal: Vec<Formula> = s.sides().into_iter().filter(Formula::is_modal).collect();
    let names: BTreeMap<&Formula, Formula> = modal.iter().enumerate().map(|(i, f)| (f, Formula::var(&format!("_m{i}")))).collect();
    let rename = |f: &Formula| names.get(f).cloned().unwrap_or_else(|| f.clone());
    let sequent = s.iter().map(|r| Relation::new(rename(&r.lhs), r.kind, rename(&r.rhs))).collect();
    let mapping = names
        .iter()
        .map(|(f, v)| match v {
            Formula::Var(name) => (name.clone(), (*f).clone()),
            _ => unreachable!("fresh names are variables"),
        })
        .collect();
    Ok(Abstraction { sequent, mapping })
}

/// The relations of a quasi-atomic sequent built only from modal formulas and constants, normalized.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct ModalPart {
    /// `[]A <= []B` as `(A, B)`; `top <= []D` is stored as `(top, D)`.
    pub box_box: Vec<(Formula, Formula)>,
    /// `[]C <= bot` as `C`.
    pub box_bot: Vec<Formula>,
    /// `<>A <= <>B` as `(A, B)`; `<>A <= bot` is stored as `(A, bot)`.
    pub dia_dia: Vec<(Formula, Formula)>,
    /// `bot < <>C` as `C`.
    pub dia_low: Vec<Formula>,
    /// `top <= <>D` as `D` (crisp diamond logic only).
    pub dia_high: Vec<Formula>,
}

impl ModalPart {
    pub fn is_empty(&self) -> bool {
        self.box_box.is_empty() && self.box_bot.is_empty() && self.dia_dia.is_empty() && self.dia_low.is_empty() && self.dia_high.is_empty()
    }
}

fn is_dead(r: &Relation) -> bool {
    match r.kind {
        RelKind::Lt => r.rhs == Formula::Bot || r.lhs == Formula::Top,
        RelKind::Le => r.lhs == Formula::Top && r.rhs == Formula::Bot,
    }
}

/// Extracts and normalizes the modal part of a quasi-atomic sequent for a modal logic.
///
/// Relations with a variable side belong to the propositional part and are skipped.
pub fn modal_part(s: &SequentOfRelations, logic: Logic) -> Result<ModalPart, RelationsError> {
    let mut box_box = BTreeSet::new();
    let mut box_bot = BTreeSet::new();
    let mut dia_dia = BTreeSet::new();
    let mut dia_low = BTreeSet::new();
    let mut dia_high = BTreeSet::new();
    for r in s.iter() {
        if !r.is_quasi_atomic() {
            return Err(RelationsError::NotQuasiAtomic(r.clone()));
        }
        if matches!(r.lhs, Formula::Var(_)) || matches!(r.rhs, Formula::Var(_)) || is_dead(r) {
            continue;
        }
        let unexpected = || RelationsError::UnexpectedShape(r.clone(), logic);
        match logic {
            Logic::G => return Err(unexpected()),
            Logic::GKBox => match (&r.lhs, r.kind, &r.rhs) {
                (Formula::Dia(_), _, _) | (_, _, Formula::Dia(_)) => return Err(unexpected()),
                (_, RelKind::Lt, _) if r.lhs.is_modal() || r.rhs.is_modal() => {}
                (Formula::Box(a), RelKind::Le, Formula::Box(b)) => {
                    box_box.insert(((**a).clone(), (**b).clone()));
                }
                (Formula::Top, RelKind::Le, Formula::Box(b)) => {
                    box_box.insert((Formula::Top, (**b).clone()));
                }
                (Formula::Box(c), RelKind::Le, Formula::Bot) => {
                    box_bot.insert((**c).clone());
                }
                _ => return Err(unexpected()),
            },
            Logic::GKDia | Logic::GKFDia => match (&r.lhs, r.kind, &r.rhs) {
                (Formula::Box(_), _, _) | (_, _, Formula::Box(_)) => return Err(unexpected()),
                (Formula::Dia(a), RelKind::Le, Formula::Dia(b)) => {
                    dia_dia.insert(((**a).clone(), (**b).clone()));
                }
                (Formula::Dia(a), RelKind::Le, Formula::Bot) => {
                    dia_dia.insert(((**a).clone(), Formula::Bot));
                }
                (Formula::Bot, RelKind::Lt, Formula::Dia(c)) => {
                    dia_low.insert((**c).clone());
                }
                (Formula::Top, RelKind::Le, Formula::Dia(d)) => {
                    if logic == Logic::GKDia {
                        dia_high.insert((**d).clone());
                    }
                }
                (Formula::Dia(_), RelKind::Lt, _) => {}
                _ => return Err(unexpected()),
            },
        }
    }
    Ok(ModalPart {
        box_box: box_box.into_iter().collect(),
        box_bot: box_bot.into_iter().collect(),
        dia_dia: dia_dia.into_iter().collect(),
        dia_low: dia_low.into_iter().collect(),
        dia_high: dia_high.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn seq(s: &str) -> SequentOfRelations {
        parse_sequent(s).unwrap()
    }

    #[test]
    fn parses_relations() {
        let s = seq("p <= q ; q < p");
        assert_eq!(s.relations, BTreeSet::from([Relation::le(f("p"), f("q")), Relation::lt(f("q"), f("p"))]));
        let s = seq("top <= (p -> q) | (q -> p)");
        assert_eq!(s.relations, BTreeSet::from([Relation::le(Formula::Top, f("(p -> q) | (q -> p)"))]));
        assert_eq!(seq("p <= q ; p <= q").len(), 1);
        assert_eq!(seq("<>p<<>q"), SequentOfRelations::from_iter([Relation::lt(f("<>p"), f("<>q"))]));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_sequent("p ; q <= r"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_sequent("p"), Err(ParseError::Syntax { .. })));
        assert!(parse_sequent("p <= q ;").is_err());
        assert!(parse_sequent("p <= q <= r").is_err());
        assert_eq!(parse_sequent(""), Err(ParseError::Empty));
    }

    #[test]
    fn display_round_trips() {
        let s = seq("[]p <= q ; ~q < <>r ; p | q <= p & q");
        assert_eq!(parse_sequent(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn interpretation() {
        assert_eq!(interp_sequent(&seq("p < q ; r <= s")), f("(q -> p) -> (r -> s)"));
        assert_eq!(interp_sequent(&SequentOfRelations::new()), f("top -> bot"));
        assert_eq!(interp_sequent(&seq("p <= q")), f("top -> (p -> q)"));
    }

    #[test]
    fn block_expansion() {
        let r = f("r");
        let pq = [f("p"), f("q")];
        assert_eq!(
            expand_block(&pq, RelKind::Le, &r, Orientation::ListLeft),
            BTreeSet::from([Relation::le(f("p"), r.clone()), Relation::le(f("q"), r.clone())])
        );
        assert_eq!(expand_block(&[], RelKind::Le, &r, Orientation::ListLeft), BTreeSet::from([Relation::le(Formula::Top, r.clone())]));
        assert_eq!(expand_block(&[], RelKind::Lt, &r, Orientation::ListLeft), BTreeSet::new());
        assert_eq!(expand_block(&[], RelKind::Le, &f("p"), Orientation::ListRight), BTreeSet::from([Relation::le(f("p"), Formula::Bot)]));
        assert_eq!(expand_block(&[], RelKind::Lt, &f("p"), Orientation::ListRight), BTreeSet::new());
        assert_eq!(
            expand_block(&pq, RelKind::Lt, &r, Orientation::ListRight),
            BTreeSet::from([Relation::lt(r.clone(), f("p")), Relation::lt(r.clone(), f("q"))])
        );
    }

    #[test]
    fn abstraction_shares_and_restores() {
        let s = seq("[]p <= []q");
        let a = abstract_modals(&s).unwrap();
        assert_eq!(a.mapping.len(), 2);
        assert!(a.sequent.is_atomic());
        assert_eq!(a.restore(), s);

        let s = seq("<>p <= bot ; <>p <= <>q");
        let a = abstract_modals(&s).unwrap();
        assert_eq!(a.mapping.len(), 2);
        assert_eq!(a.restore(), s);

        let s = seq("p <= q");
        let a = abstract_modals(&s).unwrap();
        assert!(a.mapping.is_empty());
        assert_eq!(a.sequent, s);

        assert!(matches!(abstract_modals(&seq("p & q <= r")), Err(RelationsError::NotQuasiAtomic(_))));
    }

    #[test]
    fn modal_part_box() {
        let m = modal_part(&seq("[]p <= []q ; q < []p ; top <= []r"), Logic::GKBox).unwrap();
        assert_eq!(m.box_box, vec![(f("p"), f("q")), (Formula::Top, f("r"))]);
        assert!(m.box_bot.is_empty());
        let m = modal_part(&seq("[]p <= bot ; []p < []q ; []q < bot ; top <= bot ; top < []p"), Logic::GKBox).unwrap();
        assert_eq!(m.box_bot, vec![f("p")]);
        assert!(m.box_box.is_empty());
        assert!(modal_part(&seq("bot <= []p"), Logic::GKBox).is_err());
        assert!(modal_part(&seq("<>p <= []p"), Logic::GKBox).is_err());
    }

    #[test]
    fn modal_part_diamond() {
        let m = modal_part(&seq("<>p <= <>q ; <>r < <>q ; bot < <>s"), Logic::GKDia).unwrap();
        assert_eq!(m.dia_dia, vec![(f("p"), f("q"))]);
        assert_eq!(m.dia_low, vec![f("s")]);
        let m = modal_part(&seq("<>p <= <>q ; top <= <>r"), Logic::GKFDia).unwrap();
        assert_eq!(m.dia_dia, vec![(f("p"), f("q"))]);
        assert!(m.dia_high.is_empty());
        let m = modal_part(&seq("<>p <= bot ; top <= <>r"), Logic::GKDia).unwrap();
        assert_eq!(m.dia_dia, vec![(f("p"), Formula::Bot)]);
        assert_eq!(m.dia_high, vec![f("r")]);
        assert!(modal_part(&seq("<>p <= top"), Logic::GKDia).is_err());
    }
}
