//! Formulas of the propositional, box and diamond languages.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::lexer::{tokenize, Spanned, Tok};

/// A formula over variables, constants, the binary connectives and the two modalities.
///
/// Negation is not a constructor: `~A` is stored as `A -> bot`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    Var(Arc<str>),
    Bot,
    Top,
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Imp(Arc<Formula>, Arc<Formula>),
    Box(Arc<Formula>),
    Dia(Arc<Formula>),
}

impl Formula {
    pub fn var(name: &str) -> Formula {
        Formula::Var(Arc::from(name))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Arc::new(a), Arc::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Formula {
        Formula::imp(a, Formula::Bot)
    }

    pub fn boxed(a: Formula) -> Formula {
        Formula::Box(Arc::new(a))
    }

    pub fn dia(a: Formula) -> Formula {
        Formula::Dia(Arc::new(a))
    }

    /// Conjunction of a list, `top` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::Top,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list, `bot` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::Bot,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Variables and constants.
    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Var(_) | Formula::Bot | Formula::Top)
    }

    pub fn is_modal(&self) -> bool {
        matches!(self, Formula::Box(_) | Formula::Dia(_))
    }

    /// Atoms and formulas whose outermost connective is a modality.
    pub fn is_quasi_atom(&self) -> bool {
        self.is_atom() || self.is_modal()
    }

    pub fn has_box(&self) -> bool {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => false,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.has_box() || b.has_box(),
            Formula::Box(_) => true,
            Formula::Dia(a) => a.has_box(),
        }
    }

    pub fn has_dia(&self) -> bool {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => false,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.has_dia() || b.has_dia(),
            Formula::Dia(_) => true,
            Formula::Box(a) => a.has_dia(),
        }
    }

    /// Size as the number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
            Formula::Box(a) | Formula::Dia(a) => 1 + a.size(),
        }
    }

    /// Nesting depth of connectives; atoms have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Box(a) | Formula::Dia(a) => 1 + a.depth(),
        }
    }

    /// Maximum nesting of modal operators.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Box(a) | Formula::Dia(a) => 1 + a.modal_depth(),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            Formula::Bot | Formula::Top => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Box(a) | Formula::Dia(a) => a.collect_vars(out),
        }
    }

    pub fn vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

/// Number of binary connectives and modal operators.
pub fn complexity(f: &Formula) -> usize {
    match f {
        Formula::Var(_) | Formula::Bot | Formula::Top => 0,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + complexity(a) + complexity(b),
        Formula::Box(a) | Formula::Dia(a) => 1 + complexity(a),
    }
}

/// Maximum complexity of the body of a modal subformula, 0 when there is none.
pub fn modal_degree(f: &Formula) -> usize {
    match f {
        Formula::Var(_) | Formula::Bot | Formula::Top => 0,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => modal_degree(a).max(modal_degree(b)),
        Formula::Box(a) | Formula::Dia(a) => complexity(a).max(modal_degree(a)),
    }
}

/// Maximum complexity of a modal subformula (the modal operator included), 0 when there is none.
///
/// This is the measure that strictly decreases across a modal step of the prover.
pub fn modal_measure(f: &Formula) -> usize {
    match f {
        Formula::Var(_) | Formula::Bot | Formula::Top => 0,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => modal_measure(a).max(modal_measure(b)),
        Formula::Box(_) | Formula::Dia(_) => complexity(f),
    }
}

/// The logics decided by the prover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Logic {
    G,
    GKBox,
    GKDia,
    GKFDia,
}

impl Logic {
    pub const ALL: [Logic; 4] = [Logic::G, Logic::GKBox, Logic::GKDia, Logic::GKFDia];

    pub fn name(self) -> &'static str {
        match self {
            Logic::G => "g",
            Logic::GKBox => "gk-box",
            Logic::GKDia => "gk-diamond",
            Logic::GKFDia => "gkf-diamond",
        }
    }

    pub fn is_diamond(self) -> bool {
        matches!(self, Logic::GKDia | Logic::GKFDia)
    }

    pub fn admits(self, f: &Formula) -> bool {
        match self {
            Logic::G => !f.has_box() && !f.has_dia(),
            Logic::GKBox => !f.has_dia(),
            Logic::GKDia | Logic::GKFDia => !f.has_box(),
        }
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown logic `{0}` (expected g, gk-box, gk-diamond or gkf-diamond)")]
pub struct UnknownLogic(pub String);

impl FromStr for Logic {
    type Err = UnknownLogic;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Logic::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| UnknownLogic(s.to_string()))
    }
}

impl Serialize for Logic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Logic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The logics whose language admits `f`.
pub fn fragment_of(f: &Formula) -> BTreeSet<Logic> {
    Logic::ALL.into_iter().filter(|l| l.admits(f)).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbalanced parentheses at {pos}")]
    Unbalanced { pos: usize },
}

/// Recursive-descent parser over a token slice.
pub(crate) struct Parser<'a> {
    toks: &'a [Spanned],
    idx: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: &'a [Spanned], end: usize) -> Self {
        Parser { toks, idx: 0, end }
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |t| t.pos)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|t| t.tok.clone());
        self.idx += 1;
        t
    }

    pub(crate) fn unexpected(&self) -> ParseError {
        match self.peek() {
            None => ParseError::Syntax { pos: self.end, msg: "unexpected end of input".into() },
            Some(Tok::RParen) => ParseError::Unbalanced { pos: self.pos() },
            Some(t) => ParseError::Syntax { pos: self.pos(), msg: format!("unexpected {}", t.describe()) },
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Imp) {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::neg(self.unary()?))
            }
            Some(Tok::Box) => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Some(Tok::Dia) => {
                self.bump();
                Ok(Formula::dia(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let f = Formula::var(name);
                self.bump();
                Ok(f)
            }
            Some(Tok::Bot) => {
                self.bump();
                Ok(Formula::Bot)
            }
            Some(Tok::Top) => {
                self.bump();
                Ok(Formula::Top)
            }
            Some(Tok::LParen) => {
                let open = self.pos();
                self.bump();
                let f = self.formula()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.bump();
                        Ok(f)
                    }
                    None => Err(ParseError::Unbalanced { pos: open }),
                    Some(_) => Err(self.unexpected()),
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parses a formula in the concrete ASCII syntax.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser::new(&toks, text.len());
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.unexpected());
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

const PREC_IMP: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNARY: u8 = 4;

fn write_prec(f: &Formula, ctx: u8, out: &mut String) {
    let open = match f {
        Formula::Imp(_, b) if **b != Formula::Bot => ctx > PREC_IMP,
        Formula::Or(..) => ctx > PREC_OR,
        Formula::And(..) => ctx > PREC_AND,
        _ => false,
    };
    if open {
        out.push('(');
    }
    match f {
        Formula::Var(v) => out.push_str(v),
        Formula::Bot => out.push_str("bot"),
        Formula::Top => out.push_str("top"),
        Formula::Imp(a, b) if **b == Formula::Bot => {
            out.push('~');
            write_prec(a, PREC_UNARY, out);
        }
        Formula::Imp(a, b) => {
            write_prec(a, PREC_OR, out);
            out.push_str(" -> ");
            write_prec(b, PREC_IMP, out);
        }
        Formula::Or(a, b) => {
            write_prec(a, PREC_OR, out);
            out.push_str(" | ");
            write_prec(b, PREC_AND, out);
        }
        Formula::And(a, b) => {
            write_prec(a, PREC_AND, out);
            out.push_str(" & ");
            write_prec(b, PREC_UNARY, out);
        }
        Formula::Box(a) => {
            out.push_str("[]");
            write_prec(a, PREC_UNARY, out);
        }
        Formula::Dia(a) => {
            out.push_str("<>");
            write_prec(a, PREC_UNARY, out);
        }
    }
    if open {
        out.push(')');
    }
}

/// Prints a formula with minimal parentheses; `A -> bot` is printed as `~A`.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_prec(f, 0, &mut out);
    out
}

/// Like [`render_formula`] but parenthesizes a top-level disjunction, as hypersequent syntax requires.
pub(crate) fn render_guarded(f: &Formula) -> String {
    let mut out = String::new();
    write_prec(f, PREC_AND, &mut out);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render_formula(self))
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_formula(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn parses_prelinearity() {
        let pq = Formula::imp(Formula::var("p"), Formula::var("q"));
        let qp = Formula::imp(Formula::var("q"), Formula::var("p"));
        assert_eq!(p("(p -> q) | (q -> p)"), Formula::or(pq, qp));
    }

    #[test]
    fn parses_negated_diamond_bottom() {
        assert_eq!(p("~<>bot"), Formula::imp(Formula::dia(Formula::Bot), Formula::Bot));
    }

    #[test]
    fn parses_atom() {
        assert_eq!(p("p"), Formula::var("p"));
        assert_eq!(p("x_1A"), Formula::var("x_1A"));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("p -> q -> r"), p("p -> (q -> r)"));
        assert_eq!(p("p & q | r -> s"), p("((p & q) | r) -> s"));
        assert_eq!(p("~p & q"), p("(~p) & q"));
        assert_eq!(p("[]p -> q"), p("([]p) -> q"));
        assert_eq!(p("p | q | r"), Formula::or(p("p | q"), p("r")));
        assert_eq!(p("<><>p"), Formula::dia(Formula::dia(Formula::var("p"))));
    }

    #[test]
    fn diamond_lexing_is_adjacent_only() {
        assert!(parse_formula("< > p").is_err());
        assert_eq!(p("<>p"), Formula::dia(Formula::var("p")));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_formula(""), Err(ParseError::Empty));
        assert_eq!(parse_formula("   "), Err(ParseError::Empty));
        assert!(matches!(parse_formula("(p -> q"), Err(ParseError::Unbalanced { pos: 0 })));
        assert!(matches!(parse_formula("p -> q)"), Err(ParseError::Unbalanced { pos: 6 })));
        assert!(matches!(parse_formula("p q"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_formula("P"), Err(ParseError::Syntax { pos: 0, .. })));
        assert!(parse_formula("p ->").is_err());
        assert!(parse_formula("bot(p)").is_err());
    }

    #[test]
    fn renders_minimally() {
        assert_eq!(render_formula(&p("(p -> q) | (q -> p)")), "(p -> q) | (q -> p)");
        assert_eq!(render_formula(&Formula::boxed(p("p -> q"))), "[](p -> q)");
        assert_eq!(render_formula(&Formula::Bot), "bot");
        assert_eq!(render_formula(&p("p -> (q -> r)")), "p -> q -> r");
        assert_eq!(render_formula(&p("(p -> q) -> r")), "(p -> q) -> r");
        assert_eq!(render_formula(&p("p | (q | r)")), "p | (q | r)");
        assert_eq!(render_formula(&p("(p | q) | r")), "p | q | r");
        assert_eq!(render_formula(&p("~~[]p -> []~~p")), "~~[]p -> []~~p");
        assert_eq!(render_formula(&p("~(p & q)")), "~(p & q)");
        assert_eq!(render_formula(&p("p -> bot")), "~p");
    }

    #[test]
    fn complexity_examples() {
        assert_eq!(complexity(&p("p -> q")), 1);
        assert_eq!(complexity(&Formula::Bot), 0);
        assert_eq!(complexity(&p("[]~~p")), 3);
    }

    #[test]
    fn modal_degree_examples() {
        assert_eq!(modal_degree(&p("p -> q")), 0);
        assert_eq!(modal_degree(&p("[](p -> q)")), 1);
        assert_eq!(modal_degree(&p("[]~~p -> ~~[]p")), 2);
        assert_eq!(modal_measure(&p("[]~~p -> ~~[]p")), 3);
        assert_eq!(modal_measure(&p("p -> q")), 0);
    }

    #[test]
    fn fragments() {
        assert_eq!(fragment_of(&p("[]p")), BTreeSet::from([Logic::GKBox]));
        assert_eq!(fragment_of(&p("<>p")), BTreeSet::from([Logic::GKDia, Logic::GKFDia]));
        assert_eq!(fragment_of(&p("p & q")), BTreeSet::from(Logic::ALL));
        assert!(fragment_of(&p("[]<>p")).is_empty());
    }

    #[test]
    fn logic_names_round_trip() {
        for l in Logic::ALL {
            assert_eq!(l.name().parse::<Logic>().unwrap(), l);
        }
        assert!("k".parse::<Logic>().is_err());
    }
}
