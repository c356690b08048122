//! Hypersequents, derivations in the Goedel hypersequent calculus and its box extension,
//! a rule-by-rule checker and cut elimination.

mod check;
mod cut;
mod generate;
mod multiset;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::formula::{render_guarded, Formula, ParseError, Parser};
use crate::lexer::{tokenize, Spanned, Tok};

pub use check::{check_derivation, check_derivation_with, instance, CheckError, CheckOptions, ComSplit, RuleInstance};
pub use cut::{eliminate_cuts, CutError};
pub use generate::{random_derivation, GenParams};

/// A single-conclusion sequent `Γ => Δ` with `|Δ| <= 1`; the antecedent is kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HSequent {
    left: Vec<Formula>,
    right: Option<Formula>,
}

impl HSequent {
    pub fn new(mut left: Vec<Formula>, right: Option<Formula>) -> Self {
        left.sort();
        HSequent { left, right }
    }

    pub fn left(&self) -> &[Formula] {
        &self.left
    }

    pub fn right(&self) -> Option<&Formula> {
        self.right.as_ref()
    }

    pub fn count_left(&self, f: &Formula) -> usize {
        multiset::count(&self.left, f)
    }

    /// `Γ ∧ ... -> Δ`, with empty conjunction `top` and empty succedent `bot`.
    pub fn interp(&self) -> Formula {
        Formula::imp(Formula::conj(self.left.iter().cloned()), self.right.clone().unwrap_or(Formula::Bot))
    }
}

impl fmt::Display for HSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left: Vec<String> = self.left.iter().map(render_guarded).collect();
        if !left.is_empty() {
            write!(f, "{} ", left.join(", "))?;
        }
        f.write_str("=>")?;
        if let Some(r) = &self.right {
            write!(f, " {}", render_guarded(r))?;
        }
        Ok(())
    }
}

/// A multiset of sequents, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Hypersequent {
    components: Vec<HSequent>,
}

impl Hypersequent {
    pub fn new(mut components: Vec<HSequent>) -> Self {
        components.sort();
        Hypersequent { components }
    }

    pub fn components(&self) -> &[HSequent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn count(&self, c: &HSequent) -> usize {
        multiset::count(&self.components, c)
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.components.iter().flat_map(|c| c.left.iter().chain(c.right.iter()))
    }
}

/// The disjunction of the component interpretations; the empty hypersequent is `bot`.
pub fn interp_hyper(h: &Hypersequent) -> Formula {
    Formula::disj(h.components.iter().map(HSequent::interp))
}

impl fmt::Display for Hypersequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(" | "))
    }
}

fn parse_component(toks: &[Spanned], end: usize) -> Result<HSequent, ParseError> {
    let arrow = toks
        .iter()
        .position(|t| t.tok == Tok::Seq)
        .ok_or_else(|| ParseError::Syntax { pos: toks.first().map_or(end, |t| t.pos), msg: "component missing `=>`".into() })?;
    let mut left = Vec::new();
    let lhs = &toks[..arrow];
    if !lhs.is_empty() {
        for part in lhs.split(|t| t.tok == Tok::Comma) {
            let stop = toks.get(arrow).map_or(end, |t| t.pos);
            left.push(parse_slice(part, stop)?);
        }
    }
    let rhs = &toks[arrow + 1..];
    let right = if rhs.is_empty() { None } else { Some(parse_slice(rhs, end)?) };
    Ok(HSequent::new(left, right))
}

fn parse_slice(toks: &[Spanned], end: usize) -> Result<Formula, ParseError> {
    if toks.is_empty() {
        return Err(ParseError::Syntax { pos: end, msg: "expected a formula".into() });
    }
    if let Some(t) = toks.iter().find(|t| matches!(t.tok, Tok::Seq | Tok::Comma | Tok::Le | Tok::Lt | Tok::Semi)) {
        return Err(ParseError::Syntax { pos: t.pos, msg: format!("unexpected {}", t.tok.describe()) });
    }
    let mut p = Parser::new(toks, end);
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.unexpected());
    }
    Ok(f)
}

/// Parses `SEQ ('|' SEQ)*` where `SEQ = F (',' F)* '=>' [F]`. A top-level `|` followed by text without `=>`
/// extends the previous succedent; other disjunctions must be parenthesized. Blank input is the empty hypersequent.
pub fn parse_hypersequent(text: &str) -> Result<Hypersequent, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Ok(Hypersequent::default());
    }
    let mut depth = 0i32;
    let mut parts: Vec<&[Spanned]> = Vec::new();
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.tok {
            Tok::LParen => depth += 1,
            Tok::RParen => {
                depth -= 1;
                if depth < 0 {
                    return Err(ParseError::Unbalanced { pos: t.pos });
                }
            }
            Tok::Or if depth == 0 => {
                // A piece without `=>` continues the previous succedent.
                let rest_has_seq = toks[i + 1..]
                    .iter()
                    .scan(0i32, |d, t| {
                        match t.tok {
                            Tok::LParen => *d += 1,
                            Tok::RParen => *d -= 1,
                            _ => {}
                        }
                        Some((*d, t))
                    })
                    .take_while(|(d, t)| !(*d == 0 && t.tok == Tok::Or))
                    .any(|(_, t)| t.tok == Tok::Seq);
                if rest_has_seq || !toks[start..i].iter().any(|t| t.tok == Tok::Seq) {
                    parts.push(&toks[start..i]);
                    start = i + 1;
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        let open = toks.iter().rev().find(|t| t.tok == Tok::LParen).map_or(0, |t| t.pos);
        return Err(ParseError::Unbalanced { pos: open });
    }
    parts.push(&toks[start..]);
    let mut comps = Vec::with_capacity(parts.len());
    for (k, part) in parts.iter().enumerate() {
        let stop = if k + 1 < parts.len() { parts[k + 1].first().map_or(text.len(), |t| t.pos) } else { text.len() };
        if part.is_empty() {
            return Err(ParseError::Syntax { pos: stop, msg: "empty component".into() });
        }
        comps.push(parse_component(part, stop)?);
    }
    Ok(Hypersequent::new(comps))
}

impl FromStr for Hypersequent {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hypersequent(s)
    }
}

impl Serialize for Hypersequent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Hypersequent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_hypersequent(&text).map_err(serde::de::Error::custom)
    }
}

/// Rule labels. `NegL`/`NegR` are derived rules expanded by [`expand_macros`];
/// `Hyp` marks an undischarged premise and is accepted only on request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HRule {
    Id,
    BotL,
    TopR,
    Ec,
    Ew,
    Com,
    Wl,
    Wr,
    Cl,
    ImpL,
    ImpR,
    AndL1,
    AndL2,
    AndR,
    OrL,
    OrR1,
    OrR2,
    Cut,
    Box,
    NegL,
    NegR,
    Hyp,
}

impl HRule {
    pub const ALL: [HRule; 22] = [
        HRule::Id,
        HRule::BotL,
        HRule::TopR,
        HRule::Ec,
        HRule::Ew,
        HRule::Com,
        HRule::Wl,
        HRule::Wr,
        HRule::Cl,
        HRule::ImpL,
        HRule::ImpR,
        HRule::AndL1,
        HRule::AndL2,
        HRule::AndR,
        HRule::OrL,
        HRule::OrR1,
        HRule::OrR2,
        HRule::Cut,
        HRule::Box,
        HRule::NegL,
        HRule::NegR,
        HRule::Hyp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HRule::Id => "id",
            HRule::BotL => "bot-l",
            HRule::TopR => "top-r",
            HRule::Ec => "ec",
            HRule::Ew => "ew",
            HRule::Com => "com",
            HRule::Wl => "wl",
            HRule::Wr => "wr",
            HRule::Cl => "cl",
            HRule::ImpL => "imp-l",
            HRule::ImpR => "imp-r",
            HRule::AndL1 => "and-l1",
            HRule::AndL2 => "and-l2",
            HRule::AndR => "and-r",
            HRule::OrL => "or-l",
            HRule::OrR1 => "or-r1",
            HRule::OrR2 => "or-r2",
            HRule::Cut => "cut",
            HRule::Box => "box",
            HRule::NegL => "neg-l",
            HRule::NegR => "neg-r",
            HRule::Hyp => "hyp",
        }
    }
}

impl fmt::Display for HRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for HRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HRule::ALL.iter().copied().find(|r| r.label() == s).ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

impl Serialize for HRule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for HRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A derivation tree with the conclusion written out at every node; subtrees may be shared.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HDerivation {
    pub rule: HRule,
    pub conclusion: Hypersequent,
    #[serde(default)]
    pub premises: Vec<Arc<HDerivation>>,
}

impl HDerivation {
    pub fn new(rule: HRule, conclusion: Hypersequent, premises: Vec<Arc<HDerivation>>) -> Self {
        HDerivation { rule, conclusion, premises }
    }

    pub fn leaf(rule: HRule, conclusion: Hypersequent) -> Self {
        HDerivation { rule, conclusion, premises: vec![] }
    }

    /// Number of nodes counted as a tree.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(|p| p.height()).max().unwrap_or(0)
    }

    pub fn count_rule(&self, rule: HRule) -> usize {
        (self.rule == rule) as usize + self.premises.iter().map(|p| p.count_rule(rule)).sum::<usize>()
    }

    pub fn is_cut_free(&self) -> bool {
        self.rule != HRule::Cut && self.premises.iter().all(|p| p.is_cut_free())
    }
}

/// Replaces every `neg-l`/`neg-r` node by its expansion into primitive rules.
pub fn expand_macros(d: &HDerivation) -> Result<HDerivation, CheckError> {
    check::expand(d)
}

/// A derivation of `[]Π1 => | ... | []Πn => | []Γ => []A` from the placeholder premise
/// `Π1 => | ... | Πn => | Γ => A`.
pub fn derive_box_n(pis: &[Vec<Formula>], gamma: &[Formula], a: &Formula) -> HDerivation {
    let premise = Hypersequent::new(
        pis.iter().map(|p| HSequent::new(p.clone(), None)).chain([HSequent::new(gamma.to_vec(), Some(a.clone()))]).collect(),
    );
    let leaf = Arc::new(HDerivation::leaf(HRule::Hyp, premise));
    (*cut::box_n(leaf, pis, gamma, a)).clone()
}
