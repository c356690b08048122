//! Schema matching for every rule label.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use super::multiset::{count, diff, distinct, is_sub, remove_n, sum};
use super::{HDerivation, HRule, HSequent, Hypersequent};
use crate::formula::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct CheckOptions {
    /// Permit the box rule.
    pub modal: bool,
    /// Permit `hyp` placeholder leaves.
    pub allow_hyp: bool,
}

/// How a (com) or (cut) conclusion is split. For (com) the conclusion components are `g1,g2 => Δ1` and
/// `p1,p2 => Δ2` with premises `g1,p1 => Δ1` and `g2,p2 => Δ2`; for (cut) `g1` and `g2` are `Γ1` and `Γ2`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ComSplit {
    pub g1: Vec<Formula>,
    pub g2: Vec<Formula>,
    pub p1: Vec<Formula>,
    pub p2: Vec<Formula>,
}

/// A concrete match of a rule schema: conclusion = `context + active`,
/// premise `k` = `context + premise_active[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub context: Vec<HSequent>,
    pub active: Vec<HSequent>,
    pub premise_active: Vec<Vec<HSequent>>,
    /// The principal formula; for (cut) the cut formula.
    pub principal: Option<Formula>,
    pub split: Option<ComSplit>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("node {path:?} ({rule}): {reason}")]
pub struct CheckError {
    /// Premise indices from the root.
    pub path: Vec<usize>,
    pub rule: HRule,
    pub reason: String,
}

fn comp(left: Vec<Formula>, right: Option<Formula>) -> HSequent {
    HSequent::new(left, right)
}

/// Candidate (principal, premise components) pairs for a single-component rule whose active conclusion
/// component is `c`.
fn single_candidates(rule: HRule, c: &HSequent) -> Vec<(Option<Formula>, Vec<HSequent>)> {
    let mut out = Vec::new();
    let right = c.right.clone();
    let lefts = distinct(&c.left);
    let rest = |f: &Formula| remove_n(&c.left, f, 1).expect("present");
    match rule {
        HRule::Id => {
            if c.left.len() == 1 && right.as_ref() == Some(&c.left[0]) {
                out.push((right.clone(), vec![]));
            }
        }
        HRule::BotL => {
            if c.left.contains(&Formula::Bot) {
                out.push((Some(Formula::Bot), vec![]));
            }
        }
        HRule::TopR => {
            if right == Some(Formula::Top) {
                out.push((right.clone(), vec![]));
            }
        }
        HRule::Wl => {
            for f in &lefts {
                out.push((Some(f.clone()), vec![comp(rest(f), right.clone())]));
            }
        }
        HRule::Wr => {
            if let Some(r) = &right {
                out.push((Some(r.clone()), vec![comp(c.left.clone(), None)]));
            }
        }
        HRule::Cl => {
            for f in &lefts {
                out.push((Some(f.clone()), vec![comp(sum(&c.left, std::slice::from_ref(f)), right.clone())]));
            }
        }
        HRule::ImpL => {
            for f in &lefts {
                if let Formula::Imp(a, b) = f {
                    let g = rest(f);
                    out.push((Some(f.clone()), vec![comp(g.clone(), Some((**a).clone())), comp(sum(&g, &[(**b).clone()]), right.clone())]));
                }
            }
        }
        HRule::NegL => {
            if right.is_none() {
                for f in &lefts {
                    if let Formula::Imp(a, b) = f {
                        if **b == Formula::Bot {
                            out.push((Some(f.clone()), vec![comp(rest(f), Some((**a).clone()))]));
                        }
                    }
                }
            }
        }
        HRule::AndL1 | HRule::AndL2 => {
            for f in &lefts {
                if let Formula::And(a, b) = f {
                    let part = if rule == HRule::AndL1 { a } else { b };
                    out.push((Some(f.clone()), vec![comp(sum(&rest(f), &[(**part).clone()]), right.clone())]));
                }
            }
        }
        HRule::OrL => {
            for f in &lefts {
                if let Formula::Or(a, b) = f {
                    let g = rest(f);
                    out.push((
                        Some(f.clone()),
                        vec![comp(sum(&g, &[(**a).clone()]), right.clone()), comp(sum(&g, &[(**b).clone()]), right.clone())],
                    ));
                }
            }
        }
        HRule::ImpR => {
            if let Some(Formula::Imp(a, b)) = &right {
                out.push((right.clone(), vec![comp(sum(&c.left, &[(**a).clone()]), Some((**b).clone()))]));
            }
        }
        HRule::NegR => {
            if let Some(Formula::Imp(a, b)) = &right {
                if **b == Formula::Bot {
                    out.push((right.clone(), vec![comp(sum(&c.left, &[(**a).clone()]), None)]));
                }
            }
        }
        HRule::AndR => {
            if let Some(Formula::And(a, b)) = &right {
                out.push((right.clone(), vec![comp(c.left.clone(), Some((**a).clone())), comp(c.left.clone(), Some((**b).clone()))]));
            }
        }
        HRule::OrR1 | HRule::OrR2 => {
            if let Some(Formula::Or(a, b)) = &right {
                let part = if rule == HRule::OrR1 { a } else { b };
                out.push((right.clone(), vec![comp(c.left.clone(), Some((**part).clone()))]));
            }
        }
        _ => {}
    }
    out
}

/// The single component `p - ctx`, if that difference is exactly one component.
fn only_extra(p: &Hypersequent, ctx: &[HSequent]) -> Option<HSequent> {
    let extra = diff(&p.components, ctx)?;
    (extra.len() == 1).then(|| extra.into_iter().next().expect("one"))
}

fn match_com(concl: &Hypersequent, premises: &[&Hypersequent]) -> Option<RuleInstance> {
    let [q1, q2] = premises else { return None };
    let comps = &concl.components;
    for i in 0..comps.len() {
        for j in 0..comps.len() {
            if i == j || (i > 0 && comps[i] == comps[i - 1]) || (j > 0 && comps[j] == comps[j - 1] && j - 1 != i) {
                continue;
            }
            let (c1, c2) = (&comps[i], &comps[j]);
            let ctx = diff(comps, &[c1.clone(), c2.clone()]).expect("present");
            let (Some(p1), Some(p2)) = (only_extra(q1, &ctx), only_extra(q2, &ctx)) else { continue };
            if p1.right != c1.right || p2.right != c2.right {
                continue;
            }
            if let Some(split) = com_split(c1, c2, &p1, &p2) {
                return Some(RuleInstance {
                    context: ctx,
                    active: vec![c1.clone(), c2.clone()],
                    premise_active: vec![vec![p1], vec![p2]],
                    principal: None,
                    split: Some(split),
                });
            }
        }
    }
    None
}

/// Splits `c1.left = g1 + g2`, `c2.left = p1 + p2` with `q1.left = g1 + p1`, `q2.left = g2 + p2`.
fn com_split(c1: &HSequent, c2: &HSequent, q1: &HSequent, q2: &HSequent) -> Option<ComSplit> {
    let all = distinct(&sum(&sum(&c1.left, &c2.left), &sum(&q1.left, &q2.left)));
    let mut s = ComSplit::default();
    for f in all {
        let (l1, l2) = (count(&c1.left, &f), count(&c2.left, &f));
        let (m1, m2) = (count(&q1.left, &f), count(&q2.left, &f));
        if l1 + l2 != m1 + m2 {
            return None;
        }
        let lo = 0.max(m1 as isize - l2 as isize).max(l1 as isize - m2 as isize) as usize;
        let hi = l1.min(m1);
        if lo > hi {
            return None;
        }
        let g1 = lo;
        s.g1.extend(std::iter::repeat_n(f.clone(), g1));
        s.g2.extend(std::iter::repeat_n(f.clone(), l1 - g1));
        s.p1.extend(std::iter::repeat_n(f.clone(), m1 - g1));
        s.p2.extend(std::iter::repeat_n(f.clone(), l2 - (m1 - g1)));
    }
    Some(s)
}

fn match_cut(concl: &Hypersequent, premises: &[&Hypersequent]) -> Option<RuleInstance> {
    let [q1, q2] = premises else { return None };
    for c in distinct(&concl.components) {
        let ctx = diff(&concl.components, std::slice::from_ref(&c)).expect("present");
        let (Some(major), Some(minor)) = (only_extra(q1, &ctx), only_extra(q2, &ctx)) else { continue };
        let Some(a) = minor.right.clone() else { continue };
        let Some(g1) = diff(&c.left, &minor.left) else { continue };
        if major != comp(sum(&g1, std::slice::from_ref(&a)), c.right.clone()) {
            continue;
        }
        return Some(RuleInstance {
            context: ctx,
            active: vec![c.clone()],
            premise_active: vec![vec![major], vec![minor.clone()]],
            principal: Some(a),
            split: Some(ComSplit { g1, g2: minor.left.clone(), ..Default::default() }),
        });
    }
    None
}

fn unbox_all(fs: &[Formula]) -> Option<Vec<Formula>> {
    fs.iter()
        .map(|f| match f {
            Formula::Box(a) => Some((**a).clone()),
            _ => None,
        })
        .collect()
}

fn match_box(concl: &Hypersequent, premises: &[&Hypersequent]) -> Option<RuleInstance> {
    let [q] = premises else { return None };
    let [x, y] = concl.components.as_slice() else { return None };
    let (pc, gc) = match (&x.right, &y.right) {
        (None, Some(_)) => (x, y),
        (Some(_), None) => (y, x),
        _ => return None,
    };
    let Some(Formula::Box(a)) = &gc.right else { return None };
    let pi = unbox_all(&pc.left)?;
    let gamma = unbox_all(&gc.left)?;
    let pc2 = comp(pi, None);
    let gc2 = comp(gamma, Some((**a).clone()));
    if **q != Hypersequent::new(vec![pc2.clone(), gc2.clone()]) {
        return None;
    }
    Some(RuleInstance {
        context: vec![],
        active: vec![pc.clone(), gc.clone()],
        premise_active: vec![vec![pc2, gc2]],
        principal: gc.right.clone(),
        split: None,
    })
}

/// Matches `rule` against a conclusion and premise conclusions.
pub fn match_rule(rule: HRule, concl: &Hypersequent, premises: &[&Hypersequent], opts: CheckOptions) -> Result<RuleInstance, String> {
    let found = match rule {
        HRule::Hyp => {
            if !opts.allow_hyp {
                return Err("placeholder premise not permitted".into());
            }
            premises.is_empty().then(|| RuleInstance {
                context: concl.components.clone(),
                active: vec![],
                premise_active: vec![],
                principal: None,
                split: None,
            })
        }
        HRule::Box => {
            if !opts.modal {
                return Err("box rule not permitted".into());
            }
            match_box(concl, premises)
        }
        HRule::Com => match_com(concl, premises),
        HRule::Cut => match_cut(concl, premises),
        HRule::Ec => match premises {
            [p] => diff(&p.components, &concl.components).and_then(|extra| {
                (!extra.is_empty() && is_sub(&extra, &concl.components)).then(|| RuleInstance {
                    context: diff(&concl.components, &extra).expect("sub"),
                    active: extra.clone(),
                    premise_active: vec![sum(&extra, &extra)],
                    principal: None,
                    split: None,
                })
            }),
            _ => None,
        },
        HRule::Ew => match premises {
            [p] => diff(&concl.components, &p.components).and_then(|extra| {
                (!extra.is_empty()).then(|| RuleInstance {
                    context: p.components.clone(),
                    active: extra,
                    premise_active: vec![vec![]],
                    principal: None,
                    split: None,
                })
            }),
            _ => None,
        },
        _ => {
            let mut found = None;
            'outer: for c in distinct(&concl.components) {
                let ctx = diff(&concl.components, std::slice::from_ref(&c)).expect("present");
                for (principal, pcs) in single_candidates(rule, &c) {
                    if pcs.len() != premises.len() {
                        continue;
                    }
                    let ok = pcs.iter().zip(premises).all(|(pc, p)| p.components == sum(&ctx, std::slice::from_ref(pc)));
                    if ok {
                        found = Some(RuleInstance {
                            context: ctx.clone(),
                            active: vec![c.clone()],
                            premise_active: pcs.into_iter().map(|pc| vec![pc]).collect(),
                            principal,
                            split: None,
                        });
                        break 'outer;
                    }
                }
            }
            found
        }
    };
    found.ok_or_else(|| format!("conclusion `{concl}` does not match the {rule} schema for the given premises"))
}

/// The rule instance at the root of `d`.
pub fn instance(d: &HDerivation, opts: CheckOptions) -> Result<RuleInstance, String> {
    let ps: Vec<&Hypersequent> = d.premises.iter().map(|p| &p.conclusion).collect();
    match_rule(d.rule, &d.conclusion, &ps, opts)
}

/// Checks every node; see [`check_derivation_with`].
pub fn check_derivation(d: &HDerivation, modal: bool) -> bool {
    check_derivation_with(d, CheckOptions { modal, allow_hyp: false }).is_ok()
}

pub fn check_derivation_with(d: &HDerivation, opts: CheckOptions) -> Result<(), CheckError> {
    let mut seen = HashSet::new();
    let mut path = Vec::new();
    check_rec(d, opts, &mut path, &mut seen)
}

fn check_rec(d: &HDerivation, opts: CheckOptions, path: &mut Vec<usize>, seen: &mut HashSet<*const HDerivation>) -> Result<(), CheckError> {
    instance(d, opts).map_err(|reason| CheckError { path: path.clone(), rule: d.rule, reason })?;
    for (i, p) in d.premises.iter().enumerate() {
        if !seen.insert(Arc::as_ptr(p)) {
            continue;
        }
        path.push(i);
        check_rec(p, opts, path, seen)?;
        path.pop();
    }
    Ok(())
}

pub(crate) fn expand(d: &HDerivation) -> Result<HDerivation, CheckError> {
    let mut memo = HashMap::new();
    let mut path = Vec::new();
    expand_rec(d, &mut path, &mut memo)
}

fn expand_rec(
    d: &HDerivation,
    path: &mut Vec<usize>,
    memo: &mut HashMap<*const HDerivation, Arc<HDerivation>>,
) -> Result<HDerivation, CheckError> {
    let mut premises = Vec::with_capacity(d.premises.len());
    for (i, p) in d.premises.iter().enumerate() {
        if let Some(e) = memo.get(&Arc::as_ptr(p)) {
            premises.push(e.clone());
            continue;
        }
        path.push(i);
        let e = Arc::new(expand_rec(p, path, memo)?);
        path.pop();
        memo.insert(Arc::as_ptr(p), e.clone());
        premises.push(e);
    }
    if !matches!(d.rule, HRule::NegL | HRule::NegR) {
        return Ok(HDerivation { rule: d.rule, conclusion: d.conclusion.clone(), premises });
    }
    let opts = CheckOptions { modal: true, allow_hyp: true };
    let inst = instance(d, opts).map_err(|reason| CheckError { path: path.clone(), rule: d.rule, reason })?;
    let c = &inst.active[0];
    let neg = inst.principal.clone().expect("negation is principal");
    let Formula::Imp(a, _) = &neg else { unreachable!("negation is an implication") };
    let ctx = |x: HSequent| Hypersequent::new(sum(&inst.context, &[x]));
    Ok(match d.rule {
        HRule::NegL => {
            let gamma = remove_n(&c.left, &neg, 1).expect("principal present");
            let bot = HDerivation::leaf(HRule::BotL, ctx(HSequent::new(sum(&gamma, &[Formula::Bot]), None)));
            HDerivation::new(HRule::ImpL, d.conclusion.clone(), vec![premises[0].clone(), Arc::new(bot)])
        }
        _ => {
            let with_a = sum(&c.left, &[(**a).clone()]);
            let wr = HDerivation::new(HRule::Wr, ctx(HSequent::new(with_a, Some(Formula::Bot))), vec![premises[0].clone()]);
            HDerivation::new(HRule::ImpR, d.conclusion.clone(), vec![Arc::new(wr)])
        }
    })
}
