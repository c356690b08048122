//! Constructive cut elimination by multicut reduction.
//!
//! `mcut(d1, marks, d2, mu, A)` removes `λ` occurrences of `A` from each marked component of `d1`'s
//! end hypersequent against every cut component `Π => A` in `mu` of `d2`'s end hypersequent.
//! The result ends in `(H2 - mu) + {c : λ = 0} + {c - A^λ + Π^λ : λ > 0, Π => A ∈ mu}`.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::check::{check_derivation_with, expand, instance, match_rule, CheckError, CheckOptions, RuleInstance};
use super::multiset::{add_times, count, diff, distinct, remove_n, sum};
use super::{HDerivation, HRule, HSequent, Hypersequent};
use crate::formula::Formula;

type D = Arc<HDerivation>;
type Marks = Vec<(HSequent, usize)>;

const STACK: usize = 1 << 30;
const OPTS: CheckOptions = CheckOptions { modal: true, allow_hyp: true };

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CutError {
    #[error("input derivation is not valid: {0}")]
    Check(#[from] CheckError),
    #[error("internal error: {0}")]
    Internal(String),
}

fn internal(msg: impl Into<String>) -> CutError {
    CutError::Internal(msg.into())
}

fn inst(d: &HDerivation) -> Result<RuleInstance, CutError> {
    instance(d, OPTS).map_err(internal)
}

fn node(rule: HRule, comps: Vec<HSequent>, premises: Vec<D>) -> Result<D, CutError> {
    let d = HDerivation::new(rule, Hypersequent::new(comps), premises);
    if cfg!(debug_assertions) {
        let ps: Vec<&Hypersequent> = d.premises.iter().map(|p| &p.conclusion).collect();
        match_rule(rule, &d.conclusion, &ps, OPTS).map_err(|e| internal(format!("built an invalid node: {e}")))?;
    }
    Ok(Arc::new(d))
}

/// Replaces one copy of `from` by `to` through a unary rule.
fn step(rule: HRule, d: D, from: &HSequent, to: HSequent) -> Result<D, CutError> {
    let rest = diff(&d.conclusion.components, std::slice::from_ref(from)).ok_or_else(|| internal(format!("component `{from}` missing")))?;
    node(rule, sum(&rest, &[to]), vec![d])
}

/// Weakens `from` on the left by each formula of `fs`; returns the derivation and the new component.
fn wl_all(mut d: D, from: &HSequent, fs: &[Formula]) -> Result<(D, HSequent), CutError> {
    let mut cur = from.clone();
    for f in fs {
        let next = HSequent::new(sum(&cur.left, std::slice::from_ref(f)), cur.right.clone());
        d = step(HRule::Wl, d, &cur, next.clone())?;
        cur = next;
    }
    Ok((d, cur))
}

/// Contracts one copy of each formula of `fs` in `from`.
fn cl_all(mut d: D, from: &HSequent, fs: &[Formula]) -> Result<(D, HSequent), CutError> {
    let mut cur = from.clone();
    for f in fs {
        let left = remove_n(&cur.left, f, 1).ok_or_else(|| internal("contraction on a missing formula"))?;
        let next = HSequent::new(left, cur.right.clone());
        d = step(HRule::Cl, d, &cur, next.clone())?;
        cur = next;
    }
    Ok((d, cur))
}

/// Brings the end hypersequent of `d` to exactly `t` with (ec) and (ew); needs support(d) ⊆ support(t).
fn adjust(d: &D, t: &[HSequent]) -> Result<D, CutError> {
    let mut cur = d.clone();
    loop {
        let c = &cur.conclusion.components;
        let mut extra = Vec::new();
        for y in distinct(c) {
            let (have, want) = (count(c, &y), count(t, &y));
            if want == 0 {
                return Err(internal(format!("component `{y}` cannot be adjusted away")));
            }
            if have > want {
                extra.extend(std::iter::repeat_n(y.clone(), (have - want).min(have / 2)));
            }
        }
        if extra.is_empty() {
            break;
        }
        let rest = diff(c, &extra).expect("extra is a sub-multiset");
        cur = node(HRule::Ec, rest, vec![cur])?;
    }
    let missing = diff(t, &cur.conclusion.components).ok_or_else(|| internal("adjust target too small"))?;
    if !missing.is_empty() {
        cur = node(HRule::Ew, t.to_vec(), vec![cur])?;
    }
    Ok(cur)
}

/// `c - A^λ + Π^λ => Δ_c` where `Π` is the antecedent of `j`.
fn image(c: &HSequent, lam: usize, j: &HSequent, a: &Formula) -> HSequent {
    if lam == 0 {
        return c.clone();
    }
    let left = remove_n(&c.left, a, lam).expect("marked occurrences present");
    HSequent::new(add_times(&left, &j.left, lam), c.right.clone())
}

fn target(marks: &Marks, d2: &Hypersequent, mu: &[HSequent], a: &Formula) -> Vec<HSequent> {
    let mut t = diff(&d2.components, mu).expect("cut components present");
    for (c, lam) in marks {
        if *lam == 0 {
            t.push(c.clone());
        } else {
            t.extend(mu.iter().map(|j| image(c, *lam, j, a)));
        }
    }
    t.sort();
    t
}

/// Marks covering `h` where each entry of `marked` claims one copy and the rest get `0`.
fn marks_for(h: &Hypersequent, marked: &[(HSequent, usize)]) -> Result<Marks, CutError> {
    let claimed: Vec<HSequent> = marked.iter().map(|(c, _)| c.clone()).collect();
    let rest = diff(&h.components, &claimed).ok_or_else(|| internal("marked component missing"))?;
    let mut m: Marks = marked.to_vec();
    m.extend(rest.into_iter().map(|c| (c, 0)));
    m.sort();
    Ok(m)
}

fn intersect(a: &[HSequent], b: &[HSequent]) -> Vec<HSequent> {
    let mut out = Vec::new();
    for y in distinct(a) {
        out.extend(std::iter::repeat_n(y.clone(), count(a, &y).min(count(b, &y))));
    }
    out
}

/// `a - (a ∩ b)` on formula multisets.
fn excess(a: &[Formula], b: &[Formula]) -> Vec<Formula> {
    let mut out = Vec::new();
    for y in distinct(a) {
        out.extend(std::iter::repeat_n(y.clone(), count(a, &y).saturating_sub(count(b, &y))));
    }
    out
}

/// Splits off the first mark entry whose component is `y`.
fn take_mark(marks: &Marks, y: &HSequent) -> Result<(usize, Marks), CutError> {
    let pos = marks.iter().position(|(c, _)| c == y).ok_or_else(|| internal("active component unmarked"))?;
    let mut rest = marks.clone();
    let (_, lam) = rest.remove(pos);
    Ok((lam, rest))
}

fn with_mark(marks: &Marks, y: HSequent, lam: usize) -> Marks {
    let mut m = marks.clone();
    m.push((y, lam));
    m.sort();
    m
}

type Key = (usize, Marks, usize, Vec<HSequent>, Formula);

#[derive(Default)]
struct Elim {
    memo: HashMap<Key, D>,
    walked: HashMap<*const HDerivation, D>,
    keep: Vec<D>,
}

impl Elim {
    fn mcut(&mut self, d1: &D, mut marks: Marks, d2: &D, mut mu: Vec<HSequent>, a: &Formula) -> Result<D, CutError> {
        marks.sort();
        mu.sort();
        let covered: Vec<HSequent> = marks.iter().map(|(c, _)| c.clone()).collect();
        if Hypersequent::new(covered).components != d1.conclusion.components {
            return Err(internal("marks do not cover the left end hypersequent"));
        }
        if marks.iter().any(|(c, lam)| c.count_left(a) < *lam) {
            return Err(internal("mark exceeds occurrences of the cut formula"));
        }
        let t = target(&marks, &d2.conclusion, &mu, a);
        if marks.iter().all(|(_, lam)| *lam == 0) {
            return adjust(d1, &t);
        }
        if mu.is_empty() {
            return adjust(d2, &t);
        }
        let key = (Arc::as_ptr(d1) as usize, marks.clone(), Arc::as_ptr(d2) as usize, mu.clone(), a.clone());
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        let r = self.right(d1, &marks, d2, &mu, a, &t)?;
        if r.conclusion.components != t {
            return Err(internal(format!("multicut produced `{}`, expected `{}`", r.conclusion, Hypersequent::new(t))));
        }
        self.keep.push(d1.clone());
        self.keep.push(d2.clone());
        self.memo.insert(key, r.clone());
        Ok(r)
    }

    /// Reduces on the derivation of the cut components.
    fn right(&mut self, d1: &D, marks: &Marks, d2: &D, mu: &[HSequent], a: &Formula, t: &[HSequent]) -> Result<D, CutError> {
        if matches!(d2.rule, HRule::Cut | HRule::Hyp | HRule::NegL | HRule::NegR) {
            return Err(internal(format!("unexpected {} node", d2.rule)));
        }
        let i2 = inst(d2)?;
        let c2 = &d2.conclusion.components;
        match d2.rule {
            HRule::Ew => {
                let p = &d2.premises[0];
                let mu2 = intersect(&p.conclusion.components, mu);
                let r = self.mcut(d1, marks.clone(), p, mu2, a)?;
                return adjust(&r, t);
            }
            HRule::Ec => {
                let p = &d2.premises[0];
                let pc = &p.conclusion.components;
                let mut mu2 = Vec::new();
                for y in distinct(mu) {
                    let n = count(pc, &y).min(count(mu, &y) + count(pc, &y) - count(c2, &y));
                    mu2.extend(std::iter::repeat_n(y.clone(), n));
                }
                let r = self.mcut(d1, marks.clone(), p, mu2, a)?;
                return adjust(&r, t);
            }
            _ => {}
        }
        let mut forced = Vec::new();
        for y in distinct(&i2.active) {
            let n = count(mu, &y).saturating_sub(count(&i2.context, &y)).min(count(&i2.active, &y));
            forced.extend(std::iter::repeat_n(y, n));
        }
        if forced.is_empty() {
            let mut prems = Vec::with_capacity(d2.premises.len());
            for p in &d2.premises {
                prems.push(self.mcut(d1, marks.clone(), p, mu.to_vec(), a)?);
            }
            return node(d2.rule, t.to_vec(), prems);
        }
        let x = forced[0].clone();
        let minus_x = remove_n(mu, &x, 1).expect("forced is a cut component");
        match d2.rule {
            HRule::Id => adjust(d1, t),
            HRule::BotL => node(HRule::BotL, t.to_vec(), vec![]),
            HRule::TopR if mu.len() > 1 => {
                let h = sum(&diff(c2, mu).expect("sub"), std::slice::from_ref(&x));
                let iso = node(HRule::TopR, h, vec![])?;
                let r = self.mcut(d1, marks.clone(), &iso, vec![x], a)?;
                adjust(&r, t)
            }
            HRule::Wr => {
                let r = self.mcut(d1, marks.clone(), &d2.premises[0], minus_x, a)?;
                let (c, lam) = marks.iter().find(|(_, l)| *l > 0).expect("some mark is positive");
                let from = HSequent::new(x.left.clone(), None);
                let mut fs = remove_n(&c.left, a, *lam).expect("marked");
                fs.extend((1..*lam).flat_map(|_| x.left.iter().cloned()));
                let (mut r, cur) = wl_all(r, &from, &fs)?;
                if let Some(rt) = &c.right {
                    r = step(HRule::Wr, r, &cur, HSequent::new(cur.left.clone(), Some(rt.clone())))?;
                }
                adjust(&r, t)
            }
            HRule::Wl | HRule::Cl | HRule::AndL1 | HRule::AndL2 => {
                let xp = i2.premise_active[0][0].clone();
                let mu2 = sum(&minus_x, std::slice::from_ref(&xp));
                let mut r = self.mcut(d1, marks.clone(), &d2.premises[0], mu2, a)?;
                let removed = excess(&xp.left, &x.left);
                let added = excess(&x.left, &xp.left);
                for (c, lam) in marks.iter().filter(|(_, l)| *l > 0) {
                    let mut cur = image(c, *lam, &xp, a);
                    for _ in 0..*lam {
                        let left = sum(&diff(&cur.left, &removed).expect("present"), &added);
                        let next = HSequent::new(left, cur.right.clone());
                        r = step(d2.rule, r, &cur, next.clone())?;
                        cur = next;
                    }
                }
                adjust(&r, t)
            }
            HRule::OrL | HRule::ImpL | HRule::Com => self.right_branching(d1, marks, d2, &i2, mu, &forced, a, t),
            HRule::ImpR | HRule::AndR | HRule::OrR1 | HRule::OrR2 if mu.len() > 1 => {
                let mut prems = Vec::with_capacity(d2.premises.len());
                for p in &d2.premises {
                    prems.push(self.mcut(d1, marks.clone(), p, minus_x.clone(), a)?);
                }
                let pa = &i2.premise_active[0][0];
                let h = diff(&prems[0].conclusion.components, std::slice::from_ref(pa)).ok_or_else(|| internal("isolation"))?;
                let iso = node(d2.rule, sum(&h, std::slice::from_ref(&x)), prems)?;
                let r = self.mcut(d1, marks.clone(), &iso, vec![x], a)?;
                adjust(&r, t)
            }
            HRule::TopR | HRule::ImpR | HRule::AndR | HRule::OrR1 | HRule::OrR2 | HRule::Box => self.left(d1, marks, d2, &i2, &x, a, t),
            _ => Err(internal(format!("no reduction for forced {}", d2.rule))),
        }
    }

    /// Forced (or-l), (imp-l) and (com) on the right: first reduce to a single mark with `λ = 1`.
    #[allow(clippy::too_many_arguments)]
    fn right_branching(
        &mut self,
        d1: &D,
        marks: &Marks,
        d2: &D,
        i2: &RuleInstance,
        mu: &[HSequent],
        forced: &[HSequent],
        a: &Formula,
        t: &[HSequent],
    ) -> Result<D, CutError> {
        let marked: Vec<usize> = (0..marks.len()).filter(|&i| marks[i].1 > 0).collect();
        if marked.len() > 1 {
            let first = marked[0];
            let marks1: Marks = marks.iter().enumerate().map(|(i, (c, l))| (c.clone(), if i == first { *l } else { 0 })).collect();
            let r1 = self.mcut(d1, marks1, d2, mu.to_vec(), a)?;
            let remaining: Vec<(HSequent, usize)> = marked[1..].iter().map(|&i| marks[i].clone()).collect();
            let marks2 = marks_for(&r1.conclusion, &remaining)?;
            let r2 = self.mcut(&r1, marks2, d2, mu.to_vec(), a)?;
            return adjust(&r2, t);
        }
        let (c, lam) = marks[marked[0]].clone();
        if lam > 1 {
            let drop = vec![a.clone(); lam - 1];
            let (d1c, c1) = cl_all(d1.clone(), &c, &drop)?;
            let mut m = marks.clone();
            m.remove(marked[0]);
            let m = with_mark(&m, c1.clone(), 1);
            let mut r = self.mcut(&d1c, m, d2, mu.to_vec(), a)?;
            for j in mu {
                let extra: Vec<Formula> = (1..lam).flat_map(|_| j.left.iter().cloned()).collect();
                r = wl_all(r, &image(&c1, 1, j, a), &extra)?.0;
            }
            return adjust(&r, t);
        }
        let gamma_e = remove_n(&c.left, a, 1).expect("marked");
        match d2.rule {
            HRule::OrL => {
                let x = &forced[0];
                let base = remove_n(mu, x, 1).expect("forced");
                let mut prems = Vec::new();
                for (k, p) in d2.premises.iter().enumerate() {
                    let xk = &i2.premise_active[k][0];
                    prems.push(self.mcut(d1, marks.clone(), p, sum(&base, std::slice::from_ref(xk)), a)?);
                }
                node(HRule::OrL, t.to_vec(), prems)
            }
            HRule::ImpL => {
                let x = &forced[0];
                let base = remove_n(mu, x, 1).expect("forced");
                let (pa0, pa1) = (&i2.premise_active[0][0], &i2.premise_active[1][0]);
                let r1 = self.mcut(d1, marks.clone(), &d2.premises[0], base.clone(), a)?;
                let (r1, _) = wl_all(r1, pa0, &gamma_e)?;
                let r2 = self.mcut(d1, marks.clone(), &d2.premises[1], sum(&base, std::slice::from_ref(pa1)), a)?;
                node(HRule::ImpL, t.to_vec(), vec![r1, r2])
            }
            _ => {
                let (c1, c2) = (&i2.active[0], &i2.active[1]);
                let cut1 = forced.contains(c1);
                let rest = if cut1 { remove_n(forced, c1, 1).expect("present") } else { forced.to_vec() };
                let cut2 = rest.contains(c2);
                let base = diff(mu, forced).expect("forced ⊆ mu");
                let mut prems = Vec::new();
                for (k, cut) in [(0, cut1), (1, cut2)] {
                    let qk = &i2.premise_active[k][0];
                    let muk = if cut { sum(&base, std::slice::from_ref(qk)) } else { base.clone() };
                    prems.push(self.mcut(d1, marks.clone(), &d2.premises[k], muk, a)?);
                }
                node(HRule::Com, t.to_vec(), prems)
            }
        }
    }

    /// The cut formula is principal on the right in the single cut component `x`; reduces on `d1`.
    #[allow(clippy::too_many_arguments)]
    fn left(&mut self, d1: &D, marks: &Marks, d2: &D, i2: &RuleInstance, x: &HSequent, a: &Formula, t: &[HSequent]) -> Result<D, CutError> {
        let mu = vec![x.clone()];
        if matches!(d1.rule, HRule::Cut | HRule::Hyp | HRule::NegL | HRule::NegR) {
            return Err(internal(format!("unexpected {} node", d1.rule)));
        }
        let i1 = inst(d1)?;
        match d1.rule {
            HRule::Id => {
                let y = &i1.active[0];
                if marks.iter().any(|(c, l)| c == y && *l > 0) {
                    adjust(d2, t)
                } else {
                    node(HRule::Id, t.to_vec(), vec![])
                }
            }
            HRule::BotL | HRule::TopR => node(d1.rule, t.to_vec(), vec![]),
            HRule::Ew => {
                let mut m = marks.clone();
                for e in &i1.active {
                    m = take_mark(&m, e)?.1;
                }
                let r = self.mcut(&d1.premises[0], m, d2, mu, a)?;
                adjust(&r, t)
            }
            HRule::Ec => {
                let mut m = marks.clone();
                for e in &i1.active {
                    let lam = marks.iter().find(|(c, _)| c == e).map(|(_, l)| *l).ok_or_else(|| internal("ec mark"))?;
                    m.push((e.clone(), lam));
                }
                let r = self.mcut(&d1.premises[0], m, d2, mu, a)?;
                adjust(&r, t)
            }
            HRule::Com => {
                let split = i1.split.clone().expect("com split");
                let (y1, y2) = (&i1.active[0], &i1.active[1]);
                let (l1, m) = take_mark(marks, y1)?;
                let (l2, m) = take_mark(&m, y2)?;
                let a1 = l1.min(count(&split.g1, a));
                let b1 = l2.min(count(&split.p1, a));
                let lams = [a1 + b1, (l1 - a1) + (l2 - b1)];
                let mut prems = Vec::new();
                for (k, &lam) in lams.iter().enumerate() {
                    let q = i1.premise_active[k][0].clone();
                    prems.push(self.mcut(&d1.premises[k], with_mark(&m, q, lam), d2, mu.clone(), a)?);
                }
                node(HRule::Com, t.to_vec(), prems)
            }
            HRule::Box => {
                if d2.rule != HRule::Box {
                    return Err(internal("boxed cut formula not introduced by the box rule"));
                }
                let Formula::Box(b) = a else { return Err(internal("box cut on a non-box formula")) };
                let (ya, yb) = if i1.active[0].right.is_none() { (&i1.active[0], &i1.active[1]) } else { (&i1.active[1], &i1.active[0]) };
                let (la, m) = take_mark(marks, ya)?;
                let (lb, _) = take_mark(&m, yb)?;
                let pa = &i1.premise_active[0];
                let (sa, sb) = if pa[0].right.is_none() { (&pa[0], &pa[1]) } else { (&pa[1], &pa[0]) };
                let qa = &i2.premise_active[0];
                let (s2, x2) = if qa[0].right.is_none() { (&qa[0], &qa[1]) } else { (&qa[1], &qa[0]) };
                let r = self.mcut(&d1.premises[0], vec![(sa.clone(), la), (sb.clone(), lb)], &d2.premises[0], vec![x2.clone()], b)?;
                let sigma1 = image(sa, la, x2, b).left;
                let gamma1 = image(sb, lb, x2, b);
                let Some(c) = &gamma1.right else { return Err(internal("box succedent")) };
                let out = box_n(r, &[s2.left.clone(), sigma1], &gamma1.left, c);
                adjust(&out, t)
            }
            HRule::Wl
            | HRule::Wr
            | HRule::Cl
            | HRule::ImpL
            | HRule::ImpR
            | HRule::AndL1
            | HRule::AndL2
            | HRule::AndR
            | HRule::OrL
            | HRule::OrR1
            | HRule::OrR2 => {
                let y = &i1.active[0];
                let (lam, m) = take_mark(marks, y)?;
                let is_left = matches!(d1.rule, HRule::Wl | HRule::Cl | HRule::ImpL | HRule::AndL1 | HRule::AndL2 | HRule::OrL);
                let principal = lam > 0 && is_left && i1.principal.as_ref() == Some(a) && lam == y.count_left(a);
                if !principal {
                    let mut prems = Vec::new();
                    for (k, p) in d1.premises.iter().enumerate() {
                        let q = i1.premise_active[k][0].clone();
                        prems.push(self.mcut(p, with_mark(&m, q, lam), d2, mu.clone(), a)?);
                    }
                    return node(d1.rule, t.to_vec(), prems);
                }
                self.principal(d1, &i1, &m, lam, d2, i2, x, a, t)
            }
            _ => Err(internal(format!("no reduction for {} on the left", d1.rule))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn principal(
        &mut self,
        d1: &D,
        i1: &RuleInstance,
        m: &Marks,
        lam: usize,
        d2: &D,
        i2: &RuleInstance,
        x: &HSequent,
        a: &Formula,
        t: &[HSequent],
    ) -> Result<D, CutError> {
        let mu = vec![x.clone()];
        let pi = &x.left;
        match d1.rule {
            HRule::Wl | HRule::Cl => {
                let yp = i1.premise_active[0][0].clone();
                let lp = if d1.rule == HRule::Wl { lam - 1 } else { lam + 1 };
                let r = self.mcut(&d1.premises[0], with_mark(m, yp.clone(), lp), d2, mu, a)?;
                let from = image(&yp, lp, x, a);
                let r = if d1.rule == HRule::Wl { wl_all(r, &from, pi)?.0 } else { cl_all(r, &from, pi)?.0 };
                adjust(&r, t)
            }
            HRule::AndL1 | HRule::AndL2 | HRule::OrL => {
                let (k1, k2, part) = match (d1.rule, d2.rule, a) {
                    (HRule::AndL1, HRule::AndR, Formula::And(b, _)) => (0, 0, b),
                    (HRule::AndL2, HRule::AndR, Formula::And(_, c)) => (0, 1, c),
                    (HRule::OrL, HRule::OrR1, Formula::Or(b, _)) => (0, 0, b),
                    (HRule::OrL, HRule::OrR2, Formula::Or(_, c)) => (1, 0, c),
                    _ => return Err(internal("mismatched principal rules")),
                };
                let yp = i1.premise_active[k1][0].clone();
                let r = self.mcut(&d1.premises[k1], with_mark(m, yp.clone(), lam - 1), d2, mu, a)?;
                let w = image(&yp, lam - 1, x, a);
                let xp = i2.premise_active[k2][0].clone();
                let marks_r = marks_for(&r.conclusion, &[(w, 1)])?;
                let f = self.mcut(&r, marks_r, &d2.premises[k2], vec![xp], part)?;
                adjust(&f, t)
            }
            HRule::ImpL => {
                let (Formula::Imp(b, c), HRule::ImpR) = (a, d2.rule) else {
                    return Err(internal("mismatched principal rules"));
                };
                let (pa0, pa1) = (i1.premise_active[0][0].clone(), i1.premise_active[1][0].clone());
                let r1 = self.mcut(&d1.premises[0], with_mark(m, pa0.clone(), lam - 1), d2, mu.clone(), a)?;
                let r2 = self.mcut(&d1.premises[1], with_mark(m, pa1.clone(), lam - 1), d2, mu, a)?;
                let w1 = image(&pa0, lam - 1, x, a);
                let w2 = image(&pa1, lam - 1, x, a);
                let pb = i2.premise_active[0][0].clone();
                let p = &d2.premises[0];
                let s = self.mcut(p, marks_for(&p.conclusion, &[(pb.clone(), 1)])?, &r1, vec![w1.clone()], b)?;
                let z = image(&pb, 1, &w1, b);
                let f = self.mcut(&r2, marks_for(&r2.conclusion, &[(w2.clone(), 1)])?, &s, vec![z.clone()], c)?;
                let doubled = image(&w2, 1, &z, c);
                let (f, _) = cl_all(f, &doubled, &w1.left)?;
                adjust(&f, t)
            }
            _ => Err(internal(format!("no principal reduction for {}", d1.rule))),
        }
    }

    fn walk(&mut self, d: &D) -> Result<D, CutError> {
        if let Some(r) = self.walked.get(&Arc::as_ptr(d)) {
            return Ok(r.clone());
        }
        let mut prems = Vec::with_capacity(d.premises.len());
        for p in &d.premises {
            prems.push(self.walk(p)?);
        }
        let r = if d.rule == HRule::Cut {
            let i = inst(d)?;
            let a = i.principal.clone().expect("cut formula");
            let (major, minor) = (i.premise_active[0][0].clone(), i.premise_active[1][0].clone());
            let marks = marks_for(&prems[0].conclusion, &[(major, 1)])?;
            let r = self.mcut(&prems[0], marks, &prems[1], vec![minor], &a)?;
            adjust(&r, &d.conclusion.components)?
        } else if prems.iter().zip(&d.premises).all(|(a, b)| Arc::ptr_eq(a, b)) {
            d.clone()
        } else {
            Arc::new(HDerivation::new(d.rule, d.conclusion.clone(), prems))
        };
        self.keep.push(d.clone());
        self.walked.insert(Arc::as_ptr(d), r.clone());
        Ok(r)
    }
}

/// A cut-free derivation with the same end hypersequent; `neg-l`/`neg-r` are expanded first.
pub fn eliminate_cuts(d: &HDerivation) -> Result<HDerivation, CutError> {
    check_derivation_with(d, CheckOptions { modal: true, allow_hyp: false })?;
    let d = Arc::new(expand(d)?);
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK)
            .spawn_scoped(s, || Elim::default().walk(&d).map(|r| (*r).clone()))
            .expect("spawn cut elimination thread")
            .join()
            .unwrap_or_else(|p| std::panic::resume_unwind(p))
    })
}

/// From `premise` ending in `Π1 => | ... | Πn => | Γ => A`, derives `[]Π1 => | ... | []Πn => | []Γ => []A`.
pub(crate) fn box_n(premise: D, pis: &[Vec<Formula>], gamma: &[Formula], a: &Formula) -> D {
    box_n_inner(premise, pis, gamma, a).expect("box_n on a matching premise")
}

fn boxed(fs: &[Formula]) -> Vec<Formula> {
    fs.iter().cloned().map(Formula::boxed).collect()
}

fn box_n_inner(premise: D, pis: &[Vec<Formula>], gamma: &[Formula], a: &Formula) -> Result<D, CutError> {
    let main = HSequent::new(boxed(gamma), Some(Formula::boxed(a.clone())));
    match pis.len() {
        0 => {
            let empty = HSequent::new(vec![], None);
            let body = HSequent::new(gamma.to_vec(), Some(a.clone()));
            let d = node(HRule::Ew, vec![empty.clone(), body], vec![premise])?;
            let d = node(HRule::Box, vec![empty.clone(), main.clone()], vec![d])?;
            let (d, cur) = wl_all(d, &empty, &main.left)?;
            let d = step(HRule::Wr, d, &cur, main.clone())?;
            node(HRule::Ec, vec![main], vec![d])
        }
        1 => node(HRule::Box, vec![HSequent::new(boxed(&pis[0]), None), main], vec![premise]),
        n => {
            let all: Vec<Formula> = pis.iter().fold(Vec::new(), |acc, p| sum(&acc, p));
            let full = HSequent::new(all.clone(), None);
            let mut d = premise;
            for p in pis {
                let extra = diff(&all, p).expect("part of the union");
                d = wl_all(d, &HSequent::new(p.clone(), None), &extra)?.0;
            }
            for _ in 1..n {
                let rest = remove_n(&d.conclusion.components, &full, 1).expect("copies present");
                d = node(HRule::Ec, rest, vec![d])?;
            }
            let mut d = node(HRule::Box, vec![HSequent::new(boxed(&all), None), main], vec![d])?;
            let mut tail: Vec<Formula> = all;
            for p in &pis[..n - 1] {
                let rest = diff(&tail, p).expect("part of the union");
                let (bp, br) = (boxed(p), boxed(&rest));
                let joined = HSequent::new(boxed(&tail), None);
                let h = remove_n(&d.conclusion.components, &joined, 1).expect("present");
                let dp = HSequent::new(sum(&bp, &bp), None);
                let dr = HSequent::new(sum(&br, &br), None);
                let c = node(HRule::Com, sum(&h, &[dp.clone(), dr.clone()]), vec![d.clone(), d])?;
                let (c, _) = cl_all(c, &dp, &bp)?;
                let (c, _) = cl_all(c, &dr, &br)?;
                d = c;
                tail = rest;
            }
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::hypersequent::{check_derivation, derive_box_n, parse_hypersequent};

    fn h(s: &str) -> Hypersequent {
        parse_hypersequent(s).unwrap()
    }

    fn n(rule: HRule, c: &str, ps: Vec<HDerivation>) -> HDerivation {
        HDerivation::new(rule, h(c), ps.into_iter().map(Arc::new).collect())
    }

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn assert_eliminates(d: &HDerivation) -> HDerivation {
        assert!(check_derivation(d, true));
        let e = eliminate_cuts(d).unwrap();
        assert!(e.is_cut_free());
        assert_eq!(e.conclusion, d.conclusion);
        assert!(check_derivation(&e, true));
        e
    }

    #[test]
    fn box_n_shapes() {
        for pis in [vec![], vec![vec![f("p")]], vec![vec![f("p")], vec![f("q"), f("r")]], vec![vec![], vec![f("p")], vec![f("q")]]] {
            let d = derive_box_n(&pis, &[f("s")], &f("t"));
            let want = Hypersequent::new(
                pis.iter().map(|p| HSequent::new(boxed(p), None)).chain([HSequent::new(vec![f("[]s")], Some(f("[]t")))]).collect(),
            );
            assert_eq!(d.conclusion, want);
            assert!(check_derivation_with(&d, CheckOptions { modal: true, allow_hyp: true }).is_ok());
        }
    }

    #[test]
    fn identity_cut() {
        let d = n(HRule::Cut, "p => p", vec![n(HRule::Id, "p => p", vec![]), n(HRule::Id, "p => p", vec![])]);
        let e = assert_eliminates(&d);
        assert_eq!(e.rule, HRule::Id);
    }

    #[test]
    fn implication_cut() {
        let left = n(
            HRule::ImpL,
            "q, q -> r => r",
            vec![n(HRule::Id, "q => q", vec![]), n(HRule::Wl, "q, r => r", vec![n(HRule::Id, "r => r", vec![])])],
        );
        let right = n(HRule::ImpR, "r => q -> r", vec![n(HRule::Wl, "r, q => r", vec![n(HRule::Id, "r => r", vec![])])]);
        assert_eliminates(&n(HRule::Cut, "q, r => r", vec![left, right]));
    }

    #[test]
    fn box_cut() {
        let q1 = n(HRule::Ew, "=> | p, q => q", vec![n(HRule::Wl, "p, q => q", vec![n(HRule::Id, "q => q", vec![])])]);
        let d1 = n(HRule::Ew, "=> | []s => | []p, []q => []q", vec![n(HRule::Box, "=> | []p, []q => []q", vec![q1])]);
        let q2 = n(HRule::Ew, "s => | p => p", vec![n(HRule::Id, "p => p", vec![])]);
        let d2 = n(HRule::Ew, "=> | []s => | []p => []p", vec![n(HRule::Box, "[]s => | []p => []p", vec![q2])]);
        let e = assert_eliminates(&n(HRule::Cut, "=> | []s => | []p, []q => []q", vec![d1, d2]));
        assert!(e.count_rule(HRule::Box) >= 1);
    }

    #[test]
    fn communication_under_cut() {
        let com = n(HRule::Com, "p => q | q => p", vec![n(HRule::Id, "q => q", vec![]), n(HRule::Id, "p => p", vec![])]);
        let major = n(HRule::Ew, "q => p | q => q", vec![n(HRule::Id, "q => q", vec![])]);
        assert_eliminates(&n(HRule::Cut, "q => p | p => q", vec![major, com]));
    }

    #[test]
    fn contracted_cut_formula() {
        let major = n(
            HRule::Cl,
            "p & q => p",
            vec![n(HRule::Wl, "p & q, p & q => p", vec![n(HRule::AndL1, "p & q => p", vec![n(HRule::Id, "p => p", vec![])])])],
        );
        let minor = n(
            HRule::AndR,
            "p, q => p & q",
            vec![
                n(HRule::Wl, "p, q => p", vec![n(HRule::Id, "p => p", vec![])]),
                n(HRule::Wl, "p, q => q", vec![n(HRule::Id, "q => q", vec![])]),
            ],
        );
        assert_eliminates(&n(HRule::Cut, "p, q => p", vec![major, minor]));
    }

    #[test]
    fn cut_free_is_fixed() {
        let d = n(HRule::ImpR, "=> p -> p", vec![n(HRule::Id, "p => p", vec![])]);
        assert_eq!(eliminate_cuts(&d).unwrap(), d);
        let bad = n(HRule::Cut, "p => q", vec![]);
        assert!(matches!(eliminate_cuts(&bad), Err(CutError::Check(_))));
    }
}
