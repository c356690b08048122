//! Seeded forward construction of random derivations containing cuts.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::check::{match_rule, CheckOptions};
use super::multiset::{count, diff, distinct, remove_n, sum};
use super::{HDerivation, HRule, HSequent, Hypersequent};
use crate::formula::Formula;

type D = Arc<HDerivation>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    /// Forward construction steps.
    pub rounds: usize,
    pub max_components: usize,
    pub max_antecedent: usize,
    pub max_formula_size: usize,
    /// Bound on tree size of any pooled derivation.
    pub max_nodes: usize,
    /// Allow the box rule and boxed atoms.
    pub modal: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { rounds: 60, max_components: 3, max_antecedent: 4, max_formula_size: 7, max_nodes: 60, modal: true }
    }
}

fn mk(rule: HRule, comps: Vec<HSequent>, premises: Vec<D>) -> Option<D> {
    let d = HDerivation::new(rule, Hypersequent::new(comps), premises);
    let ps: Vec<&Hypersequent> = d.premises.iter().map(|p| &p.conclusion).collect();
    match_rule(rule, &d.conclusion, &ps, CheckOptions { modal: true, allow_hyp: false }).ok()?;
    Some(Arc::new(d))
}

fn replace(d: &D, from: &HSequent, to: HSequent) -> Vec<HSequent> {
    sum(&diff(&d.conclusion.components, std::slice::from_ref(from)).expect("present"), &[to])
}

fn merge<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = a.to_vec();
    for y in distinct(b) {
        let extra = count(b, &y).saturating_sub(count(a, &y));
        out.extend(std::iter::repeat_n(y, extra));
    }
    out.sort();
    out
}

/// Weakens `c` on the left up to `left`, which must contain `c.left`.
fn widen_left(mut d: D, c: &HSequent, left: &[Formula]) -> Option<(D, HSequent)> {
    let mut cur = c.clone();
    for f in diff(left, &c.left)? {
        let next = HSequent::new(sum(&cur.left, &[f]), cur.right.clone());
        d = mk(HRule::Wl, replace(&d, &cur, next.clone()), vec![d])?;
        cur = next;
    }
    Some((d, cur))
}

/// Adds components by (ew) so that the side context of `keep` becomes `ctx`.
fn widen_ctx(d: D, keep: &HSequent, ctx: &[HSequent]) -> Option<D> {
    let side = diff(&d.conclusion.components, std::slice::from_ref(keep))?;
    if diff(ctx, &side)?.is_empty() {
        return Some(d);
    }
    mk(HRule::Ew, sum(ctx, std::slice::from_ref(keep)), vec![d])
}

/// Both aligned derivations with their chosen components, the shared side context and the antecedent union.
type Aligned = (D, HSequent, D, HSequent, Vec<HSequent>, Vec<Formula>);

struct Gen<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    p: &'a GenParams,
    pool: Vec<D>,
}

impl<R: Rng + ?Sized> Gen<'_, R> {
    fn atom(&mut self) -> Formula {
        let v = Formula::var(["p", "q", "r"][self.rng.gen_range(0..3)]);
        if self.p.modal && self.rng.gen_bool(0.3) {
            Formula::boxed(v)
        } else {
            v
        }
    }

    fn small(&mut self) -> Formula {
        match self.rng.gen_range(0..6) {
            0..=2 => self.atom(),
            3 => Formula::imp(self.atom(), self.atom()),
            4 => Formula::and(self.atom(), self.atom()),
            _ => Formula::or(self.atom(), self.atom()),
        }
    }

    fn pick(&mut self) -> D {
        self.pool.choose(self.rng).expect("pool is seeded").clone()
    }

    fn pick_comp(&mut self, d: &D) -> HSequent {
        d.conclusion.components.choose(self.rng).expect("nonempty").clone()
    }

    fn fits(&self, d: &D) -> bool {
        let h = &d.conclusion;
        h.len() <= self.p.max_components
            && h.components.iter().all(|c| c.left.len() <= self.p.max_antecedent)
            && h.formulas().all(|f| f.size() <= self.p.max_formula_size)
            && d.size() <= self.p.max_nodes
    }

    fn axiom(&mut self) -> Option<D> {
        match self.rng.gen_range(0..4) {
            0 | 1 => {
                let f = self.small();
                mk(HRule::Id, vec![HSequent::new(vec![f.clone()], Some(f))], vec![])
            }
            2 => {
                let left = if self.rng.gen_bool(0.5) { vec![self.atom()] } else { vec![] };
                mk(HRule::TopR, vec![HSequent::new(left, Some(Formula::Top))], vec![])
            }
            _ => {
                let right = if self.rng.gen_bool(0.5) { Some(self.atom()) } else { None };
                mk(HRule::BotL, vec![HSequent::new(vec![Formula::Bot], right)], vec![])
            }
        }
    }

    fn unary(&mut self) -> Option<D> {
        let d = self.pick();
        let c = self.pick_comp(&d);
        let left = distinct(&c.left);
        match self.rng.gen_range(0..9) {
            0 => {
                let f = if !left.is_empty() && self.rng.gen_bool(0.3) { left.choose(self.rng)?.clone() } else { self.small() };
                mk(HRule::Wl, replace(&d, &c, HSequent::new(sum(&c.left, &[f]), c.right.clone())), vec![d])
            }
            1 => {
                if c.right.is_some() {
                    return None;
                }
                let f = self.small();
                mk(HRule::Wr, replace(&d, &c, HSequent::new(c.left.clone(), Some(f))), vec![d])
            }
            2 => {
                let extra = HSequent::new(vec![self.atom()], if self.rng.gen_bool(0.5) { Some(self.atom()) } else { None });
                mk(HRule::Ew, sum(&d.conclusion.components, &[extra]), vec![d])
            }
            3 => {
                let comps = &d.conclusion.components;
                let dup = distinct(comps).into_iter().find(|y| count(comps, y) > 1)?;
                mk(HRule::Ec, remove_n(comps, &dup, 1)?, vec![d.clone()])
            }
            4 => {
                let f = left.into_iter().find(|f| c.count_left(f) > 1)?;
                mk(HRule::Cl, replace(&d, &c, HSequent::new(remove_n(&c.left, &f, 1)?, c.right.clone())), vec![d])
            }
            5 => {
                let r = c.right.clone()?;
                let f = left.choose(self.rng)?.clone();
                let to = HSequent::new(remove_n(&c.left, &f, 1)?, Some(Formula::imp(f, r)));
                mk(HRule::ImpR, replace(&d, &c, to), vec![d])
            }
            6 => {
                let f = left.choose(self.rng)?.clone();
                let g = self.atom();
                let (rule, h) = if self.rng.gen_bool(0.5) {
                    (HRule::AndL1, Formula::and(f.clone(), g))
                } else {
                    (HRule::AndL2, Formula::and(g, f.clone()))
                };
                let to = HSequent::new(sum(&remove_n(&c.left, &f, 1)?, &[h]), c.right.clone());
                mk(rule, replace(&d, &c, to), vec![d])
            }
            7 => {
                let r = c.right.clone()?;
                let g = self.atom();
                let (rule, h) = if self.rng.gen_bool(0.5) { (HRule::OrR1, Formula::or(r, g)) } else { (HRule::OrR2, Formula::or(g, r)) };
                mk(rule, replace(&d, &c, HSequent::new(c.left.clone(), Some(h))), vec![d])
            }
            _ => self.boxed(d),
        }
    }

    fn boxed(&mut self, d: D) -> Option<D> {
        if !self.p.modal {
            return None;
        }
        let d = if d.conclusion.len() == 1 {
            let c = d.conclusion.components[0].clone();
            c.right.as_ref()?;
            let extra = HSequent::new(if self.rng.gen_bool(0.5) { vec![self.atom()] } else { vec![] }, None);
            mk(HRule::Ew, vec![c, extra], vec![d])?
        } else {
            d
        };
        let comps = &d.conclusion.components;
        if comps.len() != 2 {
            return None;
        }
        let (pc, gc) = if comps[0].right.is_none() { (&comps[0], &comps[1]) } else { (&comps[1], &comps[0]) };
        let a = gc.right.clone()?;
        let bx = |fs: &[Formula]| fs.iter().cloned().map(Formula::boxed).collect::<Vec<_>>();
        let concl = vec![HSequent::new(bx(&pc.left), None), HSequent::new(bx(&gc.left), Some(Formula::boxed(a)))];
        mk(HRule::Box, concl, vec![d.clone()])
    }

    /// Aligns two chosen components: antecedent cores are weakened to their union and side contexts by (ew).
    fn align(&mut self, da: D, ca: &HSequent, core_a: &[Formula], db: D, cb: &HSequent, core_b: &[Formula]) -> Option<Aligned> {
        let u = merge(core_a, core_b);
        let full_a = sum(&u, &diff(&ca.left, core_a)?);
        let full_b = sum(&u, &diff(&cb.left, core_b)?);
        let (da, ca) = widen_left(da, ca, &full_a)?;
        let (db, cb) = widen_left(db, cb, &full_b)?;
        let ga = diff(&da.conclusion.components, std::slice::from_ref(&ca))?;
        let gb = diff(&db.conclusion.components, std::slice::from_ref(&cb))?;
        let g = merge(&ga, &gb);
        let da = widen_ctx(da, &ca, &g)?;
        let db = widen_ctx(db, &cb, &g)?;
        Some((da, ca, db, cb, g, u))
    }

    fn binary(&mut self) -> Option<D> {
        let (da, db) = (self.pick(), self.pick());
        let (ca, cb) = (self.pick_comp(&da), self.pick_comp(&db));
        match self.rng.gen_range(0..4) {
            0 => {
                let f = ca.right.clone()?;
                let g = distinct(&cb.left).choose(self.rng)?.clone();
                let core_b = remove_n(&cb.left, &g, 1)?;
                let (da, _, db, cb, ctx, u) = self.align(da, &ca, &ca.left.clone(), db, &cb, &core_b)?;
                let c = HSequent::new(sum(&u, &[Formula::imp(f, g)]), cb.right.clone());
                mk(HRule::ImpL, sum(&ctx, &[c]), vec![da, db])
            }
            1 => {
                let (f, g) = (ca.right.clone()?, cb.right.clone()?);
                let (da, _, db, _, ctx, u) = self.align(da, &ca, &ca.left.clone(), db, &cb, &cb.left.clone())?;
                mk(HRule::AndR, sum(&ctx, &[HSequent::new(u, Some(Formula::and(f, g)))]), vec![da, db])
            }
            2 => {
                if ca.right != cb.right {
                    return None;
                }
                let f = distinct(&ca.left).choose(self.rng)?.clone();
                let g = distinct(&cb.left).choose(self.rng)?.clone();
                let (core_a, core_b) = (remove_n(&ca.left, &f, 1)?, remove_n(&cb.left, &g, 1)?);
                let (da, _, db, _, ctx, u) = self.align(da, &ca, &core_a, db, &cb, &core_b)?;
                let c = HSequent::new(sum(&u, &[Formula::or(f, g)]), ca.right.clone());
                mk(HRule::OrL, sum(&ctx, &[c]), vec![da, db])
            }
            _ => {
                let (da, ca, db, cb, ctx, _) = self.align(da, &ca, &ca.left.clone(), db, &cb, &cb.left.clone())?;
                let (mut g1, mut p1) = (Vec::new(), Vec::new());
                for f in &ca.left {
                    if self.rng.gen_bool(0.5) {
                        g1.push(f.clone())
                    } else {
                        p1.push(f.clone())
                    }
                }
                let (mut g2, mut p2) = (Vec::new(), Vec::new());
                for f in &cb.left {
                    if self.rng.gen_bool(0.5) {
                        g2.push(f.clone())
                    } else {
                        p2.push(f.clone())
                    }
                }
                let c1 = HSequent::new(sum(&g1, &g2), ca.right.clone());
                let c2 = HSequent::new(sum(&p1, &p2), cb.right.clone());
                mk(HRule::Com, sum(&ctx, &[c1, c2]), vec![da, db])
            }
        }
    }

    fn cut(&mut self) -> Option<D> {
        let (mut d1, d2) = (self.pick(), self.pick());
        let minor = d2.conclusion.components.iter().filter(|c| c.right.is_some()).cloned().collect::<Vec<_>>();
        let minor = minor.choose(self.rng)?.clone();
        let a = minor.right.clone().expect("filtered");
        let holders: Vec<HSequent> = d1.conclusion.components.iter().filter(|c| c.left.contains(&a)).cloned().collect();
        let major = match holders.choose(self.rng) {
            Some(c) => c.clone(),
            None => {
                let c = self.pick_comp(&d1);
                let (d, c) = widen_left(d1, &c, &sum(&c.left, std::slice::from_ref(&a)))?;
                d1 = d;
                c
            }
        };
        let core = remove_n(&major.left, &a, 1)?;
        let g1 = diff(&d1.conclusion.components, std::slice::from_ref(&major))?;
        let g2 = diff(&d2.conclusion.components, std::slice::from_ref(&minor))?;
        let g = merge(&g1, &g2);
        let d1 = widen_ctx(d1, &major, &g)?;
        let d2 = widen_ctx(d2, &minor, &g)?;
        let c = HSequent::new(sum(&core, &minor.left), major.right.clone());
        mk(HRule::Cut, sum(&g, &[c]), vec![d1, d2])
    }

    fn round(&mut self) {
        let made = match self.rng.gen_range(0..10) {
            0 => self.axiom(),
            1..=4 => self.unary(),
            5..=7 => self.binary(),
            _ => self.cut(),
        };
        if let Some(d) = made {
            if self.fits(&d) {
                self.pool.push(d);
            }
        }
    }
}

/// A checker-valid derivation with at least one cut, built forward from axioms.
pub fn random_derivation<R: Rng + ?Sized>(rng: &mut R, params: &GenParams) -> HDerivation {
    let mut g = Gen { rng, p: params, pool: Vec::new() };
    while g.pool.len() < 4 {
        if let Some(d) = g.axiom() {
            g.pool.push(d);
        }
    }
    for _ in 0..params.rounds {
        g.round();
    }
    for _ in 0..1000 {
        if g.pool.iter().any(|d| !d.is_cut_free()) {
            break;
        }
        if let Some(d) = g.cut() {
            if g.fits(&d) {
                g.pool.push(d);
            }
        }
    }
    let best = g.pool.iter().filter(|d| !d.is_cut_free()).max_by_key(|d| (d.count_rule(HRule::Cut), d.size())).cloned();
    match best {
        Some(d) => (*d).clone(),
        None => {
            let p = Formula::var("p");
            let id = Arc::new(HDerivation::leaf(HRule::Id, Hypersequent::new(vec![HSequent::new(vec![p.clone()], Some(p))])));
            HDerivation::new(HRule::Cut, id.conclusion.clone(), vec![id.clone(), id])
        }
    }
}
