//! Validity of atomic sequents of relations and structural saturation.
//!
//! An atomic sequent is valid exactly when its relations contain a chain
//! `a_1 ◁ a_2 ◁ ... ◁ a_{n+1}` of one of five kinds (see [`ChainCondition`]).
//! Both the certificate search and the refuting assignment treat relation sides
//! as opaque nodes, so they also apply to quasi-atomic sequents whose modal
//! sides behave as fresh variables.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::rational::Rational;
use crate::relations::{abstract_modals, RelKind, Relation, RelationsError, SequentOfRelations};

/// Values of truth constants. `top` and `bot` are built in; named constants are variables listed here.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstantTable {
    entries: BTreeMap<Arc<str>, Rational>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtomicError {
    #[error("constant `{0}` has value {1} outside [0,1]")]
    OutOfRange(String, Rational),
    #[error("relation `{0}` is not atomic")]
    NotAtomic(Relation),
    #[error(transparent)]
    Relations(#[from] RelationsError),
}

impl ConstantTable {
    /// Only `top` and `bot`.
    pub fn standard() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: Rational) -> Result<Self, AtomicError> {
        if !value.in_unit() {
            return Err(AtomicError::OutOfRange(name.to_string(), value));
        }
        self.entries.insert(Arc::from(name), value);
        Ok(self)
    }

    pub fn value(&self, f: &Formula) -> Option<Rational> {
        match f {
            Formula::Top => Some(Rational::one()),
            Formula::Bot => Some(Rational::zero()),
            Formula::Var(v) => self.entries.get(v).copied(),
            _ => None,
        }
    }
}

/// The five shapes of a validating chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainCondition {
    /// Starts and ends at the same atom and contains a `<=`.
    Cycle,
    /// Starts at `bot` and contains a `<=`.
    FromBottom,
    /// Ends at `top` and contains a `<=`.
    ToTop,
    /// Runs from constant `c` to constant `d` with `r_c < r_d`.
    ConstLess,
    /// Runs from constant `c` to constant `d` with `r_c = r_d` and contains a `<=`.
    ConstEqual,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainCertificate {
    pub chain: Vec<Relation>,
    pub condition: ChainCondition,
}

fn classify(start: &Formula, end: &Formula, has_le: bool, consts: &ConstantTable) -> Option<ChainCondition> {
    if start == end && has_le {
        return Some(ChainCondition::Cycle);
    }
    if *start == Formula::Bot && has_le {
        return Some(ChainCondition::FromBottom);
    }
    if *end == Formula::Top && has_le {
        return Some(ChainCondition::ToTop);
    }
    if let (Some(rc), Some(rd)) = (consts.value(start), consts.value(end)) {
        if rc < rd {
            return Some(ChainCondition::ConstLess);
        }
        if rc == rd && has_le {
            return Some(ChainCondition::ConstEqual);
        }
    }
    None
}

/// Searches for a validating chain, treating every side as an opaque node.
pub fn find_chain(s: &SequentOfRelations, consts: &ConstantTable) -> Option<ChainCertificate> {
    let nodes: Vec<Formula> = s.sides().into_iter().collect();
    let index: HashMap<&Formula, usize> = nodes.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let rels: Vec<&Relation> = s.iter().collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (k, r) in rels.iter().enumerate() {
        adj[index[&r.lhs]].push(k);
    }
    for start in 0..nodes.len() {
        let mut parent: Vec<[Option<(usize, bool, usize)>; 2]> = vec![[None; 2]; nodes.len()];
        let mut seen = vec![[false; 2]; nodes.len()];
        seen[start][0] = true;
        let mut queue = VecDeque::from([(start, false)]);
        while let Some((v, h)) = queue.pop_front() {
            for &k in &adj[v] {
                let r = rels[k];
                let w = index[&r.rhs];
                let h2 = h || r.kind == RelKind::Le;
                if seen[w][h2 as usize] {
                    continue;
                }
                seen[w][h2 as usize] = true;
                parent[w][h2 as usize] = Some((v, h, k));
                if let Some(condition) = classify(&nodes[start], &nodes[w], h2, consts) {
                    let mut chain = Vec::new();
                    let (mut cur, mut ch) = (w, h2);
                    while let Some((pv, ph, pk)) = parent[cur][ch as usize] {
                        chain.push(rels[pk].clone());
                        if pv == start && !ph {
                            break;
                        }
                        cur = pv;
                        ch = ph;
                    }
                    chain.reverse();
                    return Some(ChainCertificate { chain, condition });
                }
                queue.push_back((w, h2));
            }
        }
    }
    None
}

/// Decides an atomic sequent; a certificate is returned exactly when it is valid.
pub fn atomic_valid(s: &SequentOfRelations, consts: &ConstantTable) -> Result<Option<ChainCertificate>, AtomicError> {
    if let Some(r) = s.iter().find(|r| !(r.lhs.is_atom() && r.rhs.is_atom())) {
        return Err(AtomicError::NotAtomic(r.clone()));
    }
    Ok(find_chain(s, consts))
}

/// Checks a certificate against a sequent (sides treated as opaque nodes).
pub fn verify_certificate(s: &SequentOfRelations, consts: &ConstantTable, cert: &ChainCertificate) -> bool {
    let (Some(first), Some(last)) = (cert.chain.first(), cert.chain.last()) else {
        return false;
    };
    if !cert.chain.iter().all(|r| s.contains(r)) {
        return false;
    }
    if !cert.chain.windows(2).all(|w| w[0].rhs == w[1].lhs) {
        return false;
    }
    let has_le = cert.chain.iter().any(|r| r.kind == RelKind::Le);
    let (a, b) = (&first.lhs, &last.rhs);
    match cert.condition {
        ChainCondition::Cycle => a == b && has_le,
        ChainCondition::FromBottom => *a == Formula::Bot && has_le,
        ChainCondition::ToTop => *b == Formula::Top && has_le,
        ChainCondition::ConstLess => matches!((consts.value(a), consts.value(b)), (Some(x), Some(y)) if x < y),
        ChainCondition::ConstEqual => has_le && matches!((consts.value(a), consts.value(b)), (Some(x), Some(y)) if x == y),
    }
}

/// A valuation of the sides of `s` (constants at their fixed values) making every relation false,
/// or `None` when `s` is valid.
pub fn refute(s: &SequentOfRelations, consts: &ConstantTable) -> Option<BTreeMap<Formula, Rational>> {
    let mut nodes: BTreeSet<Formula> = s.sides();
    nodes.insert(Formula::Top);
    nodes.insert(Formula::Bot);
    let nodes: Vec<Formula> = nodes.into_iter().collect();
    let index: HashMap<&Formula, usize> = nodes.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let top = index[&Formula::Top];
    let bot = index[&Formula::Bot];
    // Edge (u, w, strict) demands v(u) > v(w) when strict and v(u) >= v(w) otherwise.
    let mut edges: Vec<Vec<(usize, bool)>> = vec![Vec::new(); nodes.len()];
    for r in s.iter() {
        edges[index[&r.lhs]].push((index[&r.rhs], r.kind == RelKind::Le));
    }
    let mut constants: Vec<(Rational, usize)> = Vec::new();
    for (i, f) in nodes.iter().enumerate() {
        match consts.value(f) {
            Some(v) => constants.push((v, i)),
            None => {
                edges[top].push((i, false));
                edges[i].push((bot, false));
            }
        }
    }
    constants.sort();
    for w in constants.windows(2) {
        let ((lo, a), (hi, b)) = (w[0], w[1]);
        if lo == hi {
            edges[a].push((b, false));
            edges[b].push((a, false));
        } else {
            edges[b].push((a, true));
        }
    }
    let comp = tarjan(&edges);
    for (u, out) in edges.iter().enumerate() {
        if out.iter().any(|&(w, strict)| strict && comp[u] == comp[w]) {
            return None;
        }
    }
    // Components are numbered sinks first, so ranks can be filled in order.
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (u, &c) in comp.iter().enumerate() {
        members[c].push(u);
    }
    let mut rank = vec![0usize; ncomp];
    for c in 0..ncomp {
        let mut best = 0;
        for &u in &members[c] {
            for &(w, strict) in &edges[u] {
                if comp[w] != c {
                    best = best.max(rank[comp[w]] + strict as usize);
                }
            }
        }
        rank[c] = best;
    }
    let mut anchors: Vec<(usize, Rational)> = constants.iter().map(|&(v, i)| (rank[comp[i]], v)).collect();
    anchors.dedup();
    let level = |r: usize| -> Rational {
        let hi = anchors.iter().position(|&(ar, _)| ar >= r).unwrap_or(anchors.len() - 1);
        let (rb, vb) = anchors[hi];
        if rb == r || hi == 0 {
            return vb;
        }
        let (ra, va) = anchors[hi - 1];
        va + (vb - va) * Rational::frac(r - ra, rb - ra)
    };
    let valuation: BTreeMap<Formula, Rational> = nodes.iter().enumerate().map(|(i, f)| (f.clone(), level(rank[comp[i]]))).collect();
    debug_assert!(s.iter().all(|r| {
        let (a, b) = (valuation[&r.lhs], valuation[&r.rhs]);
        match r.kind {
            RelKind::Le => a > b,
            RelKind::Lt => a >= b,
        }
    }));
    Some(valuation)
}

/// Strongly connected components, numbered in reverse topological order (sinks first).
fn tarjan(edges: &[Vec<(usize, bool)>]) -> Vec<usize> {
    struct State<'a> {
        edges: &'a [Vec<(usize, bool)>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        comp: Vec<usize>,
        next_index: usize,
        next_comp: usize,
    }
    fn visit(st: &mut State<'_>, v: usize) {
        st.index[v] = Some(st.next_index);
        st.low[v] = st.next_index;
        st.next_index += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for k in 0..st.edges[v].len() {
            let w = st.edges[v][k].0;
            match st.index[w] {
                None => {
                    visit(st, w);
                    st.low[v] = st.low[v].min(st.low[w]);
                }
                Some(iw) if st.on_stack[w] => st.low[v] = st.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(st.low[v]) == st.index[v] {
            while let Some(w) = st.stack.pop() {
                st.on_stack[w] = false;
                st.comp[w] = st.next_comp;
                if w == v {
                    break;
                }
            }
            st.next_comp += 1;
        }
    }
    let n = edges.len();
    let mut st = State {
        edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        comp: vec![0; n],
        next_index: 0,
        next_comp: 0,
    };
    for v in 0..n {
        if st.index[v].is_none() {
            visit(&mut st, v);
        }
    }
    st.comp
}

/// Propositional validity of a quasi-atomic sequent: modal sides are replaced by fresh variables.
pub fn prop_valid(s: &SequentOfRelations) -> Result<bool, AtomicError> {
    let abs = abstract_modals(s)?;
    Ok(atomic_valid(&abs.sequent, &ConstantTable::standard())?.is_some())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructuralRule {
    Cs,
    Wl,
    Wr,
    Com,
}

/// One backward application of a structural rule; `relations` are the rule's active relations
/// (none for `cs`, one for `wl`/`wr`, the ordered pair for `com`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SatInstance {
    pub rule: StructuralRule,
    pub relations: Vec<Relation>,
}

fn cs_relations() -> [Relation; 2] {
    [Relation::le(Formula::Top, Formula::Bot), Relation::lt(Formula::Bot, Formula::Bot)]
}

/// The relations each premise adds to the conclusion, or `None` if the instance is malformed
/// or its active relations are not in `s`.
fn instance_additions(s: &SequentOfRelations, inst: &SatInstance) -> Option<Vec<Vec<Relation>>> {
    if !inst.relations.iter().all(|r| s.contains(r)) {
        return None;
    }
    match (inst.rule, inst.relations.as_slice()) {
        (StructuralRule::Cs, []) => Some(vec![cs_relations().to_vec()]),
        (StructuralRule::Wl, [r]) if r.kind == RelKind::Le => Some(vec![vec![Relation::le(Formula::Top, r.rhs.clone())]]),
        (StructuralRule::Wr, [r]) if r.kind == RelKind::Le => Some(vec![vec![Relation::le(r.lhs.clone(), Formula::Bot)]]),
        (StructuralRule::Com, [r1, r2]) if r1 != r2 => {
            Some(vec![vec![Relation::le(r1.lhs.clone(), r2.rhs.clone())], vec![Relation::new(r2.lhs.clone(), r1.kind, r1.rhs.clone())]])
        }
        _ => None,
    }
}

/// Premises of a saturation instance, provided it is well formed, its active relations occur in `s`,
/// and every premise adds a relation.
pub fn saturation_premises(s: &SequentOfRelations, inst: &SatInstance) -> Option<Vec<SequentOfRelations>> {
    let adds = instance_additions(s, inst)?;
    if adds.iter().any(|a| a.iter().all(|r| s.contains(r))) {
        return None;
    }
    Some(adds.into_iter().map(|a| s.with(a)).collect())
}

/// The first applicable instance in the fixed order: `cs`, then `wl` and `wr` per relation, then `com`
/// over ordered pairs in sorted order.
pub fn next_saturation_instance(s: &SequentOfRelations) -> Option<SatInstance> {
    if !cs_relations().iter().all(|r| s.contains(r)) {
        return Some(SatInstance { rule: StructuralRule::Cs, relations: vec![] });
    }
    for r in s.iter().filter(|r| r.kind == RelKind::Le) {
        if !s.contains(&Relation::le(Formula::Top, r.rhs.clone())) {
            return Some(SatInstance { rule: StructuralRule::Wl, relations: vec![r.clone()] });
        }
        if !s.contains(&Relation::le(r.lhs.clone(), Formula::Bot)) {
            return Some(SatInstance { rule: StructuralRule::Wr, relations: vec![r.clone()] });
        }
    }
    for r1 in s.iter() {
        for r2 in s.iter() {
            if r1 == r2 {
                continue;
            }
            let a = Relation::le(r1.lhs.clone(), r2.rhs.clone());
            if s.contains(&a) {
                continue;
            }
            let b = Relation::new(r2.lhs.clone(), r1.kind, r1.rhs.clone());
            if !s.contains(&b) {
                return Some(SatInstance { rule: StructuralRule::Com, relations: vec![r1.clone(), r2.clone()] });
            }
        }
    }
    None
}

pub fn is_saturated(s: &SequentOfRelations) -> bool {
    next_saturation_instance(s).is_none()
}

/// All saturated sequents reached by exhaustive backward application of the structural rules.
pub fn saturate(s: &SequentOfRelations) -> BTreeSet<SequentOfRelations> {
    let mut out = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut stack = vec![s.clone()];
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        match next_saturation_instance(&cur) {
            None => {
                out.insert(cur);
            }
            Some(inst) => {
                let premises = saturation_premises(&cur, &inst).expect("applicable instance");
                stack.extend(premises.into_iter().rev());
            }
        }
    }
    out
}
