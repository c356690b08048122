//! Decision procedures for G and the Goedel modal logics over sequents of relations.
//!
//! Search is depth-first: invertible logical rules first, then (for modal logics) the modal leaf test,
//! then one structural saturation step at a time. Every valid sequent yields a replayable trace.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::atomic::{
    find_chain, next_saturation_instance, refute, saturation_premises, verify_certificate, ChainCertificate, ConstantTable, SatInstance,
};
use crate::formula::{Formula, Logic};
use crate::rational::Rational;
use crate::relations::{abstract_modals, modal_part, ModalPart, RelKind, Relation, RelationsError, SequentOfRelations};

/// The eight logical rules; each removes its principal relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogicalRule {
    /// `A&B ◁ C`
    AndLeft,
    /// `C ◁ A&B`
    AndRight,
    /// `A|B ◁ C`
    OrLeft,
    /// `C ◁ A|B`
    OrRight,
    /// `A->B < C`
    ImpLeftLt,
    /// `C < A->B`
    ImpRightLt,
    /// `A->B <= C`
    ImpLeftLe,
    /// `C <= A->B`
    ImpRightLe,
}

impl LogicalRule {
    pub fn name(self) -> &'static str {
        match self {
            LogicalRule::AndLeft => "and-left",
            LogicalRule::AndRight => "and-right",
            LogicalRule::OrLeft => "or-left",
            LogicalRule::OrRight => "or-right",
            LogicalRule::ImpLeftLt => "imp-left-lt",
            LogicalRule::ImpRightLt => "imp-right-lt",
            LogicalRule::ImpLeftLe => "imp-left-le",
            LogicalRule::ImpRightLe => "imp-right-le",
        }
    }
}

fn is_compound(f: &Formula) -> bool {
    matches!(f, Formula::And(..) | Formula::Or(..) | Formula::Imp(..))
}

/// The rule that applies to `r` (left side takes precedence) together with the added relations of each premise.
fn rule_for(r: &Relation) -> Option<(LogicalRule, Vec<Vec<Relation>>)> {
    let k = r.kind;
    let rel = |a: &Formula, kind: RelKind, b: &Formula| Relation::new(a.clone(), kind, b.clone());
    let c = &r.rhs;
    let out = match &r.lhs {
        Formula::And(a, b) => (LogicalRule::AndLeft, vec![vec![rel(a, k, c), rel(b, k, c)]]),
        Formula::Or(a, b) => (LogicalRule::OrLeft, vec![vec![rel(a, k, c)], vec![rel(b, k, c)]]),
        Formula::Imp(a, b) if k == RelKind::Lt => {
            (LogicalRule::ImpLeftLt, vec![vec![rel(b, RelKind::Lt, a)], vec![rel(b, RelKind::Lt, c)]])
        }
        Formula::Imp(a, b) => {
            (LogicalRule::ImpLeftLe, vec![vec![rel(&Formula::Top, RelKind::Le, c), rel(b, RelKind::Lt, a)], vec![rel(b, RelKind::Le, c)]])
        }
        _ => {
            let c = &r.lhs;
            match &r.rhs {
                Formula::And(a, b) => (LogicalRule::AndRight, vec![vec![rel(c, k, a)], vec![rel(c, k, b)]]),
                Formula::Or(a, b) => (LogicalRule::OrRight, vec![vec![rel(c, k, a), rel(c, k, b)]]),
                Formula::Imp(a, b) if k == RelKind::Lt => (
                    LogicalRule::ImpRightLt,
                    vec![vec![rel(a, RelKind::Le, b), rel(c, RelKind::Lt, b)], vec![rel(c, RelKind::Lt, &Formula::Top)]],
                ),
                Formula::Imp(a, b) => (LogicalRule::ImpRightLe, vec![vec![rel(a, RelKind::Le, b), rel(c, RelKind::Le, b)]]),
                _ => return None,
            }
        }
    };
    Some(out)
}

/// Premises of applying `rule` to `principal`, if `principal` is in `s` and has the matching shape.
pub fn logical_premises(s: &SequentOfRelations, rule: LogicalRule, principal: &Relation) -> Option<Vec<SequentOfRelations>> {
    if !s.contains(principal) {
        return None;
    }
    let (found, adds) = rule_for(principal)?;
    if found != rule {
        return None;
    }
    let mut rest = s.clone();
    rest.remove(principal);
    Some(adds.into_iter().map(|a| rest.with(a)).collect())
}

/// The first relation (in sorted order) with a compound non-modal side, its rule and premises.
pub fn decompose_step(s: &SequentOfRelations) -> Option<(LogicalRule, Relation, Vec<SequentOfRelations>)> {
    let r = s.iter().find(|r| is_compound(&r.lhs) || is_compound(&r.rhs))?.clone();
    let (rule, _) = rule_for(&r)?;
    let premises = logical_premises(s, rule, &r)?;
    Some((rule, r, premises))
}

/// Exhaustive backward application of the logical rules; `s` is valid iff every result is.
pub fn decompose(s: &SequentOfRelations) -> BTreeSet<SequentOfRelations> {
    let mut out = BTreeSet::new();
    let mut stack = vec![s.clone()];
    while let Some(cur) = stack.pop() {
        match decompose_step(&cur) {
            Some((_, _, premises)) => stack.extend(premises),
            None => {
                out.insert(cur);
            }
        }
    }
    out
}

/// How the index set `J` of a modal leaf test is found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JSearch {
    /// Start from all indices and drop failing ones until stable.
    #[default]
    Gfp,
    /// Try every nonempty subset.
    Exhaustive,
}

/// Premise for target `k` of the box leaf test with index set `j`.
pub fn box_premise(m: &ModalPart, j: &[usize], k: usize) -> SequentOfRelations {
    let bk = &m.box_box[k].1;
    let mut s: SequentOfRelations = j.iter().map(|&i| Relation::le(m.box_box[i].0.clone(), bk.clone())).collect();
    for c in &m.box_bot {
        s.insert(Relation::le(c.clone(), Formula::Bot));
    }
    s
}

/// Premise for principal `jj` of the diamond leaf test with index set `j`.
pub fn dia_premise(m: &ModalPart, logic: Logic, j: &[usize], jj: usize) -> SequentOfRelations {
    let aj = &m.dia_dia[jj].0;
    let mut s: SequentOfRelations = j.iter().map(|&k| Relation::le(aj.clone(), m.dia_dia[k].1.clone())).collect();
    for c in &m.dia_low {
        s.insert(Relation::lt(Formula::Bot, c.clone()));
    }
    if logic == Logic::GKDia {
        for d in &m.dia_high {
            s.insert(Relation::le(Formula::Top, d.clone()));
        }
    }
    s
}

/// Searches for a nonempty `J ⊆ 0..n` such that `premise(J, k)` is valid for all `k ∈ J`.
pub fn search_j<E>(
    n: usize,
    mode: JSearch,
    premise: &dyn Fn(&[usize], usize) -> SequentOfRelations,
    recurse: &mut dyn FnMut(&SequentOfRelations) -> Result<bool, E>,
) -> Result<Option<Vec<usize>>, E> {
    match mode {
        JSearch::Gfp => {
            let mut j: Vec<usize> = (0..n).collect();
            'outer: while !j.is_empty() {
                for pos in 0..j.len() {
                    if !recurse(&premise(&j, j[pos]))? {
                        j.remove(pos);
                        continue 'outer;
                    }
                }
                return Ok(Some(j));
            }
            Ok(None)
        }
        JSearch::Exhaustive => {
            for mask in 1u64..(1u64 << n) {
                let j: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let mut all = true;
                for &k in &j {
                    if !recurse(&premise(&j, k))? {
                        all = false;
                        break;
                    }
                }
                if all {
                    return Ok(Some(j));
                }
            }
            Ok(None)
        }
    }
}

/// The box leaf test: some `J` whose every premise is valid according to `recurse`.
pub fn leaf_valid_box<E>(
    m: &ModalPart,
    mode: JSearch,
    recurse: &mut dyn FnMut(&SequentOfRelations) -> Result<bool, E>,
) -> Result<Option<Vec<usize>>, E> {
    search_j(m.box_box.len(), mode, &|j, k| box_premise(m, j, k), recurse)
}

/// The diamond leaf test for `GKDia` or `GKFDia`.
pub fn leaf_valid_dia<E>(
    m: &ModalPart,
    logic: Logic,
    mode: JSearch,
    recurse: &mut dyn FnMut(&SequentOfRelations) -> Result<bool, E>,
) -> Result<Option<Vec<usize>>, E> {
    search_j(m.dia_dia.len(), mode, &|j, k| dia_premise(m, logic, j, k), recurse)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Step {
    Decompose {
        rule: LogicalRule,
        principal: Relation,
    },
    Saturation {
        instance: SatInstance,
    },
    PropLeaf {
        certificate: ChainCertificate,
    },
    /// One child per target `k ∈ j`, in order.
    ModalBox {
        j: Vec<usize>,
    },
    /// One child per principal `j_i ∈ j`, in order.
    ModalDia {
        j: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceNode {
    pub step: Step,
    pub children: Vec<Arc<TraceNode>>,
}

/// A proof trace; equal subproofs are shared and serialized once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTrace {
    pub root: Arc<TraceNode>,
}

#[derive(Serialize, Deserialize)]
struct TraceEntry {
    step: Step,
    children: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TraceTable {
    root: usize,
    nodes: Vec<TraceEntry>,
}

impl ProofTrace {
    /// Distinct nodes in post-order (children before parents).
    pub fn nodes(&self) -> Vec<Arc<TraceNode>> {
        fn walk(n: &Arc<TraceNode>, seen: &mut HashSet<*const TraceNode>, out: &mut Vec<Arc<TraceNode>>) {
            if !seen.insert(Arc::as_ptr(n)) {
                return;
            }
            for c in &n.children {
                walk(c, seen, out);
            }
            out.push(n.clone());
        }
        let mut out = Vec::new();
        walk(&self.root, &mut HashSet::new(), &mut out);
        out
    }

    /// Rebuilds the trace with the node at position `index` of [`ProofTrace::nodes`] replaced.
    pub fn replace_node(&self, index: usize, f: impl FnOnce(&TraceNode) -> TraceNode) -> ProofTrace {
        let nodes = self.nodes();
        let target = Arc::as_ptr(&nodes[index]);
        let mut f = Some(f);
        let mut rebuilt: HashMap<*const TraceNode, Arc<TraceNode>> = HashMap::new();
        for n in &nodes {
            let ptr = Arc::as_ptr(n);
            let children = n.children.iter().map(|c| rebuilt[&Arc::as_ptr(c)].clone()).collect();
            let mut node = TraceNode { step: n.step.clone(), children };
            if ptr == target {
                node = (f.take().expect("single target"))(&node);
            }
            rebuilt.insert(ptr, Arc::new(node));
        }
        ProofTrace { root: rebuilt[&Arc::as_ptr(&self.root)].clone() }
    }

    fn to_table(&self) -> TraceTable {
        let nodes = self.nodes();
        let index: HashMap<*const TraceNode, usize> = nodes.iter().enumerate().map(|(i, n)| (Arc::as_ptr(n), i)).collect();
        TraceTable {
            root: nodes.len() - 1,
            nodes: nodes
                .iter()
                .map(|n| TraceEntry { step: n.step.clone(), children: n.children.iter().map(|c| index[&Arc::as_ptr(c)]).collect() })
                .collect(),
        }
    }
}

impl Serialize for ProofTrace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_table().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProofTrace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let table = TraceTable::deserialize(d)?;
        let mut built: Vec<Arc<TraceNode>> = Vec::with_capacity(table.nodes.len());
        for (i, e) in table.nodes.into_iter().enumerate() {
            let mut children = Vec::with_capacity(e.children.len());
            for c in e.children {
                if c >= i {
                    return Err(D::Error::custom(format!("node {i} refers forward to node {c}")));
                }
                children.push(built[c].clone());
            }
            built.push(Arc::new(TraceNode { step: e.step, children }));
        }
        let root = built.get(table.root).cloned().ok_or_else(|| D::Error::custom("root index out of range"))?;
        Ok(ProofTrace { root })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Valid,
    Invalid,
}

/// A failing leaf and a valuation of its sides (modal sides read as fresh variables) falsifying every relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub leaf: SequentOfRelations,
    pub assignment: BTreeMap<String, Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<ProofTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.outcome == Outcome::Valid
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit {
    Nodes,
    Depth,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProverError {
    #[error("formula `{formula}` is outside the fragment of {logic}")]
    Fragment { logic: Logic, formula: Formula },
    #[error("resource limit exceeded: {0:?}")]
    LimitExceeded(Limit),
    #[error(transparent)]
    Relations(#[from] RelationsError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProverConfig {
    /// Upper bound on sequents expanded over the prover's lifetime.
    pub max_nodes: usize,
    /// Upper bound on the depth of the search stack.
    pub max_depth: usize,
    pub search: JSearch,
    /// Also run the other search mode on every leaf test and count disagreements.
    pub verify_search: bool,
    /// Leaf tests with more indices than this skip the verification run.
    pub verify_limit: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig { max_nodes: 2_000_000, max_depth: 20_000, search: JSearch::Gfp, verify_search: false, verify_limit: 12 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub leaf_tests: u64,
    pub verified_leaf_tests: u64,
    pub disagreements: u64,
    pub verification_skipped: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, o: &SearchStats) {
        self.nodes += o.nodes;
        self.leaf_tests += o.leaf_tests;
        self.verified_leaf_tests += o.verified_leaf_tests;
        self.disagreements += o.disagreements;
        self.verification_skipped += o.verification_skipped;
    }
}

#[derive(Clone, Debug)]
enum NodeResult {
    Valid(Arc<TraceNode>),
    Invalid(Arc<Diagnostic>),
}

/// A successful modal step and its premise proofs.
type ModalProof = (Step, Vec<Arc<TraceNode>>);

const STACK_BYTES: usize = 1 << 30;

/// A prover for one logic; memo tables persist across calls on the same instance.
pub struct Prover {
    logic: Logic,
    config: ProverConfig,
    memo: HashMap<SequentOfRelations, NodeResult>,
    modal_memo: HashMap<ModalPart, Option<ModalProof>>,
    stats: SearchStats,
}

impl Prover {
    pub fn new(logic: Logic, config: ProverConfig) -> Self {
        Prover { logic, config, memo: HashMap::new(), modal_memo: HashMap::new(), stats: SearchStats::default() }
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn decide(&mut self, s: &SequentOfRelations) -> Result<Verdict, ProverError> {
        for r in s.iter() {
            for f in [&r.lhs, &r.rhs] {
                if !self.logic.admits(f) {
                    return Err(ProverError::Fragment { logic: self.logic, formula: f.clone() });
                }
            }
        }
        let result = std::thread::scope(|scope| {
            std::thread::Builder::new()
                .stack_size(STACK_BYTES)
                .spawn_scoped(scope, || self.prove(s, 0))
                .expect("spawn prover thread")
                .join()
                .expect("prover thread panicked")
        });
        if result.is_err() {
            // Partial memo entries are sound, but a failed run should not pin memory.
            self.memo.clear();
            self.modal_memo.clear();
        }
        Ok(match result? {
            NodeResult::Valid(t) => Verdict { outcome: Outcome::Valid, trace: Some(ProofTrace { root: t }), diagnostic: None },
            NodeResult::Invalid(d) => Verdict { outcome: Outcome::Invalid, trace: None, diagnostic: Some((*d).clone()) },
        })
    }

    fn prove(&mut self, s: &SequentOfRelations, depth: usize) -> Result<NodeResult, ProverError> {
        if let Some(r) = self.memo.get(s) {
            return Ok(r.clone());
        }
        if depth > self.config.max_depth {
            return Err(ProverError::LimitExceeded(Limit::Depth));
        }
        self.stats.nodes += 1;
        if self.stats.nodes > self.config.max_nodes as u64 {
            return Err(ProverError::LimitExceeded(Limit::Nodes));
        }
        let r = self.prove_uncached(s, depth)?;
        self.memo.insert(s.clone(), r.clone());
        Ok(r)
    }

    fn prove_all(&mut self, step: Step, premises: Vec<SequentOfRelations>, depth: usize) -> Result<NodeResult, ProverError> {
        let mut children = Vec::with_capacity(premises.len());
        for p in &premises {
            match self.prove(p, depth + 1)? {
                NodeResult::Valid(t) => children.push(t),
                inv @ NodeResult::Invalid(_) => return Ok(inv),
            }
        }
        Ok(NodeResult::Valid(Arc::new(TraceNode { step, children })))
    }

    fn prove_uncached(&mut self, s: &SequentOfRelations, depth: usize) -> Result<NodeResult, ProverError> {
        if let Some(certificate) = find_chain(s, &ConstantTable::standard()) {
            return Ok(NodeResult::Valid(Arc::new(TraceNode { step: Step::PropLeaf { certificate }, children: vec![] })));
        }
        if let Some((rule, principal, premises)) = decompose_step(s) {
            return self.prove_all(Step::Decompose { rule, principal }, premises, depth);
        }
        if self.logic == Logic::G {
            return Ok(NodeResult::Invalid(Arc::new(diagnose(s)?)));
        }
        let m = modal_part(s, self.logic)?;
        if let Some((step, children)) = self.modal_test(&m, depth)? {
            return Ok(NodeResult::Valid(Arc::new(TraceNode { step, children })));
        }
        match next_saturation_instance(s) {
            Some(instance) => {
                let premises = saturation_premises(s, &instance).expect("applicable instance");
                self.prove_all(Step::Saturation { instance }, premises, depth)
            }
            None => Ok(NodeResult::Invalid(Arc::new(diagnose(s)?))),
        }
    }

    fn run_search(&mut self, m: &ModalPart, mode: JSearch, depth: usize) -> Result<Option<Vec<usize>>, ProverError> {
        let logic = self.logic;
        let mut recurse =
            |p: &SequentOfRelations| -> Result<bool, ProverError> { Ok(matches!(self.prove(p, depth + 1)?, NodeResult::Valid(_))) };
        if logic == Logic::GKBox {
            leaf_valid_box(m, mode, &mut recurse)
        } else {
            leaf_valid_dia(m, logic, mode, &mut recurse)
        }
    }

    fn modal_test(&mut self, m: &ModalPart, depth: usize) -> Result<Option<ModalProof>, ProverError> {
        if let Some(r) = self.modal_memo.get(m) {
            return Ok(r.clone());
        }
        let n = if self.logic == Logic::GKBox { m.box_box.len() } else { m.dia_dia.len() };
        let found = if n == 0 {
            None
        } else {
            self.stats.leaf_tests += 1;
            let found = self.run_search(m, self.config.search, depth)?;
            if self.config.verify_search {
                if n > self.config.verify_limit {
                    self.stats.verification_skipped += 1;
                } else {
                    let other = match self.config.search {
                        JSearch::Gfp => JSearch::Exhaustive,
                        JSearch::Exhaustive => JSearch::Gfp,
                    };
                    self.stats.verified_leaf_tests += 1;
                    if self.run_search(m, other, depth)?.is_some() != found.is_some() {
                        self.stats.disagreements += 1;
                    }
                }
            }
            found
        };
        let result = match found {
            None => None,
            Some(j) => {
                let mut children = Vec::with_capacity(j.len());
                for &k in &j {
                    let p = if self.logic == Logic::GKBox { box_premise(m, &j, k) } else { dia_premise(m, self.logic, &j, k) };
                    match self.prove(&p, depth + 1)? {
                        NodeResult::Valid(t) => children.push(t),
                        NodeResult::Invalid(_) => unreachable!("leaf search accepted an invalid premise"),
                    }
                }
                let step = if self.logic == Logic::GKBox { Step::ModalBox { j } } else { Step::ModalDia { j } };
                Some((step, children))
            }
        };
        self.modal_memo.insert(m.clone(), result.clone());
        Ok(result)
    }
}

fn diagnose(s: &SequentOfRelations) -> Result<Diagnostic, RelationsError> {
    let abs = abstract_modals(s)?;
    let valuation = refute(&abs.sequent, &ConstantTable::standard()).expect("chainless sequent has a refutation");
    let assignment = valuation
        .into_iter()
        .filter(|(f, _)| !matches!(f, Formula::Top | Formula::Bot))
        .map(|(f, v)| {
            let original = match &f {
                Formula::Var(name) => abs.mapping.get(name).cloned().unwrap_or(f),
                _ => f,
            };
            (original.to_string(), v)
        })
        .collect();
    Ok(Diagnostic { leaf: s.clone(), assignment })
}

pub fn decide(logic: Logic, s: &SequentOfRelations) -> Result<Verdict, ProverError> {
    Prover::new(logic, ProverConfig::default()).decide(s)
}

/// Decides `top <= f`.
pub fn decide_formula(logic: Logic, f: &Formula) -> Result<Verdict, ProverError> {
    decide(logic, &SequentOfRelations::from_iter([Relation::le(Formula::Top, f.clone())]))
}

/// A rejected trace: the child-index path to the offending node and the reason.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("trace rejected at {path:?}: {reason}")]
pub struct TraceError {
    pub path: Vec<usize>,
    pub reason: String,
}

/// Replays a trace against `s`.
pub fn check_trace_detailed(logic: Logic, s: &SequentOfRelations, t: &ProofTrace) -> Result<(), TraceError> {
    let mut checked = HashSet::new();
    let mut path = Vec::new();
    check_node(logic, s, &t.root, &mut path, &mut checked)
}

pub fn check_trace(logic: Logic, s: &SequentOfRelations, t: &ProofTrace) -> bool {
    check_trace_detailed(logic, s, t).is_ok()
}

fn valid_index_set(j: &[usize], n: usize) -> bool {
    !j.is_empty() && j.windows(2).all(|w| w[0] < w[1]) && j.iter().all(|&i| i < n)
}

fn check_node(
    logic: Logic,
    s: &SequentOfRelations,
    node: &Arc<TraceNode>,
    path: &mut Vec<usize>,
    checked: &mut HashSet<(*const TraceNode, SequentOfRelations)>,
) -> Result<(), TraceError> {
    if checked.contains(&(Arc::as_ptr(node), s.clone())) {
        return Ok(());
    }
    let fail = |path: &Vec<usize>, reason: String| Err(TraceError { path: path.clone(), reason });
    let premises: Vec<SequentOfRelations> = match &node.step {
        Step::PropLeaf { certificate } => {
            if !verify_certificate(s, &ConstantTable::standard(), certificate) {
                return fail(path, "chain certificate does not verify".into());
            }
            vec![]
        }
        Step::Decompose { rule, principal } => match logical_premises(s, *rule, principal) {
            Some(p) => p,
            None => return fail(path, format!("no {} instance on `{principal}`", rule.name())),
        },
        Step::Saturation { instance } => match saturation_premises(s, instance) {
            Some(p) => p,
            None => return fail(path, format!("no applicable {:?} instance", instance.rule)),
        },
        Step::ModalBox { j } | Step::ModalDia { j } => {
            let is_box = matches!(node.step, Step::ModalBox { .. });
            if is_box != (logic == Logic::GKBox) || logic == Logic::G {
                return fail(path, format!("modal step not available in {logic}"));
            }
            let m = match modal_part(s, logic) {
                Ok(m) => m,
                Err(e) => return fail(path, e.to_string()),
            };
            let n = if is_box { m.box_box.len() } else { m.dia_dia.len() };
            if !valid_index_set(j, n) {
                return fail(path, format!("index set {j:?} is not a nonempty increasing subset of 0..{n}"));
            }
            let ps: Vec<SequentOfRelations> =
                j.iter().map(|&k| if is_box { box_premise(&m, j, k) } else { dia_premise(&m, logic, j, k) }).collect();
            let measure = s.modal_measure();
            if ps.iter().any(|p| p.modal_measure() >= measure) {
                return fail(path, "modal premise does not decrease the modal measure".into());
            }
            ps
        }
    };
    if premises.len() != node.children.len() {
        return fail(path, format!("expected {} children, found {}", premises.len(), node.children.len()));
    }
    for (i, (p, c)) in premises.iter().zip(&node.children).enumerate() {
        path.push(i);
        check_node(logic, p, c, path, checked)?;
        path.pop();
    }
    checked.insert((Arc::as_ptr(node), s.clone()));
    Ok(())
}

impl fmt::Display for LogicalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::relations::parse_sequent;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn seq(s: &str) -> SequentOfRelations {
        parse_sequent(s).unwrap()
    }

    fn valid(logic: Logic, text: &str) -> bool {
        let v = decide_formula(logic, &f(text)).unwrap();
        if let Some(t) = &v.trace {
            let s = SequentOfRelations::from_iter([Relation::le(Formula::Top, f(text))]);
            check_trace_detailed(logic, &s, t).unwrap();
        }
        v.is_valid()
    }

    #[test]
    fn decompose_prelinearity() {
        let out = decompose(&seq("top <= (p -> q) | (q -> p)"));
        assert_eq!(out, BTreeSet::from([seq("p <= q ; top <= q ; q <= p ; top <= p")]));
    }

    #[test]
    fn decompose_box_conjunction() {
        let out = decompose(&seq("[]p <= []p & []q"));
        assert_eq!(out, BTreeSet::from([seq("[]p <= []p"), seq("[]p <= []q")]));
        let qa = seq("[]p <= q");
        assert_eq!(decompose(&qa), BTreeSet::from([qa]));
    }

    #[test]
    fn box_leaf_examples() {
        let mut oracle = |s: &SequentOfRelations| -> Result<bool, ProverError> { Ok(decide(Logic::G, s)?.is_valid()) };
        let m = ModalPart { box_box: vec![(f("p"), f("q")), (f("p -> q"), f("q"))], ..Default::default() };
        assert_eq!(leaf_valid_box(&m, JSearch::Gfp, &mut oracle).unwrap(), Some(vec![0, 1]));
        let m = ModalPart { box_box: vec![(f("p"), f("q"))], ..Default::default() };
        assert_eq!(leaf_valid_box(&m, JSearch::Gfp, &mut oracle).unwrap(), None);
        let m = ModalPart { box_bot: vec![f("r")], ..Default::default() };
        assert_eq!(leaf_valid_box(&m, JSearch::Exhaustive, &mut oracle).unwrap(), None);
    }

    #[test]
    fn diamond_leaf_examples() {
        let mut oracle = |s: &SequentOfRelations| -> Result<bool, ProverError> { Ok(decide(Logic::G, s)?.is_valid()) };
        let m = ModalPart { dia_dia: vec![(f("p | q"), f("p")), (f("p | q"), f("q"))], ..Default::default() };
        assert_eq!(leaf_valid_dia(&m, Logic::GKDia, JSearch::Gfp, &mut oracle).unwrap(), Some(vec![0, 1]));
        let m = ModalPart { dia_dia: vec![(f("p"), Formula::Bot)], dia_high: vec![f("~~p")], ..Default::default() };
        assert_eq!(leaf_valid_dia(&m, Logic::GKDia, JSearch::Gfp, &mut oracle).unwrap(), Some(vec![0]));
        assert_eq!(leaf_valid_dia(&m, Logic::GKFDia, JSearch::Gfp, &mut oracle).unwrap(), None);
    }

    #[test]
    fn decide_examples() {
        assert!(valid(Logic::G, "(p -> q) | (q -> p)"));
        assert!(valid(Logic::G, "p -> p"));
        assert!(!valid(Logic::G, "p"));
        assert!(valid(Logic::GKBox, "[](p -> q) -> ([]p -> []q)"));
        assert!(!valid(Logic::GKBox, "[]~~p -> ~~[]p"));
        assert!(valid(Logic::GKBox, "~~[]p -> []~~p"));
        assert!(!valid(Logic::GKDia, "(<>p -> <>q) -> (~<>q | <>(p -> q))"));
        assert!(valid(Logic::GKFDia, "<>~~p -> ~~<>p"));
        assert!(!valid(Logic::GKFDia, "~~<>p -> <>~~p"));
        assert!(valid(Logic::GKDia, "~~<>p -> <>~~p"));
        assert!(valid(Logic::GKDia, "~<>bot"));
    }

    #[test]
    fn invalid_verdict_names_leaf() {
        let v = decide_formula(Logic::G, &f("p")).unwrap();
        let d = v.diagnostic.unwrap();
        assert!(!d.leaf.is_empty());
        assert_eq!(d.assignment["p"], Rational::zero());
    }

    #[test]
    fn fragment_violation() {
        assert!(matches!(decide_formula(Logic::GKBox, &f("<>p")), Err(ProverError::Fragment { .. })));
        assert!(matches!(decide_formula(Logic::G, &f("[]p")), Err(ProverError::Fragment { .. })));
    }

    #[test]
    fn limits_are_reported() {
        let cfg = ProverConfig { max_nodes: 2, ..Default::default() };
        let r = Prover::new(Logic::GKBox, cfg).decide(&seq("top <= [](p -> q) -> ([]p -> []q)"));
        assert_eq!(r, Err(ProverError::LimitExceeded(Limit::Nodes)));
    }

    #[test]
    fn tampered_traces_rejected() {
        let s = seq("top <= [](p -> q) -> ([]p -> []q)");
        let t = decide(Logic::GKBox, &s).unwrap().trace.unwrap();
        assert!(check_trace(Logic::GKBox, &s, &t));
        assert!(!check_trace(Logic::GKDia, &s, &t));
        let nodes = t.nodes();
        let leaf = nodes.iter().position(|n| matches!(n.step, Step::PropLeaf { .. })).unwrap();
        let bad = t.replace_node(leaf, |n| {
            let mut n = n.clone();
            if let Step::PropLeaf { certificate } = &mut n.step {
                certificate.chain.remove(0);
            }
            n
        });
        assert!(!check_trace(Logic::GKBox, &s, &bad));
        let modal = nodes.iter().position(|n| matches!(n.step, Step::ModalBox { .. })).unwrap();
        let bad = t.replace_node(modal, |n| TraceNode { step: Step::ModalBox { j: vec![] }, children: n.children.clone() });
        assert!(!check_trace(Logic::GKBox, &s, &bad));
    }

    #[test]
    fn modal_steps_check_shape() {
        let s = seq("[][]p <= [][]p ; q <= r");
        let leaf = Arc::new(TraceNode {
            step: Step::PropLeaf {
                certificate: ChainCertificate {
                    chain: vec![Relation::le(f("[]p"), f("[]p"))],
                    condition: crate::atomic::ChainCondition::Cycle,
                },
            },
            children: vec![],
        });
        let good = ProofTrace { root: Arc::new(TraceNode { step: Step::ModalBox { j: vec![0] }, children: vec![leaf.clone()] }) };
        assert!(check_trace(Logic::GKBox, &s, &good));
        let extra =
            ProofTrace { root: Arc::new(TraceNode { step: Step::ModalBox { j: vec![0] }, children: vec![leaf.clone(), leaf.clone()] }) };
        assert!(!check_trace(Logic::GKBox, &s, &extra));
        let out_of_range = ProofTrace { root: Arc::new(TraceNode { step: Step::ModalBox { j: vec![1] }, children: vec![leaf] }) };
        assert!(!check_trace(Logic::GKBox, &s, &out_of_range));
    }

    #[test]
    fn trace_json_round_trip() {
        let s = seq("top <= [](p -> q) -> ([]p -> []q)");
        let t = decide(Logic::GKBox, &s).unwrap().trace.unwrap();
        let text = serde_json::to_string(&t).unwrap();
        let back: ProofTrace = serde_json::from_str(&text).unwrap();
        assert!(check_trace(Logic::GKBox, &s, &back));
        assert_eq!(back.nodes().len(), t.nodes().len());
    }
}
