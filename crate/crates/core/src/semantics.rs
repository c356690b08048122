//! Exact Kripke semantics over finite models, bounded countermodel search, the propositional grid oracle
//! and the two value transforms on models.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Logic};
use crate::rational::Rational;
use crate::relations::{RelKind, Relation, SequentOfRelations};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Crisp,
    Fuzzy,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("variable `{0}` has no valuation")]
    UnboundVariable(String),
    #[error("world {world} out of range for a model with {worlds} worlds")]
    WorldOutOfRange { world: usize, worlds: usize },
    #[error("formula is not propositional")]
    NotPropositional,
    #[error("{0} formula not in the language of the logic")]
    Fragment(Logic),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("search budget exhausted after {examined} models")]
    BudgetExhausted { examined: u64 },
}

/// A finite Kripke model; `access[x][y]` is the accessibility degree of `y` from `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct KripkeModel {
    worlds: usize,
    kind: FrameKind,
    access: Vec<Vec<Rational>>,
    valuation: BTreeMap<String, Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    worlds: usize,
    kind: FrameKind,
    access: Vec<Vec<Rational>>,
    valuation: BTreeMap<String, Vec<Rational>>,
}

impl TryFrom<RawModel> for KripkeModel {
    type Error = SemanticsError;

    fn try_from(r: RawModel) -> Result<Self, Self::Error> {
        KripkeModel::new(r.worlds, r.kind, r.access, r.valuation)
    }
}

impl From<KripkeModel> for RawModel {
    fn from(m: KripkeModel) -> Self {
        RawModel { worlds: m.worlds, kind: m.kind, access: m.access, valuation: m.valuation }
    }
}

impl KripkeModel {
    pub fn new(
        worlds: usize,
        kind: FrameKind,
        access: Vec<Vec<Rational>>,
        valuation: BTreeMap<String, Vec<Rational>>,
    ) -> Result<Self, SemanticsError> {
        let bad = |m: String| Err(SemanticsError::InvalidModel(m));
        if worlds == 0 {
            return bad("a model needs at least one world".into());
        }
        if access.len() != worlds || access.iter().any(|row| row.len() != worlds) {
            return bad(format!("access must be a {worlds}x{worlds} matrix"));
        }
        for row in &access {
            for v in row {
                if !v.in_unit() {
                    return bad(format!("access value {v} outside [0,1]"));
                }
                if kind == FrameKind::Crisp && *v != Rational::zero() && *v != Rational::one() {
                    return bad(format!("crisp access value {v} is not 0 or 1"));
                }
            }
        }
        for (p, vs) in &valuation {
            if vs.len() != worlds {
                return bad(format!("valuation of `{p}` needs {worlds} values"));
            }
            if let Some(v) = vs.iter().find(|v| !v.in_unit()) {
                return bad(format!("value {v} of `{p}` outside [0,1]"));
            }
        }
        Ok(KripkeModel { worlds, kind, access, valuation })
    }

    pub fn worlds(&self) -> usize {
        self.worlds
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn access(&self, x: usize, y: usize) -> Rational {
        self.access[x][y]
    }

    pub fn valuation(&self) -> &BTreeMap<String, Vec<Rational>> {
        &self.valuation
    }

    fn eval_all(&self, f: &Formula, memo: &mut HashMap<Formula, Vec<Rational>>) -> Result<Vec<Rational>, SemanticsError> {
        if let Some(v) = memo.get(f) {
            return Ok(v.clone());
        }
        let n = self.worlds;
        let out = match f {
            Formula::Var(p) => self.valuation.get(&**p).cloned().ok_or_else(|| SemanticsError::UnboundVariable(p.to_string()))?,
            Formula::Bot => vec![Rational::zero(); n],
            Formula::Top => vec![Rational::one(); n],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                let (va, vb) = (self.eval_all(a, memo)?, self.eval_all(b, memo)?);
                va.iter()
                    .zip(&vb)
                    .map(|(&x, &y)| match f {
                        Formula::And(..) => x.min(y),
                        Formula::Or(..) => x.max(y),
                        _ => x.residuum(y),
                    })
                    .collect()
            }
            Formula::Box(a) => {
                let va = self.eval_all(a, memo)?;
                (0..n).map(|x| (0..n).map(|y| self.access[x][y].residuum(va[y])).fold(Rational::one(), Rational::min)).collect()
            }
            Formula::Dia(a) => {
                let va = self.eval_all(a, memo)?;
                (0..n).map(|x| (0..n).map(|y| va[y].min(self.access[x][y])).fold(Rational::zero(), Rational::max)).collect()
            }
        };
        memo.insert(f.clone(), out.clone());
        Ok(out)
    }

    fn check_world(&self, x: usize) -> Result<(), SemanticsError> {
        if x >= self.worlds {
            return Err(SemanticsError::WorldOutOfRange { world: x, worlds: self.worlds });
        }
        Ok(())
    }
}

/// The value of `f` at world `x`.
pub fn eval_formula(m: &KripkeModel, f: &Formula, x: usize) -> Result<Rational, SemanticsError> {
    m.check_world(x)?;
    Ok(m.eval_all(f, &mut HashMap::new())?[x])
}

/// The value of `f` under a propositional valuation.
pub fn eval_propositional(f: &Formula, v: &BTreeMap<String, Rational>) -> Result<Rational, SemanticsError> {
    if f.has_box() || f.has_dia() {
        return Err(SemanticsError::NotPropositional);
    }
    let valuation = v.iter().map(|(p, x)| (p.clone(), vec![*x])).collect();
    let m = KripkeModel::new(1, FrameKind::Crisp, vec![vec![Rational::zero()]], valuation)?;
    eval_formula(&m, f, 0)
}

fn holds(r: &Relation, x: Rational, y: Rational) -> bool {
    match r.kind {
        RelKind::Lt => x < y,
        RelKind::Le => x <= y,
    }
}

/// Whether some relation of `s` holds at `x`.
pub fn sequent_holds_at(m: &KripkeModel, s: &SequentOfRelations, x: usize) -> Result<bool, SemanticsError> {
    m.check_world(x)?;
    let mut memo = HashMap::new();
    for r in s.iter() {
        if holds(r, m.eval_all(&r.lhs, &mut memo)?[x], m.eval_all(&r.rhs, &mut memo)?[x]) {
            return Ok(true);
        }
    }
    Ok(false)
}

enum Op {
    Var(usize),
    Const(Rational),
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
    Box(usize),
    Dia(usize),
}

/// A sequent flattened into shared subformula nodes for repeated evaluation over many models.
struct Program {
    ops: Vec<Op>,
    vars: Vec<String>,
    rels: Vec<(usize, RelKind, usize)>,
}

impl Program {
    fn new(s: &SequentOfRelations, vars: &[String]) -> Self {
        let mut p = Program { ops: Vec::new(), vars: vars.to_vec(), rels: Vec::new() };
        let mut index = HashMap::new();
        for r in s.iter() {
            let (l, h) = (p.add(&r.lhs, &mut index), p.add(&r.rhs, &mut index));
            p.rels.push((l, r.kind, h));
        }
        p
    }

    fn add(&mut self, f: &Formula, index: &mut HashMap<Formula, usize>) -> usize {
        if let Some(&i) = index.get(f) {
            return i;
        }
        let op = match f {
            Formula::Var(v) => Op::Var(self.vars.iter().position(|x| **x == **v).expect("collected")),
            Formula::Bot => Op::Const(Rational::zero()),
            Formula::Top => Op::Const(Rational::one()),
            Formula::And(a, b) => Op::And(self.add(a, index), self.add(b, index)),
            Formula::Or(a, b) => Op::Or(self.add(a, index), self.add(b, index)),
            Formula::Imp(a, b) => Op::Imp(self.add(a, index), self.add(b, index)),
            Formula::Box(a) => Op::Box(self.add(a, index)),
            Formula::Dia(a) => Op::Dia(self.add(a, index)),
        };
        self.ops.push(op);
        index.insert(f.clone(), self.ops.len() - 1);
        self.ops.len() - 1
    }

    /// Whether every relation fails at `x`; `val[v][y]` is the value of variable `v` at `y`.
    fn fails_at(&self, n: usize, access: &[Vec<Rational>], val: &[Vec<Rational>], x: usize, buf: &mut Vec<Vec<Rational>>) -> bool {
        buf.clear();
        for op in &self.ops {
            let row: Vec<Rational> = match *op {
                Op::Var(v) => val[v].clone(),
                Op::Const(c) => vec![c; n],
                Op::And(a, b) => (0..n).map(|y| buf[a][y].min(buf[b][y])).collect(),
                Op::Or(a, b) => (0..n).map(|y| buf[a][y].max(buf[b][y])).collect(),
                Op::Imp(a, b) => (0..n).map(|y| buf[a][y].residuum(buf[b][y])).collect(),
                Op::Box(a) => {
                    (0..n).map(|w| (0..n).map(|y| access[w][y].residuum(buf[a][y])).fold(Rational::one(), Rational::min)).collect()
                }
                Op::Dia(a) => (0..n).map(|w| (0..n).map(|y| buf[a][y].min(access[w][y])).fold(Rational::zero(), Rational::max)).collect(),
            };
            buf.push(row);
        }
        self.rels.iter().all(|&(l, k, h)| {
            let (a, b) = (buf[l][x], buf[h][x]);
            !match k {
                RelKind::Lt => a < b,
                RelKind::Le => a <= b,
            }
        })
    }
}

/// The sequent `{top <= f}`.
pub fn validity_sequent(f: &Formula) -> SequentOfRelations {
    SequentOfRelations::new().with([Relation::le(Formula::Top, f.clone())])
}

fn sequent_vars(s: &SequentOfRelations) -> Vec<String> {
    let mut vs = std::collections::BTreeSet::new();
    for r in s.iter() {
        r.lhs.collect_vars(&mut vs);
        r.rhs.collect_vars(&mut vs);
    }
    vs.into_iter().map(|v| v.to_string()).collect()
}

/// True iff every assignment into the grid `{0, 1/(n+1), ..., 1}` satisfies `s`, where `n` counts its variables.
pub fn prop_grid_oracle(s: &SequentOfRelations) -> Result<bool, SemanticsError> {
    if s.iter().any(|r| r.lhs.has_box() || r.lhs.has_dia() || r.rhs.has_box() || r.rhs.has_dia()) {
        return Err(SemanticsError::NotPropositional);
    }
    let vars = sequent_vars(s);
    let k = vars.len() + 1;
    let mut digits = vec![0usize; vars.len()];
    loop {
        let valuation = vars.iter().zip(&digits).map(|(p, &d)| (p.clone(), vec![Rational::frac(d, k)])).collect();
        let m = KripkeModel::new(1, FrameKind::Crisp, vec![vec![Rational::zero()]], valuation)?;
        if !sequent_holds_at(&m, s, 0)? {
            return Ok(false);
        }
        if !odometer(&mut digits, |_| k + 1) {
            return Ok(true);
        }
    }
}

/// Advances a mixed-radix counter; false after the last value.
fn odometer(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Every model up to the bounds, by increasing world count and then grid.
    Exhaustive,
    Random {
        seed: u64,
        samples: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_worlds: usize,
    /// Values range over `{0, 1/k, ..., 1}` for `k` up to this bound.
    pub grid: usize,
    pub mode: SearchMode,
    /// Maximum number of models examined.
    pub budget: u64,
    /// Search fuzzy frames for the box fragment, where both frame classes agree.
    pub fuzzy_box: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_worlds: 3, grid: 5, mode: SearchMode::Exhaustive, budget: 2_000_000, fuzzy_box: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Countermodel {
    pub model: KripkeModel,
    pub world: usize,
}

pub fn frame_kind(logic: Logic, fuzzy_box: bool) -> FrameKind {
    match logic {
        Logic::GKFDia => FrameKind::Fuzzy,
        Logic::GKBox if fuzzy_box => FrameKind::Fuzzy,
        _ => FrameKind::Crisp,
    }
}

fn reachable_from_root(access: &[Vec<Rational>]) -> bool {
    let n = access.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for y in 0..n {
            if !seen[y] && access[x][y] > Rational::zero() {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A model and world where no relation of `s` holds; `Ok(None)` when the bounded space holds no witness.
///
/// Exhaustive mode checks world 0 of root-connected models, which loses no witness up to the bounds, and
/// skips grids already covered by a coarser one. The result is self-checked before it is returned.
pub fn countermodel_search(logic: Logic, s: &SequentOfRelations, cfg: &SearchConfig) -> Result<Option<Countermodel>, SemanticsError> {
    if !s.admitted_by(logic) {
        return Err(SemanticsError::Fragment(logic));
    }
    let kind = frame_kind(logic, cfg.fuzzy_box);
    let vars = sequent_vars(s);
    let max_worlds = if logic == Logic::G { 1 } else { cfg.max_worlds.max(1) };
    let grid = cfg.grid.max(1);
    let prog = Program::new(s, &vars);
    let mut buf = Vec::new();
    let found = match cfg.mode {
        SearchMode::Exhaustive => exhaustive(&prog, kind, max_worlds, grid, cfg.budget)?,
        SearchMode::Random { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hit = None;
            for examined in 0..samples {
                if examined >= cfg.budget {
                    return Err(SemanticsError::BudgetExhausted { examined });
                }
                let n = rng.gen_range(1..=max_worlds);
                let k = rng.gen_range(1..=grid);
                let m = random_model(&mut rng, n, kind, &vars, k);
                let val: Vec<Vec<Rational>> = vars.iter().map(|p| m.valuation[p].clone()).collect();
                if let Some(x) = (0..n).find(|&x| prog.fails_at(n, &m.access, &val, x, &mut buf)) {
                    hit = Some(Countermodel { model: m, world: x });
                    break;
                }
            }
            hit
        }
    };
    if let Some(c) = &found {
        if sequent_holds_at(&c.model, s, c.world)? {
            return Err(SemanticsError::InvalidModel("search produced a non-witness".into()));
        }
    }
    Ok(found)
}

fn exhaustive(
    prog: &Program,
    kind: FrameKind,
    max_worlds: usize,
    grid: usize,
    budget: u64,
) -> Result<Option<Countermodel>, SemanticsError> {
    let vars = &prog.vars;
    let mut examined = 0u64;
    let mut buf = Vec::new();
    for n in 1..=max_worlds {
        for k in 1..=grid {
            let access_radix = if kind == FrameKind::Crisp { 2 } else { k + 1 };
            let to_access = |d: usize| if kind == FrameKind::Crisp { Rational::from_int(d as i64) } else { Rational::frac(d, k) };
            let mut acc = vec![0usize; n * n];
            loop {
                let access: Vec<Vec<Rational>> = (0..n).map(|x| (0..n).map(|y| to_access(acc[x * n + y])).collect()).collect();
                if reachable_from_root(&access) {
                    let acc_g = if kind == FrameKind::Fuzzy { acc.iter().fold(k, |g, &d| gcd(g, d)) } else { k };
                    let mut val = vec![0usize; vars.len() * n];
                    loop {
                        if val.iter().fold(acc_g, |g, &d| gcd(g, d)) == 1 {
                            if examined >= budget {
                                return Err(SemanticsError::BudgetExhausted { examined });
                            }
                            examined += 1;
                            let vals: Vec<Vec<Rational>> =
                                (0..vars.len()).map(|i| (0..n).map(|x| Rational::frac(val[i * n + x], k)).collect()).collect();
                            if prog.fails_at(n, &access, &vals, 0, &mut buf) {
                                let valuation = vars.iter().cloned().zip(vals).collect();
                                return Ok(Some(Countermodel { model: KripkeModel { worlds: n, kind, access, valuation }, world: 0 }));
                            }
                        }
                        if !odometer(&mut val, |_| k + 1) {
                            break;
                        }
                    }
                }
                if !odometer(&mut acc, |_| access_radix) {
                    break;
                }
            }
        }
    }
    Ok(None)
}

/// A uniformly random model over the grid `{0, 1/k, ..., 1}`.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, worlds: usize, kind: FrameKind, vars: &[String], k: usize) -> KripkeModel {
    let k = k.max(1);
    let access = (0..worlds)
        .map(|_| {
            (0..worlds)
                .map(|_| match kind {
                    FrameKind::Crisp => Rational::from_int(rng.gen_range(0..2)),
                    FrameKind::Fuzzy => Rational::frac(rng.gen_range(0..=k), k),
                })
                .collect()
        })
        .collect();
    let valuation = vars.iter().map(|p| (p.clone(), (0..worlds).map(|_| Rational::frac(rng.gen_range(0..=k), k)).collect())).collect();
    KripkeModel { worlds, kind, access, valuation }
}

/// A strictly increasing piecewise-linear bijection of `[0,1]` through rational breakpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    points: Vec<(Rational, Rational)>,
}

impl PiecewiseLinear {
    /// `points` must start at `(0,0)`, end at `(1,1)` and increase strictly in both coordinates.
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self, SemanticsError> {
        let bad = |m: &str| Err(SemanticsError::InvalidTransform(m.into()));
        let (Some(first), Some(last)) = (points.first(), points.last()) else { return bad("no breakpoints") };
        if *first != (Rational::zero(), Rational::zero()) || *last != (Rational::one(), Rational::one()) {
            return bad("must fix 0 and 1");
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1) {
            return bad("breakpoints must increase strictly");
        }
        Ok(PiecewiseLinear { points })
    }

    pub fn identity() -> Self {
        PiecewiseLinear { points: vec![(Rational::zero(), Rational::zero()), (Rational::one(), Rational::one())] }
    }

    pub fn apply(&self, x: Rational) -> Rational {
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (x - x0) * (y1 - y0) / (x1 - x0);
            }
        }
        Rational::one()
    }

    /// A random map whose interior breakpoints sit on the grid `{0, 1/k, ..., 1}`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, k: usize, breaks: usize) -> Self {
        let k = k.max(2);
        let mut xs: Vec<usize> = (0..breaks).map(|_| rng.gen_range(1..k)).collect();
        let mut ys: Vec<usize> = (0..breaks).map(|_| rng.gen_range(1..k)).collect();
        xs.sort_unstable();
        xs.dedup();
        ys.sort_unstable();
        ys.dedup();
        let m = xs.len().min(ys.len());
        let mut points = vec![(Rational::zero(), Rational::zero())];
        points.extend((0..m).map(|i| (Rational::frac(xs[i], k), Rational::frac(ys[i], k))));
        points.push((Rational::one(), Rational::one()));
        PiecewiseLinear { points }
    }
}

/// Applies `h` to every accessibility degree and variable value.
pub fn automorphism_transform(m: &KripkeModel, h: &PiecewiseLinear) -> KripkeModel {
    KripkeModel {
        worlds: m.worlds,
        kind: m.kind,
        access: m.access.iter().map(|row| row.iter().map(|&v| h.apply(v)).collect()).collect(),
        valuation: m.valuation.iter().map(|(p, vs)| (p.clone(), vs.iter().map(|&v| h.apply(v)).collect())).collect(),
    }
}

/// Replaces each variable value `v` by `lambda -> v` on a crisp model.
pub fn lambda_shift(m: &KripkeModel, lambda: Rational) -> Result<KripkeModel, SemanticsError> {
    if m.kind != FrameKind::Crisp {
        return Err(SemanticsError::InvalidTransform("the shift applies to crisp models only".into()));
    }
    if lambda <= Rational::zero() || lambda > Rational::one() {
        return Err(SemanticsError::InvalidTransform(format!("lambda {lambda} outside (0,1]")));
    }
    Ok(KripkeModel {
        worlds: m.worlds,
        kind: m.kind,
        access: m.access.clone(),
        valuation: m.valuation.iter().map(|(p, vs)| (p.clone(), vs.iter().map(|&v| lambda.residuum(v)).collect())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::relations::parse_sequent;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn model(kind: FrameKind, access: Vec<Vec<Rational>>, vals: &[(&str, Vec<Rational>)]) -> KripkeModel {
        let n = access.len();
        KripkeModel::new(n, kind, access, vals.iter().map(|(p, v)| (p.to_string(), v.clone())).collect()).unwrap()
    }

    #[test]
    fn empty_successors() {
        let m = model(FrameKind::Crisp, vec![vec![r(0, 1)]], &[("p", vec![r(1, 2)])]);
        assert_eq!(eval_formula(&m, &f("[]p"), 0).unwrap(), Rational::one());
        assert_eq!(eval_formula(&m, &f("<>p"), 0).unwrap(), Rational::zero());
        assert_eq!(eval_formula(&m, &f("q"), 0), Err(SemanticsError::UnboundVariable("q".into())));
        assert!(matches!(eval_formula(&m, &f("p"), 3), Err(SemanticsError::WorldOutOfRange { .. })));
    }

    #[test]
    fn truncated_infinite_model() {
        let (z, o) = (r(0, 1), r(1, 1));
        let access = vec![vec![z, o, o], vec![z, z, z], vec![z, z, z]];
        let q = (0..3).map(|x| r(1, 2) - r(1, x + 2)).collect();
        let m = model(FrameKind::Crisp, access, &[("p", vec![r(1, 2); 3]), ("q", q)]);
        assert_eq!(eval_formula(&m, &f("<>q"), 0).unwrap(), r(1, 4));
    }

    #[test]
    fn fuzzy_edge() {
        let m = model(FrameKind::Fuzzy, vec![vec![r(0, 1), r(1, 2)], vec![r(0, 1), r(0, 1)]], &[("p", vec![r(0, 1), r(1, 1)])]);
        assert_eq!(eval_formula(&m, &f("<>p"), 0).unwrap(), r(1, 2));
        assert_eq!(eval_formula(&m, &f("[]p"), 0).unwrap(), r(1, 1));
    }

    #[test]
    fn relations_at_worlds() {
        let m = model(FrameKind::Crisp, vec![vec![r(1, 1)]], &[("p", vec![r(1, 2)])]);
        assert!(sequent_holds_at(&m, &parse_sequent("p <= p").unwrap(), 0).unwrap());
        assert!(!sequent_holds_at(&m, &parse_sequent("p < p").unwrap(), 0).unwrap());
        assert!(sequent_holds_at(&m, &validity_sequent(&f("[]~~p -> ~~[]p")), 0).unwrap());
        for v in [r(0, 1), r(1, 3), r(1, 1)] {
            let m = model(FrameKind::Crisp, vec![vec![r(0, 1)]], &[("p", vec![v])]);
            let nn = eval_formula(&m, &f("~~p"), 0).unwrap();
            assert!(nn == Rational::zero() || nn == Rational::one());
        }
    }

    #[test]
    fn model_validation_and_json() {
        assert!(KripkeModel::new(1, FrameKind::Crisp, vec![vec![r(1, 2)]], BTreeMap::new()).is_err());
        assert!(KripkeModel::new(1, FrameKind::Fuzzy, vec![vec![r(3, 2)]], BTreeMap::new()).is_err());
        assert!(KripkeModel::new(2, FrameKind::Fuzzy, vec![vec![r(0, 1)]], BTreeMap::new()).is_err());
        let text = r#"{"worlds": 2, "kind": "fuzzy", "access": [[[0,1],[1,2]],[[0,1],[0,1]]], "valuation": {"p": [[0,1],[1,1]]}}"#;
        let m: KripkeModel = serde_json::from_str(text).unwrap();
        assert_eq!(m.access(0, 1), r(1, 2));
        let back: KripkeModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"worlds": 1, "kind": "crisp", "access": [[[1,2]]], "valuation": {}}"#;
        assert!(serde_json::from_str::<KripkeModel>(bad).is_err());
    }

    #[test]
    fn grid_oracle() {
        assert!(prop_grid_oracle(&validity_sequent(&f("(p -> q) | (q -> p)"))).unwrap());
        assert!(!prop_grid_oracle(&validity_sequent(&f("p | ~p"))).unwrap());
        assert!(prop_grid_oracle(&parse_sequent("bot < top").unwrap()).unwrap());
        assert_eq!(prop_grid_oracle(&validity_sequent(&f("[]p"))), Err(SemanticsError::NotPropositional));
    }

    #[test]
    fn search() {
        let cfg = SearchConfig { max_worlds: 2, grid: 2, ..Default::default() };
        let c = countermodel_search(Logic::GKDia, &validity_sequent(&f("<>p -> <>q")), &cfg).unwrap().unwrap();
        assert!(c.model.worlds() <= 2);
        assert!(countermodel_search(Logic::G, &parse_sequent("p <= p").unwrap(), &cfg).unwrap().is_none());
        let fmp = SearchConfig { max_worlds: 3, grid: 5, ..Default::default() };
        let w = countermodel_search(Logic::GKFDia, &validity_sequent(&f("~~<>p -> <>~~p")), &fmp).unwrap().unwrap();
        assert_eq!(w.model.kind(), FrameKind::Fuzzy);
        let tiny = SearchConfig { budget: 3, ..fmp };
        assert_eq!(
            countermodel_search(Logic::GKBox, &validity_sequent(&f("[]p -> []p")), &tiny),
            Err(SemanticsError::BudgetExhausted { examined: 3 })
        );
        let random = SearchConfig { mode: SearchMode::Random { seed: 7, samples: 500 }, ..cfg };
        assert!(countermodel_search(Logic::GKDia, &validity_sequent(&f("<>p -> <>q")), &random).unwrap().is_some());
        assert_eq!(countermodel_search(Logic::G, &validity_sequent(&f("[]p")), &cfg), Err(SemanticsError::Fragment(Logic::G)));
    }

    #[test]
    fn transforms() {
        let m = model(FrameKind::Crisp, vec![vec![r(0, 1), r(1, 1)], vec![r(0, 1), r(1, 1)]], &[("p", vec![r(3, 4), r(1, 4)])]);
        assert_eq!(automorphism_transform(&m, &PiecewiseLinear::identity()), m);
        let h = PiecewiseLinear::new(vec![(r(0, 1), r(0, 1)), (r(1, 2), r(3, 4)), (r(1, 1), r(1, 1))]).unwrap();
        assert_eq!(h.apply(r(1, 4)), r(3, 8));
        assert_eq!(h.apply(r(3, 4)), r(7, 8));
        assert!(PiecewiseLinear::new(vec![(r(0, 1), r(0, 1)), (r(1, 2), r(1, 2))]).is_err());
        let s = lambda_shift(&m, r(1, 2)).unwrap();
        assert_eq!(s.valuation()["p"], vec![r(1, 1), r(1, 4)]);
        assert_eq!(lambda_shift(&m, Rational::one()).unwrap(), m);
        assert!(lambda_shift(&m, Rational::zero()).is_err());
        let fz = model(FrameKind::Fuzzy, vec![vec![r(1, 2)]], &[]);
        assert!(lambda_shift(&fz, r(1, 2)).is_err());
        for a in ["[]p -> p", "<>(p & []p)", "~[]p | <>~p"] {
            for x in 0..2 {
                let v = eval_formula(&m, &f(a), x).unwrap();
                assert_eq!(eval_formula(&automorphism_transform(&m, &h), &f(a), x).unwrap(), h.apply(v));
                assert_eq!(eval_formula(&s, &f(a), x).unwrap(), r(1, 2).residuum(v));
            }
        }
    }
}
