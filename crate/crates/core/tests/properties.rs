use gmodal::atomic::{atomic_valid, saturate};
use gmodal::corpus::{random_formula, FormulaParams};
use gmodal::formula::{complexity, modal_degree, render_formula};
use gmodal::hypersequent::{check_derivation_with, derive_box_n, expand_macros, random_derivation, CheckOptions, GenParams};
use gmodal::prover::decompose;
use gmodal::relations::{abstract_modals, interp_sequent};
use gmodal::semantics::{automorphism_transform, lambda_shift, random_model, validity_sequent, PiecewiseLinear};
use gmodal::{
    check_derivation, decide, eval_formula, parse_formula, prop_grid_oracle, ConstantTable, Formula, FrameKind, HDerivation, KripkeModel,
    Logic, Rational, RelKind, Relation, SequentOfRelations,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn formula(seed: u64, vars: &[&str], size: usize, logic: Logic, modal_depth: usize) -> Formula {
    random_formula(&mut ChaCha8Rng::seed_from_u64(seed), &FormulaParams::new(vars, size, logic, modal_depth))
}

/// A random sequent of relations whose sides come from `side`.
fn sequent(rng: &mut ChaCha8Rng, len: usize, mut side: impl FnMut(&mut ChaCha8Rng) -> Formula) -> SequentOfRelations {
    (0..len)
        .map(|_| {
            let kind = if rng.gen_bool(0.5) { RelKind::Le } else { RelKind::Lt };
            let (a, b) = (side(rng), side(rng));
            Relation::new(a, kind, b)
        })
        .collect()
}

fn prop_sequent(seed: u64, len: usize, size: usize) -> SequentOfRelations {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = FormulaParams::new(&["p", "q", "r"], size, Logic::G, 0);
    sequent(&mut rng, len, |r| random_formula(r, &params))
}

fn logics() -> impl Strategy<Value = Logic> {
    prop::sample::select(Logic::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>(), logic in logics()) {
        let f = formula(seed, &["p", "q", "r1"], 20, logic, 4);
        prop_assert_eq!(parse_formula(&render_formula(&f)).unwrap(), f);
    }

    #[test]
    fn complexity_and_modal_degree(seed in any::<u64>(), logic in logics()) {
        let a = formula(seed, &["p", "q"], 10, logic, 2);
        let b = formula(seed ^ 1, &["p", "q"], 10, logic, 2);
        prop_assert_eq!(complexity(&Formula::imp(a.clone(), b.clone())), complexity(&a) + complexity(&b) + 1);
        prop_assert_eq!(modal_degree(&Formula::boxed(b.clone())), complexity(&b).max(modal_degree(&b)));
        prop_assert_eq!(modal_degree(&Formula::dia(b.clone())), complexity(&b).max(modal_degree(&b)));
    }

    #[test]
    fn negation_desugars(seed in any::<u64>(), logic in logics()) {
        let text = render_formula(&formula(seed, &["p", "q"], 10, logic, 2));
        prop_assert_eq!(parse_formula(&format!("~({text})")).unwrap(), parse_formula(&format!("({text}) -> bot")).unwrap());
    }

    #[test]
    fn sequent_interpretation_is_faithful(seed in any::<u64>(), len in 1usize..4) {
        let s = prop_sequent(seed, len, 5);
        let direct = decide(Logic::G, &s).unwrap().is_valid();
        let via = decide(Logic::G, &validity_sequent(&interp_sequent(&s))).unwrap().is_valid();
        prop_assert_eq!(direct, via);
        prop_assert_eq!(direct, prop_grid_oracle(&s).unwrap());
    }

    #[test]
    fn abstraction_restores(seed in any::<u64>(), len in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = FormulaParams::new(&["p", "q"], 4, Logic::GKBox, 2);
        let s = sequent(&mut rng, len, |r| {
            let f = random_formula(r, &params);
            if r.gen_bool(0.5) { Formula::boxed(f) } else { Formula::var("q") }
        });
        let abs = abstract_modals(&s).unwrap();
        prop_assert!(abs.sequent.is_atomic());
        let images: std::collections::BTreeSet<&Formula> = abs.mapping.values().collect();
        prop_assert_eq!(images.len(), abs.mapping.len());
        prop_assert_eq!(abs.restore(), s);
    }

    #[test]
    fn decomposition_is_invertible(seed in any::<u64>(), len in 1usize..4) {
        let s = prop_sequent(seed, len, 12);
        let whole = prop_grid_oracle(&s).unwrap();
        let parts = decompose(&s).iter().all(|d| prop_grid_oracle(d).unwrap());
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn saturation_branches_are_faithful(seed in any::<u64>(), len in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = [Formula::var("p"), Formula::var("q"), Formula::var("r"), Formula::Bot, Formula::Top];
        let s = sequent(&mut rng, len, |r| atoms[r.gen_range(0..atoms.len())].clone());
        let branches = saturate(&s);
        prop_assert_eq!(prop_grid_oracle(&s).unwrap(), branches.iter().all(|b| prop_grid_oracle(b).unwrap()));
        for b in &branches {
            if atomic_valid(b, &ConstantTable::standard()).unwrap().is_some() {
                let witnessed = b.iter().any(|r| {
                    (r.kind == RelKind::Le && r.lhs == r.rhs) || (r.lhs == Formula::Bot && r.rhs == Formula::Top)
                });
                prop_assert!(witnessed, "{}", b);
            }
        }
    }

    #[test]
    fn automorphism_contract(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = ["p".to_string(), "q".to_string()];
        let kind = if rng.gen_bool(0.5) { FrameKind::Crisp } else { FrameKind::Fuzzy };
        let m = random_model(&mut rng, 3, kind, &vars, 4);
        let logic = if rng.gen_bool(0.5) { Logic::GKBox } else { Logic::GKDia };
        let f = random_formula(&mut rng, &FormulaParams::new(&["p", "q"], 10, logic, 3));
        let h = PiecewiseLinear::random(&mut rng, 7, 3);
        let t = automorphism_transform(&m, &h);
        for x in 0..3 {
            prop_assert_eq!(eval_formula(&t, &f, x).unwrap(), h.apply(eval_formula(&m, &f, x).unwrap()));
        }
    }

    #[test]
    fn lambda_shift_contract(seed in any::<u64>(), num in 1usize..=5, den in 5usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = ["p".to_string(), "q".to_string()];
        let m = random_model(&mut rng, 3, FrameKind::Crisp, &vars, 4);
        let logic = if rng.gen_bool(0.5) { Logic::GKBox } else { Logic::GKDia };
        let f = random_formula(&mut rng, &FormulaParams::new(&["p", "q"], 10, logic, 3));
        let lambda = Rational::frac(num, den);
        let t = lambda_shift(&m, lambda).unwrap();
        for x in 0..3 {
            prop_assert_eq!(eval_formula(&t, &f, x).unwrap(), lambda.residuum(eval_formula(&m, &f, x).unwrap()));
        }
    }

    #[test]
    fn double_negation_is_crisp_and_modal_constants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if rng.gen_bool(0.5) { FrameKind::Crisp } else { FrameKind::Fuzzy };
        let m = random_model(&mut rng, 3, kind, &["p".to_string()], 5);
        let nnp = parse_formula("~~p").unwrap();
        for x in 0..3 {
            let v = eval_formula(&m, &nnp, x).unwrap();
            prop_assert!(v == Rational::zero() || v == Rational::one());
            prop_assert_eq!(eval_formula(&m, &Formula::dia(Formula::Bot), x).unwrap(), Rational::zero());
            prop_assert_eq!(eval_formula(&m, &Formula::boxed(Formula::Top), x).unwrap(), Rational::one());
        }
    }

    #[test]
    fn derived_box_rule_checks(seed in any::<u64>(), n in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = [Formula::var("p"), Formula::var("q"), Formula::var("r")];
        let mut pick = |len: usize| -> Vec<Formula> { (0..len).map(|_| atoms[rng.gen_range(0..3)].clone()).collect() };
        let pis: Vec<Vec<Formula>> = (0..n).map(|i| pick(1 + i % 2)).collect();
        let gamma = pick(1);
        let d = derive_box_n(&pis, &gamma, &Formula::var("q"));
        let opts = CheckOptions { modal: true, allow_hyp: true };
        prop_assert!(check_derivation_with(&d, opts).is_ok());
    }

    #[test]
    fn generated_derivations_are_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_derivation(&mut rng, &GenParams { rounds: 30, ..GenParams::default() });
        prop_assert!(check_derivation(&d, true));
        let f = gmodal::interp_hyper(&d.conclusion);
        prop_assert!(decide(Logic::GKBox, &validity_sequent(&f)).unwrap().is_valid());
        let back: HDerivation = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn model_json_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if rng.gen_bool(0.5) { FrameKind::Crisp } else { FrameKind::Fuzzy };
        let m = random_model(&mut rng, 2, kind, &["p".to_string(), "q".to_string()], 6);
        let back: KripkeModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn negation_macros_expand_to_checked_steps() {
    let d = gmodal::corpus::box_double_negation_derivation();
    let e = expand_macros(&d).unwrap();
    assert!(check_derivation(&e, true));
    assert_eq!(e.conclusion, d.conclusion);
    assert_eq!(e.count_rule(gmodal::HRule::NegL) + e.count_rule(gmodal::HRule::NegR), 0);
}

/// Exact grid check of an atomic sequent over `p`, `q`, `r` with values in `{0, 1/4, ..., 1}`.
fn grid_valid(s: &[(usize, RelKind, usize)]) -> bool {
    let mut vals = [0usize, 4, 0, 0, 0];
    for a in 0..5 {
        for b in 0..5 {
            for c in 0..5 {
                vals[2] = a;
                vals[3] = b;
                vals[4] = c;
                let holds = s.iter().any(|&(x, k, y)| if k == RelKind::Le { vals[x] <= vals[y] } else { vals[x] < vals[y] });
                if !holds {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn atomic_validity_matches_grid_exhaustively() {
    let atoms = [Formula::Bot, Formula::Top, Formula::var("p"), Formula::var("q"), Formula::var("r")];
    let rels: Vec<(usize, RelKind, usize)> =
        (0..5).flat_map(|x| (0..5).flat_map(move |y| [(x, RelKind::Le, y), (x, RelKind::Lt, y)])).collect();
    let consts = ConstantTable::standard();
    let mut checked = 0usize;
    let mut idx = Vec::new();
    fn walk(
        start: usize,
        idx: &mut Vec<usize>,
        rels: &[(usize, RelKind, usize)],
        atoms: &[Formula],
        consts: &ConstantTable,
        checked: &mut usize,
    ) {
        if !idx.is_empty() {
            let picked: Vec<_> = idx.iter().map(|&i| rels[i]).collect();
            let s: SequentOfRelations = picked.iter().map(|&(x, k, y)| Relation::new(atoms[x].clone(), k, atoms[y].clone())).collect();
            let got = atomic_valid(&s, consts).unwrap().is_some();
            assert_eq!(got, grid_valid(&picked), "{s}");
            if idx.len() <= 2 {
                assert_eq!(got, prop_grid_oracle(&s).unwrap(), "{s}");
            }
            *checked += 1;
        }
        if idx.len() == 5 {
            return;
        }
        for i in start..rels.len() {
            idx.push(i);
            walk(i + 1, idx, rels, atoms, consts, checked);
            idx.pop();
        }
    }
    walk(0, &mut idx, &rels, &atoms, &consts, &mut checked);
    assert_eq!(checked, 2_369_935);
}

#[test]
fn saturation_order_is_deterministic() {
    let s = gmodal::parse_sequent("p <= q ; q < r").unwrap();
    assert_eq!(saturate(&s), saturate(&s));
}
