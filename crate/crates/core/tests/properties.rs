use std::collections::BTreeSet;

use dmupf::analysis::{check_r_feasible, inner_bounds, outer_bounds, Violation};
use dmupf::dmuss::AccessStructure;
use dmupf::protocol::{self, evaluate, retrieve, Demands, ProtocolConfig};
use dmupf::{Error, FieldCtx};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Feasibility straight from the sets: every rate positive, every
/// `R_k <= |A_k \ A_j|`, every subset sum at most the size of its union.
fn feasible_oracle(sets: &[BTreeSet<usize>], rates: &[usize]) -> bool {
    let k = sets.len();
    if rates.contains(&0) {
        return false;
    }
    for i in 0..k {
        for j in 0..k {
            if i != j && rates[i] > sets[i].difference(&sets[j]).count() {
                return false;
            }
        }
    }
    (1u32..1 << k).all(|mask| {
        let members: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let union: BTreeSet<usize> = members
            .iter()
            .flat_map(|&i| sets[i].iter().copied())
            .collect();
        members.iter().map(|&i| rates[i]).sum::<usize>() <= union.len()
    })
}

fn to_sets(masks: &[u8], n: usize) -> Vec<Vec<usize>> {
    masks
        .iter()
        .map(|&m| (1..=n).filter(|s| m >> (s - 1) & 1 == 1).collect())
        .collect()
}

fn access_strategy() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(n, k)| {
        let full = (1u16 << n) - 1;
        proptest::collection::vec(1..=full as u8, k).prop_map(move |masks| (n, to_sets(&masks, n)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn feasibility_matches_oracle(
        (n, sets) in access_strategy(),
        rates in proptest::collection::vec(0usize..=4, 4),
    ) {
        let acc = AccessStructure::new(n, sets.clone()).unwrap();
        let rates = &rates[..sets.len()];
        let oracle_sets: Vec<BTreeSet<usize>> = sets.iter().map(|s| s.iter().copied().collect()).collect();
        let got = check_r_feasible(&acc, rates).unwrap();
        prop_assert_eq!(got.feasible, feasible_oracle(&oracle_sets, rates));
        prop_assert_eq!(got.feasible, got.violations.is_empty());
        for v in &got.violations {
            if let Violation::Exceeded { constraint, lhs } = v {
                prop_assert!(*lhs > constraint.bound());
            }
        }
    }

    #[test]
    fn inner_region_is_the_feasible_box((n, sets) in access_strategy()) {
        let acc = AccessStructure::new(n, sets.clone()).unwrap();
        let oracle_sets: Vec<BTreeSet<usize>> = sets.iter().map(|s| s.iter().copied().collect()).collect();
        let region = inner_bounds(&acc, 2, 7, 1).unwrap();
        let outer = outer_bounds(&acc).unwrap();
        prop_assert_eq!(&region.constraints, &outer);
        let k = sets.len();
        prop_assert_eq!(outer.len(), k * (k - 1) + (1 << k) - 1);

        let mut expected = Vec::new();
        let sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
        let mut r = vec![1; k];
        'outer: loop {
            if feasible_oracle(&oracle_sets, &r) {
                expected.push(r.clone());
            }
            for i in (0..k).rev() {
                if r[i] < sizes[i] {
                    r[i] += 1;
                    continue 'outer;
                }
                r[i] = 1;
            }
            break;
        }
        let got: Vec<Vec<usize>> = region.feasible.iter().map(|f| f.rates.clone()).collect();
        prop_assert_eq!(&got, &expected);
        for m in &region.maximal {
            for other in &expected {
                let dominates = other != m && other.iter().zip(m).all(|(a, b)| a >= b);
                prop_assert!(!dominates, "{:?} dominated by {:?}", m, other);
            }
        }
    }

    #[test]
    fn enlarging_an_access_set_keeps_tuples_feasible(
        (n, sets) in access_strategy(),
        pick in 0usize..4,
    ) {
        let acc = AccessStructure::new(n, sets.clone()).unwrap();
        let k = pick % sets.len();
        let mut bigger = sets.clone();
        bigger[k].push(n + 1);
        let acc2 = AccessStructure::new(n + 1, bigger).unwrap();
        for f in inner_bounds(&acc, 1, 7, 1).unwrap().feasible {
            prop_assert!(check_r_feasible(&acc2, &f.rates).unwrap().feasible);
        }
    }
}

fn structures() -> Vec<AccessStructure> {
    let s = |n: usize, sets: Vec<Vec<usize>>| AccessStructure::new(n, sets).unwrap();
    vec![
        s(2, vec![vec![1, 2]]),
        s(3, vec![vec![1, 2], vec![2, 3]]),
        s(5, vec![vec![1, 2, 3], vec![3, 4, 5]]),
        s(4, vec![vec![1, 2, 3], vec![2, 3, 4]]),
        s(5, vec![vec![1, 2], vec![2, 3], vec![3, 4]]),
        s(4, vec![vec![1, 2], vec![3, 4]]),
    ]
}

#[test]
fn random_seeded_configs_are_correct() {
    let fields = [(3, 1), (5, 1), (7, 1), (2, 2), (3, 2), (2, 3)];
    let mut rng = ChaCha20Rng::seed_from_u64(100);
    for i in 0..100u64 {
        let all = structures();
        let acc = &all[rng.gen_range(0..all.len())];
        let (q, m) = fields[rng.gen_range(0..fields.len())];
        let field = FieldCtx::new(q, m).unwrap();
        if field.order() <= acc.sets().iter().map(Vec::len).max().unwrap() as u64 {
            continue;
        }
        let domain = rng.gen_range(1..=4);
        let region = inner_bounds(acc, domain, q, m).unwrap();
        let rates = region.feasible[rng.gen_range(0..region.feasible.len())]
            .rates
            .clone();
        let cfg = ProtocolConfig::with_random_functions(
            field,
            domain,
            acc.clone(),
            rates.clone(),
            i,
            Demands::Exhaustive,
        )
        .unwrap();
        let t = protocol::run(&cfg).unwrap();
        assert!(
            t.all_correct(),
            "config {i}: GF({q}^{m}) {:?} R={rates:?}",
            acc.sets()
        );
    }
}

fn example() -> ProtocolConfig {
    let field = FieldCtx::new(7, 1).unwrap();
    let acc = AccessStructure::new(5, vec![vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
    ProtocolConfig::with_random_functions(field, 3, acc, vec![2, 2], 7, Demands::Exhaustive)
        .unwrap()
}

#[test]
fn corrupting_a_stored_symbol_breaks_retrieval() {
    let cfg = example();
    let clean = protocol::placement(&cfg).unwrap();
    assert!(protocol::run_with_placement(&cfg, &clean)
        .unwrap()
        .all_correct());
    for server in 1..=5 {
        for t in 1..=3 {
            let mut bad = clean.clone();
            let f = cfg.field.clone();
            let g = &mut bad.stores[server - 1].g[t - 1];
            *g = f.add(*g, f.one());
            let run = protocol::run_with_placement(&cfg, &bad).unwrap();
            let hit = run
                .rounds
                .iter()
                .flat_map(|r| &r.outcomes)
                .any(|o| o.demand == t && cfg.access.contains(o.user, server) && !o.correct);
            assert!(
                hit,
                "corrupting server {server} coordinate {t} went unnoticed"
            );
        }
    }
}

#[test]
fn replay_is_identical() {
    let cfg = example();
    let a = protocol::run(&cfg).unwrap();
    let b = protocol::run(&cfg).unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed = 8;
    assert_ne!(protocol::run(&other).unwrap().stores, a.stores);
}

#[test]
fn servers_outside_the_access_set_refuse() {
    let cfg = example();
    let p = protocol::placement(&cfg).unwrap();
    let err = evaluate(&p.params, 1, 1, &p.stores[4]).unwrap_err();
    assert!(matches!(err, Error::AccessViolation { user: 1, server: 5 }));
}

#[test]
fn retrieval_accepts_any_response_order_and_rejects_gaps() {
    let cfg = example();
    let p = protocol::placement(&cfg).unwrap();
    let expected = cfg.functions[1].eval(2).unwrap();
    let mut responses: Vec<_> = [3, 4, 5]
        .iter()
        .map(|&s| evaluate(&p.params, 2, 2, &p.stores[s - 1]).unwrap())
        .collect();
    assert_eq!(retrieve(&p.params, 2, &responses).unwrap(), expected);
    responses.reverse();
    assert_eq!(retrieve(&p.params, 2, &responses).unwrap(), expected);
    responses.pop();
    assert!(retrieve(&p.params, 2, &responses).is_err());
    let dup = vec![
        responses[0].clone(),
        responses[0].clone(),
        responses[1].clone(),
    ];
    assert!(retrieve(&p.params, 2, &dup).is_err());
}

#[test]
fn infeasible_rates_are_rejected_before_sampling() {
    let mut cfg = example();
    cfg.rates = vec![3, 1];
    cfg.functions = protocol::random_functions(&cfg.field, 3, &cfg.rates, 0).unwrap();
    match protocol::run(&cfg) {
        Err(Error::Infeasible(v)) => assert!(v.iter().any(|x| x.to_string().contains("pairwise"))),
        other => panic!("expected infeasible, got {other:?}"),
    }
}
