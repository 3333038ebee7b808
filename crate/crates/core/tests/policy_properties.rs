mod common;

use common::{ref_probs, to_params, Table};
use netpg::policy::{mellow_max, policy_probs, score_function, PolicyKind};
use proptest::prelude::*;

const KINDS: [PolicyKind; 2] = [PolicyKind::Networked, PolicyKind::Independent];

fn table(n: usize, k: usize, mag: f64) -> impl Strategy<Value = Table> {
    prop::collection::vec(prop::collection::vec(prop::array::uniform2(-mag..mag), k), n)
}

fn case(mag: f64) -> impl Strategy<Value = (Table, Vec<f64>)> {
    (2usize..6, 1usize..6).prop_flat_map(move |(n, k)| {
        (table(n, k, mag), prop::collection::vec(0.0..3.0f64, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn probabilities_normalize_even_for_large_parameters((theta, feats) in case(50.0)) {
        let params = to_params(&theta);
        for kind in KINDS {
            for i in 0..theta.len() {
                let p = policy_probs(i, &feats, &params, kind);
                prop_assert!(p.iter().all(|x| x.is_finite() && *x >= 0.0));
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_match_reference((theta, feats) in case(5.0)) {
        let params = to_params(&theta);
        for kind in KINDS {
            for i in 0..theta.len() {
                let p = policy_probs(i, &feats, &params, kind);
                let r = ref_probs(i, &feats, &theta, kind == PolicyKind::Networked);
                for (a, b) in p.iter().zip(&r) {
                    prop_assert!((a - b).abs() <= 1e-12, "{p:?} vs {r:?}");
                }
            }
        }
    }

    #[test]
    fn expected_score_is_zero((theta, feats) in case(3.0)) {
        let params = to_params(&theta);
        let (n, k) = (theta.len(), theta[0].len());
        for kind in KINDS {
            for i in 0..n {
                for owner in 0..n {
                    let probs = policy_probs(owner, &feats, &params, kind);
                    let mut total = vec![0.0; 2 * k];
                    for (a, p) in probs.iter().enumerate() {
                        for (t, g) in total.iter_mut().zip(score_function(i, owner, a, &feats, &params, kind)) {
                            *t += p * g;
                        }
                    }
                    prop_assert!(total.iter().all(|x| x.abs() <= 1e-12), "{total:?}");
                }
            }
        }
    }

    #[test]
    fn score_matches_finite_differences((theta, feats) in case(2.0), pick in any::<(u8, u8, u8)>()) {
        let (n, k) = (theta.len(), theta[0].len());
        let (i, owner, a) = (pick.0 as usize % n, pick.1 as usize % n, pick.2 as usize % k);
        let h = 1e-6;
        for kind in KINDS {
            let networked = kind == PolicyKind::Networked;
            let closed = score_function(i, owner, a, &feats, &to_params(&theta), kind);
            let fd = common::fd_gradient(&theta, i, h, |t| ref_probs(owner, &feats, t, networked)[a].ln());
            for (c, f) in closed.iter().zip(&fd) {
                prop_assert!((c - f).abs() <= 1e-6, "{closed:?} vs {fd:?}");
            }
            if !networked && i != owner {
                prop_assert!(closed.iter().all(|x| *x == 0.0));
            }
        }
    }

    #[test]
    fn own_intercept_shift_leaves_policy_unchanged((theta, feats) in case(5.0), c in -20.0..20.0f64, pick in any::<u8>()) {
        let i = pick as usize % theta.len();
        let mut shifted = theta.clone();
        for row in &mut shifted[i] {
            row[0] += c;
        }
        for kind in KINDS {
            let p = policy_probs(i, &feats, &to_params(&theta), kind);
            let q = policy_probs(i, &feats, &to_params(&shifted), kind);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn mellow_max_shifts_with_its_inputs(xs in prop::collection::vec(-50.0..50.0f64, 1..8), c in -20.0..20.0f64) {
        let base = mellow_max(&xs).unwrap();
        let moved: Vec<f64> = xs.iter().map(|x| x + c).collect();
        prop_assert!((mellow_max(&moved).unwrap() - base - c).abs() <= 1e-12);
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(base >= lo - 1e-12 && base <= hi + 1e-12);
    }
}

#[test]
fn networked_two_by_two_table() {
    // logits from log-mean-exp over the single other agent, evaluated by hand:
    // agent 0, s = (0.5, 2.0): z(0) = 0.3 + 0.1 - (-0.2 + 0.8) = -0.2,
    // z(1) = -0.4 - 0.25 - (0.5 + 0.0) = -1.15
    let theta: Table = vec![vec![[0.3, 0.2], [-0.4, -0.5]], vec![[-0.2, 0.4], [0.5, 0.0]]];
    let p = policy_probs(0, &[0.5, 2.0], &to_params(&theta), PolicyKind::Networked);
    let expect0 = 1.0 / (1.0 + (-1.15f64 + 0.2).exp());
    assert!((p[0] - expect0).abs() < 1e-15, "{p:?}");
    assert!((p[0] - 0.721_115_178_022_863_1).abs() < 1e-15);
}

#[test]
fn mellow_max_rejects_empty_input() {
    assert!(mellow_max(&[]).is_err());
}
