mod common;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use tipcast_core::corpus::*;
use tipcast_core::fixtures::{synthetic_corpus, CorpusSpec};
use tipcast_core::Error;

fn turn(conv: &str, k: u32, role: Role, label: u8) -> TurnRecord {
    TurnRecord {
        conversation_id: conv.into(),
        participant_id: format!("p-{conv}"),
        turn_index: k,
        role,
        d_label: label,
        text: None,
    }
}

fn small(spec: CorpusSpec, conversations: usize) -> CorpusSpec {
    CorpusSpec { conversations, ..spec }
}

#[test]
fn hand_built_design_row() {
    let rows = build_design(&[turn("c", 0, Role::User, 1), turn("c", 1, Role::Assistant, 0)]).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].outcome, 0);
    assert_eq!(rows[0].prior_d_fraction, 1.0);
    assert_eq!(rows[0].prev_user_d, 1);
    assert_eq!(rows[0].prior_length, 1);

    let none = build_design(&[turn("c", 0, Role::Assistant, 1), turn("c", 1, Role::User, 0)]).unwrap();
    assert!(none.is_empty());

    let zeros: Vec<TurnRecord> = (0..6)
        .map(|k| turn("z", k, if k % 2 == 0 { Role::User } else { Role::Assistant }, 0))
        .collect();
    assert!(build_design(&zeros)
        .unwrap()
        .iter()
        .all(|r| r.prior_d_fraction == 0.0 && r.prev_user_d == 0));
}

#[test]
fn roles_need_not_alternate() {
    let turns = vec![
        turn("c", 0, Role::User, 1),
        turn("c", 1, Role::User, 0),
        turn("c", 2, Role::Assistant, 1),
        turn("c", 3, Role::Assistant, 0),
    ];
    let rows = build_design(&turns).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].prev_user_d, 0);
    assert!((rows[0].prior_d_fraction - 0.5).abs() < 1e-15);
    assert!((rows[1].prior_d_fraction - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn duplicate_turns_and_bad_lines_are_errors() {
    let dup = vec![turn("c", 0, Role::User, 1), turn("c", 0, Role::Assistant, 0)];
    assert!(matches!(
        build_design(&dup),
        Err(Error::DuplicateTurn { turn_index: 0, .. })
    ));
    let bad_role = r#"{"conversation_id":"c","participant_id":"p","turn_index":0,"role":"system","d_label":0}"#;
    assert!(matches!(read_jsonl(bad_role.as_bytes()), Err(Error::UnknownRole(_))));
    let bad_label = r#"{"conversation_id":"c","participant_id":"p","turn_index":0,"role":"user","d_label":2}"#;
    assert!(read_jsonl(bad_label.as_bytes()).is_err());
}

#[test]
fn jsonl_round_trip() {
    let turns = synthetic_corpus(&small(CorpusSpec::planted(), 20), 1);
    let mut buf = Vec::new();
    write_jsonl(&turns, &mut buf).unwrap();
    assert_eq!(read_jsonl(buf.as_slice()).unwrap(), turns);
}

proptest! {
    #[test]
    fn design_is_causal(seed in 0u64..500, conv in 0usize..10, cut in 1u32..16) {
        let turns = synthetic_corpus(&small(CorpusSpec::planted(), 10), seed);
        let id = format!("c{conv:04}");
        let mut changed = turns.clone();
        let mut rng = common::rng(seed);
        for t in changed.iter_mut().filter(|t| t.conversation_id == id && t.turn_index >= cut) {
            t.d_label = rng.random_range(0..=1);
        }
        let before = build_design(&turns).unwrap();
        let after = build_design(&changed).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for (a, b) in before.iter().zip(&after) {
            prop_assert_eq!(a.prior_length_z, b.prior_length_z);
            if a.conversation_id == id && a.turn_index <= cut {
                prop_assert_eq!(a.prior_d_fraction, b.prior_d_fraction);
                prop_assert_eq!(a.prev_user_d, b.prev_user_d);
            }
        }
    }

    #[test]
    fn shuffles_keep_label_multisets(seed in 0u64..10_000) {
        let turns = synthetic_corpus(&small(CorpusSpec::planted(), 15), seed % 7);
        let shuffled = shuffle_labels(&turns, &mut common::rng(seed)).unwrap();
        prop_assert_eq!(label_multisets(&turns), label_multisets(&shuffled));
        for (a, b) in turns.iter().zip(&shuffled) {
            prop_assert_eq!((&a.conversation_id, a.turn_index, a.role), (&b.conversation_id, b.turn_index, b.role));
        }
    }
}

#[test]
fn lag1_examples() {
    let alt: Vec<f64> = (0..20).map(|i| f64::from(i % 2)).collect();
    assert!((lag1_pearson(&alt).unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(lag1_pearson(&[1.0; 10]), None);

    let blocky: Vec<f64> = (0..24).map(|i| if (i / 2) % 2 == 0 { 1.0 } else { 0.0 }).collect();
    let oracle = common::pearson(&blocky[..23], &blocky[1..]);
    assert!(oracle > 0.0);
    assert!((lag1_pearson(&blocky).unwrap() - oracle).abs() < 1e-12);
}

#[test]
fn pooled_lag1_weights_and_zero_weight() {
    let mut turns = Vec::new();
    let conv = |id: &str, labels: &[u8], out: &mut Vec<TurnRecord>| {
        for (k, &l) in labels.iter().enumerate() {
            out.push(turn(id, 2 * k as u32, Role::User, 0));
            out.push(turn(id, 2 * k as u32 + 1, Role::Assistant, l));
        }
    };
    let a = [0u8, 1, 0, 1, 0, 1];
    let b = [1u8, 1, 0, 0, 1, 1, 0, 0, 1];
    conv("a", &a, &mut turns);
    conv("b", &b, &mut turns);
    conv("flat", &[1, 1, 1, 1], &mut turns);
    conv("single", &[1], &mut turns);
    let report = lag1_autocorr(&turns, Role::Assistant).unwrap();
    let f = |v: &[u8]| v.iter().map(|&x| f64::from(x)).collect::<Vec<f64>>();
    let (ya, yb) = (f(&a), f(&b));
    let ra = common::pearson(&ya[..5], &ya[1..]);
    let rb = common::pearson(&yb[..8], &yb[1..]);
    assert!((report.pooled - (5.0 * ra + 8.0 * rb) / 13.0).abs() < 1e-12);
    assert_eq!(report.weight, 13);
    assert_eq!(report.conversations, 3);
    assert_eq!(report.zero_weight, vec!["flat".to_string()]);

    let lonely = vec![turn("x", 0, Role::Assistant, 1)];
    assert!(lag1_autocorr(&lonely, Role::Assistant).is_err());
}

/// Assistant labels in runs of eight: every shuffle breaks the runs.
fn blocked_corpus() -> Vec<TurnRecord> {
    let mut turns = Vec::new();
    for c in 0..20 {
        let id = format!("blk{c:02}");
        for k in 0..32u32 {
            let label = u8::from(((k + c) / 8) % 2 == 0);
            turns.push(turn(&id, 2 * k, Role::User, 0));
            turns.push(turn(&id, 2 * k + 1, Role::Assistant, label));
        }
    }
    turns
}

#[test]
fn blocked_labels_hit_the_floor() {
    let report = shuffled_null(&blocked_corpus(), Role::Assistant, 100, 4).unwrap();
    assert_eq!(report.mc_p, 1.0 / 101.0);
    assert!(report.observed > 0.7);
    assert!(report.z > 5.0);
}

#[test]
fn iid_labels_sit_inside_the_null() {
    let trials = 40;
    let inside = (0..trials)
        .filter(|&seed| {
            let turns = synthetic_corpus(&small(CorpusSpec::null(), 150), 1000 + seed);
            let r = shuffled_null(&turns, Role::Assistant, 100, seed).unwrap();
            assert!(r.mc_p >= 1.0 / 101.0);
            r.z.abs() <= 2.0
        })
        .count();
    assert!(inside as f64 >= 0.9 * trials as f64, "{inside}/{trials}");
}

#[test]
fn null_is_reproducible() {
    let turns = synthetic_corpus(&small(CorpusSpec::null(), 50), 3);
    assert_eq!(
        shuffled_null(&turns, Role::Assistant, 30, 9).unwrap(),
        shuffled_null(&turns, Role::Assistant, 30, 9).unwrap()
    );
}

/// Plain logistic MLE by Newton's method plus the cluster-robust sandwich.
fn logistic_oracle(rows: &[DesignRow]) -> (Vec<f64>, Vec<f64>) {
    let x = DMatrix::from_fn(rows.len(), 4, |i, j| {
        let r = &rows[i];
        [1.0, r.prior_d_fraction, f64::from(r.prev_user_d), r.prior_length_z][j]
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| f64::from(r.outcome)));
    let mut beta = DVector::zeros(4);
    for _ in 0..50 {
        let mu = (&x * &beta).map(|t| 1.0 / (1.0 + (-t).exp()));
        let w = mu.map(|m| m * (1.0 - m));
        let mut info = DMatrix::zeros(4, 4);
        for i in 0..rows.len() {
            let xi = x.row(i).transpose();
            info += &xi * xi.transpose() * w[i];
        }
        let grad = x.transpose() * (&y - &mu);
        beta += info.lu().solve(&grad).unwrap();
    }
    let mu = (&x * &beta).map(|t| 1.0 / (1.0 + (-t).exp()));
    let mut info = DMatrix::zeros(4, 4);
    let mut per_cluster: BTreeMap<&str, DVector<f64>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let xi = x.row(i).transpose();
        info += &xi * xi.transpose() * (mu[i] * (1.0 - mu[i]));
        *per_cluster.entry(&r.cluster).or_insert_with(|| DVector::zeros(4)) += &xi * (y[i] - mu[i]);
    }
    let meat = per_cluster
        .values()
        .fold(DMatrix::zeros(4, 4), |m, u| m + u * u.transpose());
    let inv = info.try_inverse().unwrap();
    let cov = &inv * meat * &inv;
    (
        beta.iter().copied().collect(),
        (0..4).map(|j| cov[(j, j)].sqrt()).collect(),
    )
}

#[test]
fn independence_fit_matches_logistic_oracle() {
    let rows = build_design(&synthetic_corpus(&small(CorpusSpec::planted(), 300), 8)).unwrap();
    let fit = fit_clustered_logistic(&rows, Correlation::Independence).unwrap();
    let (beta, se) = logistic_oracle(&rows);
    assert_eq!(fit.alpha, 0.0);
    for (j, c) in fit.coefficients.iter().enumerate() {
        assert!(
            (c.estimate - beta[j]).abs() < 1e-7,
            "{} {} vs {}",
            c.name,
            c.estimate,
            beta[j]
        );
        assert!(
            (c.se - se[j]).abs() < 1e-7 * (1.0 + se[j]),
            "{} se {} vs {}",
            c.name,
            c.se,
            se[j]
        );
        assert!((c.ci_low - (beta[j] - 1.959963984540054 * se[j]).exp()).abs() < 1e-6);
    }
}

#[test]
fn null_corpus_intervals_cover_one() {
    let rows = build_design(&synthetic_corpus(&CorpusSpec::null(), 5)).unwrap();
    let fit = fit_clustered_logistic(&rows, Correlation::Exchangeable).unwrap();
    for name in PREDICTORS {
        assert!(fit.coefficient(name).unwrap().covers(1.0), "{name}");
    }
}

#[test]
fn exchangeable_and_independence_agree_without_cluster_effects() {
    for seed in 0..5 {
        let rows = build_design(&synthetic_corpus(&CorpusSpec::planted(), 200 + seed)).unwrap();
        let ex = fit_clustered_logistic(&rows, Correlation::Exchangeable).unwrap();
        let ind = fit_clustered_logistic(&rows, Correlation::Independence).unwrap();
        for name in PREDICTORS {
            let a = ex.coefficient(name).unwrap().odds_ratio;
            let b = ind.coefficient(name).unwrap().odds_ratio;
            assert!((a / b - 1.0).abs() < 0.10, "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn fit_rejects_degenerate_designs() {
    assert!(fit_clustered_logistic(&[], Correlation::Exchangeable).is_err());
    let rows = build_design(&synthetic_corpus(&small(CorpusSpec::planted(), 40), 2)).unwrap();
    let one_cluster: Vec<DesignRow> = rows
        .iter()
        .cloned()
        .map(|mut r| {
            r.cluster = "only".into();
            r
        })
        .collect();
    assert!(fit_clustered_logistic(&one_cluster, Correlation::Exchangeable).is_err());
    let constant: Vec<DesignRow> = rows
        .iter()
        .cloned()
        .map(|mut r| {
            r.prev_user_d = 0;
            r
        })
        .collect();
    assert!(matches!(
        fit_clustered_logistic(&constant, Correlation::Exchangeable),
        Err(Error::Singular(_))
    ));
    // Outcome equal to the previous user label: perfect separation.
    let separated: Vec<DesignRow> = rows
        .iter()
        .cloned()
        .map(|mut r| {
            r.outcome = r.prev_user_d;
            r
        })
        .collect();
    assert!(matches!(
        fit_clustered_logistic(&separated, Correlation::Independence),
        Err(Error::NonConvergence { .. })
    ));
}
