mod common;

use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use tipcast_core::regime::*;
use tipcast_core::Error;

fn params(lambda: f64, rho: f64, sigma: f64, x0: f64, steps: usize, seed: u64) -> MapParams {
    MapParams {
        lambda,
        rho,
        noise_sigma: sigma,
        x0,
        steps,
        seed,
    }
}

fn regime(symbols: &[u32]) -> Regime {
    classify(symbols, &Thresholds::default()).unwrap()
}

#[test]
fn zero_noise_map_matches_oracle() {
    for &(lambda, rho, x0) in &[
        (0.0, 1.0, 0.3),
        (1.5, 1.0, 0.2),
        (2.1, 1.0, 0.2),
        (0.7, 0.5, 3.0),
        (2.83, 1.0, 0.2),
    ] {
        let xs = iterate_map(&params(lambda, rho, 0.0, x0, 300, 99)).unwrap();
        assert_eq!(xs, common::map_oracle(lambda, rho, x0, 300));
    }
    let frozen = iterate_map(&params(0.0, 1.0, 0.0, 0.3, 50, 0)).unwrap();
    assert!(frozen.iter().all(|&x| x == 0.3));
}

#[test]
fn fixed_point_and_period_two() {
    for rho in [1.0, 0.25, 4.0] {
        let xs = iterate_map(&params(1.5, rho, 0.0, 0.2 / rho, 200, 0)).unwrap();
        assert!((xs[200] - 1.0 / rho).abs() < 1e-9);
    }
    let xs = iterate_map(&params(2.1, 1.0, 0.0, 0.2, 400, 0)).unwrap();
    let tail = symbolize_numeric(&xs[201..], 2).unwrap();
    assert_eq!(diagnostics(&tail.symbols).unwrap().period, Some(2));
    assert_eq!(regime(&tail.symbols), Regime::C2);
    assert!(tail.letters().starts_with("ABAB") || tail.letters().starts_with("BABA"));
}

#[test]
fn noise_is_seeded() {
    let a = iterate_map(&params(0.5, 1.0, 0.1, 0.5, 100, 7)).unwrap();
    let b = iterate_map(&params(0.5, 1.0, 0.1, 0.5, 100, 7)).unwrap();
    let c = iterate_map(&params(0.5, 1.0, 0.1, 0.5, 100, 8)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn divergence_reports_the_step() {
    match iterate_map(&params(10.0, 1.0, 0.0, 5.0, 100, 0)) {
        Err(Error::Diverged { step, .. }) => assert!(step > 1 && step < 100),
        other => panic!("expected divergence, got {other:?}"),
    }
    assert!(iterate_map(&params(1.0, 0.0, 0.0, 0.5, 10, 0)).is_err());
    assert!(iterate_map(&params(1.0, 1.0, -1.0, 0.5, 10, 0)).is_err());
}

#[test]
fn classifier_examples() {
    let s = |l: &str| SymbolicTrajectory::from_letters(l).unwrap().symbols;
    assert_eq!(regime(&s(&"A".repeat(100))), Regime::F);
    assert_eq!(regime(&s(&"AB".repeat(50))), Regime::C2);
    assert_eq!(regime(&s(&"ABC".repeat(40))), Regime::Cq(3));
    assert!(matches!(
        classify(&s("ABABABABA"), &Thresholds::default()),
        Err(Error::TooShort { len: 9, min: 10 })
    ));
}

#[test]
fn synthetic_families() {
    for (expected, symbols) in common::regime_families() {
        assert_eq!(regime(&symbols), expected);
    }
}

#[test]
fn random_string_diagnostics_match_oracle() {
    let (_, noise) = common::regime_families().pop().unwrap();
    let d = diagnostics(&noise).unwrap();
    let window = &noise[noise.len() - 160..];
    assert_eq!(d.window, 160);
    assert!((d.entropy - common::normalized_entropy(window)).abs() < 1e-12);
    assert!(d.entropy > 0.95);
    assert_eq!(d.period, None);
}

#[test]
fn entropy_grows_with_noise() {
    let means: Vec<f64> = [0.0, 0.05, 0.3]
        .iter()
        .map(|&sigma| {
            let total: f64 = (0..20)
                .map(|seed| {
                    let xs = iterate_map(&params(0.5, 0.25, sigma, 1.0, 200, seed)).unwrap();
                    let sym = symbolize_numeric(&xs, 8).unwrap();
                    let w = trailing_window(&sym.symbols);
                    let h = diagnostics(&sym.symbols).unwrap().entropy;
                    assert!((h - common::normalized_entropy(w)).abs() < 1e-12);
                    h
                })
                .sum();
            total / 20.0
        })
        .collect();
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    assert!(means[2] > means[0]);
}

fn cascade_runs() -> Vec<(f64, SymbolicTrajectory)> {
    (1u32..=11)
        .map(|i| {
            let t = f64::from(i) / 10.0;
            let xs = iterate_map(&params(1.0, 0.01, 2.5 * t, 95.0, 60, u64::from(i - 1))).unwrap();
            (t, symbolize_numeric(&xs, 4).unwrap())
        })
        .collect()
}

#[test]
fn temperature_cascade_runs_from_frozen_to_noise() {
    let mut runs = cascade_runs();
    runs.reverse();
    let cascade = temperature_cascade(&runs, &Thresholds::default()).unwrap();
    assert_eq!(cascade.regimes.len(), 11);
    assert!(cascade.regimes.starts_with('F'), "{}", cascade.regimes);
    assert!(cascade.regimes.ends_with('N'), "{}", cascade.regimes);
    assert!(cascade.rows.windows(2).all(|w| w[0].temperature < w[1].temperature));

    let frozen: Vec<(f64, SymbolicTrajectory)> = (0..4)
        .map(|i| (f64::from(i), SymbolicTrajectory::new(vec![0; 20])))
        .collect();
    assert_eq!(
        temperature_cascade(&frozen, &Thresholds::default()).unwrap().regimes,
        "FFFF"
    );
}

/// Dense TF-IDF cosine over character 3- to 5-grams.
fn tfidf_cosine(sentences: &[&str], i: usize, j: usize) -> f64 {
    let grams = |s: &str| -> HashMap<String, f64> {
        let cs: Vec<char> = s.to_lowercase().chars().collect();
        let mut m = HashMap::new();
        for n in 3..=5 {
            for k in 0..cs.len().saturating_sub(n - 1) {
                *m.entry(cs[k..k + n].iter().collect()).or_insert(0.0) += 1.0;
            }
        }
        m
    };
    let tf: Vec<_> = sentences.iter().map(|s| grams(s)).collect();
    let vocab: BTreeSet<&String> = tf.iter().flat_map(|m| m.keys()).collect();
    let n = sentences.len() as f64;
    let vec_of = |m: &HashMap<String, f64>| -> Vec<f64> {
        vocab
            .iter()
            .map(|g| {
                let df = tf.iter().filter(|t| t.contains_key(*g)).count() as f64;
                m.get(*g).copied().unwrap_or(0.0) * (((1.0 + n) / (1.0 + df)).ln() + 1.0)
            })
            .collect()
    };
    let (a, b) = (vec_of(&tf[i]), vec_of(&tf[j]));
    let d: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    d / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
}

#[test]
fn text_symbolisation_examples() {
    let same = symbolize_text(&["the cat sat", "the cat sat"], DEFAULT_TEXT_THRESHOLD).unwrap();
    assert_eq!(same.letters(), "AA");
    assert_eq!(
        symbolize_text(&["aaaa", "zzzz"], DEFAULT_TEXT_THRESHOLD)
            .unwrap()
            .letters(),
        "AB"
    );

    let s = [
        "The horizon looks flat from here.",
        "The horizon looks flat from the beach.",
        "Quixotic jazz vows.",
    ];
    assert!(tfidf_cosine(&s, 0, 1) >= DEFAULT_TEXT_THRESHOLD);
    assert!(tfidf_cosine(&s, 0, 2) < DEFAULT_TEXT_THRESHOLD);
    assert!(tfidf_cosine(&s, 1, 2) < DEFAULT_TEXT_THRESHOLD);
    assert_eq!(symbolize_text(&s, DEFAULT_TEXT_THRESHOLD).unwrap().letters(), "AAB");

    let rows = tfidf_rows(&s);
    let dot: f64 = rows[0].iter().filter_map(|(g, w)| rows[1].get(g).map(|v| w * v)).sum();
    assert!((dot - tfidf_cosine(&s, 0, 1)).abs() < 1e-12);

    let flagged = symbolize_text(&["ok", "the cat sat", "no"], DEFAULT_TEXT_THRESHOLD).unwrap();
    assert_eq!(flagged.flagged, vec![0, 2]);
    assert_eq!(flagged.letters(), "ABC");
    assert_eq!(
        split_sentences("One here. Two there! Three?"),
        vec!["One here.", "Two there!", "Three?"]
    );
}

#[test]
fn numeric_symbolisation_examples() {
    assert_eq!(symbolize_numeric(&[2.0; 12], 4).unwrap().letters(), "A".repeat(12));
    let alt: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }).collect();
    assert_eq!(symbolize_numeric(&alt, 2).unwrap().letters(), "ABABABABAB");
    assert!(symbolize_numeric(&[], 2).is_err());
    assert!(symbolize_numeric(&[1.0, f64::NAN], 2).is_err());
}

proptest! {
    #[test]
    fn relabelling_symbols_keeps_the_regime(
        symbols in proptest::collection::vec(0u32..5, 10..120),
        perm in Just([0u32, 1, 2, 3, 4]).prop_shuffle(),
    ) {
        let relabelled: Vec<u32> = symbols.iter().map(|&s| perm[s as usize]).collect();
        let t = Thresholds::default();
        prop_assert_eq!(classify(&symbols, &t).unwrap(), classify(&relabelled, &t).unwrap());
        prop_assert_eq!(diagnostics(&symbols).unwrap(), diagnostics(&relabelled).unwrap());
    }

    #[test]
    fn diagnostics_stay_in_range(symbols in proptest::collection::vec(0u32..6, 1..200)) {
        let d = diagnostics(&symbols).unwrap();
        for v in [d.entropy, d.determinism, d.max_run_fraction, d.switch_rate, d.dominant_symbol_share] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
        if let Some(p) = d.period {
            prop_assert!(p * 4 <= d.window);
        }
    }
}
