//! Oracles shared by the integration tests. Each one is written from the
//! definition, without calling into the library code it checks.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tipcast_core::regime::{iterate_map, symbolize_numeric, MapParams, Regime};
use tipcast_core::Label;

/// Largest connected component fraction, by an explicit adjacency matrix
/// and depth-first search.
pub fn brute_g(vectors: &[(Label, Vec<f64>)], threshold: f64) -> (f64, Vec<usize>) {
    let n = vectors.len();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let (a, b) = (&vectors[i].1, &vectors[j].1);
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                adj[i][j] = d / (norm(a) * norm(b)) >= threshold;
            }
        }
    }
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for v in 0..n {
                if adj[u][v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    (sizes[0] as f64 / n as f64, sizes)
}

/// A random labelled population whose vectors cluster around a few
/// directions, so that typical thresholds give a mix of edges and gaps.
pub fn random_population(rng: &mut ChaCha8Rng, max_n: usize, dim: usize) -> Vec<(Label, Vec<f64>)> {
    let n = rng.random_range(1..=max_n);
    let centres: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    (0..n)
        .map(|_| {
            let c = &centres[rng.random_range(0..centres.len())];
            let spread = rng.random_range(0.0..0.6);
            let mut v: Vec<f64> = c.iter().map(|x| x + spread * rng.random_range(-1.0..1.0)).collect();
            if v.iter().all(|x| *x == 0.0) {
                v[0] = 1.0;
            }
            let label = Label::ALL[rng.random_range(0..Label::ALL.len())];
            (label, v)
        })
        .collect()
}

/// Zero-noise iteration of `x ← x + λx(1−ρx)`.
pub fn map_oracle(lambda: f64, rho: f64, x0: f64, steps: usize) -> Vec<f64> {
    let mut xs = vec![x0];
    for _ in 0..steps {
        let x = *xs.last().unwrap();
        xs.push(x + lambda * x * (1.0 - rho * x));
    }
    xs
}

/// Textbook Pearson correlation of two equal-length samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Shannon entropy of symbol frequencies, normalised by ln(alphabet seen).
pub fn normalized_entropy(symbols: &[u32]) -> f64 {
    let mut counts = std::collections::HashMap::new();
    for s in symbols {
        *counts.entry(*s).or_insert(0usize) += 1;
    }
    if counts.len() < 2 {
        return 0.0;
    }
    let n = symbols.len() as f64;
    let h: f64 = counts.values().map(|&c| c as f64 / n).map(|p| -p * p.ln()).sum();
    h / (counts.len() as f64).ln()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn orbit(lambda: f64, steps: usize) -> Vec<f64> {
    iterate_map(&MapParams {
        lambda,
        rho: 1.0,
        noise_sigma: 0.0,
        x0: 0.2,
        steps,
        seed: 0,
    })
    .unwrap()
}

/// Four synthetic trajectory families with their expected regimes: a
/// settling fixed point, the settled period-2 and period-3 orbits, and a
/// seeded uniform 5-symbol string.
pub fn regime_families() -> Vec<(Regime, Vec<u32>)> {
    let mut r = rng(2024);
    let noise: Vec<u32> = (0..200).map(|_| r.random_range(0..5)).collect();
    vec![
        (Regime::F, symbolize_numeric(&orbit(1.5, 200), 4).unwrap().symbols),
        (
            Regime::C2,
            symbolize_numeric(&orbit(2.1, 400)[201..], 2).unwrap().symbols,
        ),
        (
            Regime::Cq(3),
            symbolize_numeric(&orbit(2.83, 1000)[801..], 3).unwrap().symbols,
        ),
        (Regime::N, noise),
    ]
}
