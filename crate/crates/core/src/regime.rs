//! Noisy logistic-like map, trajectory symbolisation and the seven-regime
//! classifier.
//!
//! The map `x ← x + λx(1−ρx) + η` is conjugate to the quadratic map with
//! `r = 1 + λ`: for `0 < λ < 2` it settles on the fixed point `1/ρ`, and
//! just above `λ = 2` on a period-2 cycle.
//!
//! Trajectories are reduced to symbol sequences (sentence clusters for text,
//! equal-width bins for numbers) and classified from a handful of
//! diagnostics computed on the trailing 80% of the sequence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::cohesion::components_from_edges;
use crate::error::{Error, Result};

pub const DEFAULT_TEXT_THRESHOLD: f64 = 0.45;
pub const MIN_CLASSIFY_LEN: usize = 10;
pub const MAX_CYCLE: usize = 8;
const NGRAM_SIZES: std::ops::RangeInclusive<usize> = 3..=5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub lambda: f64,
    pub rho: f64,
    pub noise_sigma: f64,
    pub x0: f64,
    pub steps: usize,
    pub seed: u64,
}

/// `x_0 ..= x_steps`. Noise is drawn from the seeded stream only when
/// `noise_sigma > 0`.
pub fn iterate_map(p: &MapParams) -> Result<Vec<f64>> {
    let finite = [p.lambda, p.rho, p.noise_sigma, p.x0].iter().all(|v| v.is_finite());
    if !finite || p.rho <= 0.0 || p.noise_sigma < 0.0 || p.steps == 0 {
        return Err(Error::InvalidParameter(format!(
            "map parameters need finite values, rho > 0, sigma ≥ 0, steps ≥ 1 (got {p:?})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let noise =
        Normal::new(0.0, p.noise_sigma.max(f64::MIN_POSITIVE)).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut xs = Vec::with_capacity(p.steps + 1);
    let mut x = p.x0;
    xs.push(x);
    for step in 1..=p.steps {
        let eta = if p.noise_sigma > 0.0 {
            noise.sample(&mut rng)
        } else {
            0.0
        };
        x = x + p.lambda * x * (1.0 - p.rho * x) + eta;
        if !x.is_finite() {
            return Err(Error::Diverged { step, value: x });
        }
        xs.push(x);
    }
    Ok(xs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Frozen on one symbol.
    F,
    /// One dominant symbol with rare excursions.
    S,
    /// Exact period 2.
    C2,
    /// Exact period `q` in `3..=8`.
    Cq(u32),
    /// Long laminar runs with deterministic escapes.
    I,
    /// Structured but aperiodic.
    X,
    /// Noise.
    N,
}

impl Regime {
    /// One-letter form used in cascade strings; all cycles render as `C`.
    pub fn letter(self) -> char {
        match self {
            Regime::F => 'F',
            Regime::S => 'S',
            Regime::C2 | Regime::Cq(_) => 'C',
            Regime::I => 'I',
            Regime::X => 'X',
            Regime::N => 'N',
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Cq(q) => write!(f, "C{q}"),
            other => write!(f, "{other:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Length of the trailing window the other fields describe.
    pub window: usize,
    /// Minimal exact period with at least four repetitions in the window.
    pub period: Option<usize>,
    /// Shannon entropy over `ln(observed alphabet size)`.
    pub entropy: f64,
    /// Mean over states of the largest outgoing transition probability.
    pub determinism: f64,
    pub max_run_fraction: f64,
    pub switch_rate: f64,
    pub dominant_symbol_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicTrajectory {
    pub symbols: Vec<u32>,
    /// Positions whose input produced no features (empty or very short
    /// sentences); each got its own symbol.
    #[serde(default)]
    pub flagged: Vec<usize>,
    #[serde(default)]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default)]
    pub regime: Option<Regime>,
}

impl SymbolicTrajectory {
    pub fn new(symbols: Vec<u32>) -> Self {
        Self {
            symbols,
            flagged: Vec::new(),
            diagnostics: None,
            regime: None,
        }
    }

    /// Symbols as letters `A`, `B`, … (then `[26]`, `[27]`, …).
    pub fn letters(&self) -> String {
        self.symbols
            .iter()
            .map(|&s| match char::from_u32('A' as u32 + s) {
                Some(c) if s < 26 => c.to_string(),
                _ => format!("[{s}]"),
            })
            .collect()
    }

    /// Parses a letter string such as `"ABAB"`.
    pub fn from_letters(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                if c.is_ascii_uppercase() {
                    Ok(c as u32 - 'A' as u32)
                } else {
                    Err(Error::InvalidParameter(format!("symbol {c:?} is not A-Z")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Fills in diagnostics and regime.
    pub fn classified(mut self, thresholds: &Thresholds) -> Result<Self> {
        let regime = classify(&self.symbols, thresholds)?;
        self.diagnostics = Some(diagnostics(&self.symbols)?);
        self.regime = Some(regime);
        Ok(self)
    }
}

/// Sentences of `text` by Unicode sentence boundaries, trimmed, empties
/// dropped.
pub fn split_sentences(text: &str) -> Vec<String> {
    text.unicode_sentences()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn char_ngrams(sentence: &str) -> HashMap<String, f64> {
    let chars: Vec<char> = sentence.to_lowercase().chars().collect();
    let mut counts = HashMap::new();
    for n in NGRAM_SIZES {
        for w in chars.windows(n) {
            *counts.entry(w.iter().collect::<String>()).or_insert(0.0) += 1.0;
        }
    }
    counts
}

/// L2-normalised TF-IDF rows over character 3- to 5-grams, with
/// `idf = ln((1+N)/(1+df)) + 1`. Sentences with no n-grams give empty rows.
pub fn tfidf_rows(sentences: &[impl AsRef<str>]) -> Vec<HashMap<String, f64>> {
    let counts: Vec<_> = sentences.iter().map(|s| char_ngrams(s.as_ref())).collect();
    let mut df: HashMap<&str, f64> = HashMap::new();
    for row in &counts {
        for gram in row.keys() {
            *df.entry(gram.as_str()).or_insert(0.0) += 1.0;
        }
    }
    let n = sentences.len() as f64;
    counts
        .iter()
        .map(|row| {
            let mut weighted: HashMap<String, f64> = row
                .iter()
                .map(|(g, tf)| (g.clone(), tf * (((1.0 + n) / (1.0 + df[g.as_str()])).ln() + 1.0)))
                .collect();
            let mut squares: Vec<(&String, f64)> = weighted.iter().map(|(g, w)| (g, w * w)).collect();
            squares.sort_by(|x, y| x.0.cmp(y.0));
            let norm = squares.iter().map(|t| t.1).sum::<f64>().sqrt();
            if norm > 0.0 {
                weighted.values_mut().for_each(|w| *w /= norm);
            }
            weighted
        })
        .collect()
}

fn sparse_dot(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    // Sum in a fixed order so results do not depend on hash iteration.
    let mut terms: Vec<(&String, f64)> = small
        .iter()
        .filter_map(|(g, w)| large.get(g).map(|v| (g, w * v)))
        .collect();
    terms.sort_by(|x, y| x.0.cmp(y.0));
    terms.iter().map(|t| t.1).sum()
}

/// One symbol per sentence: connected components of the TF-IDF cosine graph
/// at `threshold`, numbered by first appearance.
pub fn symbolize_text(sentences: &[impl AsRef<str>], threshold: f64) -> Result<SymbolicTrajectory> {
    if sentences.is_empty() {
        return Err(Error::Empty("no sentences"));
    }
    if !threshold.is_finite() {
        return Err(Error::InvalidParameter("similarity threshold must be finite".into()));
    }
    let rows = tfidf_rows(sentences);
    let flagged: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_empty())
        .map(|(i, _)| i)
        .collect();
    let mut edges = Vec::new();
    for i in 0..rows.len() {
        if rows[i].is_empty() {
            continue;
        }
        for j in (i + 1)..rows.len() {
            if !rows[j].is_empty() && sparse_dot(&rows[i], &rows[j]) >= threshold {
                edges.push((i, j));
            }
        }
    }
    let symbols = components_from_edges(rows.len(), edges)
        .into_iter()
        .map(|c| c as u32)
        .collect();
    Ok(SymbolicTrajectory {
        symbols,
        flagged,
        diagnostics: None,
        regime: None,
    })
}

/// Equal-width binning of `xs` over `[min, max]`.
pub fn symbolize_numeric(xs: &[f64], bins: usize) -> Result<SymbolicTrajectory> {
    if xs.is_empty() {
        return Err(Error::Empty("no values"));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be ≥ 1".into()));
    }
    if let Some(v) = xs.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite value {v} in series")));
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    let symbols = xs
        .iter()
        .map(|&x| {
            if width == 0.0 {
                0
            } else {
                (((x - lo) / width * bins as f64).floor() as usize).min(bins - 1) as u32
            }
        })
        .collect();
    Ok(SymbolicTrajectory::new(symbols))
}

/// The trailing 80% of `symbols` (rounded up).
pub fn trailing_window(symbols: &[u32]) -> &[u32] {
    let keep = (symbols.len() * 4).div_ceil(5);
    &symbols[symbols.len() - keep..]
}

fn exact_period(w: &[u32]) -> Option<usize> {
    (1..=w.len() / 4).find(|&p| w.iter().zip(&w[p..]).all(|(a, b)| a == b))
}

/// Diagnostics on the trailing window of `symbols`.
pub fn diagnostics(symbols: &[u32]) -> Result<Diagnostics> {
    if symbols.is_empty() {
        return Err(Error::Empty("no symbols"));
    }
    let w = trailing_window(symbols);
    let n = w.len() as f64;

    let mut freq: BTreeMap<u32, usize> = BTreeMap::new();
    for &s in w {
        *freq.entry(s).or_default() += 1;
    }
    let dominant = *freq.values().max().expect("nonempty") as f64 / n;
    let entropy = if freq.len() < 2 {
        0.0
    } else {
        // Summed over sorted counts so relabelling symbols cannot change
        // the rounding.
        let mut counts: Vec<usize> = freq.values().copied().collect();
        counts.sort_unstable();
        let h: f64 = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum();
        h / (freq.len() as f64).ln()
    };

    let mut longest = 1usize;
    let mut run = 1usize;
    let mut switches = 0usize;
    for pair in w.windows(2) {
        if pair[0] == pair[1] {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 1;
            switches += 1;
        }
    }

    let mut transitions: BTreeMap<u32, BTreeMap<u32, usize>> = BTreeMap::new();
    for pair in w.windows(2) {
        *transitions.entry(pair[0]).or_default().entry(pair[1]).or_default() += 1;
    }
    let determinism = if transitions.is_empty() {
        1.0
    } else {
        let mut shares: Vec<f64> = transitions
            .values()
            .map(|next| {
                let total: usize = next.values().sum();
                *next.values().max().expect("nonempty") as f64 / total as f64
            })
            .collect();
        shares.sort_by(f64::total_cmp);
        shares.iter().sum::<f64>() / transitions.len() as f64
    };

    Ok(Diagnostics {
        window: w.len(),
        period: exact_period(w),
        entropy,
        determinism,
        max_run_fraction: longest as f64 / n,
        switch_rate: if w.len() > 1 { switches as f64 / (n - 1.0) } else { 0.0 },
        dominant_symbol_share: dominant,
    })
}

/// Cut-offs of the decision cascade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub frozen_dominant: f64,
    pub frozen_run: f64,
    pub sparse_dominant: f64,
    pub sparse_switch: f64,
    pub intermittent_determinism: f64,
    pub intermittent_run: f64,
    pub noise_entropy: f64,
    pub noise_determinism: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            frozen_dominant: 0.95,
            frozen_run: 0.90,
            sparse_dominant: 0.90,
            sparse_switch: 0.05,
            intermittent_determinism: 0.80,
            intermittent_run: 0.30,
            noise_entropy: 0.85,
            noise_determinism: 0.55,
        }
    }
}

/// Regime from diagnostics alone.
pub fn regime_of(d: &Diagnostics, t: &Thresholds) -> Regime {
    if d.dominant_symbol_share >= t.frozen_dominant && d.max_run_fraction >= t.frozen_run {
        return Regime::F;
    }
    if d.dominant_symbol_share >= t.sparse_dominant && d.switch_rate < t.sparse_switch {
        return Regime::S;
    }
    match d.period {
        Some(2) => return Regime::C2,
        Some(p @ 3..=MAX_CYCLE) => return Regime::Cq(p as u32),
        _ => {}
    }
    if d.determinism >= t.intermittent_determinism && d.max_run_fraction >= t.intermittent_run {
        return Regime::I;
    }
    if d.entropy >= t.noise_entropy && d.determinism < t.noise_determinism {
        return Regime::N;
    }
    Regime::X
}

pub fn classify(symbols: &[u32], thresholds: &Thresholds) -> Result<Regime> {
    if symbols.len() < MIN_CLASSIFY_LEN {
        return Err(Error::TooShort {
            len: symbols.len(),
            min: MIN_CLASSIFY_LEN,
        });
    }
    Ok(regime_of(&diagnostics(symbols)?, thresholds))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeRow {
    pub temperature: f64,
    pub regime: Regime,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    /// One letter per run, ordered by temperature.
    pub regimes: String,
    pub rows: Vec<CascadeRow>,
}

/// Classifies every run and orders the results by temperature.
pub fn temperature_cascade(runs: &[(f64, SymbolicTrajectory)], thresholds: &Thresholds) -> Result<Cascade> {
    let one = |(t, traj): &(f64, SymbolicTrajectory)| -> Result<CascadeRow> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("temperature {t}")));
        }
        Ok(CascadeRow {
            temperature: *t,
            regime: classify(&traj.symbols, thresholds)?,
            diagnostics: diagnostics(&traj.symbols)?,
        })
    };
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<CascadeRow>> = {
        use rayon::prelude::*;
        runs.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<CascadeRow>> = runs.iter().map(one).collect();
    let mut rows = rows?;
    rows.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    Ok(Cascade {
        regimes: rows.iter().map(|r| r.regime.letter()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, x0: f64) -> MapParams {
        MapParams {
            lambda,
            rho: 1.0,
            noise_sigma: 0.0,
            x0,
            steps: 200,
            seed: 0,
        }
    }

    #[test]
    fn frozen_limit() {
        let xs = iterate_map(&params(0.0, 0.3)).unwrap();
        assert!(xs.iter().all(|&x| x == 0.3));
        assert_eq!(xs.len(), 201);
    }

    #[test]
    fn stable_fixed_point() {
        let xs = iterate_map(&params(1.5, 0.2)).unwrap();
        assert!((xs.last().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn divergence_reports_step() {
        let p = MapParams {
            x0: -5.0,
            ..params(3.0, 0.0)
        };
        match iterate_map(&p) {
            Err(Error::Diverged { step, .. }) => assert!(step > 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn text_symbols() {
        let t = symbolize_text(&["the cat sat", "the cat sat"], 0.45).unwrap();
        assert_eq!(t.symbols, vec![0, 0]);
        let t = symbolize_text(&["aaaa", "zzzz"], 0.45).unwrap();
        assert_eq!(t.symbols, vec![0, 1]);
        let t = symbolize_text(&["ok", "", "hello there"], 0.45).unwrap();
        assert_eq!(t.symbols, vec![0, 1, 2]);
        assert_eq!(t.flagged, vec![0, 1]);
    }

    #[test]
    fn numeric_symbols() {
        assert_eq!(symbolize_numeric(&[2.0; 5], 4).unwrap().symbols, vec![0; 5]);
        let alt: Vec<f64> = (0..6).map(|i| if i % 2 == 0 { 0.1 } else { 0.9 }).collect();
        assert_eq!(symbolize_numeric(&alt, 2).unwrap().letters(), "ABABAB");
    }

    #[test]
    fn cascade_examples() {
        let t = Thresholds::default();
        let rep = |s: &str, n: usize| SymbolicTrajectory::from_letters(&s.repeat(n)).unwrap().symbols;
        assert_eq!(classify(&rep("A", 100), &t).unwrap(), Regime::F);
        assert_eq!(classify(&rep("AB", 50), &t).unwrap(), Regime::C2);
        assert_eq!(classify(&rep("ABC", 40), &t).unwrap(), Regime::Cq(3));
        assert!(matches!(
            classify(&rep("A", 9), &t),
            Err(Error::TooShort { len: 9, .. })
        ));
    }

    #[test]
    fn sparse_and_intermittent() {
        let t = Thresholds::default();
        let mut s = vec![0u32; 100];
        s[50] = 1;
        assert_eq!(classify(&s, &t).unwrap(), Regime::S);
        // Long laminar runs of A broken by short deterministic bursts.
        let unit = format!("{}BC", "A".repeat(40));
        let mut letters = String::new();
        for k in 0..4 {
            letters.push_str(&unit[k..unit.len() - 2]);
            letters.push_str("BC");
        }
        let sym = SymbolicTrajectory::from_letters(&letters).unwrap().symbols;
        let d = diagnostics(&sym).unwrap();
        assert!(d.period.is_none());
        assert_eq!(regime_of(&d, &t), Regime::I);
    }

    #[test]
    fn entropy_normalisation() {
        let d = diagnostics(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
        assert!((d.entropy - 1.0).abs() < 1e-12);
        assert_eq!(d.determinism, 1.0);
        assert_eq!(d.switch_rate, 1.0);
        assert_eq!(d.window, 8);
    }

    #[test]
    fn cascade_orders_by_temperature() {
        let t = Thresholds::default();
        let frozen = SymbolicTrajectory::from_letters(&"A".repeat(20)).unwrap();
        let cycle = SymbolicTrajectory::from_letters(&"AB".repeat(10)).unwrap();
        let c = temperature_cascade(&[(0.9, cycle), (0.1, frozen)], &t).unwrap();
        assert_eq!(c.regimes, "FC");
        assert_eq!(c.rows[0].temperature, 0.1);
    }

    #[test]
    fn sentence_split() {
        let s = split_sentences("The sky is blue. It is day!  Really?");
        assert_eq!(s, vec!["The sky is blue.", "It is day!", "Really?"]);
    }
}
