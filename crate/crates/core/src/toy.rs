//! A single transformer block driven by greedy decoding over three lifted
//! token classes.
//!
//! Three base embeddings `a`, `b`, `d` in `R³` are lifted to the model space
//! by tiling them once per head and scaling by `1/√H`, which preserves inner
//! products exactly. Generation starts from `[lift(a)]`; each step runs the
//! block, decodes the final-position output against the lifted vocabulary
//! and appends the winning token. A run "tips" at the first `D` emission.
//!
//! Weights are per-head block selectors plus Gaussian noise, an output
//! projection `I + noise`, and a Gaussian SwiGLU feed-forward. All weights
//! are always drawn from the seeded stream in a fixed order, so presets that
//! differ only in their flags share identical weights for a given seed.

use std::collections::BTreeMap;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsf::Label;
use crate::vector::dot;

pub const BASE_DIM: usize = 3;
pub const HEADS: usize = 10;
pub const D_HEAD: usize = 3;
pub const D_MODEL: usize = HEADS * D_HEAD;
pub const D_FF: usize = 120;
pub const MAX_STEPS: usize = 12;
pub const NORM_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub d_model: usize,
    pub heads: usize,
    pub d_head: usize,
    pub d_ff: usize,
    pub sigma_qkv: f64,
    pub sigma_o: f64,
    pub sigma_in: f64,
    pub sigma_out: f64,
    pub use_skip: bool,
    pub use_norm: bool,
    pub use_mlp: bool,
    /// `false` replaces the `H` narrow heads with one head spanning the
    /// whole model width.
    pub multi_head: bool,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Preset::Full.config(0)
    }
}

impl BlockConfig {
    pub fn validate(&self) -> Result<()> {
        if self.heads == 0 || self.d_head == 0 || self.d_ff == 0 {
            return Err(Error::InvalidParameter("block sizes must be positive".into()));
        }
        if self.d_model != self.heads * self.d_head {
            return Err(Error::InvalidParameter(format!(
                "d_model {} != heads {} × d_head {}",
                self.d_model, self.heads, self.d_head
            )));
        }
        let sigmas = [self.sigma_qkv, self.sigma_o, self.sigma_in, self.sigma_out];
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidParameter("noise scales must be finite and ≥ 0".into()));
        }
        Ok(())
    }

    pub fn zero_noise(mut self) -> Self {
        self.sigma_qkv = 0.0;
        self.sigma_o = 0.0;
        self.sigma_in = 0.0;
        self.sigma_out = 0.0;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn attention_heads(&self) -> (usize, usize) {
        if self.multi_head {
            (self.heads, self.d_head)
        } else {
            (1, self.d_model)
        }
    }
}

/// Named component combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Attention only.
    Bare,
    /// Attention plus residual connection.
    Skip,
    /// Pre-norm attention and SwiGLU sublayers with residuals.
    Full,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Bare, Preset::Skip, Preset::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Bare => "bare",
            Preset::Skip => "skip",
            Preset::Full => "full",
        }
    }

    pub fn config(self, seed: u64) -> BlockConfig {
        let (use_skip, use_norm, use_mlp) = match self {
            Preset::Bare => (false, false, false),
            Preset::Skip => (true, false, false),
            Preset::Full => (true, true, true),
        };
        BlockConfig {
            d_model: D_MODEL,
            heads: HEADS,
            d_head: D_HEAD,
            d_ff: D_FF,
            sigma_qkv: 0.05 / (D_MODEL as f64).sqrt(),
            sigma_o: 0.05 / (D_MODEL as f64).sqrt(),
            sigma_in: 0.20 / (D_MODEL as f64).sqrt(),
            sigma_out: 0.20 / (D_FF as f64).sqrt(),
            use_skip,
            use_norm,
            use_mlp,
            multi_head: true,
            max_steps: MAX_STEPS,
            seed,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bare" => Ok(Preset::Bare),
            "skip" => Ok(Preset::Skip),
            "full" => Ok(Preset::Full),
            other => Err(Error::InvalidParameter(format!("unknown preset {other:?}"))),
        }
    }
}

/// `H` copies of a base vector, scaled by `1/√H`.
pub fn lift_with(v: &[f64], heads: usize) -> Vec<f64> {
    let scale = 1.0 / (heads as f64).sqrt();
    (0..heads).flat_map(|_| v.iter().map(move |x| x * scale)).collect()
}

/// Lift a base 3-vector into the 30-dimensional model space.
pub fn lift(v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != BASE_DIM {
        return Err(Error::DimMismatch {
            expected: BASE_DIM,
            actual: v.len(),
        });
    }
    Ok(lift_with(v, HEADS))
}

/// Block weights. Matrices act on column vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub config: BlockConfig,
    /// Per head, `d_head × d_model`.
    pub w_q: Vec<DMatrix<f64>>,
    pub w_k: Vec<DMatrix<f64>>,
    pub w_v: Vec<DMatrix<f64>>,
    /// `d_model × d_model`.
    pub w_o: DMatrix<f64>,
    /// `d_ff × d_model`.
    pub w_gate: DMatrix<f64>,
    /// `d_ff × d_model`.
    pub w_up: DMatrix<f64>,
    /// `d_model × d_ff`.
    pub w_down: DMatrix<f64>,
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn matrix(&mut self, rows: usize, cols: usize, sigma: f64) -> DMatrix<f64> {
        let values: Vec<f64> = (0..rows * cols)
            .map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, &mut self.0))
            .collect();
        DMatrix::from_row_slice(rows, cols, &values)
    }
}

/// Draw the weights for `config` from its seed.
pub fn build_block(config: &BlockConfig) -> Result<Block> {
    config.validate()?;
    let mut rng = Sampler(ChaCha8Rng::seed_from_u64(config.seed));
    let (heads, width) = config.attention_heads();
    let dm = config.d_model;
    let selector = |h: usize| DMatrix::from_fn(width, dm, |i, j| if j == h * width + i { 1.0 } else { 0.0 });

    let (mut w_q, mut w_k, mut w_v) = (Vec::new(), Vec::new(), Vec::new());
    for h in 0..heads {
        w_q.push(selector(h) + rng.matrix(width, dm, config.sigma_qkv));
        w_k.push(selector(h) + rng.matrix(width, dm, config.sigma_qkv));
        w_v.push(selector(h) + rng.matrix(width, dm, config.sigma_qkv));
    }
    let w_o = DMatrix::identity(dm, dm) + rng.matrix(dm, dm, config.sigma_o);
    let w_gate = rng.matrix(config.d_ff, dm, config.sigma_in);
    let w_up = rng.matrix(config.d_ff, dm, config.sigma_in);
    let w_down = rng.matrix(dm, config.d_ff, config.sigma_out);
    Ok(Block {
        config: config.clone(),
        w_q,
        w_k,
        w_v,
        w_o,
        w_gate,
        w_up,
        w_down,
    })
}

fn rms_norm(x: &DVector<f64>) -> DVector<f64> {
    let ms = x.norm_squared() / x.len() as f64;
    x / (ms + NORM_EPS).sqrt()
}

fn silu(z: f64) -> f64 {
    z / (1.0 + (-z).exp())
}

fn softmax_weights(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl Block {
    fn attention(&self, xs: &[DVector<f64>]) -> DVector<f64> {
        let last = xs.last().expect("nonempty");
        let (_, width) = self.config.attention_heads();
        let scale = 1.0 / (width as f64).sqrt();
        let mut concat = Vec::with_capacity(self.config.d_model);
        for ((wq, wk), wv) in self.w_q.iter().zip(&self.w_k).zip(&self.w_v) {
            let q = wq * last;
            let scores: Vec<f64> = xs.iter().map(|x| (wk * x).dot(&q) * scale).collect();
            let weights = softmax_weights(&scores);
            let mut head = DVector::zeros(width);
            for (w, x) in weights.iter().zip(xs) {
                head += (wv * x) * *w;
            }
            concat.extend(head.iter());
        }
        &self.w_o * DVector::from_vec(concat)
    }

    fn mlp(&self, x: &DVector<f64>) -> DVector<f64> {
        let gate = (&self.w_gate * x).map(silu);
        let up = &self.w_up * x;
        &self.w_down * gate.component_mul(&up)
    }

    /// Output at the final position of `sequence`.
    pub fn forward<V: AsRef<[f64]>>(&self, sequence: &[V]) -> Result<Vec<f64>> {
        if sequence.is_empty() {
            return Err(Error::Empty("forward needs at least one position"));
        }
        let dm = self.config.d_model;
        let xs = sequence
            .iter()
            .map(|v| {
                let v = v.as_ref();
                if v.len() != dm {
                    return Err(Error::DimMismatch {
                        expected: dm,
                        actual: v.len(),
                    });
                }
                Ok(DVector::from_column_slice(v))
            })
            .collect::<Result<Vec<_>>>()?;
        let cfg = &self.config;
        let normed: Vec<DVector<f64>> = if cfg.use_norm {
            xs.iter().map(rms_norm).collect()
        } else {
            xs.clone()
        };
        let att = self.attention(&normed);
        let last = xs.last().expect("nonempty");
        let mut h = if cfg.use_skip { last + att } else { att };
        if cfg.use_mlp {
            let z = if cfg.use_norm { rms_norm(&h) } else { h.clone() };
            let m = self.mlp(&z);
            h = if cfg.use_skip { h + m } else { m };
        }
        Ok(h.iter().copied().collect())
    }
}

/// Greedy decode of one seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TipRun {
    pub seed: u64,
    pub labels: Vec<Label>,
    /// Index of the first `D` in `labels`.
    pub tip_step: Option<usize>,
}

/// Vocabulary in decode order; the first maximum wins, so ties resolve
/// `B` over `D` over `A`.
const VOCAB: [Label; 3] = [Label::B, Label::D, Label::A];

fn decode(output: &[f64], vocab: &[Vec<f64>; 3]) -> usize {
    let mut best = 0;
    let mut best_score = dot(output, &vocab[0]);
    for (i, v) in vocab.iter().enumerate().skip(1) {
        let s = dot(output, v);
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

fn generate_with(
    seed: u64,
    max_steps: usize,
    vocab: [Vec<f64>; 3],
    start: Vec<f64>,
    mut step: impl FnMut(&[Vec<f64>]) -> Result<Vec<f64>>,
) -> Result<TipRun> {
    let mut sequence = vec![start];
    let mut labels = Vec::new();
    for s in 0..max_steps {
        let out = step(&sequence)?;
        let i = decode(&out, &vocab);
        labels.push(VOCAB[i]);
        sequence.push(vocab[i].clone());
        if VOCAB[i] == Label::D {
            return Ok(TipRun {
                seed,
                labels,
                tip_step: Some(s),
            });
        }
    }
    Ok(TipRun {
        seed,
        labels,
        tip_step: None,
    })
}

fn check_base(vs: [&[f64]; 3]) -> Result<()> {
    for v in vs {
        if v.len() != BASE_DIM {
            return Err(Error::DimMismatch {
                expected: BASE_DIM,
                actual: v.len(),
            });
        }
    }
    Ok(())
}

/// Greedy generation from `[lift(a)]` through `block`, stopping at the first
/// `D` or after `max_steps`.
pub fn greedy_generate(block: &Block, a: &[f64], b: &[f64], d: &[f64]) -> Result<TipRun> {
    check_base([a, b, d])?;
    let heads = block.config.heads;
    let vocab = [lift_with(b, heads), lift_with(d, heads), lift_with(a, heads)];
    generate_with(
        block.config.seed,
        block.config.max_steps,
        vocab,
        lift_with(a, heads),
        |seq| block.forward(seq),
    )
}

/// Score scale at which base-space attention reproduces the zero-noise,
/// attention-only multi-head block: `1/(H·√d_head)`.
pub fn bare_score_scale(config: &BlockConfig) -> f64 {
    1.0 / (config.heads as f64 * (config.d_head as f64).sqrt())
}

/// Single-head attention directly in base space with query = last position
/// and scores `scale · q·k`.
pub fn bare_attention<V: AsRef<[f64]>>(sequence: &[V], scale: f64) -> Result<Vec<f64>> {
    let last = sequence
        .last()
        .ok_or(Error::Empty("attention needs at least one position"))?
        .as_ref();
    let scores: Vec<f64> = sequence.iter().map(|k| scale * dot(k.as_ref(), last)).collect();
    let weights = softmax_weights(&scores);
    let mut out = vec![0.0; last.len()];
    for (w, v) in weights.iter().zip(sequence) {
        out.iter_mut().zip(v.as_ref()).for_each(|(o, x)| *o += w * x);
    }
    Ok(out)
}

/// Greedy generation with [`bare_attention`] in base space.
pub fn bare_generate(a: &[f64], b: &[f64], d: &[f64], scale: f64, max_steps: usize) -> Result<TipRun> {
    check_base([a, b, d])?;
    let vocab = [b.to_vec(), d.to_vec(), a.to_vec()];
    generate_with(0, max_steps, vocab, a.to_vec(), |seq| bare_attention(seq, scale))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub config: BlockConfig,
    pub runs: Vec<TipRun>,
    pub tipped: usize,
    pub untipped: usize,
    /// Over tipped runs; `None` when nothing tipped.
    pub mean: Option<f64>,
    /// Sample standard deviation over tipped runs.
    pub std: Option<f64>,
    pub median: Option<f64>,
    pub mode: Option<usize>,
    /// Share of all runs at the modal step.
    pub mode_share: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl SweepStats {
    pub fn from_runs(config: BlockConfig, runs: Vec<TipRun>) -> Self {
        let mut steps: Vec<usize> = runs.iter().filter_map(|r| r.tip_step).collect();
        steps.sort_unstable();
        let mut histogram = BTreeMap::new();
        for &s in &steps {
            *histogram.entry(s).or_insert(0usize) += 1;
        }
        let n = steps.len();
        let mean = (n > 0).then(|| steps.iter().sum::<usize>() as f64 / n as f64);
        let std = mean.map(|m| {
            if n < 2 {
                0.0
            } else {
                let ss: f64 = steps.iter().map(|&s| (s as f64 - m).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            }
        });
        let median = (n > 0).then(|| {
            if n % 2 == 1 {
                steps[n / 2] as f64
            } else {
                (steps[n / 2 - 1] + steps[n / 2]) as f64 / 2.0
            }
        });
        // Smallest step among equally common ones.
        let mode = histogram
            .iter()
            .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
            .map(|(&s, _)| s);
        let mode_share = match (mode, runs.len()) {
            (Some(m), total) if total > 0 => histogram[&m] as f64 / total as f64,
            _ => 0.0,
        };
        Self {
            config,
            tipped: n,
            untipped: runs.len() - n,
            runs,
            mean,
            std,
            median,
            mode,
            mode_share,
            histogram,
        }
    }
}

/// One run of `config` (its seed replaced) per seed.
pub fn run_seeds(config: &BlockConfig, a: &[f64], b: &[f64], d: &[f64], seeds: Range<u64>) -> Result<Vec<TipRun>> {
    config.validate()?;
    let one = |seed: u64| -> Result<TipRun> {
        let block = build_block(&config.clone().with_seed(seed))?;
        greedy_generate(&block, a, b, d)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.map(one).collect()
    }
}

/// Tip-step statistics for every config over the same seeds.
pub fn seed_sweep(
    configs: &[BlockConfig],
    a: &[f64],
    b: &[f64],
    d: &[f64],
    seeds: Range<u64>,
) -> Result<Vec<SweepStats>> {
    configs
        .iter()
        .map(|cfg| {
            Ok(SweepStats::from_runs(
                cfg.clone(),
                run_seeds(cfg, a, b, d, seeds.clone())?,
            ))
        })
        .collect()
}

/// Parameters of the Case-II embedding family. `b` lies on the first axis,
/// `a` in the first two coordinates, and `d` is placed so that
/// `B·(D−B) = b_drive` and `A·(D−B) = −ratio · b_drive`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseTwoParams {
    pub b_norm: f64,
    /// Cosine between `a` and `b`; must lie strictly inside (−1, 1).
    pub cos_ab: f64,
    pub a_norm: f64,
    pub b_drive: f64,
    pub ratio: f64,
}

/// Base embeddings of one delayed-tipping configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseTwoFixture {
    pub params: CaseTwoParams,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
}

impl CaseTwoParams {
    pub fn build(self) -> Result<CaseTwoFixture> {
        let p = self;
        let ok = p.b_norm > 0.0
            && p.a_norm > 0.0
            && p.b_drive > 0.0
            && p.ratio > 0.0
            && p.cos_ab.abs() < 1.0
            && [p.b_norm, p.a_norm, p.b_drive, p.ratio, p.cos_ab]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid Case-II parameters {p:?}")));
        }
        let b = vec![p.b_norm, 0.0, 0.0];
        let a = vec![p.a_norm * p.cos_ab, p.a_norm * (1.0 - p.cos_ab * p.cos_ab).sqrt(), 0.0];
        let dx = p.b_drive / p.b_norm;
        let x = -p.ratio * p.b_drive;
        let dy = (x - a[0] * dx) / a[1];
        let d = vec![b[0] + dx, dy, 0.0];
        Ok(CaseTwoFixture { params: p, a, b, d })
    }
}

const SHIPPED_CASE_TWO: &str = include_str!("../fixtures/case_two.json");

impl CaseTwoFixture {
    /// The canonical fixture shipped with the crate.
    pub fn shipped() -> Self {
        serde_json::from_str(SHIPPED_CASE_TWO).expect("shipped Case-II fixture parses")
    }

    /// Checks that the stored vectors match the generator output.
    pub fn verify(&self) -> Result<()> {
        let rebuilt = self.params.build()?;
        let close = |u: &[f64], v: &[f64]| u.iter().zip(v).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        if close(&rebuilt.a, &self.a) && close(&rebuilt.b, &self.b) && close(&rebuilt.d, &self.d) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "fixture vectors do not match their parameters".into(),
            ))
        }
    }
}
