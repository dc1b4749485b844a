//! Deterministic synthetic fixtures.
//!
//! None of these come from a real model. They exist so every pipeline can be
//! exercised without a model runtime, and their geometry is chosen so the
//! expected outcome is known in advance. The files under `fixtures/` are the
//! byte-exact output of these generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

use crate::corpus::{Role, TurnRecord};
use crate::error::Result;
use crate::hsf::{Group, Label, LabeledStateSet};

/// Per-layer target vector plus independent Gaussian jitter per token.
fn jittered_group(
    rng: &mut ChaCha8Rng,
    label: Label,
    phrase: &str,
    tokens: usize,
    targets: &[Vec<f64>],
    jitter: f64,
) -> Result<Group> {
    let layers: Vec<Vec<Vec<f32>>> = targets
        .iter()
        .map(|t| {
            (0..tokens)
                .map(|_| {
                    t.iter()
                        .map(|&v| {
                            let z: f64 = StandardNormal.sample(rng);
                            (v + jitter * z) as f32
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Group::from_layers(label, phrase, &layers)
}

fn axis(dim: usize, i: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = scale;
    v
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub const STANDIN_LAYERS: usize = 13;
pub const STANDIN_DIM: usize = 16;

const B_PHRASES: [&str; 6] = [
    "The Earth is an oblate spheroid.",
    "Satellite images show a round planet.",
    "Ships vanish hull-first over the horizon.",
    "Lunar eclipses cast a curved shadow.",
    "Circumnavigation has been done many times.",
    "Gravity pulls matter into a sphere.",
];
const D_PHRASES: [&str; 6] = [
    "The Earth is flat.",
    "The horizon always looks level.",
    "Space agencies fake the photos.",
    "Antarctica is an ice wall at the rim.",
    "Water never curves.",
    "Nobody has seen the curvature.",
];

/// Synthetic stand-in for a small-model extraction of a prompt that tips
/// immediately: the order parameter is slightly negative at the first
/// layers, turns positive mid-depth and grows with the residual norm, so
/// the penultimate layer forecasts `n* = 0`.
pub fn immediate_standin() -> Result<LabeledStateSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dim = STANDIN_DIM;
    let mut b_targets = Vec::new();
    let mut d_targets = Vec::new();
    let mut c_targets = Vec::new();
    for layer in 0..STANDIN_LAYERS {
        let l = layer as f64;
        let r = 1.0 + 0.6 * l;
        let gap = 0.2 + 0.15 * l;
        // Projection of the prompt onto the axis direction.
        let k = -0.3 + 0.12 * l * l / 4.0;
        let b = axis(dim, 0, r);
        let d = add(&b, &axis(dim, 1, gap));
        let c = add(&add(&axis(dim, 0, 0.9 * r), &axis(dim, 1, k)), &axis(dim, 2, 0.3 * r));
        b_targets.push(b);
        d_targets.push(d);
        c_targets.push(c);
    }
    let mut groups = vec![jittered_group(
        &mut rng,
        Label::A,
        "Is the Earth flat? Explain.",
        7,
        &c_targets,
        0.02,
    )?];
    for (i, p) in B_PHRASES.iter().enumerate() {
        groups.push(jittered_group(&mut rng, Label::B, p, 4 + i % 3, &b_targets, 0.02)?);
    }
    for (i, p) in D_PHRASES.iter().enumerate() {
        groups.push(jittered_group(&mut rng, Label::D, p, 3 + i % 4, &d_targets, 0.02)?);
    }
    let mut set = LabeledStateSet::with_groups(dim, STANDIN_LAYERS, groups)?;
    set.meta = Some(json!({
        "source": "synthetic",
        "generator": "tipcast_core::fixtures::immediate_standin",
        "note": "geometric stand-in; not extracted from any model",
    }));
    Ok(set)
}

pub const REPLAY_LAYERS: usize = 3;
pub const REPLAY_DIM: usize = 8;
/// Turn at which the running context first crosses to `x ≥ 0`.
pub const REPLAY_CROSSING_TURN: usize = 4;

fn replay_basin_targets() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let dim = REPLAY_DIM;
    let b = axis(dim, 0, 2.0);
    let d = add(&add(&b, &axis(dim, 0, 0.01)), &axis(dim, 1, 1.0));
    let per_layer =
        |v: &[f64]| -> Vec<Vec<f64>> { (0..REPLAY_LAYERS).map(|l| scaled(v, 0.5 + 0.5 * l as f64)).collect() };
    (per_layer(&b), per_layer(&d))
}

/// Basin file for the replay fixture: six `B` and six `D` phrases.
pub fn replay_basins() -> Result<LabeledStateSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (b, d) = replay_basin_targets();
    let mut groups = Vec::new();
    for (i, p) in B_PHRASES.iter().enumerate() {
        groups.push(jittered_group(&mut rng, Label::B, p, 3 + i % 2, &b, 0.005)?);
    }
    for (i, p) in D_PHRASES.iter().enumerate() {
        groups.push(jittered_group(&mut rng, Label::D, p, 2 + i % 3, &d, 0.005)?);
    }
    let mut set = LabeledStateSet::with_groups(REPLAY_DIM, REPLAY_LAYERS, groups)?;
    set.meta = Some(json!({"source": "synthetic", "generator": "tipcast_core::fixtures::replay_basins"}));
    Ok(set)
}

/// A ten-turn conversation, one `C` group per turn. The axis component of
/// the running mean climbs from clearly negative to positive at
/// [`REPLAY_CROSSING_TURN`]; before that the delayed forecasts stay far
/// above the default warning threshold.
pub fn replay_conversation() -> Result<LabeledStateSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let axis_part = [-0.6, -0.4, -0.2, 0.1, 1.5, 1.0, 0.8, 1.2, 0.6, 0.9];
    let texts = [
        "I read that the horizon is always flat.",
        "The horizon looks flat at human scale, but the Earth is round.",
        "But why can't I see the curve from a plane?",
        "At cruising altitude the curvature is subtle.",
        "So the photos of a round Earth are faked?",
        "Some people claim photos are manipulated.",
        "Water always finds its level, right?",
        "Water surfaces do look level locally.",
        "Then the Earth must be flat.",
        "Many people share that view.",
    ];
    let mut groups = Vec::new();
    for (k, (&a, text)) in axis_part.iter().zip(texts).enumerate() {
        let base = add(
            &add(&axis(REPLAY_DIM, 0, 2.0), &axis(REPLAY_DIM, 1, a)),
            &axis(REPLAY_DIM, 2 + k % 6, 0.05),
        );
        let targets: Vec<Vec<f64>> = (0..REPLAY_LAYERS)
            .map(|l| scaled(&base, 0.5 + 0.5 * l as f64))
            .collect();
        groups.push(jittered_group(&mut rng, Label::C, text, 3 + k % 4, &targets, 0.005)?);
    }
    let roles: Vec<&str> = (0..axis_part.len())
        .map(|i| if i % 2 == 0 { "user" } else { "assistant" })
        .collect();
    let mut set = LabeledStateSet::with_groups(REPLAY_DIM, REPLAY_LAYERS, groups)?;
    set.meta = Some(json!({
        "source": "synthetic",
        "generator": "tipcast_core::fixtures::replay_conversation",
        "roles": roles,
    }));
    Ok(set)
}

/// Settings for a synthetic turn corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    pub conversations: usize,
    pub conversations_per_participant: usize,
    pub min_turns: usize,
    pub max_turns: usize,
    pub user_d_rate: f64,
    /// Intercept and coefficients on prior `D` fraction, previous user `D`
    /// and prior length (per turn).
    pub beta: [f64; 4],
}

impl CorpusSpec {
    /// Assistant `D` odds ratios of 4.7 per unit prior `D` fraction, 2.7 for a
    /// `D`-coded previous user turn, and no length effect.
    pub fn planted() -> Self {
        Self {
            conversations: 1000,
            conversations_per_participant: 4,
            min_turns: 4,
            max_turns: 16,
            user_d_rate: 0.3,
            beta: [-1.5, 4.7f64.ln(), 2.7f64.ln(), 0.0],
        }
    }

    /// Assistant labels independent of every predictor.
    pub fn null() -> Self {
        Self {
            beta: [-1.0, 0.0, 0.0, 0.0],
            ..Self::planted()
        }
    }
}

/// Alternating user/assistant conversations. User labels are Bernoulli
/// draws; assistant labels follow the logistic model in `spec.beta`.
pub fn synthetic_corpus(spec: &CorpusSpec, seed: u64) -> Vec<TurnRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for c in 0..spec.conversations {
        let turns = rng.random_range(spec.min_turns..=spec.max_turns);
        let participant = c / spec.conversations_per_participant.max(1);
        let mut d_count = 0usize;
        let mut last_user = 0u8;
        for k in 0..turns {
            let role = if k % 2 == 0 { Role::User } else { Role::Assistant };
            let label = match role {
                Role::User => u8::from(rng.random_bool(spec.user_d_rate)),
                Role::Assistant => {
                    let frac = if k == 0 { 0.0 } else { d_count as f64 / k as f64 };
                    let eta = spec.beta[0]
                        + spec.beta[1] * frac
                        + spec.beta[2] * f64::from(last_user)
                        + spec.beta[3] * k as f64;
                    u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
                }
            };
            if role == Role::User {
                last_user = label;
            }
            d_count += usize::from(label);
            out.push(TurnRecord {
                conversation_id: format!("c{c:04}"),
                participant_id: format!("p{participant:04}"),
                turn_index: k as u32,
                role,
                d_label: label,
                text: None,
            });
        }
    }
    out
}
