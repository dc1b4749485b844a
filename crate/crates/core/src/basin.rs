//! Basin centroids, the order parameter and the closed-form tipping law.
//!
//! With conversation state `C` and basin centroids `B`, `D` at a late layer,
//! the order parameter is `x = C·(D−B)` and the forecast tipping index is
//!
//! ```text
//! n* = C·(D−B) / B·(B−D) · exp(B·(C−B))
//! ```
//!
//! which splits into three cases: `x ≥ 0` tips immediately (`n* = 0`);
//! `x < 0` with `B·(D−B) > 0` tips after a finite delay; otherwise `B` is a
//! stable attractor and no tipping occurs.

use std::ops::RangeInclusive;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hsf::{Group, Label, LabeledStateSet};
use crate::vector::{self, check_dims, dot, norm, sub};

/// Centroid of the probes for both basins at one layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinPair {
    pub layer: usize,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    /// `d − b`.
    pub axis: Vec<f64>,
}

impl BasinPair {
    pub fn new(layer: usize, b: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        check_dims(&b, &d)?;
        if b.is_empty() {
            return Err(Error::Empty("basin centroid"));
        }
        if b.iter().chain(&d).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("basin centroids must be finite".into()));
        }
        let axis = sub(&d, &b);
        Ok(Self { layer, b, d, axis })
    }

    /// Phrase-isolated `B` and `D` centroids at `layer`; every group is one
    /// phrase.
    pub fn from_set(set: &LabeledStateSet, layer: usize) -> Result<Self> {
        set.check_layer(layer)?;
        let b = label_centroid(set, Label::B, layer)?;
        let d = label_centroid(set, Label::D, layer)?;
        Self::new(layer, b, d)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// `B·(D−B)`.
    pub fn b_drive(&self) -> f64 {
        dot(&self.b, &self.axis)
    }

    pub fn axis_norm(&self) -> f64 {
        norm(&self.axis)
    }
}

/// Mean residual over the conversation tokens at one layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversationState {
    pub layer: usize,
    pub c: Vec<f64>,
    pub token_count: usize,
}

impl ConversationState {
    pub fn from_tokens<V: AsRef<[f64]>>(layer: usize, tokens: &[V]) -> Result<Self> {
        let c = vector::mean(tokens)?;
        Ok(Self {
            layer,
            c,
            token_count: tokens.len(),
        })
    }

    /// Conversation state from the `C` groups of `set` (the `A` groups when no
    /// `C` group exists), averaged over all of their tokens.
    pub fn from_set(set: &LabeledStateSet, layer: usize) -> Result<Self> {
        set.check_layer(layer)?;
        let groups = conversation_groups(set)?;
        let mut acc = vec![0.0f64; set.dim()];
        let mut count = 0usize;
        for g in groups {
            for tok in g.layer(layer) {
                acc.iter_mut().zip(tok).for_each(|(a, &v)| *a += f64::from(v));
                count += 1;
            }
        }
        let n = count as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(Self {
            layer,
            c: acc,
            token_count: count,
        })
    }

    /// Running context of a multi-turn conversation: the mean of the turn
    /// states, computed so the result does not depend on turn order.
    pub fn from_turns<V: AsRef<[f64]>>(layer: usize, turns: &[V]) -> Result<Self> {
        Ok(Self {
            layer,
            c: vector::mean_order_invariant(turns)?,
            token_count: turns.len(),
        })
    }
}

/// Groups holding conversation tokens: label `C`, or `A` when there is no `C`.
pub fn conversation_groups(set: &LabeledStateSet) -> Result<Vec<&Group>> {
    let c: Vec<_> = set.groups_with(Label::C).collect();
    if !c.is_empty() {
        return Ok(c);
    }
    let a: Vec<_> = set.groups_with(Label::A).collect();
    if a.is_empty() {
        return Err(Error::MissingLabel(Label::A));
    }
    Ok(a)
}

fn label_centroid(set: &LabeledStateSet, label: Label, layer: usize) -> Result<Vec<f64>> {
    let means: Vec<Vec<f64>> = set.groups_with(label).map(|g| g.mean_at(layer)).collect();
    if means.is_empty() {
        return Err(Error::MissingLabel(label));
    }
    vector::mean(&means)
}

/// Arithmetic mean of the token vectors of one phrase.
pub fn centroid<V: AsRef<[f64]>>(tokens: &[V]) -> Result<Vec<f64>> {
    vector::mean(tokens)
}

/// Mean of per-phrase means, so that long phrases do not dominate.
pub fn phrase_isolated_centroid<V: AsRef<[f64]>>(phrases: &[&[V]]) -> Result<Vec<f64>> {
    if phrases.is_empty() {
        return Err(Error::Empty("no phrases"));
    }
    let means = phrases.iter().map(|p| vector::mean(p)).collect::<Result<Vec<_>>>()?;
    vector::mean(&means)
}

/// `x = C·(D−B)` in the raw residual space.
pub fn order_parameter(c: &ConversationState, basins: &BasinPair) -> Result<f64> {
    if c.layer != basins.layer {
        return Err(Error::InvalidParameter(format!(
            "conversation layer {} does not match basin layer {}",
            c.layer, basins.layer
        )));
    }
    check_dims(&basins.axis, &c.c)?;
    Ok(dot(&c.c, &basins.axis))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `x ≥ 0`: `D` is favoured from the first step.
    Immediate,
    /// `x < 0`, `B·(D−B) > 0`: `B` first, then `D` after `n*` steps.
    Delayed,
    /// `x < 0`, `B·(D−B) ≤ 0`: `B` is a stable attractor.
    Never,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TipForecast {
    pub x: f64,
    pub b_drive: f64,
    pub case: Case,
    /// `+∞` for [`Case::Never`]; serialised as JSON `null`.
    #[serde(serialize_with = "ser_inf_null", deserialize_with = "de_null_inf")]
    pub n_star: f64,
    /// `None` stands for `+∞`.
    pub n_star_ceil: Option<u64>,
    /// Set when `exp(B·(C−B))` or `n*` left the finite range and was clamped.
    #[serde(default)]
    pub saturated: bool,
}

fn ser_inf_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_null_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl TipForecast {
    fn immediate(x: f64, b_drive: f64) -> Self {
        Self {
            x,
            b_drive,
            case: Case::Immediate,
            n_star: 0.0,
            n_star_ceil: Some(0),
            saturated: false,
        }
    }
}

/// Closed-form tipping forecast for conversation state `c` against basins
/// `b` and `d`.
pub fn tip_forecast(c: &[f64], b: &[f64], d: &[f64]) -> Result<TipForecast> {
    check_dims(b, d)?;
    check_dims(b, c)?;
    let axis = sub(d, b);
    let x = dot(c, &axis);
    let b_drive = dot(b, &axis);
    if x >= 0.0 {
        return Ok(TipForecast::immediate(x, b_drive));
    }
    if b_drive <= 0.0 {
        return Ok(TipForecast {
            x,
            b_drive,
            case: Case::Never,
            n_star: f64::INFINITY,
            n_star_ceil: None,
            saturated: false,
        });
    }

    let mut saturated = false;
    let mut growth = dot(b, &sub(c, b)).exp();
    if !growth.is_finite() {
        growth = f64::MAX;
        saturated = true;
    }
    let mut n_star = (-x / b_drive) * growth;
    if !n_star.is_finite() {
        n_star = f64::MAX;
        saturated = true;
    } else if n_star == 0.0 {
        n_star = f64::MIN_POSITIVE;
        saturated = true;
    }
    Ok(TipForecast {
        x,
        b_drive,
        case: Case::Delayed,
        n_star,
        n_star_ceil: Some(n_star.ceil() as u64),
        saturated,
    })
}

/// Timing class from the state after one greedy continuation step: `D`-first
/// when `A¹·D ≥ A¹·B`, otherwise the ceiling of the closed-form `n*`.
pub fn classify_timing(c1: &ConversationState, basins: &BasinPair) -> Result<TipForecast> {
    check_dims(&basins.b, &c1.c)?;
    let to_d = dot(&c1.c, &basins.d);
    let to_b = dot(&c1.c, &basins.b);
    if to_d >= to_b {
        return Ok(TipForecast::immediate(dot(&c1.c, &basins.axis), basins.b_drive()));
    }
    tip_forecast(&c1.c, &basins.b, &basins.d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerPoint {
    pub layer: usize,
    pub x: f64,
    pub b_drive: f64,
    pub axis_norm: f64,
}

/// Order parameter, basin drive and axis length at every residual entry.
pub fn layer_scan(set: &LabeledStateSet) -> Result<Vec<LayerPoint>> {
    conversation_groups(set)?;
    for label in [Label::B, Label::D] {
        if !set.has_label(label) {
            return Err(Error::MissingLabel(label));
        }
    }
    (0..set.layer_count())
        .map(|layer| {
            let basins = BasinPair::from_set(set, layer)?;
            let conv = ConversationState::from_set(set, layer)?;
            Ok(LayerPoint {
                layer,
                x: order_parameter(&conv, &basins)?,
                b_drive: basins.b_drive(),
                axis_norm: basins.axis_norm(),
            })
        })
        .collect()
}

/// Default early-layer reference window for [`amplification`].
pub const DEFAULT_EARLY_WINDOW: RangeInclusive<usize> = 1..=3;

/// `|x_final|` relative to the mean `|x_L|` over `early_window`; `+∞` when the
/// reference is zero.
pub fn amplification(xs: &[f64], early_window: RangeInclusive<usize>) -> Result<f64> {
    let last = *xs.last().ok_or(Error::Empty("no layers"))?;
    if early_window.is_empty() || *early_window.end() >= xs.len() {
        return Err(Error::InvalidParameter(format!(
            "early window {early_window:?} invalid for {} layers",
            xs.len()
        )));
    }
    let width = (early_window.end() - early_window.start() + 1) as f64;
    let reference = xs[early_window].iter().map(|x| x.abs()).sum::<f64>() / width;
    if reference == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(last.abs() / reference)
}

/// Signed branch-selection gap `A·(D−B)`.
pub fn branch_gap(a: &[f64], basins: &BasinPair) -> Result<f64> {
    check_dims(&basins.axis, a)?;
    Ok(dot(a, &basins.axis))
}

/// Cosine between the basin axis and an externally supplied direction.
pub fn axis_cosine(axis: &[f64], external: &[f64]) -> Result<f64> {
    check_dims(axis, external)?;
    if norm(axis) == 0.0 {
        return Err(Error::ZeroNorm(0));
    }
    vector::cosine(axis, external).ok_or(Error::ZeroNorm(1))
}
