//! Turn-level corpus statistics: design rows for assistant turns, clustered
//! logistic regression by generalised estimating equations, within-conversation
//! lag-1 autocorrelation and a role-preserving shuffled null.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::User => "user",
            Role::Assistant => "assistant",
        })
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" => Ok(Role::User),
            "assistant" => Ok(Role::Assistant),
            other => Err(Error::UnknownRole(other.to_owned())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub conversation_id: String,
    pub participant_id: String,
    pub turn_index: u32,
    pub role: Role,
    pub d_label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Deserialize)]
struct RawTurn {
    conversation_id: String,
    participant_id: String,
    turn_index: u32,
    role: String,
    d_label: u8,
    #[serde(default)]
    text: Option<String>,
}

/// One [`TurnRecord`] per non-blank line.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<TurnRecord>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawTurn = serde_json::from_str(&line)?;
        if raw.d_label > 1 {
            return Err(Error::InvalidParameter(format!(
                "d_label must be 0 or 1, got {} (conversation {}, turn {})",
                raw.d_label, raw.conversation_id, raw.turn_index
            )));
        }
        out.push(TurnRecord {
            role: raw.role.parse()?,
            conversation_id: raw.conversation_id,
            participant_id: raw.participant_id,
            turn_index: raw.turn_index,
            d_label: raw.d_label,
            text: raw.text,
        });
    }
    Ok(out)
}

pub fn write_jsonl<W: std::io::Write>(turns: &[TurnRecord], mut sink: W) -> Result<()> {
    for t in turns {
        serde_json::to_writer(&mut sink, t)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Turns grouped by conversation (first-appearance order), each sorted by
/// turn index.
pub fn conversations(turns: &[TurnRecord]) -> Result<Vec<Vec<&TurnRecord>>> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_conv: BTreeMap<&str, Vec<&TurnRecord>> = BTreeMap::new();
    for t in turns {
        let entry = by_conv.entry(&t.conversation_id).or_insert_with(|| {
            order.push(&t.conversation_id);
            Vec::new()
        });
        entry.push(t);
    }
    order
        .into_iter()
        .map(|id| {
            let mut conv = by_conv.remove(id).expect("present");
            conv.sort_by_key(|t| t.turn_index);
            if let Some(w) = conv.windows(2).find(|w| w[0].turn_index == w[1].turn_index) {
                return Err(Error::DuplicateTurn {
                    conversation_id: id.to_owned(),
                    turn_index: w[0].turn_index,
                });
            }
            Ok(conv)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub conversation_id: String,
    /// Participant id; the GEE clustering unit.
    pub cluster: String,
    pub turn_index: u32,
    pub outcome: u8,
    /// Share of all prior turns, either role, labelled `D`.
    pub prior_d_fraction: f64,
    /// Label of the most recent prior user turn (0 when there is none).
    pub prev_user_d: u8,
    pub prior_length: usize,
    /// `prior_length` standardised over the rows returned.
    pub prior_length_z: f64,
}

/// Predictor names in column order after the intercept.
pub const PREDICTORS: [&str; 3] = ["prior_d_fraction", "prev_user_d", "prior_length_z"];

/// One row per assistant turn that has at least one earlier turn.
pub fn build_design(turns: &[TurnRecord]) -> Result<Vec<DesignRow>> {
    let mut rows = Vec::new();
    for conv in conversations(turns)? {
        let mut d_count = 0usize;
        let mut last_user: Option<u8> = None;
        for (k, t) in conv.iter().enumerate() {
            if t.role == Role::Assistant && k > 0 {
                rows.push(DesignRow {
                    conversation_id: t.conversation_id.clone(),
                    cluster: t.participant_id.clone(),
                    turn_index: t.turn_index,
                    outcome: t.d_label,
                    prior_d_fraction: d_count as f64 / k as f64,
                    prev_user_d: last_user.unwrap_or(0),
                    prior_length: k,
                    prior_length_z: 0.0,
                });
            }
            d_count += usize::from(t.d_label);
            if t.role == Role::User {
                last_user = Some(t.d_label);
            }
        }
    }
    if rows.len() > 1 {
        let n = rows.len() as f64;
        let mean = rows.iter().map(|r| r.prior_length as f64).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.prior_length as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        for r in &mut rows {
            r.prior_length_z = if sd > 0.0 {
                (r.prior_length as f64 - mean) / sd
            } else {
                0.0
            };
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    Exchangeable,
    Independence,
}

impl FromStr for Correlation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exchangeable" => Ok(Correlation::Exchangeable),
            "independence" => Ok(Correlation::Independence),
            other => Err(Error::InvalidParameter(format!("unknown correlation {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    /// Robust (sandwich) standard error.
    pub se: f64,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
    pub p: f64,
}

impl Coefficient {
    pub fn covers(&self, odds_ratio: f64) -> bool {
        self.ci_low <= odds_ratio && odds_ratio <= self.ci_high
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeeFit {
    pub correlation: Correlation,
    /// Working within-cluster correlation (0 under independence).
    pub alpha: f64,
    pub iterations: usize,
    pub n_obs: usize,
    pub n_clusters: usize,
    /// Intercept first, then [`PREDICTORS`].
    pub coefficients: Vec<Coefficient>,
}

impl GeeFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

pub const GEE_TOLERANCE: f64 = 1e-8;
pub const GEE_MAX_ITER: usize = 100;
/// Coefficients beyond this magnitude are treated as diverging.
const SEPARATION_BOUND: f64 = 30.0;

struct Cluster {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Per-cluster quantities for the current `beta`: whitened design `W`,
/// Pearson residuals `e`.
fn whiten(c: &Cluster, beta: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let eta = &c.x * beta;
    let mut w = c.x.clone();
    let mut e = DVector::zeros(c.y.len());
    for i in 0..c.y.len() {
        let mu = sigmoid(eta[i]);
        let s = (mu * (1.0 - mu)).sqrt().max(1e-12);
        w.row_mut(i).scale_mut(s);
        e[i] = (c.y[i] - mu) / s;
    }
    (w, e)
}

/// Moment estimate of the exchangeable correlation.
fn estimate_alpha(resid: &[DVector<f64>], p: usize, max_size: usize) -> f64 {
    let n_obs: usize = resid.iter().map(|e| e.len()).sum();
    let phi = resid.iter().map(|e| e.norm_squared()).sum::<f64>() / (n_obs.saturating_sub(p).max(1)) as f64;
    let mut cross = 0.0;
    let mut pairs = 0.0;
    for e in resid {
        let s = e.sum();
        cross += (s * s - e.norm_squared()) / 2.0;
        let n = e.len() as f64;
        pairs += n * (n - 1.0) / 2.0;
    }
    let denom = (pairs - p as f64).max(1.0) * phi;
    if denom <= 0.0 || !denom.is_finite() {
        return 0.0;
    }
    let lower = if max_size > 1 {
        -1.0 / (max_size as f64 - 1.0) + 1e-6
    } else {
        -0.999
    };
    (cross / denom).clamp(lower, 0.999)
}

/// `W'R⁻¹W` and `W'R⁻¹e` for exchangeable `R` with parameter `alpha`.
fn cluster_terms(w: &DMatrix<f64>, e: &DVector<f64>, alpha: f64) -> (DMatrix<f64>, DVector<f64>) {
    let n = e.len() as f64;
    let k = 1.0 / (1.0 - alpha);
    let c = alpha / (1.0 - alpha + n * alpha);
    let wt1: DVector<f64> = w.row_sum().transpose();
    let b = (w.transpose() * w - &wt1 * wt1.transpose() * c) * k;
    let u = (w.transpose() * e - &wt1 * (c * e.sum())) * k;
    (b, u)
}

/// Logistic GEE with participant clustering and robust standard errors.
pub fn fit_clustered_logistic(rows: &[DesignRow], correlation: Correlation) -> Result<GeeFit> {
    let p = 1 + PREDICTORS.len();
    let features = |r: &DesignRow| [1.0, r.prior_d_fraction, f64::from(r.prev_user_d), r.prior_length_z];

    if rows.is_empty() {
        return Err(Error::Empty("no design rows"));
    }
    for (j, name) in PREDICTORS.iter().enumerate() {
        let first = features(&rows[0])[j + 1];
        if rows.iter().all(|r| features(r)[j + 1] == first) {
            return Err(Error::Singular(format!("predictor {name} is constant")));
        }
    }

    let mut grouped: BTreeMap<&str, Vec<&DesignRow>> = BTreeMap::new();
    for r in rows {
        grouped.entry(&r.cluster).or_default().push(r);
    }
    if grouped.len() < 2 {
        return Err(Error::InvalidParameter("at least two clusters are required".into()));
    }
    let clusters: Vec<Cluster> = grouped
        .values()
        .map(|rs| Cluster {
            x: DMatrix::from_fn(rs.len(), p, |i, j| features(rs[i])[j]),
            y: DVector::from_iterator(rs.len(), rs.iter().map(|r| f64::from(r.outcome))),
        })
        .collect();
    let max_size = clusters.iter().map(|c| c.y.len()).max().unwrap_or(1);

    let mut beta = DVector::zeros(p);
    let mut alpha = 0.0;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let whitened: Vec<_> = clusters.iter().map(|c| whiten(c, &beta)).collect();
        if correlation == Correlation::Exchangeable {
            let resid: Vec<DVector<f64>> = whitened.iter().map(|(_, e)| e.clone()).collect();
            alpha = estimate_alpha(&resid, p, max_size);
        }
        let mut bread = DMatrix::zeros(p, p);
        let mut score = DVector::zeros(p);
        for (w, e) in &whitened {
            let (b, u) = cluster_terms(w, e, alpha);
            bread += b;
            score += u;
        }
        let step = bread
            .clone()
            .lu()
            .solve(&score)
            .ok_or_else(|| Error::Singular("GEE information matrix is singular".into()))?;
        beta += &step;
        if beta.iter().any(|b| !b.is_finite() || b.abs() > SEPARATION_BOUND) {
            return Err(Error::NonConvergence {
                iterations,
                reason: "coefficients diverge (separation)".into(),
            });
        }
        if step.amax() < GEE_TOLERANCE {
            break;
        }
        if iterations >= GEE_MAX_ITER {
            return Err(Error::NonConvergence {
                iterations,
                reason: format!("coefficient change {:.3e} above tolerance", step.amax()),
            });
        }
    }

    let mut bread = DMatrix::zeros(p, p);
    let mut meat = DMatrix::zeros(p, p);
    for c in &clusters {
        let (w, e) = whiten(c, &beta);
        let (b, u) = cluster_terms(&w, &e, alpha);
        bread += b;
        meat += &u * u.transpose();
    }
    let inv = bread
        .try_inverse()
        .ok_or_else(|| Error::Singular("GEE information matrix is singular".into()))?;
    let cov = &inv * meat * &inv;

    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z_crit = normal.inverse_cdf(0.975);
    let names = std::iter::once("intercept").chain(PREDICTORS);
    let coefficients = names
        .enumerate()
        .map(|(j, name)| {
            let estimate = beta[j];
            let se = cov[(j, j)].max(0.0).sqrt();
            let z = estimate / se;
            Coefficient {
                name: name.to_owned(),
                estimate,
                se,
                odds_ratio: estimate.exp(),
                ci_low: (estimate - z_crit * se).exp(),
                ci_high: (estimate + z_crit * se).exp(),
                z,
                p: 2.0 * (1.0 - normal.cdf(z.abs())),
            }
        })
        .collect();
    Ok(GeeFit {
        correlation,
        alpha,
        iterations,
        n_obs: rows.len(),
        n_clusters: clusters.len(),
        coefficients,
    })
}

/// Pearson correlation of `(y_t, y_{t+1})`; `None` when either side has zero
/// variance or there are fewer than two pairs.
pub fn lag1_pearson(ys: &[f64]) -> Option<f64> {
    if ys.len() < 3 {
        return None;
    }
    let (a, b) = (&ys[..ys.len() - 1], &ys[1..]);
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        None
    } else {
        Some(sab / (saa * sbb).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lag1Report {
    /// Pair-weighted mean of per-conversation coefficients.
    pub pooled: f64,
    /// Conversations with at least two turns of the role.
    pub conversations: usize,
    /// Lag pairs behind `pooled`.
    pub weight: usize,
    /// Conversations whose coefficient was undefined (constant labels) and
    /// therefore carry zero weight.
    pub zero_weight: Vec<String>,
}

fn lag1_from_convs(convs: &[Vec<&TurnRecord>], role: Role) -> Result<Lag1Report> {
    let mut total = 0.0;
    let mut weight = 0usize;
    let mut eligible = 0usize;
    let mut zero_weight = Vec::new();
    for conv in convs {
        let ys: Vec<f64> = conv
            .iter()
            .filter(|t| t.role == role)
            .map(|t| f64::from(t.d_label))
            .collect();
        if ys.len() < 2 {
            continue;
        }
        eligible += 1;
        match lag1_pearson(&ys) {
            Some(r) => {
                total += r * (ys.len() - 1) as f64;
                weight += ys.len() - 1;
            }
            None => zero_weight.push(conv[0].conversation_id.clone()),
        }
    }
    if eligible == 0 {
        return Err(Error::InvalidParameter(format!(
            "no conversation has two or more {role} turns"
        )));
    }
    Ok(Lag1Report {
        pooled: if weight > 0 { total / weight as f64 } else { 0.0 },
        conversations: eligible,
        weight,
        zero_weight,
    })
}

/// Within-conversation lag-1 autocorrelation of `role` labels.
pub fn lag1_autocorr(turns: &[TurnRecord], role: Role) -> Result<Lag1Report> {
    lag1_from_convs(&conversations(turns)?, role)
}

/// Permutes labels among same-role turns inside every conversation.
pub fn shuffle_labels<R: rand::Rng>(turns: &[TurnRecord], rng: &mut R) -> Result<Vec<TurnRecord>> {
    let mut out = turns.to_vec();
    let mut slots: BTreeMap<(&str, Role), Vec<usize>> = BTreeMap::new();
    // Slots in turn-index order so the permutation is independent of input order.
    let mut idx: Vec<usize> = (0..turns.len()).collect();
    idx.sort_by(|&a, &b| {
        (&turns[a].conversation_id, turns[a].turn_index).cmp(&(&turns[b].conversation_id, turns[b].turn_index))
    });
    for i in idx {
        slots
            .entry((&turns[i].conversation_id, turns[i].role))
            .or_default()
            .push(i);
    }
    for positions in slots.values() {
        let mut labels: Vec<u8> = positions.iter().map(|&i| turns[i].d_label).collect();
        labels.shuffle(rng);
        for (&i, l) in positions.iter().zip(labels) {
            out[i].d_label = l;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullReport {
    pub observed: f64,
    pub null_mean: f64,
    pub null_std: f64,
    /// `(observed − null_mean) / null_std`; infinite when the null is
    /// degenerate.
    pub z: f64,
    /// `(1 + #{null ≥ observed}) / (1 + shuffles)`.
    pub mc_p: f64,
    pub shuffles: usize,
}

/// Observed lag-1 autocorrelation against label permutations that keep each
/// conversation's role sequence. Shuffle `i` draws from stream `i` of the
/// seeded generator.
pub fn shuffled_null(turns: &[TurnRecord], role: Role, shuffles: usize, seed: u64) -> Result<NullReport> {
    if shuffles == 0 {
        return Err(Error::InvalidParameter("shuffles must be ≥ 1".into()));
    }
    let observed = lag1_autocorr(turns, role)?.pooled;
    let one = |i: usize| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        Ok(lag1_autocorr(&shuffle_labels(turns, &mut rng)?, role)?.pooled)
    };
    #[cfg(feature = "parallel")]
    let nulls: Result<Vec<f64>> = {
        use rayon::prelude::*;
        (0..shuffles).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let nulls: Result<Vec<f64>> = (0..shuffles).map(one).collect();
    let nulls = nulls?;

    let n = nulls.len() as f64;
    let null_mean = nulls.iter().sum::<f64>() / n;
    let null_std = if nulls.len() > 1 {
        (nulls.iter().map(|v| (v - null_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let exceed = nulls.iter().filter(|&&v| v >= observed).count();
    let z = if null_std > 0.0 {
        (observed - null_mean) / null_std
    } else if observed == null_mean {
        0.0
    } else {
        f64::INFINITY.copysign(observed - null_mean)
    };
    Ok(NullReport {
        observed,
        null_mean,
        null_std,
        z,
        mc_p: (1 + exceed) as f64 / (1 + shuffles) as f64,
        shuffles,
    })
}

/// Per-conversation, per-role label multisets, used to check shuffles.
pub fn label_multisets(turns: &[TurnRecord]) -> BTreeMap<(String, Role), (usize, usize)> {
    let mut out: BTreeMap<(String, Role), (usize, usize)> = BTreeMap::new();
    for t in turns {
        let e = out.entry((t.conversation_id.clone(), t.role)).or_default();
        if t.d_label == 1 {
            e.1 += 1;
        } else {
            e.0 += 1;
        }
    }
    out
}

/// Distinct participants in `turns`.
pub fn participants(turns: &[TurnRecord]) -> BTreeSet<&str> {
    turns.iter().map(|t| t.participant_id.as_str()).collect()
}
