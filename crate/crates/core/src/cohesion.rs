//! Cluster cohesion of the mixed-species cosine-similarity graph.
//!
//! Tokens of every label at one layer form the vertex set; an edge joins two
//! tokens whose cosine similarity is at least the threshold. Cohesion `G` is
//! the fraction of tokens in the largest connected component.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsf::{Label, LabeledStateSet};
use crate::vector::{dot, to_f64};

pub const DEFAULT_THRESHOLD: f64 = 0.90;
pub const DEFAULT_SWEEP: [f64; 5] = [0.85, 0.88, 0.90, 0.92, 0.95];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohesionReport {
    pub layer: usize,
    pub threshold: f64,
    /// `max(component_sizes) / N`.
    pub g: f64,
    /// Component sizes, largest first; they sum to `N`.
    pub component_sizes: Vec<usize>,
    /// Share of each label's tokens that sit in the largest component.
    pub species_fractions: BTreeMap<Label, f64>,
}

/// Component index for every vertex, numbered by first appearance.
pub fn components_from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut uf = UnionFind::<usize>::new(n);
    for (i, j) in edges {
        uf.union(i, j);
    }
    let mut ids = BTreeMap::new();
    (0..n)
        .map(|i| {
            let root = uf.find(i);
            let next = ids.len();
            *ids.entry(root).or_insert(next)
        })
        .collect()
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && (-1.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "cosine threshold {threshold} outside [-1, 1]"
        )))
    }
}

/// Cohesion of one population of labelled vectors.
pub fn cohesion<V: AsRef<[f64]>>(vectors: &[(Label, V)], threshold: f64) -> Result<CohesionReport> {
    check_threshold(threshold)?;
    let n = vectors.len();
    if n == 0 {
        return Err(Error::Empty("cohesion needs at least one vector"));
    }
    let dim = vectors[0].1.as_ref().len();
    let mut sq_norms = Vec::with_capacity(n);
    for (i, (_, v)) in vectors.iter().enumerate() {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        let s = dot(v, v);
        if s == 0.0 {
            return Err(Error::ZeroNorm(i));
        }
        sq_norms.push(s);
    }

    let mut edges = Vec::new();
    for i in 0..n {
        let vi = vectors[i].1.as_ref();
        for j in (i + 1)..n {
            let cos = dot(vi, vectors[j].1.as_ref()) / (sq_norms[i] * sq_norms[j]).sqrt();
            if cos >= threshold {
                edges.push((i, j));
            }
        }
    }
    let comp = components_from_edges(n, edges);
    let n_comp = comp.iter().max().map_or(0, |m| m + 1);

    let mut sizes = vec![0usize; n_comp];
    let mut species: Vec<BTreeMap<Label, usize>> = vec![BTreeMap::new(); n_comp];
    let mut totals: BTreeMap<Label, usize> = BTreeMap::new();
    for (&c, (label, _)) in comp.iter().zip(vectors) {
        sizes[c] += 1;
        *species[c].entry(*label).or_default() += 1;
        *totals.entry(*label).or_default() += 1;
    }

    // Ties between equally large components are broken on species
    // composition, which keeps the report independent of input order.
    let composition = |c: usize| -> Vec<usize> {
        Label::ALL
            .iter()
            .map(|l| species[c].get(l).copied().unwrap_or(0))
            .collect()
    };
    let largest = (0..n_comp)
        .max_by(|&a, &b| {
            sizes[a]
                .cmp(&sizes[b])
                .then_with(|| composition(a).cmp(&composition(b)))
        })
        .expect("n ≥ 1");

    let species_fractions = totals
        .iter()
        .map(|(label, &total)| {
            let inside = species[largest].get(label).copied().unwrap_or(0);
            (*label, inside as f64 / total as f64)
        })
        .collect();

    let mut component_sizes = sizes.clone();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(CohesionReport {
        layer: 0,
        threshold,
        g: sizes[largest] as f64 / n as f64,
        component_sizes,
        species_fractions,
    })
}

/// All tokens of `set` at `layer`, labelled by group.
pub fn layer_population(set: &LabeledStateSet, layer: usize) -> Result<Vec<(Label, Vec<f64>)>> {
    set.check_layer(layer)?;
    Ok(set
        .groups()
        .iter()
        .flat_map(|g| g.layer(layer).map(move |tok| (g.label, to_f64(tok))))
        .collect())
}

/// Cohesion at every layer of `set`.
pub fn cohesion_curve(set: &LabeledStateSet, threshold: f64) -> Result<Vec<CohesionReport>> {
    check_threshold(threshold)?;
    let one = |layer: usize| -> Result<CohesionReport> {
        let population = layer_population(set, layer)?;
        let mut report = cohesion(&population, threshold)?;
        report.layer = layer;
        Ok(report)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..set.layer_count()).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..set.layer_count()).map(one).collect()
    }
}

/// `g` for every `(threshold, layer)` pair; one row per threshold.
pub fn threshold_sweep(set: &LabeledStateSet, thresholds: &[f64]) -> Result<Vec<Vec<CohesionReport>>> {
    thresholds.iter().map(|&t| cohesion_curve(set, t)).collect()
}
