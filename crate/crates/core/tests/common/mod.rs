//! Shared helpers and independent reference implementations for the
//! integration tests. Nothing here calls into the code under test except to
//! build inputs.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use newsdesk_core::service::{fixtures, Config, Desk};

/// Generates the seed-42 corpus into a fresh directory and opens a desk on it.
pub fn fixture_desk() -> (tempfile::TempDir, Desk) {
    let dir = tempfile::tempdir().unwrap();
    fixtures::generate(42, dir.path()).unwrap();
    let desk = Desk::open(Config::load(dir.path().join("config.json")).unwrap()).unwrap();
    (dir, desk)
}

pub fn shipped_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_labels(dir: &Path) -> BTreeMap<String, String> {
    serde_json::from_str(&std::fs::read_to_string(dir.join("labels.json")).unwrap()).unwrap()
}

/// Smoothed TF-IDF by the definition, over whitespace-separated lowercase
/// words: returns the sorted vocabulary and a dense N×M matrix.
pub fn tfidf_reference(docs: &[String]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut vocab: Vec<String> = docs
        .iter()
        .flat_map(|d| d.split_whitespace().map(str::to_owned))
        .collect();
    vocab.sort();
    vocab.dedup();
    let n = docs.len() as f64;
    let mut out = Vec::new();
    for d in docs {
        let words: Vec<&str> = d.split_whitespace().collect();
        let mut row = Vec::new();
        for t in &vocab {
            let mut tf = 0.0;
            for w in &words {
                if w == t {
                    tf += 1.0;
                }
            }
            let mut df = 0.0;
            for other in docs {
                if other.split_whitespace().any(|w| w == t) {
                    df += 1.0;
                }
            }
            row.push(tf * (((1.0 + n) / (1.0 + df)).ln() + 1.0));
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut row {
                *v /= norm;
            }
        }
        out.push(row);
    }
    (vocab, out)
}

/// Mean cross-entropy + (λ/2)‖W‖², computed directly from probabilities.
pub fn reference_loss(w: &[Vec<f64>], b: &[f64], x: &[Vec<f64>], y: &[usize], l2: f64) -> f64 {
    let mut total = 0.0;
    for (row, &t) in x.iter().zip(y) {
        let z: Vec<f64> = w
            .iter()
            .zip(b)
            .map(|(wk, bk)| bk + wk.iter().zip(row).map(|(a, c)| a * c).sum::<f64>())
            .collect();
        let denom: f64 = z.iter().map(|v| v.exp()).sum();
        total -= (z[t].exp() / denom).ln();
    }
    let sq: f64 = w.iter().flatten().map(|v| v * v).sum();
    total / x.len() as f64 + 0.5 * l2 * sq
}

/// Central finite-difference gradient of [`reference_loss`] (weights then bias).
pub fn numeric_gradient(w: &[Vec<f64>], b: &[f64], x: &[Vec<f64>], y: &[usize], l2: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut gw = Vec::new();
    for k in 0..w.len() {
        for j in 0..w[k].len() {
            let mut plus = w.to_vec();
            let mut minus = w.to_vec();
            plus[k][j] += h;
            minus[k][j] -= h;
            gw.push((reference_loss(&plus, b, x, y, l2) - reference_loss(&minus, b, x, y, l2)) / (2.0 * h));
        }
    }
    let mut gb = Vec::new();
    for k in 0..b.len() {
        let mut plus = b.to_vec();
        let mut minus = b.to_vec();
        plus[k] += h;
        minus[k] -= h;
        gb.push((reference_loss(w, &plus, x, y, l2) - reference_loss(w, &minus, x, y, l2)) / (2.0 * h));
    }
    (gw, gb)
}

pub fn max_relative_error(a: &[f64], n: &[f64]) -> f64 {
    a.iter()
        .zip(n)
        .map(|(a, n)| (a - n).abs() / 1f64.max(a.abs()).max(n.abs()))
        .fold(0.0, f64::max)
}

/// Nearest-centroid classifier (squared Euclidean distance, ties to the first label in sorted order).
pub fn nearest_centroid(train: &[(Vec<f64>, String)], test: &[Vec<f64>]) -> Vec<String> {
    let mut sums: BTreeMap<&str, (Vec<f64>, f64)> = BTreeMap::new();
    for (row, label) in train {
        let e = sums.entry(label.as_str()).or_insert_with(|| (vec![0.0; row.len()], 0.0));
        for (s, v) in e.0.iter_mut().zip(row) {
            *s += v;
        }
        e.1 += 1.0;
    }
    let centroids: Vec<(&str, Vec<f64>)> = sums
        .into_iter()
        .map(|(l, (s, n))| (l, s.into_iter().map(|v| v / n).collect()))
        .collect();
    test.iter()
        .map(|row| {
            let mut best = (f64::INFINITY, "");
            for (label, c) in &centroids {
                let d: f64 = c.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best.0 {
                    best = (d, label);
                }
            }
            best.1.to_owned()
        })
        .collect()
}

/// Collapses every whitespace run to one space and trims.
pub fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
