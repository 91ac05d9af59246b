//! Shared oracles and fixtures for the integration tests.

#![allow(dead_code, clippy::needless_range_loop)]

use crab_al::dataset::{MultiLabelDataset, SignMatrix, SparseVector};
use crab_al::ensemble::{Classifier, Ensemble};
use crab_al::harness::{ExperimentConfig, SyntheticSpec};
use crab_al::matrix::SquareMatrix;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

/// Adaptive Gauss-Kronrod 7/15 quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol.max(1e-15 * v.abs()) || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol / 2.0, depth - 1) + rec(f, m, b, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    rec(f, a, b, tol, 50)
}

/// `∫₀ˣ t^(a-1) (1-t)^(b-1) dt` by quadrature, with `u = t^a` on `[0, ½]`
/// and `v = (1-t)^b` on `[½, x]` whenever those ends are singular.
pub fn incomplete_beta_quadrature(x: f64, a: f64, b: f64) -> f64 {
    let tol = 1e-14;
    let c = x.min(0.5);
    let left = if a < 1.0 {
        let f = move |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0) / a;
        integrate(&f, 0.0, c.powf(a), tol)
    } else {
        let f = move |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0);
        integrate(&f, 0.0, c, tol)
    };
    if x <= 0.5 {
        return left;
    }
    let right = if b < 1.0 {
        let f = move |v: f64| (1.0 - v.powf(1.0 / b)).powf(a - 1.0) / b;
        integrate(&f, (1.0 - x).powf(b), 0.5f64.powf(b), tol)
    } else {
        let f = move |t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0);
        integrate(&f, 0.5, x, tol)
    };
    left + right
}

/// `A` and `NegA` by direct counting over the rows of `y`.
pub fn brute_force_correlation(y: &SignMatrix) -> (SquareMatrix, SquareMatrix) {
    let k = y.cols();
    let mut a = SquareMatrix::identity(k);
    let mut neg = SquareMatrix::zeros(k);
    for n in 0..k {
        let with_n: Vec<&[i8]> = y.iter_rows().filter(|r| r[n] > 0).collect();
        if with_n.is_empty() {
            continue;
        }
        for m in 0..k {
            if m == n {
                continue;
            }
            let both = with_n.iter().filter(|r| r[m] > 0).count() as f64;
            let absent = with_n.iter().filter(|r| r[m] < 0).count() as f64;
            a.set(m, n, both / with_n.len() as f64);
            neg.set(m, n, absent / with_n.len() as f64);
        }
    }
    (a, neg)
}

/// Member that answers from a table keyed by the instance's first feature
/// index.
#[derive(Debug, Clone)]
pub struct TableClassifier {
    pub rows: Vec<Vec<f64>>,
}

impl Classifier for TableClassifier {
    fn num_labels(&self) -> usize {
        self.rows[0].len()
    }

    fn predict_proba_into(&self, x: &SparseVector, out: &mut [f64]) {
        let (i, _) = x.iter().next().expect("one-hot instance");
        out.copy_from_slice(&self.rows[i]);
    }
}

/// One-hot feature for instance `i`.
pub fn one_hot(i: usize) -> SparseVector {
    SparseVector::from_pairs(vec![(i as u32, 1.0)])
}

/// Ensemble whose member `e` predicts `tables[e][i]` for one-hot instance `i`.
pub fn table_ensemble(tables: &[Vec<Vec<f64>>]) -> Ensemble {
    let members: Vec<Box<dyn Classifier>> = tables
        .iter()
        .map(|t| Box::new(TableClassifier { rows: t.clone() }) as Box<dyn Classifier>)
        .collect();
    Ensemble::from_members(members).unwrap()
}

pub fn synthetic_spec(instances: usize, labels: usize, target: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        instances,
        labels,
        feature_dim: 16,
        target_mean_ir: target,
        tolerance: 0.5,
        seed,
        ..SyntheticSpec::default()
    }
}

/// Small fast campaign config over a generated pool.
pub fn small_config(instances: usize, iterations: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.data.synthetic = Some(SyntheticSpec {
        instances,
        labels: 5,
        feature_dim: 8,
        imbalance: 8.0,
        target_mean_ir: 4.0,
        tolerance: 1.0,
        seed: 3,
        ..SyntheticSpec::default()
    });
    c.data.initial_labeled = 15;
    c.data.validation = 60;
    c.ensemble.size = 3;
    c.classifier.epochs = 5;
    c.budget.batch = 5;
    c.budget.per_label = 4;
    c.budget.hard0 = 6;
    c.budget.iterations = iterations;
    c.strategy.anchors = 8;
    c.run.seeds = vec![1, 2];
    c
}

pub fn dataset_from(rows: &[Vec<i8>], dim: usize) -> MultiLabelDataset {
    let k = rows[0].len();
    let features = (0..rows.len()).map(|i| one_hot(i % dim)).collect();
    MultiLabelDataset::new(features, SignMatrix::from_rows(k, rows).unwrap(), dim).unwrap()
}

/// Expected attention-weighted score increments of one candidate at each
/// anchor, computed from scratch.
///
/// `cand[e][j]` and `anchors[a][e][j]` are member probabilities, `att` the
/// attention values. With `joint` every label vector of the candidate is
/// enumerated under the mixture likelihood; otherwise each label is toggled
/// on its own and weighted by its mixture marginal.
pub fn increment_oracle(
    cand: &[Vec<f64>],
    anchors: &[Vec<Vec<f64>>],
    prior: &[f64],
    att: &[Vec<f64>],
    alpha: f64,
    beta: f64,
    joint: bool,
) -> Vec<f64> {
    let e_count = cand.len();
    let k = cand[0].len();
    let loss = |p: f64, y: i8| -> f64 {
        // ∫ t^(α-1)(1-t)^β over [p,1] or t^α(1-t)^(β-1) over [0,p]
        if y > 0 {
            let f = move |t: f64| t.powf(alpha - 1.0) * (1.0 - t).powf(beta);
            integrate(&f, p, 1.0, 1e-15)
        } else {
            let f = move |t: f64| t.powf(alpha) * (1.0 - t).powf(beta - 1.0);
            integrate(&f, 0.0, p, 1e-15)
        }
    };
    let score = |p: &[f64], y: &[i8]| -> f64 {
        let mut s = 0.0;
        for m in 0..k {
            for n in 0..k {
                s += att[m][n] * loss(p[n], y[n]);
            }
        }
        s
    };
    let mix = |w: &[f64], table: &[Vec<f64>]| -> Vec<f64> {
        (0..k).map(|j| (0..e_count).map(|e| w[e] * table[e][j]).sum()).collect()
    };
    let mut hypotheses: Vec<(f64, Vec<f64>)> = Vec::new();
    if joint {
        for mask in 0..(1usize << k) {
            let lik: Vec<f64> = (0..e_count)
                .map(|e| {
                    (0..k)
                        .map(|j| {
                            if mask >> j & 1 == 1 {
                                cand[e][j]
                            } else {
                                1.0 - cand[e][j]
                            }
                        })
                        .product()
                })
                .collect();
            let mass: f64 = (0..e_count).map(|e| prior[e] * lik[e]).sum();
            if mass > 0.0 {
                let w = (0..e_count).map(|e| prior[e] * lik[e] / mass).collect();
                hypotheses.push((mass, w));
            }
        }
    } else {
        for j in 0..k {
            for positive in [true, false] {
                let lik: Vec<f64> = (0..e_count)
                    .map(|e| if positive { cand[e][j] } else { 1.0 - cand[e][j] })
                    .collect();
                let mass: f64 = (0..e_count).map(|e| prior[e] * lik[e]).sum();
                if mass > 0.0 {
                    let w = (0..e_count).map(|e| prior[e] * lik[e] / mass).collect();
                    hypotheses.push((mass, w));
                }
            }
        }
    }
    anchors
        .iter()
        .map(|table| {
            let before = mix(prior, table);
            let target: Vec<i8> = before.iter().map(|&p| if p > 0.5 { 1 } else { -1 }).collect();
            let s0 = score(&before, &target);
            hypotheses
                .iter()
                .map(|(mass, w)| mass * (score(&mix(w, table), &target) - s0))
                .sum()
        })
        .collect()
}

/// `Â` by its definition: unit diagonal, off-diagonal `A(m,n)` over `γ` times
/// the largest off-diagonal entry of column `n`.
pub fn attention_oracle(a: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let k = a.len();
    let mut out = vec![vec![0.0; k]; k];
    for n in 0..k {
        let max = (0..k).filter(|&m| m != n).map(|m| a[m][n]).fold(0.0, f64::max);
        for m in 0..k {
            out[m][n] = if m == n {
                1.0
            } else if max > 0.0 {
                a[m][n] / (gamma * max)
            } else {
                0.0
            };
        }
    }
    out
}

pub const ANCHOR_TABLES: [[[f64; 2]; 2]; 3] = [
    [[0.2, 0.85], [0.6, 0.3]],
    [[0.9, 0.4], [0.7, 0.65]],
    [[0.15, 0.1], [0.45, 0.55]],
];
pub const CANDIDATE_TABLES: [[[f64; 2]; 2]; 4] = [
    [[0.8, 0.3], [0.25, 0.6]],
    [[0.5, 0.5], [0.5, 0.5]],
    [[0.95, 0.05], [0.1, 0.9]],
    [[0.35, 0.7], [0.4, 0.75]],
];

/// Two-member ensemble over one-hot instances 0..7: candidates 0..4, anchors 4..7.
pub fn increment_toy() -> (crab_al::ensemble::Ensemble, Vec<Vec<Vec<f64>>>) {
    let mut per_instance: Vec<[[f64; 2]; 2]> = CANDIDATE_TABLES.to_vec();
    per_instance.extend(ANCHOR_TABLES);
    let tables: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|e| per_instance.iter().map(|t| t[e].to_vec()).collect())
        .collect();
    let anchors = ANCHOR_TABLES
        .iter()
        .map(|t| t.iter().map(|r| r.to_vec()).collect())
        .collect();
    (table_ensemble(&tables), anchors)
}
