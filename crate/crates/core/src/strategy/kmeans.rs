//! Batch selection by k-means over increment vectors.

use rand::Rng as _;

use crate::par::Execution;
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Stop once the largest centre shift, relative to the largest centre
    /// norm, drops below this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_count(vectors: &[Vec<f64>]) -> usize {
    let mut seen: Vec<&[f64]> = Vec::new();
    for v in vectors {
        if !seen.contains(&v.as_slice()) {
            seen.push(v);
        }
    }
    seen.len()
}

/// k-means++ seeding.
fn init_centres(vectors: &[Vec<f64>], k: usize, rng: &mut rng::Rng) -> Vec<Vec<f64>> {
    let mut centres = vec![vectors[rng.random_range(0..vectors.len())].clone()];
    let mut d: Vec<f64> = vectors.iter().map(|v| dist2(v, &centres[0])).collect();
    while centres.len() < k {
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &di) in d.iter().enumerate() {
                if di > 0.0 {
                    chosen = Some(i);
                    if r < di {
                        break;
                    }
                    r -= di;
                }
            }
            chosen.unwrap_or(0)
        } else {
            break;
        };
        let c = vectors[pick].clone();
        for (di, v) in d.iter_mut().zip(vectors) {
            *di = di.min(dist2(v, &c));
        }
        centres.push(c);
    }
    centres
}

fn nearest(v: &[f64], centres: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centre) in centres.iter().enumerate() {
        let d = dist2(v, centre);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Lloyd iterations from k-means++ seeds. Returns the centres.
pub(crate) fn kmeans(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
    options: KMeansOptions,
    exec: Execution,
) -> Vec<Vec<f64>> {
    let mut rng = rng::rng_for(seed, &[stream::KMEANS]);
    let mut centres = init_centres(vectors, k, &mut rng);
    let dim = vectors[0].len();
    for _ in 0..options.max_iter {
        let assign = exec.map(vectors, |v| nearest(v, &centres));
        let mut sums = vec![vec![0.0; dim]; centres.len()];
        let mut counts = vec![0usize; centres.len()];
        for (v, &c) in vectors.iter().zip(&assign) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(v) {
                *s += x;
            }
        }
        let mut shift: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (c, centre) in centres.iter_mut().enumerate() {
            if counts[c] == 0 {
                continue;
            }
            let next: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(dist2(&next, centre).sqrt());
            scale = scale.max(next.iter().map(|x| x * x).sum::<f64>().sqrt());
            *centre = next;
        }
        if shift <= options.tol * scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    centres
}

/// Positions of `n` vectors: the nearest unselected one to each centre,
/// ties to the lower position, then the lowest unselected positions if the
/// centres run out.
pub fn select_batch_with(
    vectors: &[Vec<f64>],
    n: usize,
    seed: u64,
    options: KMeansOptions,
    exec: Execution,
) -> Vec<usize> {
    if n >= vectors.len() {
        return (0..vectors.len()).collect();
    }
    if n == 0 {
        return Vec::new();
    }
    let k = n.min(distinct_count(vectors));
    let centres = kmeans(vectors, k, seed, options, exec);
    let mut taken = vec![false; vectors.len()];
    let mut out = Vec::with_capacity(n);
    for centre in &centres {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (i, v) in vectors.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let d = dist2(v, centre);
            if d < best_d {
                best_d = d;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            taken[i] = true;
            out.push(i);
        }
    }
    for (i, t) in taken.iter_mut().enumerate() {
        if out.len() >= n {
            break;
        }
        if !*t {
            *t = true;
            out.push(i);
        }
    }
    out
}

pub fn select_batch(vectors: &[Vec<f64>], n: usize, seed: u64) -> Vec<usize> {
    select_batch_with(vectors, n, seed, KMeansOptions::default(), Execution::default())
}
