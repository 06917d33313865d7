use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::numeric::{squared_distance, squared_distance_within, sum};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: SampleMatrix,
    pub assignments: Vec<usize>,
    /// Sum of squared distances from each point to its assigned centroid.
    pub inertia: f64,
    /// Inertia after the initial assignment and after every iteration.
    pub history: Vec<f64>,
    /// Number of update-and-reassign rounds performed.
    pub iterations: usize,
}

/// Index and squared distance of the nearest centroid, lowest index on ties.
/// The previous assignment is tried first so most other centroids can be
/// rejected after a partial sum.
fn nearest(x: &[f64], centroids: &SampleMatrix, hint: usize) -> (usize, f64) {
    let mut best_j = hint;
    let mut best = squared_distance(x, centroids.row(hint));
    for j in 0..centroids.rows() {
        if j == hint {
            continue;
        }
        if let Some(d) = squared_distance_within(x, centroids.row(j), best) {
            if d < best || (d == best && j < best_j) {
                best = d;
                best_j = j;
            }
        }
    }
    (best_j, best)
}

fn assign(data: &SampleMatrix, centroids: &SampleMatrix, previous: &[usize]) -> (Vec<usize>, Vec<f64>) {
    data.as_slice()
        .par_chunks_exact(data.cols())
        .zip(previous.par_iter())
        .map(|(x, &h)| nearest(x, centroids, h))
        .unzip()
}

/// k-means++ seeding: the first center uniformly, each next one with
/// probability proportional to the squared distance to the nearest chosen
/// center (uniformly when every point coincides with a center).
fn plus_plus(data: &SampleMatrix, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = data.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = data
        .as_slice()
        .par_chunks_exact(data.cols())
        .map(|x| squared_distance(x, data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total = sum(&d2);
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &v) in d2.iter().enumerate() {
                acc += v;
                if v > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`.
            pick.unwrap_or_else(|| d2.iter().rposition(|v| *v > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        let c = data.row(next);
        d2.par_iter_mut()
            .zip(data.as_slice().par_chunks_exact(data.cols()))
            .for_each(|(d, x)| *d = d.min(squared_distance(x, c)));
    }
    chosen
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Each iteration moves every centroid to the mean of its points and then
/// reassigns points; the loop ends after `max_iters` iterations or once an
/// iteration leaves every assignment unchanged. A centroid that loses all
/// its points is moved onto the point farthest from its own centroid.
pub fn kmeans(data: &SampleMatrix, k: usize, max_iters: usize, seed: Seed) -> Result<KMeansResult> {
    let n = data.rows();
    let d = data.cols();
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= {n}, got {k}")));
    }
    let mut rng = seed.rng();
    let init = plus_plus(data, k, &mut rng);
    let mut centroids = data.select_rows(&init)?;
    let (mut assignments, mut dist) = assign(data, &centroids, &vec![0; n]);
    let mut history = vec![sum(&dist)];
    let mut iterations = 0;
    while iterations < max_iters {
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (x, &a) in data.iter_rows().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(x) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let c = counts[j] as f64;
                sums[j * d..(j + 1) * d].iter_mut().for_each(|s| *s /= c);
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("n >= 1");
                sums[j * d..(j + 1) * d].copy_from_slice(data.row(far));
                dist[far] = 0.0;
            }
        }
        centroids = SampleMatrix::new(k, d, sums)?;
        let (next, next_dist) = assign(data, &centroids, &assignments);
        iterations += 1;
        let unchanged = next == assignments;
        assignments = next;
        dist = next_dist;
        history.push(sum(&dist));
        if unchanged {
            break;
        }
    }
    Ok(KMeansResult {
        centroids,
        assignments,
        inertia: *history.last().expect("nonempty"),
        history,
        iterations,
    })
}

/// `n` rows drawn uniformly with replacement from `centroids`, without
/// added noise.
pub fn sample_centroids(centroids: &SampleMatrix, n: usize, seed: Seed) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one sample"));
    }
    let mut rng = seed.rng();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..centroids.rows())).collect();
    centroids.select_rows(&idx)
}
