//! Lloyd's K-means with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TeamError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    /// Stop once no centroid moves farther than this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { k: 5, max_iterations: 300, tolerance: 1e-6, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Cluster index per input sample, in input order.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after every assignment step, starting with the seeding.
    pub inertia_history: Vec<f64>,
    /// How many times an empty cluster was re-seeded.
    pub reseeded: usize,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.centroids.len()];
        for &a in &self.assignment {
            s[a] += 1;
        }
        s
    }

    /// Nearest centroid for a new sample, with a margin-based confidence
    /// `1 − d₁/d₂` from the two smallest centroid distances.
    pub fn classify(&self, x: &[f64]) -> (usize, f64) {
        nearest_two(x, &self.centroids)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

pub(crate) fn nearest_two(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut d: Vec<(usize, f64)> = centroids.iter().enumerate().map(|(i, c)| (i, sq_dist(x, c).sqrt())).collect();
    d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    match d.as_slice() {
        [] => (0, 0.0),
        [only] => (only.0, 1.0),
        [first, second, ..] => {
            let conf = if second.1 > 0.0 { 1.0 - first.1 / second.1 } else { 0.0 };
            (first.0, conf.clamp(0.0, 1.0))
        }
    }
}

fn seed_plus_plus(points: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].to_vec();
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Clusters feature vectors into `config.k` groups.
///
/// Samples are put in a canonical (lexicographic) order before seeding, so
/// the partition does not depend on input order. An empty cluster is
/// re-seeded at the sample farthest from its centroid.
pub fn cluster_teams<V: AsRef<[f64]>>(features: &[V], config: &KMeansConfig) -> Result<Clustering, TeamError> {
    let k = config.k;
    if k == 0 || features.len() < k {
        return Err(TeamError::TooFewSamples { found: features.len(), needed: k.max(1) });
    }
    let dim = features[0].as_ref().len();
    if features.iter().any(|f| f.as_ref().len() != dim) {
        return Err(TeamError::DimensionMismatch);
    }

    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (features[a].as_ref(), features[b].as_ref());
        x.iter().zip(y).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let points: Vec<&[f64]> = order.iter().map(|&i| features[i].as_ref()).collect();
    let n = points.len();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = seed_plus_plus(&points, k, &mut rng);
    let mut assign = vec![0usize; n];
    let mut dist = vec![0.0f64; n];
    let assign_all = |centroids: &[Vec<f64>], assign: &mut [usize], dist: &mut [f64]| -> f64 {
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, centroids);
            assign[i] = c;
            dist[i] = d;
            inertia += d;
        }
        inertia
    };

    let mut inertia = assign_all(&centroids, &mut assign, &mut dist);
    let mut history = vec![inertia];
    let mut iterations = 0;
    let mut reseeded = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assign[i]] += 1;
            for (s, v) in sums[assign[i]].iter_mut().zip(p.iter()) {
                *s += v;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            if counts[c] > 0 {
                let mean: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
                shift = shift.max(sq_dist(&mean, &centroids[c]).sqrt());
                centroids[c] = mean;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            // Farthest sample among clusters that can spare one.
            let far =
                (0..n).filter(|&i| counts[assign[i]] > 1).max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                counts[c] = 1;
                assign[i] = c;
                dist[i] = 0.0;
                shift = shift.max(sq_dist(points[i], &centroids[c]).sqrt());
                centroids[c] = points[i].to_vec();
                reseeded += 1;
            }
        }
        let next = assign_all(&centroids, &mut assign, &mut dist);
        inertia = next;
        history.push(inertia);
        if shift < config.tolerance {
            break;
        }
    }

    let mut assignment = vec![0usize; n];
    for (pos, &orig) in order.iter().enumerate() {
        assignment[orig] = assign[pos];
    }
    Ok(Clustering { assignment, centroids, inertia, iterations, inertia_history: history, reseeded })
}
