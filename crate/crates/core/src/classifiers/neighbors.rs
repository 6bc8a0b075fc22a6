//! k-nearest neighbors with Euclidean distance.

/// Malicious fraction among the `k` nearest training points; distance
/// ties go to the earlier training point.
pub fn knn_score(x: &[Vec<f64>], y: &[u8], k: usize, v: &[f64]) -> f64 {
    let mut dist: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    let k = k.min(dist.len());
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    dist[..k].iter().filter(|(_, i)| y[*i] == 1).count() as f64 / k as f64
}
