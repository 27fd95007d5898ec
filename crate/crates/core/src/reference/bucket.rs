/// Geometric buckets for vector lengths and observation counts.
pub const BUCKETS: [usize; 10] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000];

/// Nearest bucket in log distance; ties go to the smaller bucket.
pub fn bucket(n: usize) -> usize {
    let ln = (n.max(1) as f64).ln();
    let mut best = BUCKETS[0];
    let mut best_dist = f64::INFINITY;
    for &b in &BUCKETS {
        let dist = ((b as f64).ln() - ln).abs();
        if dist < best_dist {
            best = b;
            best_dist = dist;
        }
    }
    best
}
