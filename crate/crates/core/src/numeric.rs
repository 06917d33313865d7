//! Small numeric kernels shared across modules.
//!
//! Reductions here run in a fixed order so results never depend on how
//! work was split across threads: parallel callers collect per-item values
//! first and reduce them with these functions afterwards.

/// Neumaier-compensated sum, sequential in slice order.
pub fn sum(values: &[f64]) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for &v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn mean(values: &[f64]) -> f64 {
    sum(values) / values.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    sum(&dev) / (n - 1) as f64
}

/// Standard error of the mean.
pub fn std_error(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    (sample_variance(values) / values.len() as f64).sqrt()
}

/// Squared Euclidean distance with four interleaved accumulators.
///
/// The accumulation pattern is fixed, so the result is deterministic, and
/// independent lanes let the compiler vectorize the loop.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        for l in 0..4 {
            let d = a[j + l] - b[j + l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for j in 4 * chunks..a.len() {
        let d = a[j] - b[j];
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// [`squared_distance`] that gives up once the running sum exceeds `bound`.
///
/// Returns `None` only when the full distance is strictly greater than
/// `bound`; otherwise the value is bit-identical to [`squared_distance`].
#[inline]
pub fn squared_distance_within(a: &[f64], b: &[f64], bound: f64) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    const BLOCK: usize = 64;
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    let mut i = 0;
    while i < chunks {
        let end = (i + BLOCK / 4).min(chunks);
        for k in i..end {
            let j = 4 * k;
            for l in 0..4 {
                let d = a[j + l] - b[j + l];
                acc[l] += d * d;
            }
        }
        i = end;
        if (acc[0] + acc[1]) + (acc[2] + acc[3]) > bound {
            return None;
        }
    }
    let mut tail = 0.0;
    for j in 4 * chunks..a.len() {
        let d = a[j] - b[j];
        tail += d * d;
    }
    let total = (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
    (total <= bound).then_some(total)
}

/// Exact squared distance between byte vectors.
#[inline]
pub fn squared_distance_u8(a: &[u8], b: &[u8]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    let mut total = 0u64;
    // 4096 * 255^2 fits in u32.
    for (ca, cb) in a.chunks(4096).zip(b.chunks(4096)) {
        let mut acc = 0u32;
        for (&x, &y) in ca.iter().zip(cb) {
            let d = x as i32 - y as i32;
            acc += (d * d) as u32;
        }
        total += acc as u64;
    }
    total
}

/// Logistic sigmoid, evaluated without overflow for any finite input.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `n` points log-spaced between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(sum(&v), 1.0);
    }

    #[test]
    fn variance_of_constant_is_zero() {
        assert_eq!(sample_variance(&[3.0; 10]), 0.0);
        assert_eq!(std_error(&[1.0]), 0.0);
    }

    #[test]
    fn bounded_distance_agrees_with_full() {
        let a: Vec<f64> = (0..203).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..203).map(|i| (i as f64 * 0.11).cos()).collect();
        let full = squared_distance(&a, &b);
        assert_eq!(squared_distance_within(&a, &b, f64::INFINITY), Some(full));
        assert_eq!(squared_distance_within(&a, &b, full), Some(full));
        assert_eq!(squared_distance_within(&a, &b, full * 0.999), None);
        assert_eq!(squared_distance_within(&a, &b, 0.0), None);
    }

    #[test]
    fn logistic_limits() {
        assert_eq!(logistic(0.0), 0.5);
        assert_eq!(logistic(800.0), 1.0);
        assert!(logistic(-800.0) >= 0.0);
        assert!((logistic(-(99f64).ln()) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(0.01, 1.0, 20);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 0.01).abs() < 1e-15);
        assert!((g[19] - 1.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    proptest! {
        #[test]
        fn squared_distance_matches_naive(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..40)) {
            let a: Vec<f64> = v.iter().map(|p| p.0).collect();
            let b: Vec<f64> = v.iter().map(|p| p.1).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            prop_assert!((squared_distance(&a, &b) - naive).abs() <= 1e-9 * naive.max(1.0));
        }

        #[test]
        fn byte_distance_matches_float(v in prop::collection::vec((any::<u8>(), any::<u8>()), 0..5000)) {
            let a: Vec<u8> = v.iter().map(|p| p.0).collect();
            let b: Vec<u8> = v.iter().map(|p| p.1).collect();
            let af: Vec<f64> = a.iter().map(|&x| x as f64).collect();
            let bf: Vec<f64> = b.iter().map(|&x| x as f64).collect();
            prop_assert_eq!(squared_distance_u8(&a, &b) as f64, squared_distance(&af, &bf));
        }
    }
}
