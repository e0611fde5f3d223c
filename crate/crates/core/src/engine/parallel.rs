use rayon::prelude::*;

/// Evaluate `f(0..n)` and return results in index order.
///
/// `workers == 1` runs on the calling thread, `workers == 0` uses rayon's
/// default pool, anything else a dedicated pool of that size. The output never
/// depends on the worker count.
pub fn par_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match workers {
        1 => (0..n).map(f).collect(),
        0 => (0..n).into_par_iter().map(f).collect(),
        w => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = par_map(100, 1, |i| i * i);
        let b = par_map(100, 4, |i| i * i);
        let c = par_map(100, 0, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
