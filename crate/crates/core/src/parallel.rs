//! Ordered mapping over independent work items.
//!
//! With the `parallel` feature the dispatched map runs on the rayon pool;
//! without it the sequential body is used. Item order is preserved either
//! way and each item is computed by the same code, so both paths return
//! bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential ordered map; always available (the benches compare against it).
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Ordered map over items, parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Ordered map over items, parallel when the `parallel` feature is enabled.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_collect_seq(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatched_map_matches_sequential() {
        let items: Vec<f64> = (0..257).map(|i| i as f64 * 0.37).collect();
        let f = |x: &f64| (x.sin() * x.exp()).to_bits();
        assert_eq!(map_collect(&items, f), map_collect_seq(&items, f));
    }
}
