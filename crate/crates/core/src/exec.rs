//! Data-parallel helpers with a sequential fallback. Results never depend on
//! the strategy: `find_first` always reports the earliest match in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How independent work items are dispatched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled; otherwise
    /// identical to `Sequential`.
    #[default]
    Parallel,
}

impl Exec {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Earliest item (by index) for which `f` returns `Some`.
    pub fn find_first<T, R, F>(self, items: &[T], f: F) -> Option<(usize, R)>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Option<R> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items
                .par_iter()
                .enumerate()
                .find_map_first(|(i, x)| f(x).map(|r| (i, r))),
            _ => items.iter().enumerate().find_map(|(i, x)| f(x).map(|r| (i, r))),
        }
    }

    /// Applies `f` to each index range chunk of `0..n` and collects in order.
    pub fn map_chunks<R, F>(self, n: u64, chunk: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64, u64) -> R + Sync + Send,
    {
        let chunk = chunk.max(1);
        let bounds: Vec<(u64, u64)> = (0..n.div_ceil(chunk))
            .map(|k| (k * chunk, ((k + 1) * chunk).min(n)))
            .collect();
        self.map(&bounds, |&(a, b)| f(a, b))
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Sets the size of the global worker pool. Has no effect without the
/// `parallel` feature or after the pool has been initialized.
pub fn set_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let xs: Vec<u32> = (0..1000).collect();
        for e in [Exec::Sequential, Exec::Parallel] {
            assert_eq!(e.map(&xs, |x| x * 2)[999], 1998);
            assert_eq!(e.find_first(&xs, |&x| (x % 97 == 96).then_some(x)), Some((96, 96)));
            let sums = e.map_chunks(10, 3, |a, b| b - a);
            assert_eq!(sums, vec![3, 3, 3, 1]);
        }
    }
}
