//! Execution strategy for batch loops.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] fans work
//! out over the rayon thread pool; without it every strategy runs on the
//! calling thread. Results are always returned in input order.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
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
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_preserve_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = Exec::Sequential.map(&xs, |x| x * x);
        let par = Exec::Parallel.map(&xs, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 998_001);
    }
}
