//! Order-preserving map, parallel with the `parallel` feature.

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(xs: &[T], f: F) -> Vec<U> {
    use rayon::prelude::*;
    xs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(xs: &[T], f: F) -> Vec<U> {
    xs.iter().map(f).collect()
}
