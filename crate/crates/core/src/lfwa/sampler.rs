use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Source of the random draws the fireworks operators consume.
///
/// Every `rand::Rng` is a `Sampler`. Tests substitute fixed-draw
/// implementations to pin operator outputs (for example β = 1 or a zero
/// Gaussian deviate).
pub trait Sampler {
    /// Uniform draw from `[0, 1)`.
    fn unit(&mut self) -> f64;

    /// Draw from N(0, 1).
    fn standard_normal(&mut self) -> f64;

    /// Uniform index in `0..n`. `n` must be positive.
    fn below(&mut self, n: usize) -> usize;
}

impl<R: Rng + ?Sized> Sampler for R {
    fn unit(&mut self) -> f64 {
        self.random::<f64>()
    }

    fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    fn below(&mut self, n: usize) -> usize {
        self.random_range(0..n)
    }
}

/// Picks `k` distinct indices from `0..n` uniformly (partial Fisher-Yates),
/// returned in draw order.
pub(crate) fn choose_distinct<S: Sampler + ?Sized>(sampler: &mut S, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + sampler.below(n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
