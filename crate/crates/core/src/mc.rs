//! Monte Carlo estimates of order-statistic gaps.
//!
//! Uniforms come from a counter-addressed ChaCha8 stream: coordinate `j` of
//! sample `i` is the 64-bit word at position `i·n + j`, so the variates do not
//! depend on how samples are split across shards. Samples are reduced in
//! fixed blocks of [`MC_BLOCK`](crate::defaults::MC_BLOCK) whose accumulators
//! are merged in a fixed pairwise tree, which makes the floating-point result
//! independent of the shard count too.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::defaults::MC_BLOCK;
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::quad::ln_binomial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub shards: usize,
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let n = a.count + b.count;
        let (na, nb) = (a.count as f64, b.count as f64);
        let d = b.mean - a.mean;
        Self {
            count: n,
            mean: a.mean + d * (nb / n as f64),
            m2: a.m2 + b.m2 + d * d * (na * nb / n as f64),
        }
    }
}

/// Reduces block accumulators pairwise by index: `((b0 b1)(b2 b3))…`.
fn tree_merge(mut level: Vec<Moments>) -> Moments {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|c| {
                if c.len() == 2 {
                    Moments::merge(c[0], c[1])
                } else {
                    c[0]
                }
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Uniform in `(0, 1)` from the top 53 bits, never 0 or 1.
fn unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-transform draw, routed through the survival quantile above the
/// median so the upper tail keeps full relative precision.
fn draw(dist: &DistributionSpec, u: f64) -> f64 {
    if u < 0.5 {
        dist.quantile(u)
    } else {
        dist.survival_quantile(1.0 - u)
    }
}

#[derive(Debug, Clone, Copy)]
enum Statistic {
    /// `X_{k+1:n} − X_{k:n}`.
    Gap(usize),
    /// `X_{n:n} − X_{1:n}`.
    Range,
}

fn statistic(xs: &mut [f64], stat: Statistic) -> f64 {
    let n = xs.len();
    match stat {
        Statistic::Gap(k) if k == n - 1 => {
            let (mut a, mut b) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &x in xs.iter() {
                if x > a {
                    b = a;
                    a = x;
                } else if x > b {
                    b = x;
                }
            }
            a - b
        }
        Statistic::Gap(1) => {
            let (mut a, mut b) = (f64::INFINITY, f64::INFINITY);
            for &x in xs.iter() {
                if x < a {
                    b = a;
                    a = x;
                } else if x < b {
                    b = x;
                }
            }
            b - a
        }
        Statistic::Gap(k) => {
            xs.sort_unstable_by(f64::total_cmp);
            xs[k] - xs[k - 1]
        }
        Statistic::Range => {
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                });
            hi - lo
        }
    }
}

/// Accumulators for blocks `blocks` of the sample stream.
fn run_blocks(
    dist: &DistributionSpec,
    n: usize,
    stat: Statistic,
    samples: u64,
    seed: u64,
    blocks: std::ops::Range<u64>,
) -> Result<Vec<Moments>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = blocks.start * MC_BLOCK;
    // two 32-bit words per variate
    rng.set_word_pos(u128::from(first) * n as u128 * 2);
    let mut xs = vec![0.0; n];
    let mut out = Vec::with_capacity((blocks.end - blocks.start) as usize);
    for b in blocks {
        let end = ((b + 1) * MC_BLOCK).min(samples);
        let mut acc = Moments::default();
        for _ in b * MC_BLOCK..end {
            for x in xs.iter_mut() {
                *x = draw(dist, unit(rng.next_u64()));
            }
            if let Some(bad) = xs.iter().find(|x| x.is_nan()) {
                return Err(Error::Evaluation(format!("quantile returned {bad}")));
            }
            acc.push(statistic(&mut xs, stat));
        }
        out.push(acc);
    }
    Ok(out)
}

fn simulate(
    dist: &DistributionSpec,
    n: u64,
    stat: Statistic,
    samples: u64,
    seed: u64,
    shards: usize,
) -> Result<MCEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    if shards == 0 {
        return Err(Error::InvalidArgument("shards must be >= 1".into()));
    }
    let n_usize =
        usize::try_from(n).map_err(|_| Error::InvalidArgument(format!("n = {n} is too large")))?;
    let total_blocks = samples.div_ceil(MC_BLOCK);
    let per_shard = total_blocks.div_ceil(shards as u64);
    let ranges: Vec<_> = (0..shards as u64)
        .map(|s| (s * per_shard).min(total_blocks)..((s + 1) * per_shard).min(total_blocks))
        .filter(|r| !r.is_empty())
        .collect();

    let parts: Vec<Result<Vec<Moments>>> = if ranges.len() == 1 {
        vec![run_blocks(
            dist,
            n_usize,
            stat,
            samples,
            seed,
            ranges[0].clone(),
        )]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .iter()
                .map(|r| {
                    let r = r.clone();
                    scope.spawn(move || run_blocks(dist, n_usize, stat, samples, seed, r))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("monte carlo shard panicked"))
                .collect()
        })
    };
    let mut blocks = Vec::with_capacity(total_blocks as usize);
    for p in parts {
        blocks.extend(p?);
    }
    let m = tree_merge(blocks);
    let stderr = if m.count > 1 {
        (m.m2 / (m.count - 1) as f64).sqrt() / (m.count as f64).sqrt()
    } else {
        0.0
    };
    Ok(MCEstimate {
        mean: m.mean,
        stderr,
        samples,
        seed,
        shards,
    })
}

/// Estimates `E(X_{k+1:n} − X_{k:n})`.
pub fn mc_gap(
    dist: &DistributionSpec,
    n: u64,
    k: u64,
    samples: u64,
    seed: u64,
    shards: usize,
) -> Result<MCEstimate> {
    if n < 2 || k < 1 || k > n - 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and 1 <= k <= n-1, got n = {n}, k = {k}"
        )));
    }
    simulate(dist, n, Statistic::Gap(k as usize), samples, seed, shards)
}

/// Estimates `E(X_{n:n} − X_{1:n})`.
pub fn mc_extreme_range(
    dist: &DistributionSpec,
    n: u64,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be >= 2, got {n}")));
    }
    simulate(dist, n, Statistic::Range, samples, seed, 1)
}

/// `∫ C(n,k) F^k (1 − F)^{n−k} dx` by the trapezoidal rule on `grid + 1`
/// logit-spaced quantile nodes, truncated at tail mass `1e−10` on infinite
/// sides. Finite endpoints are used as nodes themselves.
pub fn survival_integral_check(
    dist: &DistributionSpec,
    n: u64,
    k: u64,
    grid: usize,
) -> Result<f64> {
    if n < 2 || k < 1 || k > n - 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and 1 <= k <= n-1, got n = {n}, k = {k}"
        )));
    }
    if grid < 1 {
        return Err(Error::InvalidArgument("grid must be >= 1".into()));
    }
    let bounds = dist.bounds();
    let mut xs = crate::dist::quantile_grid(dist, grid + 1, 1e-10);
    if bounds.lower.is_finite() {
        xs[0] = bounds.lower;
    }
    if bounds.upper.is_finite() {
        xs[grid] = bounds.upper;
    }
    let ln_c = ln_binomial(n, k);
    let f = |x: f64| {
        let p = dist.cdf_left(x);
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            (ln_c + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
        }
    };
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    Ok(xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum())
}
