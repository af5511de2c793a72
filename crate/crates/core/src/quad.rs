//! Adaptive Gauss–Kronrod quadrature and compensated summation.
//!
//! The rule is the 10-point Gauss / 21-point Kronrod pair with the error
//! heuristic of QUADPACK's `qk21`. Subdivision is global: the panel with the
//! largest error estimate is bisected until the summed estimate meets the
//! tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_050,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}

/// Result of one 21-point panel.
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    /// Rounding floor of `err`; bisection cannot push the error below it.
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    if !value.is_finite() {
        return Err(Error::Evaluation(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let mut floor = 0.0;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor = 50.0 * f64::EPSILON * res_abs;
        err = err.max(floor);
    }
    Ok(Panel {
        a,
        b,
        value,
        err,
        floor,
    })
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub subdivisions: usize,
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (sorted, at least two entries).
///
/// Panels too narrow to bisect in floating point are retired with their
/// current estimate; their error still counts towards `abs_err`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "integration needs at least two points".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut retired = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(Error::InvalidArgument(format!(
                "bad integration panel [{a}, {b}]"
            )));
        }
        if b > a {
            heap.push(gk21(&f, a, b)?);
        }
    }
    let mut total: f64 = heap.iter().map(|p: &Panel| p.value).sum();
    let mut total_err: f64 = heap.iter().map(|p: &Panel| p.err).sum();
    let mut total_floor: f64 = heap.iter().map(|p: &Panel| p.floor).sum();
    let mut retired_err = 0.0;
    let mut subdivisions = heap.len();

    loop {
        let target = opts
            .abs_tol
            .max(opts.rel_tol * total.abs())
            .max((1.0 + 1e-9) * total_floor);
        if total_err + retired_err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 8.0 * f64::EPSILON * mid.abs()
        {
            total_err -= worst.err;
            retired_err += worst.err;
            retired.push(worst);
            continue;
        }
        if subdivisions >= opts.max_subdivisions {
            heap.push(worst);
            let value = sum_panels(heap.iter().chain(retired.iter()));
            return Err(Error::Quadrature {
                subdivisions,
                estimate: value,
                abs_err: total_err + retired_err,
            });
        }
        let left = gk21(&f, worst.a, mid)?;
        let right = gk21(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        total_floor += left.floor + right.floor - worst.floor;
        subdivisions += 1;
        heap.push(left);
        heap.push(right);
        // Periodic resync keeps the incremental totals from drifting.
        if subdivisions % 64 == 0 {
            total = sum_panels(heap.iter().chain(retired.iter()));
            total_err = heap.iter().map(|p| p.err).sum();
            total_floor = heap.iter().chain(retired.iter()).map(|p| p.floor).sum();
        }
    }

    let value = sum_panels(heap.iter().chain(retired.iter()));
    let abs_err: f64 = heap.iter().chain(retired.iter()).map(|p| p.err).sum();
    Ok(QuadResult {
        value,
        abs_err,
        subdivisions,
    })
}

fn sum_panels<'a, I: Iterator<Item = &'a Panel>>(it: I) -> f64 {
    it.map(|p| p.value).collect::<CompensatedSum>().value()
}

/// `ln C(n, k)`, summed term by term so it stays accurate for large `n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "ln_binomial: k > n");
    let k = k.min(n - k);
    let mut acc = CompensatedSum::new();
    for i in 1..=k {
        acc.add(((n - k + i) as f64 / i as f64).ln());
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> QuadOptions {
        QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_subdivisions: 500,
        }
    }

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        for d in (0..=31).step_by(2) {
            let p = gk21(&|x: f64| x.powi(d), -1.0, 1.0).unwrap();
            assert!(
                (p.value - 2.0 / (d as f64 + 1.0)).abs() < 1e-14,
                "degree {d}"
            );
        }
    }

    #[test]
    fn smooth_integrals() {
        let r = integrate(|x: f64| x.sin(), &[0.0, std::f64::consts::PI], &opts()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x: f64| (-x).exp(), &[0.0, 40.0], &opts()).unwrap();
        assert!((r.value - (1.0 - (-40.0f64).exp())).abs() < 1e-13);
        assert!(r.abs_err < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x: f64| x.powf(-0.5), &[0.0, 1.0], &opts()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn sharp_peak_with_breakpoints() {
        // n x^{n-1} on [0,1] with n = 2000
        let n = 2000.0;
        let f = |x: f64| n * x.powf(n - 1.0);
        let r = integrate(f, &[0.0, 0.99, 1.0], &opts()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let o = QuadOptions {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_subdivisions: 3,
        };
        let e = integrate(|x: f64| (1.0 / x).sin(), &[1e-3, 1.0], &o).unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }

    #[test]
    fn binomials() {
        assert!((ln_binomial(5, 2) - 10f64.ln()).abs() < 1e-15);
        assert_eq!(ln_binomial(7, 0), 0.0);
        assert!((ln_binomial(3000, 1500) - 2075.2124832100344).abs() < 1e-9);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(&xs), 2e-16);
    }
}
