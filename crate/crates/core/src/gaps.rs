//! Expected gaps between consecutive order statistics.
//!
//! Three deterministic routes are provided:
//!
//! * [`gap_expectation`] and [`r_direct`]: `C(n,k) ∫ F^k (1−F)^{n−k} dx`;
//! * [`r_stieltjes`]: `∫ F^n d(−μ)` over `(L, M]`, i.e. an absolutely
//!   continuous part `∫ F^n (−μ′) dx`, the atoms of `d(−μ)` at jumps of the
//!   inverse hazard rate, and the boundary term `μ(M−) F^n(M−)`;
//! * [`cm_witness`]: the same measure against `F^n (1−F)^k`, which equals the
//!   alternating forward difference `(−1)^k Δ^k R_n`.
//!
//! Infinite endpoints are truncated at quantiles `Q(δ)`, `Q(1−δ)` and the
//! neglected tails are bounded and added to the error estimate. Finite
//! endpoints are integrated to directly.

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::quad::{integrate, ln_binomial, QuadOptions};

/// How a gap value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Stieltjes,
    Continuous,
    Mc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Stieltjes => "stieltjes",
            Method::Continuous => "continuous",
            Method::Mc => "mc",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "direct" => Ok(Method::Direct),
            "stieltjes" => Ok(Method::Stieltjes),
            "continuous" => Ok(Method::Continuous),
            "mc" => Ok(Method::Mc),
            other => Err(Error::Parse(format!(
                "unknown method {other:?} (expected direct, stieltjes, continuous or mc)"
            ))),
        }
    }
}

/// One computed gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapValue {
    /// Sample size.
    pub n: u64,
    /// Lower order statistic index (`n − 1` for `R_n`, the order for witnesses).
    pub k: u64,
    /// Real argument; equals `n` except for [`r_continuous`].
    pub argument: f64,
    pub value: f64,
    pub method: Method,
    pub err_estimate: f64,
    /// Set when the result is outside the range where it can be trusted.
    pub low_confidence: bool,
}

/// Tolerances and truncation for the quadrature routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Probability mass `δ` cut from each infinite tail.
    pub tail_mass: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: defaults::REL_TOL,
            abs_tol: defaults::ABS_TOL,
            tail_mass: defaults::TAIL_MASS,
            max_subdivisions: defaults::MAX_SUBDIVISIONS,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.tail_mass > 0.0
            && self.tail_mass < 1e-3
            && self.max_subdivisions > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "quadrature config needs positive tolerances and 0 < tail_mass < 1e-3: {self:?}"
            )))
        }
    }

    fn options(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }

    fn relaxed(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: 1e-6,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Where to get `μ′` for the absolutely continuous part of `d(−μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlopeSource {
    /// Closed form when the model has one, else finite differences.
    #[default]
    Auto,
    /// Always central differences with Richardson extrapolation.
    Numeric,
}

/// Integration window after truncating infinite endpoints.
#[derive(Debug, Clone, Copy)]
struct Window {
    lo: f64,
    hi: f64,
    lower_cut: bool,
    upper_cut: bool,
}

fn window(dist: &DistributionSpec, cfg: &QuadratureConfig) -> Result<Window> {
    let b = dist.bounds();
    let (lower_cut, upper_cut) = (b.lower.is_infinite(), b.upper.is_infinite());
    let lo = if lower_cut {
        dist.quantile(cfg.tail_mass)
    } else {
        b.lower
    };
    let hi = if upper_cut {
        dist.survival_quantile(cfg.tail_mass)
    } else {
        b.upper
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Evaluation(format!(
            "could not form an integration window for {} (got [{lo}, {hi}])",
            dist.name()
        )));
    }
    Ok(Window {
        lo,
        hi,
        lower_cut,
        upper_cut,
    })
}

/// Panel boundaries: window ends, model breakpoints, and points around the
/// peak of `F^a (1−F)^b`, which sits near the `a/(a+b)` quantile.
fn panel_points(dist: &DistributionSpec, w: &Window, a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![w.lo, w.hi];
    pts.extend(dist.breakpoints());
    let total = a + b;
    if total > 0.0 {
        let p0 = a / total;
        let q0 = b / total;
        let sd = (p0 * q0 / (total + 1.0)).sqrt();
        for j in [-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0] {
            let p = p0 + j * sd;
            let q = q0 - j * sd;
            if p <= 0.0 || q <= 0.0 {
                continue;
            }
            let x = if p < 0.5 {
                dist.quantile(p)
            } else {
                dist.survival_quantile(q)
            };
            pts.push(x);
        }
    }
    pts.retain(|x| x.is_finite() && *x >= w.lo && *x <= w.hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫_{x_hi}^{M} (1 − F) dx`, summed over pieces between successively
/// deeper survival quantiles.
fn upper_tail_survival(
    dist: &DistributionSpec,
    x_hi: f64,
    q_hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut total = 0.0;
    let mut q = q_hi;
    let mut a = x_hi;
    while q > 1e-290 {
        let q_next = q * 1e-3;
        let b = dist.survival_quantile(q_next);
        if !(b.is_finite() && b > a) {
            break;
        }
        let piece = integrate(|x| dist.survival(x), &[a, b], &cfg.relaxed())?.value;
        total += piece;
        if piece <= 1e-6 * total {
            break;
        }
        a = b;
        q = q_next;
    }
    Ok(total)
}

/// `∫_{L}^{x_lo} F dx` for an infinite lower endpoint.
fn lower_tail_cdf(
    dist: &DistributionSpec,
    x_lo: f64,
    p_lo: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut total = 0.0;
    let mut p = p_lo;
    let mut b = x_lo;
    while p > 1e-290 {
        let p_next = p * 1e-3;
        let a = dist.quantile(p_next);
        if !(a.is_finite() && a < b) {
            break;
        }
        let piece = integrate(|x| dist.cdf(x), &[a, b], &cfg.relaxed())?.value;
        total += piece;
        if piece <= 1e-6 * total {
            break;
        }
        b = a;
        p = p_next;
    }
    Ok(total)
}

/// `e^{ln_coef} ∫ F^a (1−F)^b dx` with certified tails, for `a ≥ 1`, `b ≥ 1`
/// or `a = 0` on a finite lower endpoint.
fn beta_type_integral(
    dist: &DistributionSpec,
    ln_coef: f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    let w = window(dist, cfg)?;
    let pts = panel_points(dist, &w, a, b);
    let integrand = |x: f64| {
        let (ln_f, ln_s) = dist.log_cdf_and_survival(x);
        let mut e = ln_coef;
        if a != 0.0 {
            e += a * ln_f;
        }
        if b != 0.0 {
            e += b * ln_s;
        }
        e.exp()
    };
    let r = integrate(integrand, &pts, &cfg.options())?;
    let coef = ln_coef.exp();
    let mut err = r.abs_err;
    if w.upper_cut {
        err += coef * upper_tail_survival(dist, w.hi, cfg.tail_mass, cfg)?;
    }
    if w.lower_cut {
        err += coef * lower_tail_cdf(dist, w.lo, cfg.tail_mass, cfg)?;
    }
    Ok((r.value, err))
}

fn roundoff(value: f64) -> f64 {
    100.0 * f64::EPSILON * value.abs()
}

/// `E(X_{k+1:n} − X_{k:n}) = C(n,k) ∫ F^k (1−F)^{n−k} dx`.
pub fn gap_expectation(
    dist: &DistributionSpec,
    n: u64,
    k: u64,
    cfg: &QuadratureConfig,
) -> Result<GapValue> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "gap_expectation needs n >= 2 and 1 <= k <= n-1, got n = {n}, k = {k}"
        )));
    }
    let (value, err) = beta_type_integral(dist, ln_binomial(n, k), k as f64, (n - k) as f64, cfg)?;
    Ok(GapValue {
        n,
        k,
        argument: n as f64,
        value: value.max(0.0),
        method: Method::Direct,
        err_estimate: err + roundoff(value),
        low_confidence: false,
    })
}

/// `E X_1`, from `∫ (1−F)` above and `∫ F` below an anchor point.
fn mean(dist: &DistributionSpec, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let b = dist.bounds();
    let anchor = if b.lower.is_finite() {
        b.lower
    } else {
        dist.quantile(0.5)
    };
    let (upper, mut err) = {
        let w = window(dist, cfg)?;
        let hi = w.hi;
        let mut pts = vec![anchor, hi];
        pts.extend(
            dist.breakpoints()
                .into_iter()
                .filter(|&x| x > anchor && x < hi),
        );
        pts.sort_by(f64::total_cmp);
        let r = integrate(|x| dist.survival(x), &pts, &cfg.options())?;
        let mut err = r.abs_err;
        if w.upper_cut {
            err += upper_tail_survival(dist, hi, cfg.tail_mass, cfg)?;
        }
        (r.value, err)
    };
    let mut value = anchor + upper;
    if b.lower.is_infinite() {
        let lo = dist.quantile(cfg.tail_mass);
        let r = integrate(|x| dist.cdf(x), &[lo, anchor], &cfg.options())?;
        value -= r.value;
        err += r.abs_err + lower_tail_cdf(dist, lo, cfg.tail_mass, cfg)?;
    }
    Ok((value, err))
}

fn real_gap(dist: &DistributionSpec, u: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    if u == 1.0 {
        mean(dist, cfg)
    } else {
        beta_type_integral(dist, u.ln(), u - 1.0, 1.0, cfg)
    }
}

/// `R_n = n ∫ F^{n−1} (1−F) dx`; `R_1 = E X_1`.
pub fn r_direct(dist: &DistributionSpec, n: u64, cfg: &QuadratureConfig) -> Result<GapValue> {
    if n < 1 {
        return Err(Error::InvalidArgument("r_direct needs n >= 1".into()));
    }
    let (value, err) = real_gap(dist, n as f64, cfg)?;
    Ok(GapValue {
        n,
        k: n - 1,
        argument: n as f64,
        value: if n == 1 { value } else { value.max(0.0) },
        method: Method::Direct,
        err_estimate: err + roundoff(value),
        low_confidence: false,
    })
}

/// `R(u) = u ∫ F^{u−1} (1−F) dx` for real `u ≥ 1`.
pub fn r_continuous(dist: &DistributionSpec, u: f64, cfg: &QuadratureConfig) -> Result<GapValue> {
    if !(u >= 1.0) || !u.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "r_continuous needs finite u >= 1, got {u}"
        )));
    }
    let (value, err) = real_gap(dist, u, cfg)?;
    let n = u.floor() as u64;
    Ok(GapValue {
        n,
        k: n.saturating_sub(1),
        argument: u,
        value: if u == 1.0 { value } else { value.max(0.0) },
        method: Method::Continuous,
        err_estimate: err + roundoff(value),
        low_confidence: false,
    })
}

fn require_ihr(dist: &DistributionSpec) -> Result<()> {
    let v = dist.ihr_verdict()?;
    if v.is_ihr {
        return Ok(());
    }
    let (a, b, violation) = v.witness.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    Err(Error::NotIhr { a, b, violation })
}

/// `∫_{(L,M]} F^n(x−) (1 − F(x−))^k d(−μ(x))` with error estimate.
fn stieltjes_integral(
    dist: &DistributionSpec,
    n: u64,
    k: u64,
    cfg: &QuadratureConfig,
    slope: SlopeSource,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    require_ihr(dist)?;
    let w = window(dist, cfg)?;
    let (nf, kf) = (n as f64, k as f64);
    let weight = |x: f64| {
        let (ln_f, ln_s) = dist.log_cdf_and_survival(x);
        let e = nf * ln_f + if k > 0 { kf * ln_s } else { 0.0 };
        e.exp()
    };
    let minus_slope = |x: f64| -> f64 {
        let s = match slope {
            SlopeSource::Auto => dist.inverse_hazard_slope_or_numeric(x),
            SlopeSource::Numeric => dist.inverse_hazard_slope_numeric(x),
        };
        -s
    };
    let pts = panel_points(dist, &w, nf, kf + 1.0);
    let integrand = |x: f64| {
        let wgt = weight(x);
        if wgt == 0.0 {
            0.0
        } else {
            wgt * minus_slope(x)
        }
    };
    let r = integrate(integrand, &pts, &cfg.options())?;
    let mut value = r.value;
    let mut err = r.abs_err;

    for (x, mass) in dist.inverse_hazard_jumps() {
        if x > w.lo && x < w.hi {
            value += weight(x) * mass;
        }
    }

    let b = dist.bounds();
    if let Some(mu_upper) = dist.inverse_hazard_at_upper() {
        let s = b.survival_at_upper;
        let f_left = 1.0 - s;
        let term = mu_upper * f_left.powf(nf) * if k > 0 { s.powf(kf) } else { 1.0 };
        value += term;
    } else if k == 0 {
        // Boundary term at the truncation point; makes the truncated
        // representation equal to the truncated direct integral.
        value += dist.inverse_hazard(w.hi) * weight(w.hi);
        err += nf * upper_tail_survival(dist, w.hi, cfg.tail_mass, cfg)?;
    } else {
        err += cfg.tail_mass.powf(kf) * dist.inverse_hazard(w.hi);
    }
    if w.lower_cut {
        let tail = dist.inverse_hazard(w.lo) * weight(w.lo);
        if k == 0 {
            value -= tail;
            err += nf * lower_tail_cdf(dist, w.lo, cfg.tail_mass, cfg)?;
        } else {
            err += tail;
        }
    }
    Ok((value, err + roundoff(value)))
}

/// `R_n` through the inverse-hazard Stieltjes representation.
///
/// Fails with [`Error::NotIhr`] unless the hazard rate is increasing, since
/// only then is `d(−μ)` a positive measure.
pub fn r_stieltjes(dist: &DistributionSpec, n: u64, cfg: &QuadratureConfig) -> Result<GapValue> {
    r_stieltjes_with(dist, n, cfg, SlopeSource::Auto)
}

/// [`r_stieltjes`] with an explicit choice of `μ′` evaluation.
pub fn r_stieltjes_with(
    dist: &DistributionSpec,
    n: u64,
    cfg: &QuadratureConfig,
    slope: SlopeSource,
) -> Result<GapValue> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "r_stieltjes needs n >= 2, got {n}"
        )));
    }
    let (value, err) = stieltjes_integral(dist, n, 0, cfg, slope)?;
    Ok(GapValue {
        n,
        k: n - 1,
        argument: n as f64,
        value,
        method: Method::Stieltjes,
        err_estimate: err,
        low_confidence: false,
    })
}

/// `(−1)^k Δ^k R_n = ∫ F^n (1−F)^k d(−μ)`, nonnegative for IHR inputs.
///
/// Orders above [`defaults::WITNESS_ORDER_CAP`] are computed but flagged
/// low-confidence.
pub fn cm_witness(
    dist: &DistributionSpec,
    n: u64,
    k: u64,
    cfg: &QuadratureConfig,
) -> Result<GapValue> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cm_witness needs n >= 2, got {n}"
        )));
    }
    let (value, err) = stieltjes_integral(dist, n, k, cfg, SlopeSource::Auto)?;
    Ok(GapValue {
        n,
        k,
        argument: n as f64,
        value,
        method: Method::Stieltjes,
        err_estimate: err,
        low_confidence: k as usize > defaults::WITNESS_ORDER_CAP,
    })
}

/// Computes `R_n` for every `n` in `range` with `method`.
pub fn gap_sequence_values(
    dist: &DistributionSpec,
    range: std::ops::RangeInclusive<u64>,
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<Vec<GapValue>> {
    range
        .map(|n| match method {
            Method::Direct => r_direct(dist, n, cfg),
            Method::Stieltjes => r_stieltjes(dist, n, cfg),
            Method::Continuous => r_continuous(dist, n as f64, cfg),
            Method::Mc => Err(Error::InvalidArgument(
                "Monte Carlo values come from the mc module".into(),
            )),
        })
        .collect()
}
