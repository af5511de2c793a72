//! Sequence-level checks on gap sequences: monotonicity, the second-order
//! inequalities, log-convexity and complete monotonicity, each judged against
//! an error floor propagated from the per-entry error estimates.
//!
//! Verdicts are tri-state. A margin that should be nonnegative is `pass` when
//! it is, `inconclusive` when it is negative but within the floor, and `fail`
//! only when the violation exceeds the floor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{GapValue, Method};

/// `R_{n_min}, R_{n_min+1}, …` with error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSequence {
    pub n_min: u64,
    pub values: Vec<f64>,
    pub err_estimates: Vec<f64>,
    pub source: Method,
}

impl GapSequence {
    pub fn new(
        n_min: u64,
        values: Vec<f64>,
        err_estimates: Vec<f64>,
        source: Method,
    ) -> Result<Self> {
        if values.len() < 2 || values.len() != err_estimates.len() {
            return Err(Error::InvalidArgument(format!(
                "gap sequence needs >= 2 values with matching errors (got {} and {})",
                values.len(),
                err_estimates.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(
                "gap values must be finite and >= 0".into(),
            ));
        }
        if err_estimates.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidArgument(
                "error estimates must be >= 0".into(),
            ));
        }
        Ok(Self {
            n_min,
            values,
            err_estimates,
            source,
        })
    }

    /// Builds a sequence from consecutive gap values of one method.
    pub fn from_values(gaps: &[GapValue]) -> Result<Self> {
        let first = gaps
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty gap list".into()))?;
        for (i, g) in gaps.iter().enumerate() {
            if g.n != first.n + i as u64 || g.method != first.method {
                return Err(Error::InvalidArgument(
                    "gap values must be consecutive in n and share one method".into(),
                ));
            }
        }
        Self::new(
            first.n,
            gaps.iter().map(|g| g.value).collect(),
            gaps.iter().map(|g| g.err_estimate).collect(),
            first.method,
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn max_err(&self) -> f64 {
        self.err_estimates.iter().copied().fold(0.0, f64::max)
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Forward differences `Δ^0 … Δ^K`; row `k` entry `j` is `Δ^k R_{n_min+j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceTable {
    pub n_min: u64,
    pub rows: Vec<Vec<f64>>,
}

/// Builds the table by repeated subtraction of neighbours.
///
/// Each entry is one correctly rounded subtraction of two entries of the
/// previous row, so row `k` is exactly the difference of row `k − 1`.
pub fn difference_table(seq: &GapSequence, max_order: usize) -> Result<DifferenceTable> {
    if max_order >= seq.len() {
        return Err(Error::InvalidArgument(format!(
            "difference order {max_order} needs more than {} values",
            seq.len()
        )));
    }
    let mut rows = vec![seq.values.clone()];
    for k in 1..=max_order {
        let prev = &rows[k - 1];
        let next: Vec<f64> = prev.windows(2).map(|w| w[1] - w[0]).collect();
        rows.push(next);
    }
    Ok(DifferenceTable {
        n_min: seq.n_min,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of one inequality family over the sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    /// Smallest margin observed (should be >= 0).
    pub worst_margin: f64,
    /// Floor at the worst entry.
    pub floor: f64,
    /// `n` at which the worst margin occurs.
    pub worst_n: Option<u64>,
    pub margins: Vec<f64>,
    pub floors: Vec<f64>,
}

/// A concrete violation of `R_{n+1} <= R_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecreaseWitness {
    pub n: u64,
    pub r_n: f64,
    pub r_next: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub order: usize,
    pub verdict: Verdict,
    pub worst_margin: f64,
    pub floor: f64,
    pub worst_n: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub n_min: u64,
    pub len: usize,
    /// `R_{n+1} <= R_n`.
    pub decreasing: CheckOutcome,
    pub decrease_witness: Option<DecreaseWitness>,
    /// `R_n − R_{n+1} <= R_{n−1} − R_n`.
    pub difference_monotone: CheckOutcome,
    /// `R_n / R_{n+1} <= R_{n−1} / R_n`.
    pub ratio_monotone: CheckOutcome,
    /// `R_n² <= R_{n−1} R_{n+1}`.
    pub log_convex: CheckOutcome,
    /// Verdict of `(−1)^k Δ^k R >= 0` for `k = 0..=max_order`.
    pub cm_orders: Vec<OrderVerdict>,
    /// Largest `K` such that no order `<= K` fails.
    pub completely_monotone_to_order: Option<usize>,
    pub error_floor_per_order: Vec<f64>,
    /// `(−1)^k Δ^k R` rows.
    pub margins_per_order: Vec<Vec<f64>>,
    /// The sequence starts below `n = 2`, outside the range the theory covers.
    pub exploratory: bool,
}

impl MonotonicityReport {
    pub fn any_fail(&self) -> bool {
        [
            &self.decreasing,
            &self.difference_monotone,
            &self.ratio_monotone,
            &self.log_convex,
        ]
        .iter()
        .any(|c| c.verdict == Verdict::Fail)
            || self.cm_orders.iter().any(|o| o.verdict == Verdict::Fail)
    }
}

/// Floor for an order-`k` difference: `2^k` times the largest entry error,
/// plus rounding of the subtractions themselves.
fn order_floor(seq: &GapSequence, k: usize) -> f64 {
    2f64.powi(k as i32) * (seq.max_err() + 4.0 * f64::EPSILON * seq.max_abs())
}

fn judge(margins: Vec<f64>, floors: Vec<f64>, first_n: u64) -> CheckOutcome {
    if margins.is_empty() {
        return CheckOutcome {
            verdict: Verdict::Inconclusive,
            worst_margin: f64::NAN,
            floor: f64::NAN,
            worst_n: None,
            margins,
            floors,
        };
    }
    let mut verdict = Verdict::Pass;
    let mut worst = 0usize;
    let mut worst_score = f64::INFINITY;
    for (i, (&m, &f)) in margins.iter().zip(&floors).enumerate() {
        let v = if m.is_nan() || f.is_nan() {
            Verdict::Inconclusive
        } else if m >= 0.0 {
            Verdict::Pass
        } else if m >= -f {
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        };
        verdict = match (verdict, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        };
        // rank by margin in units of the floor
        let score = if f > 0.0 { m / f } else { m * f64::MAX };
        if score < worst_score || (score == worst_score && m < margins[worst]) {
            worst_score = score;
            worst = i;
        }
    }
    CheckOutcome {
        verdict,
        worst_margin: margins[worst],
        floor: floors[worst],
        worst_n: Some(first_n + worst as u64),
        margins,
        floors,
    }
}

/// Runs every check up to `max_order` differences.
pub fn check_all(seq: &GapSequence, max_order: usize) -> MonotonicityReport {
    let r = &seq.values;
    let e = &seq.err_estimates;
    let len = r.len();
    let eps = f64::EPSILON;

    let order = max_order.min(len - 1);
    let table = difference_table(seq, order).expect("order clamped to length");

    let floor1 = order_floor(seq, 1);
    let decreasing = judge(
        table.rows[1].iter().map(|d| -d).collect(),
        vec![floor1; len - 1],
        seq.n_min,
    );
    let decrease_witness = (decreasing.verdict == Verdict::Fail).then(|| {
        let n = decreasing.worst_n.expect("nonempty");
        let j = (n - seq.n_min) as usize;
        DecreaseWitness {
            n,
            r_n: r[j],
            r_next: r[j + 1],
        }
    });

    // Second-order checks are indexed by the middle term n.
    let mid_n = seq.n_min + 1;
    let difference_monotone = if order >= 2 {
        judge(
            table.rows[2].clone(),
            vec![order_floor(seq, 2); len - 2],
            mid_n,
        )
    } else {
        judge(Vec::new(), Vec::new(), mid_n)
    };

    let mut ratio_m = Vec::new();
    let mut ratio_f = Vec::new();
    let mut lc_m = Vec::new();
    let mut lc_f = Vec::new();
    for j in 1..len.saturating_sub(1) {
        let (a, b, c) = (r[j - 1], r[j], r[j + 1]);
        let (ea, eb, ec) = (e[j - 1], e[j], e[j + 1]);
        if b > 0.0 && c > 0.0 {
            let lhs = b / c;
            let rhs = a / b;
            ratio_m.push(rhs - lhs);
            ratio_f.push(
                ea / b + a * eb / (b * b) + eb / c + b * ec / (c * c) + 4.0 * eps * (lhs + rhs),
            );
        } else {
            ratio_m.push(f64::NAN);
            ratio_f.push(f64::NAN);
        }
        let prod = a * c;
        let sq = b * b;
        lc_m.push(prod - sq);
        lc_f.push(c * ea + a * ec + 2.0 * b * eb + 4.0 * eps * (prod + sq));
    }
    let ratio_monotone = judge(ratio_m, ratio_f, mid_n);
    let log_convex = judge(lc_m, lc_f, mid_n);

    let mut cm_orders = Vec::new();
    let mut floors = Vec::new();
    let mut margins_per_order = Vec::new();
    for (k, row) in table.rows.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let margins: Vec<f64> = row.iter().map(|d| sign * d).collect();
        let floor = order_floor(seq, k);
        let out = judge(margins.clone(), vec![floor; row.len()], seq.n_min);
        cm_orders.push(OrderVerdict {
            order: k,
            verdict: out.verdict,
            worst_margin: out.worst_margin,
            floor,
            worst_n: out.worst_n,
        });
        floors.push(floor);
        margins_per_order.push(margins);
    }
    let completely_monotone_to_order = cm_orders
        .iter()
        .take_while(|o| o.verdict != Verdict::Fail)
        .last()
        .map(|o| o.order);

    MonotonicityReport {
        n_min: seq.n_min,
        len,
        decreasing,
        decrease_witness,
        difference_monotone,
        ratio_monotone,
        log_convex,
        cm_orders,
        completely_monotone_to_order,
        error_floor_per_order: floors,
        margins_per_order,
        exploratory: seq.n_min < 2,
    }
}

/// Strict vs. equality behaviour of one inequality family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrictOutcome {
    /// Whether the closed-form classification demands strict inequality.
    pub expected_strict: bool,
    /// Every margin exceeds its floor.
    pub observed_strict: bool,
    /// Every margin is within its floor of zero.
    pub observed_equal: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrictnessReport {
    pub strict_decrease: StrictOutcome,
    pub strict_difference: StrictOutcome,
    pub strict_ratio: StrictOutcome,
}

impl StrictnessReport {
    pub fn consistent(&self) -> bool {
        self.strict_decrease.consistent
            && self.strict_difference.consistent
            && self.strict_ratio.consistent
    }
}

fn strict_outcome(check: &CheckOutcome, expected_strict: bool) -> StrictOutcome {
    let pairs = check.margins.iter().zip(&check.floors);
    let observed_strict = !check.margins.is_empty() && pairs.clone().all(|(m, f)| *m > *f);
    let observed_equal = !check.margins.is_empty() && pairs.clone().all(|(m, f)| m.abs() <= *f);
    StrictOutcome {
        expected_strict,
        observed_strict,
        observed_equal,
        consistent: if expected_strict {
            observed_strict
        } else {
            observed_equal
        },
    }
}

/// Checks that strict inequalities hold exactly outside the exceptional
/// families: constant sequences for shifted exponentials, geometric ones
/// for truncated exponentials.
pub fn strictness_check(
    seq: &GapSequence,
    dist_is_shifted_exponential: bool,
    dist_is_truncated_exponential: bool,
) -> StrictnessReport {
    let report = check_all(seq, 2.min(seq.len() - 1));
    let shifted = dist_is_shifted_exponential;
    StrictnessReport {
        strict_decrease: strict_outcome(&report.decreasing, !shifted),
        strict_difference: strict_outcome(&report.difference_monotone, !shifted),
        strict_ratio: strict_outcome(
            &report.ratio_monotone,
            !(shifted || dist_is_truncated_exponential),
        ),
    }
}
