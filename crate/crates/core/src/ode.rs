//! Scalar Dormand–Prince 5(4) integrator with continuous (dense) output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Hairer's continuous extension coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step and its interpolation coefficients.
#[derive(Debug, Clone, Copy)]
struct Step {
    x0: f64,
    h: f64,
    r: [f64; 5],
}

impl Step {
    fn eval(&self, x: f64) -> f64 {
        let s = (x - self.x0) / self.h;
        let s1 = 1.0 - s;
        self.r[0] + s * (self.r[1] + s1 * (self.r[2] + s * (self.r[3] + s1 * self.r[4])))
    }
}

/// Piecewise-polynomial solution over `[x_start, x_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    steps: Vec<Step>,
    x_end: f64,
    y_end: f64,
}

impl DenseSolution {
    pub fn x_start(&self) -> f64 {
        self.steps.first().map_or(self.x_end, |s| s.x0)
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn y_end(&self) -> f64 {
        self.y_end
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Index of the step containing `x` (clamped to the ends).
    fn step_index(&self, x: f64) -> usize {
        self.steps
            .partition_point(|s| s.x0 <= x)
            .saturating_sub(1)
            .min(self.steps.len().saturating_sub(1))
    }

    /// Interpolated solution; `x` must lie in `[x_start, x_end]`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.steps.is_empty() || x >= self.x_end {
            return self.y_end;
        }
        self.steps[self.step_index(x)].eval(x)
    }

    /// Step boundaries `(x_i, y_i)`, ending with `(x_end, y_end)`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.steps.iter().map(|s| (s.x0, s.r[0])).collect();
        out.push((self.x_end, self.y_end));
        out
    }
}

/// Tolerances and limits for [`solve`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

/// Integrates `y′ = f(x, y)` from `(x0, y0)` until `done(x, y)` holds.
pub fn solve<F, D>(f: F, x0: f64, y0: f64, done: D, opts: &OdeOptions) -> Result<DenseSolution>
where
    F: Fn(f64, f64) -> f64,
    D: Fn(f64, f64) -> bool,
{
    let mut steps = Vec::new();
    let (mut x, mut y) = (x0, y0);
    let mut k1 = f(x, y);
    let mut h = opts.initial_step;
    while !done(x, y) {
        if steps.len() >= opts.max_steps {
            return Err(Error::StepUnderflow { x });
        }
        if !(h.abs() > 8.0 * f64::EPSILON * x.abs().max(1.0)) {
            return Err(Error::StepUnderflow { x });
        }
        let k2 = f(x + C2 * h, y + h * A21 * k1);
        let k3 = f(x + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(x + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(
            x + C5 * h,
            y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        );
        let k6 = f(
            x + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
        let k7 = f(x + h, y1);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = opts.abs_tol + opts.rel_tol * y.abs().max(y1.abs());
        let ratio = (err / scale).abs();
        if !ratio.is_finite() {
            h *= 0.2;
            continue;
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        if ratio <= 1.0 {
            let dy = y1 - y;
            let b = h * k1 - dy;
            let r = [
                y,
                dy,
                b,
                dy - h * k7 - b,
                h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
            ];
            steps.push(Step { x0: x, h, r });
            x += h;
            y = y1;
            k1 = k7;
        }
        h *= factor;
    }
    Ok(DenseSolution {
        steps,
        x_end: x,
        y_end: y,
    })
}
