use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;

/// Principal branch `W0` of the Lambert W function: the `w ≥ −1` solving
/// `w·e^w = x`.
///
/// Halley iteration from a piecewise starting guess: a branch-point
/// expansion below −1/4, a rational approximation up to `e`, and the
/// logarithmic asymptote beyond. Very large arguments iterate on
/// `w + ln w = ln x` instead so `e^w` never overflows.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT {
        // Allow a few ulps of slack so that x = −1/e computed in floating
        // point still maps to the branch point.
        if x.is_finite() && x >= BRANCH_POINT - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::Domain { what: "lambert_w0", value: x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x == BRANCH_POINT {
        return Ok(-1.0);
    }
    if x > 1e100 {
        return Ok(log_newton(x));
    }

    let mut w = initial_guess(x);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x.abs() < 0.25 {
        x - x * x + 1.5 * x * x * x
    } else if x <= E {
        let l = (1.0 + x).ln();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

fn log_newton(x: f64) -> f64 {
    let lx = x.ln();
    let mut w = lx - lx.ln();
    for _ in 0..32 {
        let g = w + w.ln() - lx;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}
