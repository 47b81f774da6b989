use crate::error::{Error, Result};

const MAX_ITERATIONS: u32 = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub iterations: u32,
}

/// Root of a monotone function on `[lo, hi]` by bisection; the returned
/// point is the midpoint of a final bracket no wider than `tol`.
pub fn bisect_root<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    bisect(f, lo, hi, tol).map(|b| b.root)
}

/// [`bisect_root`] that also reports the number of halvings.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<Bisection> {
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(Error::Domain { what: "bisect_root bracket", value: hi - lo });
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Bisection { root: lo, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Bisection { root: hi, iterations: 0 });
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let rising = f_hi > 0.0;
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket is down to adjacent floats
        }
        iterations += 1;
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(Bisection { root: mid, iterations });
        }
        if (fm > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Bisection { root: 0.5 * (lo + hi), iterations })
}
