use crate::error::{Error, Result};

/// Two rates closer than this (relative) are treated as tied.
const TIE_TOLERANCE: f64 = 1e-9;
/// Multiplicative spacing applied to tied rates.
const TIE_SPACING: f64 = 1e-8;
/// Survival terms whose exponent exceeds this are dropped (they underflow).
const NEGLIGIBLE_EXPONENT: f64 = 1500.0;

/// Rates of independent exponential summands, sorted ascending and
/// pairwise distinct.
///
/// Rates that collide (relative gap below 1e−9) are spread apart by
/// distinct factors `1 + k·1e−8`. The CDF is continuous in the rates, so
/// this only removes the removable singularity in the mixture weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoExpRates {
    rates: Vec<f64>,
}

impl HypoExpRates {
    pub fn new(mut rates: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::Domain { what: "hypoexponential rate", value: bad });
        }
        rates.sort_by(f64::total_cmp);
        for _ in 0..16 {
            if !spread_ties(&mut rates) {
                break;
            }
            rates.sort_by(f64::total_cmp);
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

fn spread_ties(rates: &mut [f64]) -> bool {
    let mut changed = false;
    let mut start = 0;
    while start < rates.len() {
        let mut end = start + 1;
        while end < rates.len() && rates[end] / rates[end - 1] - 1.0 < TIE_TOLERANCE {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let centre = (m / 2) as f64;
            for (k, r) in rates[start..end].iter_mut().enumerate() {
                *r *= 1.0 + (k as f64 - centre) * TIE_SPACING;
            }
            changed = true;
        }
        start = end;
    }
    changed
}

/// `P{X1 + … + Xn < y}` for independent `Xi ~ Exp(rates[i])`.
///
/// Uses the survival form `1 − Σ δi·e^{−λi·y}` with
/// `δi = Π_{j≠i} λj/(λj − λi)`, where each weight is carried as a sign and
/// a logarithm so that large rate spreads neither overflow nor produce
/// `∞·0`. The result is clamped to `[0, 1]`.
pub fn hypoexp_cdf(rates: &HypoExpRates, y: f64) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::DegenerateSum);
    }
    if y.is_nan() || y < 0.0 {
        return Err(Error::Domain { what: "hypoexp_cdf", value: y });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == f64::INFINITY {
        return Ok(1.0);
    }
    let r = rates.rates();
    if r.len() == 1 {
        return Ok(-(-r[0] * y).exp_m1());
    }

    let log_rates: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let log_rate_sum: f64 = log_rates.iter().sum();
    let mut survival = 0.0;
    let mut magnitude = 0.0;
    for (i, &li) in r.iter().enumerate() {
        // Rates are ascending, so once one term is negligible all later
        // terms are too (up to the weights, which stay modest after the
        // tie spreading).
        if li * y > NEGLIGIBLE_EXPONENT {
            break;
        }
        let mut log_delta = log_rate_sum - log_rates[i];
        for (j, &lj) in r.iter().enumerate() {
            if j != i {
                log_delta -= (lj - li).abs().ln();
            }
        }
        // λj − λi < 0 exactly for the i lower rates.
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let term = (log_delta - li * y).exp();
        survival += sign * term;
        magnitude += term;
    }
    // Clusters of nearly equal rates give huge weights of alternating sign.
    // When the cancellation could cost more than ~1e−9, switch to the
    // uniformized Markov-chain form, which only adds positive terms.
    if magnitude * f64::EPSILON * r.len() as f64 > 1e-9 {
        if let Some(p) = uniformized_cdf(r, y) {
            return Ok(p);
        }
    }
    Ok((1.0 - survival).clamp(0.0, 1.0))
}

/// CDF via uniformization of the pure-birth chain that passes through the
/// phases in turn. Returns `None` when the work would be excessive.
fn uniformized_cdf(rates: &[f64], y: f64) -> Option<f64> {
    let n = rates.len();
    let top = rates[n - 1];
    let mean_jumps = top * y;
    let max_jumps = (mean_jumps + 12.0 * mean_jumps.sqrt() + 40.0).ceil();
    if max_jumps * n as f64 > 5e7 {
        return None;
    }
    let stay: Vec<f64> = rates.iter().map(|r| 1.0 - r / top).collect();
    // occupancy[i]: probability of being in phase i after k jumps.
    let mut occupancy = vec![0.0; n];
    occupancy[0] = 1.0;
    let mut absorbed = 0.0;
    let mut log_weight = -mean_jumps; // ln Poisson(0; Λy)
    let mut cdf = 0.0;
    for k in 0..=(max_jumps as usize) {
        if k > 0 {
            absorbed += occupancy[n - 1] * (1.0 - stay[n - 1]);
            for i in (0..n).rev() {
                let moved_in = if i > 0 { occupancy[i - 1] * (1.0 - stay[i - 1]) } else { 0.0 };
                occupancy[i] = occupancy[i] * stay[i] + moved_in;
            }
            log_weight += mean_jumps.ln() - (k as f64).ln();
        }
        cdf += log_weight.exp() * absorbed;
    }
    Some(cdf.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cdf(rates: &[f64], y: f64) -> f64 {
        hypoexp_cdf(&HypoExpRates::new(rates.to_vec()).unwrap(), y).unwrap()
    }

    #[test]
    fn single_rate_is_exponential() {
        assert!((cdf(&[1.0], 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((cdf(&[1.0], 1.0) - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn origin_is_zero() {
        assert_eq!(cdf(&[1.0, 2.0], 0.0), 0.0);
    }

    #[test]
    fn two_rates_closed_form() {
        // Oracle: convolution of Exp(1) and Exp(2) integrated by hand,
        // 1 − 2e^{−y} + e^{−2y}.
        let y = 1.0f64;
        let expect = 1.0 - 2.0 * (-y).exp() + (-2.0 * y).exp();
        assert!((cdf(&[1.0, 2.0], y) - expect).abs() < 1e-14);
        assert!((cdf(&[2.0, 1.0], y) - 0.3996).abs() < 1e-4);
    }

    #[test]
    fn tied_rates_approach_erlang() {
        // Erlang(2, 1): 1 − e^{−y}(1 + y).
        let y = 1.7f64;
        let expect = 1.0 - (-y).exp() * (1.0 + y);
        assert!((cdf(&[1.0, 1.0], y) - expect).abs() < 1e-6);
        // Erlang(3, 2).
        let e3 = 1.0 - (-2.0 * y).exp() * (1.0 + 2.0 * y + 2.0 * y * y);
        assert!((cdf(&[2.0, 2.0, 2.0], y) - e3).abs() < 1e-6);
    }

    #[test]
    fn tie_spreading_makes_rates_distinct() {
        let r = HypoExpRates::new(vec![3.0, 1.0, 3.0, 3.0 * (1.0 + 1e-12), 1.0]).unwrap();
        for w in r.rates().windows(2) {
            assert!(w[1] / w[0] - 1.0 >= TIE_TOLERANCE, "{:?}", r.rates());
        }
    }

    #[test]
    fn errors() {
        let empty = HypoExpRates::new(vec![]).unwrap();
        assert_eq!(hypoexp_cdf(&empty, 1.0), Err(Error::DegenerateSum));
        assert!(HypoExpRates::new(vec![1.0, 0.0]).is_err());
        assert!(HypoExpRates::new(vec![-1.0]).is_err());
        let r = HypoExpRates::new(vec![1.0]).unwrap();
        assert!(hypoexp_cdf(&r, -1.0).is_err());
    }

    #[test]
    fn widely_spread_rates_stay_in_range() {
        // Interference-like rate sets: D^4/η with D from 10 to 500.
        let rates: Vec<f64> = (0..300).map(|k| (10.0 + k as f64 * 1.6f64).powi(4) / 0.01).collect();
        for y in [1e-9, 1e-7, 1e-6, 1e-4, 1e-2] {
            let p = cdf(&rates, y);
            assert!((0.0..=1.0).contains(&p));
        }
        // Dominated by the smallest rate once y is large against the others.
        let p = cdf(&[1.0, 1e6, 1e7], 2.0);
        assert!((p - (1.0 - (-2.0f64).exp())).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn nondecreasing_and_bounded(rates in prop::collection::vec(0.05f64..20.0, 1..6),
                                     mut ys in prop::collection::vec(0.0f64..30.0, 50)) {
            ys.sort_by(f64::total_cmp);
            let r = HypoExpRates::new(rates).unwrap();
            let mut last = 0.0;
            for y in ys {
                let p = hypoexp_cdf(&r, y).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!(p >= last - 1e-12);
                last = p;
            }
        }
    }
}
