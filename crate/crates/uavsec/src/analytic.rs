//! Closed-form and semi-analytic evaluators of connection probability,
//! secrecy outage probability and secrecy transmission capacity.
//!
//! The closed forms assume `α_L = 2`, `α_N = 4`. The semi-analytic
//! evaluators ([`pc_exact`], [`pso_exact`]) average an exact conditional
//! probability over sampled interferer fields and accept any exponents.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mathkit::{hypoexp_cdf, integrate, HypoExpRates, QuadOptions};
use crate::model::{inv_pow, realization_rng, sample_ppp, GuardZone, NetworkParams, Point, Stream};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    SemiAnalytic,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::SemiAnalytic => "semi-analytic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// A metric value with its provenance and 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub value: f64,
    pub method: Method,
    pub half_width: f64,
}

impl MetricEstimate {
    pub fn closed_form(value: f64) -> Self {
        Self { value, method: Method::ClosedForm, half_width: 0.0 }
    }

    /// Binomial proportion `successes/n`.
    ///
    /// Normal-approximation half-width, except within `5/n` of 0 or 1
    /// where the Wilson score interval is used instead (reported as the
    /// larger distance from the estimate to either Wilson bound).
    pub fn from_counts(successes: u64, n: u64) -> Self {
        let nf = n as f64;
        let p = successes as f64 / nf;
        let near_edge = successes <= 5 || n - successes <= 5;
        let half_width = if near_edge { wilson_half_width(p, nf) } else { Z95 * (p * (1.0 - p) / nf).sqrt() };
        Self { value: p, method: Method::MonteCarlo, half_width }
    }

    /// Mean of per-realization conditional probabilities in `[0, 1]`.
    pub fn from_samples(samples: &[f64], method: Method) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        if samples.len() < 2 {
            return Self { value: mean, method, half_width: 1.0 };
        }
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let mut half_width = Z95 * (var / n).sqrt();
        // A [0,1] variable with mean p has variance at most p(1 − p); near
        // the edges fall back on the Wilson interval of that bound.
        if mean <= 5.0 / n || mean >= 1.0 - 5.0 / n {
            half_width = half_width.max(wilson_half_width(mean, n));
        }
        Self { value: mean, method, half_width }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }

    /// True when the two 95% intervals overlap.
    pub fn agrees_with(&self, other: &MetricEstimate) -> bool {
        (self.value - other.value).abs() <= self.half_width + other.half_width
    }
}

fn wilson_half_width(p: f64, n: f64) -> f64 {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let spread = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (p - (centre - spread)).max(centre + spread - p)
}

/// `Q1 = λu·π²·√βe / 2` (per metre).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q1Cache {
    pub q1: f64,
}

impl Q1Cache {
    pub fn new(lambda_u: f64, beta_e: f64) -> Self {
        Self { q1: lambda_u * PI * PI * beta_e.sqrt() / 2.0 }
    }
}

/// Connection probability with every link Rayleigh-faded.
pub fn pc_approx(params: &NetworkParams, beta_t: f64) -> f64 {
    let h2 = params.h * params.h;
    let k = params.los_radius();
    let k2 = k * k;
    let rho = params.eta_ratio();
    // NLoS ring [K, ∞): with a = βt·ρ·H², 2π∫ r·a/((r²+H²)² + a) dr.
    let sqrt_a = params.h * (beta_t * rho).sqrt();
    let nlos = if sqrt_a == 0.0 {
        0.0
    } else {
        PI * params.lambda_u * sqrt_a / 2.0 * (PI - 2.0 * ((h2 + k2) / sqrt_a).atan())
    };
    // LoS disk [0, K).
    let los = if beta_t == 0.0 {
        0.0
    } else {
        PI * params.lambda_u * h2 * beta_t * (k2 / (h2 * beta_t + h2)).ln_1p()
    };
    (-(nlos + los)).exp()
}

/// Connection probability under the small-angle simplification
/// `exp[−(π/2)·λu·H·(√(η_N/η_L)·π·2^{R_t/2} − 2H)]`.
///
/// Only meaningful when `√(η_N/η_L)·H·√βt ≫ H² + K²`; outside that regime the
/// exponent can turn positive and the value exceeds 1. It is returned
/// unclamped because the rate optimizer differentiates this expression.
pub fn pc_simplified(params: &NetworkParams, r_t: f64) -> f64 {
    let rho = params.eta_ratio();
    let growth = rho.sqrt() * PI * (r_t * std::f64::consts::LN_2 / 2.0).exp();
    (-(PI / 2.0) * params.lambda_u * params.h * (growth - 2.0 * params.h)).exp()
}

/// Secrecy outage probability without a guard zone.
pub fn pso_approx(params: &NetworkParams, beta_e: f64) -> Result<f64> {
    pso_zone_approx(params, beta_e, GuardZone { d: 0.0 })
}

/// Secrecy outage probability with eavesdroppers excluded from `B(o, D)`.
///
/// Both branches come from `1 − exp(−2πλe·e^{πλuH²}·∫_D^∞ e^{−Q(r)} r dr)`,
/// where `Q(r) = Q1·√(η_N/η_L)·√(r²+H²)` inside the LoS disk and
/// `Q1·(r²+H²)` outside it. For `D ≥ K` only the NLoS part remains:
/// `1 − exp[−(πλe/Q1)·exp(−Q1(H²+D²) + πλuH²)]`. Evaluated in log space so
/// extreme densities or thresholds cannot overflow.
pub fn pso_zone_approx(params: &NetworkParams, beta_e: f64, zone: GuardZone) -> Result<f64> {
    if !(beta_e > 0.0) {
        return Err(Error::Domain { what: "secrecy outage threshold beta_e", value: beta_e });
    }
    if params.lambda_e == 0.0 {
        return Ok(0.0);
    }
    let q1 = Q1Cache::new(params.lambda_u, beta_e).q1;
    if q1 == 0.0 {
        // No interference: every eavesdropper in an unbounded region decodes.
        return Ok(1.0);
    }
    let h2 = params.h * params.h;
    let k = params.los_radius();
    let d = zone.d;
    let shift = PI * params.lambda_u * h2;
    let log_exponent = if d >= k {
        (PI * params.lambda_e / q1).ln() - q1 * (h2 + d * d) + shift
    } else {
        let c = q1 * params.eta_ratio().sqrt();
        let s_k = (h2 + k * k).sqrt();
        let s_d = (h2 + d * d).sqrt();
        let nlos = (-q1 * s_k * s_k).exp() / (2.0 * q1);
        let los = los_bracket(c, s_d, s_k);
        (2.0 * PI * params.lambda_e).ln() + shift + (nlos + los).ln()
    };
    Ok(-(-log_exponent.exp()).exp_m1())
}

/// `∫_{s_d}^{s_k} s·e^{−c·s} ds = [(1 + c·s_d)e^{−c·s_d} − (1 + c·s_k)e^{−c·s_k}]/c²`.
fn los_bracket(c: f64, s_d: f64, s_k: f64) -> f64 {
    if c * s_k < 1.0 {
        // Both terms are close to 1: difference of 1 − (1 + x)e^{−x}.
        (one_minus_poly_exp(c * s_k) - one_minus_poly_exp(c * s_d)) / (c * c)
    } else {
        let g = |x: f64| (1.0 + x) * (-x).exp();
        (g(c * s_d) - g(c * s_k)) / (c * c)
    }
}

/// `1 − (1 + x)e^{−x}` without cancellation for small `x`.
fn one_minus_poly_exp(x: f64) -> f64 {
    if x > 0.1 {
        return 1.0 - (1.0 + x) * (-x).exp();
    }
    // Σ_{m≥2} (−1)^m (m − 1) x^m / m!
    let mut term = x * x / 2.0; // x^m/m! at m = 2
    let mut sum = term;
    for m in 3..20 {
        term *= -x / m as f64;
        sum += (m - 1) as f64 * term;
    }
    sum
}

/// Transmitter density left after guard-zone thinning, `λu·e^{−πλeD²}`.
pub fn effective_density(lambda_u: f64, lambda_e: f64, zone: GuardZone) -> f64 {
    lambda_u * (-PI * lambda_e * zone.d * zone.d).exp()
}

/// Secrecy transmission capacity `Rs·Pc·λ` (bps/Hz/m²).
pub fn stc(r_s: f64, p_c: f64, density: f64) -> f64 {
    r_s * p_c * density
}

/// Options of the semi-analytic outage evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiAnalyticOptions {
    /// Trapezoid nodes in angle.
    pub angular_nodes: usize,
    /// Relative tolerance of the radial quadrature.
    pub rel_tol: f64,
    /// Target absolute error on each per-realization outage probability.
    pub probability_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for SemiAnalyticOptions {
    fn default() -> Self {
        Self { angular_nodes: 64, rel_tol: 1e-4, probability_tol: 1e-5, max_subdivisions: 2000 }
    }
}

fn interferers(params: &NetworkParams, window: f64, seed: u64, id: u64) -> Vec<Point> {
    let mut rng = realization_rng(seed, id, Stream::Interferers);
    sample_ppp(params.lambda_u, 0.0, window, &mut rng)
}

/// Connection probability averaged over sampled interferer fields.
///
/// Given the interferers, the legitimate link succeeds iff the NLoS
/// interference `Σ η_N·S_u·D_u^{−α_N}` (independent exponentials with rates
/// `D_u^{α_N}/η_N`) stays below `y = η_L·H^{−α_L}/βt − Σ_LoS η_L·D_l^{−α_L}`,
/// which is a hypoexponential CDF. With no NLoS interferer the event is
/// deterministic (`y > 0`). Realizations share the simulator's interferer
/// streams, so a run with the same seed and window sees the same fields.
pub fn pc_exact(params: &NetworkParams, beta_t: f64, n_realizations: u64, window: f64, seed: u64) -> Result<MetricEstimate> {
    params.validate()?;
    check_run(n_realizations, window, params)?;
    let samples = (0..n_realizations)
        .into_par_iter()
        .map(|id| {
            let points = interferers(params, window, seed, id);
            pc_given_interferers(params, beta_t, &points)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MetricEstimate::from_samples(&samples, Method::SemiAnalytic))
}

fn pc_given_interferers(params: &NetworkParams, beta_t: f64, points: &[Point]) -> Result<f64> {
    if beta_t == 0.0 || points.is_empty() {
        return Ok(1.0);
    }
    let h2 = params.h * params.h;
    let k = params.los_radius();
    let mut y = params.eta_l * inv_pow(h2, params.alpha_l) / beta_t;
    let mut rates = Vec::new();
    for p in points {
        let r = p[0].hypot(p[1]);
        let d2 = r * r + h2;
        if r < k {
            y -= params.eta_l * inv_pow(d2, params.alpha_l);
        } else {
            rates.push(1.0 / (params.eta_n * inv_pow(d2, params.alpha_n)));
        }
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    if rates.is_empty() {
        return Ok(1.0);
    }
    hypoexp_cdf(&HypoExpRates::new(rates)?, y)
}

/// Secrecy outage probability averaged over sampled interferer fields.
///
/// Given the interferers, eavesdroppers form a PPP, so the outage is
/// `1 − exp(−λe·∫ P{SIR_e > βe} de)` over the eavesdropper region. Inside
/// the LoS disk the exceedance is a hypoexponential CDF; outside it the
/// signal fades and the exceedance is a product over interferers. The
/// integral runs in polar coordinates: adaptive Gauss–Kronrod in radius,
/// split at `K`, over a trapezoid rule in angle, out to the sampling
/// window `window`.
///
/// The region beyond the window is not integrated. Its contribution is
/// bounded by `λe·πR_w²·max_φ p(R_w, φ)` and that bound is added to the
/// reported half-width. An empty interferer field gives outage 1
/// (interference-free eavesdroppers always decode).
pub fn pso_exact(
    params: &NetworkParams,
    beta_e: f64,
    zone: Option<GuardZone>,
    n_realizations: u64,
    window: f64,
    seed: u64,
) -> Result<MetricEstimate> {
    pso_exact_with(params, beta_e, zone, n_realizations, window, seed, &SemiAnalyticOptions::default())
}

pub fn pso_exact_with(
    params: &NetworkParams,
    beta_e: f64,
    zone: Option<GuardZone>,
    n_realizations: u64,
    window: f64,
    seed: u64,
    opts: &SemiAnalyticOptions,
) -> Result<MetricEstimate> {
    params.validate()?;
    check_run(n_realizations, window, params)?;
    if !(beta_e >= 0.0) {
        return Err(Error::Domain { what: "secrecy outage threshold beta_e", value: beta_e });
    }
    if opts.angular_nodes == 0 {
        return Err(Error::InvalidParams("angular_nodes must be positive".into()));
    }
    if params.lambda_e == 0.0 {
        return Ok(MetricEstimate { value: 0.0, method: Method::SemiAnalytic, half_width: 0.0 });
    }
    let results = (0..n_realizations)
        .into_par_iter()
        .map(|id| {
            let points = interferers(params, window, seed, id);
            pso_given_interferers(params, beta_e, zone, &points, window, opts)
        })
        .collect::<Vec<Result<(f64, f64)>>>();

    let mut samples = Vec::with_capacity(results.len());
    let mut tail = 0.0;
    let mut failure = None;
    for r in results {
        match r {
            Ok((v, t)) => {
                samples.push(v);
                tail += t;
            }
            Err(Error::Accuracy { estimate, .. }) => {
                samples.push(estimate);
                failure.get_or_insert(());
            }
            Err(e) => return Err(e),
        }
    }
    let mut est = MetricEstimate::from_samples(&samples, Method::SemiAnalytic);
    est.half_width += tail / samples.len() as f64;
    if failure.is_some() {
        return Err(Error::Accuracy { estimate: est.value, error: est.half_width });
    }
    Ok(est)
}

fn check_run(n: u64, window: f64, params: &NetworkParams) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParams("n_realizations must be at least 1".into()));
    }
    if !(window > params.los_radius()) || !window.is_finite() {
        return Err(Error::InvalidParams(format!("window radius {window} must exceed the LoS radius")));
    }
    Ok(())
}

/// Probability that an eavesdropper at `e` decodes, given the interferers.
fn exceedance(params: &NetworkParams, beta_e: f64, points: &[Point], e: Point) -> Result<f64> {
    let h2 = params.h * params.h;
    let k = params.los_radius();
    let r_e = e[0].hypot(e[1]);
    let d0e2 = r_e * r_e + h2;
    if points.is_empty() {
        return Ok(1.0);
    }
    if beta_e == 0.0 {
        return Ok(1.0);
    }
    if r_e < k {
        let mut y = params.eta_l * inv_pow(d0e2, params.alpha_l) / beta_e;
        let mut rates = Vec::new();
        for u in points {
            let r = (u[0] - e[0]).hypot(u[1] - e[1]);
            let d2 = r * r + h2;
            if r < k {
                y -= params.eta_l * inv_pow(d2, params.alpha_l);
            } else {
                rates.push(1.0 / (params.eta_n * inv_pow(d2, params.alpha_n)));
            }
        }
        if y <= 0.0 {
            return Ok(0.0);
        }
        if rates.is_empty() {
            return Ok(1.0);
        }
        hypoexp_cdf(&HypoExpRates::new(rates)?, y)
    } else {
        // E[exp(−s·I)] with s = βe·D0e^{α_N}/η_N.
        let s = beta_e / (params.eta_n * inv_pow(d0e2, params.alpha_n));
        let mut log_p = 0.0;
        for u in points {
            let r = (u[0] - e[0]).hypot(u[1] - e[1]);
            let d2 = r * r + h2;
            if r < k {
                log_p -= s * params.eta_l * inv_pow(d2, params.alpha_l);
            } else {
                log_p -= (s * params.eta_n * inv_pow(d2, params.alpha_n)).ln_1p();
            }
            if log_p < -745.0 {
                return Ok(0.0);
            }
        }
        Ok(log_p.exp())
    }
}

fn pso_given_interferers(
    params: &NetworkParams,
    beta_e: f64,
    zone: Option<GuardZone>,
    points: &[Point],
    window: f64,
    opts: &SemiAnalyticOptions,
) -> Result<(f64, f64)> {
    if points.is_empty() {
        return Ok((1.0, 0.0));
    }
    let m = opts.angular_nodes;
    let step = TAU / m as f64;
    let ring = |r: f64| -> Result<f64> {
        let mut acc = 0.0;
        for j in 0..m {
            let (s, c) = (j as f64 * step).sin_cos();
            acc += exceedance(params, beta_e, points, [r * c, r * s])?;
        }
        Ok(acc * step)
    };
    // Quadrature closures cannot fail, so park the first error here.
    let error = std::cell::Cell::new(None);
    let integrand = |r: f64| match ring(r) {
        Ok(v) => r * v,
        Err(e) => {
            error.set(Some(e));
            0.0
        }
    };

    let k = params.los_radius();
    let d = GuardZone::radius(zone).min(window);
    let quad = QuadOptions {
        rel_tol: opts.rel_tol,
        abs_tol: 0.5 * opts.probability_tol / params.lambda_e,
        max_subdivisions: opts.max_subdivisions,
    };
    let mut total = 0.0;
    let mut accuracy_error = None;
    let mut segment = |a: f64, b: f64| {
        if b > a {
            match integrate(integrand, a, b, quad) {
                Ok(q) => total += q.value,
                Err(Error::Accuracy { estimate, error }) => {
                    total += estimate;
                    accuracy_error = Some(error);
                }
                Err(e) => error.set(Some(e)),
            }
        }
    };
    segment(d, k.min(window));
    segment(d.max(k), window);
    if let Some(e) = error.take() {
        return Err(e);
    }
    let value = -(-params.lambda_e * total).exp_m1();
    if accuracy_error.is_some() {
        return Err(Error::Accuracy { estimate: value, error: accuracy_error.unwrap_or(0.0) });
    }
    let rim = ring(window)? / TAU;
    let tail = (params.lambda_e * PI * window * window * rim).min(1.0);
    Ok((value, tail))
}
