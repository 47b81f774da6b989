//! Secrecy-capacity maximization over the wiretap-code rates, the UAV
//! altitude and the guard-zone radius.
//!
//! For a fixed altitude and zone, the outage constraint `P̃so ≤ ε` is met
//! with equality, which fixes the redundancy rate `R_e*`. The codeword rate
//! then maximizes `(R_t − R_e*)·P̄c(R_t)` in closed form through Lambert W.
//! Altitude and zone radius are searched on grids.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::analytic::{effective_density, pc_approx, pc_simplified, pso_zone_approx, Q1Cache};
use crate::error::{Error, Result};
use crate::mathkit::{bisect, lambert_w0};
use crate::model::{threshold, GuardZone, NetworkParams};

/// Smallest redundancy rate considered; the outage form is singular at 0.
pub const RE_FLOOR: f64 = 1e-6;
/// Upper end of the initial bracket for `R_e`; it is doubled once.
pub const RE_CEILING: f64 = 40.0;
/// Bracket width at which the `R_e` bisection stops.
pub const RE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchDiagnostics {
    pub h_points: usize,
    pub d_points: usize,
    pub infeasible_cells: usize,
    /// Bisection steps summed over all grid cells.
    pub root_iterations: u64,
    /// Bisection steps spent on the winning cell.
    pub optimum_iterations: u32,
    /// `P̄c` (the surrogate used to pick `R_t*`) at the optimum.
    pub surrogate_pc: f64,
    /// `P̃c` (used for the reported capacity) at the optimum.
    pub approx_pc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumReport {
    pub r_t: f64,
    pub r_s: f64,
    pub r_e: f64,
    pub h: f64,
    /// Guard-zone radius; `None` for the no-zone problem.
    pub d: Option<f64>,
    /// Secrecy transmission capacity, bps/Hz/m².
    pub capacity: f64,
    /// Secrecy outage probability achieved at the optimum.
    pub outage: f64,
    pub diagnostics: SearchDiagnostics,
}

/// Result of the outage-equality solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReSolution {
    pub r_e: f64,
    pub outage: f64,
    /// False when the constraint is slack at the floor.
    pub active: bool,
    pub iterations: u32,
}

fn outage_at(params: &NetworkParams, r_e: f64, zone: Option<GuardZone>) -> Result<f64> {
    pso_zone_approx(params, threshold(r_e), zone.unwrap_or(GuardZone { d: 0.0 }))
}

/// Smallest `R_e` meeting `P̃so(R_e) ≤ ε`.
pub fn solve_re(params: &NetworkParams, epsilon: f64, zone: Option<GuardZone>) -> Result<f64> {
    solve_re_detailed(params, epsilon, zone).map(|s| s.r_e)
}

/// [`solve_re`] with the achieved outage and bisection statistics.
pub fn solve_re_detailed(params: &NetworkParams, epsilon: f64, zone: Option<GuardZone>) -> Result<ReSolution> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain { what: "outage target epsilon", value: epsilon });
    }
    let at_floor = outage_at(params, RE_FLOOR, zone)?;
    if at_floor <= epsilon {
        return Ok(ReSolution { r_e: RE_FLOOR, outage: at_floor, active: false, iterations: 0 });
    }
    let mut hi = RE_CEILING;
    let mut at_hi = outage_at(params, hi, zone)?;
    if at_hi > epsilon {
        hi *= 2.0;
        at_hi = outage_at(params, hi, zone)?;
        if at_hi > epsilon {
            return Err(Error::Infeasible { target: epsilon, min_outage: at_hi });
        }
    }
    // Any evaluation error inside the bisection would come from an invalid
    // threshold, which cannot happen for R_e ≥ RE_FLOOR.
    let root = bisect(
        |r| outage_at(params, r, zone).map_or(f64::NAN, |p| p - epsilon),
        RE_FLOOR,
        hi,
        RE_TOLERANCE,
    )?;
    // Report the feasible end so the constraint is never violated.
    let r_e = root.root + 0.5 * RE_TOLERANCE;
    Ok(ReSolution { r_e, outage: outage_at(params, r_e, zone)?, active: true, iterations: root.iterations })
}

/// Closed-form `R_e*` for a zone that covers the LoS disk (`D ≥ K`):
/// `log2(1 + 4·W0(x)²/(π⁴λu²(H²+D²)²))` with
/// `x = πλe(H²+D²)e^{πλuH²}/ln(1/(1−ε))`.
pub fn re_closed_zone(params: &NetworkParams, epsilon: f64, zone: GuardZone) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain { what: "outage target epsilon", value: epsilon });
    }
    // A few ulps of slack: cot(π/4) evaluates slightly above 1.
    if zone.d < params.los_radius() * (1.0 - 1e-12) {
        return Err(Error::InvalidParams(format!(
            "closed-form R_e needs D >= K, got D={} K={}",
            zone.d,
            params.los_radius()
        )));
    }
    let h2 = params.h * params.h;
    let a = h2 + zone.d * zone.d;
    let budget = -(-epsilon).ln_1p();
    let x = PI * params.lambda_e * a * (PI * params.lambda_u * h2).exp() / budget;
    if !x.is_finite() || params.lambda_u == 0.0 {
        return Err(Error::Infeasible { target: epsilon, min_outage: 1.0 });
    }
    let w = lambert_w0(x).map_err(|_| Error::Infeasible { target: epsilon, min_outage: 1.0 })?;
    let beta_e = 4.0 * w * w / (PI.powi(4) * params.lambda_u * params.lambda_u * a * a);
    Ok(beta_e.ln_1p() / LN_2)
}

fn lambert_term(params: &NetworkParams, r_e: f64) -> f64 {
    // Stationary point of (R_t − R_e)·exp(−A·2^{R_t/2}): with u = (R_t − R_e)·ln2/2,
    // u·e^u = 1/(A·2^{R_e/2}), A = (π²/2)·λu·H·√(η_N/η_L).
    let x = (1.0 / params.eta_ratio()).sqrt() * (2.0f64).powf(1.0 - r_e / 2.0) / (PI * PI * params.lambda_u * params.h);
    // x > 0 always; W0 is defined on the whole positive axis.
    lambert_w0(x).unwrap_or(f64::INFINITY)
}

/// Codeword rate maximizing `(R_t − R_e)·P̄c(R_t)`:
/// `R_e + (2/ln 2)·W0(√(η_L/η_N)·2^{1−R_e/2}/(π²λuH))`.
pub fn rt_star(params: &NetworkParams, r_e_star: f64) -> f64 {
    r_e_star + rs_star(params, r_e_star)
}

/// Secrecy rate at the optimum, `R_t* − R_e*`.
pub fn rs_star(params: &NetworkParams, r_e_star: f64) -> f64 {
    2.0 / LN_2 * lambert_term(params, r_e_star)
}

/// Rates approached as the zone radius grows without bound (`R_e* → 0`).
pub fn corollary4_limit(params: &NetworkParams) -> (f64, f64) {
    let r = rs_star(params, 0.0);
    (r, r)
}

/// `D_max = 5/√(πλe)`: beyond it the thinning factor is below `e^{−25}`.
pub fn d_max(lambda_e: f64) -> f64 {
    5.0 / (PI * lambda_e).sqrt()
}

/// Altitudes from `h_min` to `h_max` in 1 m steps.
pub fn default_h_grid(params: &NetworkParams) -> Vec<f64> {
    let n = ((params.h_max - params.h_min) + 1e-9).floor() as usize;
    (0..=n).map(|i| params.h_min + i as f64).collect()
}

/// Zone radii from 0 to `D_max` in 1 m steps (just `{0}` without eavesdroppers).
pub fn default_d_grid(params: &NetworkParams) -> Vec<f64> {
    if params.lambda_e == 0.0 {
        return vec![0.0];
    }
    let n = d_max(params.lambda_e).floor() as usize;
    (0..=n).map(|i| i as f64).collect()
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    h: f64,
    d: f64,
    r_e: ReSolution,
    r_t: f64,
    r_s: f64,
    capacity: f64,
    pc: f64,
}

fn evaluate_cell(base: &NetworkParams, epsilon: f64, h: f64, zone: Option<GuardZone>) -> Result<Cell> {
    let params = base.at_altitude(h);
    let sol = solve_re_detailed(&params, epsilon, zone)?;
    let r_t = rt_star(&params, sol.r_e);
    let r_s = r_t - sol.r_e;
    let pc = pc_approx(&params, threshold(r_t));
    let density = match zone {
        Some(z) => effective_density(params.lambda_u, params.lambda_e, z),
        None => params.lambda_u,
    };
    Ok(Cell { h, d: GuardZone::radius(zone), r_e: sol, r_t, r_s, capacity: r_s * pc * density, pc })
}

fn search(params: &NetworkParams, epsilon: f64, h_grid: &[f64], d_grid: Option<&[f64]>) -> Result<OptimumReport> {
    params.validate()?;
    if h_grid.is_empty() || d_grid.is_some_and(|d| d.is_empty()) {
        return Err(Error::InvalidParams("search grids must be nonempty".into()));
    }
    if let Some(&h) = h_grid.iter().find(|&&h| !(h >= params.h_min && h <= params.h_max)) {
        return Err(Error::InvalidParams(format!("altitude {h} outside [{}, {}]", params.h_min, params.h_max)));
    }
    if let Some(&d) = d_grid.unwrap_or(&[]).iter().find(|&&d| !(d >= 0.0 && d.is_finite())) {
        return Err(Error::InvalidParams(format!("zone radius {d} must be finite and >= 0")));
    }
    let zones: Vec<Option<GuardZone>> = match d_grid {
        Some(ds) => ds.iter().map(|&d| Some(GuardZone { d })).collect(),
        None => vec![None],
    };
    let cells: Vec<(f64, Option<GuardZone>)> = h_grid.iter().flat_map(|&h| zones.iter().map(move |&z| (h, z))).collect();
    let results: Vec<Result<Cell>> = cells.par_iter().map(|&(h, z)| evaluate_cell(params, epsilon, h, z)).collect();

    // Sequential scan in (H, D) order: strict improvement keeps the lowest
    // H, then the lowest D, among ties.
    let mut best: Option<Cell> = None;
    let mut infeasible = 0;
    let mut least_outage = f64::INFINITY;
    let mut iterations = 0u64;
    for r in results {
        match r {
            Ok(c) => {
                iterations += c.r_e.iterations as u64;
                if best.is_none_or(|b| c.capacity > b.capacity) {
                    best = Some(c);
                }
            }
            Err(Error::Infeasible { min_outage, .. }) => {
                infeasible += 1;
                least_outage = least_outage.min(min_outage);
            }
            Err(e) => return Err(e),
        }
    }
    let best = best.ok_or(Error::Infeasible { target: epsilon, min_outage: least_outage })?;
    let at = params.at_altitude(best.h);
    Ok(OptimumReport {
        r_t: best.r_t,
        r_s: best.r_s,
        r_e: best.r_e.r_e,
        h: best.h,
        d: d_grid.map(|_| best.d),
        capacity: best.capacity,
        outage: best.r_e.outage,
        diagnostics: SearchDiagnostics {
            h_points: h_grid.len(),
            d_points: zones.len(),
            infeasible_cells: infeasible,
            root_iterations: iterations,
            optimum_iterations: best.r_e.iterations,
            surrogate_pc: pc_simplified(&at, best.r_t),
            approx_pc: best.pc,
        },
    })
}

/// Best altitude without a guard zone.
pub fn optimize_no_zone(params: &NetworkParams, epsilon: f64, h_grid: &[f64]) -> Result<OptimumReport> {
    search(params, epsilon, h_grid, None)
}

/// Best altitude and guard-zone radius.
pub fn optimize_zone(params: &NetworkParams, epsilon: f64, h_grid: &[f64], d_grid: &[f64]) -> Result<OptimumReport> {
    search(params, epsilon, h_grid, Some(d_grid))
}

/// `Q1` at the optimum's redundancy rate; handy for diagnostics.
pub fn q1_at(params: &NetworkParams, r_e: f64) -> f64 {
    Q1Cache::new(params.lambda_u, threshold(r_e)).q1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::pso_approx;

    fn params() -> NetworkParams {
        NetworkParams::default()
    }

    #[test]
    fn no_eavesdroppers_gives_floor() {
        let p = NetworkParams { lambda_e: 0.0, ..params() };
        assert_eq!(solve_re(&p, 0.01, None).unwrap(), RE_FLOOR);
        assert_eq!(solve_re(&p, 0.01, Some(GuardZone { d: 30.0 })).unwrap(), RE_FLOOR);
    }

    #[test]
    fn active_constraint_holds_with_equality() {
        let p = params();
        let s = solve_re_detailed(&p, 0.01, None).unwrap();
        assert!(s.active);
        let achieved = pso_approx(&p, threshold(s.r_e)).unwrap();
        assert!((achieved - 0.01).abs() < 1e-6 && achieved <= 0.01);
    }

    #[test]
    fn re_grows_with_eavesdropper_density() {
        let lo = solve_re(&params(), 0.01, None).unwrap();
        let hi = solve_re(&NetworkParams { lambda_e: 3e-3, ..params() }, 0.01, None).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn closed_form_matches_bisection() {
        let p = params();
        for d in [10.0, 15.0, 30.0, 60.0] {
            let z = GuardZone { d };
            let a = re_closed_zone(&p, 0.01, z).unwrap();
            let b = solve_re(&p, 0.01, Some(z)).unwrap();
            assert!((a - b).abs() < 1e-6, "d {d}: {a} vs {b}");
        }
        assert!(re_closed_zone(&p, 0.01, GuardZone { d: 5.0 }).is_err());
    }

    #[test]
    fn closed_form_limits() {
        let p = params();
        let z = GuardZone { d: 20.0 };
        assert!(re_closed_zone(&p, 1.0 - 1e-15, z).unwrap() < 1e-3);
        let mut last = f64::INFINITY;
        for d in [10.0, 20.0, 40.0, 80.0] {
            let r = re_closed_zone(&p, 0.01, GuardZone { d }).unwrap();
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn rate_formulas() {
        let p = params();
        let (rt, rs) = corollary4_limit(&p);
        assert_eq!(rt, rs);
        assert_eq!(rt, rt_star(&p, 0.0));
        assert_eq!(rs, rs_star(&p, 0.0));
        for re in [0.5, 3.0, 12.0] {
            assert!((rt_star(&p, re) - rs_star(&p, re) - re).abs() < 1e-12);
            assert!(rs_star(&p, re) > 0.0);
        }
        // Independent of λe.
        assert_eq!(corollary4_limit(&NetworkParams { lambda_e: 0.2, ..p }), (rt, rs));
    }

    #[test]
    fn grids() {
        let p = params();
        let h = default_h_grid(&p);
        assert_eq!(h.len(), 91);
        assert_eq!((h[0], h[90]), (10.0, 100.0));
        let d = default_d_grid(&p);
        assert_eq!(d[0], 0.0);
        assert_eq!(d.len(), d_max(1e-3).floor() as usize + 1);
        assert_eq!(default_d_grid(&NetworkParams { lambda_e: 0.0, ..p }), vec![0.0]);
    }

    #[test]
    fn zero_zone_grid_reduces_to_no_zone() {
        let p = params();
        let h = default_h_grid(&p);
        let a = optimize_no_zone(&p, 0.01, &h).unwrap();
        let b = optimize_zone(&p, 0.01, &h, &[0.0]).unwrap();
        assert_eq!((a.r_t, a.r_s, a.h, a.capacity), (b.r_t, b.r_s, b.h, b.capacity));
        assert_eq!(b.d, Some(0.0));
        assert_eq!(a.d, None);
    }

    #[test]
    fn report_invariants() {
        let p = params();
        let r = optimize_zone(&p, 0.01, &default_h_grid(&p), &default_d_grid(&p)).unwrap();
        assert!(r.r_t >= r.r_s && r.r_s >= 0.0);
        assert!(r.outage <= 0.01 + 1e-9);
        assert!(r.h >= p.h_min && r.h <= p.h_max);
        assert_eq!(r.diagnostics.h_points, 91);
        assert!(r.diagnostics.root_iterations > 0);
    }

    #[test]
    fn bad_grids_rejected() {
        let p = params();
        assert!(optimize_no_zone(&p, 0.01, &[]).is_err());
        assert!(optimize_no_zone(&p, 0.01, &[5.0]).is_err());
        assert!(optimize_zone(&p, 0.01, &[10.0], &[]).is_err());
        assert!(solve_re(&p, 0.0, None).is_err());
    }

    #[test]
    fn infeasible_without_interference() {
        // No interferers: eavesdroppers always decode, no R_e helps.
        let p = NetworkParams { lambda_u: 0.0, ..params() };
        assert!(matches!(solve_re(&p, 0.01, None), Err(Error::Infeasible { .. })));
        assert!(matches!(optimize_no_zone(&p, 0.01, &[10.0]), Err(Error::Infeasible { .. })));
    }
}
