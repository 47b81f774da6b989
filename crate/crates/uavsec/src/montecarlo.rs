//! Monte Carlo ground truth for connection, secrecy outage and secrecy
//! transmission capacity.
//!
//! Realization `i` of a run draws its interferers and eavesdroppers from
//! dedicated ChaCha streams keyed by `(seed, i)`, and its fading from the
//! counter-based [`FadingSource`]. Results therefore depend only on the
//! configuration, never on thread count or scheduling, and the two fading
//! models see the same point fields and the same NLoS draws.

use rayon::prelude::*;

use crate::analytic::{effective_density, MetricEstimate};
use crate::error::{Error, Result};
use crate::model::{
    default_window_radius, norm2, realization_rng, typical_signal, FadingModel, FadingSource, GuardZone,
    LinkModel, NetworkParams, Node, Point, RadialPpp, Realization, Stream, WiretapCode,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_realizations: u64,
    /// Radius of the sampling window, m.
    pub window_radius: f64,
    pub seed: u64,
    pub fading: FadingModel,
    /// Realizations between progress callbacks.
    pub batch_size: u64,
}

impl SimConfig {
    /// Configuration with the default window for `params`.
    pub fn new(params: &NetworkParams, n_realizations: u64, seed: u64, fading: FadingModel) -> Self {
        Self {
            n_realizations,
            window_radius: default_window_radius(params),
            seed,
            fading,
            batch_size: 10_000,
        }
    }

    pub fn validate(&self, params: &NetworkParams) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::InvalidParams("n_realizations must be at least 1".into()));
        }
        if !(self.window_radius > params.los_radius()) || !self.window_radius.is_finite() {
            return Err(Error::InvalidParams(format!(
                "window radius {} must exceed the LoS radius {}",
                self.window_radius,
                params.los_radius()
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParams("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Running totals handed to the progress hook after each batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub completed: u64,
    pub total: u64,
    pub events: u64,
}

fn no_progress(_: Progress) {}

/// Fraction of realizations in which the typical receiver decodes.
pub fn sim_connection(params: &NetworkParams, beta_t: f64, cfg: &SimConfig) -> Result<MetricEstimate> {
    sim_connection_with(params, beta_t, cfg, &no_progress)
}

pub fn sim_connection_with(
    params: &NetworkParams,
    beta_t: f64,
    cfg: &SimConfig,
    progress: &(dyn Fn(Progress) + Sync),
) -> Result<MetricEstimate> {
    params.validate()?;
    cfg.validate(params)?;
    let hits = run_batches(cfg, progress, |id, _: &mut ()| connection_event(params, beta_t, cfg, id));
    Ok(MetricEstimate::from_counts(hits, cfg.n_realizations))
}

/// Fraction of realizations in which at least one eavesdropper decodes.
pub fn sim_outage(params: &NetworkParams, beta_e: f64, zone: Option<GuardZone>, cfg: &SimConfig) -> Result<MetricEstimate> {
    sim_outage_with(params, beta_e, zone, cfg, &no_progress)
}

pub fn sim_outage_with(
    params: &NetworkParams,
    beta_e: f64,
    zone: Option<GuardZone>,
    cfg: &SimConfig,
    progress: &(dyn Fn(Progress) + Sync),
) -> Result<MetricEstimate> {
    params.validate()?;
    cfg.validate(params)?;
    let hits = run_batches(cfg, progress, |id, scratch: &mut Scratch| outage_event(params, beta_e, zone, cfg, id, scratch));
    Ok(MetricEstimate::from_counts(hits, cfg.n_realizations))
}

/// `Rs × (simulated Pc) × transmitter density`, thinned by the guard zone.
pub fn sim_stc(params: &NetworkParams, code: &WiretapCode, zone: Option<GuardZone>, cfg: &SimConfig) -> Result<MetricEstimate> {
    let pc = sim_connection(params, code.beta_t(), cfg)?;
    let density = match zone {
        Some(z) => effective_density(params.lambda_u, params.lambda_e, z),
        None => params.lambda_u,
    };
    let scale = code.r_s * density;
    Ok(MetricEstimate { value: scale * pc.value, method: pc.method, half_width: scale * pc.half_width })
}

fn run_batches<S, F>(cfg: &SimConfig, progress: &(dyn Fn(Progress) + Sync), event: F) -> u64
where
    S: Default + Send,
    F: Fn(u64, &mut S) -> bool + Sync,
{
    let mut events = 0;
    let mut start = 0;
    while start < cfg.n_realizations {
        let end = (start + cfg.batch_size).min(cfg.n_realizations);
        events += (start..end)
            .into_par_iter()
            .map_init(S::default, |scratch, id| event(id, scratch) as u64)
            .sum::<u64>();
        start = end;
        progress(Progress { completed: end, total: cfg.n_realizations, events });
    }
    events
}

/// Fading draw of a link, skipped when the model does not use it.
#[inline]
fn draw(link: &LinkModel, r2: f64, fading: &FadingSource, tx: Node, rx: Node) -> f64 {
    if link.faded(r2) {
        fading.draw(tx, rx)
    } else {
        1.0
    }
}

/// Whether realization `id` connects. Interferers are generated nearest
/// first and the run stops as soon as the partial interference alone
/// pushes the SIR to the threshold. Adding further nonnegative terms can
/// only lower the SIR, so the decision equals thresholding
/// [`crate::model::sir_legitimate`] on the full realization.
pub fn connection_event(params: &NetworkParams, beta_t: f64, cfg: &SimConfig, id: u64) -> bool {
    let fading = FadingSource::new(cfg.seed, id);
    let model = cfg.fading;
    let link = LinkModel::new(params, model);
    let signal = typical_signal(params, model, fading.draw(Node::TypicalTx, Node::TypicalRx));
    let mut rng = realization_rng(cfg.seed, id, Stream::Interferers);
    let mut interference = 0.0;
    for (k, u) in RadialPpp::new(params.lambda_u, 0.0, cfg.window_radius, &mut rng).enumerate() {
        let r2 = norm2(u);
        interference += link.gain(r2, draw(&link, r2, &fading, Node::Interferer(k), Node::TypicalRx));
        if signal / interference <= beta_t {
            return false;
        }
    }
    interference == 0.0 || signal / interference > beta_t
}

/// Reusable per-thread buffers for the outage simulation.
#[derive(Default)]
pub struct Scratch {
    interferers: Vec<Point>,
    grid: Grid,
}

/// Whether realization `id` has an intercepting eavesdropper.
///
/// Eavesdroppers are visited nearest first and the realization stops at
/// the first one that decodes. Each eavesdropper's interference is summed
/// outward through a bucket grid and abandoned as soon as it rules out
/// decoding.
pub fn outage_event(
    params: &NetworkParams,
    beta_e: f64,
    zone: Option<GuardZone>,
    cfg: &SimConfig,
    id: u64,
    scratch: &mut Scratch,
) -> bool {
    let link = LinkModel::new(params, cfg.fading);
    let fading = FadingSource::new(cfg.seed, id);
    let d = GuardZone::radius(zone).min(cfg.window_radius);
    let mut e_rng = realization_rng(cfg.seed, id, Stream::Eavesdroppers);
    let mut eavesdroppers = RadialPpp::new(params.lambda_e, d, cfg.window_radius, &mut e_rng).peekable();
    if eavesdroppers.peek().is_none() {
        return false;
    }

    let mut rng = realization_rng(cfg.seed, id, Stream::Interferers);
    scratch.interferers.clear();
    scratch.interferers.extend(RadialPpp::new(params.lambda_u, 0.0, cfg.window_radius, &mut rng));
    scratch.grid.rebuild(&scratch.interferers, cfg.window_radius, params.lambda_u);
    let grid = &scratch.grid;

    for (j, e) in eavesdroppers.enumerate() {
        let rx = Node::Eavesdropper(j);
        let e2 = norm2(e);
        let signal = link.gain(e2, draw(&link, e2, &fading, Node::TypicalTx, rx));
        if signal == 0.0 {
            continue;
        }
        let mut interference = 0.0;
        let blocked = grid.any_outward(e, |u, k| {
            let r2 = norm2([u[0] - e[0], u[1] - e[1]]);
            interference += link.gain(r2, draw(&link, r2, &fading, Node::Interferer(k), rx));
            signal / interference <= beta_e
        });
        if !blocked && (interference == 0.0 || signal / interference > beta_e) {
            return true;
        }
    }
    false
}

/// Uniform bucket grid over the square enclosing the window.
#[derive(Default)]
struct Grid {
    cell: f64,
    origin: f64,
    side: usize,
    starts: Vec<usize>,
    items: Vec<(Point, usize)>,
}

impl Grid {
    fn rebuild(&mut self, points: &[Point], window: f64, density: f64) {
        let cell = if density > 0.0 { (1.5 / density.sqrt()).clamp(5.0, 2.0 * window) } else { 2.0 * window };
        self.cell = cell;
        self.origin = -window;
        self.side = ((2.0 * window / cell).ceil() as usize).max(1);
        let n_cells = self.side * self.side;
        self.starts.clear();
        self.starts.resize(n_cells + 1, 0);
        for &p in points {
            let c = self.cell_of(p);
            self.starts[c + 1] += 1;
        }
        for c in 0..n_cells {
            self.starts[c + 1] += self.starts[c];
        }
        self.items.clear();
        self.items.resize(points.len(), ([0.0, 0.0], 0));
        let mut fill = self.starts.clone();
        for (k, &p) in points.iter().enumerate() {
            let c = self.cell_of(p);
            self.items[fill[c]] = (p, k);
            fill[c] += 1;
        }
    }

    fn coord(&self, x: f64) -> usize {
        (((x - self.origin) / self.cell) as usize).min(self.side - 1)
    }

    fn cell_of(&self, p: Point) -> usize {
        self.coord(p[1]) * self.side + self.coord(p[0])
    }

    /// Visits points ring by ring around `at` until `f` returns true;
    /// returns whether it did. Every point is visited at most once.
    fn any_outward(&self, at: Point, mut f: impl FnMut(Point, usize) -> bool) -> bool {
        let side = self.side as isize;
        let cx = self.coord(at[0].clamp(self.origin, -self.origin)) as isize;
        let cy = self.coord(at[1].clamp(self.origin, -self.origin)) as isize;
        let mut visit = |x: isize, y: isize| -> bool {
            if x < 0 || y < 0 || x >= side || y >= side {
                return false;
            }
            let c = y as usize * self.side + x as usize;
            self.items[self.starts[c]..self.starts[c + 1]].iter().any(|&(p, k)| f(p, k))
        };
        for ring in 0..=side {
            if ring == 0 {
                if visit(cx, cy) {
                    return true;
                }
            } else {
                for x in cx - ring..=cx + ring {
                    if visit(x, cy - ring) || visit(x, cy + ring) {
                        return true;
                    }
                }
                for y in cy - ring + 1..cy + ring {
                    if visit(cx - ring, y) || visit(cx + ring, y) {
                        return true;
                    }
                }
            }
            if cx - ring <= 0 && cy - ring <= 0 && cx + ring >= side - 1 && cy + ring >= side - 1 {
                break;
            }
        }
        false
    }
}

/// Materializes realization `id` of a run exactly as the simulator sees it.
pub fn realization(params: &NetworkParams, zone: Option<GuardZone>, cfg: &SimConfig, id: u64) -> Realization {
    Realization::sample(params, cfg.window_radius, zone, cfg.seed, id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::pc_approx;
    use crate::model::{sir_eavesdropper, sir_legitimate};
    use std::sync::atomic::{AtomicU64, Ordering};

    fn params() -> NetworkParams {
        NetworkParams::default()
    }

    #[test]
    fn early_exit_matches_full_sir() {
        let p = params();
        for model in [FadingModel::ExactLoSNLoS, FadingModel::AllRayleigh] {
            let cfg = SimConfig { window_radius: 200.0, ..SimConfig::new(&p, 1, 17, model) };
            for id in 0..300 {
                let real = realization(&p, None, &cfg, id);
                assert_eq!(connection_event(&p, 31.0, &cfg, id), sir_legitimate(&real, &p, model) > 31.0, "id {id}");
            }
        }
    }

    #[test]
    fn grid_search_matches_full_outage() {
        let p = NetworkParams { lambda_e: 3e-3, ..params() };
        let mut scratch = Scratch::default();
        let mut positives = 0;
        for (zone, beta) in [(None, 7.0), (Some(GuardZone { d: 15.0 }), 1.0), (None, 1000.0)] {
            for model in [FadingModel::ExactLoSNLoS, FadingModel::AllRayleigh] {
                let cfg = SimConfig { window_radius: 150.0, ..SimConfig::new(&p, 1, 5, model) };
                for id in 0..150 {
                    let real = realization(&p, zone, &cfg, id);
                    let full = (0..real.eavesdroppers.len()).any(|e| sir_eavesdropper(&real, e, &p, model) > beta);
                    let fast = outage_event(&p, beta, zone, &cfg, id, &mut scratch);
                    assert_eq!(fast, full, "id {id} zone {zone:?} beta {beta} {model:?}");
                    positives += full as usize;
                }
            }
        }
        assert!(positives > 20);
    }

    #[test]
    fn trivial_cases() {
        let p = params();
        let cfg = SimConfig::new(&p, 2000, 1, FadingModel::ExactLoSNLoS);
        let none = NetworkParams { lambda_u: 0.0, ..p };
        assert_eq!(sim_connection(&none, 31.0, &cfg).unwrap().value, 1.0);
        let no_eve = NetworkParams { lambda_e: 0.0, ..p };
        assert_eq!(sim_outage(&no_eve, 3.0, None, &cfg).unwrap().value, 0.0);
        // βe = 0: any eavesdropper decodes. With 785 expected eavesdroppers
        // on the window every realization has one.
        assert_eq!(sim_outage(&p, 0.0, None, &cfg).unwrap().value, 1.0);
        let code = WiretapCode::new(5.0, 0.0).unwrap();
        assert_eq!(sim_stc(&p, &code, None, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn deterministic_and_progress_reported() {
        let p = params();
        let cfg = SimConfig { batch_size: 700, ..SimConfig::new(&p, 3000, 9, FadingModel::AllRayleigh) };
        let calls = AtomicU64::new(0);
        let a = sim_connection_with(&p, 31.0, &cfg, &|pr: Progress| {
            calls.fetch_add(1, Ordering::SeqCst);
            assert!(pr.completed <= pr.total && pr.events <= pr.completed);
        })
        .unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 5);
        let b = sim_connection(&p, 31.0, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| sim_connection(&p, 31.0, &cfg).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn zero_zone_equals_no_zone() {
        let p = params();
        let cfg = SimConfig::new(&p, 3000, 2, FadingModel::ExactLoSNLoS);
        let code = WiretapCode::new(5.0, 2.0).unwrap();
        let a = sim_stc(&p, &code, Some(GuardZone { d: 0.0 }), &cfg).unwrap();
        let b = sim_stc(&p, &code, None, &cfg).unwrap();
        assert_eq!(a, b);
        let a = sim_outage(&p, 1e4, Some(GuardZone { d: 0.0 }), &cfg).unwrap();
        let b = sim_outage(&p, 1e4, None, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rayleigh_connection_matches_closed_form() {
        let p = params();
        let cfg = SimConfig::new(&p, 20_000, 3, FadingModel::AllRayleigh);
        let est = sim_connection(&p, 31.0, &cfg).unwrap();
        let exact = pc_approx(&p, 31.0);
        assert!((est.value - exact).abs() <= est.half_width * 1.3, "{est:?} vs {exact}");
    }

    #[test]
    fn stc_matches_composition() {
        let p = params();
        let cfg = SimConfig::new(&p, 20_000, 4, FadingModel::AllRayleigh);
        let code = WiretapCode::new(5.0, 3.0).unwrap();
        let zone = GuardZone { d: 12.0 };
        let est = sim_stc(&p, &code, Some(zone), &cfg).unwrap();
        let closed = crate::analytic::stc(3.0, pc_approx(&p, 31.0), effective_density(p.lambda_u, p.lambda_e, zone));
        assert!((est.value - closed).abs() <= 1.3 * est.half_width);
    }

    #[test]
    fn half_width_follows_inverse_sqrt() {
        let p = params();
        let small = sim_connection(&p, 31.0, &SimConfig::new(&p, 5_000, 6, FadingModel::AllRayleigh)).unwrap();
        let large = sim_connection(&p, 31.0, &SimConfig::new(&p, 20_000, 6, FadingModel::AllRayleigh)).unwrap();
        let ratio = small.half_width / large.half_width;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn doubling_window_changes_little() {
        let p = params();
        let base = SimConfig::new(&p, 20_000, 8, FadingModel::ExactLoSNLoS);
        let wide = SimConfig { window_radius: 2.0 * base.window_radius, ..base };
        let a = sim_connection(&p, 31.0, &base).unwrap();
        let b = sim_connection(&p, 31.0, &wide).unwrap();
        assert!((a.value - b.value).abs() < a.half_width, "{a:?} vs {b:?}");
    }

    #[test]
    fn rejects_bad_config() {
        let p = params();
        let cfg = SimConfig { window_radius: 5.0, ..SimConfig::new(&p, 10, 1, FadingModel::ExactLoSNLoS) };
        assert!(sim_connection(&p, 31.0, &cfg).is_err());
        let cfg = SimConfig { n_realizations: 0, ..SimConfig::new(&p, 10, 1, FadingModel::ExactLoSNLoS) };
        assert!(sim_outage(&p, 3.0, None, &cfg).is_err());
    }
}
