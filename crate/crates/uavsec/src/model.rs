//! Network parameters, point-process sampling and the elevation-dependent
//! LoS/NLoS channel that defines the simulated ground truth.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, UnitCircle};

use crate::error::{Error, Result};

/// Horizontal ground position in metres.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// UAV (and legitimate receiver) density, per m².
    pub lambda_u: f64,
    /// Eavesdropper density, per m².
    pub lambda_e: f64,
    /// Elevation-angle threshold for LoS, radians.
    pub theta_c: f64,
    /// UAV altitude, m.
    pub h: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Reference power gains at 1 m (linear).
    pub eta_l: f64,
    pub eta_n: f64,
    pub alpha_l: f64,
    pub alpha_n: f64,
    /// Transmit power, W. It cancels out of every SIR and is never used.
    pub p_t: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            lambda_u: 1e-3,
            lambda_e: 1e-3,
            theta_c: FRAC_PI_4,
            h: 10.0,
            h_min: 10.0,
            h_max: 100.0,
            eta_l: 1.0,
            eta_n: 0.01,
            alpha_l: 2.0,
            alpha_n: 4.0,
            p_t: 1.0,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.lambda_u >= 0.0 && self.lambda_u.is_finite()) {
            return bad(format!("lambda_u must be a finite density >= 0, got {}", self.lambda_u));
        }
        if !(self.lambda_e >= 0.0 && self.lambda_e.is_finite()) {
            return bad(format!("lambda_e must be a finite density >= 0, got {}", self.lambda_e));
        }
        if !(self.theta_c > 0.0 && self.theta_c < FRAC_PI_2) {
            return bad(format!("theta_c must lie in (0, pi/2), got {}", self.theta_c));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("altitude must be positive, got {}", self.h));
        }
        if !(self.h_min <= self.h && self.h <= self.h_max) {
            return bad(format!("altitude {} outside [{}, {}]", self.h, self.h_min, self.h_max));
        }
        if !(self.eta_n > 0.0 && self.eta_l >= self.eta_n && self.eta_l.is_finite()) {
            return bad(format!("need eta_l >= eta_n > 0, got eta_l={} eta_n={}", self.eta_l, self.eta_n));
        }
        if !(self.alpha_l > 0.0 && self.alpha_n > 0.0) {
            return bad("path-loss exponents must be positive".into());
        }
        Ok(())
    }

    /// Horizontal LoS radius `K = H·cot θc`.
    pub fn los_radius(&self) -> f64 {
        los_radius(self.h, self.theta_c)
    }

    /// Copy with a different altitude; the altitude bounds widen if needed.
    pub fn at_altitude(&self, h: f64) -> Self {
        Self { h, h_min: self.h_min.min(h), h_max: self.h_max.max(h), ..*self }
    }

    /// η_N/η_L, the only way the reference gains enter the closed forms.
    pub fn eta_ratio(&self) -> f64 {
        self.eta_n / self.eta_l
    }
}

/// Wiretap code: codeword rate `R_t` and secrecy rate `R_s`, bps/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WiretapCode {
    pub r_t: f64,
    pub r_s: f64,
}

impl WiretapCode {
    pub fn new(r_t: f64, r_s: f64) -> Result<Self> {
        if !(r_s >= 0.0 && r_t >= r_s && r_t.is_finite()) {
            return Err(Error::InvalidParams(format!("need R_t >= R_s >= 0, got R_t={r_t} R_s={r_s}")));
        }
        Ok(Self { r_t, r_s })
    }

    /// Redundancy rate `R_e = R_t − R_s`.
    pub fn r_e(&self) -> f64 {
        self.r_t - self.r_s
    }

    pub fn beta_t(&self) -> f64 {
        threshold(self.r_t)
    }

    pub fn beta_e(&self) -> f64 {
        threshold(self.r_e())
    }
}

/// SIR threshold `2^R − 1` for rate `R`.
pub fn threshold(rate: f64) -> f64 {
    (rate * std::f64::consts::LN_2).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardZone {
    pub d: f64,
}

impl GuardZone {
    pub fn new(d: f64) -> Result<Self> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidParams(format!("guard-zone radius must be >= 0, got {d}")));
        }
        Ok(Self { d })
    }

    /// Radius of the zone, treating "no zone" as radius 0.
    pub fn radius(zone: Option<GuardZone>) -> f64 {
        zone.map_or(0.0, |z| z.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FadingModel {
    /// LoS links deterministic, NLoS links Rayleigh.
    ExactLoSNLoS,
    /// Every link Rayleigh with the same path loss.
    AllRayleigh,
}

impl FadingModel {
    pub fn name(self) -> &'static str {
        match self {
            FadingModel::ExactLoSNLoS => "exact",
            FadingModel::AllRayleigh => "rayleigh",
        }
    }
}

pub fn los_radius(h: f64, theta_c: f64) -> f64 {
    h / theta_c.tan()
}

/// Received power factor `η·S·D^{−α}` of a link with horizontal distance
/// `r`. A link is LoS iff `r < K`; the boundary belongs to NLoS.
pub fn link_gain(r: f64, h: f64, params: &NetworkParams, model: FadingModel, fading_draw: f64) -> f64 {
    LinkModel::new(&NetworkParams { h, ..*params }, model).gain(r * r, fading_draw)
}

/// [`link_gain`] with the per-parameter constants hoisted, keyed by the
/// squared horizontal distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    h2: f64,
    k2: f64,
    eta_l: f64,
    eta_n: f64,
    alpha_l: f64,
    alpha_n: f64,
    model: FadingModel,
}

impl LinkModel {
    pub fn new(params: &NetworkParams, model: FadingModel) -> Self {
        let k = params.los_radius();
        Self {
            h2: params.h * params.h,
            k2: k * k,
            eta_l: params.eta_l,
            eta_n: params.eta_n,
            alpha_l: params.alpha_l,
            alpha_n: params.alpha_n,
            model,
        }
    }

    #[inline]
    pub fn gain(&self, r2: f64, fading_draw: f64) -> f64 {
        let d2 = r2 + self.h2;
        if r2 < self.k2 {
            let s = match self.model {
                FadingModel::ExactLoSNLoS => 1.0,
                FadingModel::AllRayleigh => fading_draw,
            };
            self.eta_l * s * inv_pow(d2, self.alpha_l)
        } else {
            self.eta_n * fading_draw * inv_pow(d2, self.alpha_n)
        }
    }

    /// Whether the link needs its fading draw under this model.
    #[inline]
    pub fn faded(&self, r2: f64) -> bool {
        self.model == FadingModel::AllRayleigh || r2 >= self.k2
    }
}

/// `d2^{−α/2}`, with the usual exponents special-cased.
#[inline]
pub(crate) fn inv_pow(d2: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        1.0 / d2
    } else if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * alpha)
    }
}

/// Default simulation-window radius.
///
/// The NLoS interference expected beyond radius `R` relative to that
/// inside `[K, R]` is `(H² + K²)/(R² − K²)`. The window is the smallest
/// radius that keeps this below 0.1%, and at least `50·K`.
pub fn default_window_radius(params: &NetworkParams) -> f64 {
    let k = params.los_radius();
    let tail = (k * k + 1000.0 * (params.h * params.h + k * k)).sqrt();
    (50.0 * k).max(tail)
}

/// Transmitter/receiver identities used to key per-link fading draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    TypicalTx,
    Interferer(usize),
    TypicalRx,
    Eavesdropper(usize),
}

impl Node {
    fn key(self) -> u64 {
        match self {
            Node::TypicalTx | Node::TypicalRx => 0,
            Node::Interferer(k) => 1 + k as u64,
            Node::Eavesdropper(k) => (1 << 62) + k as u64,
        }
    }
}

/// Counter-based source of unit-mean exponential fading draws.
///
/// A draw is a pure function of (seed, realization, transmitter, receiver),
/// so the two fading models see identical NLoS draws on the same
/// realization, and draws can be taken in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FadingSource {
    /// Hash of (seed, realization); the link keys are mixed in per draw.
    base: u64,
}

impl FadingSource {
    pub fn new(seed: u64, realization: u64) -> Self {
        Self { base: splitmix(splitmix(seed ^ 0x6a09_e667_f3bc_c909) ^ realization) }
    }

    #[inline]
    pub fn draw(&self, tx: Node, rx: Node) -> f64 {
        let h = splitmix(splitmix(self.base ^ tx.key()) ^ rx.key().rotate_left(17));
        // 1 − u is exact for a 53-bit u, so `ln` loses nothing to `ln_1p`.
        let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        -(1.0 - u).ln()
    }
}

#[inline]
fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Which point process a random stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Interferers = 0,
    Eavesdroppers = 1,
}

/// Independent random stream for one process of one realization.
pub fn realization_rng(seed: u64, realization: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization.wrapping_mul(2).wrapping_add(stream as u64));
    rng
}

/// Homogeneous PPP on an annulus, generated outward in radius.
///
/// Squared radii follow `r_k² = r_in² + Γ_k/(πλ)` with `Γ_k` the arrival
/// times of a unit-rate Poisson process, so the count on the annulus is
/// Poisson with mean `λπ(r_out² − r_in²)` and positions are uniform. Points
/// come out sorted by distance from the origin, which lets callers stop
/// early once the remaining points cannot matter.
pub struct RadialPpp<'a, R: Rng> {
    rng: &'a mut R,
    r2: f64,
    r_out2: f64,
    scale: f64,
}

impl<'a, R: Rng> RadialPpp<'a, R> {
    pub fn new(density: f64, r_in: f64, r_out: f64, rng: &'a mut R) -> Self {
        let scale = if density > 0.0 { 1.0 / (PI * density) } else { f64::INFINITY };
        Self { rng, r2: r_in * r_in, r_out2: r_out * r_out, scale }
    }
}

impl<R: Rng> Iterator for RadialPpp<'_, R> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        if self.scale == f64::INFINITY {
            return None;
        }
        let gap: f64 = self.rng.sample(Exp1);
        self.r2 += gap * self.scale;
        if self.r2 > self.r_out2 {
            self.scale = f64::INFINITY;
            return None;
        }
        let [c, s]: [f64; 2] = self.rng.sample(UnitCircle);
        let r = self.r2.sqrt();
        Some([r * c, r * s])
    }
}

/// Samples a PPP of the given density on the annulus `[r_in, r_out]`.
pub fn sample_ppp<R: Rng>(density: f64, r_in: f64, r_out: f64, rng: &mut R) -> Vec<Point> {
    RadialPpp::new(density, r_in, r_out, rng).collect()
}

/// One snapshot of the interferer and eavesdropper processes.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub id: u64,
    /// Interfering UAV ground projections on `[0, R_w]`, nearest first.
    pub interferers: Vec<Point>,
    /// Eavesdroppers on `[D, R_w]` (or `[0, R_w]` without a zone), nearest first.
    pub eavesdroppers: Vec<Point>,
    pub fading: FadingSource,
}

impl Realization {
    /// Samples realization `id` of the master `seed` on a window of radius
    /// `window`. The interferer process ignores the guard zone: blocked
    /// UAVs emit noise that is statistically identical to data.
    pub fn sample(params: &NetworkParams, window: f64, zone: Option<GuardZone>, seed: u64, id: u64) -> Self {
        let mut rng = realization_rng(seed, id, Stream::Interferers);
        let interferers = sample_ppp(params.lambda_u, 0.0, window, &mut rng);
        let mut rng = realization_rng(seed, id, Stream::Eavesdroppers);
        let d = GuardZone::radius(zone).min(window);
        let eavesdroppers = sample_ppp(params.lambda_e, d, window, &mut rng);
        Self { id, interferers, eavesdroppers, fading: FadingSource::new(seed, id) }
    }
}

/// Signal gain of the typical link: overhead LoS at distance `H`.
pub(crate) fn typical_signal(params: &NetworkParams, model: FadingModel, draw: f64) -> f64 {
    let s = match model {
        FadingModel::ExactLoSNLoS => 1.0,
        FadingModel::AllRayleigh => draw,
    };
    params.eta_l * s * inv_pow(params.h * params.h, params.alpha_l)
}

#[inline]
pub(crate) fn norm2(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

/// SIR at the typical legitimate receiver (origin).
pub fn sir_legitimate(real: &Realization, params: &NetworkParams, model: FadingModel) -> f64 {
    let link = LinkModel::new(params, model);
    let signal = typical_signal(params, model, real.fading.draw(Node::TypicalTx, Node::TypicalRx));
    let interference: f64 = real
        .interferers
        .iter()
        .enumerate()
        .map(|(k, &u)| link.gain(norm2(u), real.fading.draw(Node::Interferer(k), Node::TypicalRx)))
        .sum();
    if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

/// SIR at eavesdropper `e_index` when decoding the typical transmitter.
pub fn sir_eavesdropper(real: &Realization, e_index: usize, params: &NetworkParams, model: FadingModel) -> f64 {
    let e = real.eavesdroppers[e_index];
    let rx = Node::Eavesdropper(e_index);
    let link = LinkModel::new(params, model);
    let signal = link.gain(norm2(e), real.fading.draw(Node::TypicalTx, rx));
    let interference: f64 = real
        .interferers
        .iter()
        .enumerate()
        .map(|(k, &u)| link.gain(norm2([u[0] - e[0], u[1] - e[1]]), real.fading.draw(Node::Interferer(k), rx)))
        .sum();
    if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}
