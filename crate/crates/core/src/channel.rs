//! Link SINR with residual self-interference and ergodic capacity.
//!
//! Received power is `Pt · h · g · d^-α` with `h ~ Exp(1)` small-scale
//! fading, `g` a mean-one log-normal shadowing factor and `d` in metres.
//! A receiver that is itself transmitting adds `β·Pt` of residual
//! self-interference.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::topology::Point;

pub type NodeId = u32;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Distance-dependent gain `d^-α` with `d` converted from km to metres.
pub fn path_gain(distance_km: f64, alpha: f64) -> f64 {
    (distance_km * 1000.0).powf(-alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    /// Exponential power coefficients of mean one.
    Rayleigh,
    /// `h = 1` on every link.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEnv {
    pub pt_w: f64,
    pub noise_w: f64,
    pub alpha: f64,
    pub beta: f64,
    pub shadow_sigma_db: f64,
    pub bandwidth_hz: f64,
    pub fading: Fading,
}

impl ChannelEnv {
    /// Builds the environment from link-budget quantities; the noise power
    /// is `noise_dbm_hz + 10 log10(W)`.
    pub fn from_link_budget(
        pt_dbm: f64,
        noise_dbm_hz: f64,
        bandwidth_hz: f64,
        alpha: f64,
        beta_db: f64,
        shadow_sigma_db: f64,
        fading: Fading,
    ) -> Result<Self> {
        if !(bandwidth_hz > 0.0) {
            return Err(Error::invalid(format!(
                "bandwidth must be positive, got {bandwidth_hz}"
            )));
        }
        let env = Self {
            pt_w: dbm_to_watts(pt_dbm),
            noise_w: dbm_to_watts(noise_dbm_hz + 10.0 * bandwidth_hz.log10()),
            alpha,
            beta: db_to_linear(beta_db),
            shadow_sigma_db,
            bandwidth_hz,
            fading,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.pt_w > 0.0
            && self.noise_w > 0.0
            && self.alpha >= 2.0
            && (0.0..=1.0).contains(&self.beta)
            && self.shadow_sigma_db >= 0.0
            && self.bandwidth_hz > 0.0
            && [
                self.pt_w,
                self.noise_w,
                self.alpha,
                self.shadow_sigma_db,
                self.bandwidth_hz,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid channel environment {self:?}"
            )))
        }
    }

    /// Residual self-interference power `β·Pt`.
    pub fn self_interference_w(&self) -> f64 {
        self.beta * self.pt_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub id: NodeId,
    pub pos: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx: NodeId,
    pub rx: NodeId,
    pub rx_pos: Point,
    /// Receiver transmits at the same time (`χ = 1`).
    pub rx_full_duplex: bool,
}

/// Concurrent transmitters `Φ` and the links they serve.
#[derive(Debug, Clone, Default)]
pub struct ActiveLinkSet {
    transmitters: Vec<Transmitter>,
    index: HashMap<NodeId, usize>,
    links: Vec<Link>,
}

impl ActiveLinkSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `id` to `Φ`; re-adding the same node is a no-op.
    pub fn add_transmitter(&mut self, id: NodeId, pos: Point) {
        if !self.index.contains_key(&id) {
            self.index.insert(id, self.transmitters.len());
            self.transmitters.push(Transmitter { id, pos });
        }
    }

    pub fn add_link(
        &mut self,
        tx: NodeId,
        rx: NodeId,
        rx_pos: Point,
        rx_full_duplex: bool,
    ) -> Result<usize> {
        if !self.index.contains_key(&tx) {
            return Err(Error::invalid(format!(
                "link source {tx} is not an active transmitter"
            )));
        }
        self.links.push(Link {
            tx,
            rx,
            rx_pos,
            rx_full_duplex,
        });
        Ok(self.links.len() - 1)
    }

    /// Same transmitters, no links.
    pub fn without_links(&self) -> Self {
        Self {
            transmitters: self.transmitters.clone(),
            index: self.index.clone(),
            links: Vec::new(),
        }
    }

    pub fn transmitters(&self) -> &[Transmitter] {
        &self.transmitters
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn transmitter(&self, id: NodeId) -> Option<&Transmitter> {
        self.index.get(&id).map(|&i| &self.transmitters[i])
    }

    pub fn is_transmitting(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }
}

/// Small-scale fading coefficient and shadowing factor of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFading {
    pub h: f64,
    pub g: f64,
}

impl PairFading {
    pub const UNIT: PairFading = PairFading { h: 1.0, g: 1.0 };
}

/// One joint realisation of all pair coefficients.
pub trait FadingDraw {
    fn pair(&self, tx: NodeId, rx: NodeId) -> PairFading;
}

impl<F: Fn(NodeId, NodeId) -> PairFading> FadingDraw for F {
    fn pair(&self, tx: NodeId, rx: NodeId) -> PairFading {
        self(tx, rx)
    }
}

/// `h = g = 1` everywhere.
#[derive(Debug, Clone, Copy)]
pub struct UnitFading;

impl FadingDraw for UnitFading {
    fn pair(&self, _tx: NodeId, _rx: NodeId) -> PairFading {
        PairFading::UNIT
    }
}

fn received_w(
    env: &ChannelEnv,
    from: &Point,
    to: &Point,
    fade: PairFading,
    tx: NodeId,
    rx: NodeId,
) -> Result<f64> {
    let d = from.distance_km(to);
    if d <= 0.0 {
        return Err(Error::DegenerateGeometry { tx, rx });
    }
    Ok(env.pt_w * fade.h * fade.g * path_gain(d, env.alpha))
}

/// SINR of `links.links()[link]` under one fading realisation.
pub fn sinr(
    links: &ActiveLinkSet,
    link: usize,
    env: &ChannelEnv,
    draw: &dyn FadingDraw,
) -> Result<f64> {
    let l = links
        .links()
        .get(link)
        .ok_or_else(|| Error::invalid(format!("no link {link}")))?;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for t in links.transmitters() {
        if t.id == l.rx {
            continue;
        }
        let p = received_w(env, &t.pos, &l.rx_pos, draw.pair(t.id, l.rx), t.id, l.rx)?;
        if t.id == l.tx {
            signal = p;
        } else {
            interference += p;
        }
    }
    let si = if l.rx_full_duplex {
        env.self_interference_w()
    } else {
        0.0
    };
    Ok(signal / (env.noise_w + interference + si))
}

/// Independent per-pair fading streams keyed by `(tx, rx)`.
///
/// The same pair always sees the same sequence for a given seed, whichever
/// other links are active, so two link sets evaluated with the same seed
/// share common random numbers.
#[derive(Debug, Clone, Copy)]
pub struct PairStreams {
    seed: u64,
}

impl PairStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn rng(&self, tx: NodeId, rx: NodeId) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((tx as u64) << 32) | rx as u64);
        rng
    }

    /// Fills `out` with the first `out.len()` draws of the pair.
    pub fn fill(&self, tx: NodeId, rx: NodeId, env: &ChannelEnv, out: &mut [PairFading]) {
        let mut rng = self.rng(tx, rx);
        let s = env.shadow_sigma_db * std::f64::consts::LN_10 / 10.0;
        for slot in out.iter_mut() {
            let h = match env.fading {
                Fading::Rayleigh => rng.sample(Exp1),
                Fading::Deterministic => 1.0,
            };
            let g = if s > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                (s * z - 0.5 * s * s).exp()
            } else {
                1.0
            };
            *slot = PairFading { h, g };
        }
    }
}

/// Ergodic capacity estimate in bits/s with its Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub bits_per_s: f64,
    pub stderr: f64,
}

/// `W · E[log2(1 + SINR)]` for every link of the set, averaged over
/// `n_samples` joint fading and shadowing draws with positions fixed.
pub fn ergodic_capacities(
    links: &ActiveLinkSet,
    env: &ChannelEnv,
    n_samples: usize,
    streams: &PairStreams,
) -> Result<Vec<CapacityEstimate>> {
    Ok(paired_capacities(links, env, n_samples, streams)?
        .into_iter()
        .map(|[c, _]| c)
        .collect())
}

/// Like [`ergodic_capacities`], but each entry also carries the capacity of
/// the same link with its receiver's self-interference removed, evaluated on
/// the same draws.
pub fn paired_capacities(
    links: &ActiveLinkSet,
    env: &ChannelEnv,
    n_samples: usize,
    streams: &PairStreams,
) -> Result<Vec<[CapacityEstimate; 2]>> {
    if n_samples == 0 {
        return Err(Error::invalid("at least one fading sample is required"));
    }
    let mut draws = vec![PairFading::UNIT; n_samples];
    let mut signal = vec![0.0; n_samples];
    let mut interference = vec![0.0; n_samples];
    links
        .links()
        .iter()
        .map(|l| {
            signal.fill(0.0);
            interference.fill(0.0);
            for t in links.transmitters() {
                if t.id == l.rx {
                    continue;
                }
                let d = t.pos.distance_km(&l.rx_pos);
                if d <= 0.0 {
                    return Err(Error::DegenerateGeometry { tx: t.id, rx: l.rx });
                }
                let gain = path_gain(d, env.alpha);
                streams.fill(t.id, l.rx, env, &mut draws);
                let acc = if t.id == l.tx {
                    &mut signal
                } else {
                    &mut interference
                };
                for (a, f) in acc.iter_mut().zip(&draws) {
                    *a += env.pt_w * f.h * f.g * gain;
                }
            }
            let rate = |si: f64| {
                let rates = signal
                    .iter()
                    .zip(&interference)
                    .map(|(s, i)| (1.0 + s / (env.noise_w + i + si)).log2());
                summarize(rates, n_samples, env.bandwidth_hz)
            };
            let clean = rate(0.0);
            let configured = if l.rx_full_duplex {
                rate(env.self_interference_w())
            } else {
                clean
            };
            Ok([configured, clean])
        })
        .collect()
}

fn summarize(rates: impl Iterator<Item = f64>, n: usize, bandwidth: f64) -> CapacityEstimate {
    // Welford
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, r) in rates.enumerate() {
        let delta = r - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (r - mean);
    }
    let stderr = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    CapacityEstimate {
        bits_per_s: bandwidth * mean,
        stderr: bandwidth * stderr,
    }
}

/// Ergodic capacity of a single link of the set.
pub fn ergodic_capacity(
    links: &ActiveLinkSet,
    link: usize,
    env: &ChannelEnv,
    n_samples: usize,
    streams: &PairStreams,
) -> Result<CapacityEstimate> {
    let l = *links
        .links()
        .get(link)
        .ok_or_else(|| Error::invalid(format!("no link {link}")))?;
    let mut single = ActiveLinkSet::new();
    for t in links.transmitters() {
        single.add_transmitter(t.id, t.pos);
    }
    single.add_link(l.tx, l.rx, l.rx_pos, l.rx_full_duplex)?;
    Ok(ergodic_capacities(&single, env, n_samples, streams)?[0])
}
