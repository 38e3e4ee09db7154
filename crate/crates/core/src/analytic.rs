//! Closed-form FD/HD/self collaboration probabilities.
//!
//! Given `k` users in a cluster, a user with cached mass `ρ_u` in a cluster
//! of mass `ρ_c` serves somebody with probability
//! `P_b = Σ_{x=1}^{k-1} C(k-1,x) ρ_u^x (1-ρ_u)^(k-1-x)`, finds its own file
//! at another cluster member with probability `ρ_c - ρ_u`, and
//!
//! ```text
//! P_FD   = Σ_k (ρ_c - ρ_u)       · P_b · Pr[K = k]
//! P_HD   = Σ_k (1 - (ρ_c - ρ_u)) · P_b · Pr[K = k]
//! P_self = 1 - P_FD - P_HD
//! ```
//!
//! `P_self` is the complement of "serves somebody", which is not the same
//! as the probability of a request hitting one's own cache.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::topology::binomial_pmf;

/// Occupancies with `Pr[K = k]` below this are skipped; their total mass
/// cannot move any probability by more than `n · 1e-18`.
const NEGLIGIBLE_OCCUPANCY: f64 = 1e-18;

const MASS_TOL: f64 = 1e-12;

/// Probability that the requested file sits in another member's cache.
pub fn p_find(rho_c: f64, rho_u: f64) -> Result<f64> {
    if !(0.0..=1.0 + MASS_TOL).contains(&rho_c) || !(rho_u >= 0.0) {
        return Err(Error::invalid(format!(
            "popularity masses must lie in [0, 1], got rho_c={rho_c}, rho_u={rho_u}"
        )));
    }
    if rho_u > rho_c + MASS_TOL {
        return Err(Error::invalid(format!(
            "user mass {rho_u} exceeds cluster mass {rho_c}"
        )));
    }
    Ok((rho_c - rho_u).clamp(0.0, 1.0))
}

/// Probability that exactly `x` of the other `k - 1` members request a file
/// cached by the user; zero when `k < 2`.
pub fn q_serve(x: usize, k: usize, rho_u: f64) -> Result<f64> {
    if !(0.0..=1.0 + MASS_TOL).contains(&rho_u) {
        return Err(Error::invalid(format!("user mass {rho_u} outside [0, 1]")));
    }
    if k < 2 {
        return Ok(0.0);
    }
    let trials = k - 1;
    if x > trials {
        return Err(Error::invalid(format!(
            "cannot serve {x} of {trials} other users"
        )));
    }
    Ok(binomial_term(trials, x, rho_u.min(1.0)))
}

fn binomial_term(trials: usize, x: usize, p: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if x == trials { 1.0 } else { 0.0 };
    }
    let (t, x) = (trials as u64, x as u64);
    (ln_binomial(t, x) + x as f64 * p.ln() + (t - x) as f64 * (-p).ln_1p()).exp()
}

/// Probability that the user serves at least one other member.
pub fn p_serve(k: usize, rho_u: f64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let p = rho_u.clamp(0.0, 1.0);
    (1..k).map(|x| binomial_term(k - 1, x, p)).sum()
}

/// One user's masses, weighted by how often that configuration occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoPoint {
    pub weight: f64,
    pub rho_c: f64,
    pub rho_u: f64,
}

/// Cached popularity masses as a function of the cluster occupancy `k`.
///
/// `members(k)` returns the distribution of a uniformly chosen member's
/// `(ρ_c, ρ_u)`; weights sum to one. Only called with `k >= 2`.
pub trait RhoProfile {
    fn members(&self, k: usize) -> Result<Vec<RhoPoint>>;
}

/// The same masses for every occupancy.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRho {
    pub rho_c: f64,
    pub rho_u: f64,
}

impl RhoProfile for ConstantRho {
    fn members(&self, _k: usize) -> Result<Vec<RhoPoint>> {
        Ok(vec![RhoPoint {
            weight: 1.0,
            rho_c: self.rho_c,
            rho_u: self.rho_u,
        }])
    }
}

/// Masses induced by caching the `k·h` most popular files, `h` per user,
/// with a uniformly random file-to-user assignment.
///
/// Exact for `h = 1` (a member holds rank `s` with probability `1/k`). For
/// `h > 1` the random subset is averaged over a fixed-seed sample of
/// assignments, so results are deterministic.
#[derive(Debug, Clone)]
pub struct TopPopularProfile<'a> {
    pmf: &'a [f64],
    h: usize,
    assignments: usize,
}

impl<'a> TopPopularProfile<'a> {
    pub fn new(pmf: &'a [f64], h: usize) -> Self {
        Self {
            pmf,
            h,
            assignments: 512,
        }
    }

    /// Member configurations sampled per occupancy when `h > 1`.
    pub fn with_assignments(mut self, assignments: usize) -> Self {
        self.assignments = assignments.max(1);
        self
    }
}

impl RhoProfile for TopPopularProfile<'_> {
    fn members(&self, k: usize) -> Result<Vec<RhoPoint>> {
        let files = k * self.h;
        if self.h == 0 || files > self.pmf.len() {
            return Err(Error::invalid(format!(
                "{k} users x {} files do not fit a library of {}",
                self.h,
                self.pmf.len()
            )));
        }
        let rho_c: f64 = self.pmf[..files].iter().sum();
        if self.h == 1 {
            let w = 1.0 / k as f64;
            return Ok(self.pmf[..k]
                .iter()
                .map(|&rho_u| RhoPoint {
                    weight: w,
                    rho_c,
                    rho_u,
                })
                .collect());
        }
        let rounds = self.assignments.div_ceil(k);
        let w = 1.0 / (rounds * k) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ k as u64);
        let mut order: Vec<usize> = (0..files).collect();
        let mut points = Vec::with_capacity(rounds * k);
        for _ in 0..rounds {
            order.shuffle(&mut rng);
            points.extend(order.chunks(self.h).map(|chunk| RhoPoint {
                weight: w,
                rho_c,
                rho_u: chunk.iter().map(|&f| self.pmf[f]).sum(),
            }));
        }
        Ok(points)
    }
}

/// Mode probabilities of a cluster member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollabProbs {
    pub fd: f64,
    pub hd: f64,
    pub self_: f64,
}

/// Conditional FD/HD probabilities given occupancy `k`, averaged over the
/// profile's member configurations.
pub fn conditional_probs(k: usize, profile: &dyn RhoProfile) -> Result<(f64, f64)> {
    if k < 2 {
        return Ok((0.0, 0.0));
    }
    let mut fd = 0.0;
    let mut hd = 0.0;
    for point in profile.members(k)? {
        let find = p_find(point.rho_c, point.rho_u)?;
        let serve = p_serve(k, point.rho_u);
        fd += point.weight * find * serve;
        hd += point.weight * (1.0 - find) * serve;
    }
    Ok((fd, hd))
}

/// FD, HD and self probabilities for `n` users and cluster ratio `l²/(2a²)`.
pub fn collaboration_probs(
    n: usize,
    cluster_ratio: f64,
    profile: &dyn RhoProfile,
) -> Result<CollabProbs> {
    if !(cluster_ratio > 0.0 && cluster_ratio <= 1.0 + MASS_TOL) {
        return Err(Error::invalid(format!(
            "cluster ratio must lie in (0, 1], got {cluster_ratio}"
        )));
    }
    let occupancy = binomial_pmf(n, cluster_ratio.min(1.0));
    let mut fd = 0.0;
    let mut hd = 0.0;
    for (k, &pk) in occupancy.iter().enumerate().skip(2) {
        if pk < NEGLIGIBLE_OCCUPANCY {
            continue;
        }
        let (f, h) = conditional_probs(k, profile)?;
        fd += f * pk;
        hd += h * pk;
    }
    Ok(CollabProbs {
        fd,
        hd,
        self_: 1.0 - fd - hd,
    })
}

pub fn p_hd(n: usize, cluster_ratio: f64, profile: &dyn RhoProfile) -> Result<f64> {
    collaboration_probs(n, cluster_ratio, profile).map(|p| p.hd)
}

pub fn p_fd(n: usize, cluster_ratio: f64, profile: &dyn RhoProfile) -> Result<f64> {
    collaboration_probs(n, cluster_ratio, profile).map(|p| p.fd)
}

pub fn p_self(n: usize, cluster_ratio: f64, profile: &dyn RhoProfile) -> Result<f64> {
    collaboration_probs(n, cluster_ratio, profile).map(|p| p.self_)
}
