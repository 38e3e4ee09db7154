//! Cell geometry, uniform user drops and the square cluster grid.
//!
//! The cell is an axis-aligned square of area `2a²` (side `a·√2`), so a
//! cluster of side `l` covers exactly `l²/(2a²)` of it. The cluster grid is
//! anchored at the lower-left corner; when the side is not a multiple of `l`
//! the last row and column are truncated rectangles.

use rand::Rng;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Position in kilometres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_km(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Side of the square cell of area `2a²`.
pub fn cell_side_km(a_km: f64) -> f64 {
    a_km * std::f64::consts::SQRT_2
}

/// Cluster-to-cell area ratio `l²/(2a²)`.
pub fn cluster_ratio(l_km: f64, a_km: f64) -> f64 {
    l_km * l_km / (2.0 * a_km * a_km)
}

#[derive(Debug, Clone)]
pub struct CellDeployment {
    a_km: f64,
    positions: Vec<Point>,
}

impl CellDeployment {
    /// Deployment with explicit positions; every point must lie in the cell.
    pub fn from_positions(a_km: f64, positions: Vec<Point>) -> Result<Self> {
        if !(a_km > 0.0) {
            return Err(Error::invalid(format!(
                "cell size must be positive, got {a_km}"
            )));
        }
        let side = cell_side_km(a_km);
        if let Some(p) = positions
            .iter()
            .find(|p| !(0.0..=side).contains(&p.x) || !(0.0..=side).contains(&p.y))
        {
            return Err(Error::invalid(format!("position {p:?} outside the cell")));
        }
        Ok(Self { a_km, positions })
    }

    pub fn a_km(&self) -> f64 {
        self.a_km
    }

    pub fn side_km(&self) -> f64 {
        cell_side_km(self.a_km)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, user: usize) -> Point {
        self.positions[user]
    }
}

/// Drops `n` users i.i.d. uniformly over the cell.
pub fn place_users<R: Rng + ?Sized>(n: usize, a_km: f64, rng: &mut R) -> Result<CellDeployment> {
    if !(a_km > 0.0) || !a_km.is_finite() {
        return Err(Error::invalid(format!(
            "cell size must be positive, got {a_km}"
        )));
    }
    let side = cell_side_km(a_km);
    let positions = (0..n)
        .map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect();
    Ok(CellDeployment { a_km, positions })
}

/// Partition of the users into square clusters of side `l`.
#[derive(Debug, Clone)]
pub struct Clustering {
    l_km: f64,
    per_side: usize,
    cluster_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    full: Vec<bool>,
}

impl Clustering {
    pub fn l_km(&self) -> f64 {
        self.l_km
    }

    /// Clusters along one side of the cell.
    pub fn per_side(&self) -> usize {
        self.per_side
    }

    pub fn num_clusters(&self) -> usize {
        self.members.len()
    }

    pub fn cluster_of(&self, user: usize) -> usize {
        self.cluster_of[user]
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.members[cluster]
    }

    /// `true` when the cluster is a whole `l x l` square rather than a
    /// truncated edge rectangle.
    pub fn is_full(&self, cluster: usize) -> bool {
        self.full[cluster]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.members.iter().map(Vec::as_slice).enumerate()
    }
}

/// Assigns every user to the grid square containing it.
pub fn assign_clusters(deployment: &CellDeployment, l_km: f64) -> Result<Clustering> {
    let side = deployment.side_km();
    if !(l_km > 0.0) || !l_km.is_finite() {
        return Err(Error::invalid(format!(
            "cluster side must be positive, got {l_km}"
        )));
    }
    if l_km > side * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "cluster side {l_km} km exceeds the cell side {side} km"
        )));
    }
    let cells = side / l_km;
    let per_side = if (cells - cells.round()).abs() < 1e-9 {
        cells.round() as usize
    } else {
        cells.ceil() as usize
    }
    .max(1);
    let index = |coord: f64| ((coord / l_km).floor() as usize).min(per_side - 1);

    let total = per_side * per_side;
    let mut members = vec![Vec::new(); total];
    let cluster_of = deployment
        .positions()
        .iter()
        .enumerate()
        .map(|(user, p)| {
            let c = index(p.y) * per_side + index(p.x);
            members[c].push(user);
            c
        })
        .collect();
    let full_span = |i: usize| (i + 1) as f64 * l_km <= side * (1.0 + 1e-9);
    let full = (0..total)
        .map(|c| full_span(c / per_side) && full_span(c % per_side))
        .collect();
    Ok(Clustering {
        l_km,
        per_side,
        cluster_of,
        members,
        full,
    })
}

/// Binomial pmf over `k = 0..=n` with success probability `p`.
pub(crate) fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        return v;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n as u64)
        .map(|k| (ln_binomial(n as u64, k) + k as f64 * lp + (n as u64 - k) as f64 * lq).exp())
        .collect()
}

/// Probability that exactly `k` of `n` uniform users fall in a given full
/// cluster, for `k = 0..=n`.
pub fn occupancy_pmf(n: usize, l_km: f64, a_km: f64) -> Result<Vec<f64>> {
    if !(l_km > 0.0) || !(a_km > 0.0) {
        return Err(Error::invalid("cluster and cell sizes must be positive"));
    }
    let ratio = cluster_ratio(l_km, a_km);
    if ratio > 1.0 + 1e-12 {
        return Err(Error::invalid(format!(
            "cluster-to-cell area ratio {ratio} exceeds 1"
        )));
    }
    Ok(binomial_pmf(n, ratio.min(1.0)))
}
