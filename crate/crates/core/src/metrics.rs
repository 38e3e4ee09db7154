//! Per-node throughput, cluster sum throughput and download times.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Duplex {
    Hd,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeThroughput {
    pub mode: Duplex,
    pub collab_prob: f64,
    /// bits/s
    pub capacity: f64,
    /// bits/s
    pub throughput: f64,
}

impl NodeThroughput {
    pub fn new(mode: Duplex, collab_prob: f64, capacity: f64) -> Self {
        Self {
            mode,
            collab_prob,
            capacity,
            throughput: node_throughput(collab_prob, capacity),
        }
    }
}

/// Capacity delivered by an established node.
///
/// HD: the sum of its out-link capacities. FD: additionally the capacity of
/// the link it receives on. All inputs in bits/s.
pub fn node_capacity(mode: Duplex, in_link: Option<f64>, out_links: &[f64]) -> Result<f64> {
    let out: f64 = out_links.iter().sum();
    match (mode, in_link) {
        (Duplex::Hd, None) => Ok(out),
        (Duplex::Hd, Some(_)) => Err(Error::invalid("an HD node has no concurrent in-link")),
        (Duplex::Fd, _) if out_links.is_empty() => {
            Err(Error::invalid("an FD node must serve at least one user"))
        }
        (Duplex::Fd, None) => Err(Error::invalid("an FD node must receive on an in-link")),
        (Duplex::Fd, Some(c)) => Ok(c + out),
    }
}

/// `T = P · C`; `prob` must lie in `[0, 1]`.
pub fn node_throughput(prob: f64, capacity: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&prob), "probability {prob}");
    prob * capacity
}

/// Sum throughput of the established nodes of one cluster.
pub fn cluster_sum_throughput(nodes: &[NodeThroughput]) -> f64 {
    nodes.iter().map(|n| n.throughput).sum()
}

/// `θ = b / C`; infinite when the link has no capacity.
pub fn transfer_time(bits: f64, capacity_bps: f64) -> f64 {
    if capacity_bps > 0.0 {
        bits / capacity_bps
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeliveryTag {
    /// Receives from one node while serving others.
    Tnfd,
    /// Exchanges files with its server.
    Bfd,
    /// Serves without receiving; both duplex modes take `ϖ`.
    HdOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownloadReport {
    pub tag: DeliveryTag,
    pub theta_in: Option<f64>,
    pub served: Vec<f64>,
    /// Longest transfer among the served users.
    pub varpi: f64,
    pub d_hd: f64,
    pub d_fd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DownloadOutcome {
    Finite(DownloadReport),
    /// Some involved link had zero capacity.
    Outage,
}

impl DownloadOutcome {
    pub fn report(&self) -> Option<&DownloadReport> {
        match self {
            DownloadOutcome::Finite(r) => Some(r),
            DownloadOutcome::Outage => None,
        }
    }
}

fn check_thetas(thetas: &[f64]) -> Result<bool> {
    let mut finite = true;
    for &t in thetas {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::invalid(format!(
                "transfer times must be positive, got {t}"
            )));
        }
        finite &= t.is_finite();
    }
    Ok(finite)
}

fn varpi_of(served: &[f64]) -> Result<f64> {
    if served.is_empty() {
        return Err(Error::invalid("served set must not be empty"));
    }
    Ok(served.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Three-node FD: the node receives in `theta_in` and serves `served`.
pub fn download_times_tnfd(theta_in: f64, served: &[f64]) -> Result<DownloadOutcome> {
    let varpi = varpi_of(served)?;
    if !(check_thetas(&[theta_in])? & check_thetas(served)?) {
        return Ok(DownloadOutcome::Outage);
    }
    Ok(DownloadOutcome::Finite(DownloadReport {
        tag: DeliveryTag::Tnfd,
        theta_in: Some(theta_in),
        served: served.to_vec(),
        varpi,
        d_hd: theta_in + varpi,
        d_fd: theta_in.max(varpi),
    }))
}

/// Bidirectional FD: two nodes exchange files.
pub fn download_times_bfd(theta_ji: f64, theta_ij: f64) -> Result<DownloadOutcome> {
    if !check_thetas(&[theta_ji, theta_ij])? {
        return Ok(DownloadOutcome::Outage);
    }
    Ok(DownloadOutcome::Finite(DownloadReport {
        tag: DeliveryTag::Bfd,
        theta_in: Some(theta_ij),
        served: vec![theta_ji],
        varpi: theta_ji,
        d_hd: theta_ji + theta_ij,
        d_fd: theta_ji.max(theta_ij),
    }))
}

/// A transmitter that does not receive: one multicast, `D = ϖ` either way.
pub fn download_times_hd(served: &[f64]) -> Result<DownloadOutcome> {
    let varpi = varpi_of(served)?;
    if !check_thetas(served)? {
        return Ok(DownloadOutcome::Outage);
    }
    Ok(DownloadOutcome::Finite(DownloadReport {
        tag: DeliveryTag::HdOnly,
        theta_in: None,
        served: served.to_vec(),
        varpi,
        d_hd: varpi,
        d_fd: varpi,
    }))
}
