//! Per-cluster request graphs, collaboration modes and node establishment.
//!
//! An edge `src -> dst` means `dst` requested a file cached by `src`, both
//! users sit in the same cluster and are closer than the threshold `l`.
//! Every user makes one request, so in-degree is at most one.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::placement::CacheAssignment;
use crate::popularity::FileId;
use crate::topology::{CellDeployment, Clustering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub cluster: usize,
    pub src: usize,
    pub dst: usize,
    pub file: FileId,
}

/// Collaboration mode of one user.
///
/// Transmit/receive role takes precedence over self-request: a user that
/// finds its file in its own cache but serves others is `HdTx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Request found in own cache, serves nobody.
    SelfRequest,
    /// Serves at least one request, receives nothing in-cluster.
    HdTx,
    /// Serves and receives, and its server is one of the users it serves.
    FdBfd,
    /// Serves and receives from a node it does not serve.
    FdTnfd,
    /// Receives only.
    RxOnly,
    /// Neither serves nor receives; falls back to the cellular link.
    Idle,
}

impl Mode {
    pub fn is_full_duplex(self) -> bool {
        matches!(self, Mode::FdBfd | Mode::FdTnfd)
    }

    pub fn transmits(self) -> bool {
        matches!(self, Mode::HdTx | Mode::FdBfd | Mode::FdTnfd)
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::SelfRequest => "SELF",
            Mode::HdTx => "HD-TX",
            Mode::FdBfd => "FD-BFD",
            Mode::FdTnfd => "FD-TNFD",
            Mode::RxOnly => "RX-ONLY",
            Mode::Idle => "IDLE",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RequestGraph {
    edges: Vec<Edge>,
    incoming: Vec<Option<usize>>,
    outgoing: Vec<Vec<usize>>,
    requests: Vec<FileId>,
    self_request: Vec<bool>,
    clusters: Vec<Vec<usize>>,
}

impl RequestGraph {
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_users(&self) -> usize {
        self.requests.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.clusters[cluster]
    }

    pub fn request(&self, user: usize) -> FileId {
        self.requests[user]
    }

    pub fn is_self_request(&self, user: usize) -> bool {
        self.self_request[user]
    }

    pub fn incoming(&self, user: usize) -> Option<&Edge> {
        self.incoming[user].map(|e| &self.edges[e])
    }

    pub fn outgoing(&self, user: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[user].iter().map(move |&e| &self.edges[e])
    }

    pub fn out_degree(&self, user: usize) -> usize {
        self.outgoing[user].len()
    }

    /// Edge list as `cluster_id src dst file_id` rows; file ids are 1-based
    /// popularity ranks.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {} {}", e.cluster, e.src, e.dst, e.file.rank())?;
        }
        Ok(())
    }
}

/// Builds the request graph of every cluster.
pub fn build_request_graph(
    deployment: &CellDeployment,
    clustering: &Clustering,
    caches: &CacheAssignment,
    requests: &[FileId],
) -> Result<RequestGraph> {
    let n = deployment.len();
    if requests.len() != n {
        return Err(Error::invalid(format!(
            "{} requests for {n} users",
            requests.len()
        )));
    }
    let l = clustering.l_km();
    let mut edges = Vec::new();
    let mut incoming = vec![None; n];
    let mut outgoing = vec![Vec::new(); n];
    let mut self_request = vec![false; n];

    for (cluster, members) in clustering.iter() {
        for &dst in members {
            let file = requests[dst];
            if caches.holds(dst, file) {
                self_request[dst] = true;
                continue;
            }
            let Some(src) = caches.owner(cluster, file) else {
                continue;
            };
            if deployment
                .position(src)
                .distance_km(&deployment.position(dst))
                < l
            {
                let id = edges.len();
                edges.push(Edge {
                    cluster,
                    src,
                    dst,
                    file,
                });
                incoming[dst] = Some(id);
                outgoing[src].push(id);
            }
        }
    }
    Ok(RequestGraph {
        edges,
        incoming,
        outgoing,
        requests: requests.to_vec(),
        self_request,
        clusters: clustering.iter().map(|(_, m)| m.to_vec()).collect(),
    })
}

fn mode_of(graph: &RequestGraph, user: usize) -> Mode {
    let serves = graph.out_degree(user) > 0;
    match (serves, graph.incoming(user)) {
        (true, Some(in_edge)) => {
            if graph.outgoing(user).any(|e| e.dst == in_edge.src) {
                Mode::FdBfd
            } else {
                Mode::FdTnfd
            }
        }
        (true, None) => Mode::HdTx,
        (false, Some(_)) => Mode::RxOnly,
        (false, None) if graph.is_self_request(user) => Mode::SelfRequest,
        (false, None) => Mode::Idle,
    }
}

/// Tags every user with exactly one mode.
pub fn classify_modes(graph: &RequestGraph) -> Vec<Mode> {
    (0..graph.num_users()).map(|u| mode_of(graph, u)).collect()
}

/// Transmitters selected by the base station.
#[derive(Debug, Clone)]
pub struct Establishment {
    per_cluster: Vec<Vec<usize>>,
    established: Vec<bool>,
}

impl Establishment {
    pub fn cluster(&self, cluster: usize) -> &[usize] {
        &self.per_cluster[cluster]
    }

    pub fn is_established(&self, user: usize) -> bool {
        self.established[user]
    }

    /// All established users, cluster by cluster.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.per_cluster
            .iter()
            .enumerate()
            .flat_map(|(c, users)| users.iter().map(move |&u| (c, u)))
    }
}

/// Picks up to `tau` transmit candidates per cluster, largest cached
/// popularity first (ties to the lower user id).
pub fn establish_nodes(
    graph: &RequestGraph,
    caches: &CacheAssignment,
    tau: usize,
) -> Result<Establishment> {
    if tau == 0 {
        return Err(Error::invalid(
            "at least one node per cluster must be established",
        ));
    }
    let mut established = vec![false; graph.num_users()];
    let per_cluster = (0..graph.num_clusters())
        .map(|c| {
            let mut candidates: Vec<usize> = graph
                .members(c)
                .iter()
                .copied()
                .filter(|&u| graph.out_degree(u) > 0)
                .collect();
            candidates.sort_by(|&a, &b| {
                caches
                    .rho_user(b)
                    .total_cmp(&caches.rho_user(a))
                    .then(a.cmp(&b))
            });
            candidates.truncate(tau);
            for &u in &candidates {
                established[u] = true;
            }
            candidates
        })
        .collect();
    Ok(Establishment {
        per_cluster,
        established,
    })
}
