//! One Monte-Carlo drop: users, clusters, caches, requests, graph,
//! establishment, link capacities, throughput and download times.

use std::collections::HashMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::CollabProbs;
use crate::channel::{
    ergodic_capacity, paired_capacities, ActiveLinkSet, ChannelEnv, NodeId, PairStreams,
};
use crate::error::Result;
use crate::graph::{build_request_graph, classify_modes, establish_nodes, Mode};
use crate::harness::config::ScenarioConfig;
use crate::metrics::{
    cluster_sum_throughput, download_times_bfd, download_times_hd, download_times_tnfd,
    node_capacity, transfer_time, DownloadOutcome, Duplex, NodeThroughput,
};
use crate::placement::place_caches;
use crate::popularity::{ContentLibrary, FileId};
use crate::topology::{assign_clusters, place_users};

const STAGE_USERS: u64 = 0;
const STAGE_CACHES: u64 = 1;
const STAGE_REQUESTS: u64 = 2;
const STAGE_FADING: u64 = 3;
const LIBRARY_STREAM: u64 = u64::MAX;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of drop `drop` at sweep point `point`: word `2·drop` of the ChaCha
/// stream `point` keyed by the master seed. Independent of worker layout.
pub fn drop_seed(master: u64, point: usize, drop: usize) -> u64 {
    let mut rng = stream_rng(master, point as u64);
    rng.set_word_pos(2 * drop as u128);
    rng.next_u64()
}

/// Library built from the master seed; file sizes are shared by all sweep
/// points with the same `m`.
pub fn build_library(cfg: &ScenarioConfig) -> Result<ContentLibrary> {
    let mut rng = stream_rng(cfg.seed()?, LIBRARY_STREAM);
    ContentLibrary::new(
        cfg.m,
        cfg.gamma_r,
        cfg.file_min_mb,
        cfg.file_max_mb,
        &mut rng,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stages {
    /// Stop after mode classification.
    Graph,
    /// Also establish nodes and evaluate the channel.
    Full,
}

/// Everything a drop needs that does not change between drops.
#[derive(Debug, Clone)]
pub struct DropContext {
    pub cfg: ScenarioConfig,
    pub library: ContentLibrary,
    pub env: ChannelEnv,
    pub stages: Stages,
}

impl DropContext {
    pub fn new(cfg: &ScenarioConfig, stages: Stages) -> Result<Self> {
        cfg.validate_point()?;
        Ok(Self {
            library: build_library(cfg)?,
            env: cfg.channel_env()?,
            cfg: cfg.clone(),
            stages,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterOutcome {
    pub full: bool,
    pub members: usize,
    pub fd: usize,
    pub hd: usize,
    pub sum_rate_fd: f64,
    pub sum_rate_hd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub cluster: usize,
    pub user: usize,
    pub mode: Mode,
    /// FD-capable system with the same establishment.
    pub fd: NodeThroughput,
    /// HD baseline: in-links delivered in a separate time share.
    pub hd: NodeThroughput,
    pub download: DownloadOutcome,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DropRecord {
    pub clusters: Vec<ClusterOutcome>,
    pub nodes: Vec<NodeRecord>,
}

impl DropRecord {
    /// Mode frequencies averaged over full clusters: each contributes the
    /// fraction of its members in each mode, an empty cluster counts as
    /// `self`. `None` when the drop has no full cluster.
    pub fn collab_frequencies(&self) -> Option<CollabProbs> {
        let (mut fd, mut hd, mut count) = (0.0, 0.0, 0usize);
        for c in self.clusters.iter().filter(|c| c.full) {
            count += 1;
            if c.members > 0 {
                fd += c.fd as f64 / c.members as f64;
                hd += c.hd as f64 / c.members as f64;
            }
        }
        (count > 0).then(|| {
            let (fd, hd) = (fd / count as f64, hd / count as f64);
            CollabProbs {
                fd,
                hd,
                self_: 1.0 - fd - hd,
            }
        })
    }

    /// Cell sum throughput divided by the number of clusters, bits/s.
    pub fn mean_cluster_rate(&self, duplex: Duplex) -> f64 {
        if self.clusters.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .clusters
            .iter()
            .map(|c| match duplex {
                Duplex::Fd => c.sum_rate_fd,
                Duplex::Hd => c.sum_rate_hd,
            })
            .sum();
        total / self.clusters.len() as f64
    }
}

/// Runs one drop under `seed`.
pub fn run_drop(ctx: &DropContext, seed: u64) -> Result<DropRecord> {
    let cfg = &ctx.cfg;
    let deployment = place_users(cfg.n, cfg.a_km, &mut stream_rng(seed, STAGE_USERS))?;
    let clustering = assign_clusters(&deployment, cfg.l_km)?;
    let caches = place_caches(
        &clustering,
        &ctx.library,
        cfg.h,
        &mut stream_rng(seed, STAGE_CACHES),
    )?;
    let mut req_rng = stream_rng(seed, STAGE_REQUESTS);
    let requests: Vec<FileId> = (0..cfg.n)
        .map(|_| ctx.library.sample_request(&mut req_rng))
        .collect();
    let graph = build_request_graph(&deployment, &clustering, &caches, &requests)?;
    let modes = classify_modes(&graph);

    let mut clusters: Vec<ClusterOutcome> = clustering
        .iter()
        .map(|(id, members)| ClusterOutcome {
            full: clustering.is_full(id),
            members: members.len(),
            fd: members
                .iter()
                .filter(|&&u| modes[u].is_full_duplex())
                .count(),
            hd: members.iter().filter(|&&u| modes[u] == Mode::HdTx).count(),
            ..ClusterOutcome::default()
        })
        .collect();
    if ctx.stages == Stages::Graph {
        return Ok(DropRecord {
            clusters,
            nodes: Vec::new(),
        });
    }

    let est = establish_nodes(&graph, &caches, cfg.tau)?;
    let pos = |u: usize| deployment.position(u);
    // Both systems share Φ = Ψ; the HD baseline differs only in having no
    // receiver-side SI, so one link set carries both.
    let mut fd_set = ActiveLinkSet::new();
    for (_, u) in est.iter() {
        fd_set.add_transmitter(u as NodeId, pos(u));
    }
    let mut fd_link = HashMap::new();
    for (_, u) in est.iter() {
        let server = modes[u]
            .is_full_duplex()
            .then(|| graph.incoming(u).expect("FD node has an in-link").src);
        for e in graph.outgoing(u) {
            let rx = e.dst as NodeId;
            // a BFD partner is sending its in-link, so it hears its own SI
            let chi = fd_set.is_transmitting(rx) || server == Some(e.dst);
            fd_link.insert(
                (e.src, e.dst),
                fd_set.add_link(u as NodeId, rx, pos(e.dst), chi)?,
            );
        }
    }
    let fading = PairStreams::new(stream_rng(seed, STAGE_FADING).next_u64());
    let paired = paired_capacities(&fd_set, &ctx.env, cfg.fading_samples, &fading)?;
    let cap_fd: Vec<_> = paired.iter().map(|[fd, _]| *fd).collect();
    let cap_hd: Vec<_> = paired.iter().map(|[_, hd]| *hd).collect();

    // An in-link from a server outside Ψ is rated under Ψ's interference and
    // the receiver's own SI; that server is not an interferer for other links.
    let mut in_cap: HashMap<usize, f64> = HashMap::new();
    for (_, u) in est.iter() {
        if !modes[u].is_full_duplex() {
            continue;
        }
        let src = graph.incoming(u).expect("FD node has an in-link").src;
        let c = if est.is_established(src) {
            cap_fd[fd_link[&(src, u)]].bits_per_s
        } else {
            let mut set = fd_set.without_links();
            set.add_transmitter(src as NodeId, pos(src));
            let id = set.add_link(src as NodeId, u as NodeId, pos(u), true)?;
            ergodic_capacity(&set, id, &ctx.env, cfg.fading_samples, &fading)?.bits_per_s
        };
        in_cap.insert(u, c);
    }

    let mut nodes = Vec::new();
    for (cluster, u) in est.iter() {
        let mode = modes[u];
        let outs: Vec<_> = graph.outgoing(u).map(|e| e.dst).collect();
        let outs_fd: Vec<f64> = outs
            .iter()
            .map(|&d| cap_fd[fd_link[&(u, d)]].bits_per_s)
            .collect();
        let outs_hd: Vec<f64> = outs
            .iter()
            .map(|&d| cap_hd[fd_link[&(u, d)]].bits_per_s)
            .collect();
        let served: Vec<f64> = outs
            .iter()
            .zip(&outs_fd)
            .map(|(&d, &c)| transfer_time(ctx.library.size_bits(graph.request(d)), c))
            .collect();

        let (duplex, c_in, download) = if mode.is_full_duplex() {
            let c_in = in_cap[&u];
            let theta_in = transfer_time(ctx.library.size_bits(graph.request(u)), c_in);
            let download = if mode == Mode::FdBfd && outs.len() == 1 {
                download_times_bfd(served[0], theta_in)?
            } else {
                download_times_tnfd(theta_in, &served)?
            };
            (Duplex::Fd, Some(c_in), download)
        } else {
            (Duplex::Hd, None, download_times_hd(&served)?)
        };
        // realised mode: probability weight one, drop averaging yields P·C
        let fd = NodeThroughput::new(duplex, 1.0, node_capacity(duplex, c_in, &outs_fd)?);
        let hd = NodeThroughput::new(Duplex::Hd, 1.0, node_capacity(Duplex::Hd, None, &outs_hd)?);
        nodes.push(NodeRecord {
            cluster,
            user: u,
            mode,
            fd,
            hd,
            download,
        });
    }
    for (id, outcome) in clusters.iter_mut().enumerate() {
        let fd: Vec<_> = nodes
            .iter()
            .filter(|n| n.cluster == id)
            .map(|n| n.fd)
            .collect();
        let hd: Vec<_> = nodes
            .iter()
            .filter(|n| n.cluster == id)
            .map(|n| n.hd)
            .collect();
        outcome.sum_rate_fd = cluster_sum_throughput(&fd);
        outcome.sum_rate_hd = cluster_sum_throughput(&hd);
    }
    Ok(DropRecord { clusters, nodes })
}
