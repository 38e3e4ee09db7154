//! Scenario catalog and the drop-parallel sweep runner.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::{ScenarioConfig, SweepVar};
use crate::harness::drop::{drop_seed, run_drop, DropContext, DropRecord, Stages};
use crate::harness::results::{Metric, ResultRow, ResultTable};
use crate::metrics::{DownloadOutcome, Duplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Collaboration probabilities versus cluster side.
    Fig2,
    /// Collaboration probabilities versus user count.
    Fig3,
    /// FD and HD average rate versus cluster side.
    Fig4,
    /// Average rate versus cluster side for one, two and three transmitters.
    Fig5,
    /// FD and HD download time versus cluster side.
    Fig6,
    /// Whatever the configuration says; reports every metric.
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Fig2,
        ScenarioKind::Fig3,
        ScenarioKind::Fig4,
        ScenarioKind::Fig5,
        ScenarioKind::Fig6,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Fig2 => "fig2",
            ScenarioKind::Fig3 => "fig3",
            ScenarioKind::Fig4 => "fig4",
            ScenarioKind::Fig5 => "fig5",
            ScenarioKind::Fig6 => "fig6",
            ScenarioKind::Custom => "custom",
        }
    }

    pub fn catalog() -> String {
        Self::ALL.map(Self::name).join(", ")
    }

    pub fn metrics(self) -> &'static [Metric] {
        match self {
            ScenarioKind::Fig2 | ScenarioKind::Fig3 => &[Metric::PFd, Metric::PHd, Metric::PSelf],
            ScenarioKind::Fig4 | ScenarioKind::Fig5 => &[Metric::AvgRateFd, Metric::AvgRateHd],
            ScenarioKind::Fig6 => &[
                Metric::AvgDownloadFd,
                Metric::AvgDownloadHd,
                Metric::OutageFrac,
            ],
            ScenarioKind::Custom => &Metric::ALL,
        }
    }

    /// Overwrites the preset parameters of this scenario.
    pub fn apply_preset(self, cfg: &mut ScenarioConfig) {
        let l_grid: Vec<f64> = (1..=10).map(|i| i as f64 / 20.0).collect();
        match self {
            ScenarioKind::Fig2 => {
                cfg.n = 500;
                cfg.h = 1;
                cfg.gamma_r = 1.0;
                cfg.sweep.var = SweepVar::L;
                cfg.sweep.values = l_grid;
            }
            ScenarioKind::Fig3 => {
                cfg.gamma_r = 1.6;
                cfg.h = 5;
                cfg.l_km = 0.2;
                cfg.sweep.var = SweepVar::N;
                cfg.sweep.values = [10.0, 50.0]
                    .into_iter()
                    .chain((1..=10).map(|i| 100.0 * i as f64))
                    .collect();
            }
            ScenarioKind::Fig4 | ScenarioKind::Fig6 => {
                cfg.n = 500;
                cfg.h = 1;
                cfg.tau = 1;
                cfg.gamma_r = 1.0;
                cfg.sweep.var = SweepVar::L;
                cfg.sweep.values = l_grid;
            }
            ScenarioKind::Fig5 => {
                cfg.n = 1000;
                cfg.h = 3;
                cfg.gamma_r = 1.0;
                cfg.sweep.var = SweepVar::L;
                cfg.sweep.values = l_grid;
            }
            ScenarioKind::Custom => {}
        }
    }

    /// Labelled curves to run. Fig5 adds one curve per transmitter budget.
    pub fn series(self, cfg: &ScenarioConfig) -> Vec<(String, ScenarioConfig)> {
        match self {
            ScenarioKind::Fig5 => (1..=3)
                .map(|tau| {
                    let mut c = cfg.clone();
                    c.tau = tau;
                    (format!("{}@tau={tau}", cfg.sweep.var), c)
                })
                .collect(),
            _ => vec![(cfg.sweep.var.to_string(), cfg.clone())],
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownScenario {
                name: s.to_string(),
                catalog: Self::catalog(),
            })
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Defaults, then the scenario preset, then the file, then `key=value`
/// overrides, then an explicit seed. Not validated.
pub fn layer_config(
    kind: ScenarioKind,
    file: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    kind.apply_preset(&mut cfg);
    if let Some(path) = file {
        cfg.apply_file(path)?;
    }
    for o in overrides {
        cfg.apply_override(o)?;
    }
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// [`layer_config`] followed by full validation, seed included.
pub fn configure(
    kind: ScenarioKind,
    file: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
) -> Result<ScenarioConfig> {
    let cfg = layer_config(kind, file, overrides, seed)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Standard error of the mean.
    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }

    fn value(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }
}

/// What one drop contributes to the table.
#[derive(Debug, Clone, Default)]
struct DropSummary {
    probs: Option<[f64; 3]>,
    rate_fd: f64,
    rate_hd: f64,
    downloads: Vec<(f64, f64)>,
    outages: usize,
    nodes: usize,
}

fn summarize(rec: &DropRecord) -> DropSummary {
    let mut s = DropSummary {
        probs: rec.collab_frequencies().map(|p| [p.fd, p.hd, p.self_]),
        rate_fd: rec.mean_cluster_rate(Duplex::Fd),
        rate_hd: rec.mean_cluster_rate(Duplex::Hd),
        nodes: rec.nodes.len(),
        ..DropSummary::default()
    };
    for n in &rec.nodes {
        match &n.download {
            DownloadOutcome::Finite(r) => s.downloads.push((r.d_fd, r.d_hd)),
            DownloadOutcome::Outage => s.outages += 1,
        }
    }
    s
}

fn sweep_point(
    ctx: &DropContext,
    point: usize,
    metrics: &[Metric],
    label: &str,
    x: f64,
) -> Result<Vec<ResultRow>> {
    let master = ctx.cfg.seed()?;
    let drops = ctx.cfg.drops;
    let summaries: Vec<DropSummary> = (0..drops)
        .into_par_iter()
        .map(|d| run_drop(ctx, drop_seed(master, point, d)).map(|r| summarize(&r)))
        .collect::<Result<_>>()?;

    let mut probs = [Moments::default(); 3];
    let (mut rate_fd, mut rate_hd) = (Moments::default(), Moments::default());
    let (mut dl_fd, mut dl_hd) = (Moments::default(), Moments::default());
    let (mut outages, mut nodes) = (0usize, 0usize);
    for s in &summaries {
        if let Some(p) = s.probs {
            for (m, v) in probs.iter_mut().zip(p) {
                m.push(v);
            }
        }
        rate_fd.push(s.rate_fd);
        rate_hd.push(s.rate_hd);
        for &(f, h) in &s.downloads {
            dl_fd.push(f);
            dl_hd.push(h);
        }
        outages += s.outages;
        nodes += s.nodes;
    }
    let outage = if nodes == 0 {
        0.0
    } else {
        outages as f64 / nodes as f64
    };
    let outage_se = if nodes == 0 {
        0.0
    } else {
        (outage * (1.0 - outage) / nodes as f64).sqrt()
    };

    Ok(metrics
        .iter()
        .map(|&metric| {
            let (value, stderr, used) = match metric {
                Metric::PFd => (probs[0].value(), probs[0].stderr(), probs[0].n),
                Metric::PHd => (probs[1].value(), probs[1].stderr(), probs[1].n),
                Metric::PSelf => (probs[2].value(), probs[2].stderr(), probs[2].n),
                Metric::AvgRateFd => (rate_fd.value(), rate_fd.stderr(), drops),
                Metric::AvgRateHd => (rate_hd.value(), rate_hd.stderr(), drops),
                Metric::AvgDownloadFd => (dl_fd.value(), dl_fd.stderr(), drops),
                Metric::AvgDownloadHd => (dl_hd.value(), dl_hd.stderr(), drops),
                Metric::OutageFrac => (outage, outage_se, drops),
            };
            ResultRow {
                sweep_var: label.to_string(),
                sweep_value: x,
                metric,
                value,
                stderr,
                drops: used,
            }
        })
        .collect())
}

/// Runs every series of `kind` over the sweep grid of `cfg`.
///
/// Drops run on a pool of `workers` threads (0 picks the rayon default).
/// Drop seeds depend only on the master seed, the grid index and the drop
/// index, so series of one scenario share random numbers point by point.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    kind: ScenarioKind,
    workers: usize,
) -> Result<ResultTable> {
    cfg.validate()?;
    let metrics = kind.metrics();
    let stages = if metrics.iter().any(|m| m.needs_channel()) {
        Stages::Full
    } else {
        Stages::Graph
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let mut table = ResultTable::new();
    for (label, series_cfg) in kind.series(cfg) {
        for (point, x) in series_cfg.grid().into_iter().enumerate() {
            let ctx = DropContext::new(&series_cfg.at(x)?, stages)?;
            for row in pool.install(|| sweep_point(&ctx, point, metrics, &label, x))? {
                table.push(row);
            }
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(kind: ScenarioKind, extra: &[&str]) -> ScenarioConfig {
        let mut sets: Vec<String> = vec!["drops=6".into(), "fading_samples=8".into()];
        sets.extend(extra.iter().map(|s| s.to_string()));
        configure(kind, None, &sets, Some(3)).unwrap()
    }

    #[test]
    fn unknown_scenario_lists_catalog() {
        match "fig9".parse::<ScenarioKind>() {
            Err(Error::UnknownScenario { name, catalog }) => {
                assert_eq!(name, "fig9");
                assert_eq!(catalog, "fig2, fig3, fig4, fig5, fig6, custom");
            }
            other => panic!("{other:?}"),
        }
        for k in ScenarioKind::ALL {
            assert_eq!(k.name().parse::<ScenarioKind>().unwrap(), k);
        }
    }

    #[test]
    fn presets_match_catalog() {
        let c = configure(ScenarioKind::Fig3, None, &[], Some(1)).unwrap();
        assert_eq!((c.gamma_r, c.h, c.l_km), (1.6, 5, 0.2));
        assert_eq!(c.grid().first(), Some(&10.0));
        assert_eq!(c.grid().last(), Some(&1000.0));
        let c = configure(ScenarioKind::Fig5, None, &[], Some(1)).unwrap();
        assert_eq!((c.n, c.h, c.gamma_r), (1000, 3, 1.0));
        let labels: Vec<_> = ScenarioKind::Fig5
            .series(&c)
            .into_iter()
            .map(|s| s.0)
            .collect();
        assert_eq!(labels, ["l@tau=1", "l@tau=2", "l@tau=3"]);
        let c = configure(ScenarioKind::Fig2, None, &[], Some(1)).unwrap();
        assert_eq!(c.grid().len(), 10);
        assert_eq!(c.grid()[0].to_string(), "0.05");
        assert_eq!(c.grid()[9].to_string(), "0.5");
    }

    #[test]
    fn later_layers_override_presets() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "n = 200\nh = 2\nseed = 9\n").unwrap();
        let c = configure(ScenarioKind::Fig4, Some(&path), &["h=3".into()], None).unwrap();
        assert_eq!((c.n, c.h, c.seed), (200, 3, Some(9)));
        let c = configure(ScenarioKind::Fig4, Some(&path), &[], Some(4)).unwrap();
        assert_eq!(c.seed, Some(4));
        assert!(matches!(
            configure(ScenarioKind::Fig4, None, &[], None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fig4_emits_two_rows_per_point() {
        let cfg = quick(ScenarioKind::Fig4, &["sweep_values=0.1,0.3,0.5", "n=150"]);
        let t = run_scenario(&cfg, ScenarioKind::Fig4, 1).unwrap();
        assert_eq!(t.rows().len(), 2 * 3);
        assert!(t.rows().iter().all(|r| r.value.is_finite() && r.drops == 6));
    }

    #[test]
    fn probability_rows_sum_to_one() {
        let cfg = quick(ScenarioKind::Fig2, &["sweep_values=0.1,0.35"]);
        let t = run_scenario(&cfg, ScenarioKind::Fig2, 1).unwrap();
        for x in [0.1, 0.35] {
            let sum: f64 = [Metric::PFd, Metric::PHd, Metric::PSelf]
                .map(|m| t.get("l", x, m).unwrap().value)
                .iter()
                .sum();
            assert!((sum - 1.0).abs() < 1e-12, "{sum}");
        }
    }

    #[test]
    fn infeasible_point_fails_the_run() {
        let cfg = quick(ScenarioKind::Custom, &["m=5", "h=5", "n=50", "l=0.5"]);
        assert!(matches!(
            run_scenario(&cfg, ScenarioKind::Custom, 1),
            Err(Error::InfeasiblePlacement { .. })
        ));
    }

    #[test]
    fn moments_match_direct_formulae() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((m.value() - mean).abs() < 1e-12);
        assert!((m.stderr() - (var / 5.0).sqrt()).abs() < 1e-12);
        assert!(Moments::default().value().is_nan());
    }
}
