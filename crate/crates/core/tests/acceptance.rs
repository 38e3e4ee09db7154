//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdd2d::analytic::{collaboration_probs, p_serve, ConstantRho, TopPopularProfile};
use fdd2d::channel::{
    ergodic_capacity, sinr, ActiveLinkSet, ChannelEnv, Fading, PairFading, PairStreams,
};
use fdd2d::harness::{
    configure, drop_seed, run_drop, run_scenario, DropContext, Metric, ResultTable, ScenarioKind,
    Stages,
};
use fdd2d::popularity::zipf_pmf;
use fdd2d::topology::{assign_clusters, cluster_ratio, occupancy_pmf, place_users, Point};

const SEED: u64 = 20_240_601;

/// Fading draws per link in the Monte-Carlo trend runs. The per-drop
/// ergodic estimate is unbiased for any count; fewer draws only add
/// variance, which the drop-level standard errors already carry.
const TREND_FADING_SAMPLES: &str = "fading_samples=8";

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:>2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn scenario(kind: ScenarioKind, sets: &[&str]) -> ResultTable {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    let cfg = configure(kind, None, &sets, Some(SEED)).unwrap();
    run_scenario(&cfg, kind, 0).unwrap()
}

/// Binomial pmf by the multiplicative recurrence, independent of the
/// library's log-gamma route.
fn binomial_oracle(n: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = (1.0 - p).powi(n as i32);
    for k in 1..=n {
        pmf[k] = pmf[k - 1] * (n - k + 1) as f64 / k as f64 * p / (1.0 - p);
    }
    pmf
}

/// Non-decreasing up to one adjacent drop no larger than the combined
/// standard error of the pair. Returns the offending pairs.
fn monotone_violations(points: &[(f64, f64)], increasing: bool) -> (usize, bool) {
    let mut count = 0;
    let mut within = true;
    for w in points.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        let drop = if increasing { a - b } else { b - a };
        if drop > 0.0 {
            count += 1;
            within &= drop <= (sa * sa + sb * sb).sqrt();
        }
    }
    (count, within)
}

fn trend_ok(points: &[(f64, f64)], increasing: bool) -> bool {
    let (count, within) = monotone_violations(points, increasing);
    count == 0 || (count == 1 && within)
}

fn series(table: &ResultTable, var: &str, metric: Metric) -> Vec<(f64, f64)> {
    table
        .series(var, metric)
        .iter()
        .map(|r| (r.value, r.stderr))
        .collect()
}

/// Binomial pmf from a running log of C(n, k); copes with p = 0 or 1.
fn binomial_log_oracle(n: usize, p: f64) -> Vec<f64> {
    let mut ln_c = 0.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                ln_c += ((n - k + 1) as f64 / k as f64).ln();
            }
            match p {
                0.0 => f64::from(k == 0),
                1.0 => f64::from(k == n),
                _ => (ln_c + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp(),
            }
        })
        .collect()
}

/// `1 - Σ_k Pr[K=k] · E[1 - (1-ρ_u)^(k-1)]`, the probability of serving nobody.
fn self_oracle(n: usize, ratio: f64, rho_u_of: impl Fn(usize) -> Vec<(f64, f64)>) -> f64 {
    let occupancy = binomial_log_oracle(n, ratio.min(1.0));
    let served: f64 = (2..=n)
        .map(|k| {
            let e: f64 = rho_u_of(k)
                .iter()
                .map(|&(w, r)| w * (1.0 - (1.0 - r).powi(k as i32 - 1)))
                .sum();
            occupancy[k] * e
        })
        .sum();
    1.0 - served
}

#[test]
fn criterion_01_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut worst_self: f64 = 0.0;
    for trial in 0..1000 {
        let n = rng.random_range(0..=300);
        let a = rng.random_range(0.2..2.0);
        let l = rng.random_range(0.01..=1.0) * a * 2f64.sqrt();
        let ratio = cluster_ratio(l, a);
        let gamma = rng.random_range(0.0..2.5);
        let pmf = zipf_pmf(1000, gamma).unwrap();
        let (probs, expected_self) = if trial % 2 == 0 {
            let rho_c = rng.random_range(0.0..=1.0);
            let rho_u = rng.random_range(0.0..=rho_c);
            (
                collaboration_probs(n, ratio, &ConstantRho { rho_c, rho_u }).unwrap(),
                self_oracle(n, ratio, |_| vec![(1.0, rho_u)]),
            )
        } else {
            (
                collaboration_probs(n, ratio, &TopPopularProfile::new(&pmf, 1)).unwrap(),
                self_oracle(n, ratio, |k| {
                    pmf[..k].iter().map(|&r| (1.0 / k as f64, r)).collect()
                }),
            )
        };
        worst_self = worst_self.max((probs.self_ - expected_self).abs());
        for p in [probs.fd, probs.hd, probs.self_] {
            assert!((-1e-12..=1.0 + 1e-12).contains(&p), "{probs:?}");
        }
        worst = worst.max((probs.fd + probs.hd + probs.self_ - 1.0).abs());
    }
    report(
        1,
        "P_FD + P_HD + P_self = 1",
        worst <= 1e-12 && worst_self <= 1e-10,
        &format!(
            "max |sum - 1| = {worst:.2e} over 1000 inputs; P_self vs serve-nobody oracle {worst_self:.2e}"
        ),
    );
}

#[test]
fn criterion_02_p_serve_closed_form() {
    let mut worst: f64 = 0.0;
    for k in 1..=50 {
        for i in 0..=100 {
            let rho = i as f64 / 100.0;
            let closed = 1.0 - (1.0 - rho).powi(k as i32 - 1);
            worst = worst.max((p_serve(k, rho) - closed).abs());
        }
    }
    report(
        2,
        "p_serve = 1 - (1 - rho)^(k-1)",
        worst <= 1e-12,
        &format!("max error {worst:.2e}"),
    );
}

#[test]
fn criterion_03_analytic_matches_simulation() {
    let grid = [0.1, 0.2, 0.3, 0.4];
    let t = scenario(
        ScenarioKind::Fig2,
        &["gamma_r=1.6", "sweep_values=0.1,0.2,0.3,0.4", "drops=10000"],
    );
    let pmf = zipf_pmf(1000, 1.6).unwrap();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for l in grid {
        let a = collaboration_probs(500, cluster_ratio(l, 1.0), &TopPopularProfile::new(&pmf, 1))
            .unwrap();
        for (metric, exact) in [
            (Metric::PFd, a.fd),
            (Metric::PHd, a.hd),
            (Metric::PSelf, a.self_),
        ] {
            let sim = t.get("l", l, metric).unwrap().value;
            worst = worst.max((sim - exact).abs());
            if metric == Metric::PFd {
                lines.push(format!("l={l}: sim {sim:.4} vs {exact:.4}"));
            }
        }
    }
    report(
        3,
        "simulated vs closed-form probabilities",
        worst <= 0.02,
        &format!("max |diff| {worst:.4}; P_FD {}", lines.join(", ")),
    );
}

#[test]
fn criterion_04_occupancy_distribution() {
    let (n, l, a) = (100, 0.3, 1.0);
    let pmf = occupancy_pmf(n, l, a).unwrap();
    let oracle = binomial_oracle(n, l * l / (2.0 * a * a));
    let pmf_err = pmf
        .iter()
        .zip(&oracle)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(pmf_err < 1e-12, "occupancy pmf off by {pmf_err}");

    let mut hist = vec![0usize; n + 1];
    let mut total = 0usize;
    for d in 0..10_000 {
        let mut rng = ChaCha8Rng::seed_from_u64(drop_seed(SEED, 0, d));
        let dep = place_users(n, a, &mut rng).unwrap();
        let clusters = assign_clusters(&dep, l).unwrap();
        for (id, members) in clusters.iter() {
            if clusters.is_full(id) {
                hist[members.len()] += 1;
                total += 1;
            }
        }
    }
    let tv = 0.5
        * hist
            .iter()
            .zip(&oracle)
            .map(|(&c, &p)| (c as f64 / total as f64 - p).abs())
            .sum::<f64>();
    report(
        4,
        "cluster occupancy ~ Binomial(n, l^2/2a^2)",
        tv < 0.02,
        &format!("TV distance {tv:.4} over {total} clusters"),
    );
}

#[test]
fn criterion_05_sinr_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_hd: f64 = 0.0;
    for _ in 0..100 {
        let pt = rng.random_range(0.0..30.0);
        let alpha = rng.random_range(2.0..5.0);
        let env =
            ChannelEnv::from_link_budget(pt, -174.0, 1.2e6, alpha, -70.0, 0.0, Fading::Rayleigh)
                .unwrap();
        let (h, g) = (rng.random_range(0.01..5.0), rng.random_range(0.1..3.0));
        let d_km = rng.random_range(0.001..1.0);
        let mut set = ActiveLinkSet::new();
        set.add_transmitter(0, Point::new(0.0, 0.0));
        set.add_link(0, 1, Point::new(0.0, d_km), false).unwrap();
        let got = sinr(&set, 0, &env, &|_, _| PairFading { h, g }).unwrap();
        let want = env.pt_w * h * g * (d_km * 1000.0).powf(-alpha) / env.noise_w;
        worst_hd = worst_hd.max((got - want).abs() / want);
    }
    let mut worst_fd: f64 = 0.0;
    for _ in 0..100 {
        let alpha = rng.random_range(2.0..5.0);
        let env =
            ChannelEnv::from_link_budget(23.0, -400.0, 1.2e6, alpha, 0.0, 0.0, Fading::Rayleigh)
                .unwrap();
        let h = rng.random_range(0.01..5.0);
        let d_km = rng.random_range(0.001..1.0);
        let mut set = ActiveLinkSet::new();
        set.add_transmitter(0, Point::new(0.0, 0.0));
        set.add_link(0, 1, Point::new(d_km, 0.0), true).unwrap();
        let got = sinr(&set, 0, &env, &|_, _| PairFading { h, g: 1.0 }).unwrap();
        let want = h * (d_km * 1000.0).powf(-alpha);
        worst_fd = worst_fd.max((got - want).abs() / want);
    }
    report(
        5,
        "SINR matches link budget",
        worst_hd <= 1e-12 && worst_fd <= 1e-6,
        &format!("HD rel err {worst_hd:.1e}, FD SI-limited rel err {worst_fd:.1e}"),
    );
}

/// `E[log2(1 + s·X)]`, `X ~ Exp(1)`, by composite Simpson on `x = t/(1-t)`.
fn rayleigh_capacity_oracle(snr: f64) -> f64 {
    let f = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let x = t / (1.0 - t);
        (1.0 + snr * x).log2() * (-x).exp() / ((1.0 - t) * (1.0 - t))
    };
    let m = 200_000;
    let h = 1.0 / m as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..m {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn criterion_06_ergodic_capacity() {
    let det =
        ChannelEnv::from_link_budget(23.0, -174.0, 1.2e6, 2.6, -70.0, 0.0, Fading::Deterministic)
            .unwrap();
    let ray = ChannelEnv {
        fading: Fading::Rayleigh,
        ..det
    };
    let mut det_err: f64 = 0.0;
    let mut z_scores = Vec::new();
    for (i, snr) in [0.1, 1.0, 10.0, 100.0, 1000.0].into_iter().enumerate() {
        let d_m = (det.pt_w / (det.noise_w * snr)).powf(1.0 / det.alpha);
        let mut set = ActiveLinkSet::new();
        set.add_transmitter(0, Point::new(0.0, 0.0));
        set.add_link(0, 1, Point::new(d_m / 1000.0, 0.0), false)
            .unwrap();
        let streams = PairStreams::new(SEED + i as u64);

        let c = ergodic_capacity(&set, 0, &det, 50, &streams).unwrap();
        let exact = det.bandwidth_hz * (1.0 + snr).log2();
        det_err = det_err.max((c.bits_per_s - exact).abs() / exact);

        let c = ergodic_capacity(&set, 0, &ray, 20_000, &streams).unwrap();
        let oracle = ray.bandwidth_hz * rayleigh_capacity_oracle(snr);
        z_scores.push((c.bits_per_s - oracle) / c.stderr);
    }
    let pass = det_err <= 1e-12 && z_scores.iter().all(|z| z.abs() <= 3.0);
    let zs: Vec<String> = z_scores.iter().map(|z| format!("{z:+.2}")).collect();
    report(
        6,
        "ergodic capacity vs closed form and quadrature",
        pass,
        &format!(
            "deterministic rel err {det_err:.1e}; Rayleigh z-scores [{}]",
            zs.join(", ")
        ),
    );
}

#[test]
fn criterion_07_latency_dominance() {
    let mut checked = 0usize;
    let mut sandwich = true;
    for (point, l) in [0.05, 0.15, 0.25, 0.35, 0.5].into_iter().enumerate() {
        for tau in 1..=3 {
            let cfg = configure(
                ScenarioKind::Custom,
                None,
                &[
                    format!("l={l}"),
                    format!("tau={tau}"),
                    "fading_samples=8".into(),
                ],
                Some(SEED),
            )
            .unwrap();
            let ctx = DropContext::new(&cfg, Stages::Full).unwrap();
            for d in 0..40 {
                for node in run_drop(&ctx, drop_seed(SEED, point, d)).unwrap().nodes {
                    if let Some(r) = node.download.report() {
                        checked += 1;
                        sandwich &= r.d_fd <= r.d_hd && r.d_hd <= 2.0 * r.d_fd;
                        if node.mode.is_full_duplex() {
                            sandwich &= r.d_fd < r.d_hd;
                        }
                    }
                }
            }
        }
    }
    let t = scenario(ScenarioKind::Fig6, &[TREND_FADING_SAMPLES]);
    let fd = t.series("l", Metric::AvgDownloadFd);
    let hd = t.series("l", Metric::AvgDownloadHd);
    let below = fd.len() == 10 && fd.iter().zip(&hd).all(|(f, h)| f.value < h.value);
    let gaps: Vec<String> = fd
        .iter()
        .zip(&hd)
        .map(|(f, h)| format!("{:.0}/{:.0}", f.value, h.value))
        .collect();
    report(
        7,
        "D_FD <= D_HD <= 2 D_FD per node; fig6 FD below HD",
        sandwich && below,
        &format!(
            "{checked} node reports checked; fig6 FD/HD seconds [{}]",
            gaps.join(" ")
        ),
    );
}

#[test]
fn criterion_08_trends() {
    let fig2 = scenario(ScenarioKind::Fig2, &[]);
    let fig2_ok = trend_ok(&series(&fig2, "l", Metric::PFd), true)
        && trend_ok(&series(&fig2, "l", Metric::PSelf), false);

    let fig3 = scenario(ScenarioKind::Fig3, &[]);
    let fig3_ok = trend_ok(&series(&fig3, "n", Metric::PFd), true);
    let fig3_curve: Vec<String> = fig3
        .series("n", Metric::PFd)
        .iter()
        .map(|r| format!("{}:{:.4}", r.sweep_value, r.value))
        .collect();
    println!("fig3 P_FD by n: {}", fig3_curve.join(" "));

    let fig5 = scenario(ScenarioKind::Fig5, &[TREND_FADING_SAMPLES]);
    let labels = ["l@tau=1", "l@tau=2", "l@tau=3"];
    let grid: Vec<f64> = fig5
        .series(labels[0], Metric::AvgRateFd)
        .iter()
        .map(|r| r.sweep_value)
        .collect();
    let mut fig5_ok = true;
    let mut fig5_lines = Vec::new();
    for &l in &grid {
        let curve: Vec<(f64, f64)> = labels
            .iter()
            .map(|lab| {
                let r = fig5.get(lab, l, Metric::AvgRateFd).unwrap();
                (r.value, r.stderr)
            })
            .collect();
        fig5_ok &= trend_ok(&curve, true);
        fig5_lines.push(format!(
            "l={l}: {}",
            curve
                .iter()
                .map(|(v, _)| format!("{:.2e}", v))
                .collect::<Vec<_>>()
                .join("/")
        ));
    }
    println!(
        "fig5 mean cluster sum rate, tau=1/2/3 (bits/s):\n  {}",
        fig5_lines.join("\n  ")
    );
    report(
        8,
        "trends: fig2 in l, fig3 in n, fig5 in tau",
        fig2_ok && fig3_ok && fig5_ok,
        &format!("fig2 {fig2_ok}, fig3 {fig3_ok}, fig5 {fig5_ok}"),
    );
}

#[test]
fn criterion_09_fd_rate_gain() {
    let t = scenario(ScenarioKind::Fig4, &[TREND_FADING_SAMPLES]);
    let fd = t.series("l", Metric::AvgRateFd);
    let hd = t.series("l", Metric::AvgRateHd);
    let pass = fd.len() == 10 && fd.iter().zip(&hd).all(|(f, h)| f.value >= h.value);
    let ratios: Vec<String> = fd
        .iter()
        .zip(&hd)
        .map(|(f, h)| format!("{:.3}", f.value / h.value))
        .collect();
    report(
        9,
        "FD sum rate >= HD sum rate on fig4",
        pass,
        &format!("FD/HD [{}]", ratios.join(" ")),
    );
}

#[test]
fn criterion_10_determinism() {
    let mut identical = true;
    for (kind, sets) in [
        (ScenarioKind::Fig2, vec!["drops=200"]),
        (ScenarioKind::Fig4, vec!["drops=30", "fading_samples=8"]),
        (
            ScenarioKind::Fig6,
            vec!["drops=30", "fading_samples=8", "sweep_values=0.1,0.4"],
        ),
    ] {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        let cfg = configure(kind, None, &sets, Some(SEED)).unwrap();
        let reference = run_scenario(&cfg, kind, 1).unwrap().to_csv_string();
        for workers in [1, 2, 3, 8] {
            identical &= run_scenario(&cfg, kind, workers).unwrap().to_csv_string() == reference;
        }
    }
    report(
        10,
        "byte-identical CSV across runs and worker counts",
        identical,
        "fig2, fig4, fig6 with 1, 2, 3, 8 workers",
    );
}
