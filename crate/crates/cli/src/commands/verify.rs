use std::io::Write;

use anyhow::Result;
use rand::RngExt;

use nestperc::analysis;
use nestperc::heights;
use nestperc::lattice::SimBox;
use nestperc::netmodels::{self, ModelKind, Params};
use nestperc::oracle::{self, TruncationSpec};
use nestperc::percolation::{self, SamplerOptions};
use nestperc::rng;

use crate::config::Config;
use crate::manifest::ManifestBuilder;
use crate::Outcome;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn mc_vs_oracle_connection(
    model: &ModelKind,
    pr: &Params,
    n: u64,
    seed: u64,
    cap: Option<u32>,
) -> (f64, f64, f64) {
    let bbox = oracle::suite_box();
    let src = bbox.index_of(&oracle::SUITE_SOURCE);
    let tgt = bbox.index_of(&oracle::SUITE_TARGET) as u32;
    let trunc = match cap {
        Some(c) => TruncationSpec::capped(c),
        None => TruncationSpec::capped(3),
    };
    let want = oracle::exact_connection_prob(
        bbox,
        &oracle::SUITE_SOURCE,
        &oracle::SUITE_TARGET,
        pr,
        model,
        trunc,
    )
    .unwrap()
    .value;
    let opts = SamplerOptions {
        edge_cap: 1_000_000,
        height_cap: cap,
    };
    let hits: u64 = (0..n)
        .map(|i| {
            let g = percolation::sample_open_graph_opts(
                bbox,
                model,
                pr,
                rng::hash_key(seed, rng::Stream::Sequence, &[i]),
                opts,
            )
            .unwrap();
            let run = percolation::reed_frost_run(&g, src);
            u64::from(run.infected.binary_search(&tgt).is_ok())
        })
        .sum();
    let got = hits as f64 / n as f64;
    let sigma = (want * (1.0 - want) / n as f64).sqrt().max(1e-9);
    (got, want, (got - want).abs() / sigma)
}

pub fn run(cfg: &Config) -> Result<Outcome> {
    let seed = cfg.seed()?;
    let n_small: u64 = cfg.get_or("n_small", 20_000)?;
    let mut checks: Vec<Check> = Vec::new();

    // transmission-edge series against direct sampling
    {
        let pr = Params::new(2, 2, 2.0, 0.5, 0.5).unwrap();
        let (u, v) = ([0i64, 0], [1i64, 1]);
        let want = oracle::exact_edge_prob(&u, &v, &pr);
        let n = 200_000u64;
        let mut rng = rng::substream(seed, 11);
        let mut hits = 0u64;
        for _ in 0..n {
            let hu = heights::sample_height(pr.alpha, &mut rng).unwrap();
            let hv = heights::sample_height(pr.alpha, &mut rng).unwrap();
            if rng.random::<f64>() < netmodels::nested_pair_open_prob(&u, &v, hu, hv, &pr) {
                hits += 1;
            }
        }
        let got = hits as f64 / n as f64;
        let sigma = (want * (1.0 - want) / n as f64).sqrt();
        let dev = (got - want).abs() / sigma;
        checks.push(Check {
            name: "edge probability series vs Monte Carlo",
            pass: dev < 3.0,
            detail: format!("{got:.5} vs {want:.5} ({dev:.2} sigma)"),
        });
    }

    // connection probabilities on the tiny suite, all four models
    {
        let pr = Params::new(2, 2, 2.0, 0.5, 0.5).unwrap();
        let (_, want, dev) =
            mc_vs_oracle_connection(&ModelKind::Nested, &pr, n_small, seed ^ 1, Some(3));
        checks.push(Check {
            name: "nested connection vs capped oracle",
            pass: dev < 3.0,
            detail: format!("oracle {want:.5} ({dev:.2} sigma at n={n_small})"),
        });
        let pr = Params::new(2, 2, 2.0, 0.25, 0.6).unwrap();
        let (s, bp) = netmodels::longrange_params_from(&pr).unwrap();
        for model in [
            ModelKind::DistanceGated,
            ModelKind::DirectedPair { beta: pr.alpha.sqrt() },
            ModelKind::LongRange { beta: bp, s },
        ] {
            let (_, want, dev) = mc_vs_oracle_connection(&model, &pr, n_small, seed ^ 2, None);
            checks.push(Check {
                name: match model {
                    ModelKind::DistanceGated => "distance-gated connection vs oracle",
                    ModelKind::DirectedPair { .. } => "directed-pair connection vs oracle",
                    _ => "long-range connection vs oracle",
                },
                pass: dev < 3.0,
                detail: format!("oracle {want:.5} ({dev:.2} sigma at n={n_small})"),
            });
        }
    }

    // coupling invariant and uniform marginal
    {
        let alpha = 2.0;
        let n = 200_000usize;
        let mut rng = rng::substream(seed, 13);
        let mut ok = true;
        let mut us = Vec::with_capacity(n);
        for _ in 0..n {
            let m = heights::coupled_sample(alpha, 2, &mut rng).unwrap();
            ok &= m.coupling_holds(alpha);
            us.push(m.u);
        }
        let ks = analysis::ks_statistic_uniform(&mut us);
        let crit = 1.628 / (n as f64).sqrt();
        checks.push(Check {
            name: "height-mark coupling invariant",
            pass: ok && ks < crit,
            detail: format!("invariant {ok}, KS {ks:.5} < {crit:.5}"),
        });
    }

    // zero functions: the balanced direction plus fault injection
    {
        let pr = Params::new(2, 2, 2.0, 0.4, 0.7).unwrap();
        let mut rng = rng::substream(seed, 17);
        let mut ok = true;
        let mut injected_broke = false;
        for _ in 0..2000 {
            let na = rng.random_range(1..=6usize);
            let nb = rng.random_range(1..=6usize);
            let da: Vec<f64> = (0..na).map(|_| 1.0 + 20.0 * rng.random::<f64>()).collect();
            let db: Vec<f64> = (0..nb).map(|_| 1.0 + 20.0 * rng.random::<f64>()).collect();
            ok &= analysis::zero_function_compare(&da, &db, &pr).unwrap().pass;
            if !analysis::zero_function_compare_beta(&da, &db, &pr, pr.alpha)
                .unwrap()
                .pass
            {
                injected_broke = true;
            }
        }
        checks.push(Check {
            name: "zero-function inequality (beta^2 = alpha)",
            pass: ok,
            detail: "2000 random configurations".into(),
        });
        checks.push(Check {
            name: "zero-function fault injection (beta = alpha breaks)",
            pass: injected_broke,
            detail: format!("violation observed: {injected_broke}"),
        });
    }

    // exact tiny-instance domination
    {
        let bbox = oracle::suite_box();
        let mut ok = true;
        let mut worst: f64 = f64::NEG_INFINITY;
        for pr in oracle::standard_oracle_suite() {
            if pr.rho >= 1.0 {
                continue;
            }
            let nested = oracle::exact_connection_prob(
                bbox,
                &oracle::SUITE_SOURCE,
                &oracle::SUITE_TARGET,
                &pr,
                &ModelKind::Nested,
                TruncationSpec::capped(2),
            )
            .unwrap()
            .value;
            let gated = oracle::exact_connection_prob(
                bbox,
                &oracle::SUITE_SOURCE,
                &oracle::SUITE_TARGET,
                &pr,
                &ModelKind::DistanceGated,
                TruncationSpec::capped(2),
            )
            .unwrap()
            .value;
            worst = worst.max(nested - gated);
            ok &= nested <= gated + 1e-12;
        }
        checks.push(Check {
            name: "exact domination nested <= distance-gated",
            pass: ok,
            detail: format!("worst gap {worst:.3e}"),
        });
    }

    // Monte Carlo domination chain, small box
    {
        let pr = Params::new(2, 2, 2.0, 0.25, 0.2).unwrap();
        let rep = analysis::domination_check(&pr, 32, 300, seed ^ 3).unwrap();
        checks.push(Check {
            name: "Monte Carlo domination chain (L=32)",
            pass: rep.ordered,
            detail: rep
                .estimates
                .iter()
                .map(|(m, e)| format!("{} {:.3}", m.token(), e.p_hat))
                .collect::<Vec<_>>()
                .join(" <= "),
        });
    }

    // Reed-Frost final set = origin cluster
    {
        let pr = Params::new(2, 2, 1.8, 0.5, 0.35).unwrap();
        let bbox = SimBox::new(12, 2).unwrap();
        let mut ok = true;
        for rep in 0..100u64 {
            let g = percolation::sample_open_graph(
                bbox,
                &ModelKind::Nested,
                &pr,
                rng::hash_key(seed, rng::Stream::Sequence, &[900 + rep]),
            )
            .unwrap();
            let initial = (rep as usize * 37) % g.vertex_count();
            let run = percolation::reed_frost_run(&g, initial);
            let cs = percolation::clusters(&g);
            ok &= run.infected.len() == cs.sizes[cs.labels[initial] as usize]
                && run
                    .infected
                    .iter()
                    .all(|&v| cs.labels[v as usize] == cs.labels[initial]);
        }
        checks.push(Check {
            name: "Reed-Frost final set = percolation cluster",
            pass: ok,
            detail: "100 realizations".into(),
        });
    }

    // Galton-Watson bound refinement
    {
        let pr = Params::new(2, 2, 2.0, 0.25, 0.01).unwrap();
        let b1 = analysis::gw_bound(&pr, 100).unwrap();
        let b2 = analysis::gw_bound(&pr, 300).unwrap();
        let ok = b2.mean_offspring <= b1.mean_offspring + 1e-12
            && (b1.mean_offspring - b2.mean_offspring) <= b1.tail_bound + 1e-12;
        checks.push(Check {
            name: "GW bound refinement stays within tail bound",
            pass: ok,
            detail: format!(
                "{:.6} -> {:.6} (tail {:.2e})",
                b1.mean_offspring, b2.mean_offspring, b1.tail_bound
            ),
        });
    }

    // Yukich limit on a small box
    {
        let pts = analysis::yukich_limit_check(2, 1.0, 1.0, 512, &[30], seed ^ 4).unwrap();
        let ok = pts.iter().all(|p| p.ratio > 0.5 && p.ratio < 2.0);
        checks.push(Check {
            name: "Yukich tail constant (L=512)",
            pass: ok,
            detail: format!("ratio {:.3}", pts[0].ratio),
        });
    }

    // coupled-mark containment: gated edges inside Yukich edges
    {
        let alpha = 2.0f64;
        let s = 1.0 / (alpha.ln() / 2f64.ln());
        let delta = 2f64.sqrt();
        let mut rng = rng::substream(seed, 19);
        let mut ok = true;
        for _ in 0..2000 {
            let a = [rng.random_range(0..32i64), rng.random_range(0..32i64)];
            let b = [rng.random_range(0..32i64), rng.random_range(0..32i64)];
            if a == b {
                continue;
            }
            let ma = heights::coupled_at(seed ^ 5, alpha, &a);
            let mb = heights::coupled_at(seed ^ 5, alpha, &b);
            let (xa, xb) = (ma.x.capped(1_000_000), mb.x.capped(1_000_000));
            let need = nestperc::lattice::euclid_dist(&a, &b) / delta;
            if 2f64.powi(xa.min(xb) as i32) >= need {
                ok &= netmodels::yukich_edge_exists(&a, &b, ma.u, mb.u, s, delta);
            }
        }
        checks.push(Check {
            name: "coupled marks: gated edges inside Yukich edges",
            pass: ok,
            detail: "2000 random pairs".into(),
        });
    }

    let dir = super::out_dir(cfg)?;
    let mut mb = ManifestBuilder::new("verify", cfg);
    let path = dir.join("verify_report.txt");
    let mut f = std::fs::File::create(&path)?;
    let mut failed = 0usize;
    for c in &checks {
        let line = format!(
            "{} {:<48} {}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
        println!("{line}");
        writeln!(f, "{line}")?;
        if !c.pass {
            failed += 1;
        }
    }
    let summary = format!("{} checks, {} failed", checks.len(), failed);
    println!("{summary}");
    writeln!(f, "{summary}")?;
    drop(f);
    mb.record(&path)?;
    mb.write(&dir)?;

    Ok(Outcome {
        checks_failed: failed > 0,
    })
}
