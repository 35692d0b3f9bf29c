use std::io::Write;

use anyhow::Result;
use rayon::prelude::*;

use nestperc::percolation::{ladder_run, LadderOutcome};
use nestperc::rng;

use crate::config::{precondition, Config};
use crate::manifest::ManifestBuilder;
use crate::Outcome;

pub fn run(cfg: &Config) -> Result<Outcome> {
    let params = cfg.params(true)?;
    let k_max: u32 = cfg.get_or("k_max", 14)?;
    let traces: u64 = cfg.get_or("traces", 1000)?;
    let k0_list: Vec<u32> = cfg.get_list("k0_list", &[4, 6, 8, 10])?;
    let seed = cfg.seed()?;

    let dir = super::out_dir(cfg)?;
    let mut mb = ManifestBuilder::new("ladder", cfg);

    let runs: Vec<_> = (0..traces)
        .into_par_iter()
        .map(|t| {
            ladder_run(
                &params,
                k_max,
                rng::hash_key(seed, rng::Stream::Sequence, &[t]),
            )
            .map_err(precondition)
        })
        .collect::<Result<Vec<_>>>()?;

    let csv_path = dir.join("ladder_traces.csv");
    let mut f = std::fs::File::create(&csv_path)?;
    writeln!(f, "trace,level,outcome")?;
    for (t, run) in runs.iter().enumerate() {
        for (i, o) in run.outcomes.iter().enumerate() {
            writeln!(f, "{t},{},{}", i + 1, o.letter())?;
        }
    }
    drop(f);

    let txt_path = dir.join("ladder_summary.txt");
    let mut f = std::fs::File::create(&txt_path)?;
    writeln!(
        f,
        "ladder runs: alpha={} rho={} p={} k_max={k_max} traces={traces}",
        params.alpha, params.rho, params.p
    )?;
    let zd = (params.z as f64).powi(params.d as i32);
    writeln!(
        f,
        "region: rho {} alpha/z^d = {:.4} ({} threshold expected)",
        if params.rho > params.alpha / zd { ">" } else { "<=" },
        params.alpha / zd,
        if params.rho > params.alpha / zd { "trivial" } else { "nontrivial" }
    )?;
    writeln!(f, "level, freq A, freq C, freq E")?;
    for level in 1..=k_max {
        let mut counts = [0u64; 3];
        for run in &runs {
            match run.outcome_at(level) {
                LadderOutcome::Connected => counts[0] += 1,
                LadderOutcome::Stranded => counts[1] += 1,
                LadderOutcome::Empty => counts[2] += 1,
            }
        }
        writeln!(
            f,
            "{level}, {:.4}, {:.4}, {:.4}",
            counts[0] as f64 / traces as f64,
            counts[1] as f64 / traces as f64,
            counts[2] as f64 / traces as f64
        )?;
    }
    writeln!(f, "all-Connected tail frequency by start level:")?;
    for &k0 in &k0_list {
        if k0 >= 1 && k0 <= k_max {
            let freq = runs.iter().filter(|r| r.tail_all_connected(k0)).count() as f64
                / traces as f64;
            writeln!(f, "  k0={k0}: {freq:.4}")?;
        }
    }
    drop(f);
    mb.record(&csv_path)?;
    mb.record(&txt_path)?;
    mb.write(&dir)?;
    println!("wrote {} and {}", csv_path.display(), txt_path.display());
    Ok(Outcome::ok())
}
