use std::io::Write;

use anyhow::Result;

use nestperc::analysis::domination_check;
use nestperc::netmodels::longrange_params_from;

use crate::config::{precondition, Config};
use crate::manifest::ManifestBuilder;
use crate::Outcome;

pub fn run(cfg: &Config) -> Result<Outcome> {
    let params = cfg.params(true)?;
    let l: i64 = cfg.require("L")?;
    let n_reps: u64 = cfg.require("n_reps")?;
    let seed = cfg.seed()?;

    let dir = super::out_dir(cfg)?;
    let mut mb = ManifestBuilder::new("compare-longrange", cfg);

    let (s, beta_prime) = longrange_params_from(&params).map_err(precondition)?;
    let report = domination_check(&params, l, n_reps, seed).map_err(precondition)?;

    let csv_path = dir.join("domination.csv");
    let mut f = std::fs::File::create(&csv_path)?;
    writeln!(f, "model,p_hat,ci_low,ci_high,n,L")?;
    for (m, e) in &report.estimates {
        writeln!(
            f,
            "{},{:.6},{:.6},{:.6},{},{}",
            m.token(),
            e.p_hat,
            e.ci_low,
            e.ci_high,
            e.n,
            e.l
        )?;
    }
    drop(f);

    let txt_path = dir.join("domination_report.txt");
    let mut f = std::fs::File::create(&txt_path)?;
    writeln!(
        f,
        "domination chain at alpha={} rho={} p={} L={l} n={n_reps}",
        params.alpha, params.rho, params.p
    )?;
    writeln!(f, "long-range comparison constants: s={s:.4} beta'={beta_prime:.4}")?;
    for (m, e) in &report.estimates {
        writeln!(
            f,
            "  {:<14} crossing {:.4} [{:.4}, {:.4}]",
            m.token(),
            e.p_hat,
            e.ci_low,
            e.ci_high
        )?;
    }
    writeln!(
        f,
        "chain ordered within 95% CIs: {}",
        if report.ordered { "pass" } else { "FAIL" }
    )?;
    for v in &report.violations {
        writeln!(f, "  violation: {v}")?;
    }
    drop(f);
    mb.record(&csv_path)?;
    mb.record(&txt_path)?;
    mb.write(&dir)?;

    for (m, e) in &report.estimates {
        println!("{:<14} {:.4} [{:.4}, {:.4}]", m.token(), e.p_hat, e.ci_low, e.ci_high);
    }
    println!("ordered: {}", report.ordered);
    Ok(Outcome::ok())
}
