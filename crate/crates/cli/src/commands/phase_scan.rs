use std::io::Write;

use anyhow::Result;

use nestperc::analysis::{classify_cell, PhaseClass};
use nestperc::netmodels::Params;

use crate::config::{precondition, Config};
use crate::manifest::ManifestBuilder;
use crate::svg::PhaseDiagram;
use crate::Outcome;

fn grid(cfg: &Config, key: &str) -> Result<Vec<f64>> {
    if let Some(raw) = cfg.raw(&format!("{key}_list")) {
        return raw
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow::anyhow!("config key \"{key}_list\" item {t:?}: {e}"))
            })
            .collect();
    }
    let min: f64 = cfg.require(&format!("{key}_min"))?;
    let max: f64 = cfg.require(&format!("{key}_max"))?;
    let steps: usize = cfg.require(&format!("{key}_steps"))?;
    if steps == 0 {
        return Ok(Vec::new());
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps)
        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
        .collect())
}

pub fn run(cfg: &Config) -> Result<Outcome> {
    let d: u32 = cfg.get_or("d", 2)?;
    let z: i64 = cfg.get_or("z", 2)?;
    let p: f64 = cfg.require("p")?;
    let alphas = grid(cfg, "alpha")?;
    let rhos = grid(cfg, "rho")?;
    let l_list: Vec<i64> = cfg.get_list("L_list", &[32, 64])?;
    let n_reps: u64 = cfg.get_or("n_reps", 200)?;
    let gw_truncation: u32 = cfg.get_or("gw_truncation", 200)?;
    let seed = cfg.seed()?;

    let dir = super::out_dir(cfg)?;
    let mut mb = ManifestBuilder::new("phase-scan", cfg);

    let csv_path = dir.join("phase_scan.csv");
    let classes_path = dir.join("phase_classes.csv");
    let mut csv = std::fs::File::create(&csv_path)?;
    let mut classes = std::fs::File::create(&classes_path)?;
    writeln!(csv, "alpha,rho,p,L,n,crossing_freq,ci_low,ci_high")?;
    writeln!(classes, "alpha,rho,p,class,gw_root")?;

    let mut cells = Vec::new();
    for &alpha in &alphas {
        for &rho in &rhos {
            let params = Params::new(d, z, alpha, rho, p).map_err(precondition)?;
            let (class, root, ests) =
                classify_cell(&params, &l_list, n_reps, gw_truncation, seed)
                    .map_err(precondition)?;
            for e in &ests {
                writeln!(
                    csv,
                    "{alpha},{rho},{p},{},{},{:.6},{:.6},{:.6}",
                    e.l, e.n, e.p_hat, e.ci_low, e.ci_high
                )?;
            }
            let class_name = match class {
                PhaseClass::CertifiedSubcritical => "certified-subcritical",
                PhaseClass::Percolating => "percolating",
                PhaseClass::Unclassified => "unclassified",
            };
            let boundary = (rho - alpha / (z as f64).powi(d as i32)).abs() < 1e-12;
            writeln!(
                classes,
                "{alpha},{rho},{p},{}{},{}",
                class_name,
                if boundary { " (boundary line: unclassified by theory)" } else { "" },
                root.map(|r| format!("{r:.6}")).unwrap_or_default()
            )?;
            cells.push((alpha, rho, class));
        }
    }
    drop(csv);
    drop(classes);

    let svg_path = dir.join("phase_diagram.svg");
    let alpha_max = alphas.iter().copied().fold(1.0f64, f64::max).max(
        (z as f64).powi(d as i32) * 1.1,
    );
    let diagram = PhaseDiagram {
        z,
        d,
        alpha_max,
        cells,
        p,
    };
    std::fs::write(&svg_path, diagram.render())?;

    mb.record(&csv_path)?;
    mb.record(&classes_path)?;
    mb.record(&svg_path)?;
    mb.write(&dir)?;
    println!(
        "scanned {} cells; wrote {}, {}, {}",
        alphas.len() * rhos.len(),
        csv_path.display(),
        classes_path.display(),
        svg_path.display()
    );
    Ok(Outcome::ok())
}
