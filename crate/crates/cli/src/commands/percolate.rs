use std::io::Write;

use anyhow::Result;
use rayon::prelude::*;

use nestperc::analysis::wilson_interval;
use nestperc::lattice::SimBox;
use nestperc::percolation::{clusters, sample_open_graph};
use nestperc::rng;

use crate::config::{precondition, Config};
use crate::manifest::ManifestBuilder;
use crate::Outcome;

pub fn run(cfg: &Config) -> Result<Outcome> {
    let params = cfg.params(true)?;
    let l: i64 = cfg.require("L")?;
    let n_reps: u64 = cfg.require("n_reps")?;
    let seed = cfg.seed()?;
    let model = super::model_from(cfg, &params)?;
    let bbox = SimBox::new(l, params.d).map_err(precondition)?;

    let dir = super::out_dir(cfg)?;
    let mut mb = ManifestBuilder::new("percolate", cfg);

    let rows: Vec<(u64, bool, usize, f64, u64)> = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = rng::hash_key(seed, rng::Stream::Sequence, &[rep]);
            let g = sample_open_graph(bbox, &model, &params, rep_seed)
                .expect("sampling failed mid-run");
            let cs = clusters(&g);
            (
                rep_seed,
                cs.crossing,
                cs.origin_size,
                cs.largest_fraction,
                g.n_edges,
            )
        })
        .collect();

    let csv_path = dir.join("replicas.csv");
    let mut f = std::fs::File::create(&csv_path)?;
    writeln!(
        f,
        "seed,L,alpha,rho,p,model,crossing,origin_size,largest_fraction,n_open_edges"
    )?;
    for (rs, crossing, origin, frac, edges) in &rows {
        writeln!(
            f,
            "{rs},{l},{},{},{},{},{},{origin},{frac:.6},{edges}",
            params.alpha,
            params.rho,
            params.p,
            model.token(),
            u8::from(*crossing)
        )?;
    }
    drop(f);
    mb.record(&csv_path)?;

    if cfg.get_or("dump_edges", false)? {
        let g = sample_open_graph(
            bbox,
            &model,
            &params,
            rng::hash_key(seed, rng::Stream::Sequence, &[0]),
        )
        .map_err(precondition)?;
        let edges_path = dir.join("edges.txt");
        let mut f = std::fs::File::create(&edges_path)?;
        g.write_edges(&mut f)?;
        mb.record(&edges_path)?;
    }
    mb.write(&dir)?;

    let hits = rows.iter().filter(|r| r.1).count() as u64;
    let (lo, hi) = wilson_interval(hits, n_reps);
    println!(
        "crossing frequency: {:.4} [{lo:.4}, {hi:.4}] over {n_reps} replicas (L={l}, {})",
        hits as f64 / n_reps as f64,
        model.token()
    );
    println!("wrote {}", csv_path.display());
    Ok(Outcome::ok())
}
