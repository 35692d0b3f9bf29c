pub mod compare_longrange;
pub mod degree_tail;
pub mod ladder;
pub mod oracle_cmd;
pub mod percolate;
pub mod phase_scan;
pub mod verify;

use std::path::PathBuf;

use anyhow::{Context, Result};

use crate::config::Config;

/// Resolve and create the output directory.
pub fn out_dir(cfg: &Config) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.raw("out_dir").unwrap_or("out"));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output dir {}", dir.display()))?;
    Ok(dir)
}

/// Build the model named in the config, deriving comparison-model constants
/// from the main parameters.
pub fn model_from(cfg: &Config, params: &nestperc::Params) -> Result<nestperc::ModelKind> {
    use nestperc::ModelKind;
    let name = cfg.raw("model").unwrap_or("nested");
    Ok(match name {
        "nested" => ModelKind::Nested,
        "distance" => ModelKind::DistanceGated,
        "directed-pair" => ModelKind::DirectedPair {
            beta: params.alpha.sqrt(),
        },
        "long-range" => {
            let (s, beta) =
                nestperc::netmodels::longrange_params_from(params).map_err(crate::config::precondition)?;
            ModelKind::LongRange { beta, s }
        }
        "yukich" => ModelKind::Yukich {
            s: (params.z as f64).ln() / params.alpha.ln(),
        },
        other => anyhow::bail!("config key \"model\" has unknown value {other:?}"),
    })
}
