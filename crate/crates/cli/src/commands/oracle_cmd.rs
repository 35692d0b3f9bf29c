use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Result};

use nestperc::lattice::SimBox;
use nestperc::netmodels::ModelKind;
use nestperc::oracle::{self, TruncationSpec};

use crate::config::{precondition, Config};
use crate::manifest::ManifestBuilder;
use crate::Outcome;

fn coords(cfg: &Config, key: &str) -> Result<Vec<i64>> {
    let raw = cfg
        .raw(key)
        .ok_or_else(|| anyhow::anyhow!("missing required config key {key:?}"))?;
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| anyhow::anyhow!("config key {key:?} item {t:?}: {e}"))
        })
        .collect()
}

pub fn run(cfg: &Config) -> Result<Outcome> {
    let op: String = cfg.require("op")?;
    let params = cfg.params(true)?;
    let cache_dir = std::env::var("NESTPERC_CACHE_DIR").ok().map(PathBuf::from);

    let value = match op.as_str() {
        "edge" => {
            let u = coords(cfg, "u")?;
            let v = coords(cfg, "v")?;
            let key = format!(
                "edge d={} z={} alpha={} rho={} p={} u={u:?} v={v:?}",
                params.d, params.z, params.alpha, params.rho, params.p
            );
            oracle::cached_or_compute(cache_dir.as_deref(), &key, || {
                oracle::exact_edge_prob(&u, &v, &params)
            })
            .map_err(precondition)?
        }
        "connection" => {
            let l: i64 = cfg.get_or("L", 3)?;
            let source = coords(cfg, "source")?;
            let target = coords(cfg, "target")?;
            let cap: u32 = cfg.get_or("height_cap", 3)?;
            let capped: bool = cfg.get_or("capped_model", false)?;
            let model: ModelKind = super::model_from(cfg, &params)?;
            let bbox = SimBox::new(l, params.d).map_err(precondition)?;
            let trunc = if capped {
                TruncationSpec::capped(cap)
            } else {
                TruncationSpec::absorbed(cap)
            };
            let key = format!(
                "connection d={} z={} alpha={} rho={} p={} delta={} L={l} model={} src={source:?} \
                 tgt={target:?} cap={cap} capped={capped}",
                params.d, params.z, params.alpha, params.rho, params.p, params.delta, model
            );
            oracle::cached_or_compute(cache_dir.as_deref(), &key, || {
                oracle::exact_connection_prob(bbox, &source, &target, &params, &model, trunc)
                    .map(|c| c.value)
                    .unwrap_or(f64::NAN)
            })
            .map_err(precondition)?
        }
        "degree-ccdf" => {
            let l: i64 = cfg.require("L")?;
            let v = coords(cfg, "v")?;
            let h: u32 = cfg.require("h")?;
            let bbox = SimBox::new(l, params.d).map_err(precondition)?;
            let key = format!(
                "degree-ccdf d={} z={} alpha={} L={l} v={v:?} h={h}",
                params.d, params.z, params.alpha
            );
            oracle::cached_or_compute(cache_dir.as_deref(), &key, || {
                oracle::exact_degree_ccdf(bbox, &v, &params, h, TruncationSpec::absorbed(10))
                    .unwrap_or(f64::NAN)
            })
            .map_err(precondition)?
        }
        other => bail!("config key \"op\" has unknown value {other:?} (edge | connection | degree-ccdf)"),
    };

    if value.is_nan() {
        bail!("oracle computation failed (budget exceeded or unsupported model)");
    }

    let dir = super::out_dir(cfg)?;
    let mut mb = ManifestBuilder::new("oracle", cfg);
    let path = dir.join("oracle_report.txt");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "op = {op}")?;
    writeln!(f, "value = {value:.17e}")?;
    drop(f);
    mb.record(&path)?;
    mb.write(&dir)?;

    println!("{value:.17e}");
    Ok(Outcome::ok())
}
