//! Artifact writers: `report.json`, `levels.csv`, `iters.csv` and SVG figures. Outputs
//! depend only on their inputs, so reruns with the same config are byte-identical.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::error::Result;
use crate::estimates::SweepTable;
use crate::flow::{extract_level_set, LevelSetStats};
use crate::pharmonic::IterRecord;
use crate::run::{FlowOutcome, NormInfo, SolveOutcome};
use crate::svg::{level_figure, perimeter_figure, Figure, Style};
use crate::wulff::{wulff_boundary, WulffShapeSpec};
use crate::Vec2;

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `p,iter,energy,residual,step,backtracks` for every stage.
pub fn write_iters_csv(path: impl AsRef<Path>, logs: &[(f64, &[IterRecord])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["p", "iter", "energy", "residual", "step", "backtracks"])?;
    for (p, log) in logs {
        for r in *log {
            w.write_record([p.to_string(), r.iter.to_string(), r.energy.to_string(), r.residual.to_string(), r.step.to_string(), r.backtracks.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,R,r,theta,perimeter_F,components,trusted` per level.
pub fn write_levels_csv(path: impl AsRef<Path>, levels: &[LevelSetStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "R", "r", "theta", "perimeter_F", "components", "trusted"])?;
    for s in levels {
        w.write_record([
            s.t.to_string(),
            s.r_max.to_string(),
            s.r_min.to_string(),
            s.theta.to_string(),
            s.perimeter_f.to_string(),
            s.components.to_string(),
            s.trusted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep rows keyed by `(norm, profile, p, resolution)`.
pub fn write_estimates_csv(path: impl AsRef<Path>, tables: &[SweepTable]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["norm", "profile", "p", "layers", "rays", "result", "analytic", "max_error", "min_v", "iterations"])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for t in tables {
        let profile = serde_json::to_string(&t.profile)?;
        for r in &t.rows {
            w.write_record([
                t.norm.clone(),
                profile.clone(),
                r.p.to_string(),
                t.resolution.layers.to_string(),
                t.resolution.rays.to_string(),
                r.result.to_string(),
                opt(r.analytic),
                opt(r.max_error),
                r.min_v.to_string(),
                r.iterations.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    name: Option<&'a str>,
    rng_seed: u64,
    config: &'a ExperimentConfig,
    result: &'a T,
}

fn envelope<'a, T: Serialize>(command: &'a str, cfg: &'a ExperimentConfig, result: &'a T) -> Envelope<'a, T> {
    Envelope { command, name: cfg.name.as_deref(), rng_seed: cfg.rng_seed, config: cfg, result }
}

pub fn write_norm_info(dir: &Path, cfg: &ExperimentConfig, info: &NormInfo) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if cfg.wants(Format::Json) {
        out.push(dir.join("report.json"));
        write_json(&out[out.len() - 1], &envelope("norm-info", cfg, info))?;
    }
    if cfg.wants(Format::Svg) {
        let circle: Vec<Vec2> = (0..256).map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 256.0;
            Vec2::new(t.cos(), t.sin())
        }).collect();
        let mut fig = Figure::around(info.wulff.vertices().iter().copied().chain(circle.iter().copied()), &format!("unit Wulff shape, {}", info.norm));
        fig.polyline(&circle, true, &Style::dashed("#999", 1.0));
        fig.curve(&info.wulff, &Style::solid("#227", 2.0));
        out.push(dir.join("wulff.svg"));
        fig.save(&out[out.len() - 1])?;
    }
    Ok(out)
}

pub fn write_solve(dir: &Path, cfg: &ExperimentConfig, o: &SolveOutcome) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if cfg.wants(Format::Json) {
        out.push(dir.join("report.json"));
        write_json(&out[out.len() - 1], &envelope("solve", cfg, &o.summary))?;
    }
    if cfg.wants(Format::Csv) {
        out.push(dir.join("iters.csv"));
        write_iters_csv(&out[out.len() - 1], &[(o.summary.p, o.solution.log.as_slice())])?;
        out.push(dir.join("field.csv"));
        o.solution.field.write_csv(&out[out.len() - 1])?;
    }
    if cfg.wants(Format::Svg) {
        // Potential contours at v = 0.9, 0.8, ..., 0.1, traced as levels of 1 - v.
        let v = &o.solution.field;
        let flipped = v.with_values(v.values().iter().map(|x| 1.0 - x).collect(), crate::Quantity::FlowU, v.p())?;
        let contours: Vec<_> = (1..10).filter_map(|k| extract_level_set(&flipped, 0.1 * k as f64).ok()).collect();
        let pts: Vec<Vec2> = contours.iter().flatten().flat_map(|c| c.vertices().iter().copied()).chain(o.setup.domain.vertices().iter().copied()).collect();
        let mut fig = Figure::around(pts, &format!("v_p contours, p = {}", o.summary.p));
        for (k, curves) in contours.iter().enumerate() {
            for c in curves {
                fig.curve(c, &Style::solid(&crate::svg::ramp(k, contours.len()), 1.0));
            }
        }
        fig.curve(&o.setup.domain, &Style::solid("black", 2.0));
        out.push(dir.join("solve.svg"));
        fig.save(&out[out.len() - 1])?;
    }
    Ok(out)
}

pub fn write_flow(dir: &Path, cfg: &ExperimentConfig, o: &FlowOutcome) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let s = &o.summary;
    if cfg.wants(Format::Json) {
        out.push(dir.join("report.json"));
        write_json(&out[out.len() - 1], &envelope("flow", cfg, s))?;
    }
    if cfg.wants(Format::Csv) {
        out.push(dir.join("levels.csv"));
        write_levels_csv(&out[out.len() - 1], &s.asymptotics.levels)?;
        out.push(dir.join("iters.csv"));
        write_iters_csv(&out[out.len() - 1], &o.logs())?;
    }
    if cfg.wants(Format::Svg) {
        let a = &s.asymptotics;
        // Wulff comparators e^{t - γ} 𝒲 for the trusted levels.
        let comparators = a
            .levels
            .iter()
            .filter(|l| l.trusted)
            .map(|l| wulff_boundary(&o.setup.norm, WulffShapeSpec::centered((l.t - a.gamma_estimate).exp())?, 256))
            .collect::<Result<Vec<_>>>()?;
        let fig = level_figure(&format!("level sets of u, {}", s.norm), Some(&o.setup.domain), &a.levels, &comparators);
        out.push(dir.join("levels.svg"));
        fig.save(&out[out.len() - 1])?;
        out.push(dir.join("perimeter.svg"));
        perimeter_figure(&a.levels, &a.perimeter_fit).save(&out[out.len() - 1])?;
    }
    Ok(out)
}

pub fn write_estimates(dir: &Path, cfg: &ExperimentConfig, tables: &[SweepTable]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if cfg.wants(Format::Json) {
        out.push(dir.join("report.json"));
        write_json(&out[out.len() - 1], &envelope("estimates", cfg, &tables))?;
    }
    if cfg.wants(Format::Csv) {
        out.push(dir.join("estimates.csv"));
        write_estimates_csv(&out[out.len() - 1], tables)?;
    }
    Ok(out)
}
