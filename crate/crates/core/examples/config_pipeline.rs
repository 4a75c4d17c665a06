//! Load a JSON experiment config, run every pipeline it supports and write the
//! artifacts. Usage: `cargo run --example config_pipeline -- configs/perturbed_flow.json`.

use std::path::PathBuf;

use iamcf::config::ExperimentConfig;
use iamcf::{report, run};

fn main() -> iamcf::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| [env!("CARGO_MANIFEST_DIR"), "configs", "perturbed_flow.json"].iter().collect());
    let cfg = ExperimentConfig::load(&path)?;
    let out = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out/config_pipeline"));
    println!("{} ({})", path.display(), cfg.name.as_deref().unwrap_or("unnamed"));

    let info = run::norm_info(&cfg)?;
    println!("norm {}: C1 {:.5}, |dW|_F {:.6}", info.norm, info.c1, info.wulff_perimeter);

    let flow = run::flow(&cfg)?;
    let a = &flow.summary.asymptotics;
    println!("flow: gamma {:.5}, hull perimeter {:.5}, slope {:.4}", a.gamma_estimate, a.perimeter_fit.hull_perimeter, a.perimeter_fit.slope);
    let dir = out.join("flow");
    std::fs::create_dir_all(&dir)?;
    for f in report::write_flow(&dir, &cfg, &flow)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
