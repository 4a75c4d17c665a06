//! p-continuation outside an ellipse: eccentricity decay, perimeter growth, the
//! asymptotic constant and the gradient table. Figures go to `out/continuation_flow`.

use iamcf::config::{DomainSpec, ExperimentConfig, MeshSpec, NormSpec, TGridSpec};
use iamcf::{report, run};

fn main() -> iamcf::Result<()> {
    let mut cfg = ExperimentConfig::new(NormSpec::Euclidean {}, DomainSpec::Ellipse { a: 2.0, b: 1.0 });
    cfg.mesh = MeshSpec { layers: 96, rays: 384, segments: 256 };
    cfg.solver.outer_radius_l = Some(40.0);
    cfg.t_grid = TGridSpec::Auto { count: 12, lo_fraction: 0.05 };
    let o = run::flow(&cfg)?;
    let s = &o.summary;

    println!("{:>6} {:>6}", "p", "iters");
    for st in &s.stages {
        println!("{:>6} {:>6}", st.p, st.iterations);
    }
    println!("\n{:>8} {:>8} {:>12} {:>8}", "t", "theta", "|dE_t|_F", "trusted");
    for l in &s.asymptotics.levels {
        println!("{:>8.4} {:>8.5} {:>12.5} {:>8}", l.t, l.theta, l.perimeter_f, l.trusted);
    }
    let a = &s.asymptotics;
    println!("\nperimeter slope {:.4}, hull perimeter {:.4} (|dO|_F = {:.4})", a.perimeter_fit.slope, a.perimeter_fit.hull_perimeter, s.domain_perimeter);
    println!("gamma {:.5}, from the hull {:.5}", a.gamma_estimate, a.gamma_theory);
    println!("\n{:>6} {:>10} {:>10}", "p", "sup F(Du)F°", "at F°");
    for g in &s.gradient_bounds {
        println!("{:>6} {:>10.4} {:>10.3}", g.p, g.bound.sup, g.bound.argmax_dual);
    }

    let dir = std::path::Path::new("out/continuation_flow");
    std::fs::create_dir_all(dir)?;
    for f in report::write_flow(dir, &cfg, &o)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
