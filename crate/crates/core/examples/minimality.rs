//! Spot check of the variational characterization: level curves of the extrapolated
//! flow against random normal perturbations.

use iamcf::acceptance::radial_config;
use iamcf::config::{DomainSpec, MinimalitySpec};
use iamcf::flow::minimality_check;
use iamcf::run;

fn main() -> iamcf::Result<()> {
    for (name, domain) in [("Wulff r = 1", DomainSpec::Wulff { radius: 1.0 }), ("rounded rectangle", DomainSpec::RoundedRectangle { width: 1.5, height: 1.0, corner_radius: 0.3 })] {
        let mut cfg = radial_config();
        cfg.domain = domain;
        cfg.minimality = Some(MinimalitySpec { levels: 3, competitors: 20 });
        let o = run::flow(&cfg)?;
        println!("{name}");
        for m in &o.summary.minimality {
            println!("  t = {:.4}  J = {:.5}  best undercut {:+.3e}  slack {:.3e}  passed {}", m.t, m.j_level, m.best_improvement, m.slack, m.passed);
        }
        // A larger, differently seeded batch on the middle level.
        if let Some(m) = o.summary.minimality.get(1) {
            let again = minimality_check(&o.setup.norm, &o.run.extrapolated, m.t, 100, 99)?;
            println!("  100 competitors at t = {:.4}: best undercut {:+.3e}, passed {}", again.t, again.best_improvement, again.passed);
        }
    }
    Ok(())
}
