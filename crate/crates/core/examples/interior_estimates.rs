//! Interior gradient constants on Wulff balls, swept over p for each kind of boundary
//! data.

use iamcf::estimates::{p_uniformity_sweep, BoundaryProfile, LocalEstimateCase, Resolution};
use iamcf::MinkowskiNorm;

fn main() -> iamcf::Result<()> {
    let profiles = [
        BoundaryProfile::Constant,
        BoundaryProfile::Tilted { direction: [1.0, 0.3], contrast: 10.0 },
        BoundaryProfile::TranslatedRadial { direction: [1.0, 0.5], distance: 1.5 },
    ];
    let p_list = [2.0, 1.5, 1.2, 1.05];
    for norm in [MinkowskiNorm::euclidean(), MinkowskiNorm::blend_lq(4.0, 0.5)?] {
        for profile in &profiles {
            let template = LocalEstimateCase { norm: norm.clone(), radius: 1.0, p: 2.0, profile: profile.clone() };
            let t = p_uniformity_sweep(&template, &p_list, Resolution::default())?;
            println!("{} {}  ratio {:.4}", t.norm, serde_json::to_string(&t.profile).unwrap_or_default(), t.ratio);
            for r in &t.rows {
                let exact = r.analytic.map(|a| format!("  exact {a:.5}  v error {:.2e}", r.max_error.unwrap_or(f64::NAN))).unwrap_or_default();
                println!("    p = {:<5} {:.5}{exact}", r.p, r.result);
            }
        }
    }
    Ok(())
}
