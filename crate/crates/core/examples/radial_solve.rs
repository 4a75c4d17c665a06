//! Capacitary potentials of a Wulff shape against the closed-form radial profile, for a
//! range of exponents.

use std::sync::Arc;

use iamcf::pharmonic::{radial_reference, solve_capacitary, to_flow_variable, truncated_exterior_mesh, SolverConfig};
use iamcf::wulff::wulff_boundary;
use iamcf::{MinkowskiNorm, WulffShapeSpec};

fn main() -> iamcf::Result<()> {
    let norm = MinkowskiNorm::ellipse_diag(4.0, 1.0)?;
    let (r0, l) = (1.0, 20.0);
    let inner = wulff_boundary(&norm, WulffShapeSpec::centered(r0)?, 256)?;
    let mesh = Arc::new(truncated_exterior_mesh(&norm, inner, l, 64, 256)?);
    println!("{} nodes, {} triangles", mesh.node_count(), mesh.triangle_count());
    // Columns: error against the exact potential, and the distance of u_p from its
    // p -> 1 limit log(F°/r0) on [1.5 r0, L/4], which shrinks like p - 1.
    println!("{:>6} {:>6} {:>12} {:>18}", "p", "iters", "max |v - v_p|", "max |u_p - log F°|");
    for p in [2.0, 1.5, 1.2, 1.1, 1.05] {
        let sol = solve_capacitary(&norm, mesh.clone(), &SolverConfig::new(p, l))?;
        let u = to_flow_variable(&sol.field)?;
        let (mut dv, mut du): (f64, f64) = (0.0, 0.0);
        for (k, x) in mesh.nodes().iter().enumerate() {
            dv = dv.max((sol.field.values()[k] - radial_reference(&norm, p, r0, l, *x)?).abs());
            let r = norm.dual(*x)?;
            if (1.5 * r0..=l / 4.0).contains(&r) {
                du = du.max((u.values()[k] - (r / r0).ln()).abs());
            }
        }
        println!("{p:>6} {:>6} {dv:>12.3e} {du:>18.4e}", sol.iterations());
    }
    Ok(())
}
