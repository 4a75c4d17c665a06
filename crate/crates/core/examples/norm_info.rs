//! Identity checks, Hessian bounds and the `C₁` constant for the three norm families.

use iamcf::flow::unit_wulff_perimeter;
use iamcf::{Mat2, MinkowskiNorm, Vec2};

fn main() -> iamcf::Result<()> {
    let norms = [
        MinkowskiNorm::euclidean(),
        MinkowskiNorm::ellipse(Mat2::new(4.0, 0.0, 0.0, 1.0))?,
        MinkowskiNorm::blend_lq(4.0, 0.5)?,
    ];
    println!("{:<28} {:>12} {:>10} {:>10} {:>10}", "norm", "violation", "min eig", "C1", "|dW|_F");
    for n in &norms {
        let ids = n.verify_identities(1000, 7)?;
        let min_eig = (0..360)
            .map(|k| {
                let t = (k as f64).to_radians();
                n.jet(Vec2::new(t.cos(), t.sin())).map(|j| j.hessian_g.symmetric_eigenvalues().min())
            })
            .collect::<iamcf::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        println!("{:<28} {:>12.3e} {:>10.4} {:>10.4} {:>10.6}", n.label(), ids.max_violation, min_eig, n.estimate_c1(96, 96), unit_wulff_perimeter(n)?);
    }

    // F° and its maximizer for one vector.
    let n = &norms[2];
    let x = Vec2::new(1.0, 1.0);
    let d = n.dual_gradient(x)?;
    println!("\n{}: F°(1, 1) = {:.12}, attained at ξ = ({:.6}, {:.6}) with F(ξ) = {:.12}", n.label(), n.dual(x)?, d.x, d.y, n.eval(d));
    Ok(())
}
