//! Wulff shapes, anisotropic perimeters and the bounding radii `r₁ ≤ F° ≤ r₂` of a few
//! domains.

use iamcf::flow::unit_wulff_perimeter;
use iamcf::wulff::{anisotropic_perimeter, bounding_radii, ellipse_domain, perturbed_wulff, rounded_rectangle, wulff_boundary, FourierMode};
use iamcf::{MinkowskiNorm, WulffShapeSpec};

fn main() -> iamcf::Result<()> {
    let norm = MinkowskiNorm::ellipse_diag(4.0, 1.0)?;
    let unit = unit_wulff_perimeter(&norm)?;
    println!("{}: |dW|_F = {unit:.8} (4 pi = {:.8})", norm.label(), 4.0 * std::f64::consts::PI);

    let domains = [
        ("Wulff r = 2", wulff_boundary(&norm, WulffShapeSpec::centered(2.0)?, 512)?),
        ("ellipse 1.5 x 1", ellipse_domain(1.5, 1.0, 512)?),
        ("rounded rectangle", rounded_rectangle(1.5, 1.0, 0.3, 512)?),
        ("perturbed Wulff", perturbed_wulff(&norm, 1.0, &[FourierMode { k: 3, cos: 0.3, sin: 0.0 }], 512)?),
    ];
    println!("\n{:<20} {:>10} {:>8} {:>8} {:>8} {:>7}", "domain", "|dO|_F", "r1", "r2", "r2/r1", "convex");
    for (name, d) in &domains {
        let r = bounding_radii(&norm, d)?;
        println!("{name:<20} {:>10.5} {:>8.4} {:>8.4} {:>8.4} {:>7}", anisotropic_perimeter(&norm, d), r.r1, r.r2, r.r2 / r.r1, d.is_convex());
    }
    Ok(())
}
