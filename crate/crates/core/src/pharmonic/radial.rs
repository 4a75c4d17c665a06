use crate::error::{Error, Result};
use crate::norm::MinkowskiNorm;
use crate::Vec2;

/// Radial p-capacitary profile in the plane between `F° = a` (value 1) and `F° = b`
/// (value 0), evaluated at `F° = r`. With `k = (2 - p)/(p - 1)` this is
/// `(r^{-k} - b^{-k}) / (a^{-k} - b^{-k})`, and `log(b/r)/log(b/a)` at `p = 2`.
pub fn radial_profile(p: f64, a: f64, b: f64, r: f64) -> f64 {
    let k = (2.0 - p) / (p - 1.0);
    let (x, lam) = ((r / a).ln(), (b / a).ln());
    if k == 0.0 {
        return (lam - x) / lam;
    }
    // r^{-k}/a^{-k} · (1 - (r/b)^k) / (1 - (a/b)^k), written to survive both k → 0 and
    // very large k.
    let num = (-k * (lam - x)).exp_m1();
    let den = (-k * lam).exp_m1();
    (-k * x).exp() * num / den
}

/// Inverse of [`radial_profile`] in `r`; the result is clamped to `[a, b]`.
pub fn radial_profile_inverse(p: f64, a: f64, b: f64, v: f64) -> f64 {
    let lam = (b / a).ln();
    let k = (2.0 - p) / (p - 1.0);
    let v = v.clamp(0.0, 1.0);
    let x = if k == 0.0 {
        lam * (1.0 - v)
    } else {
        // exp(-k x) = q + v (1 - q) with q = exp(-k lam).
        let one_minus_q = -(-k * lam).exp_m1();
        let q = (-k * lam).exp();
        let w = if q > 0.5 { (-(1.0 - v) * one_minus_q).ln_1p() } else { (q + v * one_minus_q).ln() };
        -w / k
    };
    a * x.clamp(0.0, lam).exp()
}

/// Exact p-capacitary potential of `𝒲_{r0}` inside `𝒲_L`, evaluated at `x`.
pub fn radial_reference(norm: &MinkowskiNorm, p: f64, r0: f64, l: f64, x: Vec2) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) || !(r0 > 0.0 && l > r0) {
        return Err(Error::Config(format!("radial reference needs 1 < p <= 2 and 0 < r0 < L (p = {p}, r0 = {r0}, L = {l})")));
    }
    let r = norm.dual(x)?;
    if r < r0 * (1.0 - 1e-12) {
        return Err(Error::OutOfRange(format!("F°(x) = {r} is inside the inner Wulff shape of radius {r0}")));
    }
    Ok(radial_profile(p, r0, l, r.clamp(r0, l)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn boundary_values() {
        let n = MinkowskiNorm::ellipse_diag(4.0, 1.0).unwrap();
        for p in [1.01, 1.3, 1.5, 1.9, 2.0] {
            assert_relative_eq!(radial_reference(&n, p, 1.0, 20.0, Vec2::new(2.0, 0.0)).unwrap(), 1.0, epsilon = 1e-12);
            assert!(radial_reference(&n, p, 1.0, 20.0, Vec2::new(0.0, 20.0)).unwrap().abs() < 1e-12);
        }
        assert!(matches!(radial_reference(&n, 1.5, 1.0, 20.0, Vec2::new(0.5, 0.0)), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn closed_form_for_moderate_k() {
        // p = 1.5: k = 1, v = (1/r - 1/b)/(1/a - 1/b).
        for r in [1.0, 2.5, 7.0, 10.0] {
            let expect = (1.0 / r - 0.1) / (1.0 - 0.1);
            assert_relative_eq!(radial_profile(1.5, 1.0, 10.0, r), expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn radial_flux_is_constant() {
        // (r |v'|^{p-2} v')' = 0: the flux r|v'|^{p-1} is independent of r. v' is taken
        // from the closed-form derivative of r^{-k}.
        for p in [1.05, 1.2, 1.5, 1.8] {
            let k: f64 = (2.0 - p) / (p - 1.0);
            let (a, b) = (1.0f64, 20.0f64);
            let den = a.powf(-k) - b.powf(-k);
            let flux = |r: f64| r * (k * r.powf(-k - 1.0) / den).powf(p - 1.0);
            let f0 = flux(a);
            for i in 0..100 {
                let r = a + (b - a) * i as f64 / 99.0;
                assert!((flux(r) / f0 - 1.0).abs() < 1e-10);
                // The implementation agrees with the textbook form.
                let direct = (r.powf(-k) - b.powf(-k)) / den;
                assert!((radial_profile(p, a, b, r) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for p in [1.01, 1.05, 1.5, 1.99, 2.0] {
            for r in [1.0, 1.3, 4.0, 17.0, 39.0] {
                let v = radial_profile(p, 1.0, 40.0, r);
                if v > 1e-290 {
                    assert_relative_eq!(radial_profile_inverse(p, 1.0, 40.0, v), r, max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn flow_variable_limit_at_small_p() {
        // p = 1.01, L = 1e4 r0, F°(x) = 2 r0: (1 - p) log v is within 1% of log 2.
        let n = MinkowskiNorm::euclidean();
        let v = radial_reference(&n, 1.01, 1.0, 1e4, Vec2::new(2.0, 0.0)).unwrap();
        let u = (1.0 - 1.01) * v.ln();
        // The exact value is (2 - p) log 2 up to truncation, right at the 1% mark.
        assert!((u / 2f64.ln() - 1.0).abs() <= 0.01 + 1e-9, "u = {u}");
    }
}
