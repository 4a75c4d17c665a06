//! Smooth planar Minkowski norms `F`, their dual norms `F°`, and the derivative
//! data of `G = F²/2` used by the solver.
//!
//! Three families are provided:
//!
//! * `Euclidean`: `F(ξ) = |ξ|`.
//! * `Ellipse`: `F(ξ) = sqrt(ξᵀAξ)` for a symmetric positive-definite `A`.
//! * `BlendLq`: `F(ξ) = sqrt((1-λ)|ξ|² + λ‖ξ‖_q²)`, an ℓ^q norm regularized by a
//!   Euclidean component so that `D²G` stays positive definite on the axes.
//!
//! The dual norm is available in closed form for the first two families and by
//! one-dimensional angular maximization over the unit `F`-circle otherwise.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::{Mat2, Vec2};

/// Relative step of the central differences used for `D³G` of the blended norm.
const THIRD_DERIVATIVE_STEP: f64 = 1e-4;
/// Stopping tolerance of the Newton polish in the numeric dual.
const DUAL_POLISH_TOL: f64 = 1e-10;
const DUAL_POLISH_MAX_STEPS: usize = 100;
/// Coarse angular grid used to bracket the maximizer of `⟨x, ξ⟩` on `{F = 1}`.
const DUAL_COARSE_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum NormFamily {
    Euclidean,
    Ellipse(Mat2),
    BlendLq { q: f64, lambda: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum DualMode {
    ClosedForm,
    Numeric,
}

/// Value, gradient `DF` and `D²G` of a norm at a nonzero vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormJet {
    pub value: f64,
    pub gradient: Vec2,
    pub hessian_g: Mat2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinkowskiNorm {
    family: NormFamily,
    dual_mode: DualMode,
    inverse: Mat2,
}

impl MinkowskiNorm {
    pub fn euclidean() -> Self {
        Self { family: NormFamily::Euclidean, dual_mode: DualMode::ClosedForm, inverse: Mat2::identity() }
    }

    /// `F(ξ) = sqrt(ξᵀAξ)`; `A` must be symmetric positive definite.
    pub fn ellipse(a: Mat2) -> Result<Self> {
        if (a[(0, 1)] - a[(1, 0)]).abs() > 1e-12 * a.norm() {
            return Err(Error::Config("ellipse matrix must be symmetric".into()));
        }
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        if !(a[(0, 0)] > 0.0 && det > 0.0) {
            return Err(Error::Config("ellipse matrix must be positive definite".into()));
        }
        let inverse = a.try_inverse().ok_or_else(|| Error::Config("singular ellipse matrix".into()))?;
        Ok(Self { family: NormFamily::Ellipse(a), dual_mode: DualMode::ClosedForm, inverse })
    }

    /// Diagonal ellipse norm `sqrt(a ξ₁² + b ξ₂²)`.
    pub fn ellipse_diag(a: f64, b: f64) -> Result<Self> {
        Self::ellipse(Mat2::new(a, 0.0, 0.0, b))
    }

    /// `F(ξ) = sqrt((1-λ)|ξ|² + λ (Σ ξᵢ^q)^{2/q})` with `q` an even integer ≥ 4 and `0 ≤ λ < 1`.
    pub fn blend_lq(q: f64, lambda: f64) -> Result<Self> {
        if !(q >= 4.0 && q.fract() == 0.0 && (q as i64) % 2 == 0) {
            return Err(Error::Config(format!("blend exponent q must be an even integer >= 4, got {q}")));
        }
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Config(format!("blend weight must lie in [0, 1), got {lambda}")));
        }
        Ok(Self { family: NormFamily::BlendLq { q, lambda }, dual_mode: DualMode::Numeric, inverse: Mat2::identity() })
    }

    /// Selects how `F°` is evaluated. The blended family has no closed form.
    pub fn with_dual_mode(mut self, mode: DualMode) -> Result<Self> {
        if mode == DualMode::ClosedForm && matches!(self.family, NormFamily::BlendLq { .. }) {
            return Err(Error::Config("the blended l^q norm has no closed-form dual".into()));
        }
        self.dual_mode = mode;
        Ok(self)
    }

    pub fn family(&self) -> &NormFamily {
        &self.family
    }

    pub fn dual_mode(&self) -> DualMode {
        self.dual_mode
    }

    /// True when `G` is a quadratic form, so that `D²G` is constant and `D³G ≡ 0`.
    pub fn is_quadratic(&self) -> bool {
        !matches!(self.family, NormFamily::BlendLq { .. })
    }

    pub fn label(&self) -> String {
        match &self.family {
            NormFamily::Euclidean => "euclidean".to_string(),
            NormFamily::Ellipse(a) => format!("ellipse[{},{};{},{}]", a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]),
            NormFamily::BlendLq { q, lambda } => format!("blend_lq[q={q},lambda={lambda}]"),
        }
    }

    /// `F(ξ)`.
    pub fn eval(&self, xi: Vec2) -> f64 {
        match &self.family {
            NormFamily::Euclidean => xi.norm(),
            NormFamily::Ellipse(a) => xi.dot(&(a * xi)).max(0.0).sqrt(),
            NormFamily::BlendLq { q, lambda } => {
                let s = xi.amax();
                if s == 0.0 {
                    return 0.0;
                }
                let eta = xi / s;
                let lq = lq_norm(eta, *q);
                s * ((1.0 - lambda) * eta.norm_squared() + lambda * lq * lq).sqrt()
            }
        }
    }

    /// Returns `(F, DG, D²G)` at `ξ`. At `ξ = 0` the first two vanish and `D²G` is
    /// taken along the first coordinate axis (it is only 0-homogeneous there).
    #[inline]
    pub(crate) fn g_parts(&self, xi: Vec2) -> (f64, Vec2, Mat2) {
        match &self.family {
            NormFamily::Euclidean => (xi.norm(), xi, Mat2::identity()),
            NormFamily::Ellipse(a) => {
                let ax = a * xi;
                (xi.dot(&ax).max(0.0).sqrt(), ax, *a)
            }
            NormFamily::BlendLq { q, lambda } => {
                let s = xi.amax();
                if s == 0.0 {
                    let (_, _, h) = blend_parts(Vec2::new(1.0, 0.0), *q, *lambda);
                    return (0.0, Vec2::zeros(), h);
                }
                let (f, dg, h) = blend_parts(xi / s, *q, *lambda);
                (s * f, s * dg, h)
            }
        }
    }

    /// Value, `DF` and `D²G` at a nonzero `ξ`.
    pub fn jet(&self, xi: Vec2) -> Result<NormJet> {
        if !(xi.amax() >= f64::MIN_POSITIVE) || !xi.iter().all(|c| c.is_finite()) {
            return Err(Error::DegenerateInput(format!("norm jet requested at ({}, {})", xi.x, xi.y)));
        }
        let (value, dg, hessian_g) = self.g_parts(xi);
        Ok(NormJet { value, gradient: dg / value, hessian_g })
    }

    /// `DF(ξ)` for nonzero `ξ`.
    pub fn gradient(&self, xi: Vec2) -> Result<Vec2> {
        Ok(self.jet(xi)?.gradient)
    }

    /// Directional derivatives `∂ₖ D²G` for `k = 0, 1` by fourth-order central
    /// differences of `D²G`, for every family alike.
    pub fn third_derivative(&self, xi: Vec2) -> [Mat2; 2] {
        let h = THIRD_DERIVATIVE_STEP * xi.norm();
        let d2 = |v: Vec2| self.g_parts(v).2;
        let mut out = [Mat2::zeros(); 2];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut e = Vec2::zeros();
            e[k] = h;
            *slot = (d2(xi - 2.0 * e) - 8.0 * d2(xi - e) + 8.0 * d2(xi + e) - d2(xi + 2.0 * e)) / (12.0 * h);
        }
        out
    }

    /// Dual norm `F°(x) = sup ⟨x, ξ⟩ / F(ξ)`.
    pub fn dual(&self, x: Vec2) -> Result<f64> {
        if x.amax() == 0.0 {
            return Ok(0.0);
        }
        match (self.dual_mode, &self.family) {
            (DualMode::ClosedForm, NormFamily::Euclidean) => Ok(x.norm()),
            (DualMode::ClosedForm, NormFamily::Ellipse(_)) => Ok(x.dot(&(self.inverse * x)).max(0.0).sqrt()),
            _ => Ok(self.numeric_dual(x)?.0),
        }
    }

    /// `DF°(x)`, the maximizer of `⟨x, ξ⟩` on the unit sphere `{F = 1}`.
    pub fn dual_gradient(&self, x: Vec2) -> Result<Vec2> {
        if !(x.amax() >= f64::MIN_POSITIVE) {
            return Err(Error::DegenerateInput("dual gradient requested at the origin".into()));
        }
        match (self.dual_mode, &self.family) {
            (DualMode::ClosedForm, NormFamily::Euclidean) => Ok(x / x.norm()),
            (DualMode::ClosedForm, NormFamily::Ellipse(_)) => {
                let ax = self.inverse * x;
                Ok(ax / x.dot(&ax).sqrt())
            }
            _ => Ok(self.numeric_dual(x)?.1),
        }
    }

    /// Point of the unit `F`-sphere in direction `θ`, and the derivative data of
    /// `θ ↦ F(d(θ))` needed by the Newton polish.
    fn unit_sphere_profile(&self, theta: f64) -> (Vec2, f64, f64, f64) {
        let d = Vec2::new(theta.cos(), theta.sin());
        let dp = Vec2::new(-theta.sin(), theta.cos());
        let (f, dg, hg) = self.g_parts(d);
        let df = dg / f;
        let d2f = (hg - df * df.transpose()) / f;
        let f1 = df.dot(&dp);
        let f2 = dp.dot(&(d2f * dp)) - f;
        (d, f, f1, f2)
    }

    fn numeric_dual(&self, x: Vec2) -> Result<(f64, Vec2)> {
        let scale = x.amax();
        let x = x / scale;
        let phi = |theta: f64| {
            let d = Vec2::new(theta.cos(), theta.sin());
            x.dot(&d) / self.eval(d)
        };

        let step = TAU / DUAL_COARSE_SAMPLES as f64;
        let (best, _) = (0..DUAL_COARSE_SAMPLES)
            .map(|k| (k, phi(k as f64 * step)))
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
        let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);

        // Golden-section refinement of the bracket.
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (phi(c), phi(d));
        while hi - lo > 1e-6 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = phi(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = phi(d);
            }
        }

        // Newton polish on φ'(θ) = 0.
        let mut theta = 0.5 * (lo + hi);
        let (lo, hi) = (lo - 1e-6, hi + 1e-6);
        for _ in 0..DUAL_POLISH_MAX_STEPS {
            let (d, f, f1, f2) = self.unit_sphere_profile(theta);
            let dp = Vec2::new(-d.y, d.x);
            let (g, g1, g2) = (x.dot(&d), x.dot(&dp), -x.dot(&d));
            let phi1 = (g1 * f - g * f1) / (f * f);
            let phi2 = (g2 * f - g * f2) / (f * f) - 2.0 * f1 * (g1 * f - g * f1) / (f * f * f);
            if phi1.abs() <= DUAL_POLISH_TOL * x.norm() * 1e-3 {
                let xi = d / f;
                return Ok((scale * x.dot(&xi), xi));
            }
            let mut next = if phi2 < 0.0 { theta - phi1 / phi2 } else { theta + phi1.signum() * 1e-7 };
            if !(lo..=hi).contains(&next) {
                next = next.clamp(lo, hi);
            }
            if (next - theta).abs() <= DUAL_POLISH_TOL * 1e-3 {
                let xi = d / f;
                return Ok((scale * x.dot(&xi), xi));
            }
            theta = next;
        }
        let (d, f, f1, _) = self.unit_sphere_profile(theta);
        let dp = Vec2::new(-d.y, d.x);
        let phi1 = (x.dot(&dp) * f - x.dot(&d) * f1) / (f * f);
        if phi1.abs() <= DUAL_POLISH_TOL * x.norm() {
            let xi = d / f;
            return Ok((scale * x.dot(&xi), xi));
        }
        Err(Error::NoConvergence {
            iterations: DUAL_POLISH_MAX_STEPS,
            context: format!("numeric dual polish at ({}, {}): |phi'| = {phi1:e}", x.x, x.y),
            best: None,
        })
    }

    /// Sampled supremum of `F·D³G|_ξ(α,β,γ) / (D²G(α,α)·D²G(β,β)·D²G(γ,γ))^{1/2}`
    /// over unit directions `ξ` and unit `α, β, γ`.
    pub fn estimate_c1(&self, angular_samples: usize, triple_samples: usize) -> f64 {
        self.estimate_c1_at_radius(angular_samples, triple_samples, 1.0)
    }

    /// Same as [`estimate_c1`](Self::estimate_c1) with `ξ` sampled on the circle of
    /// the given radius; the quotient is 0-homogeneous so the result must not move.
    pub fn estimate_c1_at_radius(&self, angular_samples: usize, triple_samples: usize, radius: f64) -> f64 {
        assert!(angular_samples >= 64 && triple_samples >= 64, "sample counts must be at least 64");
        // The quotient is odd in each of α, β, γ, so a half circle with |·| covers the sup.
        let dirs: Vec<Vec2> = (0..triple_samples)
            .map(|k| {
                let t = PI * k as f64 / triple_samples as f64;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let mut sup = 0.0f64;
        for j in 0..angular_samples {
            let t = TAU * j as f64 / angular_samples as f64;
            let xi = radius * Vec2::new(t.cos(), t.sin());
            let (f, _, hess) = self.g_parts(xi);
            let [t0, t1] = self.third_derivative(xi);
            let q: Vec<f64> = dirs.iter().map(|a| a.dot(&(hess * a)).sqrt()).collect();
            let mut local = 0.0f64;
            for (a, qa) in dirs.iter().zip(&q) {
                let (ta0, ta1) = (t0.transpose() * a, t1.transpose() * a);
                for (b, qb) in dirs.iter().zip(&q) {
                    let t = Vec2::new(ta0.dot(b), ta1.dot(b));
                    let qab = qa * qb;
                    for (c, qc) in dirs.iter().zip(&q) {
                        local = local.max(t.dot(c).abs() / (qab * qc));
                    }
                }
            }
            sup = sup.max(f * local);
        }
        sup
    }

    /// Randomized check of the duality identities and the anisotropic Cauchy–Schwarz
    /// inequality. Violations are reported, never raised.
    pub fn verify_identities(&self, trials: usize, rng_seed: u64) -> Result<IdentityReport> {
        assert!(trials >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut report = IdentityReport { trials, ..Default::default() };
        let sample = |rng: &mut ChaCha8Rng| {
            let t: f64 = rng.random_range(0.0..TAU);
            let r: f64 = rng.random_range(0.5..2.0);
            Vec2::new(r * t.cos(), r * t.sin())
        };
        for _ in 0..trials {
            let x = sample(&mut rng);
            let xi = sample(&mut rng);
            let fx = self.dual(x)?;
            let dfx = self.dual_gradient(x)?;
            let jet = self.jet(xi)?;
            let fxi = jet.value;

            bump(&mut report.euler_dual, (dfx.dot(&x) - fx).abs());
            bump(&mut report.euler_primal, (jet.gradient.dot(&xi) - fxi).abs());
            bump(&mut report.unit_dual_gradient, (self.eval(dfx) - 1.0).abs());
            bump(&mut report.unit_primal_gradient, (self.dual(jet.gradient)? - 1.0).abs());
            let back = fx * self.gradient(dfx)?;
            bump(&mut report.inverse_dual, (back - x).norm());
            let back = fxi * self.dual_gradient(jet.gradient)?;
            bump(&mut report.inverse_primal, (back - xi).norm());
            bump(&mut report.cauchy_schwarz, (x.dot(&xi) - fx * fxi).max(0.0));
            let eq = fx * self.eval(dfx);
            bump(&mut report.cauchy_schwarz_equality, (x.dot(&dfx) - eq).abs() / eq);
        }
        report.max_violation = [
            report.euler_dual,
            report.euler_primal,
            report.unit_dual_gradient,
            report.unit_primal_gradient,
            report.inverse_dual,
            report.inverse_primal,
            report.cauchy_schwarz,
            report.cauchy_schwarz_equality,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Ok(report)
    }
}

fn bump(slot: &mut f64, v: f64) {
    *slot = slot.max(if v.is_nan() { f64::INFINITY } else { v });
}

/// Maximum absolute violation of each identity over the sampled pairs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityReport {
    pub trials: usize,
    /// `⟨DF°(x), x⟩ = F°(x)`
    pub euler_dual: f64,
    /// `⟨DF(ξ), ξ⟩ = F(ξ)`
    pub euler_primal: f64,
    /// `F(DF°(x)) = 1`
    pub unit_dual_gradient: f64,
    /// `F°(DF(ξ)) = 1`
    pub unit_primal_gradient: f64,
    /// `F°(x) DF(DF°(x)) = x`
    pub inverse_dual: f64,
    /// `F(ξ) DF°(DF(ξ)) = ξ`
    pub inverse_primal: f64,
    /// positive part of `⟨x, ξ⟩ - F°(x)F(ξ)`
    pub cauchy_schwarz: f64,
    /// relative gap of the equality case `ξ = DF°(x)`
    pub cauchy_schwarz_equality: f64,
    pub max_violation: f64,
}

fn lq_norm(eta: Vec2, q: f64) -> f64 {
    (eta.x.abs().powf(q) + eta.y.abs().powf(q)).powf(1.0 / q)
}

/// `(F, DG, D²G)` of the blended norm at a vector with `max |ηᵢ| = 1`.
fn blend_parts(eta: Vec2, q: f64, lambda: f64) -> (f64, Vec2, Mat2) {
    let n = lq_norm(eta, q);
    let abs_pow = |c: f64| c.abs().powf(q - 2.0);
    let w = Vec2::new(abs_pow(eta.x) * eta.x, abs_pow(eta.y) * eta.y);
    let n2q = n.powf(2.0 - q);
    let half_n2_grad = n2q * w;
    let half_n2_hess = (2.0 - q) * n.powf(2.0 - 2.0 * q) * (w * w.transpose())
        + (q - 1.0) * n2q * Mat2::new(abs_pow(eta.x), 0.0, 0.0, abs_pow(eta.y));
    let f = ((1.0 - lambda) * eta.norm_squared() + lambda * n * n).sqrt();
    let dg = (1.0 - lambda) * eta + lambda * half_n2_grad;
    let hess = (1.0 - lambda) * Mat2::identity() + lambda * half_n2_hess;
    (f, dg, hess)
}
