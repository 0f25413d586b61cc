//! Analytic min-max problem oracles.
//!
//! Each problem exposes the objective `F(u, v)`, the exact operator
//! `g(x) = [grad_u F, -grad_v F]`, and its declared constants (Lipschitz
//! bound, gradient bound on a ball, noise level). Stochastic gradients are
//! the exact operator plus additive isotropic Gaussian noise with total
//! second moment `sigma^2`, divided by the minibatch size.

use std::fmt;

use nalgebra::{DMatrix, DVector, DVectorView};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Stacked primal/dual point `x = (u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    stacked: DVector<f64>,
    primal_dim: usize,
}

impl ParamPoint {
    pub fn new(u: DVector<f64>, v: DVector<f64>) -> ParamPoint {
        let primal_dim = u.len();
        let mut stacked = DVector::zeros(u.len() + v.len());
        stacked.rows_mut(0, u.len()).copy_from(&u);
        stacked.rows_mut(u.len(), v.len()).copy_from(&v);
        ParamPoint { stacked, primal_dim }
    }

    pub fn from_stacked(stacked: DVector<f64>, primal_dim: usize) -> Result<ParamPoint> {
        if stacked.is_empty() || primal_dim > stacked.len() {
            return Err(Error::DimensionMismatch { expected: primal_dim, got: stacked.len() });
        }
        Ok(ParamPoint { stacked, primal_dim })
    }

    pub fn primal(&self) -> DVectorView<'_, f64> {
        self.stacked.rows(0, self.primal_dim)
    }

    pub fn dual(&self) -> DVectorView<'_, f64> {
        self.stacked.rows(self.primal_dim, self.stacked.len() - self.primal_dim)
    }

    pub fn stacked(&self) -> &DVector<f64> {
        &self.stacked
    }

    pub fn dim(&self) -> usize {
        self.stacked.len()
    }
}

/// One stochastic gradient draw.
#[derive(Debug, Clone)]
pub struct GradientSample {
    /// `g(x; xi)`, the noisy operator value.
    pub value: DVector<f64>,
    /// `g(x; xi) - g(x)`.
    pub noise: DVector<f64>,
    pub minibatch: usize,
}

/// Analytic min-max problem with declared constants.
pub trait ProblemOracle: Send + Sync {
    fn name(&self) -> &'static str;
    fn primal_dim(&self) -> usize;
    fn dual_dim(&self) -> usize;
    fn dim(&self) -> usize {
        self.primal_dim() + self.dual_dim()
    }
    /// Objective `F(u, v)` at a stacked point.
    fn objective(&self, x: &DVector<f64>) -> f64;
    /// Exact operator `g(x) = [grad_u F, -grad_v F]`.
    fn operator(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Declared Lipschitz constant of `g` (on the declared ball when the
    /// operator is not globally Lipschitz).
    fn lipschitz(&self) -> f64;
    /// Noise standard-deviation parameter `sigma`.
    fn sigma(&self) -> f64;
    /// Bound on `||g||`, reported as the supremum over the declared ball for
    /// problems with unbounded gradients; `None` when no ball is declared.
    fn grad_bound(&self) -> Option<f64>;
    /// Point `x*` with `<g(x), x - x*> >= 0` for all `x`, when known.
    fn minty_point(&self) -> Option<DVector<f64>>;
    /// Radius `D/2` of the ball on which constants are declared.
    fn ball_radius(&self) -> Option<f64>;

    fn describe(&self) -> String {
        let g = match self.grad_bound() {
            Some(g) => format!("{g}"),
            None => "unbounded (no ball declared)".to_string(),
        };
        let ball = match self.ball_radius() {
            Some(r) => format!("{r}"),
            None => "none".to_string(),
        };
        let minty = match self.minty_point() {
            Some(p) => format!("{:?}", p.as_slice()),
            None => "not declared".to_string(),
        };
        format!(
            "problem: {}\n  d_u = {}, d_v = {}\n  L = {}\n  G = {g}\n  sigma = {}\n  ball radius (D/2) = {ball}\n  minty point = {minty}",
            self.name(),
            self.primal_dim(),
            self.dual_dim(),
            self.lipschitz(),
            self.sigma(),
        )
    }
}

fn check_dim(problem: &dyn ProblemOracle, got: usize) -> Result<()> {
    if got != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got });
    }
    Ok(())
}

/// Exact operator value at `x`.
pub fn grad_exact(problem: &dyn ProblemOracle, x: &ParamPoint) -> Result<DVector<f64>> {
    check_dim(problem, x.dim())?;
    Ok(problem.operator(x.stacked()))
}

/// Additive noise for one minibatch-averaged draw: i.i.d. Gaussians with
/// per-coordinate variance `sigma^2 / (d * m)`, so the total second moment
/// is `sigma^2 / m`.
pub fn noise_draw<R: Rng + ?Sized>(
    dim: usize,
    sigma: f64,
    minibatch: usize,
    rng: &mut R,
) -> DVector<f64> {
    let std = sigma / ((dim * minibatch) as f64).sqrt();
    DVector::from_fn(dim, |_, _| {
        let z: f64 = rng.sample(StandardNormal);
        std * z
    })
}

/// Stochastic operator draw at a raw stacked point. Hot path used by the
/// optimizer kernels; one call consumes exactly `d` Gaussian variates.
pub fn noisy_operator<R: Rng + ?Sized>(
    problem: &dyn ProblemOracle,
    x: &DVector<f64>,
    minibatch: usize,
    rng: &mut R,
) -> DVector<f64> {
    let mut g = problem.operator(x);
    let std = problem.sigma() / ((g.len() * minibatch) as f64).sqrt();
    for gi in g.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *gi += std * z;
    }
    g
}

/// Minibatch-averaged stochastic gradient with the noise recorded separately.
pub fn grad_stochastic<R: Rng + ?Sized>(
    problem: &dyn ProblemOracle,
    x: &ParamPoint,
    minibatch: usize,
    rng: &mut R,
) -> Result<GradientSample> {
    if minibatch < 1 {
        return Err(Error::Config("minibatch must be >= 1".into()));
    }
    check_dim(problem, x.dim())?;
    let exact = problem.operator(x.stacked());
    let noise = noise_draw(problem.dim(), problem.sigma(), minibatch, rng);
    Ok(GradientSample { value: &exact + &noise, noise, minibatch })
}

/// Probe-based check of the declared constants.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub probes: usize,
    pub lipschitz_declared: f64,
    pub lipschitz_observed: f64,
    pub lipschitz_ok: bool,
    pub grad_norm_max: f64,
    pub grad_bound: Option<f64>,
    pub grad_bound_ok: Option<bool>,
    /// Smallest observed `<g(x), x - x*>`; `None` when no Minty point is
    /// declared.
    pub minty_min: Option<f64>,
    pub minty_ok: Option<bool>,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.lipschitz_ok && self.grad_bound_ok.unwrap_or(true) && self.minty_ok.unwrap_or(true)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lipschitz: observed {:.6e} vs declared {:.6e} -> {}",
            self.lipschitz_observed,
            self.lipschitz_declared,
            if self.lipschitz_ok { "ok" } else { "FAIL" }
        )?;
        match (self.grad_bound, self.grad_bound_ok) {
            (Some(g), Some(ok)) => writeln!(
                f,
                "grad bound: observed max {:.6e} vs declared {:.6e} -> {}",
                self.grad_norm_max,
                g,
                if ok { "ok" } else { "FAIL" }
            )?,
            _ => writeln!(f, "grad bound: not declared (observed max {:.6e})", self.grad_norm_max)?,
        }
        match (self.minty_min, self.minty_ok) {
            (Some(v), Some(ok)) => {
                writeln!(f, "minty: min inner product {:.6e} -> {}", v, if ok { "ok" } else { "FAIL" })?
            }
            _ => writeln!(f, "minty: not declared")?,
        }
        Ok(())
    }
}

fn sample_in_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> DVector<f64> {
    let mut dir = DVector::from_fn(dim, |_, _| {
        let z: f64 = rng.sample(StandardNormal);
        z
    });
    let norm = dir.norm();
    if norm > 0.0 {
        let u: f64 = rng.random::<f64>();
        dir *= radius * u.powf(1.0 / dim as f64) / norm;
    }
    dir
}

/// Samples `n_probe` point pairs inside the ball of the given radius and
/// compares the observed Lipschitz ratio, gradient norms, and Minty inner
/// products against the declared constants. A failure at any probe point
/// fails the corresponding flag.
pub fn validate_assumptions<R: Rng + ?Sized>(
    problem: &dyn ProblemOracle,
    n_probe: usize,
    radius: f64,
    rng: &mut R,
) -> ValidationReport {
    assert!(n_probe >= 2, "need at least two probe points");
    let dim = problem.dim();
    let minty = problem.minty_point();
    let mut lip_observed: f64 = 0.0;
    let mut grad_max: f64 = 0.0;
    let mut minty_min: Option<f64> = None;
    for _ in 0..n_probe {
        let x1 = sample_in_ball(dim, radius, rng);
        let x2 = sample_in_ball(dim, radius, rng);
        let g1 = problem.operator(&x1);
        let g2 = problem.operator(&x2);
        let gap = (&x1 - &x2).norm();
        if gap > 1e-12 {
            lip_observed = lip_observed.max((&g1 - &g2).norm() / gap);
        }
        grad_max = grad_max.max(g1.norm()).max(g2.norm());
        if let Some(star) = &minty {
            for (x, g) in [(&x1, &g1), (&x2, &g2)] {
                let inner = g.dot(&(x - star));
                minty_min = Some(minty_min.map_or(inner, |m: f64| m.min(inner)));
            }
        }
    }
    let declared_l = problem.lipschitz();
    let grad_bound = problem.grad_bound();
    ValidationReport {
        probes: n_probe,
        lipschitz_declared: declared_l,
        lipschitz_observed: lip_observed,
        lipschitz_ok: lip_observed <= declared_l * (1.0 + 1e-6),
        grad_norm_max: grad_max,
        grad_bound,
        grad_bound_ok: grad_bound.map(|g| grad_max <= g * (1.0 + 1e-6)),
        minty_min,
        minty_ok: minty_min.map(|m| m >= -1e-9),
    }
}

// ---------------------------------------------------------------------------
// Shipped problems
// ---------------------------------------------------------------------------

/// `F(u, v) = u^T A v`. The operator `g(x) = [A v, -A^T u]` is linear and
/// skew-adjoint, globally `||A||_2`-Lipschitz, with Minty point 0.
#[derive(Debug, Clone)]
pub struct BilinearSaddle {
    matrix: DMatrix<f64>,
    sigma: f64,
    ball: Option<f64>,
    lipschitz: f64,
}

impl BilinearSaddle {
    pub fn new(matrix: DMatrix<f64>, sigma: f64) -> BilinearSaddle {
        let lipschitz = matrix.clone().svd(false, false).singular_values[0];
        BilinearSaddle { matrix, sigma, ball: None, lipschitz }
    }

    /// `A = scale * I_n`.
    pub fn scaled_identity(n: usize, scale: f64, sigma: f64) -> BilinearSaddle {
        BilinearSaddle::new(DMatrix::identity(n, n) * scale, sigma)
    }

    pub fn with_ball(mut self, radius: f64) -> BilinearSaddle {
        self.ball = Some(radius);
        self
    }
}

impl ProblemOracle for BilinearSaddle {
    fn name(&self) -> &'static str {
        "bilinear"
    }
    fn primal_dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn dual_dim(&self) -> usize {
        self.matrix.ncols()
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        let u = x.rows(0, self.primal_dim());
        let v = x.rows(self.primal_dim(), self.dual_dim());
        (u.transpose() * &self.matrix * v)[(0, 0)]
    }
    fn operator(&self, x: &DVector<f64>) -> DVector<f64> {
        let du = self.primal_dim();
        let dv = self.dual_dim();
        let u = x.rows(0, du);
        let v = x.rows(du, dv);
        let gu = &self.matrix * v;
        let gv = -(self.matrix.transpose() * u);
        let mut g = DVector::zeros(du + dv);
        g.rows_mut(0, du).copy_from(&gu);
        g.rows_mut(du, dv).copy_from(&gv);
        g
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    fn sigma(&self) -> f64 {
        self.sigma
    }
    fn grad_bound(&self) -> Option<f64> {
        self.ball.map(|r| self.lipschitz * r)
    }
    fn minty_point(&self) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.dim()))
    }
    fn ball_radius(&self) -> Option<f64> {
        self.ball
    }
}

/// `F(u, v) = (a/2)||u||^2 - (b/2)||v||^2 + c u^T v` with `dim u = dim v`.
/// `g` is linear with Jacobian blocks `[[aI, cI], [-cI, bI]]`; for
/// `a, b >= 0` the operator is monotone with Minty point 0.
#[derive(Debug, Clone)]
pub struct QuadraticSaddle {
    block_dim: usize,
    a: f64,
    b: f64,
    c: f64,
    sigma: f64,
    ball: Option<f64>,
    lipschitz: f64,
}

impl QuadraticSaddle {
    pub fn new(block_dim: usize, a: f64, b: f64, c: f64, sigma: f64) -> QuadraticSaddle {
        let k = DMatrix::from_row_slice(2, 2, &[a, c, -c, b]);
        let lipschitz = k.svd(false, false).singular_values[0];
        QuadraticSaddle { block_dim, a, b, c, sigma, ball: None, lipschitz }
    }

    pub fn with_ball(mut self, radius: f64) -> QuadraticSaddle {
        self.ball = Some(radius);
        self
    }
}

impl ProblemOracle for QuadraticSaddle {
    fn name(&self) -> &'static str {
        "quadratic"
    }
    fn primal_dim(&self) -> usize {
        self.block_dim
    }
    fn dual_dim(&self) -> usize {
        self.block_dim
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        let n = self.block_dim;
        let u = x.rows(0, n);
        let v = x.rows(n, n);
        0.5 * self.a * u.norm_squared() - 0.5 * self.b * v.norm_squared() + self.c * u.dot(&v)
    }
    fn operator(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.block_dim;
        let mut g = DVector::zeros(2 * n);
        for i in 0..n {
            let u = x[i];
            let v = x[n + i];
            g[i] = self.a * u + self.c * v;
            g[n + i] = self.b * v - self.c * u;
        }
        g
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    fn sigma(&self) -> f64 {
        self.sigma
    }
    fn grad_bound(&self) -> Option<f64> {
        self.ball.map(|r| self.lipschitz * r)
    }
    fn minty_point(&self) -> Option<DVector<f64>> {
        (self.a >= 0.0 && self.b >= 0.0).then(|| DVector::zeros(self.dim()))
    }
    fn ball_radius(&self) -> Option<f64> {
        self.ball
    }
}

/// Scalar generator/discriminator game `F(theta, psi) = f(theta * psi)` with
/// the logistic loss `f(w) = ln(1 + e^{-w})`. The operator is bounded but
/// only Lipschitz on a ball, so constants are declared on a ball of radius
/// `D/2` (Jacobian norm is at most `1 + (D/2)^2 / 4`). No Minty point is
/// declared.
#[derive(Debug, Clone)]
pub struct DiracGan {
    sigma: f64,
    ball: f64,
}

impl DiracGan {
    pub const DEFAULT_BALL: f64 = 3.0;

    pub fn new(sigma: f64) -> DiracGan {
        DiracGan { sigma, ball: Self::DEFAULT_BALL }
    }

    pub fn with_ball(mut self, radius: f64) -> DiracGan {
        self.ball = radius;
        self
    }

    /// `f'(w) = -sigmoid(-w)`.
    fn fprime(w: f64) -> f64 {
        -1.0 / (1.0 + w.exp())
    }
}

impl ProblemOracle for DiracGan {
    fn name(&self) -> &'static str {
        "dirac_gan"
    }
    fn primal_dim(&self) -> usize {
        1
    }
    fn dual_dim(&self) -> usize {
        1
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        let w = x[0] * x[1];
        // ln(1 + e^{-w}) without overflow for large |w|
        if w >= 0.0 {
            (-w).exp().ln_1p()
        } else {
            -w + w.exp().ln_1p()
        }
    }
    fn operator(&self, x: &DVector<f64>) -> DVector<f64> {
        let (theta, psi) = (x[0], x[1]);
        let fp = Self::fprime(theta * psi);
        DVector::from_vec(vec![psi * fp, -theta * fp])
    }
    fn lipschitz(&self) -> f64 {
        1.0 + self.ball * self.ball / 4.0
    }
    fn sigma(&self) -> f64 {
        self.sigma
    }
    fn grad_bound(&self) -> Option<f64> {
        // ||g(x)|| = |f'| * ||x|| <= ||x||
        Some(self.ball)
    }
    fn minty_point(&self) -> Option<DVector<f64>> {
        None
    }
    fn ball_radius(&self) -> Option<f64> {
        Some(self.ball)
    }
}

/// Nonmonotone scalar stress problem
/// `F(u, v) = u^4/4 - u^2/2 - v^4/4 + v^2/2 + u v`:
/// nonconvex in `u` and nonconcave in `v` near the origin, so the operator
/// is not monotone there. No Minty point is declared.
#[derive(Debug, Clone)]
pub struct PolySaddle {
    sigma: f64,
    ball: f64,
}

impl PolySaddle {
    pub const DEFAULT_BALL: f64 = 2.0;

    pub fn new(sigma: f64) -> PolySaddle {
        PolySaddle { sigma, ball: Self::DEFAULT_BALL }
    }

    pub fn with_ball(mut self, radius: f64) -> PolySaddle {
        self.ball = radius;
        self
    }
}

impl ProblemOracle for PolySaddle {
    fn name(&self) -> &'static str {
        "poly_saddle"
    }
    fn primal_dim(&self) -> usize {
        1
    }
    fn dual_dim(&self) -> usize {
        1
    }
    fn objective(&self, x: &DVector<f64>) -> f64 {
        let (u, v) = (x[0], x[1]);
        u.powi(4) / 4.0 - u * u / 2.0 - v.powi(4) / 4.0 + v * v / 2.0 + u * v
    }
    fn operator(&self, x: &DVector<f64>) -> DVector<f64> {
        let (u, v) = (x[0], x[1]);
        DVector::from_vec(vec![u.powi(3) - u + v, v.powi(3) - v - u])
    }
    fn lipschitz(&self) -> f64 {
        // ||J|| <= max(|3u^2 - 1|, |3v^2 - 1|) + 1 on the ball
        let r2 = self.ball * self.ball;
        (3.0 * r2 - 1.0).max(1.0) + 1.0
    }
    fn sigma(&self) -> f64 {
        self.sigma
    }
    fn grad_bound(&self) -> Option<f64> {
        // g(0) = 0, so ||g|| <= L * radius on the ball
        Some(self.lipschitz() * self.ball)
    }
    fn minty_point(&self) -> Option<DVector<f64>> {
        None
    }
    fn ball_radius(&self) -> Option<f64> {
        Some(self.ball)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bilinear_identity_operator() {
        let p = BilinearSaddle::scaled_identity(2, 1.0, 0.0);
        let x = ParamPoint::new(DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0]));
        let g = grad_exact(&p, &x).unwrap();
        assert_eq!(g.as_slice(), &[0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn quadratic_stationary_at_origin() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 0.0);
        let x = ParamPoint::from_stacked(DVector::zeros(4), 2).unwrap();
        assert_eq!(grad_exact(&p, &x).unwrap(), DVector::zeros(4));
        assert_abs_diff_eq!(p.lipschitz(), 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn dirac_gan_operator_at_one_one() {
        let p = DiracGan::new(0.0);
        let x = ParamPoint::new(DVector::from_vec(vec![1.0]), DVector::from_vec(vec![1.0]));
        let g = grad_exact(&p, &x).unwrap();
        let s = 1.0 / (1.0 + std::f64::consts::E); // sigmoid(-1)
        assert_abs_diff_eq!(g[0], -s, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], s, epsilon = 1e-12);
        assert_abs_diff_eq!(g[0], -0.26894, epsilon = 1e-5);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 0.0);
        let x = ParamPoint::from_stacked(DVector::zeros(3), 1).unwrap();
        assert!(grad_exact(&p, &x).is_err());
    }

    #[test]
    fn noiseless_sample_equals_exact() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 0.0);
        let x = ParamPoint::from_stacked(DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = grad_stochastic(&p, &x, 1, &mut rng).unwrap();
        assert_eq!(s.value, grad_exact(&p, &x).unwrap());
        assert_eq!(s.noise.norm(), 0.0);
    }

    #[test]
    fn same_seed_gives_identical_samples() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 1.0);
        let x = ParamPoint::from_stacked(DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]), 2).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            grad_stochastic(&p, &x, 4, &mut rng).unwrap().value
        };
        let a = draw(99);
        let b = draw(99);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn minibatch_averaging_scales_variance() {
        // E||noise||^2 = sigma^2 / m; average over 100 draws within 20%.
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 1.0);
        let x = ParamPoint::from_stacked(DVector::zeros(4), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = 10_000;
        let reps = 100;
        let mean_sq: f64 = (0..reps)
            .map(|_| grad_stochastic(&p, &x, m, &mut rng).unwrap().noise.norm_squared())
            .sum::<f64>()
            / reps as f64;
        let expected = 1.0 / m as f64;
        assert!((mean_sq - expected).abs() <= 0.2 * expected, "{mean_sq} vs {expected}");
    }

    #[test]
    fn noise_mean_is_statistically_zero() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 1.0);
        let dim = p.dim();
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut acc = DVector::zeros(dim);
        for _ in 0..n {
            acc += noise_draw(dim, p.sigma(), 1, &mut rng);
        }
        acc /= n as f64;
        let bound = 5.0 * p.sigma() / (n as f64).sqrt() * (dim as f64).sqrt();
        assert!(acc.norm() <= bound, "{} > {bound}", acc.norm());
    }

    #[test]
    fn validation_bilinear_minty_holds_exactly() {
        let p = BilinearSaddle::scaled_identity(2, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = validate_assumptions(&p, 200, 10.0, &mut rng);
        assert_eq!(report.minty_ok, Some(true));
        assert!(report.minty_min.unwrap().abs() <= 1e-9); // skew operator: exactly zero
        assert!(report.lipschitz_ok);
        assert!(report.all_ok());
    }

    #[test]
    fn validation_quadratic_lipschitz() {
        let p = QuadraticSaddle::new(2, 1.0, 1.0, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let report = validate_assumptions(&p, 500, 5.0, &mut rng);
        assert!(report.lipschitz_observed <= 2.0_f64.sqrt() * (1.0 + 1e-6));
        assert!(report.all_ok());
    }

    #[test]
    fn validation_dirac_gan_reports_minty_not_declared() {
        let p = DiracGan::new(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let report = validate_assumptions(&p, 200, p.ball_radius().unwrap(), &mut rng);
        assert_eq!(report.minty_ok, None);
        assert_eq!(report.minty_min, None);
        assert!(report.all_ok());
    }

    #[test]
    fn poly_saddle_is_nonmonotone_near_origin() {
        // <g(x), x> = u^4 + v^4 - u^2 - v^2 < 0 at small x: no Minty point
        // at the origin, which is why none is declared.
        let p = PolySaddle::new(0.0);
        let x = DVector::from_vec(vec![0.5, 0.5]);
        let inner = p.operator(&x).dot(&x);
        assert!(inner < 0.0);
        assert!(p.minty_point().is_none());
    }

    #[test]
    fn bilinear_general_matrix_lipschitz_and_root() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 0.7]);
        let p = BilinearSaddle::new(a.clone(), 0.0);
        let sigma_max = a.svd(false, false).singular_values[0];
        assert_abs_diff_eq!(p.lipschitz(), sigma_max, epsilon = 1e-12);

        // unique stationary point at 0 for invertible A
        assert_eq!(p.operator(&DVector::zeros(4)), DVector::zeros(4));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let x = sample_in_ball(4, 3.0, &mut rng);
            if x.norm() > 1e-6 {
                assert!(p.operator(&x).norm() > 0.0);
            }
        }
        let report = validate_assumptions(&p, 500, 4.0, &mut rng);
        assert!(report.lipschitz_ok);
        // probing should get reasonably close to the true operator norm
        assert!(report.lipschitz_observed >= 0.8 * sigma_max);
    }
}
