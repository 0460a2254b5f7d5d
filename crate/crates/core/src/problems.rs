//! Coefficient functions, assumption metadata and the built-in problem catalog.
//!
//! A problem is `-div(b(x, u, grad u) grad u) + q(x, u) = f` on the surface with
//! `u = g` on its boundary. The catalog carries the radiative cooling,
//! surface p-Laplacian and gas dynamics models.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::Real;
use crate::vec3::Vec3;

/// `b(x, z, xi)`: diffusion coefficient at point `x`, value `z`, gradient `xi`.
pub type DiffusionFn<T> = Arc<dyn Fn(&Vec3<T>, T, &Vec3<T>) -> T + Send + Sync>;
/// `q(x, z)`: lower-order term.
pub type ReactionFn<T> = Arc<dyn Fn(&Vec3<T>, T) -> T + Send + Sync>;
/// Functions of position only (`f`, `g`).
pub type PointFn<T> = Arc<dyn Fn(&Vec3<T>) -> T + Send + Sync>;
/// Gas dynamics density law `rho(|xi|^2)`.
pub type DensityFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem '{0}' (expected radiative-cooling, p-laplacian, gas-dynamics or custom)")]
    UnknownProblem(String),
    #[error("invalid problem parameter: {0}")]
    InvalidParameter(String),
}

/// Constants of the ellipticity and growth assumptions on `b` and `q`:
///
/// * `mu0 + mu1 |xi|^(p-2) <= b(x, z, xi) <= m0 + m1 |xi|^(p-2)`
/// * `q(x, z) = q(x, 0)` for `z <= 0`, and
///   `0 <= q(x, z) - q(x, 0) <= alpha z + beta z^(p1-1)` for `z >= 0`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assumptions<T> {
    pub p: T,
    pub p1: T,
    pub mu0: T,
    pub mu1: T,
    pub m0: T,
    pub m1: T,
    pub alpha: T,
    pub beta: T,
    /// Regularization added to a degenerate diffusion coefficient.
    pub epsilon_reg: T,
}

impl<T: Real> Assumptions<T> {
    /// Linear diffusion `b = 1` without a lower-order term.
    pub fn laplace() -> Self {
        Self {
            p: T::lit(2.0),
            p1: T::lit(2.0),
            mu0: T::one(),
            mu1: T::zero(),
            m0: T::one(),
            m1: T::zero(),
            alpha: T::zero(),
            beta: T::zero(),
            epsilon_reg: T::zero(),
        }
    }

    fn validate(&self) -> Result<(), ProblemError> {
        let bad = |what: &str| Err(ProblemError::InvalidParameter(what.to_string()));
        if !(self.p >= T::lit(2.0)) || !(self.p1 >= T::lit(2.0)) {
            return bad("growth exponents p and p1 must be at least 2");
        }
        if !(self.mu0 > T::zero()) || self.mu1 < T::zero() || self.m0 < self.mu0 || self.m1 < self.mu1 {
            return bad("ellipticity constants need 0 < mu0 <= M0 and 0 <= mu1 <= M1");
        }
        if self.alpha < T::zero() || self.beta < T::zero() || self.epsilon_reg < T::zero() {
            return bad("alpha, beta and epsilon_reg must be nonnegative");
        }
        Ok(())
    }
}

/// Problem data: coefficient closures plus assumption metadata.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub name: String,
    pub b: DiffusionFn<T>,
    pub q: ReactionFn<T>,
    pub f: PointFn<T>,
    pub g: PointFn<T>,
    pub assumptions: Assumptions<T>,
    /// Set when `q` is identically zero (enables the range-coincidence results).
    pub q_vanishes: bool,
}

impl<T: Real> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("assumptions", &self.assumptions)
            .field("q_vanishes", &self.q_vanishes)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ProblemSpec<T> {
    /// `-Laplace u = 0`, `u = 0` on the boundary; a template for custom problems.
    pub fn laplace() -> Self {
        Self {
            name: "custom".into(),
            b: Arc::new(|_, _, _| T::one()),
            q: Arc::new(|_, _| T::zero()),
            f: Arc::new(|_| T::zero()),
            g: Arc::new(|_| T::zero()),
            assumptions: Assumptions::laplace(),
            q_vanishes: true,
        }
    }

    pub fn with_b(mut self, b: impl Fn(&Vec3<T>, T, &Vec3<T>) -> T + Send + Sync + 'static) -> Self {
        self.b = Arc::new(b);
        self
    }

    /// Replaces `q`; the problem is no longer treated as reaction-free.
    pub fn with_q(mut self, q: impl Fn(&Vec3<T>, T) -> T + Send + Sync + 'static) -> Self {
        self.q = Arc::new(q);
        self.q_vanishes = false;
        self
    }

    pub fn with_f(mut self, f: impl Fn(&Vec3<T>) -> T + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self
    }

    pub fn with_g(mut self, g: impl Fn(&Vec3<T>) -> T + Send + Sync + 'static) -> Self {
        self.g = Arc::new(g);
        self
    }

    pub fn with_assumptions(mut self, assumptions: Assumptions<T>) -> Self {
        self.assumptions = assumptions;
        self
    }

    /// Radiative cooling `-Laplace u + sigma max(u, 0)^4 = 0`, `g = 1 + xy`.
    pub fn radiative_cooling(sigma: T) -> Result<Self, ProblemError> {
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(ProblemError::InvalidParameter(format!(
                "radiation constant sigma must be nonnegative, got {sigma}"
            )));
        }
        let assumptions = Assumptions {
            p1: T::lit(5.0),
            beta: sigma,
            ..Assumptions::laplace()
        };
        Ok(Self {
            name: "radiative-cooling".into(),
            b: Arc::new(|_, _, _| T::one()),
            q: Arc::new(move |_, z| {
                let z = z.max(T::zero());
                sigma * z * z * z * z
            }),
            f: Arc::new(|_| T::zero()),
            g: Arc::new(|x| T::one() + x.x() * x.y()),
            assumptions,
            q_vanishes: sigma == T::zero(),
        })
    }

    /// Regularized surface p-Laplacian `b = eps + |xi|^(p-2)`, `g = 10 + x`.
    pub fn p_laplacian(p: T, epsilon_reg: T) -> Result<Self, ProblemError> {
        if !(p >= T::lit(2.0)) || !p.is_finite() {
            return Err(ProblemError::InvalidParameter(format!("p must be at least 2, got {p}")));
        }
        if !(epsilon_reg > T::zero()) {
            return Err(ProblemError::InvalidParameter(format!(
                "epsilon_reg must be positive, got {epsilon_reg}"
            )));
        }
        let assumptions = Assumptions {
            p,
            p1: T::lit(2.0),
            mu0: epsilon_reg,
            mu1: T::one(),
            m0: epsilon_reg,
            m1: T::one(),
            alpha: T::zero(),
            beta: T::zero(),
            epsilon_reg,
        };
        let exponent = p - T::lit(2.0);
        Ok(Self {
            name: "p-laplacian".into(),
            b: Arc::new(move |_, _, xi| epsilon_reg + xi.norm().powf(exponent)),
            q: Arc::new(|_, _| T::zero()),
            f: Arc::new(|_| T::zero()),
            g: Arc::new(|x| T::lit(10.0) + x.x()),
            assumptions,
            q_vanishes: true,
        })
    }

    /// Gas dynamics `-div(rho(|grad u|^2) grad u) = 0` with a user density law.
    ///
    /// The ellipticity envelope is taken from `rho` sampled on `|xi| <= 10`;
    /// `rho` must be positive there.
    pub fn gas_dynamics(rho: DensityFn<T>) -> Result<Self, ProblemError> {
        let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
        for k in 0..=1000 {
            let s = T::lit(100.0 * k as f64 / 1000.0);
            let r = rho(s);
            if !r.is_finite() {
                return Err(ProblemError::InvalidParameter(format!("rho({s}) is not finite")));
            }
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo > T::zero()) {
            return Err(ProblemError::InvalidParameter(
                "density law must be positive for uniform ellipticity".into(),
            ));
        }
        let assumptions = Assumptions {
            mu0: lo,
            m0: hi,
            ..Assumptions::laplace()
        };
        Ok(Self {
            name: "gas-dynamics".into(),
            b: Arc::new(move |_, _, xi| rho(xi.norm_squared())),
            q: Arc::new(|_, _| T::zero()),
            f: Arc::new(|_| T::zero()),
            g: Arc::new(|x| T::one() + x.x() * x.y()),
            assumptions,
            q_vanishes: true,
        })
    }

    /// `r(x, z) = (q(x, z) - q(x, 0)) / z` for `z > 0`, zero otherwise.
    #[inline]
    pub fn r_of(&self, x: &Vec3<T>, z: T) -> T {
        if z > T::zero() {
            ((self.q)(x, z) - (self.q)(x, T::zero())) / z
        } else {
            T::zero()
        }
    }

    /// Reduced source `f(x) - q(x, 0)`.
    #[inline]
    pub fn reduced_source(&self, x: &Vec3<T>) -> T {
        (self.f)(x) - (self.q)(x, T::zero())
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        self.assumptions.validate()
    }

    /// Samples `b` at random `(x, z, xi)` with `x` in the box `[lo, hi]` and
    /// `|z|, |xi| <= 10`, counting violations of the ellipticity envelope.
    pub fn check_ellipticity(&self, lo: &Vec3<T>, hi: &Vec3<T>, draws: usize, seed: u64) -> AssumptionCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = &self.assumptions;
        let two = T::lit(2.0);
        let mut check = AssumptionCheck::new("ellipticity", draws);
        for _ in 0..draws {
            let x = random_point(&mut rng, lo, hi);
            let z = T::lit(rng.gen_range(-10.0..=10.0));
            let xi: Vec3<T> = random_ball(&mut rng, 10.0);
            let s = xi.norm().powf(a.p - two);
            let b = (self.b)(&x, z, &xi);
            let lower = a.mu0 + a.mu1 * s;
            let upper = a.m0 + a.m1 * s;
            let slack = T::lit(1e-12) * upper.abs().max(T::one());
            let excess = (lower - b).max(b - upper);
            check.record(excess > slack || !b.is_finite(), excess.as_f64(), [x.x(), x.y(), x.z(), z].map(Real::as_f64));
        }
        check
    }

    /// Samples `q` against the growth assumption.
    pub fn check_growth(&self, lo: &Vec3<T>, hi: &Vec3<T>, draws: usize, seed: u64) -> AssumptionCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = &self.assumptions;
        let mut check = AssumptionCheck::new("growth", draws);
        for _ in 0..draws {
            let x = random_point(&mut rng, lo, hi);
            let z = T::lit(rng.gen_range(-10.0..=10.0));
            let q0 = (self.q)(&x, T::zero());
            let dq = (self.q)(&x, z) - q0;
            let excess = if z <= T::zero() {
                dq.abs()
            } else {
                let bound = a.alpha * z + a.beta * z.powf(a.p1 - T::one());
                let slack = T::lit(1e-12) * bound.abs().max(T::one());
                ((-dq).max(dq - bound) - slack).max(T::zero())
            };
            let slack = T::lit(1e-12) * q0.abs().max(T::one());
            check.record(excess > slack || !dq.is_finite(), excess.as_f64(), [x.x(), x.y(), x.z(), z].map(Real::as_f64));
        }
        check
    }
}

fn random_point<T: Real>(rng: &mut ChaCha8Rng, lo: &Vec3<T>, hi: &Vec3<T>) -> Vec3<T> {
    Vec3(std::array::from_fn(|k| {
        let t = T::lit(rng.gen::<f64>());
        lo[k] + (hi[k] - lo[k]) * t
    }))
}

fn random_ball<T: Real>(rng: &mut ChaCha8Rng, radius: f64) -> Vec3<T> {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-radius..=radius));
        if v.iter().map(|c| c * c).sum::<f64>() <= radius * radius {
            return Vec3(v.map(T::lit));
        }
    }
}

/// Outcome of a sampled assumption check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub assumption: String,
    pub draws: usize,
    pub violations: usize,
    /// `(x, y, z, value)` of the largest violation seen.
    pub worst_sample: Option<[f64; 4]>,
    pub worst_excess: f64,
}

impl AssumptionCheck {
    fn new(assumption: &str, draws: usize) -> Self {
        Self {
            assumption: assumption.into(),
            draws,
            violations: 0,
            worst_sample: None,
            worst_excess: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, violated: bool, excess: f64, sample: [f64; 4]) {
        if violated {
            self.violations += 1;
            if excess > self.worst_excess || self.worst_sample.is_none() {
                self.worst_sample = Some(sample);
            }
        }
        self.worst_excess = self.worst_excess.max(excess);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    RadiativeCooling,
    PLaplacian,
    GasDynamics,
    Custom,
}

impl FromStr for ProblemKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "radiative-cooling" => Ok(Self::RadiativeCooling),
            "p-laplacian" => Ok(Self::PLaplacian),
            "gas-dynamics" => Ok(Self::GasDynamics),
            "custom" => Ok(Self::Custom),
            other => Err(ProblemError::UnknownProblem(other.into())),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RadiativeCooling => "radiative-cooling",
            Self::PLaplacian => "p-laplacian",
            Self::GasDynamics => "gas-dynamics",
            Self::Custom => "custom",
        })
    }
}

/// Parameters for [`catalog`]; unused fields are ignored by problems that do
/// not need them.
#[derive(Clone)]
pub struct CatalogParams<T> {
    pub sigma: T,
    pub p: T,
    pub epsilon_reg: T,
    pub rho: Option<DensityFn<T>>,
}

impl<T: Real> fmt::Debug for CatalogParams<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogParams")
            .field("sigma", &self.sigma)
            .field("p", &self.p)
            .field("epsilon_reg", &self.epsilon_reg)
            .field("rho", &self.rho.as_ref().map(|_| "<closure>"))
            .finish()
    }
}

impl<T: Real> Default for CatalogParams<T> {
    fn default() -> Self {
        Self {
            sigma: T::one(),
            p: T::lit(4.0),
            epsilon_reg: T::lit(1e-8),
            rho: None,
        }
    }
}

/// Looks up a built-in problem by name. `custom` yields the Laplace template
/// of [`ProblemSpec::laplace`], to be completed with the `with_*` builders.
pub fn catalog<T: Real>(name: &str, params: &CatalogParams<T>) -> Result<ProblemSpec<T>, ProblemError> {
    let problem = match name.parse::<ProblemKind>()? {
        ProblemKind::RadiativeCooling => ProblemSpec::radiative_cooling(params.sigma)?,
        ProblemKind::PLaplacian => ProblemSpec::p_laplacian(params.p, params.epsilon_reg)?,
        ProblemKind::GasDynamics => {
            let rho = params.rho.clone().ok_or_else(|| {
                ProblemError::InvalidParameter("gas-dynamics needs a density law rho".into())
            })?;
            ProblemSpec::gas_dynamics(rho)?
        }
        ProblemKind::Custom => ProblemSpec::laplace(),
    };
    problem.validate()?;
    Ok(problem)
}
