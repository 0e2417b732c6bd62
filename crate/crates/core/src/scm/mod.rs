//! Generative structural models and their simulators.
//!
//! Each model variant matches one dataset regime:
//!
//! * [`DiscreteScm`]: finite-support joint law over potential outcomes
//!   `U_0..U_n` and per-instrument-level choices `V_0..V_{m-1}`, with the
//!   instrument drawn independently. Finite support makes population
//!   quantities exact sums; see [`oracle`].
//! * [`MixedScm`]: class-probability curves `q_j(z)` on `[0, 1]` driven
//!   by one latent uniform `W`, so the whole choice path `V(z)` is
//!   defined by a single draw. Outcomes may be coupled to `W`.
//! * [`ContinuousScm`]: structural maps `y = f(x, u)`, `x = g(z, u)` over
//!   bounded rectangles, with optional closed-form derivatives.
//!
//! Simulators are pure functions of `(model, n, seed)`.

pub mod laws;
pub mod oracle;
pub mod scenarios;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ContinuousDataset, DiscreteDataset, MixedDataset};
use crate::error::{Error, Result};
use crate::rng;
pub use laws::{LatentLaw, ScalarLaw};
pub use oracle::{exact_population_oracle, OracleReport};

// ---------------------------------------------------------------------------
// Discrete models
// ---------------------------------------------------------------------------

/// One support point of the joint latent law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    pub weight: f64,
    /// Potential outcomes, one per X level (length n+1).
    pub u: Vec<f64>,
    /// Choice of X level under each instrument level (length m).
    pub v: Vec<usize>,
}

/// Finite-support structural model with categorical `X` and `Z`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteScm {
    /// Marginal law of the instrument (length m simplex).
    pub p_z: Vec<f64>,
    pub atoms: Vec<Atom>,
}

impl DiscreteScm {
    /// Number of non-baseline X levels.
    pub fn n(&self) -> usize {
        self.atoms.first().map_or(0, |a| a.u.len().saturating_sub(1))
    }

    /// Number of instrument levels.
    pub fn m(&self) -> usize {
        self.p_z.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if m < 2 {
            return Err(Error::InvalidModel("need at least two instrument levels".into()));
        }
        check_simplex(&self.p_z, "p_z")?;
        if self.atoms.is_empty() {
            return Err(Error::InvalidModel("need at least one atom".into()));
        }
        let n = self.n();
        if n < 1 {
            return Err(Error::InvalidModel("need at least one non-baseline X level".into()));
        }
        let weights: Vec<f64> = self.atoms.iter().map(|a| a.weight).collect();
        check_simplex(&weights, "atom weights")?;
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.u.len() != n + 1 {
                return Err(Error::InvalidModel(format!("atom {i}: u must have length {}", n + 1)));
            }
            if atom.v.len() != m {
                return Err(Error::InvalidModel(format!("atom {i}: v must have length {m}")));
            }
            if atom.v.iter().any(|&c| c > n) {
                return Err(Error::InvalidModel(format!("atom {i}: v entry exceeds X level {n}")));
            }
            if atom.u.iter().any(|u| !u.is_finite()) {
                return Err(Error::InvalidModel(format!("atom {i}: non-finite outcome")));
            }
        }
        Ok(())
    }

    /// Causal-effect vector: mean potential-outcome difference against
    /// the baseline level, exactly summed over atoms.
    pub fn theta_true(&self) -> Vec<f64> {
        let n = self.n();
        let mut theta = vec![0.0; n];
        for atom in &self.atoms {
            for j in 1..=n {
                theta[j - 1] += atom.weight * (atom.u[j] - atom.u[0]);
            }
        }
        theta
    }

    /// Exact `P(X = code | Z = level)`.
    pub fn prob_x_given_z(&self, code: usize, level: usize) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.v[level] == code)
            .map(|a| a.weight)
            .sum()
    }

    /// Exact `E(Y | Z = level)`.
    pub fn mean_y_given_z(&self, level: usize) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.u[a.v[level]]).sum()
    }
}

/// Draw from a finite distribution given cumulative weights.
fn categorical(weights: &[f64], rng: &mut impl Rng) -> usize {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if draw < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn check_simplex(w: &[f64], what: &str) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidModel(format!("{what}: empty")));
    }
    if w.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
        return Err(Error::InvalidModel(format!("{what}: negative or > 1 entry")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidModel(format!("{what}: sums to {sum}, expected 1")));
    }
    Ok(())
}

/// I.i.d. draws from a discrete structural model. The instrument and the
/// atom index are drawn independently; `x` is the atom's choice at the
/// drawn instrument level and `y` the atom's potential outcome at `x`.
pub fn simulate_discrete(model: &DiscreteScm, n_samples: usize, seed: u64) -> Result<DiscreteDataset> {
    model.validate()?;
    let mut rng = rng::root(seed);
    let weights: Vec<f64> = model.atoms.iter().map(|a| a.weight).collect();
    let mut y = Vec::with_capacity(n_samples);
    let mut x = Vec::with_capacity(n_samples);
    let mut z = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let zi = categorical(&model.p_z, &mut rng);
        let atom = &model.atoms[categorical(&weights, &mut rng)];
        let xi = atom.v[zi];
        y.push(atom.u[xi]);
        x.push(xi);
        z.push(zi);
    }
    DiscreteDataset::new(y, x, z, model.n(), model.m())
}

// ---------------------------------------------------------------------------
// Mixed models (categorical X, real Z)
// ---------------------------------------------------------------------------

/// Instrument marginal on `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ZDensity {
    Uniform,
    TruncNormal { mean: f64, sd: f64 },
}

impl ZDensity {
    fn law(&self) -> ScalarLaw {
        match *self {
            ZDensity::Uniform => ScalarLaw::Uniform { lo: 0.0, hi: 1.0 },
            ZDensity::TruncNormal { mean, sd } => ScalarLaw::TruncNormal { mean, sd, lo: 0.0, hi: 1.0 },
        }
    }
}

/// Class-probability curves `q_j(z)`, `j = 0..=n`, with closed-form
/// derivatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum QCurves {
    /// Two classes. `q_1(z) = P(eps > -(alpha0 + alpha1 z))`; the choice
    /// path thresholds the latent uniform `W = F_eps(eps)`.
    Threshold { alpha0: f64, alpha1: f64, eps: ScalarLaw },
    /// Softmax over per-class affine scores `a_j + b_j z`.
    Softmax { coefs: Vec<(f64, f64)> },
}

impl QCurves {
    pub fn classes(&self) -> usize {
        match self {
            QCurves::Threshold { .. } => 2,
            QCurves::Softmax { coefs } => coefs.len(),
        }
    }

    /// Probabilities at `z` (a simplex of length `classes()`).
    pub fn probs(&self, z: f64) -> Vec<f64> {
        match self {
            QCurves::Threshold { alpha0, alpha1, eps } => {
                let q1 = 1.0 - eps.cdf(-(alpha0 + alpha1 * z));
                vec![1.0 - q1, q1]
            }
            QCurves::Softmax { coefs } => {
                let scores: Vec<f64> = coefs.iter().map(|(a, b)| a + b * z).collect();
                let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
                let sum: f64 = exps.iter().sum();
                exps.iter().map(|e| e / sum).collect()
            }
        }
    }

    /// Derivatives `q_j'(z)`.
    pub fn dprobs(&self, z: f64) -> Vec<f64> {
        match self {
            QCurves::Threshold { alpha0, alpha1, eps } => {
                let t = -(alpha0 + alpha1 * z);
                let dq1 = eps.pdf(t) * alpha1;
                vec![-dq1, dq1]
            }
            QCurves::Softmax { coefs } => {
                let q = self.probs(z);
                let avg_slope: f64 = q.iter().zip(coefs).map(|(qi, (_, b))| qi * b).sum();
                q.iter().zip(coefs).map(|(qi, (_, b))| qi * (b - avg_slope)).collect()
            }
        }
    }

    /// Class chosen by the latent uniform `w` at position `z`: the first
    /// class whose cumulative probability covers `w`.
    pub fn choose(&self, z: f64, w: f64) -> usize {
        let q = self.probs(z);
        let mut acc = 0.0;
        for (j, &p) in q.iter().enumerate() {
            acc += p;
            if w <= acc {
                return j;
            }
        }
        q.len() - 1
    }

    fn validate(&self) -> Result<()> {
        match self {
            QCurves::Threshold { eps, .. } => {
                eps.validate()?;
                match eps {
                    ScalarLaw::Constant(_) => Err(Error::InvalidModel(
                        "threshold noise must be absolutely continuous".into(),
                    )),
                    _ => Ok(()),
                }
            }
            QCurves::Softmax { coefs } => {
                if coefs.len() < 2 {
                    return Err(Error::InvalidModel("softmax needs at least two classes".into()));
                }
                if coefs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
                    return Err(Error::InvalidModel("softmax coefficients must be finite".into()));
                }
                Ok(())
            }
        }
    }
}

/// Outcome side of a mixed model. Potential outcomes are
/// `U_j = means[j] + eta + j * effect_w_slope * (W - 1/2)`,
/// where `eta` has law `noise`, coupled to the choice latent `W` by a
/// Gaussian copula with correlation `noise_w_corr`.
///
/// With `effect_w_slope = 0` the outcome differences `U_j - U_0` are
/// constants, so they are uncorrelated with every choice change; a
/// nonzero slope ties the subject-level effect to the choice latent and
/// breaks that orthogonality on purpose.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedOutcome {
    pub means: Vec<f64>,
    pub noise: ScalarLaw,
    pub noise_w_corr: f64,
    pub effect_w_slope: f64,
}

/// Structural model with categorical `X` and real `Z` on `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedScm {
    pub p_z: ZDensity,
    pub q: QCurves,
    pub outcome: MixedOutcome,
}

impl MixedScm {
    /// Number of non-baseline X levels.
    pub fn n(&self) -> usize {
        self.q.classes() - 1
    }

    pub fn theta_true(&self) -> Vec<f64> {
        // E(W) = 1/2, so the W-coupling does not move the means.
        (1..self.q.classes())
            .map(|j| self.outcome.means[j] - self.outcome.means[0])
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.q.validate()?;
        if self.outcome.means.len() != self.q.classes() {
            return Err(Error::InvalidModel(
                "outcome means must match the number of classes".into(),
            ));
        }
        self.outcome.noise.validate()?;
        if !(-1.0..1.0).contains(&self.outcome.noise_w_corr) {
            return Err(Error::InvalidModel("copula correlation must lie in (-1, 1)".into()));
        }
        // probe the probability curves across the unit interval
        for i in 0..=100 {
            let z = i as f64 / 100.0;
            let q = self.q.probs(z);
            if q.iter().any(|&p| !(-1e-9..=1.0 + 1e-9).contains(&p)) {
                return Err(Error::InvalidModel(format!("q({z}) leaves [0, 1]")));
            }
            let sum: f64 = q.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidModel(format!("q({z}) sums to {sum}")));
            }
        }
        Ok(())
    }

    fn potential_outcomes(&self, eta: f64, w: f64) -> Vec<f64> {
        (0..self.q.classes())
            .map(|j| self.outcome.means[j] + eta + j as f64 * self.outcome.effect_w_slope * (w - 0.5))
            .collect()
    }
}

/// I.i.d. draws from a mixed model: `Z` from its marginal, one latent
/// uniform `W` (jointly with the outcome noise) per subject, then
/// `X = V(Z)` by thresholding `W` against the cumulative class curves.
pub fn simulate_mixed(model: &MixedScm, n_samples: usize, seed: u64) -> Result<MixedDataset> {
    model.validate()?;
    let mut rng = rng::root(seed);
    let z_law = model.p_z.law();
    let mut y = Vec::with_capacity(n_samples);
    let mut x = Vec::with_capacity(n_samples);
    let mut z = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let zi = z_law.sample(&mut rng).clamp(0.0, 1.0);
        let (w, eta_u) = laws::bivariate_uniforms(model.outcome.noise_w_corr, &mut rng);
        let eta = model.outcome.noise.quantile(eta_u);
        let xi = model.q.choose(zi, w);
        let u = model.potential_outcomes(eta, w);
        y.push(u[xi]);
        x.push(xi);
        z.push(zi);
    }
    MixedDataset::new(y, x, z, model.n())
}

/// Monte Carlo diagnostic for the orthogonality behind the smooth
/// estimator: the largest absolute correlation, over probe pairs
/// `(z, delta)` and non-baseline classes `j`, between the outcome
/// difference `U_j - U_0` and the choice change
/// `I(V(z + delta) = j) - I(V(z) = j)`. Only computable on a synthetic
/// model, where the latent path is available.
pub fn mixed_condition_probe(
    model: &MixedScm,
    draws: usize,
    seed: u64,
    probes: &[(f64, f64)],
) -> Result<f64> {
    model.validate()?;
    let mut rng = rng::root(seed);
    let classes = model.q.classes();
    let mut effect: Vec<Vec<f64>> = vec![Vec::with_capacity(draws); classes - 1];
    let mut ws = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (w, _) = laws::bivariate_uniforms(model.outcome.noise_w_corr, &mut rng);
        ws.push(w);
        for j in 1..classes {
            let d = model.outcome.means[j] - model.outcome.means[0]
                + j as f64 * model.outcome.effect_w_slope * (w - 0.5);
            effect[j - 1].push(d);
        }
    }
    let mut max_corr: f64 = 0.0;
    for &(z, delta) in probes {
        for j in 1..classes {
            let change: Vec<f64> = ws
                .iter()
                .map(|&w| {
                    let after = (model.q.choose((z + delta).clamp(0.0, 1.0), w) == j) as i32;
                    let before = (model.q.choose(z.clamp(0.0, 1.0), w) == j) as i32;
                    (after - before) as f64
                })
                .collect();
            max_corr = max_corr.max(correlation(&effect[j - 1], &change).abs());
        }
    }
    Ok(max_corr)
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma).powi(2);
        vb += (b[i] - mb).powi(2);
    }
    if va <= 0.0 || vb <= 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Continuous models
// ---------------------------------------------------------------------------

/// `(x, u) -> y`.
pub type StructuralFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// `(z, u) -> x`.
pub type StructuralMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// `(x, u) -> df/dx`, length `x_dim`.
pub type GradientFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// `(z, u) -> dg_j/dz_i`, row-major `z_dim x x_dim`.
pub type JacobianFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Closed-form structural derivatives, when available.
#[derive(Clone)]
pub struct AnalyticDerivs {
    pub dy_dx: GradientFn,
    pub dx_dz: JacobianFn,
}

/// Structural model with real-valued `X` and `Z` on bounded rectangles.
#[derive(Clone)]
pub struct ContinuousScm {
    pub x_dim: usize,
    pub z_dim: usize,
    pub f_map: StructuralFn,
    pub g_map: StructuralMap,
    pub u_law: LatentLaw,
    /// Independent per-coordinate instrument marginals with bounded support.
    pub z_law: Vec<ScalarLaw>,
    pub x_bounds: Vec<(f64, f64)>,
    pub z_bounds: Vec<(f64, f64)>,
    pub analytic: Option<AnalyticDerivs>,
}

impl std::fmt::Debug for ContinuousScm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContinuousScm")
            .field("x_dim", &self.x_dim)
            .field("z_dim", &self.z_dim)
            .field("u_law", &self.u_law)
            .field("z_law", &self.z_law)
            .field("x_bounds", &self.x_bounds)
            .field("z_bounds", &self.z_bounds)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

impl ContinuousScm {
    pub fn validate(&self) -> Result<()> {
        if self.z_law.len() != self.z_dim || self.z_bounds.len() != self.z_dim {
            return Err(Error::InvalidModel("z marginals and bounds must match z_dim".into()));
        }
        if self.x_bounds.len() != self.x_dim {
            return Err(Error::InvalidModel("x bounds must match x_dim".into()));
        }
        self.u_law.validate()?;
        for (law, &(lo, hi)) in self.z_law.iter().zip(&self.z_bounds) {
            law.validate()?;
            let (slo, shi) = law.support();
            if slo < lo - 1e-9 || shi > hi + 1e-9 {
                return Err(Error::InvalidModel(
                    "z marginal support must lie inside the declared z bounds".into(),
                ));
            }
        }
        Ok(())
    }

    /// Compare the supplied closed-form derivatives against central
    /// finite differences at random probe points.
    pub fn check_analytic_derivatives(&self, probes: usize, seed: u64, rel_tol: f64) -> Result<()> {
        let Some(analytic) = &self.analytic else {
            return Ok(());
        };
        let mut rng = rng::substream(seed, 0x9e37);
        for _ in 0..probes {
            let u = self.u_law.sample(&mut rng);
            let x: Vec<f64> = self
                .x_bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            let z: Vec<f64> = self
                .z_bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();

            let grad = (analytic.dy_dx)(&x, &u);
            for j in 0..self.x_dim {
                let h = 1e-5 * (self.x_bounds[j].1 - self.x_bounds[j].0).max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = ((self.f_map)(&xp, &u) - (self.f_map)(&xm, &u)) / (2.0 * h);
                if (fd - grad[j]).abs() > rel_tol * grad[j].abs().max(1.0) {
                    return Err(Error::InvalidModel(format!(
                        "dy/dx{} mismatch: finite difference {fd}, closed form {}",
                        j + 1,
                        grad[j]
                    )));
                }
            }

            let jac = (analytic.dx_dz)(&z, &u);
            for i in 0..self.z_dim {
                let h = 1e-5 * (self.z_bounds[i].1 - self.z_bounds[i].0).max(1.0);
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[i] += h;
                zm[i] -= h;
                let gp = (self.g_map)(&zp, &u);
                let gm = (self.g_map)(&zm, &u);
                for j in 0..self.x_dim {
                    let fd = (gp[j] - gm[j]) / (2.0 * h);
                    let an = jac[i * self.x_dim + j];
                    if (fd - an).abs() > rel_tol * an.abs().max(1.0) {
                        return Err(Error::InvalidModel(format!(
                            "dx{}/dz{} mismatch: finite difference {fd}, closed form {an}",
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Monte Carlo value of `E(dY/dX | Z = z)` from the closed-form
    /// gradient. Needs `analytic`.
    pub fn phi_at(&self, z: &[f64], draws: usize, seed: u64) -> Result<Vec<f64>> {
        let analytic = self
            .analytic
            .as_ref()
            .ok_or_else(|| Error::InvalidParam("model has no closed-form derivatives".into()))?;
        let mut rng = rng::substream(seed, 0x9e38);
        let mut acc = vec![0.0; self.x_dim];
        for _ in 0..draws {
            let u = self.u_law.sample(&mut rng);
            let x = (self.g_map)(z, &u);
            let grad = (analytic.dy_dx)(&x, &u);
            for j in 0..self.x_dim {
                acc[j] += grad[j];
            }
        }
        Ok(acc.into_iter().map(|a| a / draws as f64).collect())
    }

    /// Monte Carlo gap `E(h k | z) - E(h | z) E(k | z)` for scalar
    /// models: zero when the outcome and instrument sensitivities are
    /// conditionally uncorrelated. Needs `analytic` and `n = m = 1`.
    pub fn condition_gap(&self, z: f64, draws: usize, seed: u64) -> Result<f64> {
        if self.x_dim != 1 || self.z_dim != 1 {
            return Err(Error::InvalidParam("condition gap is defined for scalar models".into()));
        }
        let analytic = self
            .analytic
            .as_ref()
            .ok_or_else(|| Error::InvalidParam("model has no closed-form derivatives".into()))?;
        let mut rng = rng::substream(seed, 0x9e39);
        let (mut sh, mut sk, mut shk) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let u = self.u_law.sample(&mut rng);
            let x = (self.g_map)(&[z], &u);
            let h = (analytic.dy_dx)(&x, &u)[0];
            let k = (analytic.dx_dz)(&[z], &u)[0];
            sh += h;
            sk += k;
            shk += h * k;
        }
        let n = draws as f64;
        Ok(shk / n - (sh / n) * (sk / n))
    }
}

/// I.i.d. draws from a continuous model. Fails if a generated `x` lands
/// outside the declared bounds.
pub fn simulate_continuous(
    model: &ContinuousScm,
    n_samples: usize,
    seed: u64,
) -> Result<ContinuousDataset> {
    model.validate()?;
    model.check_analytic_derivatives(20, seed ^ 0xfeed, 1e-4)?;
    let mut rng = rng::root(seed);
    let mut y = Vec::with_capacity(n_samples);
    let mut x = Vec::with_capacity(n_samples * model.x_dim);
    let mut z = Vec::with_capacity(n_samples * model.z_dim);
    for row in 0..n_samples {
        let zi: Vec<f64> = model
            .z_law
            .iter()
            .zip(&model.z_bounds)
            .map(|(law, &(lo, hi))| law.sample(&mut rng).clamp(lo, hi))
            .collect();
        let u = model.u_law.sample(&mut rng);
        let xi = (model.g_map)(&zi, &u);
        for (j, &v) in xi.iter().enumerate() {
            let (lo, hi) = model.x_bounds[j];
            if !(lo..=hi).contains(&v) {
                return Err(Error::InvalidModel(format!(
                    "sample {row}: generated x{} = {v} escapes declared bounds [{lo}, {hi}]; \
                     widen x_bounds",
                    j + 1
                )));
            }
        }
        y.push((model.f_map)(&xi, &u));
        x.extend_from_slice(&xi);
        z.extend_from_slice(&zi);
    }
    ContinuousDataset::new(
        y,
        x,
        z,
        model.x_dim,
        model.z_dim,
        model.x_bounds.clone(),
        model.z_bounds.clone(),
    )
}
