//! Ready-made structural scenarios with analytic ground truth attached.
//!
//! Each constructor returns a fully specified model plus the quantities
//! a correct estimator must recover, so simulation studies can measure
//! bias without a reference implementation.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scm::{
    AnalyticDerivs, Atom, ContinuousScm, DiscreteScm, LatentLaw, MixedOutcome, MixedScm, QCurves,
    ScalarLaw, ZDensity,
};

/// A real function of one variable, shared across threads.
pub type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Ground truth attached to a scenario.
#[derive(Clone)]
pub struct AnalyticTruth {
    /// Causal-effect vector (constant-effect scenarios).
    pub theta: Vec<f64>,
    /// `phi(z) = E(dY/dX | Z = z)` where available in closed form.
    pub phi: Option<Curve>,
    /// Pointwise effect `theta(x)` where the scenario pins it down.
    pub theta_of_x: Option<Curve>,
    /// Class-1 probability curve `q(z)` (mixed scenarios).
    pub q1: Option<Curve>,
    /// Derivative curves feeding the functional fit (mixed scenarios).
    pub a1: Option<Curve>,
    pub b: Option<Curve>,
    /// How the truth was derived.
    pub note: String,
}

impl std::fmt::Debug for AnalyticTruth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticTruth")
            .field("theta", &self.theta)
            .field("note", &self.note)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Linear errors-in-variables with an instrument
// ---------------------------------------------------------------------------

/// Linear model with measurement error: the observed `x` is a noisy
/// reading of a latent regressor driven by the instrument, and the
/// observation noise also leaks into `y`. The regression of `y` on `x`
/// is attenuated; the instrument ratio recovers `beta`.
///
/// Structure: `x = alpha z + w + u1`, `y = beta (x - u1) + u2`, with
/// independent `u1, u2, w` up to an optional `u1`-`u2` copula
/// correlation.
pub fn linear_scm(
    beta: f64,
    alpha: f64,
    noise_sds: [f64; 3],
    err_corr: f64,
) -> Result<(ContinuousScm, AnalyticTruth)> {
    let [sd_u1, sd_u2, sd_w] = noise_sds;
    if sd_u1 <= 0.0 || sd_u2 <= 0.0 || sd_w <= 0.0 {
        return Err(Error::InvalidParam("noise standard deviations must be positive".into()));
    }
    let marginals = vec![
        ScalarLaw::Normal { mean: 0.0, sd: sd_u1 },
        ScalarLaw::Normal { mean: 0.0, sd: sd_u2 },
        ScalarLaw::Normal { mean: 0.0, sd: sd_w },
    ];
    let u_law = if err_corr == 0.0 {
        LatentLaw::independent(marginals)
    } else {
        LatentLaw::pair_correlated(marginals, 0, 1, err_corr)?
    };
    let z_half = 1.0;
    let x_slack = 8.0 * (sd_u1 + sd_w);
    let model = ContinuousScm {
        x_dim: 1,
        z_dim: 1,
        f_map: Arc::new(move |x, u| beta * (x[0] - u[0]) + u[1]),
        g_map: Arc::new(move |z, u| vec![alpha * z[0] + u[2] + u[0]]),
        u_law,
        z_law: vec![ScalarLaw::Uniform { lo: -z_half, hi: z_half }],
        x_bounds: vec![(-alpha.abs() * z_half - x_slack, alpha.abs() * z_half + x_slack)],
        z_bounds: vec![(-z_half, z_half)],
        analytic: Some(AnalyticDerivs {
            dy_dx: Arc::new(move |_, _| vec![beta]),
            dx_dz: Arc::new(move |_, _| vec![alpha]),
        }),
    };
    let truth = AnalyticTruth {
        theta: vec![beta],
        phi: Some(Arc::new(move |_| beta)),
        theta_of_x: Some(Arc::new(move |_| beta)),
        q1: None,
        a1: None,
        b: None,
        note: "slope of y on z is beta*alpha, slope of x on z is alpha; \
               dY/dX = beta everywhere"
            .into(),
    };
    Ok((model, truth))
}

/// Closed-form attenuation factor of the naive `y`-on-`x` slope for
/// [`linear_scm`]: `cov(x, y) / var(x)` over `beta`.
pub fn linear_naive_attenuation(beta: f64, alpha: f64, noise_sds: [f64; 3], err_corr: f64) -> f64 {
    let [sd_u1, sd_u2, sd_w] = noise_sds;
    let var_z = (2.0f64).powi(2) / 12.0; // uniform on [-1, 1]
    let var_xt = alpha * alpha * var_z + sd_w * sd_w;
    let var_x = var_xt + sd_u1 * sd_u1;
    let cov_u = err_corr * sd_u1 * sd_u2;
    // cov(x, y) = beta var_xt + cov(u1, u2)
    (beta * var_xt + cov_u) / (beta * var_x)
}

// ---------------------------------------------------------------------------
// Program participation through a latent threshold
// ---------------------------------------------------------------------------

/// Binary participation model: a subject joins when a latent score
/// `alpha0 + alpha1 z + eps` is positive, and the outcome is
/// `beta0 + beta1 x + eta`. `eps` and `eta` are coupled through a
/// Gaussian copula with correlation `rho`, which is what makes the
/// naive group comparison inconsistent. `eta` is Normal(0, 0.5).
pub fn threshold_scm(
    beta0: f64,
    beta1: f64,
    alpha0: f64,
    alpha1: f64,
    eps: ScalarLaw,
    rho: f64,
) -> Result<(MixedScm, AnalyticTruth)> {
    if !(-1.0..1.0).contains(&rho) {
        return Err(Error::InvalidParam(format!("copula correlation {rho} must lie in (-1, 1)")));
    }
    eps.validate()?;
    let model = MixedScm {
        p_z: ZDensity::Uniform,
        q: QCurves::Threshold { alpha0, alpha1, eps: eps.clone() },
        outcome: MixedOutcome {
            means: vec![beta0, beta0 + beta1],
            noise: ScalarLaw::Normal { mean: 0.0, sd: 0.5 },
            noise_w_corr: rho,
            effect_w_slope: 0.0,
        },
    };
    model.validate()?;
    let q_eps = eps.clone();
    let q1: Curve = Arc::new(move |z| 1.0 - q_eps.cdf(-(alpha0 + alpha1 * z)));
    let a_eps = eps;
    let a1: Curve = Arc::new(move |z| a_eps.pdf(-(alpha0 + alpha1 * z)) * alpha1);
    let a1_for_b = a1.clone();
    let truth = AnalyticTruth {
        theta: vec![beta1],
        phi: None,
        theta_of_x: None,
        q1: Some(q1),
        a1: Some(a1.clone()),
        b: Some(Arc::new(move |z| beta1 * a1_for_b(z))),
        note: "mean outcome given z is beta0 + beta1 q(z), so its derivative is \
               beta1 q'(z)"
            .into(),
    };
    Ok((model, truth))
}

/// Three-class participation with softmax choice curves; outcome means
/// `m`, optional coupling of the subject-level effect to the choice
/// latent through `effect_w_slope` (nonzero values break the
/// orthogonality the estimator needs, for negative controls).
pub fn softmax_scm(
    coefs: Vec<(f64, f64)>,
    means: Vec<f64>,
    noise_sd: f64,
    rho: f64,
    effect_w_slope: f64,
) -> Result<(MixedScm, AnalyticTruth)> {
    let model = MixedScm {
        p_z: ZDensity::Uniform,
        q: QCurves::Softmax { coefs },
        outcome: MixedOutcome {
            means,
            noise: ScalarLaw::Normal { mean: 0.0, sd: noise_sd },
            noise_w_corr: rho,
            effect_w_slope,
        },
    };
    model.validate()?;
    let theta = model.theta_true();
    let truth = AnalyticTruth {
        theta,
        phi: None,
        theta_of_x: None,
        q1: None,
        a1: None,
        b: None,
        note: "constant subject-level effects equal to the mean differences".into(),
    };
    Ok((model, truth))
}

// ---------------------------------------------------------------------------
// Randomized assignment with noncompliance
// ---------------------------------------------------------------------------

/// Parameters for a binary-assignment, binary-treatment model where
/// subjects may ignore their assignment.
#[derive(Debug, Clone)]
pub struct NoncomplianceSpec {
    /// P(assigned treatment 1).
    pub assign_prob: f64,
    /// Fraction of subjects who follow the assignment; the rest never
    /// take the treatment.
    pub complier_prob: f64,
    /// Subject-level effect takes one of these two values, equally likely.
    pub effect_levels: (f64, f64),
    /// Baseline potential outcome.
    pub baseline: f64,
    /// Correlation between the effect level and being a complier.
    /// Zero keeps the effect orthogonal to compliance behaviour.
    pub effect_compliance_corr: f64,
}

/// Finite-support noncompliance model built from a joint law over
/// (effect level, compliance type). The correlation parameter is hit
/// exactly, which makes the induced estimator bias computable in closed
/// form.
pub fn noncompliance_scm(spec: &NoncomplianceSpec) -> Result<(DiscreteScm, AnalyticTruth)> {
    let pc = spec.complier_prob;
    let rho = spec.effect_compliance_corr;
    if !(0.0..=1.0).contains(&spec.assign_prob) {
        return Err(Error::InvalidParam("assign_prob must lie in [0, 1]".into()));
    }
    if !(0.0 < pc && pc < 1.0) {
        return Err(Error::InvalidParam("complier_prob must lie strictly in (0, 1)".into()));
    }
    // joint of two Bernoullis with the requested correlation
    let p_hi = 0.5;
    let cov = rho * (p_hi * (1.0 - p_hi) * pc * (1.0 - pc)).sqrt();
    let p11 = p_hi * pc + cov;
    if p11 < 0.0 || p11 > p_hi.min(pc) {
        return Err(Error::InvalidParam(format!(
            "correlation {rho} is infeasible for complier_prob {pc}"
        )));
    }
    let (lo, hi) = spec.effect_levels;
    let base = spec.baseline;
    // compliance types: complier takes (v0, v1) = (0, 1); never-taker (0, 0)
    let atoms = vec![
        Atom { weight: p11, u: vec![base, base + hi], v: vec![0, 1] },
        Atom { weight: p_hi - p11, u: vec![base, base + hi], v: vec![0, 0] },
        Atom { weight: pc - p11, u: vec![base, base + lo], v: vec![0, 1] },
        Atom { weight: 1.0 - p_hi - pc + p11, u: vec![base, base + lo], v: vec![0, 0] },
    ];
    let model = DiscreteScm {
        p_z: vec![1.0 - spec.assign_prob, spec.assign_prob],
        atoms,
    };
    model.validate()?;
    let theta = 0.5 * (lo + hi);
    // bias of the ratio estimator: cov(effect, complier) / P(complier)
    let sd_effect = 0.5 * (hi - lo).abs();
    let bias = rho * sd_effect * (pc * (1.0 - pc)).sqrt() / pc;
    let truth = AnalyticTruth {
        theta: vec![theta],
        phi: None,
        theta_of_x: None,
        q1: None,
        a1: None,
        b: None,
        note: format!(
            "effect averages the two levels; the instrument ratio converges to \
             theta + {bias:.6} under the requested effect-compliance correlation"
        ),
    };
    Ok((model, truth))
}

/// Asymptotic value of the instrument ratio for a noncompliance model:
/// `theta + cov(effect, complier)/P(complier)`.
pub fn noncompliance_ratio_limit(spec: &NoncomplianceSpec) -> f64 {
    let sd_effect = 0.5 * (spec.effect_levels.1 - spec.effect_levels.0).abs();
    let pc = spec.complier_prob;
    0.5 * (spec.effect_levels.0 + spec.effect_levels.1)
        + spec.effect_compliance_corr * sd_effect * (pc * (1.0 - pc)).sqrt() / pc
}

/// Degenerate special case: everyone follows the assignment.
pub fn perfect_compliance_scm(
    effect: f64,
    baseline: f64,
    assign_prob: f64,
) -> Result<(DiscreteScm, AnalyticTruth)> {
    let model = DiscreteScm {
        p_z: vec![1.0 - assign_prob, assign_prob],
        atoms: vec![Atom {
            weight: 1.0,
            u: vec![baseline, baseline + effect],
            v: vec![0, 1],
        }],
    };
    model.validate()?;
    let truth = AnalyticTruth {
        theta: vec![effect],
        phi: None,
        theta_of_x: None,
        q1: None,
        a1: None,
        b: None,
        note: "full compliance: the contrast matrix is the 1x1 identity".into(),
    };
    Ok((model, truth))
}

// ---------------------------------------------------------------------------
// Smooth additive model
// ---------------------------------------------------------------------------

/// A scalar smooth function with its derivative.
#[derive(Clone)]
pub struct SmoothFn {
    pub f: Curve,
    pub df: Curve,
}

impl SmoothFn {
    pub fn quadratic(a: f64, b: f64, c: f64) -> Self {
        Self {
            f: Arc::new(move |x| a * x * x + b * x + c),
            df: Arc::new(move |x| 2.0 * a * x + b),
        }
    }

    pub fn identity() -> Self {
        Self { f: Arc::new(|x| x), df: Arc::new(|_| 1.0) }
    }
}

/// Additive structural model `y = s(x) + u1`, `x = t(z) + u2` with `z`
/// uniform on `[-2, 2]`. The instrument span is kept wide relative to
/// the first-stage noise so the integrand is identified over most of
/// the observed `x` range. The effect at `x` is `s'(x)`; the identified
/// curve is `phi(z) = E(s'(t(z) + u2))`, attached here by quadrature
/// over the noise law.
pub fn additive_scm(
    s: SmoothFn,
    t: SmoothFn,
    u1: ScalarLaw,
    u2: ScalarLaw,
) -> Result<(ContinuousScm, AnalyticTruth)> {
    u1.validate()?;
    u2.validate()?;
    let (t_f, t_df) = (t.f.clone(), t.df.clone());
    let (s_f, s_df) = (s.f.clone(), s.df.clone());
    // x range: image of t over [-2, 2] padded by the noise support
    let t_range: Vec<f64> = (0..=400).map(|i| t_f(-2.0 + i as f64 / 100.0)).collect();
    let t_lo = t_range.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_hi = t_range.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (u2_lo, u2_hi) = u2.support();
    let x_bounds = (t_lo + u2_lo - 1e-9, t_hi + u2_hi + 1e-9);

    let g_t = t_f.clone();
    let f_s = s_f.clone();
    let ds = s_df.clone();
    let dt = t_df.clone();
    let model = ContinuousScm {
        x_dim: 1,
        z_dim: 1,
        f_map: Arc::new(move |x, u| f_s(x[0]) + u[0]),
        g_map: Arc::new(move |z, u| vec![g_t(z[0]) + u[1]]),
        u_law: LatentLaw::independent(vec![u1, u2.clone()]),
        z_law: vec![ScalarLaw::Uniform { lo: -2.0, hi: 2.0 }],
        x_bounds: vec![x_bounds],
        z_bounds: vec![(-2.0, 2.0)],
        analytic: Some(AnalyticDerivs {
            dy_dx: Arc::new(move |x, _| vec![ds(x[0])]),
            dx_dz: Arc::new(move |z, _| vec![dt(z[0])]),
        }),
    };
    model.validate()?;

    // phi(z) = E s'(t(z) + U2) by fixed quadrature over the noise law
    let quad_s = s.df.clone();
    let quad_t = t.f.clone();
    let u2_quad = u2;
    let phi: Curve = Arc::new(move |z| {
        let base = quad_t(z);
        let points = 401;
        let mut acc = 0.0;
        for i in 0..points {
            let p = (i as f64 + 0.5) / points as f64;
            acc += quad_s(base + u2_quad.quantile(p));
        }
        acc / points as f64
    });
    let theta_of_x = s.df.clone();
    let truth = AnalyticTruth {
        theta: vec![],
        phi: Some(phi),
        theta_of_x: Some(theta_of_x),
        q1: None,
        a1: None,
        b: None,
        note: "pointwise effect is s'(x); phi averages s' over the image of the \
               first-stage noise"
            .into(),
    };
    Ok((model, truth))
}

// ---------------------------------------------------------------------------
// Random-slope model (constant average effect)
// ---------------------------------------------------------------------------

/// Random-coefficient model `y = u1 x + u2`, `x = t(z) + u3` with `u3`
/// independent of `u1`. The effect is `u1` for every `x`, so the average
/// effect is `E(u1)` and `phi(z)` is constant at that value.
pub fn random_slope_scm(
    u1: ScalarLaw,
    u2: ScalarLaw,
    u3: ScalarLaw,
    t: SmoothFn,
) -> Result<(ContinuousScm, AnalyticTruth)> {
    u1.validate()?;
    u2.validate()?;
    u3.validate()?;
    let theta = u1.mean();
    let (t_f, t_df) = (t.f.clone(), t.df.clone());
    let t_range: Vec<f64> = (0..=200).map(|i| t_f(-1.0 + i as f64 / 100.0)).collect();
    let t_lo = t_range.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_hi = t_range.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (u3_lo, u3_hi) = u3.support();
    let g_t = t_f.clone();
    let dt = t_df;
    let model = ContinuousScm {
        x_dim: 1,
        z_dim: 1,
        f_map: Arc::new(|x, u| u[0] * x[0] + u[1]),
        g_map: Arc::new(move |z, u| vec![g_t(z[0]) + u[2]]),
        u_law: LatentLaw::independent(vec![u1, u2, u3]),
        z_law: vec![ScalarLaw::Uniform { lo: -1.0, hi: 1.0 }],
        x_bounds: vec![(t_lo + u3_lo - 1e-9, t_hi + u3_hi + 1e-9)],
        z_bounds: vec![(-1.0, 1.0)],
        analytic: Some(AnalyticDerivs {
            dy_dx: Arc::new(|_, u| vec![u[0]]),
            dx_dz: Arc::new(move |z, _| vec![dt(z[0])]),
        }),
    };
    model.validate()?;
    let truth = AnalyticTruth {
        theta: vec![theta],
        phi: Some(Arc::new(move |_| theta)),
        theta_of_x: Some(Arc::new(move |_| theta)),
        q1: None,
        a1: None,
        b: None,
        note: "dY/dX is the random slope itself, so phi is its mean everywhere".into(),
    };
    Ok((model, truth))
}

// ---------------------------------------------------------------------------
// Model factories for property suites
// ---------------------------------------------------------------------------

/// Build a finite discrete model as the product of an outcome part and a
/// compliance part. The product law makes every outcome difference
/// exactly independent of every choice indicator.
pub fn product_discrete_scm(
    p_z: Vec<f64>,
    outcome_atoms: &[(f64, Vec<f64>)],
    compliance_atoms: &[(f64, Vec<usize>)],
) -> Result<DiscreteScm> {
    let mut atoms = Vec::with_capacity(outcome_atoms.len() * compliance_atoms.len());
    for (wu, u) in outcome_atoms {
        for (wv, v) in compliance_atoms {
            atoms.push(Atom { weight: wu * wv, u: u.clone(), v: v.clone() });
        }
    }
    let model = DiscreteScm { p_z, atoms };
    model.validate()?;
    Ok(model)
}

/// Random finite model with the outcome part independent of the
/// compliance part, with `n` non-baseline X levels and `m` instrument
/// levels. Useful for verifying the identification algebra on arbitrary
/// joint laws.
pub fn random_independent_scm(n: usize, m: usize, rng: &mut impl Rng) -> DiscreteScm {
    let n_outcome = rng.gen_range(2..5);
    let n_compliance = rng.gen_range(2..6);
    let outcome: Vec<(f64, Vec<f64>)> = random_simplex(n_outcome, rng)
        .into_iter()
        .map(|w| (w, (0..=n).map(|_| rng.gen_range(-2.0..2.0)).collect()))
        .collect();
    let compliance: Vec<(f64, Vec<usize>)> = random_simplex(n_compliance, rng)
        .into_iter()
        .map(|w| (w, (0..m).map(|_| rng.gen_range(0..=n)).collect()))
        .collect();
    let p_z = random_simplex(m, rng);
    product_discrete_scm(p_z, &outcome, &compliance).expect("construction is valid")
}

fn random_simplex(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let mut out: Vec<f64> = raw.iter().map(|w| w / sum).collect();
    // force an exact simplex so validation never trips on rounding
    let correction: f64 = 1.0 - out.iter().sum::<f64>();
    out[0] += correction;
    out
}
