//! Parameter design: closed-form conversion and W-state conditions, and a
//! damped Newton solver for arbitrary target output distributions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::params::{BranchParams, SystemConfig};
use crate::scattering::{
    transmission_general, transmission_three_branch_resonant, ScatteringResult,
};

/// Residuals of the two-branch perfect-conversion conditions at Δ₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionResiduals {
    /// `(Ω₁² − Δ₁²)Γ₂ + (Δ₁² − Ω₂²)Γ₁`, the real part of the |T₁| = 0 condition.
    pub residual_a: f64,
    /// `Δ₁(Ω₁² + Ω₂² − Γ₁Γ₂ − Δ₁²)`, the imaginary part.
    pub residual_b: f64,
    /// `(Ω₁² − Δ₁²)Γ₂ + (Δ₁² − Ω₂²)` with the rate factor on the second term
    /// omitted. Only agrees with `residual_a` when Γ₁ = 1 in the chosen units.
    pub residual_a_printed: f64,
}

impl ConversionResiduals {
    pub fn is_zero(&self, tol: f64) -> bool {
        self.residual_a.abs() <= tol && self.residual_b.abs() <= tol
    }
}

fn two_branch_rates(config: &SystemConfig) -> Result<(f64, f64, f64, f64)> {
    if config.len() != 2 {
        return Err(Error::PreconditionViolated(format!(
            "conversion conditions are for N = 2, got {}",
            config.len()
        )));
    }
    let (b1, b2) = (config.branch(0), config.branch(1));
    Ok((
        b1.waveguide_rate,
        b2.waveguide_rate,
        b1.drive_rabi,
        b2.drive_rabi,
    ))
}

/// Evaluates both perfect-conversion conditions. They guarantee
/// |T₁|² = 0, |T₂|² = 1 only for γⱼ = 0; decay rates are ignored here.
pub fn check_perfect_conversion(delta: f64, config: &SystemConfig) -> Result<ConversionResiduals> {
    let (g1, g2, o1, o2) = two_branch_rates(config)?;
    let d2 = delta * delta;
    Ok(ConversionResiduals {
        residual_a: (o1 * o1 - d2) * g2 + (d2 - o2 * o2) * g1,
        residual_b: delta * (o1 * o1 + o2 * o2 - g1 * g2 - d2),
        residual_a_printed: (o1 * o1 - d2) * g2 + (d2 - o2 * o2),
    })
}

/// All detunings at which both conversion conditions vanish (to `tol`,
/// relative to the rate scale), sorted ascending.
pub fn conversion_detunings(config: &SystemConfig, tol: f64) -> Result<Vec<f64>> {
    let (g1, g2, o1, o2) = two_branch_rates(config)?;
    let mut candidates = vec![0.0];
    let off = o1 * o1 + o2 * o2 - g1 * g2;
    if off > 0.0 {
        let d = off.sqrt();
        candidates.extend([-d, d]);
    }
    let scale = (o1 * o1 + o2 * o2 + g1 * g2 + off.abs()).max(1.0);
    let mut roots = Vec::new();
    for d in candidates {
        let r = check_perfect_conversion(d, config)?;
        if r.residual_a.abs() <= tol * scale * g2.max(g1) && r.residual_b.abs() <= tol * scale {
            roots.push(d);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    Ok(roots)
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::NonPositiveInput(format!(
            "{name} must be > 0, got {value}"
        )));
    }
    Ok(())
}

/// Drive on branch 2 for complete resonant conversion: `Ω₂ = Ω₁√(Γ₂/Γ₁)`.
pub fn solve_resonant_conversion(gamma1: f64, gamma2: f64, rabi1: f64) -> Result<f64> {
    require_positive("gamma1", gamma1)?;
    require_positive("gamma2", gamma2)?;
    require_positive("rabi1", rabi1)?;
    Ok(rabi1 * (gamma2 / gamma1).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WCondition {
    pub rabi2: f64,
    pub rabi3: f64,
    pub gamma3: f64,
}

/// Three-mode W condition: `Γ₃ = Γ₂`, `Ω₂ = Ω₃ = Ω₁(√3 − 1)√(Γ₂/Γ₁)/2`.
pub fn solve_w_condition(gamma1: f64, gamma2: f64, rabi1: f64) -> Result<WCondition> {
    require_positive("gamma1", gamma1)?;
    require_positive("gamma2", gamma2)?;
    require_positive("rabi1", rabi1)?;
    let rabi = rabi1 * w_split_ratio(3) * (gamma2 / gamma1).sqrt();
    Ok(WCondition {
        rabi2: rabi,
        rabi3: rabi,
        gamma3: gamma2,
    })
}

/// Reduced drive `u = Ωⱼ√Γ₁ / (Ω₁√Γⱼ)` splitting a resonant lossless photon
/// equally over `n` modes with equal phase: `u = (√n − 1)/(n − 1)`.
///
/// Gives `(√3 − 1)/2` for three modes and `√2 − 1` for two.
pub fn w_split_ratio(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        _ => {
            let n = n as f64;
            (n.sqrt() - 1.0) / (n - 1.0)
        }
    }
}

/// Three-branch config at the W condition with Γ₁ = 1 and uniform decay.
pub fn w_state_config(gamma2: f64, rabi1: f64, decay: f64) -> Result<SystemConfig> {
    let w = solve_w_condition(1.0, gamma2, rabi1)?;
    SystemConfig::from_branches(vec![
        BranchParams::new(1.0, decay, rabi1),
        BranchParams::new(gamma2, decay, w.rabi2),
        BranchParams::new(w.gamma3, decay, w.rabi3),
    ])
}

/// Target |Tⱼ|² per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    weights: Vec<f64>,
}

impl TargetDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty target distribution".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::UnsatisfiableTarget(format!(
                "weight {w} outside [0, 1]"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::UnsatisfiableTarget(format!(
                "weights sum to {total}, exceeding unit flux"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    /// Ωⱼ/Ω₁ for j = 2..N.
    pub rabi_ratios: Vec<f64>,
    /// `max_j ||Tⱼ|² − targetⱼ|` of `achieved`.
    pub residual: f64,
    pub iterations: usize,
    /// Recomputed from the final drives, not taken from the solver.
    pub achieved: ScatteringResult,
    pub config: SystemConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Convergence threshold on `max_j ||Tⱼ|² − targetⱼ|`.
    pub tolerance: f64,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Step halving factor on rejection.
    pub damping: f64,
    /// Initial Ωⱼ/Ω₁ for j = 2..N. Defaults to the lossless resonant closed
    /// form, which picks the lower-drive root.
    pub initial_ratios: Option<Vec<f64>>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-10,
            fd_step: 1e-6,
            damping: 0.5,
            initial_ratios: None,
        }
    }
}

/// Lossless resonant drives hitting `target` exactly, taking T₁ ≥ 0.
///
/// With `sⱼ = Ωⱼ²Γ₁/(Ω₁²Γⱼ)` and `S = Σⱼ sⱼ`, the amplitudes are
/// `T₁ = (1 − S)/(1 + S)` and `Tⱼ = 2√sⱼ/(1 + S)`. Returns Ωⱼ/Ω₁ for j ≥ 2.
pub fn resonant_closed_form_ratios(config: &SystemConfig, target: &TargetDistribution) -> Vec<f64> {
    let w = target.weights();
    let a = w[0].clamp(0.0, 1.0).sqrt();
    let s_total = (1.0 - a) / (1.0 + a);
    let g1 = config.branch(0).waveguide_rate;
    (1..config.len())
        .map(|j| {
            let s = w[j] * (1.0 + s_total).powi(2) / 4.0;
            (s * config.branch(j).waveguide_rate / g1).sqrt()
        })
        .collect()
}

pub fn solve_target_amplitudes(
    template: &SystemConfig,
    target: &TargetDistribution,
    delta: f64,
) -> Result<DesignSolution> {
    solve_target_amplitudes_with(template, target, delta, &NewtonOptions::default())
}

struct Problem<'a> {
    template: &'a SystemConfig,
    weights: &'a [f64],
    delta: f64,
    rabi1: f64,
    free: Vec<usize>,
    residual_branches: Vec<usize>,
}

impl Problem<'_> {
    fn drives(&self, x: &[f64]) -> Vec<f64> {
        let mut rabi = vec![0.0; self.template.len()];
        rabi[0] = self.rabi1;
        for (&j, &v) in self.free.iter().zip(x) {
            rabi[j] = v;
        }
        rabi
    }

    fn evaluate(&self, x: &[f64]) -> Result<(SystemConfig, ScatteringResult)> {
        let config = self.template.with_drives(&self.drives(x))?;
        let result = transmission_general(self.delta, &config)?;
        Ok((config, result))
    }

    /// `|Tⱼ| − √wⱼ` on the residual branches. Amplitude residuals cross zero
    /// transversally even for weights of 0 or 1.
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, r) = self.evaluate(x)?;
        Ok(self
            .residual_branches
            .iter()
            .map(|&j| r.amplitude(j).norm() - self.weights[j].sqrt())
            .collect())
    }

    fn report(&self, result: &ScatteringResult) -> f64 {
        result
            .probabilities()
            .iter()
            .zip(self.weights)
            .map(|(p, w)| (p - w).abs())
            .fold(0.0, f64::max)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on the drives Ω₂..Ω_N (Ω₁ fixed by the template) so that
/// `|Tⱼ(Δ₁)|²` matches `target`.
///
/// Branches with zero target weight get Ωⱼ = 0 exactly. For lossless
/// configs, flux conservation makes one branch redundant, and the branch
/// with the largest weight is left out of the residual vector (otherwise a
/// weight of 1 would be a tangential root).
pub fn solve_target_amplitudes_with(
    template: &SystemConfig,
    target: &TargetDistribution,
    delta: f64,
    options: &NewtonOptions,
) -> Result<DesignSolution> {
    let n = template.len();
    let weights = target.weights();
    if weights.len() != n {
        return Err(Error::InvalidParameter(format!(
            "target has {} weights for {n} branches",
            weights.len()
        )));
    }
    if n < 2 {
        return Err(Error::PreconditionViolated(
            "design needs at least two branches".into(),
        ));
    }
    if template.input_branch() != 0 {
        return Err(Error::PreconditionViolated(
            "design assumes the photon enters on branch 1".into(),
        ));
    }
    let rabi1 = template.branch(0).drive_rabi;
    require_positive("rabi1 (scale anchor)", rabi1)?;
    let lossless = template.is_lossless();
    let total = target.total();
    if lossless && (total - 1.0).abs() > 1e-9 {
        return Err(Error::UnsatisfiableTarget(format!(
            "lossless system conserves flux but weights sum to {total}"
        )));
    }
    if !lossless && total > 1.0 - 1e-12 {
        return Err(Error::UnsatisfiableTarget(
            "lossy system cannot deliver unit flux".into(),
        ));
    }
    if let Some(j) = (1..n).find(|&j| weights[j] > 0.0 && template.branch(j).waveguide_rate == 0.0)
    {
        return Err(Error::UnsatisfiableTarget(format!(
            "branch {} has no waveguide coupling but a nonzero target",
            j + 1
        )));
    }

    let free: Vec<usize> = (1..n).filter(|&j| weights[j] > 0.0).collect();
    let residual_branches = if lossless {
        let mut active = vec![0];
        active.extend(&free);
        // drop the largest weight; ties keep the j ≥ 2 residuals
        let drop = *active
            .iter()
            .max_by(|&&a, &&b| weights[a].total_cmp(&weights[b]).then(b.cmp(&a)))
            .unwrap();
        active.into_iter().filter(|&j| j != drop).collect()
    } else {
        free.clone()
    };
    let problem = Problem {
        template,
        weights,
        delta,
        rabi1,
        free,
        residual_branches,
    };

    let initial = match &options.initial_ratios {
        Some(r) if r.len() == n - 1 => r.clone(),
        Some(r) => {
            return Err(Error::InvalidParameter(format!(
                "initial guess has {} ratios, expected {}",
                r.len(),
                n - 1
            )))
        }
        None => resonant_closed_form_ratios(template, target),
    };
    let mut x: Vec<f64> = problem
        .free
        .iter()
        .map(|&j| (initial[j - 1] * rabi1).max(1e-6 * rabi1))
        .collect();

    let finish = |x: &[f64], iterations: usize| -> Result<DesignSolution> {
        let (config, achieved) = problem.evaluate(x)?;
        let residual = problem.report(&achieved);
        let rabi_ratios: Vec<f64> = (1..n)
            .map(|j| config.branch(j).drive_rabi / rabi1)
            .collect();
        if residual <= options.tolerance {
            Ok(DesignSolution {
                rabi_ratios,
                residual,
                iterations,
                achieved,
                config,
            })
        } else {
            Err(Error::NoConvergence {
                iterations,
                residual,
                rabi_ratios,
            })
        }
    };

    if x.is_empty() {
        return finish(&x, 0);
    }

    let m = x.len();
    let mut rho = problem.residuals(&x)?;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        if max_abs(&rho) <= 1e-15 {
            break;
        }
        iterations += 1;

        let mut jac = DMatrix::<f64>::zeros(m, m);
        for k in 0..m {
            let h = options.fd_step * x[k].abs().max(1e-3 * rabi1);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] = (xm[k] - h).max(0.0);
            let span = xp[k] - xm[k];
            let rp = problem.residuals(&xp)?;
            let rm = problem.residuals(&xm)?;
            for i in 0..m {
                jac[(i, k)] = (rp[i] - rm[i]) / span;
            }
        }
        let rhs = DVector::from_iterator(m, rho.iter().map(|r| -r));
        let step = match jac.svd(true, true).solve(&rhs, 1e-14) {
            Ok(s) => s,
            Err(_) => break,
        };

        let current = max_abs(&rho);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + lambda * s)
                .collect();
            if trial.iter().all(|&v| v > 0.0) {
                if let Ok(r) = problem.residuals(&trial) {
                    if max_abs(&r) < current {
                        accepted = Some((trial, r));
                        break;
                    }
                }
            }
            lambda *= options.damping;
        }
        match accepted {
            Some((trial, r)) => {
                x = trial;
                rho = r;
            }
            // no descent left: at the rounding floor or stuck
            None => break,
        }
    }
    finish(&x, iterations)
}

/// W fidelity as every γⱼ is set to each value in turn, drives fixed.
pub fn fidelity_vs_decay(config: &SystemConfig, decay_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    decay_values
        .iter()
        .map(|&g| {
            let c = config.with_uniform_decay(g)?;
            let r = if c.len() == 3 {
                transmission_three_branch_resonant(&c)?
            } else {
                transmission_general(0.0, &c)?
            };
            Ok((g, r.fidelity_w()))
        })
        .collect()
}
