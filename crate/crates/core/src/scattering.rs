//! Steady-state single-photon transmission through the even Sagnac mode.
//!
//! Three routes are provided: the two-branch closed form (third drive off),
//! the three-branch closed form at resonance, and a general N-branch
//! frequency-domain linear solve. The closed forms and the linear solve are
//! independent and are cross-checked in the tests.
//!
//! Conventions: a monochromatic component at detuning Δ₁ carries the time
//! dependence `exp(iΔ₁t)`, so the atomic amplitudes obey
//!
//! ```text
//! Aⱼ cⱼ − iΩⱼ c_e = i√(2Γⱼ) inⱼ,      Aⱼ = iΔ₁ + Γⱼ + γⱼ/2
//! Δ₁ c_e − Σⱼ Ωⱼ cⱼ = 0
//! Tⱼ = δⱼ,in + i√(2Γⱼ) cⱼ
//! ```
//!
//! where √(2Γⱼ) = 2√π gⱼ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{BranchParams, SystemConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// |D| below this is treated as an exactly vanishing denominator.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-30;
/// Negative loss within this of zero is rounding and clamps to 0.
pub const LOSS_CLAMP: f64 = 1e-10;
/// Negative loss beyond this is a solver bug.
pub const LOSS_BROKEN: f64 = 1e-8;

/// `Aⱼ = iΔ₁ + Γⱼ + γⱼ/2`.
pub fn effective_denominator_term(delta: f64, branch: &BranchParams) -> Complex64 {
    Complex64::new(branch.total_damping(), delta)
}

/// Output amplitudes for one monochromatic input photon, plus derived
/// loss and W fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringResult {
    amplitudes: Vec<Complex64>,
    loss: f64,
    fidelity_w: f64,
}

impl ScatteringResult {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let loss = loss_probability(&amplitudes)?;
        let fidelity_w = w_fidelity(&amplitudes);
        Ok(Self {
            amplitudes,
            loss,
            fidelity_w,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, branch: usize) -> Complex64 {
        self.amplitudes[branch]
    }

    /// |Tⱼ|² for every branch.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|t| t.norm_sqr()).collect()
    }

    pub fn probability(&self, branch: usize) -> f64 {
        self.amplitudes[branch].norm_sqr()
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    pub fn fidelity_w(&self) -> f64 {
        self.fidelity_w
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// `P_loss = 1 − Σⱼ|Tⱼ|²`, clamped to zero for rounding-level negatives.
pub fn loss_probability(amplitudes: &[Complex64]) -> Result<f64> {
    let loss = 1.0 - amplitudes.iter().map(|t| t.norm_sqr()).sum::<f64>();
    if loss < -LOSS_BROKEN {
        return Err(Error::InvariantBroken { loss });
    }
    if (-LOSS_CLAMP..0.0).contains(&loss) {
        return Ok(0.0);
    }
    Ok(loss)
}

/// Squared overlap of the (unnormalized) output vector with the equal-phase
/// W state, `|Σⱼ Tⱼ|² / N`. Photon loss counts as infidelity.
pub fn w_fidelity(amplitudes: &[Complex64]) -> f64 {
    if amplitudes.is_empty() {
        return 0.0;
    }
    let sum: Complex64 = amplitudes.iter().sum();
    sum.norm_sqr() / amplitudes.len() as f64
}

/// Overlap after post-selecting on the photon surviving,
/// `|Σⱼ Tⱼ|² / (N Σⱼ|Tⱼ|²)`. Insensitive to loss; for comparison only.
pub fn w_fidelity_normalized(amplitudes: &[Complex64]) -> f64 {
    let norm: f64 = amplitudes.iter().map(|t| t.norm_sqr()).sum();
    if norm == 0.0 {
        return 0.0;
    }
    w_fidelity(amplitudes) / norm
}

fn require_input_on_first(config: &SystemConfig) -> Result<()> {
    if config.input_branch() != 0 {
        return Err(Error::PreconditionViolated(
            "closed-form transmission assumes the photon enters on branch 1".into(),
        ));
    }
    Ok(())
}

/// Closed-form two-branch transmission (third drive off).
pub fn transmission_two_branch(delta: f64, config: &SystemConfig) -> Result<ScatteringResult> {
    if config.len() != 2 {
        return Err(Error::PreconditionViolated(format!(
            "two-branch formula needs N = 2, got {}",
            config.len()
        )));
    }
    require_input_on_first(config)?;
    let (b1, b2) = (config.branch(0), config.branch(1));
    let a1 = effective_denominator_term(delta, b1);
    let a2 = effective_denominator_term(delta, b2);
    let (g1, g2) = (b1.waveguide_rate, b2.waveguide_rate);
    let (o1, o2) = (b1.drive_rabi, b2.drive_rabi);

    let dressed = I * delta * a2 + o2 * o2;
    let denom = a1 * dressed + o1 * o1 * a2;
    if denom.norm() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateDenominator {
            magnitude: denom.norm(),
        });
    }
    let t1 = Complex64::new(1.0, 0.0) - 2.0 * g1 * dressed / denom;
    let t2 = Complex64::from(2.0 * (g1 * g2).sqrt() * o1 * o2) / denom;
    ScatteringResult::new(vec![t1, t2])
}

/// Closed-form three-branch transmission at Δ₁ = 0. Every drive must be
/// nonzero; use [`transmission_two_branch`] or [`transmission_general`]
/// otherwise.
pub fn transmission_three_branch_resonant(config: &SystemConfig) -> Result<ScatteringResult> {
    if config.len() != 3 {
        return Err(Error::PreconditionViolated(format!(
            "three-branch formula needs N = 3, got {}",
            config.len()
        )));
    }
    require_input_on_first(config)?;
    if let Some(j) = config.branches().iter().position(|b| b.drive_rabi == 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "three-branch resonant formula requires every drive nonzero (branch {} is off)",
            j + 1
        )));
    }
    let b = config.branches();
    let gp: Vec<f64> = b.iter().map(BranchParams::total_damping).collect();
    let g: Vec<f64> = b.iter().map(|b| b.waveguide_rate).collect();
    let o: Vec<f64> = b.iter().map(|b| b.drive_rabi).collect();

    let denom =
        gp[1] * gp[2] * o[0] * o[0] + gp[0] * gp[1] * o[2] * o[2] + gp[0] * gp[2] * o[1] * o[1];
    if denom.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateDenominator {
            magnitude: denom.abs(),
        });
    }
    let t1 = 1.0 - 2.0 * g[0] * (gp[1] * o[2] * o[2] + gp[2] * o[1] * o[1]) / denom;
    let t2 = 2.0 * (g[0] * g[1]).sqrt() * o[0] * o[1] * gp[2] / denom;
    let t3 = 2.0 * (g[0] * g[2]).sqrt() * o[0] * o[2] * gp[1] / denom;
    ScatteringResult::new(vec![t1.into(), t2.into(), t3.into()])
}

/// General N-branch transmission from the steady-state linear system.
///
/// Branches with Γⱼ = Ωⱼ = 0 that are not the input are dropped (they cannot
/// be excited), and c_e is dropped when no branch is driven, since it then
/// stays in its initial (empty) state.
pub fn transmission_general(delta: f64, config: &SystemConfig) -> Result<ScatteringResult> {
    let n = config.len();
    let input = config.input_branch();
    let active: Vec<usize> = (0..n)
        .filter(|&j| {
            let b = config.branch(j);
            j == input || b.waveguide_rate > 0.0 || b.drive_rabi > 0.0
        })
        .collect();
    let driven = active.iter().any(|&j| config.branch(j).drive_rabi > 0.0);
    let m = active.len() + usize::from(driven);
    let e = active.len();

    let mut lhs = DMatrix::<Complex64>::zeros(m, m);
    let mut rhs = DVector::<Complex64>::zeros(m);
    for (row, &j) in active.iter().enumerate() {
        let b = config.branch(j);
        lhs[(row, row)] = effective_denominator_term(delta, b);
        if driven {
            lhs[(row, e)] = -I * b.drive_rabi;
            lhs[(e, row)] = Complex64::from(-b.drive_rabi);
        }
        if j == input {
            rhs[row] = I * (2.0 * b.waveguide_rate).sqrt();
        }
    }
    if driven {
        lhs[(e, e)] = Complex64::from(delta);
    }

    let lu = lhs.lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|p| p.norm())
        .fold(f64::INFINITY, f64::min);
    let singular = || {
        if delta == 0.0 {
            Error::SingularAtResonance
        } else {
            Error::DegenerateDenominator {
                magnitude: min_pivot,
            }
        }
    };
    if !(min_pivot >= DEGENERATE_DENOMINATOR) {
        return Err(singular());
    }
    let amps = lu.solve(&rhs).ok_or_else(singular)?;

    let mut t = vec![Complex64::new(0.0, 0.0); n];
    for (row, &j) in active.iter().enumerate() {
        let b = config.branch(j);
        t[j] = I * (2.0 * b.waveguide_rate).sqrt() * amps[row];
    }
    t[input] += 1.0;
    ScatteringResult::new(t)
}
