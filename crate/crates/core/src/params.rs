//! Physical parameters of the multi-Λ atom.
//!
//! All rates are expressed in units of the first branch's waveguide rate Γ₁,
//! so a validated [`SystemConfig`] always has `branches[0].waveguide_rate == 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One Λ branch: excited state |j⟩ coupled to the waveguide on |0⟩↔|j⟩ and
/// driven classically on |j⟩↔|e⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchParams {
    /// Γⱼ = 2π gⱼ².
    pub waveguide_rate: f64,
    /// γⱼ, spontaneous decay of |j⟩ out of the guided modes.
    pub decay_rate: f64,
    /// Ωⱼ, classical drive on |j⟩↔|e⟩.
    pub drive_rabi: f64,
    /// ωⱼ₀ label. Never enters a formula.
    pub transition_frequency: Option<f64>,
}

impl BranchParams {
    pub fn new(waveguide_rate: f64, decay_rate: f64, drive_rabi: f64) -> Self {
        Self {
            waveguide_rate,
            decay_rate,
            drive_rabi,
            transition_frequency: None,
        }
    }

    pub fn lossless(waveguide_rate: f64, drive_rabi: f64) -> Self {
        Self::new(waveguide_rate, 0.0, drive_rabi)
    }

    pub fn with_frequency(mut self, frequency: f64) -> Self {
        self.transition_frequency = Some(frequency);
        self
    }

    /// Raw atom-waveguide coupling gⱼ = √(Γⱼ/2π).
    pub fn coupling(&self) -> f64 {
        (self.waveguide_rate / (2.0 * PI)).sqrt()
    }

    /// Γ′ⱼ = Γⱼ + γⱼ/2, the total damping of the excited amplitude.
    pub fn total_damping(&self) -> f64 {
        self.waveguide_rate + 0.5 * self.decay_rate
    }

    fn validate(&self, index: usize) -> Result<()> {
        let fields = [
            ("waveguide_rate", self.waveguide_rate),
            ("decay_rate", self.decay_rate),
            ("drive_rabi", self.drive_rabi),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "branch {}: {name} must be finite and >= 0, got {value}",
                    index + 1
                )));
            }
        }
        Ok(())
    }
}

/// Ordered branches plus the branch the photon enters on.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    branches: Vec<BranchParams>,
    input_branch: usize,
}

impl SystemConfig {
    /// Validates and normalizes so that Γ₁ = 1. `input_branch` is zero-based.
    ///
    /// If the first branch's Γ is not 1 every rate (Γⱼ, γⱼ, Ωⱼ) is divided by
    /// it, which converts dimensionful input into Γ₁ units.
    pub fn new(branches: Vec<BranchParams>, input_branch: usize) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one branch required".into(),
            ));
        }
        if input_branch >= branches.len() {
            return Err(Error::InvalidParameter(format!(
                "input branch {} out of range for {} branches",
                input_branch + 1,
                branches.len()
            )));
        }
        for (i, b) in branches.iter().enumerate() {
            b.validate(i)?;
        }
        let unit = branches[0].waveguide_rate;
        if unit <= 0.0 {
            return Err(Error::InvalidParameter(
                "branch 1 waveguide rate defines the unit and must be > 0".into(),
            ));
        }
        let branches = branches
            .into_iter()
            .map(|b| BranchParams {
                waveguide_rate: b.waveguide_rate / unit,
                decay_rate: b.decay_rate / unit,
                drive_rabi: b.drive_rabi / unit,
                transition_frequency: b.transition_frequency,
            })
            .collect::<Vec<_>>();
        let mut config = Self {
            branches,
            input_branch,
        };
        // exact, regardless of rounding in the division
        config.branches[0].waveguide_rate = 1.0;
        Ok(config)
    }

    /// Photon enters on branch 1.
    pub fn from_branches(branches: Vec<BranchParams>) -> Result<Self> {
        Self::new(branches, 0)
    }

    /// Two-branch config with Γ₁ = 1 and equal decay on both branches.
    pub fn two_branch(gamma2: f64, rabi1: f64, rabi2: f64, decay: f64) -> Result<Self> {
        Self::from_branches(vec![
            BranchParams::new(1.0, decay, rabi1),
            BranchParams::new(gamma2, decay, rabi2),
        ])
    }

    pub fn branches(&self) -> &[BranchParams] {
        &self.branches
    }

    pub fn branch(&self, index: usize) -> &BranchParams {
        &self.branches[index]
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn input_branch(&self) -> usize {
        self.input_branch
    }

    pub fn is_lossless(&self) -> bool {
        self.branches.iter().all(|b| b.decay_rate == 0.0)
    }

    /// Copy with every γⱼ replaced by `decay`.
    pub fn with_uniform_decay(&self, decay: f64) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| BranchParams {
                decay_rate: decay,
                ..*b
            })
            .collect();
        Self::new(branches, self.input_branch)
    }

    /// Copy with the drives replaced; `rabi.len()` must equal the branch count.
    pub fn with_drives(&self, rabi: &[f64]) -> Result<Self> {
        if rabi.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} drive values, got {}",
                self.len(),
                rabi.len()
            )));
        }
        let branches = self
            .branches
            .iter()
            .zip(rabi)
            .map(|(b, &r)| BranchParams {
                drive_rabi: r,
                ..*b
            })
            .collect();
        Self::new(branches, self.input_branch)
    }

    /// Largest rate present (Γⱼ, γⱼ, Ωⱼ), used to size integration steps.
    pub fn max_rate(&self) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| [b.waveguide_rate, b.decay_rate, b.drive_rabi])
            .fold(0.0, f64::max)
    }
}
