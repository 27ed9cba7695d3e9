//! Time-domain oracle: integrates the single-excitation amplitude equations
//! for a Gaussian pulse on the even Sagnac mode and recovers transmission
//! spectra from the recorded envelopes.
//!
//! ```text
//! ċⱼ  = −(Γⱼ + γⱼ/2) cⱼ + i√(2Γⱼ) cⱼᵢₙ(t) + iΩⱼ c_e
//! ċ_e = i Σⱼ Ωⱼ cⱼ
//! cⱼₒᵤₜ(t) = cⱼᵢₙ(t) + i√(2Γⱼ) cⱼ(t)
//! ```
//!
//! The system is linear and time invariant, so `OUTⱼ(Δ)/IN(Δ)` of the sampled
//! envelopes reproduces the steady-state amplitude as long as the window
//! contains the whole pulse and the atom has emitted everything by `t₁`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::format::fmt_row;
use crate::params::SystemConfig;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Balance residual, relative to the injected probability, beyond which a run
/// is rejected.
pub const CONSERVATION_TOLERANCE: f64 = 1e-6;
/// Spectral weight, relative to the pulse peak, below which `OUT/IN` is noise.
pub const MIN_SPECTRAL_WEIGHT: f64 = 1e-6;
/// Atomic population left at `t₁` above which emission is incomplete.
pub const MAX_RESIDUAL_POPULATION: f64 = 1e-10;

/// Half-width of the pulse window in units of 1/σ.
const PULSE_HALF_WIDTH: f64 = 5.0;
/// Ring-down allowance in units of the slowest atomic decay time.
const RING_DOWN_FACTOR: f64 = 30.0;
const STEP_SAFETY: f64 = 0.01;
const MAX_STEPS: usize = 20_000_000;

/// Left/right to even/odd: `((c_L + c_R)/√2, (c_L − c_R)/√2)`.
pub fn mode_transform_lr_to_eo(c_l: Complex64, c_r: Complex64) -> (Complex64, Complex64) {
    ((c_l + c_r) * FRAC_1_SQRT_2, (c_l - c_r) * FRAC_1_SQRT_2)
}

/// Even/odd back to left/right. The transform is real symmetric and
/// orthogonal, so it is its own inverse.
pub fn mode_transform_eo_to_lr(c_e: Complex64, c_o: Complex64) -> (Complex64, Complex64) {
    ((c_e + c_o) * FRAC_1_SQRT_2, (c_e - c_o) * FRAC_1_SQRT_2)
}

/// Gaussian input pulse centred at `t = 0`:
/// `in(t) ∝ scale · exp(−σ²t²) · exp(iΔ_c t)`, whose power spectrum has
/// standard deviation σ about Δ_c. The envelope is normalized on the time
/// grid so that `∫|in|²dt = |scale|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub center_detuning: f64,
    pub bandwidth: f64,
    pub scale: Complex64,
}

impl PulseSpec {
    pub fn new(center_detuning: f64, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pulse bandwidth must be positive, got {bandwidth}"
            )));
        }
        if !center_detuning.is_finite() {
            return Err(Error::InvalidParameter(
                "pulse centre must be finite".into(),
            ));
        }
        Ok(Self {
            center_detuning,
            bandwidth,
            scale: Complex64::new(1.0, 0.0),
        })
    }

    pub fn with_scale(mut self, scale: Complex64) -> Self {
        self.scale = scale;
        self
    }

    fn shape(&self, t: f64) -> Complex64 {
        let s = self.bandwidth * t;
        Complex64::from_polar((-s * s).exp(), self.center_detuning * t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::InvalidGrid(format!(
                "need t0 < t1, got [{t0}, {t1}]"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        let steps = ((t1 - t0) / dt).round();
        if steps > MAX_STEPS as f64 {
            return Err(Error::InvalidGrid(format!(
                "{steps} steps exceeds the {MAX_STEPS} step limit"
            )));
        }
        Ok(Self { t0, t1, dt })
    }

    /// Largest step allowed for `config` and `pulse`:
    /// `0.01 / max(Γⱼ, Ωⱼ, γⱼ, |Δ_c| + 5σ)`.
    pub fn step_bound(config: &SystemConfig, pulse: &PulseSpec) -> f64 {
        let fastest = config
            .max_rate()
            .max(pulse.center_detuning.abs() + 5.0 * pulse.bandwidth);
        STEP_SAFETY / fastest
    }

    /// Grid covering the pulse (±5/σ) plus a ring-down tail of 30 slowest
    /// atomic decay times, at the largest permitted step.
    pub fn for_pulse(config: &SystemConfig, pulse: &PulseSpec) -> Result<Self> {
        let rate = slowest_decay_rate(config);
        if !(rate > 1e-9) {
            return Err(Error::InvalidGrid(
                "atomic system has an undamped mode and never rings down".into(),
            ));
        }
        let half = PULSE_HALF_WIDTH / pulse.bandwidth;
        let t0 = -half;
        let t1 = half + RING_DOWN_FACTOR / rate;
        let bound = Self::step_bound(config, pulse);
        let steps = ((t1 - t0) / bound).ceil();
        Self::new(t0, t1, (t1 - t0) / steps)
    }

    pub fn steps(&self) -> usize {
        ((self.t1 - self.t0) / self.dt).round() as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn satisfies_step_bound(&self, config: &SystemConfig, pulse: &PulseSpec) -> bool {
        self.dt <= Self::step_bound(config, pulse) * (1.0 + 1e-12)
    }
}

/// Amplitudes that can actually be excited: branches with Γ or Ω nonzero
/// (or the input), plus c_e if anything is driven.
fn active_modes(config: &SystemConfig) -> (Vec<usize>, bool) {
    let active: Vec<usize> = (0..config.len())
        .filter(|&j| {
            let b = config.branch(j);
            j == config.input_branch() || b.waveguide_rate > 0.0 || b.drive_rabi > 0.0
        })
        .collect();
    let driven = active.iter().any(|&j| config.branch(j).drive_rabi > 0.0);
    (active, driven)
}

/// Smallest `−Re λ` over the eigenvalues of the homogeneous atomic dynamics.
pub fn slowest_decay_rate(config: &SystemConfig) -> f64 {
    let (active, driven) = active_modes(config);
    let m = active.len() + usize::from(driven);
    let e = active.len();
    let mut gen = DMatrix::<Complex64>::zeros(m, m);
    for (row, &j) in active.iter().enumerate() {
        let b = config.branch(j);
        gen[(row, row)] = Complex64::from(-b.total_damping());
        if driven {
            gen[(row, e)] = I * b.drive_rabi;
            gen[(e, row)] = I * b.drive_rabi;
        }
    }
    match gen.schur().eigenvalues() {
        Some(ev) => ev.iter().map(|l| -l.re).fold(f64::INFINITY, f64::min),
        None => 0.0,
    }
}

/// Everything recorded by one [`integrate`] run.
#[derive(Debug, Clone)]
pub struct AmplitudeState {
    grid: TimeGrid,
    input_branch: usize,
    /// Even-mode input envelope on the input branch, one sample per grid point.
    input: Vec<Complex64>,
    /// Even-mode output envelope per branch.
    outputs: Vec<Vec<Complex64>>,
    /// Excited-state amplitudes at `t₁`.
    pub atoms: Vec<Complex64>,
    /// Ground-state |e⟩ amplitude at `t₁`.
    pub ground_e: Complex64,
    injected: f64,
    decayed: f64,
    max_residual: f64,
}

impl AmplitudeState {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn input_branch(&self) -> usize {
        self.input_branch
    }

    pub fn input_envelope(&self) -> &[Complex64] {
        &self.input
    }

    pub fn output_envelope(&self, branch: usize) -> &[Complex64] {
        &self.outputs[branch]
    }

    pub fn branches(&self) -> usize {
        self.outputs.len()
    }

    /// `∫|in|²dt` on the grid.
    pub fn injected_probability(&self) -> f64 {
        self.injected
    }

    /// `∫|outⱼ|²dt` on the grid.
    pub fn output_probability(&self, branch: usize) -> f64 {
        trapezoid_power(&self.outputs[branch], self.grid.dt)
    }

    /// Probability lost through γⱼ.
    pub fn decayed_probability(&self) -> f64 {
        self.decayed
    }

    pub fn final_population(&self) -> f64 {
        self.atoms.iter().map(|c| c.norm_sqr()).sum::<f64>() + self.ground_e.norm_sqr()
    }

    /// Largest relative violation of probability balance over all steps.
    pub fn conservation_residual(&self) -> f64 {
        self.max_residual
    }

    /// Discrete Fourier component `Σₖ f(tₖ) e^{−iΔtₖ} dt`.
    fn spectrum(&self, samples: &[Complex64], delta: f64) -> Complex64 {
        samples
            .iter()
            .enumerate()
            .map(|(k, &f)| f * Complex64::from_polar(1.0, -delta * self.grid.time(k)))
            .sum::<Complex64>()
            * self.grid.dt
    }

    /// Time series dump: `t,re_in,im_in,re_out_1,im_out_1,...`.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> io::Result<()> {
        let mut header = vec!["t".to_string(), "re_in".into(), "im_in".into()];
        for j in 1..=self.outputs.len() {
            header.push(format!("re_out_{j}"));
            header.push(format!("im_out_{j}"));
        }
        writeln!(out, "{}", header.join(","))?;
        let mut row = Vec::with_capacity(header.len());
        for k in (0..self.input.len()).step_by(stride.max(1)) {
            row.clear();
            row.extend([self.grid.time(k), self.input[k].re, self.input[k].im]);
            for o in &self.outputs {
                row.extend([o[k].re, o[k].im]);
            }
            writeln!(out, "{}", fmt_row(&row))?;
        }
        Ok(())
    }
}

fn trapezoid_power(samples: &[Complex64], dt: f64) -> f64 {
    match samples {
        [] => 0.0,
        [only] => only.norm_sqr() * dt,
        [first, .., last] => {
            let inner: f64 = samples.iter().map(|c| c.norm_sqr()).sum();
            (inner - 0.5 * (first.norm_sqr() + last.norm_sqr())) * dt
        }
    }
}

struct Dynamics {
    damping: Vec<f64>,
    emission: Vec<f64>,
    rabi: Vec<f64>,
    input_branch: usize,
}

impl Dynamics {
    fn new(config: &SystemConfig) -> Self {
        let b = config.branches();
        Self {
            damping: b.iter().map(|b| b.total_damping()).collect(),
            emission: b.iter().map(|b| (2.0 * b.waveguide_rate).sqrt()).collect(),
            rabi: b.iter().map(|b| b.drive_rabi).collect(),
            input_branch: config.input_branch(),
        }
    }

    /// Writes `d/dt (c₁..c_N, c_e)` into `out`.
    fn rhs(&self, y: &[Complex64], drive: Complex64, out: &mut [Complex64]) {
        let n = self.damping.len();
        let ce = y[n];
        let mut dce = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let mut d = -self.damping[j] * y[j] + I * self.rabi[j] * ce;
            if j == self.input_branch {
                d += I * self.emission[j] * drive;
            }
            out[j] = d;
            dce += self.rabi[j] * y[j];
        }
        out[n] = I * dce;
    }

    fn classic_rk4(&self, y: &mut [Complex64], drive: [Complex64; 3], dt: f64, ws: &mut Workspace) {
        let Workspace {
            k1,
            k2,
            k3,
            k4,
            tmp,
        } = ws;
        self.rhs(y, drive[0], k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        self.rhs(tmp, drive[1], k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        self.rhs(tmp, drive[1], k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + dt * k3[i];
        }
        self.rhs(tmp, drive[2], k4);
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

struct Workspace {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Workspace {
    fn new(len: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); len];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

/// Integrates a pulse through the atom with fixed-step classic RK4.
///
/// The atom starts in |0⟩ (all amplitudes zero). Fails with
/// [`Error::StepTooLarge`] if the probability balance
/// `Σ|cⱼ|² + |c_e|² + ∫|out|² + ∫γ|c|² + (input still to arrive) = ∫|in|²`
/// is violated by more than [`CONSERVATION_TOLERANCE`] at any step.
pub fn integrate(
    config: &SystemConfig,
    pulse: &PulseSpec,
    grid: &TimeGrid,
) -> Result<AmplitudeState> {
    let window = grid.t1 - grid.t0;
    if window < 10.0 / pulse.bandwidth || !(grid.t0 < 0.0 && grid.t1 > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "window [{}, {}] must contain t = 0 and span at least 10/σ = {}",
            grid.t0,
            grid.t1,
            10.0 / pulse.bandwidth
        )));
    }
    let n = config.len();
    let steps = grid.steps();
    let dt = grid.dt;
    let dynamics = Dynamics::new(config);
    let input_branch = config.input_branch();

    // normalize on the sample grid
    let raw_power: f64 = (0..=steps)
        .map(|k| pulse.shape(grid.time(k)).norm_sqr())
        .sum::<f64>()
        * dt;
    let norm = pulse.scale / raw_power.sqrt();
    let drive_at = |t: f64| norm * pulse.shape(t);

    let input: Vec<Complex64> = (0..=steps).map(|k| drive_at(grid.time(k))).collect();
    let injected = trapezoid_power(&input, dt);
    let mut outputs = vec![Vec::with_capacity(steps + 1); n];

    let mut y = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut ws = Workspace::new(n + 1);

    let decay: Vec<f64> = config.branches().iter().map(|b| b.decay_rate).collect();
    let decay_power =
        |y: &[Complex64]| -> f64 { decay.iter().zip(y).map(|(g, c)| g * c.norm_sqr()).sum() };
    let record = |y: &[Complex64], k: usize, outputs: &mut Vec<Vec<Complex64>>| -> f64 {
        let mut power = 0.0;
        for j in 0..n {
            let mut o = I * dynamics.emission[j] * y[j];
            if j == input_branch {
                o += input[k];
            }
            power += o.norm_sqr();
            outputs[j].push(o);
        }
        power
    };

    let mut out_power = record(&y, 0, &mut outputs);
    let mut in_power = input[0].norm_sqr();
    let mut loss_power = 0.0;
    let (mut emitted, mut arrived, mut decayed) = (0.0, 0.0, 0.0);
    let mut max_residual: f64 = 0.0;
    let scale = if injected > 0.0 { injected } else { 1.0 };

    for k in 0..steps {
        let t = grid.time(k);
        let drive = [input[k], drive_at(t + 0.5 * dt), input[k + 1]];
        dynamics.classic_rk4(&mut y, drive, dt, &mut ws);

        let next_out = record(&y, k + 1, &mut outputs);
        let next_in = input[k + 1].norm_sqr();
        let next_loss = decay_power(&y);
        emitted += 0.5 * dt * (out_power + next_out);
        arrived += 0.5 * dt * (in_power + next_in);
        decayed += 0.5 * dt * (loss_power + next_loss);
        out_power = next_out;
        in_power = next_in;
        loss_power = next_loss;

        let population: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        let residual = (population + emitted + decayed - arrived).abs() / scale;
        max_residual = max_residual.max(residual);
    }

    if !(max_residual <= CONSERVATION_TOLERANCE) {
        return Err(Error::StepTooLarge {
            residual: max_residual,
            tolerance: CONSERVATION_TOLERANCE,
            dt,
        });
    }

    Ok(AmplitudeState {
        grid: *grid,
        input_branch,
        input,
        outputs,
        atoms: y[..n].to_vec(),
        ground_e: y[n],
        injected,
        decayed,
        max_residual,
    })
}

/// `Tⱼ(Δ) = OUTⱼ(Δ) / IN(Δ)` from the recorded envelopes.
pub fn extract_transmission(state: &AmplitudeState, delta: f64) -> Result<Vec<Complex64>> {
    let population = state.final_population() / state.injected.max(f64::MIN_POSITIVE);
    if population > MAX_RESIDUAL_POPULATION {
        return Err(Error::IncompleteEmission { population });
    }
    let input_spec = state.spectrum(&state.input, delta);
    // the spectral peak of a chirp-free Gaussian is Σ|in| dt
    let peak_spec: f64 = state.input.iter().map(|c| c.norm()).sum::<f64>() * state.grid.dt;
    let relative = input_spec.norm() / peak_spec.max(f64::MIN_POSITIVE);
    if !(relative >= MIN_SPECTRAL_WEIGHT) {
        return Err(Error::InsufficientSpectralWeight { delta, relative });
    }
    Ok(state
        .outputs
        .iter()
        .map(|o| state.spectrum(o, delta) / input_spec)
        .collect())
}

/// Convenience: integrate one pulse centred on `delta` on the default grid
/// and extract the amplitudes there.
pub fn transmission_at(
    config: &SystemConfig,
    delta: f64,
    bandwidth: f64,
) -> Result<Vec<Complex64>> {
    let pulse = PulseSpec::new(delta, bandwidth)?;
    let grid = TimeGrid::for_pulse(config, &pulse)?;
    let state = integrate(config, &pulse, &grid)?;
    extract_transmission(&state, delta)
}
