//! Sweep axes, constraint bindings and per-point parameter resolution.

use std::fmt;

use super::config::KeyValues;
use super::expr::Expr;
use super::SweepError;
use crate::design::w_split_ratio;
use crate::params::{BranchParams, SystemConfig};

/// A sweepable or constrainable parameter. Branch indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Delta,
    Gamma(usize),
    Decay(usize),
    Rabi(usize),
    /// Every γⱼ at once.
    DecayAll,
    /// Reduced drive `Ω₂√Γ₁/(Ω₁√Γ₂)` used by the W condition.
    WRatio,
}

impl Param {
    pub fn parse(name: &str) -> Option<Self> {
        let indexed = |prefix: &str| -> Option<usize> {
            let rest = name.strip_prefix(prefix)?;
            let k: usize = rest.parse().ok()?;
            (k >= 1 && !rest.starts_with('0')).then(|| k - 1)
        };
        match name {
            "delta" => Some(Param::Delta),
            "decay" => Some(Param::DecayAll),
            "w_ratio" => Some(Param::WRatio),
            _ => indexed("gamma")
                .map(Param::Gamma)
                .or_else(|| indexed("decay").map(Param::Decay))
                .or_else(|| indexed("rabi").map(Param::Rabi)),
        }
    }

    fn branch(&self) -> Option<usize> {
        match self {
            Param::Gamma(j) | Param::Decay(j) | Param::Rabi(j) => Some(*j),
            _ => None,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Delta => write!(f, "delta"),
            Param::Gamma(j) => write!(f, "gamma{}", j + 1),
            Param::Decay(j) => write!(f, "decay{}", j + 1),
            Param::Rabi(j) => write!(f, "rabi{}", j + 1),
            Param::DecayAll => write!(f, "decay"),
            Param::WRatio => write!(f, "w_ratio"),
        }
    }
}

/// Physical parameters as written in the config (raw units; Γ₁ need not be 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BaseParams {
    pub input_branch: usize,
    pub gamma: Vec<f64>,
    pub decay: Vec<f64>,
    pub rabi: Vec<f64>,
    pub frequency: Vec<Option<f64>>,
    pub delta: f64,
    pub w_ratio: f64,
    /// Impose Γⱼ = Γ₂ and Ωⱼ = Ω₁·w_ratio·√(Γ₂/Γ₁) for j ≥ 2.
    pub w_condition: bool,
}

pub const MAX_BRANCHES: usize = 16;

impl BaseParams {
    pub fn from_kv(kv: &KeyValues) -> Result<Self, SweepError> {
        let n = kv.count("n_branches")?.unwrap_or(2);
        if !(1..=MAX_BRANCHES).contains(&n) {
            return Err(kv.error(
                "n_branches",
                format!("must be in 1..={MAX_BRANCHES}, got {n}"),
            ));
        }
        let input = kv.count("input_branch")?.unwrap_or(1);
        if !(1..=n).contains(&input) {
            return Err(kv.error("input_branch", format!("must be in 1..={n}, got {input}")));
        }
        let mut p = Self {
            input_branch: input - 1,
            gamma: vec![1.0; n],
            decay: vec![0.0; n],
            rabi: vec![0.0; n],
            frequency: vec![None; n],
            delta: kv.number_or("delta", 0.0)?,
            w_ratio: kv.number_or("w_ratio", w_split_ratio(3))?,
            w_condition: false,
        };
        for j in 0..n {
            let k = j + 1;
            p.gamma[j] = kv.number_or(&format!("gamma{k}"), 1.0)?;
            p.decay[j] = kv.number_or(&format!("decay{k}"), 0.0)?;
            p.rabi[j] = kv.number_or(&format!("rabi{k}"), 0.0)?;
            p.frequency[j] = kv.number(&format!("freq{k}"))?;
        }
        if let Some(d) = kv.number("decay")? {
            p.decay.iter_mut().for_each(|g| *g = d);
        }
        Ok(p)
    }

    pub fn n_branches(&self) -> usize {
        self.gamma.len()
    }

    pub fn get(&self, param: Param) -> f64 {
        match param {
            Param::Delta => self.delta,
            Param::Gamma(j) => self.gamma[j],
            Param::Decay(j) | Param::Rabi(j) if j >= self.n_branches() => f64::NAN,
            Param::Decay(j) => self.decay[j],
            Param::Rabi(j) => self.rabi[j],
            Param::DecayAll => self.decay[0],
            Param::WRatio => self.w_ratio,
        }
    }

    pub fn set(&mut self, param: Param, value: f64) {
        match param {
            Param::Delta => self.delta = value,
            Param::Gamma(j) => self.gamma[j] = value,
            Param::Decay(j) => self.decay[j] = value,
            Param::Rabi(j) => self.rabi[j] = value,
            Param::DecayAll => self.decay.iter_mut().for_each(|g| *g = value),
            Param::WRatio => self.w_ratio = value,
        }
    }

    pub fn supports(&self, param: Param) -> bool {
        param.branch().is_none_or(|j| j < self.n_branches())
    }

    /// Normalized system and detuning (both in Γ₁ units).
    pub fn resolve(&self) -> crate::Result<(SystemConfig, f64)> {
        let n = self.n_branches();
        let mut gamma = self.gamma.clone();
        let mut rabi = self.rabi.clone();
        if self.w_condition && n >= 2 {
            let per = self.w_ratio * (gamma[1] / gamma[0]).sqrt() * rabi[0];
            for j in 1..n {
                gamma[j] = gamma[1];
                rabi[j] = per;
            }
        }
        let branches = (0..n)
            .map(|j| {
                let b = BranchParams::new(gamma[j], self.decay[j], rabi[j]);
                match self.frequency[j] {
                    Some(f) => b.with_frequency(f),
                    None => b,
                }
            })
            .collect();
        let config = SystemConfig::new(branches, self.input_branch)?;
        Ok((config, self.delta / self.gamma[0]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: Param, min: f64, max: f64, count: usize) -> Result<Self, String> {
        if count < 2 {
            return Err(format!("axis {param}: count must be >= 2, got {count}"));
        }
        if !(min < max) {
            return Err(format!("axis {param}: need min < max, got [{min}, {max}]"));
        }
        Ok(Self {
            param,
            min,
            max,
            count,
        })
    }

    /// Evenly spaced, both ends included.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    fn from_kv(
        kv: &KeyValues,
        prefix: &str,
        base: &BaseParams,
    ) -> Result<Option<Self>, SweepError> {
        let Some(name) = kv.text(prefix) else {
            return Ok(None);
        };
        let param = Param::parse(name)
            .filter(|p| base.supports(*p))
            .ok_or_else(|| kv.error(prefix, format!("unknown parameter `{name}`")))?;
        let min = kv.require_number(&format!("{prefix}_min"))?;
        let max = kv.require_number(&format!("{prefix}_max"))?;
        let count = kv
            .count(&format!("{prefix}_count"))?
            .ok_or_else(|| kv.error(&format!("{prefix}_count"), "required key missing"))?;
        Self::new(param, min, max, count)
            .map(Some)
            .map_err(|m| kv.error(prefix, m))
    }
}

/// `param = expr`, where `expr` may reference axis names only.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub target: Param,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub constraints: Vec<Constraint>,
}

pub const CONSTRAINT_PREFIX: &str = "constraint.";

impl SweepGrid {
    pub fn new(axes: Vec<Axis>, constraints: Vec<Constraint>) -> Result<Self, SweepError> {
        for c in &constraints {
            if axes.iter().any(|a| a.param == c.target) {
                return Err(SweepError::UnresolvableConstraint {
                    expression: format!("{} = {}", c.target, c.expr.source()),
                    reason: "target is already a sweep axis".into(),
                });
            }
            for name in c.expr.names() {
                if !axes.iter().any(|a| a.param.to_string() == name) {
                    return Err(SweepError::UnresolvableConstraint {
                        expression: format!("{} = {}", c.target, c.expr.source()),
                        reason: format!("`{name}` is not a sweep axis"),
                    });
                }
            }
        }
        Ok(Self { axes, constraints })
    }

    /// Reads `axis1`, optional `axis2` and every `constraint.<param>` key.
    pub fn from_kv(kv: &KeyValues, base: &BaseParams) -> Result<Self, SweepError> {
        let mut axes = Vec::new();
        if let Some(a) = Axis::from_kv(kv, "axis1", base)? {
            axes.push(a);
        }
        if let Some(a) = Axis::from_kv(kv, "axis2", base)? {
            if axes.is_empty() {
                return Err(kv.error("axis2", "axis2 given without axis1"));
            }
            if a.param == axes[0].param {
                return Err(kv.error("axis2", "axis2 duplicates axis1"));
            }
            axes.push(a);
        }
        let mut constraints = Vec::new();
        for (key, entry) in kv.iter() {
            let Some(name) = key.strip_prefix(CONSTRAINT_PREFIX) else {
                continue;
            };
            let expression = format!("{name} = {}", entry.value);
            let target = Param::parse(name)
                .filter(|p| base.supports(*p))
                .ok_or_else(|| SweepError::UnresolvableConstraint {
                    expression: expression.clone(),
                    reason: format!("unknown parameter `{name}`"),
                })?;
            let expr =
                Expr::parse(&entry.value).map_err(|reason| SweepError::UnresolvableConstraint {
                    expression: expression.clone(),
                    reason,
                })?;
            constraints.push(Constraint { target, expr });
        }
        Self::new(axes, constraints)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of point `index` in row-major order (first axis slowest).
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut idx = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            idx[k] = rem % a.count;
            rem /= a.count;
        }
        self.axes.iter().zip(idx).map(|(a, i)| a.value(i)).collect()
    }

    pub fn apply(&self, base: &BaseParams, values: &[f64]) -> Result<BaseParams, SweepError> {
        let mut p = base.clone();
        for (a, &v) in self.axes.iter().zip(values) {
            p.set(a.param, v);
        }
        for c in &self.constraints {
            let v = c
                .expr
                .eval(|name| {
                    self.axes
                        .iter()
                        .zip(values)
                        .find(|(a, _)| a.param.to_string() == name)
                        .map(|(_, &v)| v)
                })
                .map_err(|reason| SweepError::UnresolvableConstraint {
                    expression: format!("{} = {}", c.target, c.expr.source()),
                    reason,
                })?;
            // a drive's sign is only a phase, so Ω = Δ also covers Δ < 0
            let v = if matches!(c.target, Param::Rabi(_)) {
                v.abs()
            } else {
                v
            };
            p.set(c.target, v);
        }
        Ok(p)
    }

    pub fn header(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.param.to_string()).collect()
    }
}
