use rayon::prelude::*;

use super::config::KeyValues;
use super::grid::{BaseParams, SweepGrid, CONSTRAINT_PREFIX};
use super::{Command, SweepError, EXIT_OK, EXIT_ORACLE_MISMATCH};
use crate::design::{solve_target_amplitudes, TargetDistribution};
use crate::format::{fmt_num, fmt_row};
use crate::oracle::{integrate, PulseSpec, TimeGrid, MAX_RESIDUAL_POPULATION};
use crate::params::SystemConfig;
use crate::scattering::{transmission_general, ScatteringResult};
use crate::Error;

/// Oracle runs whose worst probability error exceeds this exit with code 4.
pub const ORACLE_MISMATCH_TOLERANCE: f64 = 1e-2;
/// Broader pulses average |T|² over a visible part of the spectrum.
pub const ORACLE_MAX_BANDWIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub summary: Vec<String>,
    pub exit_code: i32,
}

impl Report {
    fn ok(csv: String, summary: Vec<String>) -> Self {
        Self {
            csv,
            summary,
            exit_code: EXIT_OK,
        }
    }
}

const BASE_KEYS: &[&str] = &["n_branches", "input_branch", "decay"];
const BRANCH_PREFIXES: &[&str] = &["gamma", "decay", "rabi", "freq"];
const AXIS_KEYS: &[&str] = &[
    "axis1",
    "axis1_min",
    "axis1_max",
    "axis1_count",
    "axis2",
    "axis2_min",
    "axis2_max",
    "axis2_count",
];
const RANGE_KEYS: &[&str] = &["delta_min", "delta_max", "delta_count"];

fn command_keys(command: Command) -> Vec<&'static str> {
    let mut keys = Vec::new();
    match command {
        Command::Spectrum => keys.extend(RANGE_KEYS),
        Command::Grid2d => {
            keys.extend(AXIS_KEYS);
            keys.push("delta");
        }
        Command::WState => {
            keys.extend(AXIS_KEYS);
            keys.extend(["delta", "w_condition", "w_ratio"]);
        }
        Command::Oracle => {
            keys.extend(RANGE_KEYS);
            keys.extend(["deltas", "sigma", "dt"]);
        }
        Command::Design => keys.extend(["target", "delta"]),
    }
    keys
}

fn allows_constraints(command: Command) -> bool {
    matches!(command, Command::Grid2d | Command::WState)
}

fn is_branch_key(key: &str, n: usize) -> bool {
    BRANCH_PREFIXES.iter().any(|p| {
        key.strip_prefix(p)
            .and_then(|k| k.parse::<usize>().ok().filter(|_| !k.starts_with('0')))
            .is_some_and(|k| (1..=n).contains(&k))
    })
}

/// Keys belonging to another subcommand are tolerated so that one config file
/// can drive several commands. Anything else is a typo and rejected.
fn check_keys(command: Command, kv: &KeyValues, n: usize) -> Result<(), SweepError> {
    let own = command_keys(command);
    for key in kv.keys() {
        if BASE_KEYS.contains(&key) || own.contains(&key) || is_branch_key(key, n) {
            continue;
        }
        if key.starts_with(CONSTRAINT_PREFIX) {
            if allows_constraints(command) {
                continue;
            }
            return Err(kv.error(key, format!("constraints are not supported by `{command}`")));
        }
        let foreign = Command::ALL.iter().any(|c| command_keys(*c).contains(&key));
        if !foreign {
            return Err(kv.error(key, "unknown key"));
        }
    }
    Ok(())
}

/// Evaluates `count` independent points on a pool of `workers` threads and
/// returns the results in index order. The first failing index wins.
fn evaluate<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>, SweepError>
where
    T: Send,
    F: Fn(usize) -> Result<T, SweepError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Io(std::io::Error::other(e)))?;
    let results: Vec<Result<T, SweepError>> =
        pool.install(|| (0..count).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

fn at_point(names: &[String], values: &[f64]) -> impl Fn(Error) -> SweepError {
    let point = if names.is_empty() {
        "base point".to_string()
    } else {
        names
            .iter()
            .zip(values)
            .map(|(n, v)| format!("{n} = {}", fmt_num(*v)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    move |source| SweepError::AtPoint {
        point: point.clone(),
        source,
    }
}

fn detuning_range(kv: &KeyValues, default_count: usize) -> Result<Vec<f64>, SweepError> {
    let min = kv.number_or("delta_min", -5.0)?;
    let max = kv.number_or("delta_max", 5.0)?;
    let count = kv.count("delta_count")?.unwrap_or(default_count);
    if count == 0 {
        return Err(kv.error("delta_count", "empty detuning range"));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    if !(min < max) {
        return Err(kv.error("delta_max", format!("empty detuning range [{min}, {max}]")));
    }
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                max
            } else {
                min + (max - min) * i as f64 / (count - 1) as f64
            }
        })
        .collect())
}

fn header(columns: impl IntoIterator<Item = String>) -> String {
    let mut line = columns.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

fn push_row(csv: &mut String, values: &[f64]) {
    csv.push_str(&fmt_row(values));
    csv.push('\n');
}

fn branch_columns(n: usize, suffix: &str) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |j| format!("T{j}{suffix}"))
}

fn frequency_lines(base: &BaseParams) -> Vec<String> {
    base.frequency
        .iter()
        .enumerate()
        .filter_map(|(j, f)| {
            f.map(|f| format!("branch {}: transition frequency {}", j + 1, fmt_num(f)))
        })
        .collect()
}

fn require_branches(
    base: &BaseParams,
    allowed: &[usize],
    command: Command,
) -> Result<(), SweepError> {
    let n = base.n_branches();
    if allowed.contains(&n) {
        return Ok(());
    }
    Err(SweepError::Config {
        origin: super::Origin::Flag,
        key: Some("n_branches".into()),
        message: format!("`{command}` supports n_branches in {allowed:?}, got {n}"),
    })
}

/// Runs `command` against the merged key-value set.
pub fn execute(command: Command, kv: &KeyValues, workers: usize) -> Result<Report, SweepError> {
    let mut kv = kv.clone();
    if command == Command::Design && kv.get("n_branches").is_none() {
        if let Some(t) = kv.numbers("target")? {
            kv.insert("n_branches", &t.len().to_string());
        }
    }
    let mut base = BaseParams::from_kv(&kv)?;
    check_keys(command, &kv, base.n_branches())?;
    match command {
        Command::Spectrum => spectrum(&kv, &base, workers),
        Command::Grid2d => grid2d(&kv, &base, workers),
        Command::WState => {
            base.w_condition = kv.flag("w_condition")?.unwrap_or(true);
            wstate(&kv, &base, workers)
        }
        Command::Oracle => oracle(&kv, &base, workers),
        Command::Design => design(&kv, &base),
    }
}

fn spectrum(kv: &KeyValues, base: &BaseParams, workers: usize) -> Result<Report, SweepError> {
    require_branches(base, &[2, 3], Command::Spectrum)?;
    let deltas = detuning_range(kv, 201)?;
    if deltas.len() < 2 {
        return Err(kv.error("delta_count", "a spectrum needs at least two detunings"));
    }
    let n = base.n_branches();
    let names = vec!["delta".to_string()];
    let rows = evaluate(deltas.len(), workers, |i| {
        let mut p = base.clone();
        p.delta = deltas[i];
        let (cfg, delta) = p.resolve().map_err(at_point(&names, &deltas[i..=i]))?;
        transmission_general(delta, &cfg).map_err(at_point(&names, &deltas[i..=i]))
    })?;
    let mut csv = header(
        std::iter::once("delta".to_string())
            .chain(
                (1..=n).flat_map(|j| [format!("re_T{j}"), format!("im_T{j}"), format!("T{j}_sq")]),
            )
            .chain(["P_loss".to_string()]),
    );
    for (delta, r) in deltas.iter().zip(&rows) {
        let mut values = vec![*delta];
        for t in r.amplitudes() {
            values.extend([t.re, t.im, t.norm_sqr()]);
        }
        values.push(r.loss());
        push_row(&mut csv, &values);
    }
    let mut summary = vec![format!(
        "spectrum: {} detunings, {n} branches",
        deltas.len()
    )];
    summary.extend(frequency_lines(base));
    Ok(Report::ok(csv, summary))
}

fn sweep_rows(
    base: &BaseParams,
    grid: &SweepGrid,
    workers: usize,
) -> Result<Vec<(Vec<f64>, ScatteringResult)>, SweepError> {
    let names = grid.header();
    evaluate(grid.len(), workers, |i| {
        let values = grid.point(i);
        let p = grid.apply(base, &values)?;
        let (cfg, delta) = p.resolve().map_err(at_point(&names, &values))?;
        let r = transmission_general(delta, &cfg).map_err(at_point(&names, &values))?;
        Ok((values, r))
    })
}

fn grid2d(kv: &KeyValues, base: &BaseParams, workers: usize) -> Result<Report, SweepError> {
    let grid = SweepGrid::from_kv(kv, base)?;
    if grid.axes.len() != 2 {
        return Err(kv.error("axis2", "grid2d needs both axis1 and axis2"));
    }
    let n = base.n_branches();
    let rows = sweep_rows(base, &grid, workers)?;
    let mut csv = header(
        grid.header()
            .into_iter()
            .chain(branch_columns(n, "_sq"))
            .chain(["P_loss".to_string()]),
    );
    for (values, r) in &rows {
        let mut v = values.clone();
        v.extend(r.probabilities());
        v.push(r.loss());
        push_row(&mut csv, &v);
    }
    let summary = vec![format!(
        "grid2d: {} x {} points over ({})",
        grid.axes[0].count,
        grid.axes[1].count,
        grid.header().join(", ")
    )];
    Ok(Report::ok(csv, summary))
}

fn wstate(kv: &KeyValues, base: &BaseParams, workers: usize) -> Result<Report, SweepError> {
    require_branches(base, &[3], Command::WState)?;
    let grid = SweepGrid::from_kv(kv, base)?;
    let rows = sweep_rows(base, &grid, workers)?;
    let mut csv = header(
        grid.header()
            .into_iter()
            .chain(branch_columns(3, "_sq"))
            .chain(["F".to_string()]),
    );
    let mut worst = f64::INFINITY;
    for (values, r) in &rows {
        let mut v = values.clone();
        v.extend(r.probabilities());
        v.push(r.fidelity_w());
        worst = worst.min(r.fidelity_w());
        push_row(&mut csv, &v);
    }
    let mut summary = vec![format!(
        "wstate: {} points, w_condition = {}, min F = {}",
        rows.len(),
        base.w_condition,
        fmt_num(worst)
    )];
    if let Some((_, last)) = rows.last() {
        summary.push(format!("final F = {}", fmt_num(last.fidelity_w())));
    }
    Ok(Report::ok(csv, summary))
}

struct OracleRow {
    analytic: ScatteringResult,
    measured: Vec<f64>,
    abs_err: f64,
}

/// Compares `|Tⱼ(Δ)|²` with the photon probability collected in each output
/// over a whole pulse centred on Δ. The two agree only for narrowband pulses.
fn oracle_point(
    cfg: &SystemConfig,
    delta: f64,
    sigma: f64,
    dt: Option<f64>,
) -> Result<OracleRow, Error> {
    let analytic = transmission_general(delta, cfg)?;
    let pulse = PulseSpec::new(delta, sigma)?;
    let auto = TimeGrid::for_pulse(cfg, &pulse)?;
    let grid = match dt {
        Some(dt) => TimeGrid::new(auto.t0, auto.t1, dt)?,
        None => auto,
    };
    let state = integrate(cfg, &pulse, &grid)?;
    let injected = state.injected_probability();
    let population = state.final_population() / injected;
    if population > MAX_RESIDUAL_POPULATION {
        return Err(Error::IncompleteEmission { population });
    }
    let measured: Vec<f64> = (0..cfg.len())
        .map(|j| state.output_probability(j) / injected)
        .collect();
    let abs_err = measured
        .iter()
        .zip(analytic.probabilities())
        .map(|(m, a)| (m - a).abs())
        .fold(0.0, f64::max);
    Ok(OracleRow {
        analytic,
        measured,
        abs_err,
    })
}

fn oracle(kv: &KeyValues, base: &BaseParams, workers: usize) -> Result<Report, SweepError> {
    require_branches(base, &[1, 2, 3], Command::Oracle)?;
    let sigma = kv.number_or("sigma", 0.01)?;
    if !(sigma > 0.0) {
        return Err(kv.error("sigma", format!("bandwidth must be positive, got {sigma}")));
    }
    let dt = kv.number("dt")?;
    if let Some(dt) = dt {
        if !(dt > 0.0) {
            return Err(kv.error("dt", format!("step must be positive, got {dt}")));
        }
    }
    let deltas = match kv.numbers("deltas")? {
        Some(d) if d.is_empty() => return Err(kv.error("deltas", "empty detuning list")),
        Some(d) => d,
        None => detuning_range(kv, 5)?,
    };
    let names = vec!["delta".to_string()];
    let g1 = base.gamma[0];
    let rows = evaluate(deltas.len(), workers, |i| {
        let mut p = base.clone();
        p.delta = deltas[i];
        let wrap = at_point(&names, &deltas[i..=i]);
        let (cfg, delta) = p.resolve().map_err(&wrap)?;
        oracle_point(&cfg, delta, sigma / g1, dt.map(|d| d * g1)).map_err(&wrap)
    })?;
    let n = base.n_branches();
    let mut csv = header(
        std::iter::once("delta".to_string())
            .chain(branch_columns(n, "_sq_analytic"))
            .chain(branch_columns(n, "_sq_oracle"))
            .chain(["abs_err".to_string()]),
    );
    let mut max_err: f64 = 0.0;
    for (row, delta) in rows.iter().zip(&deltas) {
        let mut v = vec![*delta];
        v.extend(row.analytic.probabilities());
        v.extend(row.measured.iter().copied());
        v.push(row.abs_err);
        max_err = max_err.max(row.abs_err);
        push_row(&mut csv, &v);
    }
    let mut summary = vec![format!("max_abs_err = {}", fmt_num(max_err))];
    if sigma / g1 > ORACLE_MAX_BANDWIDTH {
        summary.push(format!(
            "warning: sigma = {} exceeds the narrowband limit {ORACLE_MAX_BANDWIDTH}; errors reflect pulse bandwidth",
            fmt_num(sigma)
        ));
    }
    let exit_code = if max_err > ORACLE_MISMATCH_TOLERANCE {
        summary.push(format!(
            "oracle mismatch: max_abs_err exceeds {}",
            fmt_num(ORACLE_MISMATCH_TOLERANCE)
        ));
        EXIT_ORACLE_MISMATCH
    } else {
        EXIT_OK
    };
    Ok(Report {
        csv,
        summary,
        exit_code,
    })
}

fn design(kv: &KeyValues, base: &BaseParams) -> Result<Report, SweepError> {
    let weights = kv
        .numbers("target")?
        .ok_or_else(|| kv.error("target", "required key missing"))?;
    let n = base.n_branches();
    if weights.len() != n {
        return Err(kv.error(
            "target",
            format!("{} weights for {n} branches", weights.len()),
        ));
    }
    let target = TargetDistribution::new(weights)?;
    let mut p = base.clone();
    if kv.get("rabi1").is_none() {
        p.rabi[0] = 1.0;
    }
    let (template, delta) = p.resolve()?;
    let sol = solve_target_amplitudes(&template, &target, delta)?;
    let g1 = base.gamma[0];
    let rabi1 = sol.config.branch(0).drive_rabi;
    let fidelity = sol.achieved.fidelity_w();
    let mut csv = header(
        [
            "branch",
            "rabi",
            "rabi_ratio",
            "target",
            "T_sq",
            "re_T",
            "im_T",
            "residual",
            "F",
        ]
        .into_iter()
        .map(String::from),
    );
    let mut summary = vec![format!(
        "design: converged in {} iterations, residual = {}",
        sol.iterations,
        fmt_num(sol.residual)
    )];
    for j in 0..n {
        let rabi = sol.config.branch(j).drive_rabi;
        let t = sol.achieved.amplitude(j);
        push_row(
            &mut csv,
            &[
                (j + 1) as f64,
                rabi * g1,
                rabi / rabi1,
                target.weights()[j],
                t.norm_sqr(),
                t.re,
                t.im,
                sol.residual,
                fidelity,
            ],
        );
        summary.push(format!(
            "branch {}: rabi = {}, rabi/rabi1 = {}, |T|^2 = {} (target {})",
            j + 1,
            fmt_num(rabi * g1),
            fmt_num(rabi / rabi1),
            fmt_num(t.norm_sqr()),
            fmt_num(target.weights()[j])
        ));
    }
    if n >= 2 && sol.config.branch(1).drive_rabi > 0.0 {
        summary.push(format!(
            "rabi1/rabi2 = {}",
            fmt_num(rabi1 / sol.config.branch(1).drive_rabi)
        ));
    }
    summary.push(format!("F = {}", fmt_num(fidelity)));
    Ok(Report::ok(csv, summary))
}
