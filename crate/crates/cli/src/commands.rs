use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use covgame::detection::{self, MixedStrategy};
use covgame::experiments::{
    beta_sweep, constant_baseline, default_betas, equilibrium_report, solve_scenario, tradeoff_point, uniform_baseline,
    BaselineKind, BaselineResult,
};
use covgame::model::{parse_grid, ActionSpace, Scenario};
use covgame::rate::rbar;
use covgame::simkit::estimate_detection;

use crate::error::CliError;
use crate::output::{g12, Cell, RunOutput, Table};
use crate::{BaselineMode, Common};

/// Loads the scenario named by the common flags and applies `--set`
/// overrides. Returns the scenario and a label for the manifest.
pub fn load_scenario(c: &Common) -> Result<(Scenario, String), CliError> {
    let (mut s, source) = match &c.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let s: Scenario = text.parse().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            (s, path.display().to_string())
        }
        None if c.jammer && c.full_grid => (Scenario::standard(true), "preset:jammer-full".to_string()),
        None if c.jammer => (Scenario::desk_jammer(), "preset:jammer".to_string()),
        None => (Scenario::standard(false), "preset:default".to_string()),
    };
    for o in &c.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| CliError::Input(format!("--set expects KEY=VALUE, got `{o}`")))?;
        s.set(k, v).map_err(|e| CliError::Input(format!("--set {o}: {e}")))?;
    }
    s.validate()?;
    Ok((s, source))
}

fn start_run(c: &Common, subcommand: &str) -> Result<(Scenario, RunOutput), CliError> {
    let (s, source) = load_scenario(c)?;
    let mut run = RunOutput::new(&c.out);
    run.param("subcommand", subcommand);
    run.param("scenario", source);
    run.param("overrides", c.overrides.join(";"));
    run.param("out", c.out.display().to_string());
    run.file("scenario.txt", s.to_file_string());
    Ok((s, run))
}

pub fn solve(c: &Common) -> Result<Vec<PathBuf>, CliError> {
    let (s, mut run) = start_run(c, "solve")?;
    let (game, sol) = solve_scenario(&s)?;
    let report = equilibrium_report(&game, &sol);
    let point = tradeoff_point(&game, &sol)?;
    let space = game.space();

    let mut rows = Table::new(&["y", "power_mw", "jam_mw", "probability"]);
    for (a, &p) in space.rows().iter().zip(sol.row_strategy.probs()) {
        if p > covgame::experiments::SUPPORT_FLOOR {
            rows.row(&[Cell::Int(a.y as u64), Cell::Num(a.power), Cell::Num(a.jam), Cell::Num(p)]);
        }
    }
    let mut cols = Table::new(&["threshold", "probability"]);
    for &(t, p) in &report.threshold_support {
        cols.row(&[Cell::Num(t), Cell::Num(p)]);
    }
    let mut powers = Table::new(&["power_mw", "probability"]);
    for &(v, p) in &report.power_marginal {
        powers.row(&[Cell::Num(v), Cell::Num(p)]);
    }
    let mut jams = Table::new(&["jam_mw", "probability"]);
    for &(v, p) in &report.jam_marginal {
        jams.row(&[Cell::Num(v), Cell::Num(p)]);
    }
    let mut eq = Table::new(&[
        "value",
        "row_gap",
        "col_gap",
        "expected_rate",
        "pfa",
        "pm",
        "dep",
        "beta",
        "actions",
        "thresholds",
    ]);
    eq.row(&[
        Cell::Num(sol.value),
        Cell::Num(sol.row_gap),
        Cell::Num(sol.col_gap),
        Cell::Num(point.expected_rate),
        Cell::Num(point.pfa),
        Cell::Num(point.pm),
        Cell::Num(point.dep),
        Cell::Num(s.beta),
        Cell::Int(space.row_count() as u64),
        Cell::Int(space.col_count() as u64),
    ]);

    let mut summary = String::new();
    let _ = writeln!(summary, "game value      {}", g12(sol.value));
    let _ = writeln!(summary, "best-response gaps {} (transmitter), {} (warden)", g12(sol.row_gap), g12(sol.col_gap));
    let _ = writeln!(summary, "expected rate   {} bits/use", g12(point.expected_rate));
    let _ = writeln!(summary, "P_FA + P_M      {} = {} + {}", g12(point.dep), g12(point.pfa), g12(point.pm));
    let _ = writeln!(summary, "transmit power support (mW):");
    for &(v, p) in &report.power_marginal {
        let _ = writeln!(summary, "  {:>8}  {}", g12(v), g12(p));
    }
    if s.has_jammer() {
        let _ = writeln!(summary, "jamming power support (mW):");
        for &(v, p) in &report.jam_marginal {
            let _ = writeln!(summary, "  {:>8}  {}", g12(v), g12(p));
        }
    }
    let _ = writeln!(summary, "threshold support:");
    for &(v, p) in &report.threshold_support {
        let _ = writeln!(summary, "  {:>8}  {}", g12(v), g12(p));
    }

    run.file("row_strategy.csv", rows.into_string());
    run.file("col_strategy.csv", cols.into_string());
    run.file("power_marginal.csv", powers.into_string());
    run.file("jam_marginal.csv", jams.into_string());
    run.file("equilibrium.csv", eq.into_string());
    run.file("summary.txt", summary);
    run.write()
}

fn parse_betas(list: Option<&str>) -> Result<(Vec<f64>, String), CliError> {
    match list.map(str::trim) {
        None | Some("") => Ok((default_betas(), "default (25 log-spaced values in [0.1, 20])".into())),
        Some(text) => {
            let betas = text
                .split(',')
                .map(|b| {
                    b.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite() && *v > 0.0)
                        .ok_or_else(|| CliError::Input(format!("--betas: `{}` is not a positive number", b.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((betas, text.to_string()))
        }
    }
}

pub fn sweep(c: &Common, betas: Option<&str>) -> Result<Vec<PathBuf>, CliError> {
    let (s, mut run) = start_run(c, "sweep")?;
    let (betas, label) = parse_betas(betas)?;
    run.param("betas", label);
    let points = beta_sweep(&s, &betas)?;
    let mut t = Table::new(&["beta", "expected_rate", "pfa", "pm", "dep", "game_value"]);
    for p in &points {
        t.row(&[
            Cell::Num(p.beta),
            Cell::Num(p.expected_rate),
            Cell::Num(p.pfa),
            Cell::Num(p.pm),
            Cell::Num(p.dep),
            Cell::Num(p.game_value),
        ]);
    }
    run.file("tradeoff.csv", t.into_string());
    run.write()
}

fn split_range(text: &str) -> Result<(&str, &str), CliError> {
    text.split_once(':')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| CliError::Input(format!("--range expects FIRST:LAST, got `{text}`")))
}

pub fn baseline(c: &Common, mode: BaselineMode, range: Option<&str>) -> Result<Vec<PathBuf>, CliError> {
    let (s, mut run) = start_run(c, "baseline")?;
    let mut results: Vec<BaselineResult> = Vec::new();
    match mode {
        BaselineMode::Uniform => {
            run.param("mode", "uniform");
            let (first, last) = match range {
                Some(r) => {
                    let (a, b) = split_range(r)?;
                    let int = |v: &str| {
                        v.parse::<usize>().map_err(|_| CliError::Input(format!("--range: `{v}` is not a count")))
                    };
                    (int(a)?, int(b)?)
                }
                None => (2, s.power_grid.len()),
            };
            run.param("range", format!("{first}:{last}"));
            for k in first..=last {
                results.push(uniform_baseline(&s, k)?);
            }
        }
        BaselineMode::Constant => {
            run.param("mode", "constant");
            let (lo, hi) = match range {
                Some(r) => {
                    let (a, b) = split_range(r)?;
                    let num = |v: &str| {
                        parse_grid(v)
                            .ok()
                            .filter(|g| g.len() == 1)
                            .map(|g| g[0])
                            .ok_or_else(|| CliError::Input(format!("--range: `{v}` is not a power")))
                    };
                    (num(a)?, num(b)?)
                }
                None => (f64::NEG_INFINITY, f64::INFINITY),
            };
            run.param("range", range.unwrap_or("all"));
            let mut excluded = Vec::new();
            for &p in s.power_grid.iter().filter(|&&p| p >= lo - 1e-12 && p <= hi + 1e-12) {
                if rbar(s.snr_b(p, 0.0), s.blocklength_n, s.delta) < 0.0 {
                    excluded.push(g12(p));
                    continue;
                }
                results.push(constant_baseline(&s, p)?);
            }
            run.param("excluded_negative_rate", excluded.join(";"));
        }
    }
    if results.is_empty() {
        return Err(CliError::Input("the range selects no baseline".into()));
    }
    let mut t = Table::new(&["mode", "parameter", "best_threshold", "expected_rate", "pfa", "pm", "dep"]);
    for b in &results {
        let (label, param) = match b.kind {
            BaselineKind::Uniform(k) => ("uniform", Cell::Int(k as u64)),
            BaselineKind::Constant(p) => ("constant", Cell::Num(p)),
        };
        t.row(&[
            Cell::Text(label.into()),
            param,
            Cell::Num(b.best_threshold),
            Cell::Num(b.expected_rate),
            Cell::Num(b.pfa),
            Cell::Num(b.pm),
            Cell::Num(b.dep),
        ]);
    }
    let name = match mode {
        BaselineMode::Uniform => "baseline_uniform.csv",
        BaselineMode::Constant => "baseline_constant.csv",
    };
    run.file(name, t.into_string());
    run.write()
}

/// Parses a strategy CSV with a header row. `key_columns` name the columns
/// that identify an action; `locate` maps their values to a position.
fn read_strategy(
    path: &Path,
    key_columns: &[&str],
    len: usize,
    locate: &dyn Fn(&[f64]) -> Option<usize>,
) -> Result<MixedStrategy, CliError> {
    let name = path.display();
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {name}: {e}")))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| CliError::Input(format!("{name}: empty file")))?;
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    let column = |c: &str| {
        header.iter().position(|h| *h == c).ok_or_else(|| CliError::Input(format!("{name}: no `{c}` column")))
    };
    let keys = key_columns.iter().map(|c| column(c)).collect::<Result<Vec<_>, _>>()?;
    let prob = column("probability")?;
    let mut weights = vec![0.0; len];
    for (idx, line) in lines {
        let bad = |m: String| CliError::Input(format!("{name}:{}: {m}", idx + 1));
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != header.len() {
            return Err(bad(format!("expected {} fields, found {}", header.len(), cells.len())));
        }
        let num = |k: usize| cells[k].parse::<f64>().map_err(|_| bad(format!("`{}` is not a number", cells[k])));
        let key = keys.iter().map(|&k| num(k)).collect::<Result<Vec<_>, _>>()?;
        let p = num(prob)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(bad(format!("probability {p} outside [0, 1]")));
        }
        let at = locate(&key).ok_or_else(|| bad(format!("{key:?} is not an action of this scenario")))?;
        weights[at] += p;
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(CliError::Input(format!("{name}: probabilities sum to {total}")));
    }
    Ok(MixedStrategy::from_weights(weights)?)
}

pub fn simulate(
    c: &Common,
    files: Option<(PathBuf, PathBuf)>,
    blocks: u64,
    seed: u64,
) -> Result<Vec<PathBuf>, CliError> {
    let (s, mut run) = start_run(c, "simulate")?;
    run.param("seed", seed.to_string());
    run.param("blocks", blocks.to_string());
    if blocks == 0 {
        return Err(CliError::Input("--blocks must be positive".into()));
    }
    let space = ActionSpace::pruned(s)?;
    let (joint, thr) = match &files {
        Some((row_path, col_path)) => {
            run.param("row_strategy", row_path.display().to_string());
            run.param("col_strategy", col_path.display().to_string());
            let joint = read_strategy(row_path, &["power_mw", "jam_mw"], space.row_count(), &|k| {
                space.find_row(k[0], k[1], 1e-9)
            })?;
            let thresholds = space.thresholds();
            let thr = read_strategy(col_path, &["threshold"], space.col_count(), &|k| {
                thresholds.iter().position(|t| (t - k[0]).abs() <= 1e-9)
            })?;
            (joint, thr)
        }
        None => {
            run.param("strategies", "equilibrium");
            let (_, sol) = solve_scenario(space.scenario())?;
            (sol.row_strategy, sol.col_strategy)
        }
    };
    let pfa = detection::pfa(&space, &joint, &thr)?;
    let pm = detection::pm(&space, &joint, &thr)?;
    let est = estimate_detection(&space, &joint, &thr, blocks, seed)?;

    let mut t = Table::new(&["quantity", "empirical", "analytic", "stderr", "z"]);
    let mut summary = String::new();
    let _ = writeln!(summary, "{blocks} blocks, seed {seed}");
    for (name, hat, p) in [("pfa", est.pfa_hat, pfa), ("pm", est.pm_hat, pm)] {
        let se = (p * (1.0 - p) / blocks as f64).sqrt();
        let z = if se > 0.0 {
            (hat - p) / se
        } else if hat == p {
            0.0
        } else {
            f64::INFINITY
        };
        t.row(&[Cell::Text(name.into()), Cell::Num(hat), Cell::Num(p), Cell::Num(se), Cell::Num(z)]);
        let _ = writeln!(summary, "{name:<4} empirical {}  analytic {}  z {}", g12(hat), g12(p), g12(z));
    }
    run.file("simulation.csv", t.into_string());
    run.file("summary.txt", summary);
    run.write()
}
