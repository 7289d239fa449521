use anyhow::{anyhow, bail, Context, Result};
use intensive_core::analysis::{
    block_size_sweep, correlation_length, phase_diagram, CellOutcome, CorrelationLength, Fit,
    Observable, PhaseDiagramConfig, SizeFamily, SweepConfig, SweepSeries,
};
use intensive_core::blocks::PaddingHamiltonian;
use intensive_core::oracle::{certify, default_cases, CertificationRow, CertificationSettings, Verdict};
use intensive_core::{Beta, Dimension, LatticeSpec};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{BlockArgs, Family, LatticeArgs};
use crate::output::{Column, Table, Value};

pub struct Report {
    pub table: Table,
    pub json: serde_json::Value,
    /// Lines for the terminal.
    pub summary: Vec<String>,
    /// Set when the run should exit nonzero even though outputs were written.
    pub failed: Option<String>,
}

const BETA_UNIT: &str = "1/omega";
const COUPLING_UNIT: &str = "omega^2";

fn dimension(lattice: &LatticeArgs) -> Result<Dimension> {
    Dimension::try_from(lattice.dim).map_err(|e| anyhow!("--dim: {e}"))
}

fn family(lattice: &LatticeArgs) -> SizeFamily {
    match lattice.family {
        Family::Fixed => SizeFamily::Fixed { linear_size: lattice.ls },
        Family::Doubled => SizeFamily::Doubled,
    }
}

fn betas(lattice: &LatticeArgs) -> Result<Vec<Beta>> {
    lattice
        .beta
        .0
        .iter()
        .map(|&b| Beta::new(b).map_err(|e| anyhow!("--beta: {e}")))
        .collect()
}

fn config_comments(lattice: &LatticeArgs) -> Vec<String> {
    let family = match lattice.family {
        Family::Fixed => format!("fixed l_S={}", lattice.ls),
        Family::Doubled => "doubled l_S=2*l_B".to_string(),
    };
    vec![
        format!("dim={} family={family}", lattice.dim),
        format!("c={:?}", lattice.c.0),
        format!("beta={:?}", lattice.beta.0),
        "units: energies in the on-site frequency omega=1; entropies in nats".to_string(),
    ]
}

/// Block-size sweeps for every (c, β) pair. Every configuration is validated
/// before any work starts.
pub fn sweeps(block: &BlockArgs, observables: Vec<Observable>, keep_going: bool) -> Result<Report> {
    let lattice = &block.lattice;
    let dim = dimension(lattice)?;
    let family = family(lattice);
    let mut configs = Vec::new();
    for &coupling in &lattice.c.0 {
        for &beta in &betas(lattice)? {
            let config = SweepConfig {
                dim,
                coupling,
                beta,
                family,
                sizes: block.nb.0.clone(),
                observables: observables.clone(),
            };
            config
                .validate()
                .with_context(|| format!("invalid configuration at --c {coupling} --nb {:?}", block.nb.0))?;
            configs.push(config);
        }
    }

    let results: Vec<std::result::Result<Vec<SweepSeries>, String>> = configs
        .par_iter()
        .map(|config| block_size_sweep(config).map_err(|e| e.to_string()))
        .collect();
    let failures = collect_failures(&configs, &results, |c| format!("c={} beta={}", c.coupling, c.beta.value()));
    if !keep_going {
        if let Some(first) = failures.first() {
            bail!("{first} (rerun with --keep-going to record failures per cell)");
        }
    }

    let mut columns = vec![
        Column::new("dim", "-"),
        Column::new("l_S", "sites"),
        Column::new("c", COUPLING_UNIT),
        Column::new("beta", BETA_UNIT),
        Column::new(if dim == Dimension::One { "n_B" } else { "l_B" }, "sites"),
    ];
    columns.extend(observables.iter().map(|o| Column::new(o.tag(), o.unit())));
    columns.push(Column::new("status", "-"));
    let mut table = Table::new(columns);
    table.comments = config_comments(lattice);

    let mut json_cells = Vec::new();
    for (config, result) in configs.iter().zip(&results) {
        for (k, &size) in config.sizes.iter().enumerate() {
            let mut row: Vec<Value> = vec![
                dim.as_usize().into(),
                config.family.linear_size(size).into(),
                config.coupling.into(),
                config.beta.value().into(),
                size.into(),
            ];
            match result {
                Ok(series) => {
                    row.extend(series.iter().map(|s| Value::Float(s.values[k])));
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend(observables.iter().map(|_| Value::Empty));
                    row.push(format!("error: {e}").into());
                }
            }
            table.rows.push(row);
        }
        json_cells.push(match result {
            Ok(series) => json!({ "coupling": config.coupling, "beta": config.beta, "series": series }),
            Err(e) => json!({ "coupling": config.coupling, "beta": config.beta, "error": e }),
        });
    }

    let mut summary = Vec::new();
    for (config, result) in configs.iter().zip(&results) {
        if let Ok(series) = result {
            for s in series {
                summary.push(format!(
                    "c={} beta={} {}: {}",
                    config.coupling,
                    config.beta.value(),
                    s.tag,
                    describe_fit(s.fit.as_ref())
                ));
            }
        }
    }
    Ok(Report {
        table,
        json: json!({ "dim": dim, "family": family, "cells": json_cells }),
        summary,
        failed: None,
    })
}

fn describe_fit(fit: Option<&Fit>) -> String {
    match fit {
        None => "too few points to fit".into(),
        Some(Fit::Linear(l)) => format!(
            "|slope|={:.6e} relative residual={:.3e} over l_B>={}",
            l.alpha, l.relative_residual, l.window_start
        ),
        Some(Fit::Saturation(s)) => format!("saturation={:.6} spread={:.3e}", s.value, s.spread),
    }
}

fn collect_failures<C, T>(
    configs: &[C],
    results: &[std::result::Result<T, String>],
    label: impl Fn(&C) -> String,
) -> Vec<String> {
    configs
        .iter()
        .zip(results)
        .filter_map(|(c, r)| r.as_ref().err().map(|e| format!("{}: {e}", label(c))))
        .collect()
}

pub fn core_shell_observables(layers: &[usize]) -> Vec<Observable> {
    let mut obs = vec![Observable::IntensiveFidelity];
    for &l in layers {
        obs.push(Observable::CoreFidelity { layers: l });
        obs.push(Observable::ShellFidelity { layers: l });
    }
    obs
}

pub fn padded_observables(eps: &[usize], bare: bool) -> Vec<Observable> {
    let mut obs = vec![Observable::IntensiveFidelity];
    for &pad in eps {
        obs.push(Observable::PaddedFidelity { pad, hamiltonian: PaddingHamiltonian::Effective });
        if bare {
            obs.push(Observable::PaddedFidelity { pad, hamiltonian: PaddingHamiltonian::Bare });
        }
    }
    obs
}

pub fn correlation_lengths(lattice: &LatticeArgs, keep_going: bool) -> Result<Report> {
    let dim = dimension(lattice)?;
    let mut cells = Vec::new();
    for &c in &lattice.c.0 {
        let spec = LatticeSpec::new(dim, lattice.ls, c).map_err(|e| anyhow!("--c {c} --ls {}: {e}", lattice.ls))?;
        for &beta in &betas(lattice)? {
            cells.push((spec, beta));
        }
    }
    let results: Vec<std::result::Result<CorrelationLength, String>> = cells
        .par_iter()
        .map(|(spec, beta)| correlation_length(spec, *beta).map_err(|e| e.to_string()))
        .collect();
    let failures = collect_failures(&cells, &results, |(s, b)| format!("c={} beta={}", s.coupling(), b.value()));
    if !keep_going {
        if let Some(first) = failures.first() {
            bail!("{first} (rerun with --keep-going to record failures per cell)");
        }
    }

    let mut table = Table::new(vec![
        Column::new("dim", "-"),
        Column::new("l_S", "sites"),
        Column::new("c", COUPLING_UNIT),
        Column::new("beta", BETA_UNIT),
        Column::new("xi", "sites"),
        Column::new("status", "-"),
    ]);
    table.comments = config_comments(lattice);
    table.comments.push("xi from a least-squares fit of ln|Q_0r| along x for 1 <= r <= l_S/4".into());
    #[derive(Serialize)]
    struct Cell {
        coupling: f64,
        beta: Beta,
        xi: Option<CorrelationLength>,
        error: Option<String>,
    }
    let mut json_cells = Vec::new();
    for ((spec, beta), result) in cells.iter().zip(&results) {
        let (xi, status) = match result {
            Ok(CorrelationLength::Finite(xi)) => (Value::Float(*xi), "ok".to_string()),
            Ok(CorrelationLength::Uncorrelated) => (Value::Empty, "uncorrelated".to_string()),
            Err(e) => (Value::Empty, format!("error: {e}")),
        };
        table.rows.push(vec![
            dim.as_usize().into(),
            lattice.ls.into(),
            spec.coupling().into(),
            beta.value().into(),
            xi,
            status.into(),
        ]);
        json_cells.push(Cell {
            coupling: spec.coupling(),
            beta: *beta,
            xi: result.as_ref().ok().copied(),
            error: result.as_ref().err().cloned(),
        });
    }
    Ok(Report { table, json: json!({ "dim": dim, "cells": json_cells }), summary: Vec::new(), failed: None })
}

pub fn phase(lattice: &LatticeArgs, sizes: &[usize], keep_going: bool) -> Result<Report> {
    let config = PhaseDiagramConfig {
        dim: dimension(lattice)?,
        couplings: lattice.c.0.clone(),
        betas: lattice.beta.0.clone(),
        family: family(lattice),
        sizes: sizes.to_vec(),
    };
    config.validate().context("invalid phase-diagram configuration")?;
    let diagram = phase_diagram(&config)?;

    let failures: Vec<String> = diagram
        .cells
        .iter()
        .filter_map(|cell| match &cell.outcome {
            CellOutcome::Failed { error } => Some(format!("c={} beta={}: {error}", cell.coupling, cell.beta)),
            _ => None,
        })
        .collect();
    if !keep_going {
        if let Some(first) = failures.first() {
            bail!("{first} (rerun with --keep-going to record failures per cell)");
        }
    }

    let slope_unit = if config.dim == Dimension::Two { "per site" } else { "saturation" };
    let mut table = Table::new(vec![
        Column::new("c", COUPLING_UNIT),
        Column::new("beta", BETA_UNIT),
        Column::new("alpha_F", slope_unit),
        Column::new("alpha_I", if config.dim == Dimension::Two { "nats per site" } else { "nats" }),
        Column::new("alpha_E", if config.dim == Dimension::Two { "nats per site" } else { "nats" }),
        Column::new("xi", "sites"),
        Column::new("rel_residual_F", "1"),
        Column::new("rel_residual_I", "1"),
        Column::new("rel_residual_E", "1"),
        Column::new("status", "-"),
    ]);
    table.comments = config_comments(lattice);
    table.comments.push(format!("block sizes {sizes:?}"));
    table.comments.push(
        "alpha = |slope| of a least-squares line over the upper half of the block-size range \
         (F_I decreasing, I and E_N increasing); in 1D alpha_F = 1 - saturated F_I and alpha_I, alpha_E are saturation values"
            .into(),
    );
    for cell in &diagram.cells {
        let mut row: Vec<Value> = vec![cell.coupling.into(), cell.beta.into()];
        match &cell.outcome {
            CellOutcome::Computed(v) => {
                row.extend([v.alpha_f.into(), v.alpha_i.into(), v.alpha_e.into()]);
                row.push(v.xi.value().map_or(Value::Empty, Value::Float));
                for s in &v.series {
                    row.push(match &s.fit {
                        Some(Fit::Linear(l)) => l.relative_residual.into(),
                        _ => Value::Empty,
                    });
                }
                row.push(if v.xi.value().is_some() { "ok" } else { "ok uncorrelated" }.into());
            }
            CellOutcome::Skipped { min_eigenvalue } => {
                row.extend((0..7).map(|_| Value::Empty));
                row.push(format!("skipped: min eigenvalue {min_eigenvalue:e}").into());
            }
            CellOutcome::Failed { error } => {
                row.extend((0..7).map(|_| Value::Empty));
                row.push(format!("error: {error}").into());
            }
        }
        table.rows.push(row);
    }
    let rc = diagram.rank_correlations();
    let summary = vec![
        format!("rank correlation alpha_F vs alpha_E: {:.4}", rc.fidelity_negativity),
        format!("rank correlation alpha_F vs alpha_I: {:.4}", rc.fidelity_mutual_information),
        format!("rank correlation alpha_F vs 1/xi:    {:.4}", rc.fidelity_inverse_correlation_length),
    ];
    Ok(Report {
        table,
        json: json!({ "diagram": diagram, "rank_correlations": rc }),
        summary,
        failed: None,
    })
}

pub fn oracle_check(cutoff: usize) -> Result<Report> {
    let settings = CertificationSettings {
        cutoff,
        reference_cutoff_one_mode: 2 * cutoff,
        reference_cutoff_two_modes: cutoff + cutoff / 2,
        ..CertificationSettings::default()
    };
    let cases = default_cases();
    let rows: Vec<CertificationRow> = cases
        .par_iter()
        .map(|case| certify(case, &settings))
        .collect::<intensive_core::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut table = Table::new(vec![
        Column::new("case", "-"),
        Column::new("quantity", "-"),
        Column::new("gaussian", "-"),
        Column::new("oracle", "-"),
        Column::new("abs_diff", "-"),
        Column::new("cutoff_drift", "-"),
        Column::new("verdict", "-"),
    ]);
    table.comments.push(format!(
        "cutoff={} reference cutoffs: one mode {}, two modes {}; tolerance={:e}, convergence={:e}",
        settings.cutoff,
        settings.reference_cutoff_one_mode,
        settings.reference_cutoff_two_modes,
        settings.tolerance,
        settings.convergence
    ));
    let mut summary = vec![format!(
        "{:<30} {:<30} {:>14} {:>14} {:>10} {:>10}  verdict",
        "case", "quantity", "gaussian", "oracle", "|diff|", "drift"
    )];
    for r in &rows {
        let diff = (r.gaussian - r.oracle).abs();
        let verdict = match r.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "inconclusive",
        };
        summary.push(format!(
            "{:<30} {:<30} {:>14.9} {:>14.9} {:>10.2e} {:>10.2e}  {verdict}",
            r.case, r.quantity, r.gaussian, r.oracle, diff, r.cutoff_drift
        ));
        table.rows.push(vec![
            r.case.clone().into(),
            r.quantity.clone().into(),
            r.gaussian.into(),
            r.oracle.into(),
            diff.into(),
            r.cutoff_drift.into(),
            verdict.into(),
        ]);
    }
    let count = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
    let (pass, fail, inconclusive) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Inconclusive));
    summary.push(format!("{pass} pass, {fail} fail, {inconclusive} inconclusive"));
    Ok(Report {
        table,
        json: json!({ "settings": settings, "rows": rows }),
        summary,
        failed: (fail > 0).then(|| format!("{fail} oracle comparisons failed")),
    })
}
