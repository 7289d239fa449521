use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "intensive", version, about = "Block-versus-thermal distinguishability in harmonic lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RunOptions {
    /// Output directory for results.csv, results.json and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for independent cells.
    #[arg(long, global = true, env = "INTENSIVE_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Record per-cell failures in the output instead of aborting.
    #[arg(long, global = true)]
    pub keep_going: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "experiment")]
pub enum Command {
    /// Intensive fidelity of single blocks.
    Fidelity(BlockArgs),
    /// F_I, mutual information and negativity versus block size, with fits.
    Sweep(BlockArgs),
    /// Fidelity of block cores and shells.
    CoreShell {
        #[command(flatten)]
        block: BlockArgs,
        /// Boundary layers to peel.
        #[arg(long, default_value = "1,2")]
        layers: IntList,
    },
    /// Fidelity against the padded reference state.
    Padded {
        #[command(flatten)]
        block: BlockArgs,
        /// Padding layers.
        #[arg(long, default_value = "2")]
        eps: IntList,
        /// Also compare against padding generated by the bare potential.
        #[arg(long)]
        bare: bool,
    },
    /// Decay length of the position two-point function.
    CorrelationLength(LatticeArgs),
    /// α_F, α_I, α_E and ξ over a (c, β) grid.
    PhaseDiagram {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Block size schedule.
        #[arg(long, default_value = "4,6,8,10")]
        nb: IntList,
    },
    /// Certify the Gaussian formulas against the truncated Fock-space oracle.
    OracleCheck {
        /// Fock cutoff per mode.
        #[arg(long, default_value_t = 40)]
        cutoff: usize,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LatticeArgs {
    /// Lattice dimension.
    #[arg(long, default_value = "2")]
    pub dim: usize,
    /// Linear lattice size l_S; ignored for the doubled family.
    #[arg(long, default_value_t = 20)]
    pub ls: usize,
    /// Lattice size rule.
    #[arg(long, value_enum, default_value_t = Family::Fixed)]
    pub family: Family,
    /// Coupling(s): `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub c: FloatList,
    /// Inverse temperature(s): `a,b,c` or `start:stop:count`; `inf` is the ground state.
    #[arg(long)]
    pub beta: FloatList,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BlockArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Block sizes (n_B in 1D, l_B in 2D): `a,b,c` or `start:stop:count`.
    #[arg(long)]
    pub nb: IntList,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// One lattice of linear size --ls.
    Fixed,
    /// l_S = 2·l_B for every block.
    Doubled,
}

/// Evenly spaced grid, both ends included.
fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|k| if k + 1 == count { stop } else { start + (stop - start) * k as f64 / (count - 1) as f64 })
        .collect()
}

fn parse_range(s: &str) -> Result<Option<(f64, f64, usize)>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [_] => Ok(None),
        [a, b, n] => {
            let count: usize = n.trim().parse().with_context(|| format!("bad count in range `{s}`"))?;
            if count == 0 {
                bail!("range `{s}` has zero points");
            }
            let start = parse_float(a)?;
            let stop = parse_float(b)?;
            if count > 1 && stop <= start {
                bail!("range `{s}` must have stop > start");
            }
            Ok(Some((start, stop, count)))
        }
        _ => bail!("expected `start:stop:count` or a comma list, got `{s}`"),
    }
}

fn parse_float(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().with_context(|| format!("not a number: `{t}`")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((a, b, n)) = parse_range(s)? {
            return Ok(Self(linspace(a, b, n)));
        }
        let values = s.split(',').map(parse_float).collect::<Result<Vec<_>>>()?;
        Ok(Self(values))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<usize>);

impl FromStr for IntList {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((a, b, n)) = parse_range(s)? {
            let values = linspace(a, b, n)
                .into_iter()
                .map(|x| {
                    if x.fract() != 0.0 || x < 0.0 {
                        bail!("range `{s}` does not land on whole numbers");
                    }
                    Ok(x as usize)
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Self(values));
        }
        let values = s
            .split(',')
            .map(|t| t.trim().parse().with_context(|| format!("not a whole number: `{t}`")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(values))
    }
}
