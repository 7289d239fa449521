//! Block-size sweeps, slope and saturation fits, correlation lengths and
//! (coupling, β) phase diagrams.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{
    core_shell_split, effective_potential, padded_reference, reference_thermal, BlockSelection,
    PaddingHamiltonian,
};
use crate::error::{Error, Result};
use crate::gaussian::{fidelity, Beta, CovarianceMatrix, LatticeThermalState};
use crate::lattice::{build_potential, translation_kernel, Dimension, LatticeSpec};
use crate::linalg::SymmetricMatrix;

/// Grid cells whose smallest potential eigenvalue is below this are skipped.
pub const PHASE_DIAGRAM_FLOOR: f64 = 1e-10;
/// Two-point function values at or below this are treated as zero.
pub const CORRELATION_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 4;

/// How the lattice size follows the block size in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum SizeFamily {
    /// The same lattice for every block.
    Fixed { linear_size: usize },
    /// l_S = 2·l_B, i.e. n_S = 4·n_B in 2D.
    Doubled,
}

impl SizeFamily {
    pub fn linear_size(self, block: usize) -> usize {
        match self {
            SizeFamily::Fixed { linear_size } => linear_size,
            SizeFamily::Doubled => 2 * block,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Observable {
    /// Fidelity between the block state and its effective thermal state.
    IntensiveFidelity,
    /// Mutual information between block and rest, nats.
    MutualInformation,
    /// Logarithmic negativity between block and rest, nats.
    Negativity,
    /// Intensive fidelity restricted to the core left after peeling `layers`.
    CoreFidelity { layers: usize },
    /// Intensive fidelity restricted to the `layers` outermost layers.
    ShellFidelity { layers: usize },
    /// Fidelity between the block state and the padded reference.
    PaddedFidelity { pad: usize, hamiltonian: PaddingHamiltonian },
}

impl Observable {
    pub fn tag(&self) -> String {
        match self {
            Observable::IntensiveFidelity => "F_I".into(),
            Observable::MutualInformation => "I".into(),
            Observable::Negativity => "E_N".into(),
            Observable::CoreFidelity { layers } => format!("F_core(L={layers})"),
            Observable::ShellFidelity { layers } => format!("F_shell(L={layers})"),
            Observable::PaddedFidelity { pad, hamiltonian } => match hamiltonian {
                PaddingHamiltonian::Effective => format!("F_pad(eps={pad})"),
                PaddingHamiltonian::Bare => format!("F_pad_bare(eps={pad})"),
            },
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Observable::MutualInformation | Observable::Negativity => "nats",
            _ => "1",
        }
    }

    /// Whether the observable is a fidelity (decreasing away from 1).
    pub fn is_fidelity(&self) -> bool {
        !matches!(self, Observable::MutualInformation | Observable::Negativity)
    }

    fn needs_reference(&self) -> bool {
        matches!(
            self,
            Observable::IntensiveFidelity
                | Observable::CoreFidelity { .. }
                | Observable::ShellFidelity { .. }
        )
    }
}

/// Everything about one lattice at one temperature that block computations
/// share.
pub struct LatticeContext {
    potential: SymmetricMatrix,
    state: LatticeThermalState,
    covariance: OnceLock<CovarianceMatrix>,
}

impl LatticeContext {
    pub fn new(spec: &LatticeSpec, beta: Beta) -> Result<Self> {
        Ok(Self {
            potential: build_potential(spec),
            state: LatticeThermalState::new(spec, beta)?,
            covariance: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        self.state.spec()
    }

    pub fn beta(&self) -> Beta {
        self.state.beta()
    }

    pub fn potential(&self) -> &SymmetricMatrix {
        &self.potential
    }

    pub fn state(&self) -> &LatticeThermalState {
        &self.state
    }

    fn covariance(&self) -> &CovarianceMatrix {
        self.covariance.get_or_init(|| self.state.covariance())
    }

    /// Evaluates `observables` for one block, in order.
    pub fn evaluate(&self, sel: &BlockSelection, observables: &[Observable]) -> Result<Vec<f64>> {
        if sel.spec() != self.spec() {
            return Err(Error::DimensionMismatch(sel.spec().n_modes(), self.spec().n_modes()));
        }
        let beta = self.beta();
        let block = self.state.reduce(sel.modes())?;
        let reference = if observables.iter().any(Observable::needs_reference) {
            Some(reference_thermal(&effective_potential(&self.potential, sel)?, beta)?)
        } else {
            None
        };
        let on = |modes: &[usize]| -> Result<f64> {
            let r = reference.as_ref().expect("reference computed when needed");
            fidelity(&block.reduce(modes)?, &r.reduce(modes)?)
        };
        observables
            .iter()
            .map(|obs| match *obs {
                Observable::IntensiveFidelity => fidelity(&block, reference.as_ref().unwrap()),
                Observable::MutualInformation => self.state.mutual_information(&sel.partition()),
                Observable::Negativity => self.covariance().log_negativity(&sel.partition()),
                Observable::CoreFidelity { layers } => on(core_shell_split(sel, layers)?.core()),
                Observable::ShellFidelity { layers } => on(core_shell_split(sel, layers)?.shell()),
                Observable::PaddedFidelity { pad, hamiltonian } => {
                    let padded = padded_reference(&self.potential, sel, pad, beta, hamiltonian)?;
                    fidelity(&block, &padded)
                }
            })
            .collect()
    }
}

/// F_I: fidelity between the reduced block state and the thermal state of
/// its effective potential at the same temperature.
pub fn intensive_fidelity(spec: &LatticeSpec, sel: &BlockSelection, beta: Beta) -> Result<f64> {
    let ctx = LatticeContext::new(spec, beta)?;
    Ok(ctx.evaluate(sel, &[Observable::IntensiveFidelity])?[0])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub dim: Dimension,
    pub coupling: f64,
    pub beta: Beta,
    pub family: SizeFamily,
    /// Block linear sizes (n_B in 1D, l_B in 2D), strictly increasing.
    pub sizes: Vec<usize>,
    pub observables: Vec<Observable>,
}

impl SweepConfig {
    /// Checks every lattice in the sweep before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedAbscissa);
        }
        if self.observables.is_empty() {
            return Err(Error::EmptySelection);
        }
        for &size in &self.sizes {
            let spec = LatticeSpec::new(self.dim, self.family.linear_size(size), self.coupling)?;
            let sel = BlockSelection::new(&spec, size)?;
            for obs in &self.observables {
                match *obs {
                    Observable::CoreFidelity { layers } | Observable::ShellFidelity { layers } => {
                        core_shell_split(&sel, layers)?;
                    }
                    Observable::PaddedFidelity { pad, .. } => {
                        sel.padded(pad)?;
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Least-squares line over the upper half of the abscissa range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    /// |slope|.
    pub alpha: f64,
    pub intercept: f64,
    /// Root-mean-square residual over the fit window.
    pub residual: f64,
    /// `residual` divided by the mean |value| in the window.
    pub relative_residual: f64,
    /// Smallest abscissa included in the fit.
    pub window_start: f64,
    pub points: usize,
}

/// Mean of the last three values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationFit {
    pub value: f64,
    /// max − min of the last three values.
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Fit {
    Linear(LinearFit),
    Saturation(SaturationFit),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSeries {
    pub observable: Observable,
    pub tag: String,
    pub dim: Dimension,
    pub coupling: f64,
    pub beta: Beta,
    /// Block linear sizes.
    pub abscissa: Vec<usize>,
    /// Lattice linear size used for each point.
    pub lattice_sizes: Vec<usize>,
    pub values: Vec<f64>,
    /// Present when the series has at least [`MIN_FIT_POINTS`] points.
    pub fit: Option<Fit>,
}

impl SweepSeries {
    /// Breakdown strength: |slope| for linear fits. For saturating series it
    /// is 1 − F for fidelities and the saturation value otherwise.
    pub fn alpha(&self) -> Option<f64> {
        self.fit.as_ref().map(|fit| match fit {
            Fit::Linear(l) => l.alpha,
            Fit::Saturation(s) if self.observable.is_fidelity() => 1.0 - s.value,
            Fit::Saturation(s) => s.value,
        })
    }
}

/// One series per observable, sizes evaluated in parallel.
pub fn block_size_sweep(config: &SweepConfig) -> Result<Vec<SweepSeries>> {
    config.validate()?;
    let lattice = |size: usize| LatticeSpec::new(config.dim, config.family.linear_size(size), config.coupling);
    let shared = match config.family {
        SizeFamily::Fixed { .. } => Some(LatticeContext::new(&lattice(config.sizes[0])?, config.beta)?),
        SizeFamily::Doubled => None,
    };
    let rows: Vec<Vec<f64>> = config
        .sizes
        .par_iter()
        .map(|&size| {
            let spec = lattice(size)?;
            let sel = BlockSelection::new(&spec, size)?;
            match &shared {
                Some(ctx) => ctx.evaluate(&sel, &config.observables),
                None => LatticeContext::new(&spec, config.beta)?.evaluate(&sel, &config.observables),
            }
        })
        .collect::<Result<_>>()?;

    let lattice_sizes: Vec<usize> = config.sizes.iter().map(|&s| config.family.linear_size(s)).collect();
    config
        .observables
        .iter()
        .enumerate()
        .map(|(k, obs)| {
            let mut series = SweepSeries {
                observable: *obs,
                tag: obs.tag(),
                dim: config.dim,
                coupling: config.coupling,
                beta: config.beta,
                abscissa: config.sizes.clone(),
                lattice_sizes: lattice_sizes.clone(),
                values: rows.iter().map(|r| r[k]).collect(),
                fit: None,
            };
            if series.abscissa.len() >= MIN_FIT_POINTS {
                series.fit = Some(slope_fit(&series)?);
            }
            Ok(series)
        })
        .collect()
}

/// Linear fit in 2D, saturation in 1D.
pub fn slope_fit(series: &SweepSeries) -> Result<Fit> {
    let x: Vec<f64> = series.abscissa.iter().map(|&s| s as f64).collect();
    match series.dim {
        Dimension::Two => Ok(Fit::Linear(linear_fit(&x, &series.values)?)),
        Dimension::One => Ok(Fit::Saturation(saturation_fit(&x, &series.values)?)),
    }
}

fn check_points(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, got: x.len() });
    }
    if x.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedAbscissa);
    }
    Ok(())
}

/// Ordinary least squares over points with x ≥ (x_min + x_max)/2, and never
/// fewer than the last two points.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    check_points(x, y)?;
    let mid = 0.5 * (x[0] + x[x.len() - 1]);
    let start = x.iter().position(|&v| v >= mid).unwrap().min(x.len() - 2);
    let (xs, ys) = (&x[start..], &y[start..]);
    let (slope, intercept) = least_squares(xs, ys);
    let n = xs.len() as f64;
    let sse: f64 = xs.iter().zip(ys).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let residual = (sse / n).sqrt();
    let scale = ys.iter().map(|v| v.abs()).sum::<f64>() / n;
    let relative_residual = if residual == 0.0 { 0.0 } else { residual / scale };
    Ok(LinearFit {
        slope,
        alpha: slope.abs(),
        intercept,
        residual,
        relative_residual,
        window_start: xs[0],
        points: xs.len(),
    })
}

pub fn saturation_fit(x: &[f64], y: &[f64]) -> Result<SaturationFit> {
    check_points(x, y)?;
    let tail = &y[y.len() - 3..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SaturationFit { value: tail.iter().sum::<f64>() / 3.0, spread: max - min })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum CorrelationLength {
    Finite(f64),
    /// The two-point function vanishes beyond the origin.
    Uncorrelated,
}

impl CorrelationLength {
    pub fn value(self) -> Option<f64> {
        match self {
            CorrelationLength::Finite(xi) => Some(xi),
            CorrelationLength::Uncorrelated => None,
        }
    }

    /// 1/ξ, infinite for an uncorrelated state.
    pub fn inverse(self) -> f64 {
        match self {
            CorrelationLength::Finite(xi) => 1.0 / xi,
            CorrelationLength::Uncorrelated => f64::INFINITY,
        }
    }
}

/// Decay length of g(r) = Q_{0,r} along the x axis, from a least-squares
/// fit of ln|g| over r ∈ [1, l_S/4].
pub fn correlation_length(spec: &LatticeSpec, beta: Beta) -> Result<CorrelationLength> {
    let q = translation_kernel(spec, |lam| beta.occupation_factor(lam.sqrt()) / lam.sqrt())?;
    let (mut r, mut ln_g) = (Vec::new(), Vec::new());
    for dist in 1..=spec.linear_size() / 4 {
        let g = q.at(dist, 0).abs();
        if g > CORRELATION_FLOOR {
            r.push(dist as f64);
            ln_g.push(g.ln());
        }
    }
    if r.is_empty() {
        return Ok(CorrelationLength::Uncorrelated);
    }
    if r.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: r.len() });
    }
    let (slope, _) = least_squares(&r, &ln_g);
    if slope >= 0.0 || !slope.is_finite() {
        return Err(Error::NonDecaying(slope));
    }
    Ok(CorrelationLength::Finite(-1.0 / slope))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDiagramConfig {
    pub dim: Dimension,
    pub couplings: Vec<f64>,
    pub betas: Vec<f64>,
    pub family: SizeFamily,
    pub sizes: Vec<usize>,
}

impl PhaseDiagramConfig {
    /// The default size schedule: l_B ∈ {4, 6, 8, 10} on a 20×20 lattice.
    pub fn square(couplings: Vec<f64>, betas: Vec<f64>) -> Self {
        Self {
            dim: Dimension::Two,
            couplings,
            betas,
            family: SizeFamily::Fixed { linear_size: 20 },
            sizes: vec![4, 6, 8, 10],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("coupling", &self.couplings), ("beta", &self.betas)] {
            if grid.is_empty() {
                return Err(Error::InvalidGrid(format!("{name} grid is empty")));
            }
            if grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::InvalidGrid(format!("{name} grid is not strictly increasing")));
            }
        }
        for &b in &self.betas {
            Beta::new(b)?;
        }
        if self.sizes.len() < MIN_FIT_POINTS {
            return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, got: self.sizes.len() });
        }
        for &c in &self.couplings {
            self.sweep(c, Beta::GROUND).validate()?;
        }
        Ok(())
    }

    fn sweep(&self, coupling: f64, beta: Beta) -> SweepConfig {
        SweepConfig {
            dim: self.dim,
            coupling,
            beta,
            family: self.family,
            sizes: self.sizes.clone(),
            observables: vec![
                Observable::IntensiveFidelity,
                Observable::MutualInformation,
                Observable::Negativity,
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellValues {
    pub alpha_f: f64,
    pub alpha_i: f64,
    pub alpha_e: f64,
    pub xi: CorrelationLength,
    /// F_I, I and E_N series with their fits.
    pub series: Vec<SweepSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum CellOutcome {
    Computed(CellValues),
    /// Too close to criticality to trust.
    Skipped { min_eigenvalue: f64 },
    Failed { error: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseCell {
    pub coupling: f64,
    pub beta: f64,
    pub outcome: CellOutcome,
}

impl PhaseCell {
    pub fn values(&self) -> Option<&CellValues> {
        match &self.outcome {
            CellOutcome::Computed(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub config: PhaseDiagramConfig,
    /// Coupling-major: cell (i, j) is at `i·betas.len() + j`.
    pub cells: Vec<PhaseCell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RankCorrelations {
    pub fidelity_negativity: f64,
    pub fidelity_mutual_information: f64,
    pub fidelity_inverse_correlation_length: f64,
}

impl PhaseDiagram {
    pub fn cell(&self, coupling_index: usize, beta_index: usize) -> &PhaseCell {
        &self.cells[coupling_index * self.config.betas.len() + beta_index]
    }

    /// Spearman correlations of α_F against α_E, α_I and 1/ξ over all
    /// computed cells.
    pub fn rank_correlations(&self) -> RankCorrelations {
        let computed: Vec<&CellValues> = self.cells.iter().filter_map(PhaseCell::values).collect();
        let column = |f: fn(&CellValues) -> f64| computed.iter().map(|v| f(v)).collect::<Vec<_>>();
        let alpha_f = column(|v| v.alpha_f);
        RankCorrelations {
            fidelity_negativity: spearman(&alpha_f, &column(|v| v.alpha_e)),
            fidelity_mutual_information: spearman(&alpha_f, &column(|v| v.alpha_i)),
            fidelity_inverse_correlation_length: spearman(&alpha_f, &column(|v| v.xi.inverse())),
        }
    }
}

/// Evaluates every (c, β) cell; failures are recorded per cell.
pub fn phase_diagram(config: &PhaseDiagramConfig) -> Result<PhaseDiagram> {
    config.validate()?;
    let keys: Vec<(f64, f64)> = config
        .couplings
        .iter()
        .flat_map(|&c| config.betas.iter().map(move |&b| (c, b)))
        .collect();
    let cells = keys
        .par_iter()
        .map(|&(coupling, beta)| PhaseCell { coupling, beta, outcome: phase_cell(config, coupling, beta) })
        .collect();
    Ok(PhaseDiagram { config: config.clone(), cells })
}

fn phase_cell(config: &PhaseDiagramConfig, coupling: f64, beta: f64) -> CellOutcome {
    let gap = 1.0 - 2.0 * config.dim.as_usize() as f64 * coupling;
    if gap < PHASE_DIAGRAM_FLOOR {
        return CellOutcome::Skipped { min_eigenvalue: gap };
    }
    let run = || -> Result<CellValues> {
        let beta = Beta::new(beta)?;
        let series = block_size_sweep(&config.sweep(coupling, beta))?;
        let alpha = |k: usize| series[k].alpha().expect("schedule has enough points");
        let spec = LatticeSpec::new(config.dim, config.family.linear_size(config.sizes[0]), coupling)?;
        Ok(CellValues {
            alpha_f: alpha(0),
            alpha_i: alpha(1),
            alpha_e: alpha(2),
            xi: correlation_length(&spec, beta)?,
            series,
        })
    };
    match run() {
        Ok(v) => CellOutcome::Computed(v),
        Err(e) => CellOutcome::Failed { error: e.to_string() },
    }
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; NaN when either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(dim: Dimension, values: Vec<f64>) -> SweepSeries {
        SweepSeries {
            observable: Observable::IntensiveFidelity,
            tag: "F_I".into(),
            dim,
            coupling: 0.1,
            beta: Beta::new(1.0).unwrap(),
            abscissa: (1..=values.len()).map(|k| 2 * k).collect(),
            lattice_sizes: vec![40; values.len()],
            values,
            fit: None,
        }
    }

    #[test]
    fn linear_fit_of_exact_line() {
        let s = series(Dimension::Two, (1..=8).map(|k| 1.0 - 0.01 * (2 * k) as f64).collect());
        let Fit::Linear(fit) = slope_fit(&s).unwrap() else { panic!() };
        assert!((fit.alpha - 0.01).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert_eq!(fit.window_start, 10.0);
        assert_eq!(fit.points, 4);
    }

    #[test]
    fn constant_series_has_no_slope() {
        let s = series(Dimension::Two, vec![0.7; 5]);
        let Fit::Linear(fit) = slope_fit(&s).unwrap() else { panic!() };
        assert!(fit.alpha < 1e-15);
        assert!(fit.relative_residual < 1e-15);
    }

    #[test]
    fn saturation_uses_last_three_points() {
        let s = series(Dimension::One, vec![0.5, 0.9, 0.95, 0.96, 0.97]);
        let Fit::Saturation(fit) = slope_fit(&s).unwrap() else { panic!() };
        assert!((fit.value - 0.96).abs() < 1e-12);
        assert!((fit.spread - 0.02).abs() < 1e-12);
    }

    #[test]
    fn fits_need_four_increasing_points() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(linear_fit(&x, &[1.0; 3]), Err(Error::TooFewPoints { needed: 4, got: 3 }));
        assert_eq!(linear_fit(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]), Err(Error::UnsortedAbscissa));
    }

    #[test]
    fn spearman_handles_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_lattice_is_uncorrelated_and_intensive() {
        let beta = Beta::new(2.0).unwrap();
        let spec = LatticeSpec::square(8, 0.0).unwrap();
        assert_eq!(correlation_length(&spec, beta).unwrap(), CorrelationLength::Uncorrelated);
        let sel = BlockSelection::new(&spec, 3).unwrap();
        assert!((intensive_fidelity(&spec, &sel, beta).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn correlation_length_grows_with_coupling() {
        let beta = Beta::new(1.0).unwrap();
        let xi: Vec<f64> = [0.05, 0.1, 0.15, 0.2]
            .iter()
            .map(|&c| correlation_length(&LatticeSpec::square(20, c).unwrap(), beta).unwrap().value().unwrap())
            .collect();
        assert!(xi.windows(2).all(|w| w[0] < w[1]), "{xi:?}");
    }

    #[test]
    fn sweep_rejects_bad_configs() {
        let mut config = SweepConfig {
            dim: Dimension::One,
            coupling: 0.3,
            beta: Beta::new(1.0).unwrap(),
            family: SizeFamily::Fixed { linear_size: 20 },
            sizes: vec![4, 8, 6],
            observables: vec![Observable::IntensiveFidelity],
        };
        assert_eq!(config.validate(), Err(Error::UnsortedAbscissa));
        config.sizes = vec![4, 20];
        assert!(matches!(config.validate(), Err(Error::BlockTooLarge { .. })));
        config.sizes = vec![4, 8];
        config.observables = vec![Observable::CoreFidelity { layers: 2 }];
        assert!(matches!(config.validate(), Err(Error::EmptyCore { .. })));
    }

    #[test]
    fn sweep_series_are_ordered_and_fitted() {
        let config = SweepConfig {
            dim: Dimension::Two,
            coupling: 0.2,
            beta: Beta::new(5.0).unwrap(),
            family: SizeFamily::Doubled,
            sizes: vec![3, 4, 5, 6],
            observables: vec![Observable::IntensiveFidelity, Observable::Negativity],
        };
        let out = block_size_sweep(&config).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].lattice_sizes, vec![6, 8, 10, 12]);
        assert!(out[0].values.iter().all(|&f| (0.0..=1.0).contains(&f)));
        assert!(matches!(out[1].fit, Some(Fit::Linear(_))));
        // a single point evaluated directly agrees with the sweep
        let spec = LatticeSpec::square(8, 0.2).unwrap();
        let sel = BlockSelection::new(&spec, 4).unwrap();
        let direct = intensive_fidelity(&spec, &sel, config.beta).unwrap();
        assert_eq!(direct, out[0].values[1]);
    }

    #[test]
    fn near_critical_cells_are_skipped() {
        let config = PhaseDiagramConfig {
            dim: Dimension::One,
            couplings: vec![0.1, 0.5 - 1e-11],
            betas: vec![1.0],
            family: SizeFamily::Fixed { linear_size: 12 },
            sizes: vec![2, 3, 4, 5],
        };
        let pd = phase_diagram(&config).unwrap();
        assert!(pd.cell(0, 0).values().is_some());
        assert!(matches!(pd.cell(1, 0).outcome, CellOutcome::Skipped { .. }));
    }
}
