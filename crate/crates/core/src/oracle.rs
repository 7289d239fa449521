//! Truncated Fock-space reference implementation for one and two modes.
//!
//! Quadratures are q = (a + a†)/√2 and p = i(a† − a)/√2, so the vacuum has
//! ⟨q²⟩ = ½. The Hamiltonian H = ½(Σ V_ij q_i q_j + Σ p_i²) has thermal
//! states exp(−βH)/Z whose covariance 2⟨q_i q_j⟩ ⊕ 2⟨p_i p_j⟩ is what the
//! Gaussian module must reproduce.
//!
//! H is real in the number basis and commutes with total parity, so every
//! density matrix here is real symmetric and block diagonal in the two
//! parity sectors. All dense work is done sector by sector.
//!
//! Single-mode q² and p² use their exact number-basis matrix elements rather
//! than products of truncated q and p; the latter put spurious low-energy
//! states at the top of the truncated space.

use faer::{Mat, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    fidelity, thermal_covariance_dense, Beta, CovarianceMatrix, Partition,
};
use crate::linalg::SymmetricMatrix;

/// Weight in the highest retained Fock level above which the cutoff is
/// considered too small.
pub const TRUNCATION_THRESHOLD: f64 = 1e-8;
pub const MIN_CUTOFF: usize = 10;

/// One total-parity block of a density matrix.
#[derive(Clone, Debug)]
struct Sector {
    /// Global basis indices, ascending.
    basis: Vec<usize>,
    rho: Mat<f64>,
    /// Eigenvalues and eigenvectors of `rho`, when known from construction.
    spectral: Option<(Vec<f64>, Mat<f64>)>,
}

impl Sector {
    fn spectrum(&self) -> Result<(Vec<f64>, Mat<f64>)> {
        match &self.spectral {
            Some(s) => Ok(s.clone()),
            None => eigen(&self.rho),
        }
    }
}

/// Density matrix of one or two modes in the truncated number basis, stored
/// as its two parity blocks. Basis index for two modes is `n0·N + n1`.
#[derive(Clone, Debug)]
pub struct FockDensityMatrix {
    n_modes: usize,
    cutoff: usize,
    sectors: [Sector; 2],
    /// Global index → (sector, position within sector).
    position: Vec<(usize, usize)>,
}

impl FockDensityMatrix {
    fn from_sectors(n_modes: usize, cutoff: usize, sectors: [Sector; 2]) -> Self {
        let mut position = vec![(0, 0); cutoff.pow(n_modes as u32)];
        for (s, sector) in sectors.iter().enumerate() {
            for (k, &i) in sector.basis.iter().enumerate() {
                position[i] = (s, k);
            }
        }
        Self { n_modes, cutoff, sectors, position }
    }

    fn from_fn(n_modes: usize, cutoff: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let sectors = parity_sectors(n_modes, cutoff).map(|basis| {
            let rho = Mat::from_fn(basis.len(), basis.len(), |a, b| f(basis[a], basis[b]));
            Sector { basis, rho, spectral: None }
        });
        Self::from_sectors(n_modes, cutoff, sectors)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// ⟨i|ρ|j⟩; zero between different parity sectors.
    pub fn element(&self, i: usize, j: usize) -> f64 {
        let ((si, a), (sj, b)) = (self.position[i], self.position[j]);
        if si == sj {
            self.sectors[si].rho[(a, b)]
        } else {
            0.0
        }
    }

    /// The full dense matrix.
    pub fn matrix(&self) -> Mat<f64> {
        Mat::from_fn(self.dim(), self.dim(), |i, j| self.element(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.element(i, i)).sum()
    }

    /// Largest occupation probability of the top Fock level of any mode.
    pub fn truncation_weight(&self) -> f64 {
        let n = self.cutoff;
        (0..self.n_modes)
            .map(|mode| {
                (0..self.dim())
                    .filter(|&i| self.occupation(i, mode) == n - 1)
                    .map(|i| self.element(i, i))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Errors if the top level carries more than [`TRUNCATION_THRESHOLD`].
    pub fn check_truncation(&self) -> Result<()> {
        let weight = self.truncation_weight();
        if weight > TRUNCATION_THRESHOLD {
            return Err(Error::TruncationWeight { cutoff: self.cutoff, weight });
        }
        Ok(())
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        match (self.n_modes, mode) {
            (1, _) => index,
            (_, 0) => index / self.cutoff,
            _ => index % self.cutoff,
        }
    }

    /// Tr(ρ·O) for a parity-preserving symmetric operator given elementwise.
    fn expect(&self, op: impl Fn(usize, usize) -> f64) -> f64 {
        self.sectors
            .iter()
            .map(|s| {
                let mut acc = 0.0;
                for (b, &j) in s.basis.iter().enumerate() {
                    for (a, &i) in s.basis.iter().enumerate() {
                        let o = op(i, j);
                        if o != 0.0 {
                            acc += s.rho[(a, b)] * o;
                        }
                    }
                }
                acc
            })
            .sum()
    }
}

fn parity_sectors(n_modes: usize, cutoff: usize) -> [Vec<usize>; 2] {
    let dim = cutoff.pow(n_modes as u32);
    let parity = |i: usize| if n_modes == 1 { i % 2 } else { (i / cutoff + i % cutoff) % 2 };
    [
        (0..dim).filter(|&i| parity(i) == 0).collect(),
        (0..dim).filter(|&i| parity(i) == 1).collect(),
    ]
}

fn eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    SymmetricMatrix::new(m.clone())?.eigen()
}

fn eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

/// Single-mode operators on the truncated space.
struct ModeOperators {
    id: Mat<f64>,
    q: Mat<f64>,
    /// (a† − a)/√2, so that p = i·dp.
    dp: Mat<f64>,
    q2: Mat<f64>,
    p2: Mat<f64>,
}

impl ModeOperators {
    fn new(n: usize) -> Self {
        let q = Mat::from_fn(n, n, |i, j| {
            if j == i + 1 {
                (j as f64 / 2.0).sqrt()
            } else if i == j + 1 {
                (i as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let dp = Mat::from_fn(n, n, |i, j| if i == j + 1 { q[(i, j)] } else { -q[(i, j)] });
        // ⟨k|q²|k⟩ = k + ½, ⟨k|q²|k+2⟩ = ½√((k+1)(k+2)); p² flips the sign
        // of the off-diagonal.
        let off = |i: usize, j: usize| {
            let k = i.min(j) as f64;
            0.5 * ((k + 1.0) * (k + 2.0)).sqrt()
        };
        let q2 = Mat::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => i as f64 + 0.5,
            2 => off(i, j),
            _ => 0.0,
        });
        let p2 = Mat::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => i as f64 + 0.5,
            2 => -off(i, j),
            _ => 0.0,
        });
        Self { id: Mat::identity(n, n), q, dp, q2, p2 }
    }
}

/// A product operator A₀ ⊗ A₁ (or a single-mode A₀) with a scalar factor.
struct Product<'a> {
    factor: f64,
    ops: Vec<&'a Mat<f64>>,
}

impl Product<'_> {
    fn element(&self, cutoff: usize, i: usize, j: usize) -> f64 {
        match self.ops.as_slice() {
            [a] => self.factor * a[(i, j)],
            [a, b] => {
                let x = a[(i / cutoff, j / cutoff)];
                if x == 0.0 {
                    0.0
                } else {
                    self.factor * x * b[(i % cutoff, j % cutoff)]
                }
            }
            _ => unreachable!("one or two modes"),
        }
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::CutoffTooSmall(cutoff));
    }
    Ok(())
}

/// q_i q_j and p_i p_j as product operators.
fn second_moments(n_modes: usize, ops: &ModeOperators) -> (Vec<Vec<Product<'_>>>, Vec<Vec<Product<'_>>>) {
    let one = |factor, a| Product { factor, ops: vec![a] };
    let two = |factor, a, b| Product { factor, ops: vec![a, b] };
    if n_modes == 1 {
        return (vec![vec![one(1.0, &ops.q2)]], vec![vec![one(1.0, &ops.p2)]]);
    }
    (
        vec![
            vec![two(1.0, &ops.q2, &ops.id), two(1.0, &ops.q, &ops.q)],
            vec![two(1.0, &ops.q, &ops.q), two(1.0, &ops.id, &ops.q2)],
        ],
        // p ⊗ p = −dp ⊗ dp
        vec![
            vec![two(1.0, &ops.p2, &ops.id), two(-1.0, &ops.dp, &ops.dp)],
            vec![two(-1.0, &ops.dp, &ops.dp), two(1.0, &ops.id, &ops.p2)],
        ],
    )
}

/// Thermal state of H = ½(Σ V_ij q_i q_j + Σ p_i²) at cutoff `cutoff` per
/// mode. Errors when the top Fock level carries more than
/// [`TRUNCATION_THRESHOLD`] of the weight.
pub fn fock_thermal(v: &SymmetricMatrix, beta: Beta, cutoff: usize) -> Result<FockDensityMatrix> {
    let n_modes = v.order();
    if n_modes == 0 || n_modes > 2 {
        return Err(Error::OracleModes(n_modes));
    }
    check_cutoff(cutoff)?;
    v.cholesky("oracle potential")?;

    let ops = ModeOperators::new(cutoff);
    let (qq, pp) = second_moments(n_modes, &ops);
    let mut terms = Vec::new();
    for i in 0..n_modes {
        terms.push((0.5, &pp[i][i]));
        for j in 0..n_modes {
            terms.push((0.5 * v.get(i, j), &qq[i][j]));
        }
    }
    let h = |i: usize, j: usize| -> f64 {
        terms.iter().map(|(w, op)| w * op.element(cutoff, i, j)).sum()
    };

    let bases = parity_sectors(n_modes, cutoff);
    let mut spectra = Vec::with_capacity(2);
    for basis in &bases {
        let block = Mat::from_fn(basis.len(), basis.len(), |a, b| h(basis[a], basis[b]));
        spectra.push(eigen(&block)?);
    }
    let e0 = spectra.iter().map(|(e, _)| e[0]).fold(f64::INFINITY, f64::min);
    let weight = |e: f64| {
        if beta.is_ground() {
            if e == e0 { 1.0 } else { 0.0 }
        } else {
            (-beta.value() * (e - e0)).exp()
        }
    };
    let z: f64 = spectra.iter().flat_map(|(e, _)| e.iter()).map(|&e| weight(e)).sum();

    let sectors = bases.into_iter().zip(spectra).map(|(basis, (energies, vectors))| {
        let p: Vec<f64> = energies.iter().map(|&e| weight(e) / z).collect();
        // Only states with non-negligible weight contribute to ρ.
        let keep: Vec<usize> = (0..p.len()).filter(|&k| p[k] > 1e-300).collect();
        let scaled = Mat::from_fn(basis.len(), keep.len(), |i, k| vectors[(i, keep[k])] * p[keep[k]]);
        let kept = Mat::from_fn(basis.len(), keep.len(), |i, k| vectors[(i, keep[k])]);
        let rho = SymmetricMatrix::symmetrized(&scaled * kept.transpose()).into_inner();
        Sector { basis, rho, spectral: Some((p, vectors)) }
    });
    let sectors: Vec<Sector> = sectors.collect();
    let sectors: [Sector; 2] = sectors.try_into().expect("two parity sectors");
    let rho = FockDensityMatrix::from_sectors(n_modes, cutoff, sectors);
    rho.check_truncation()?;
    Ok(rho)
}

/// Covariance 2⟨q_i q_j⟩ ⊕ 2⟨p_i p_j⟩.
pub fn fock_covariance(rho: &FockDensityMatrix) -> Result<CovarianceMatrix> {
    let ops = ModeOperators::new(rho.cutoff);
    let (qq, pp) = second_moments(rho.n_modes, &ops);
    let n = rho.n_modes;
    let moment = |op: &Product| 2.0 * rho.expect(|i, j| op.element(rho.cutoff, i, j));
    let q = SymmetricMatrix::from_fn(n, |i, j| moment(&qq[i][j]));
    let p = SymmetricMatrix::from_fn(n, |i, j| moment(&pp[i][j]));
    CovarianceMatrix::new(q, p)
}

fn check_compatible(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<()> {
    if a.n_modes != b.n_modes || a.cutoff != b.cutoff {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Uhlmann fidelity as the trace norm of √ρ₁·√ρ₂.
///
/// Eigenvalues below 1e-14 of the largest are dropped before taking square
/// roots; they are below the resolution of the eigensolver and would
/// otherwise each contribute O(√ε) noise.
pub fn fock_fidelity(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<f64> {
    check_compatible(a, b)?;
    let root = |sector: &Sector| -> Result<Mat<f64>> {
        let (w, u) = sector.spectrum()?;
        let top = w.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 1e-14 * top).collect();
        Ok(Mat::from_fn(u.nrows(), keep.len(), |i, k| u[(i, keep[k])] * w[keep[k]].sqrt()))
    };
    let mut total = 0.0;
    for (sa, sb) in a.sectors.iter().zip(&b.sectors) {
        let (ra, rb) = (root(sa)?, root(sb)?);
        if ra.ncols() == 0 || rb.ncols() == 0 {
            continue;
        }
        let overlap = ra.transpose() * &rb;
        let sv = overlap.singular_values().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        total += sv.iter().sum::<f64>();
    }
    Ok(total)
}

/// Von Neumann entropy in nats.
pub fn fock_entropy(rho: &FockDensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for sector in &rho.sectors {
        let p = match &sector.spectral {
            Some((p, _)) => p.clone(),
            None => eigenvalues(&sector.rho)?,
        };
        s -= p.iter().filter(|&&x| x > 1e-300).map(|&x| x * x.ln()).sum::<f64>();
    }
    Ok(s)
}

/// ln‖ρ^{T_B}‖₁ with the transpose taken on mode 1 of a two-mode state.
/// Partial transposition maps each total-parity sector to itself.
pub fn fock_negativity(rho: &FockDensityMatrix) -> Result<f64> {
    if rho.n_modes != 2 {
        return Err(Error::OracleModes(rho.n_modes));
    }
    let n = rho.cutoff;
    let mut norm = 0.0;
    for sector in &rho.sectors {
        let basis = &sector.basis;
        let pt = Mat::from_fn(basis.len(), basis.len(), |a, b| {
            let (i, j) = (basis[a], basis[b]);
            rho.element((i / n) * n + j % n, (j / n) * n + i % n)
        });
        norm += eigenvalues(&pt)?.iter().map(|x| x.abs()).sum::<f64>();
    }
    Ok(norm.ln().max(0.0))
}

/// Reduced single-mode state of `keep` ∈ {0, 1}.
pub fn fock_reduce(rho: &FockDensityMatrix, keep: usize) -> Result<FockDensityMatrix> {
    if rho.n_modes != 2 {
        return Err(Error::OracleModes(rho.n_modes));
    }
    if keep > 1 {
        return Err(Error::IndexOutOfRange { index: keep, modes: 2 });
    }
    let n = rho.cutoff;
    let index = |kept: usize, traced: usize| if keep == 0 { kept * n + traced } else { traced * n + kept };
    Ok(FockDensityMatrix::from_fn(1, n, |i, j| {
        (0..n).map(|k| rho.element(index(i, k), index(j, k))).sum()
    }))
}

/// Outcome of one Gaussian-versus-oracle comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The oracle itself had not converged in the cutoff.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationRow {
    pub case: String,
    pub quantity: String,
    pub gaussian: f64,
    pub oracle: f64,
    /// Oracle change between the working and the reference cutoff.
    pub cutoff_drift: f64,
    pub verdict: Verdict,
}

/// A 1- or 2-mode system to certify.
#[derive(Clone, Debug, Serialize)]
pub struct CertificationCase {
    pub coupling: f64,
    pub beta: f64,
    pub two_modes: bool,
}

impl CertificationCase {
    fn potential(&self, coupling: f64) -> SymmetricMatrix {
        if self.two_modes {
            SymmetricMatrix::from_rows(&[vec![1.0, -coupling], vec![-coupling, 1.0]]).unwrap()
        } else {
            // one site of the coupled pair with its partner eliminated
            SymmetricMatrix::from_rows(&[vec![1.0 - coupling * coupling]]).unwrap()
        }
    }

    fn label(&self) -> String {
        let modes = if self.two_modes { 2 } else { 1 };
        format!("modes={modes} c={} beta={}", self.coupling, self.beta)
    }
}

/// Cutoffs and tolerances for [`certify`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CertificationSettings {
    pub cutoff: usize,
    /// Larger cutoff the oracle is re-run at to estimate its own error.
    pub reference_cutoff_one_mode: usize,
    /// Two-mode reference runs scale as N⁶; 1.5N is already converged far
    /// below the tolerance for the default cutoff.
    pub reference_cutoff_two_modes: usize,
    pub tolerance: f64,
    pub convergence: f64,
}

impl Default for CertificationSettings {
    fn default() -> Self {
        Self {
            cutoff: 40,
            reference_cutoff_one_mode: 80,
            reference_cutoff_two_modes: 60,
            tolerance: 1e-4,
            convergence: 1e-6,
        }
    }
}

/// The fixed case list used by the command-line check.
pub fn default_cases() -> Vec<CertificationCase> {
    let mut cases = Vec::new();
    for &beta in &[0.5, 1.0, 2.0, 5.0] {
        for &coupling in &[0.0, 0.17, 0.33] {
            for two_modes in [false, true] {
                cases.push(CertificationCase { coupling, beta, two_modes });
            }
        }
    }
    cases
}

/// Compares second moments, entropy, fidelity and (for two modes) negativity
/// of the Gaussian formulas against the oracle. Each oracle quantity is also
/// evaluated at the reference cutoff; if that moves it by more than
/// `settings.convergence` the row is inconclusive rather than failed.
pub fn certify(case: &CertificationCase, settings: &CertificationSettings) -> Result<Vec<CertificationRow>> {
    let beta = Beta::new(case.beta)?;
    // Second state for the fidelity: 30% colder (so it stays inside the
    // oracle's converged range) and a different coupling.
    let other_beta = Beta::new(case.beta * 1.3)?;
    let other_coupling = 0.5 * case.coupling + 0.1;
    let v = case.potential(case.coupling);
    let v_other = case.potential(other_coupling);

    let gauss = thermal_covariance_dense(&v, beta)?;
    let gauss_other = thermal_covariance_dense(&v_other, other_beta)?;

    struct Oracle {
        moments: CovarianceMatrix,
        entropy: f64,
        fidelity: f64,
        negativity: Option<f64>,
        reduced_entropy: Option<f64>,
    }
    let run = |cutoff: usize| -> Result<Oracle> {
        let rho = fock_thermal(&v, beta, cutoff)?;
        let other = fock_thermal(&v_other, other_beta, cutoff)?;
        let (negativity, reduced_entropy) = if case.two_modes {
            (Some(fock_negativity(&rho)?), Some(fock_entropy(&fock_reduce(&rho, 0)?)?))
        } else {
            (None, None)
        };
        Ok(Oracle {
            moments: fock_covariance(&rho)?,
            entropy: fock_entropy(&rho)?,
            fidelity: fock_fidelity(&rho, &other)?,
            negativity,
            reduced_entropy,
        })
    };
    let full = run(settings.cutoff)?;
    let reference = run(if case.two_modes {
        settings.reference_cutoff_two_modes
    } else {
        settings.reference_cutoff_one_mode
    })?;

    let moment_diff = |a: &CovarianceMatrix, b: &CovarianceMatrix| {
        a.position().max_abs_diff(b.position()).max(a.momentum().max_abs_diff(b.momentum()))
    };
    let mut rows = Vec::new();
    let mut push = |quantity: &str, gaussian: f64, oracle: f64, drift: f64| {
        let verdict = if drift > settings.convergence {
            Verdict::Inconclusive
        } else if (gaussian - oracle).abs() <= settings.tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        rows.push(CertificationRow {
            case: case.label(),
            quantity: quantity.to_string(),
            gaussian,
            oracle,
            cutoff_drift: drift,
            verdict,
        });
    };

    push(
        "second moments (max abs diff)",
        0.0,
        moment_diff(&gauss, &full.moments),
        moment_diff(&full.moments, &reference.moments),
    );
    push("entropy", gauss.entropy()?, full.entropy, (full.entropy - reference.entropy).abs());
    push(
        "fidelity",
        fidelity(&gauss, &gauss_other)?,
        full.fidelity,
        (full.fidelity - reference.fidelity).abs(),
    );
    if let (Some(neg), Some(neg_ref)) = (full.negativity, reference.negativity) {
        let part = Partition::new(2, vec![1])?;
        push("log negativity", gauss.log_negativity(&part)?, neg, (neg - neg_ref).abs());
    }
    if let (Some(s), Some(s_ref)) = (full.reduced_entropy, reference.reduced_entropy) {
        push("reduced entropy", gauss.reduce(&[0])?.entropy()?, s, (s - s_ref).abs());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&[vec![v]]).unwrap()
    }

    fn pair(c: f64) -> SymmetricMatrix {
        SymmetricMatrix::from_rows(&[vec![1.0, -c], vec![-c, 1.0]]).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        let b = Beta::new(1.0).unwrap();
        assert_eq!(fock_thermal(&scalar(1.0), b, 9).unwrap_err(), Error::CutoffTooSmall(9));
        assert_eq!(
            fock_thermal(&SymmetricMatrix::identity(3), b, 10).unwrap_err(),
            Error::OracleModes(3)
        );
        assert!(fock_thermal(&scalar(-1.0), b, 10).is_err());
    }

    #[test]
    fn cold_state_is_the_vacuum_projector() {
        let rho = fock_thermal(&scalar(1.0), Beta::new(50.0).unwrap(), 20).unwrap();
        let m = rho.matrix();
        for i in 0..20 {
            for j in 0..20 {
                let expected = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert!((m[(i, j)] - expected).abs() < 1e-10);
            }
        }
        assert!(fock_entropy(&rho).unwrap().abs() < 1e-9);
    }

    #[test]
    fn single_mode_thermal_second_moment() {
        let rho = fock_thermal(&scalar(1.0), Beta::new(1.0).unwrap(), 40).unwrap();
        rho.check_truncation().unwrap();
        assert_relative_eq!(rho.trace(), 1.0, epsilon = 1e-12);
        let cm = fock_covariance(&rho).unwrap();
        let expected = 1.0 / 0.5f64.tanh();
        assert!((cm.position().get(0, 0) - expected).abs() < 1e-6);
        assert!((cm.momentum().get(0, 0) - expected).abs() < 1e-6);
    }

    #[test]
    fn single_mode_entropy_at_unit_occupation() {
        // n̄ = 1 ⇔ e^{−βω} = ½
        let rho = fock_thermal(&scalar(1.0), Beta::new(2f64.ln()).unwrap(), 60).unwrap();
        assert!((fock_entropy(&rho).unwrap() - 4f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn thermal_fidelity_closed_form() {
        let mk = |nbar: f64| {
            let beta = (1.0 + 1.0 / nbar).ln();
            fock_thermal(&scalar(1.0), Beta::new(beta).unwrap(), 60).unwrap()
        };
        let (n1, n2) = (0.3, 0.9);
        let f = fock_fidelity(&mk(n1), &mk(n2)).unwrap();
        let expected = 1.0 / (((n1 + 1.0) * (n2 + 1.0)).sqrt() - (n1 * n2).sqrt());
        assert!((f - expected).abs() < 1e-6);
        let rho = mk(n1);
        assert!((fock_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_mode_moments_match_gaussian() {
        let v = pair(0.3);
        let beta = Beta::new(2.0).unwrap();
        let rho = fock_thermal(&v, beta, 30).unwrap();
        let oracle = fock_covariance(&rho).unwrap();
        let gauss = thermal_covariance_dense(&v, beta).unwrap();
        assert!(oracle.position().max_abs_diff(gauss.position()) < 1e-5);
        assert!(oracle.momentum().max_abs_diff(gauss.momentum()) < 1e-5);
    }

    #[test]
    fn ground_state_negativity_matches_gaussian() {
        let v = pair(0.3);
        let rho = fock_thermal(&v, Beta::GROUND, 40).unwrap();
        let neg = fock_negativity(&rho).unwrap();
        assert!(neg > 0.0);
        let gauss = thermal_covariance_dense(&v, Beta::GROUND).unwrap();
        let part = Partition::new(2, vec![1]).unwrap();
        assert!((gauss.log_negativity(&part).unwrap() - neg).abs() < 1e-4);
        // pure state: both marginals have the same entropy
        let s0 = fock_entropy(&fock_reduce(&rho, 0).unwrap()).unwrap();
        let s1 = fock_entropy(&fock_reduce(&rho, 1).unwrap()).unwrap();
        assert!((s0 - s1).abs() < 1e-9);
        assert!(fock_entropy(&rho).unwrap().abs() < 1e-9);
    }

    #[test]
    fn small_cutoffs_are_rejected_when_hot() {
        let err = fock_thermal(&scalar(1.0), Beta::new(0.1).unwrap(), 10).unwrap_err();
        assert!(matches!(err, Error::TruncationWeight { cutoff: 10, .. }));
        let rho = fock_thermal(&scalar(1.0), Beta::new(0.5).unwrap(), 40).unwrap();
        assert!(rho.truncation_weight() < TRUNCATION_THRESHOLD);
    }
}
