//! Zero-mean Gaussian states stored as position and momentum covariance
//! blocks.
//!
//! Convention: the ground state of V = 1 has covariance 1, symplectic
//! eigenvalues satisfy ν ≥ 1, and a thermal mode of frequency ω has
//! ν = coth(βω/2) = 2n̄ + 1. Entropies and negativities are in nats.
//!
//! Hamiltonians without q–p coupling have thermal states whose covariance
//! has no q–p cross block. Every operation here preserves that structure
//! (partial traces, partial transposition), so it is stored, not assumed.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{
    potential_spectrum, translation_kernel, LatticeSpec, ModeSpectrum, TranslationKernel,
    CRITICAL_FLOOR,
};
use crate::linalg::{ln_det_from_llt, product_eigenvalues, SymmetricMatrix};

/// Symplectic eigenvalues this far below 1 are rounding noise and are
/// clipped to 1.
pub const CLIP_TOLERANCE: f64 = 1e-9;
/// Eigenvalues of Q·P below 1 − this are reported as unphysical.
pub const UNPHYSICAL_TOLERANCE: f64 = 1e-6;

/// Inverse temperature; `+∞` denotes the ground state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Beta(f64);

impl Beta {
    pub const GROUND: Beta = Beta(f64::INFINITY);

    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidBeta(beta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_ground(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// coth(βω/2) = 1 + 2/(e^{βω} − 1); exactly 1 in the ground state.
    pub fn occupation_factor(self, omega: f64) -> f64 {
        if self.is_ground() {
            1.0
        } else {
            1.0 + 2.0 / (self.0 * omega).exp_m1()
        }
    }
}

/// Ordered split of the modes into a block and the rest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    n_modes: usize,
    block: Vec<usize>,
    rest: Vec<usize>,
}

impl Partition {
    /// `block` as given; the rest is the sorted complement.
    pub fn new(n_modes: usize, block: Vec<usize>) -> Result<Self> {
        let mut seen = validate_modes(n_modes, &block)?;
        let rest: Vec<usize> = (0..n_modes).filter(|&k| !std::mem::take(&mut seen[k])).collect();
        if rest.is_empty() {
            return Err(Error::EmptySelection);
        }
        Ok(Self { n_modes, block, rest })
    }

    pub fn from_parts(n_modes: usize, block: Vec<usize>, rest: Vec<usize>) -> Result<Self> {
        let mut all = block.clone();
        all.extend_from_slice(&rest);
        validate_modes(n_modes, &all)?;
        if block.is_empty() || rest.is_empty() {
            return Err(Error::EmptySelection);
        }
        if all.len() != n_modes {
            return Err(Error::DimensionMismatch(all.len(), n_modes));
        }
        Ok(Self { n_modes, block, rest })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn block(&self) -> &[usize] {
        &self.block
    }

    pub fn rest(&self) -> &[usize] {
        &self.rest
    }
}

/// Checks indices are nonempty, in range and distinct; returns the
/// membership mask.
fn validate_modes(n_modes: usize, modes: &[usize]) -> Result<Vec<bool>> {
    if modes.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut seen = vec![false; n_modes];
    for &k in modes {
        if k >= n_modes {
            return Err(Error::IndexOutOfRange { index: k, modes: n_modes });
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::DuplicateIndex(k));
        }
    }
    Ok(seen)
}

/// Covariance matrix Q ⊕ P of a zero-mean Gaussian state.
#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    q: SymmetricMatrix,
    p: SymmetricMatrix,
}

impl CovarianceMatrix {
    /// Both blocks must have the same order and be positive definite.
    pub fn new(q: SymmetricMatrix, p: SymmetricMatrix) -> Result<Self> {
        if q.order() != p.order() {
            return Err(Error::DimensionMismatch(q.order(), p.order()));
        }
        q.cholesky("position covariance")?;
        p.cholesky("momentum covariance")?;
        Ok(Self { q, p })
    }

    pub fn n_modes(&self) -> usize {
        self.q.order()
    }

    pub fn position(&self) -> &SymmetricMatrix {
        &self.q
    }

    pub fn momentum(&self) -> &SymmetricMatrix {
        &self.p
    }

    /// Gaussian partial trace: keep the rows and columns of `modes`, in that
    /// order.
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        validate_modes(self.n_modes(), modes)?;
        Ok(Self { q: self.q.principal(modes), p: self.p.principal(modes) })
    }

    /// Williamson eigenvalues ν_k = sqrt(eig(Q·P)), descending.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        let squares = product_eigenvalues(&self.q, &self.p, "position covariance")?;
        let mut nus = Vec::with_capacity(squares.len());
        for s in squares.into_iter().rev() {
            if s < 1.0 - UNPHYSICAL_TOLERANCE {
                return Err(Error::Unphysical(s));
            }
            let nu = s.sqrt();
            nus.push(if (1.0 - CLIP_TOLERANCE..1.0).contains(&nu) { 1.0 } else { nu });
        }
        Ok(nus)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> Result<f64> {
        Ok(entropy_of_spectrum(&self.symplectic_spectrum()?))
    }

    /// S(block) + S(rest) − S(total).
    pub fn mutual_information(&self, part: &Partition) -> Result<f64> {
        self.check_partition(part)?;
        let sb = self.reduce(part.block())?.entropy()?;
        let sr = self.reduce(part.rest())?.entropy()?;
        Ok((sb + sr - self.entropy()?).max(0.0))
    }

    /// Symplectic eigenvalues after flipping the momenta of `modes`,
    /// descending. These may legitimately fall below 1.
    pub fn partially_transposed_spectrum(&self, modes: &[usize]) -> Result<Vec<f64>> {
        let mask = validate_modes(self.n_modes(), modes)?;
        let sign = |k: usize| if mask[k] { -1.0 } else { 1.0 };
        let flipped = SymmetricMatrix::from_fn(self.n_modes(), |i, j| {
            sign(i) * sign(j) * self.p.get(i, j)
        });
        let squares = product_eigenvalues(&self.q, &flipped, "position covariance")?;
        Ok(squares.into_iter().rev().map(|s| s.max(0.0).sqrt()).collect())
    }

    /// E_N = Σ max(0, −ln ν̃) over the partially transposed spectrum.
    pub fn log_negativity(&self, part: &Partition) -> Result<f64> {
        self.check_partition(part)?;
        let nus = self.partially_transposed_spectrum(part.block())?;
        Ok(nus.iter().map(|&nu| (-nu.ln()).max(0.0)).sum())
    }

    fn check_partition(&self, part: &Partition) -> Result<()> {
        if part.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch(part.n_modes(), self.n_modes()));
        }
        Ok(())
    }
}

/// Entropy of a single thermal mode with symplectic eigenvalue ν:
/// h(ν) = ((ν+1)/2)·ln((ν+1)/2) − ((ν−1)/2)·ln((ν−1)/2), h(1) = 0.
pub fn mode_entropy(nu: f64) -> f64 {
    let x = 0.5 * (nu - 1.0);
    if x <= 0.0 {
        0.0
    } else if nu - 1.0 < 1e-6 {
        x * (1.0 - x.ln()) + x * x / 2.0 - x * x * x / 6.0
    } else {
        (1.0 + x) * x.ln_1p() - x * x.ln()
    }
}

pub fn entropy_of_spectrum(nus: &[f64]) -> f64 {
    nus.iter().map(|&nu| mode_entropy(nu)).sum()
}

/// Thermal state of a full periodic lattice, kept as translation kernels so
/// that blocks can be cut out without forming the full covariance matrix.
#[derive(Clone, Debug)]
pub struct LatticeThermalState {
    beta: Beta,
    q: TranslationKernel,
    p: TranslationKernel,
    nus: Vec<f64>,
    entropy: f64,
}

impl LatticeThermalState {
    /// Q = V^{−1/2}·W, P = V^{1/2}·W with W = coth(β·V^{1/2}/2), from the
    /// analytic spectrum.
    pub fn new(spec: &LatticeSpec, beta: Beta) -> Result<Self> {
        let q = translation_kernel(spec, |lam| beta.occupation_factor(lam.sqrt()) / lam.sqrt())?;
        let p = translation_kernel(spec, |lam| beta.occupation_factor(lam.sqrt()) * lam.sqrt())?;
        let nus = thermal_symplectic_spectrum(&potential_spectrum(spec)?, beta);
        let entropy = entropy_of_spectrum(&nus);
        Ok(Self { beta, q, p, nus, entropy })
    }

    pub fn spec(&self) -> &LatticeSpec {
        self.q.spec()
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn n_modes(&self) -> usize {
        self.spec().n_modes()
    }

    pub fn position_kernel(&self) -> &TranslationKernel {
        &self.q
    }

    pub fn momentum_kernel(&self) -> &TranslationKernel {
        &self.p
    }

    /// Analytic symplectic spectrum, descending.
    pub fn symplectic_spectrum(&self) -> &[f64] {
        &self.nus
    }

    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn covariance(&self) -> CovarianceMatrix {
        CovarianceMatrix { q: self.q.to_matrix(), p: self.p.to_matrix() }
    }

    /// Reduced state on `modes`.
    pub fn reduce(&self, modes: &[usize]) -> Result<CovarianceMatrix> {
        validate_modes(self.n_modes(), modes)?;
        Ok(CovarianceMatrix { q: self.q.principal(modes), p: self.p.principal(modes) })
    }

    pub fn mutual_information(&self, part: &Partition) -> Result<f64> {
        if part.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch(part.n_modes(), self.n_modes()));
        }
        let sb = self.reduce(part.block())?.entropy()?;
        let sr = self.reduce(part.rest())?.entropy()?;
        Ok((sb + sr - self.entropy).max(0.0))
    }

    pub fn log_negativity(&self, part: &Partition) -> Result<f64> {
        self.covariance().log_negativity(part)
    }
}

/// Thermal covariance of the full lattice.
pub fn thermal_covariance(spec: &LatticeSpec, beta: Beta) -> Result<CovarianceMatrix> {
    Ok(LatticeThermalState::new(spec, beta)?.covariance())
}

/// Thermal covariance for an arbitrary positive definite potential, through
/// a dense eigendecomposition.
pub fn thermal_covariance_dense(potential: &SymmetricMatrix, beta: Beta) -> Result<CovarianceMatrix> {
    let (values, u) = potential.eigen()?;
    let lowest = values[0];
    if lowest <= 0.0 {
        return Err(Error::NotPositiveDefinite("potential"));
    }
    if lowest < CRITICAL_FLOOR {
        return Err(Error::NearCritical(lowest));
    }
    let n = potential.order();
    let synth = |f: &dyn Fn(f64) -> f64| {
        let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * f(values[j]));
        SymmetricMatrix::symmetrized(&scaled * u.transpose())
    };
    let q = synth(&|lam| beta.occupation_factor(lam.sqrt()) / lam.sqrt());
    let p = synth(&|lam| beta.occupation_factor(lam.sqrt()) * lam.sqrt());
    Ok(CovarianceMatrix { q, p })
}

/// Symplectic spectrum of the full lattice thermal state, coth(β√λ/2),
/// descending.
pub fn thermal_symplectic_spectrum(spectrum: &ModeSpectrum, beta: Beta) -> Vec<f64> {
    // λ ascending ⇒ ν descending.
    spectrum.values().iter().map(|&lam| beta.occupation_factor(lam.sqrt())).collect()
}

/// Uhlmann fidelity Tr[(√ρ₁ ρ₂ √ρ₁)^{1/2}] between zero-mean Gaussian states.
///
/// Closed form for covariances without q–p correlations:
///
///   F = 2^{n/2} · Π_j (√(1+ε_j) + √ε_j)^{1/2} / [det(Q₁+Q₂)·det(P₁+P₂)]^{1/4}
///
/// where ε_j ≥ 0 are the eigenvalues of
///
///   (Q₁+Q₂)^{−1} (1 − Q₂P₂) (P₁+P₂)^{−1} (1 − P₁Q₁).
///
/// ε vanishes when either state is pure, in which case F² reduces to the
/// overlap Tr ρ₁ρ₂. Using 1 − QP directly keeps nearly pure modes accurate.
pub fn fidelity(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<f64> {
    let n = a.n_modes();
    if b.n_modes() != n {
        return Err(Error::DimensionMismatch(n, b.n_modes()));
    }
    a.symplectic_spectrum()?;
    b.symplectic_spectrum()?;

    let q_sum = SymmetricMatrix::symmetrized(a.q.as_mat() + b.q.as_mat());
    let p_sum = SymmetricMatrix::symmetrized(a.p.as_mat() + b.p.as_mat());
    let q_llt = q_sum.cholesky("position covariance sum")?;
    let p_llt = p_sum.cholesky("momentum covariance sum")?;

    let identity = Mat::<f64>::identity(n, n);
    let mixed_b = &identity - b.q.as_mat() * b.p.as_mat();
    let mixed_a = &identity - a.p.as_mat() * a.q.as_mat();

    use faer::linalg::solvers::Solve;
    let right = p_llt.solve(&mixed_a);
    let m = q_llt.solve(&(&mixed_b * &right));

    let eps = m.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let scale = eps.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let mut sum = 0.0;
    for z in eps {
        if z.im.abs() > 1e-6 * scale.max(1e-300) + 1e-12 {
            return Err(Error::Eigensolver(format!("complex fidelity eigenvalue {z}")));
        }
        if z.re < -UNPHYSICAL_TOLERANCE * scale.max(1.0) {
            return Err(Error::Unphysical(1.0 + z.re));
        }
        sum += z.re.max(0.0).sqrt().asinh();
    }

    let ln_f = 0.5 * sum + 0.5 * n as f64 * std::f64::consts::LN_2
        - 0.25 * (ln_det_from_llt(&q_llt) + ln_det_from_llt(&p_llt));
    Ok(ln_f.exp().min(1.0))
}
