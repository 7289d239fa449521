//! Periodic harmonic lattices in one and two dimensions.
//!
//! The potential matrix is circulant (1D) or block-circulant with circulant
//! blocks (2D), so it is diagonalized by plane waves:
//!
//!   1D: λ_k       = 1 − 2c·cos(2πk/l)
//!   2D: λ_{k1,k2} = 1 − 2c·cos(2πk1/l) − 2c·cos(2πk2/l)
//!
//! and any matrix function f(V) is translation invariant, with entries given
//! by a cosine transform of f(λ). Sites are indexed row-major, k = x + l·y.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Spectra reaching below this are treated as numerically critical.
pub const CRITICAL_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }

    /// Coupling at which the lattice becomes critical, 1/2^d.
    pub fn critical_coupling(self) -> f64 {
        match self {
            Dimension::One => 0.5,
            Dimension::Two => 0.25,
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.as_usize()
    }
}

/// A periodic nearest-neighbour lattice with unit on-site frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    dim: Dimension,
    linear_size: usize,
    coupling: f64,
}

impl LatticeSpec {
    pub fn new(dim: Dimension, linear_size: usize, coupling: f64) -> Result<Self> {
        let limit = dim.critical_coupling();
        if !(0.0..limit).contains(&coupling) {
            return Err(Error::CouplingOutOfRange { coupling, limit, dim: dim.as_usize() });
        }
        if linear_size < 3 {
            return Err(Error::LatticeTooSmall(linear_size));
        }
        Ok(Self { dim, linear_size, coupling })
    }

    pub fn chain(linear_size: usize, coupling: f64) -> Result<Self> {
        Self::new(Dimension::One, linear_size, coupling)
    }

    pub fn square(linear_size: usize, coupling: f64) -> Result<Self> {
        Self::new(Dimension::Two, linear_size, coupling)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn linear_size(&self) -> usize {
        self.linear_size
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn n_modes(&self) -> usize {
        self.linear_size.pow(self.dim.as_usize() as u32)
    }

    /// Row-major site index; `y` is ignored in 1D.
    pub fn site(&self, x: usize, y: usize) -> usize {
        match self.dim {
            Dimension::One => x,
            Dimension::Two => x + self.linear_size * y,
        }
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        match self.dim {
            Dimension::One => (k, 0),
            Dimension::Two => (k % self.linear_size, k / self.linear_size),
        }
    }

    /// Smallest eigenvalue of V, 1 − 2·d·c.
    pub fn spectral_gap(&self) -> f64 {
        1.0 - 2.0 * self.dim.as_usize() as f64 * self.coupling
    }

    fn mode_eigenvalue(&self, k1: usize, k2: usize) -> f64 {
        let l = self.linear_size as f64;
        let two_c = 2.0 * self.coupling;
        match self.dim {
            Dimension::One => 1.0 - two_c * (2.0 * PI * k1 as f64 / l).cos(),
            Dimension::Two => {
                1.0 - two_c * (2.0 * PI * k1 as f64 / l).cos()
                    - two_c * (2.0 * PI * k2 as f64 / l).cos()
            }
        }
    }

    fn check_not_critical(&self) -> Result<()> {
        let gap = self.spectral_gap();
        if gap < CRITICAL_FLOOR {
            return Err(Error::NearCritical(gap));
        }
        Ok(())
    }
}

/// V for the lattice: unit diagonal, −c on each periodic nearest-neighbour
/// bond.
pub fn build_potential(spec: &LatticeSpec) -> SymmetricMatrix {
    let n = spec.n_modes();
    let l = spec.linear_size;
    let c = spec.coupling;
    let mut rows = vec![vec![0.0; n]; n];
    for (k, row) in rows.iter_mut().enumerate() {
        row[k] = 1.0;
        let (x, y) = spec.coords(k);
        row[spec.site((x + 1) % l, y)] -= c;
        row[spec.site((x + l - 1) % l, y)] -= c;
        if spec.dim == Dimension::Two {
            row[spec.site(x, (y + 1) % l)] -= c;
            row[spec.site(x, (y + l - 1) % l)] -= c;
        }
    }
    SymmetricMatrix::from_fn(n, |i, j| rows[i][j])
}

/// Eigenvalues of V in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSpectrum {
    eigenvalues: Vec<f64>,
}

impl ModeSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn potential_spectrum(spec: &LatticeSpec) -> Result<ModeSpectrum> {
    spec.check_not_critical()?;
    let l = spec.linear_size;
    let mut eigenvalues = match spec.dim {
        Dimension::One => (0..l).map(|k| spec.mode_eigenvalue(k, 0)).collect::<Vec<_>>(),
        Dimension::Two => (0..l)
            .flat_map(|k2| (0..l).map(move |k1| (k1, k2)))
            .map(|(k1, k2)| spec.mode_eigenvalue(k1, k2))
            .collect(),
    };
    eigenvalues.sort_by(f64::total_cmp);
    Ok(ModeSpectrum { eigenvalues })
}

/// First row of a translation-invariant matrix function f(V), indexed by the
/// periodic displacement (dx, dy).
#[derive(Clone, Debug)]
pub struct TranslationKernel {
    spec: LatticeSpec,
    values: Vec<f64>,
}

impl TranslationKernel {
    /// Entry for displacement (dx, dy), taken modulo the lattice size.
    pub fn at(&self, dx: usize, dy: usize) -> f64 {
        let l = self.spec.linear_size;
        match self.spec.dim {
            Dimension::One => self.values[dx % l],
            Dimension::Two => self.values[dx % l + l * (dy % l)],
        }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// Matrix entry between sites `i` and `j`.
    pub fn between(&self, i: usize, j: usize) -> f64 {
        let l = self.spec.linear_size;
        let (xi, yi) = self.spec.coords(i);
        let (xj, yj) = self.spec.coords(j);
        self.at(xi + l - xj, yi + l - yj)
    }

    pub fn to_matrix(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.spec.n_modes(), |i, j| self.between(i, j))
    }

    /// Principal submatrix on `modes`, without forming the full matrix.
    pub fn principal(&self, modes: &[usize]) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(modes.len(), |i, j| self.between(modes[i], modes[j]))
    }
}

/// Cosine transform of f over the Brillouin zone.
pub fn translation_kernel(spec: &LatticeSpec, f: impl Fn(f64) -> f64) -> Result<TranslationKernel> {
    spec.check_not_critical()?;
    let l = spec.linear_size;
    // cos(2π·k·d/l) with the phase reduced mod l before scaling.
    let cos_table: Vec<f64> = (0..l * l)
        .map(|kd| {
            let (k, d) = (kd / l, kd % l);
            (2.0 * PI * ((k * d) % l) as f64 / l as f64).cos()
        })
        .collect();
    let cos = |k: usize, d: usize| cos_table[k * l + d];

    let eval = |k1: usize, k2: usize| -> Result<f64> {
        let lam = spec.mode_eigenvalue(k1, k2);
        let y = f(lam);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteFunction(lam))
        }
    };

    let values = match spec.dim {
        Dimension::One => {
            let fk = (0..l).map(|k| eval(k, 0)).collect::<Result<Vec<_>>>()?;
            (0..l)
                .map(|d| fk.iter().enumerate().map(|(k, v)| v * cos(k, d)).sum::<f64>() / l as f64)
                .collect()
        }
        Dimension::Two => {
            let mut fk = vec![0.0; l * l];
            for k2 in 0..l {
                for k1 in 0..l {
                    fk[k1 + l * k2] = eval(k1, k2)?;
                }
            }
            // partial[k2][dx] = Σ_k1 f(k1,k2)·cos(k1,dx)
            let mut partial = vec![0.0; l * l];
            for k2 in 0..l {
                for dx in 0..l {
                    partial[k2 * l + dx] = (0..l).map(|k1| fk[k1 + l * k2] * cos(k1, dx)).sum();
                }
            }
            let norm = (l * l) as f64;
            let mut values = vec![0.0; l * l];
            for dy in 0..l {
                for dx in 0..l {
                    values[dx + l * dy] =
                        (0..l).map(|k2| partial[k2 * l + dx] * cos(k2, dy)).sum::<f64>() / norm;
                }
            }
            values
        }
    };
    Ok(TranslationKernel { spec: *spec, values })
}

/// f(V) synthesized in the plane-wave eigenbasis.
pub fn matrix_function(spec: &LatticeSpec, f: impl Fn(f64) -> f64) -> Result<SymmetricMatrix> {
    Ok(translation_kernel(spec, f)?.to_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Neighbour lists built independently of `build_potential`.
    fn adjacency(l: usize) -> Vec<Vec<usize>> {
        let idx = |x: usize, y: usize| (x % l) + l * (y % l);
        (0..l * l)
            .map(|k| {
                let (x, y) = (k % l, k / l);
                vec![idx(x + 1, y), idx(x + l - 1, y), idx(x, y + 1), idx(x, y + l - 1)]
            })
            .collect()
    }

    #[test]
    fn uncoupled_chain_is_identity() {
        let v = build_potential(&LatticeSpec::chain(4, 0.0).unwrap());
        assert_eq!(v, SymmetricMatrix::identity(4));
    }

    #[test]
    fn chain_rows_are_cyclic_shifts() {
        let v = build_potential(&LatticeSpec::chain(4, 0.25).unwrap());
        let first = [1.0, -0.25, 0.0, -0.25];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(v.get(i, j), first[(j + 4 - i) % 4]);
            }
        }
    }

    #[test]
    fn square_lattice_matches_adjacency_lists() {
        let spec = LatticeSpec::square(3, 0.1).unwrap();
        let v = build_potential(&spec);
        let adj = adjacency(3);
        for i in 0..9 {
            let mut expected = [0.0; 9];
            expected[i] = 1.0;
            for &j in &adj[i] {
                expected[j] -= 0.1;
            }
            for j in 0..9 {
                assert!((v.get(i, j) - expected[j]).abs() < 1e-15, "({i},{j})");
            }
            let off = (0..9).filter(|&j| j != i && v.get(i, j) != 0.0).count();
            assert_eq!(off, 4);
        }
    }

    #[test]
    fn row_sums_are_translation_invariant() {
        for spec in [LatticeSpec::chain(7, 0.3).unwrap(), LatticeSpec::square(5, 0.2).unwrap()] {
            let v = build_potential(&spec);
            for i in 0..spec.n_modes() {
                let sum: f64 = (0..spec.n_modes()).map(|j| v.get(i, j)).sum();
                assert!((sum - spec.spectral_gap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        let s = potential_spectrum(&LatticeSpec::chain(5, 0.0).unwrap()).unwrap();
        assert!(s.values().iter().all(|&x| x == 1.0));

        let s = potential_spectrum(&LatticeSpec::chain(4, 0.25).unwrap()).unwrap();
        let expected = [0.5, 1.0, 1.0, 1.5];
        for (a, b) in s.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }

        let s = potential_spectrum(&LatticeSpec::square(20, 0.24).unwrap()).unwrap();
        assert!((s.min() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn coupling_and_size_validation() {
        assert!(matches!(
            LatticeSpec::chain(10, 0.5),
            Err(Error::CouplingOutOfRange { .. })
        ));
        assert!(matches!(
            LatticeSpec::square(10, 0.25 + 1e-4),
            Err(Error::CouplingOutOfRange { .. })
        ));
        assert!(LatticeSpec::chain(10, -0.01).is_err());
        assert_eq!(LatticeSpec::chain(2, 0.1), Err(Error::LatticeTooSmall(2)));
        assert_eq!(Dimension::try_from(3), Err(Error::UnsupportedDimension(3)));
    }

    #[test]
    fn critical_floor_is_enforced() {
        let spec = LatticeSpec::chain(8, 0.5 - 1e-15).unwrap();
        assert!(matches!(potential_spectrum(&spec), Err(Error::NearCritical(_))));
        assert!(matches!(matrix_function(&spec, f64::sqrt), Err(Error::NearCritical(_))));
    }

    #[test]
    fn matrix_function_trivial_cases() {
        let spec = LatticeSpec::square(4, 0.2).unwrap();
        let v = matrix_function(&spec, |x| x).unwrap();
        assert!(v.max_abs_diff(&build_potential(&spec)) < 1e-14);
        let one = matrix_function(&spec, |_| 1.0).unwrap();
        assert!(one.max_abs_diff(&SymmetricMatrix::identity(16)) < 1e-14);
    }

    #[test]
    fn matrix_function_rejects_non_finite_values() {
        let spec = LatticeSpec::chain(4, 0.25).unwrap();
        let r = matrix_function(&spec, |x| if x > 1.2 { f64::NAN } else { x });
        assert!(matches!(r, Err(Error::NonFiniteFunction(_))));
    }
}
