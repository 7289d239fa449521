//! Block geometry, core/shell layering, the effective block potential and
//! the reference thermal states a block is compared against.
//!
//! Block modes are listed in local row-major order: local position
//! `x + l_B·y` holds lattice site `(x0 + x, y0 + y)`, wrapped periodically.
//! Core and shell sets are local positions, so the same split applies
//! verbatim to the reduced block state and to any reference state.

use faer::linalg::solvers::Solve;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{thermal_covariance_dense, Beta, CovarianceMatrix, Partition};
use crate::lattice::{Dimension, LatticeSpec};
use crate::linalg::SymmetricMatrix;

/// A contiguous segment (1D) or square (2D) of the lattice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSelection {
    spec: LatticeSpec,
    size: usize,
    origin: (usize, usize),
    modes: Vec<usize>,
}

impl BlockSelection {
    /// Block of linear size `size` (n_B in 1D, l_B in 2D) at the origin.
    pub fn new(spec: &LatticeSpec, size: usize) -> Result<Self> {
        Self::translated(spec, size, (0, 0))
    }

    /// Block whose first site is `origin`; `origin.1` is ignored in 1D.
    pub fn translated(spec: &LatticeSpec, size: usize, origin: (usize, usize)) -> Result<Self> {
        let l = spec.linear_size();
        if size == 0 || size >= l {
            return Err(Error::BlockTooLarge { size, linear_size: l });
        }
        let origin = match spec.dim() {
            Dimension::One => (origin.0 % l, 0),
            Dimension::Two => (origin.0 % l, origin.1 % l),
        };
        let modes = match spec.dim() {
            Dimension::One => (0..size).map(|x| (origin.0 + x) % l).collect(),
            Dimension::Two => (0..size)
                .flat_map(|y| (0..size).map(move |x| (x, y)))
                .map(|(x, y)| spec.site((origin.0 + x) % l, (origin.1 + y) % l))
                .collect(),
        };
        Ok(Self { spec: *spec, size, origin, modes })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// Linear size: n_B in 1D, l_B in 2D.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Lattice sites of the block in local order.
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    /// Sorted complement of the block.
    pub fn rest(&self) -> Vec<usize> {
        let mut inside = vec![false; self.spec.n_modes()];
        for &k in &self.modes {
            inside[k] = true;
        }
        (0..inside.len()).filter(|&k| !inside[k]).collect()
    }

    pub fn partition(&self) -> Partition {
        Partition::from_parts(self.spec.n_modes(), self.modes.clone(), self.rest())
            .expect("a block smaller than the lattice is a valid partition")
    }

    /// Block grown by `pad` sites on every side, around the same sites.
    pub fn padded(&self, pad: usize) -> Result<Self> {
        let l = self.spec.linear_size();
        let padded = self.size + 2 * pad;
        if padded >= l {
            return Err(Error::PaddingTooLarge { pad, padded, linear_size: l });
        }
        let shift = |o: usize| (o + l - pad % l) % l;
        Self::translated(&self.spec, padded, (shift(self.origin.0), shift(self.origin.1)))
    }

    /// Local positions of a block of size `inner` centred `offset` sites in
    /// from each edge.
    fn inner_positions(&self, offset: usize, inner: usize) -> Vec<usize> {
        match self.spec.dim() {
            Dimension::One => (offset..offset + inner).collect(),
            Dimension::Two => (0..inner)
                .flat_map(|y| (0..inner).map(move |x| (x, y)))
                .map(|(x, y)| (x + offset) + self.size * (y + offset))
                .collect(),
        }
    }
}

/// Peeling of a block into interior core and boundary shell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoreShellSplit {
    layers: usize,
    core: Vec<usize>,
    shell: Vec<usize>,
}

impl CoreShellSplit {
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Local positions at boundary distance ≥ `layers`.
    pub fn core(&self) -> &[usize] {
        &self.core
    }

    /// Local positions within `layers` of the boundary.
    pub fn shell(&self) -> &[usize] {
        &self.shell
    }
}

/// Splits off `layers` boundary layers. Distance to the boundary is the
/// distance to the nearer end in 1D and the Chebyshev distance to the
/// nearest edge in 2D.
pub fn core_shell_split(sel: &BlockSelection, layers: usize) -> Result<CoreShellSplit> {
    let size = sel.size();
    if layers == 0 || 2 * layers >= size {
        return Err(Error::EmptyCore { layers, size });
    }
    let depth = |x: usize| x.min(size - 1 - x);
    let (mut core, mut shell) = (Vec::new(), Vec::new());
    for local in 0..sel.n_modes() {
        let d = match sel.spec().dim() {
            Dimension::One => depth(local),
            Dimension::Two => depth(local % size).min(depth(local / size)),
        };
        if d >= layers {
            core.push(local);
        } else {
            shell.push(local);
        }
    }
    Ok(CoreShellSplit { layers, core, shell })
}

/// Schur complement V_B − V_BR·V_R^{−1}·V_RB for arbitrary index sets.
pub fn schur_complement(v: &SymmetricMatrix, block: &[usize], rest: &[usize]) -> Result<SymmetricMatrix> {
    if rest.is_empty() || block.is_empty() {
        return Err(Error::EmptySelection);
    }
    let v_r = v.principal(rest);
    let llt = v_r.cholesky("rest potential")?;
    let v_rb = v.block(rest, block);
    let x = llt.solve(&v_rb);
    let v_b = v.principal(block);
    let correction = v_rb.transpose() * &x;
    Ok(SymmetricMatrix::symmetrized(v_b.as_mat() - correction))
}

/// Effective block potential V'. Never depends on the temperature.
pub fn effective_potential(v: &SymmetricMatrix, sel: &BlockSelection) -> Result<SymmetricMatrix> {
    if v.order() != sel.spec().n_modes() {
        return Err(Error::DimensionMismatch(v.order(), sel.spec().n_modes()));
    }
    schur_complement(v, sel.modes(), &sel.rest())
}

/// Thermal state of the standalone block with potential V'.
pub fn reference_thermal(v_eff: &SymmetricMatrix, beta: Beta) -> Result<CovarianceMatrix> {
    thermal_covariance_dense(v_eff, beta)
}

/// Hamiltonian generating the padded state before the padding is traced out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaddingHamiltonian {
    /// Effective potential of the padded block.
    #[default]
    Effective,
    /// Bare principal submatrix of V on the padded block.
    Bare,
}

/// Thermal state of the block grown by `pad` layers, with the padding traced
/// out again.
pub fn padded_reference(
    v: &SymmetricMatrix,
    sel: &BlockSelection,
    pad: usize,
    beta: Beta,
    hamiltonian: PaddingHamiltonian,
) -> Result<CovarianceMatrix> {
    let grown = sel.padded(pad)?;
    let v_grown = match hamiltonian {
        PaddingHamiltonian::Effective => effective_potential(v, &grown)?,
        PaddingHamiltonian::Bare => v.principal(grown.modes()),
    };
    let state = reference_thermal(&v_grown, beta)?;
    state.reduce(&grown.inner_positions(pad, sel.size()))
}
