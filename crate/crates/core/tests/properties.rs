use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use intensive_core::analysis::{LatticeContext, Observable};
use intensive_core::blocks::{effective_potential, schur_complement, BlockSelection};
use intensive_core::gaussian::{
    fidelity, thermal_covariance, thermal_covariance_dense, Beta, CovarianceMatrix,
    LatticeThermalState,
};
use intensive_core::lattice::{build_potential, matrix_function, potential_spectrum};
use intensive_core::{Dimension, LatticeSpec, SymmetricMatrix};
use proptest::prelude::*;

fn sym(m: Mat<f64>) -> SymmetricMatrix {
    let t = m.transpose().to_owned();
    SymmetricMatrix::new((&m + &t) * faer::Scale(0.5)).unwrap()
}

fn inverse(m: &SymmetricMatrix) -> SymmetricMatrix {
    m.map_spectrum(|x| 1.0 / x).unwrap()
}

/// Well-conditioned random matrix: identity plus a small perturbation.
fn near_identity(n: usize, entries: &[f64]) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + 0.4 * entries[i * n + j])
}

/// A generic physical state with q/p block structure:
/// Q = A·N·Aᵀ, P = A^{−T}·N·A^{−1}, N = diag(ν ≥ 1).
fn random_state(n: usize, entries: &[f64], nus: &[f64]) -> CovarianceMatrix {
    let a = near_identity(n, entries);
    let a_inv = a.partial_piv_lu().inverse();
    let diag = Mat::from_fn(n, n, |i, j| if i == j { nus[i] } else { 0.0 });
    let q = &a * &diag * a.transpose();
    let p = a_inv.transpose() * &diag * &a_inv;
    CovarianceMatrix::new(sym(q), sym(p)).unwrap()
}

fn direct_sum(a: &CovarianceMatrix, b: &CovarianceMatrix) -> CovarianceMatrix {
    let (n, m) = (a.n_modes(), b.n_modes());
    let join = |x: &SymmetricMatrix, y: &SymmetricMatrix| {
        sym(Mat::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
            (true, true) => x.get(i, j),
            (false, false) => y.get(i - n, j - n),
            _ => 0.0,
        }))
    };
    CovarianceMatrix::new(join(a.position(), b.position()), join(a.momentum(), b.momentum())).unwrap()
}

fn state_strategy(n: usize) -> impl Strategy<Value = CovarianceMatrix> {
    (
        prop::collection::vec(-0.5f64..0.5, n * n),
        prop::collection::vec(1.0f64..4.0, n),
    )
        .prop_map(move |(e, nus)| random_state(n, &e, &nus))
}

fn spec_strategy() -> impl Strategy<Value = LatticeSpec> {
    prop_oneof![
        (4usize..12, 0.0f64..0.49).prop_map(|(l, c)| LatticeSpec::chain(l, c).unwrap()),
        (3usize..6, 0.0f64..0.245).prop_map(|(l, c)| LatticeSpec::square(l, c).unwrap()),
    ]
}

fn beta_strategy() -> impl Strategy<Value = Beta> {
    prop_oneof![
        (0.05f64..20.0).prop_map(|b| Beta::new(b).unwrap()),
        Just(Beta::GROUND),
    ]
}

/// A random nonempty proper subset of 0..n.
fn subset(n: usize, mask: &[bool]) -> Vec<usize> {
    let mut s: Vec<usize> = (0..n).filter(|&k| mask[k % mask.len()]).collect();
    if s.is_empty() {
        s.push(0);
    }
    if s.len() == n {
        s.pop();
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dense_spectrum_matches_analytic(spec in spec_strategy()) {
        let dense = build_potential(&spec).eigenvalues().unwrap();
        let analytic = potential_spectrum(&spec).unwrap();
        for (a, b) in dense.iter().zip(analytic.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert!((analytic.min() - spec.spectral_gap()).abs() < 1e-12);
    }

    #[test]
    fn matrix_functions_multiply(spec in spec_strategy()) {
        let f = matrix_function(&spec, f64::sqrt).unwrap();
        let g = matrix_function(&spec, |x| (-x).exp()).unwrap();
        let fg = matrix_function(&spec, |x| x.sqrt() * (-x).exp()).unwrap();
        let prod = sym(f.as_mat() * g.as_mat());
        prop_assert!(prod.max_abs_diff(&fg) < 1e-9);
        let dense = build_potential(&spec).map_spectrum(f64::sqrt).unwrap();
        prop_assert!(dense.max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn thermal_states_obey_uncertainty(
        spec in spec_strategy(),
        beta in beta_strategy(),
        mask in prop::collection::vec(any::<bool>(), 1..16),
    ) {
        let cm = thermal_covariance(&spec, beta).unwrap();
        for nu in cm.symplectic_spectrum().unwrap() {
            prop_assert!(nu >= 1.0 - 1e-9);
        }
        let modes = subset(spec.n_modes(), &mask);
        for nu in cm.reduce(&modes).unwrap().symplectic_spectrum().unwrap() {
            prop_assert!(nu >= 1.0 - 1e-9);
        }
        let v_eff = effective_potential(&build_potential(&spec), &BlockSelection::new(&spec, 2).unwrap()).unwrap();
        for nu in thermal_covariance_dense(&v_eff, beta).unwrap().symplectic_spectrum().unwrap() {
            prop_assert!(nu >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn thermal_symplectic_spectrum_is_analytic(spec in spec_strategy(), beta in beta_strategy()) {
        let numeric = thermal_covariance(&spec, beta).unwrap().symplectic_spectrum().unwrap();
        let state = LatticeThermalState::new(&spec, beta).unwrap();
        for (a, b) in numeric.iter().zip(state.symplectic_spectrum()) {
            prop_assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in state_strategy(3), b in state_strategy(3)) {
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fidelity_is_multiplicative(
        a in state_strategy(2), b in state_strategy(2),
        c in state_strategy(3), d in state_strategy(3),
    ) {
        let joint = fidelity(&direct_sum(&a, &c), &direct_sum(&b, &d)).unwrap();
        let product = fidelity(&a, &b).unwrap() * fidelity(&c, &d).unwrap();
        prop_assert!((joint - product).abs() < 1e-9);
    }

    #[test]
    fn fidelity_is_symplectic_invariant(
        a in state_strategy(3), b in state_strategy(3),
        entries in prop::collection::vec(-0.5f64..0.5, 9),
    ) {
        // S = M ⊕ M^{−T}: Q → M·Q·Mᵀ, P → M^{−T}·P·M^{−1}
        let m = near_identity(3, &entries);
        let m_inv = m.partial_piv_lu().inverse();
        let act = |s: &CovarianceMatrix| {
            CovarianceMatrix::new(
                sym(&m * s.position().as_mat() * m.transpose()),
                sym(m_inv.transpose() * s.momentum().as_mat() * &m_inv),
            )
            .unwrap()
        };
        let before = fidelity(&a, &b).unwrap();
        let after = fidelity(&act(&a), &act(&b)).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn schur_complement_identity(spec in spec_strategy(), mask in prop::collection::vec(any::<bool>(), 1..16)) {
        let v = build_potential(&spec);
        let block = subset(spec.n_modes(), &mask);
        let rest: Vec<usize> = (0..spec.n_modes()).filter(|k| !block.contains(k)).collect();
        let v_eff = schur_complement(&v, &block, &rest).unwrap();
        let expected = inverse(&inverse(&v).principal(&block));
        prop_assert!(inverse(&v_eff).max_abs_diff(&inverse(&v).principal(&block)) < 1e-9);
        prop_assert!(v_eff.max_abs_diff(&expected) < 1e-9);
    }

    #[test]
    fn schur_complement_quotient_property(spec in spec_strategy(), size in 1usize..3) {
        let v = build_potential(&spec);
        let sel = BlockSelection::new(&spec, size).unwrap();
        let rest = sel.rest();
        let (first, second) = rest.split_at(rest.len() / 2);
        // eliminate `first`, then `second` from what is left
        let kept: Vec<usize> = sel.modes().iter().chain(second).copied().collect();
        let stage = schur_complement(&v, &kept, first).unwrap();
        let local_block: Vec<usize> = (0..sel.n_modes()).collect();
        let local_rest: Vec<usize> = (sel.n_modes()..kept.len()).collect();
        let two_stage = if local_rest.is_empty() {
            stage
        } else {
            schur_complement(&stage, &local_block, &local_rest).unwrap()
        };
        let direct = effective_potential(&v, &sel).unwrap();
        prop_assert!(two_stage.max_abs_diff(&direct) < 1e-9);
    }

    #[test]
    fn block_observables_are_translation_invariant(
        spec in spec_strategy(),
        beta in (0.2f64..15.0).prop_map(|b| Beta::new(b).unwrap()),
        size in 1usize..3,
        shift in (0usize..12, 0usize..12),
    ) {
        let ctx = LatticeContext::new(&spec, beta).unwrap();
        let obs = [Observable::IntensiveFidelity, Observable::MutualInformation, Observable::Negativity];
        let at_origin = ctx.evaluate(&BlockSelection::new(&spec, size).unwrap(), &obs).unwrap();
        let moved = ctx.evaluate(&BlockSelection::translated(&spec, size, shift).unwrap(), &obs).unwrap();
        for (a, b) in at_origin.iter().zip(&moved) {
            prop_assert!((a - b).abs() < 1e-9, "{at_origin:?} vs {moved:?}");
        }
    }

    #[test]
    fn effective_potential_is_temperature_free(spec in spec_strategy()) {
        // The effective potential takes no temperature; two evaluations agree bit for bit
        // and both references built from it at different β use the same matrix.
        let v = build_potential(&spec);
        let sel = BlockSelection::new(&spec, 2).unwrap();
        let a = effective_potential(&v, &sel).unwrap();
        let b = effective_potential(&v, &sel).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn positive_definiteness_threshold() {
    for dim in [Dimension::One, Dimension::Two] {
        let critical = dim.critical_coupling();
        let spec = LatticeSpec::new(dim, 8, critical - 1e-4).unwrap();
        assert!(build_potential(&spec).eigenvalues().unwrap()[0] > 0.0);
        assert!(LatticeSpec::new(dim, 8, critical + 1e-4).is_err());
    }
}

#[test]
fn fidelity_decreases_with_temperature_gap() {
    let spec = LatticeSpec::square(6, 0.2).unwrap();
    let base = thermal_covariance(&spec, Beta::new(2.0).unwrap()).unwrap();
    let values: Vec<f64> = [0.0, 0.05, 0.1, 0.2, 0.4]
        .iter()
        .map(|d| fidelity(&base, &thermal_covariance(&spec, Beta::new(2.0 + d).unwrap()).unwrap()).unwrap())
        .collect();
    assert!((values[0] - 1.0).abs() < 1e-9);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn high_temperature_blocks_are_intensive() {
    let beta = Beta::new(1e-3).unwrap();
    for spec in [LatticeSpec::chain(40, 0.4999).unwrap(), LatticeSpec::square(12, 0.24).unwrap()] {
        let ctx = LatticeContext::new(&spec, beta).unwrap();
        let f = ctx.evaluate(&BlockSelection::new(&spec, 6).unwrap(), &[Observable::IntensiveFidelity]).unwrap();
        assert!(f[0] >= 0.999, "{f:?}");
    }
}
