use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinmetro::analysis::*;
use spinmetro::engine::*;
use spinmetro::ensemble::*;
use spinmetro::metrology::{cfi_phi, MeasurementBasis};
use spinmetro::C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_pure(n: usize, rng: &mut ChaCha8Rng) -> QuantumState {
    let v = DVector::from_fn(1 << n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    QuantumState::pure_normalized(n, v).unwrap()
}

/// Bell pairs on spins (0, 2) and (1, 3).
fn crossed_bell_pairs() -> QuantumState {
    let mut v = DVector::from_element(16, c(0.0));
    for idx in [0b0000, 0b0101, 0b1010, 0b1111] {
        v[idx] = c(0.5);
    }
    QuantumState::pure(4, v).unwrap()
}

#[test]
fn reference_constructions() {
    let css = reference_state(ReferenceKind::Css, 1).unwrap();
    let a = css.amplitudes().unwrap();
    assert_relative_eq!(a[0].re, 0.5f64.sqrt());
    assert_relative_eq!(a[1].re, 0.5f64.sqrt());
    let bell = reference_state(ReferenceKind::GhzZ, 2).unwrap();
    assert_relative_eq!(von_neumann_entropy(&bell, &[0]).unwrap(), 1.0, epsilon = 1e-12);
    let d = reference_state(ReferenceKind::Dicke, 4).unwrap();
    assert_eq!(d.z_probabilities().iter().filter(|p| **p > 0.0).count(), 6);
    assert!(reference_state(ReferenceKind::Css, 0).is_err());
    assert!(dicke_state(3, 4).is_err());
    assert_eq!("ghz-y".parse::<ReferenceKind>().unwrap(), ReferenceKind::GhzY);
    assert!("ghz".parse::<ReferenceKind>().is_err());
}

#[test]
fn ghz_y_attains_heisenberg_limit_under_parity() {
    let g = reference_state(ReferenceKind::GhzY, 3).unwrap();
    assert_relative_eq!(cfi_phi(&g, MeasurementBasis::Parity, 1.0).unwrap(), 9.0, epsilon = 1e-9);
}

#[test]
fn entropy_examples() {
    let css = reference_state(ReferenceKind::Css, 3).unwrap();
    for q in 0..3 {
        assert!(von_neumann_entropy(&css, &[q]).unwrap().abs() < 1e-12);
    }
    for kind in [ReferenceKind::GhzX, ReferenceKind::GhzY, ReferenceKind::GhzZ] {
        let g = reference_state(kind, 4).unwrap();
        for e in single_spin_entropies(&g).unwrap() {
            assert_relative_eq!(e, 1.0, epsilon = 1e-12);
        }
    }
    let pairs = crossed_bell_pairs();
    assert!(von_neumann_entropy(&pairs, &[0, 2]).unwrap().abs() < 1e-12);
    assert_relative_eq!(von_neumann_entropy(&pairs, &[0, 1]).unwrap(), 2.0, epsilon = 1e-12);
    assert!(von_neumann_entropy(&pairs, &[]).is_err());
    assert!(von_neumann_entropy(&pairs, &[0, 1, 2, 3]).is_err());
    assert!(von_neumann_entropy(&pairs, &[4]).is_err());
}

#[test]
fn reduced_matrix_of_product_state() {
    // |0> (x) |+x> (x) |1>: the reduced state on spins {0, 2} is |01><01|
    let up = DVector::from_vec(vec![c(1.0), c(0.0)]);
    let plus = DVector::from_vec(vec![c(0.5f64.sqrt()), c(0.5f64.sqrt())]);
    let dn = DVector::from_vec(vec![c(0.0), c(1.0)]);
    let v = up.kronecker(&plus).kronecker(&dn);
    let s = QuantumState::pure(3, v).unwrap();
    let r = reduced_density_matrix(&s, &[2, 0]).unwrap();
    let mut expected = DMatrix::from_element(4, 4, c(0.0));
    expected[(1, 1)] = c(1.0);
    assert!((r - expected).norm() < 1e-14);
}

#[test]
fn mixed_state_entropy() {
    let rho = DMatrix::from_diagonal(&DVector::from_element(8, c(0.125)));
    let s = QuantumState::density(3, rho).unwrap();
    assert_relative_eq!(von_neumann_entropy(&s, &[0, 2]).unwrap(), 2.0, epsilon = 1e-12);
    assert_relative_eq!(entropy_of(&s.density_matrix()), 3.0, epsilon = 1e-12);
}

#[test]
fn cluster_examples() {
    let css = reference_state(ReferenceKind::Css, 5).unwrap();
    let p = cluster_partition(&css, DEFAULT_CLUSTER_THRESHOLD).unwrap();
    assert_eq!(p.blocks, vec![vec![0], vec![1], vec![2], vec![3], vec![4]]);

    let p = cluster_partition(&crossed_bell_pairs(), DEFAULT_CLUSTER_THRESHOLD).unwrap();
    assert_eq!(p.blocks, vec![vec![0, 2], vec![1, 3]]);
    assert!(p.entropies.iter().all(|e| e.abs() < 1e-12));

    let g = reference_state(ReferenceKind::GhzZ, 4).unwrap();
    let p = cluster_partition(&g, DEFAULT_CLUSTER_THRESHOLD).unwrap();
    assert_eq!(p.blocks, vec![vec![0, 1, 2, 3]]);
    assert_eq!(p.max_block_size(), 4);
}

#[test]
fn cluster_bell_pair_next_to_product_spin() {
    // Bell pair on (1, 2) with spin 0 and 3 in product states
    let mut v = DVector::from_element(16, c(0.0));
    v[0b0000] = c(0.5f64.sqrt());
    v[0b0110] = c(0.5f64.sqrt());
    let s = QuantumState::pure(4, v).unwrap();
    let p = cluster_partition(&s, 0.4).unwrap();
    assert_eq!(p.blocks, vec![vec![0], vec![1, 2], vec![3]]);
    assert_eq!(p.block_sizes(), vec![1, 2, 1]);
    // with a threshold of 1 every single spin is admissible
    assert_eq!(cluster_partition(&s, 1.0).unwrap().max_block_size(), 1);
}

#[test]
fn cluster_search_rejects_large_systems() {
    let s = QuantumState::all_up(MAX_CLUSTER_SPINS + 1);
    assert!(cluster_partition(&s, 0.4).is_err());
}

#[test]
fn subset_entropy_table_is_symmetric_for_pure_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_pure(4, &mut rng);
    let e = subset_entropies(&s).unwrap();
    for m in 0..16usize {
        assert!((e[m] - e[15 ^ m]).abs() < 1e-9);
    }
}

#[test]
fn three_j_known_values() {
    // (1/2 1/2 1; 1/2 -1/2 0) = 1/sqrt6
    assert_relative_eq!(wigner_3j(1, 1, 2, 1, -1, 0), 1.0 / 6f64.sqrt(), epsilon = 1e-14);
    // (1 1 0; 0 0 0) = -1/sqrt3
    assert_relative_eq!(wigner_3j(2, 2, 0, 0, 0, 0), -1.0 / 3f64.sqrt(), epsilon = 1e-14);
    // (1 1 1; 1 -1 0) = 1/sqrt6
    assert_relative_eq!(wigner_3j(2, 2, 2, 2, -2, 0), 1.0 / 6f64.sqrt(), epsilon = 1e-14);
    assert_eq!(wigner_3j(2, 2, 2, 0, 0, 0), 0.0);
    assert_eq!(wigner_3j(2, 2, 2, 2, 2, 0), 0.0);
}

#[test]
fn three_j_orthogonality() {
    // sum_{m1 m2} (j1 j2 j3; m1 m2 m3)^2 = 1/(2 j3 + 1)
    let (tj1, tj2) = (3, 4);
    for tj3 in [1, 3, 5, 7] {
        let mut total = 0.0;
        for tm1 in (-tj1..=tj1).step_by(2) {
            for tm2 in (-tj2..=tj2).step_by(2) {
                let tm3 = -(tm1 + tm2);
                if tm3 == 1 {
                    total += wigner_3j(tj1, tj2, tj3, tm1, tm2, tm3).powi(2);
                }
            }
        }
        assert_relative_eq!(total, 1.0 / (tj3 + 1) as f64, epsilon = 1e-13);
    }
}

#[test]
fn spherical_harmonic_values() {
    let (t, p) = (0.7, 1.9);
    assert_relative_eq!(spherical_harmonic(0, 0, t, p).re, 0.5 / PI.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(spherical_harmonic(1, 0, t, p).re, (3.0 / (4.0 * PI)).sqrt() * t.cos(), epsilon = 1e-14);
    let y11 = spherical_harmonic(1, 1, t, p);
    let expected = C64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
    assert!((y11 - expected).norm() < 1e-14);
    let y1m1 = spherical_harmonic(1, -1, t, p);
    assert!((y1m1 + y11.conj()).norm() < 1e-14);
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let (x, w) = gauss_legendre(6);
    assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    // exact up to degree 11
    let i10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
    assert_relative_eq!(i10, 2.0 / 11.0, epsilon = 1e-14);
    assert!(x.windows(2).all(|p| p[0] > p[1]));
}

#[test]
fn symmetric_projection_keeps_symmetric_states() {
    let g = reference_state(ReferenceKind::GhzY, 3).unwrap();
    assert_relative_eq!(symmetric_projection(&g).trace().re, 1.0, epsilon = 1e-12);
    // a singlet has no weight on the symmetric subspace
    let mut v = DVector::from_element(4, c(0.0));
    v[1] = c(0.5f64.sqrt());
    v[2] = c(-(0.5f64.sqrt()));
    let singlet = QuantumState::pure(2, v).unwrap();
    assert!(symmetric_projection(&singlet).norm() < 1e-14);
}

#[test]
fn css_wigner_peaks_along_plus_x() {
    for n in [1, 2, 4, 6] {
        let css = reference_state(ReferenceKind::Css, n).unwrap();
        let w = wigner_distribution(&css, 40, 80).unwrap();
        let (t, p, v) = w.argmax();
        assert!(v > 0.0);
        assert!((t - FRAC_PI_2).abs() < PI / 40.0 + 1e-12, "n = {n}, theta = {t}");
        assert!(p.min(2.0 * PI - p) < 1e-12, "n = {n}, phi = {p}");
        assert_relative_eq!(w.integral(), 1.0, epsilon = 1e-6);
        assert_relative_eq!(w.symmetric_trace, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn spin_up_wigner_peaks_at_north_pole() {
    let s = QuantumState::all_up(3);
    let w = wigner_distribution(&s, 30, 16).unwrap();
    let (t, _, _) = w.argmax();
    assert!(t < PI / 10.0);
}

#[test]
fn single_spin_wigner_closed_form() {
    // j = 1/2: W = (1 + sqrt3 <sigma> . n) / (4 pi)
    let css = reference_state(ReferenceKind::Css, 1).unwrap();
    let w = wigner_distribution(&css, 12, 12).unwrap();
    for (i, t) in w.theta.iter().enumerate() {
        for (j, p) in w.phi.iter().enumerate() {
            let expected = (1.0 + 3f64.sqrt() * t.sin() * p.cos()) / (4.0 * PI);
            assert_relative_eq!(w.value(i, j), expected, epsilon = 1e-12);
        }
    }
}

#[test]
fn ghz_wigner_has_antipodal_lobes_and_negative_fringes() {
    let g = reference_state(ReferenceKind::GhzX, 4).unwrap();
    let n_phi = 64;
    let w = wigner_distribution(&g, 41, n_phi).unwrap();
    let eq = w.theta.iter().enumerate().min_by(|a, b| (a.1 - FRAC_PI_2).abs().total_cmp(&(b.1 - FRAC_PI_2).abs())).unwrap().0;
    let plus_x = w.value(eq, 0);
    let minus_x = w.value(eq, n_phi / 2);
    assert!(plus_x > 0.0);
    assert_relative_eq!(plus_x, minus_x, max_relative = 1e-9);
    assert!(w.values.iter().any(|v| *v < -0.05 * plus_x));
    assert_relative_eq!(w.integral(), 1.0, epsilon = 1e-6);
}

#[test]
fn wigner_of_partially_symmetric_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = random_pure(3, &mut rng);
    let w = wigner_distribution(&s, 30, 30).unwrap();
    assert!(w.symmetric_trace < 1.0);
    assert_relative_eq!(w.integral(), w.symmetric_trace, epsilon = 1e-6);
    assert!(wigner_distribution(&s, 1, 30).is_err());
}

#[test]
fn wigner_rotation_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_pure(3, &mut rng);
    let n_phi = 24;
    let shift = 5;
    let alpha = 2.0 * PI * shift as f64 / n_phi as f64;
    let a = wigner_distribution(&s, 20, n_phi).unwrap();
    let b = wigner_distribution(&global_rotation(&s, Axis::Z, alpha), 20, n_phi).unwrap();
    for i in 0..20 {
        for j in 0..n_phi {
            assert_relative_eq!(b.value(i, (j + shift) % n_phi), a.value(i, j), epsilon = 1e-12);
        }
    }
}

#[test]
fn squeezing_examples() {
    let css = reference_state(ReferenceKind::Css, 4).unwrap();
    assert_relative_eq!(squeezing_parameter(&css).unwrap(), 1.0, epsilon = 1e-12);
    for kind in [ReferenceKind::GhzX, ReferenceKind::GhzZ] {
        assert!(squeezing_parameter(&reference_state(kind, 4).unwrap()).is_err());
    }
}

#[test]
fn one_axis_twisting_squeezes() {
    // exp(-i mu J_z^2 / 2) on |+x>^4, then rotate about x so the narrow
    // quadrature lies along y.
    let n = 4;
    let mu = 0.3;
    let jz = collective_operator(Axis::Z, n);
    let twist = DMatrix::from_fn(1 << n, 1 << n, |r, col| {
        if r == col {
            C64::from_polar(1.0, -mu * jz[(r, r)].re.powi(2) / 2.0)
        } else {
            c(0.0)
        }
    });
    let css = reference_state(ReferenceKind::Css, n).unwrap();
    let twisted = QuantumState::pure(n, &twist * css.amplitudes().unwrap()).unwrap();
    // covariance in the y-z plane from dense operators
    let psi = twisted.amplitudes().unwrap();
    let jy = collective_operator(Axis::Y, n);
    let ev = |op: &DMatrix<C64>| (psi.adjoint() * op * psi)[(0, 0)].re;
    let vyy = ev(&(&jy * &jy)) - ev(&jy).powi(2);
    let vzz = ev(&(&jz * &jz)) - ev(&jz).powi(2);
    let vyz = 0.5 * ev(&(&jy * &jz + &jz * &jy)) - ev(&jy) * ev(&jz);
    let min_var = 0.5 * (vyy + vzz) - (0.25 * (vyy - vzz).powi(2) + vyz * vyz).sqrt();
    let jx = ev(&collective_operator(Axis::X, n));
    let expected = n as f64 * min_var / (jx * jx);
    assert!(expected < 1.0);
    let best = (0..2000)
        .map(|k| {
            let a = PI * k as f64 / 2000.0;
            squeezing_parameter(&global_rotation(&twisted, Axis::X, a)).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert_relative_eq!(best, expected, max_relative = 1e-4);
}

#[test]
fn squeezing_bounds_fisher_information() {
    // for the y-squeezed state the z readout reaches N / xi^2 up to the Gaussian approximation
    let n = 6;
    let css = reference_state(ReferenceKind::Css, n).unwrap();
    let xi2 = squeezing_parameter(&css).unwrap();
    let f = cfi_phi(&css, MeasurementBasis::FullZ, 1.0).unwrap();
    assert_relative_eq!(f, n as f64 / xi2, epsilon = 1e-9);
}

#[test]
fn fidelity_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = random_pure(3, &mut rng);
    assert_relative_eq!(state_fidelity(&s, &s).unwrap(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(state_fidelity(&s.to_density(), &s.to_density()).unwrap(), 1.0, epsilon = 1e-7);
    let up = QuantumState::all_up(1);
    let dn = QuantumState::product(1, c(0.0), c(1.0));
    assert_eq!(state_fidelity(&up, &dn).unwrap(), 0.0);
    let css = reference_state(ReferenceKind::Css, 2).unwrap();
    let ghz = reference_state(ReferenceKind::GhzX, 2).unwrap();
    assert_relative_eq!(state_fidelity(&css, &ghz).unwrap(), 0.5, epsilon = 1e-12);
    assert!(state_fidelity(&css, &QuantumState::all_up(3)).is_err());
}

#[test]
fn uhlmann_fidelity_of_commuting_states() {
    // diagonal states: F = (sum sqrt(p q))^2
    let p = [0.5, 0.3, 0.2, 0.0];
    let q = [0.1, 0.2, 0.3, 0.4];
    let a = QuantumState::density(2, DMatrix::from_diagonal(&DVector::from_iterator(4, p.iter().map(|x| c(*x))))).unwrap();
    let b = QuantumState::density(2, DMatrix::from_diagonal(&DVector::from_iterator(4, q.iter().map(|x| c(*x))))).unwrap();
    let expected: f64 = p.iter().zip(&q).map(|(x, y)| (x * y).sqrt()).sum::<f64>().powi(2);
    assert_relative_eq!(state_fidelity(&a, &b).unwrap(), expected, epsilon = 1e-8);
    assert_relative_eq!(state_fidelity(&b, &a).unwrap(), expected, epsilon = 1e-8);
}

#[test]
fn preparation_time_examples() {
    let f = 43.5e3;
    assert_eq!(preparation_time(&CircuitParams::zeros(4, 1.0), f), 0.0);
    let tau = 0.1 / f;
    let mut theta = Vec::new();
    for _ in 0..4 {
        theta.extend([tau, 1.0, tau]);
    }
    let p = CircuitParams::new(4, theta, 1e-3).unwrap();
    assert_relative_eq!(preparation_time(&p, f), 0.8, epsilon = 1e-12);
    let t = preparation_seconds(0.8, f);
    assert_relative_eq!(t, 18.39e-6, max_relative = 5e-4);
}

fn cutoff_fixture() -> (SpinConfiguration, CircuitParams) {
    let config = generate_configuration(ConfigKind::Random3d, 4, 10.0, 21, InteractionModel::NvEffective).unwrap();
    let theta = vec![4e-6, 1.1, 3e-6, 2e-6, 0.4, 5e-6];
    (config, CircuitParams::new(2, theta, 1e-5).unwrap())
}

#[test]
fn cutoff_fidelity_limits() {
    let (config, params) = cutoff_fixture();
    assert_relative_eq!(cutoff_fidelity(&config, &params, 0.0).unwrap(), 1.0, epsilon = 1e-12);
    let vmax = coupling_matrix(&config).unwrap().max_abs_hz();
    let f_all = cutoff_fidelity(&config, &params, 2.0 * vmax).unwrap();
    // with every coupling removed the output is the rotated coherent state
    let h0 = build_hamiltonian(&CouplingMatrix::uniform(4, 0.0), config.model);
    let css = initial_state(4, 1.0).unwrap();
    let full = apply_entangler(&params, &build_hamiltonian(&coupling_matrix(&config).unwrap(), config.model), &css).unwrap();
    let free = apply_entangler(&params, &h0, &css).unwrap();
    assert_relative_eq!(f_all, state_fidelity(&full, &free).unwrap(), epsilon = 1e-12);
    assert!(f_all < 1.0);
}

#[test]
fn cutoff_fidelity_decreases_along_a_sweep() {
    let (config, params) = cutoff_fixture();
    let vmax = coupling_matrix(&config).unwrap().max_abs_hz();
    let mut last = 1.0 + 1e-12;
    for k in 0..=10 {
        let f = cutoff_fidelity(&config, &params, vmax * 1.01 * k as f64 / 10.0).unwrap();
        assert!(f <= last + 1e-12, "k = {k}: {f} > {last}");
        last = f;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_complement_symmetry(seed in 0u64..10_000, n in 2usize..6, m in 1usize..31) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_pure(n, &mut rng);
        let full = (1usize << n) - 1;
        let m = m % full;
        prop_assume!(m != 0);
        let a: Vec<usize> = (0..n).filter(|q| m >> q & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|q| m >> q & 1 == 0).collect();
        let ea = entropy_of(&reduced_density_matrix(&s, &a).unwrap());
        let eb = entropy_of(&reduced_density_matrix(&s, &b).unwrap());
        prop_assert!((ea - eb).abs() < 1e-9);
        prop_assert!(ea <= a.len().min(b.len()) as f64 + 1e-9);
    }

    #[test]
    fn cluster_partition_is_valid_and_reproducible(seed in 0u64..10_000, n in 1usize..6, thr in 0.0f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // mostly product state with one random entangled block
        let k = rng.gen_range(1..=n);
        let block = random_pure(k, &mut rng);
        let rest = QuantumState::all_up(n - k + 1);
        let v = block.amplitudes().unwrap().kronecker(&DVector::from_iterator(1 << (n - k), rest.amplitudes().unwrap().iter().take(1 << (n - k)).cloned()));
        let s = QuantumState::pure(n, v).unwrap();
        let p = cluster_partition(&s, thr).unwrap();
        let mut covered: Vec<usize> = p.blocks.iter().flatten().cloned().collect();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..n).collect::<Vec<_>>());
        for (blk, e) in p.blocks.iter().zip(&p.entropies) {
            prop_assert!(blk.len() == n || *e <= thr);
        }
        prop_assert_eq!(&cluster_partition(&s, thr).unwrap(), &p);
    }

    #[test]
    fn fidelity_symmetric_and_bounded(seed in 0u64..10_000, n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pure(n, &mut rng);
        let b = random_pure(n, &mut rng);
        let f = state_fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - state_fidelity(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((f - state_fidelity(&a.to_density(), &b).unwrap()).abs() < 1e-9);
        prop_assert!((f - state_fidelity(&a.to_density(), &b.to_density()).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn wigner_normalization(seed in 0u64..10_000, n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_pure(n, &mut rng);
        let w = wigner_distribution(&s, 24, 2 * n + 4).unwrap();
        prop_assert!((w.integral() - w.symmetric_trace).abs() < 1e-6);
    }
}
