//! End-to-end acceptance checks. Each test covers one release criterion and
//! prints a single PASS line once every assertion in it has held.

use dicke6::analysis::{
    estimate_fidelity, evaluate_witness_from_data, fidelity_settings, propagate_error,
    witness_settings, ErrorMethod, WitnessKind,
};
use dicke6::collective::{bell_d63, bell_ghz_max, bell_lhv_max, j_moment, transverse_j2};
use dicke6::measure::{exact_run, simulate_run, DetectorEfficiencies};
use dicke6::photonics::{ideal_sixfold_probability, postselect_sixfold, SplitterTree, TreeNode};
use dicke6::qcore::{
    fidelity_with_pure, partial_trace_pure, project_qubit, rotate_all, Axis, MixedState,
    Observable, PureState,
};
use dicke6::states::{dicke, dicke_blend_five, ghz, superpose, Sign};
use dicke6::witness::{
    decompose_settings, fidelity_bound_from_moments, j2_witness, moments_witness,
    optimize_bisep_bound, subspace_projector, J2_ALPHA_6,
};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type C64 = Complex<f64>;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// √(5/8)·GHZ⁻ + √(3/16)·(D(6,4) − D(6,2)), the pattern the all-x and all-y
/// rotations of D(6,3) both produce (the y one with a global phase i).
fn rotated_basis_pattern() -> PureState {
    superpose(&[
        (re((5.0f64 / 8.0).sqrt()), &ghz(6, Sign::Minus).unwrap()),
        (re((3.0f64 / 16.0).sqrt()), &dicke(6, 4).unwrap()),
        (re(-(3.0f64 / 16.0).sqrt()), &dicke(6, 2).unwrap()),
    ])
    .unwrap()
}

#[test]
fn criterion_01_amplitudes_and_rotated_basis_identities() {
    let d63 = dicke(6, 3).unwrap();
    let amp = (1.0f64 / 20.0).sqrt();
    let mut support = 0;
    for idx in 0..64usize {
        let a = d63.amp(idx);
        if (idx as u32).count_ones() == 3 {
            support += 1;
            assert!((a - re(amp)).norm() < 1e-14, "amplitude at {idx} is {a}");
        } else {
            assert!(a.norm() < 1e-14, "stray amplitude at {idx}");
        }
    }
    assert_eq!(support, 20);

    let pattern = rotated_basis_pattern();
    let x_rot = rotate_all(&d63, Axis::X);
    let diff_x = (x_rot.amplitudes() - pattern.amplitudes()).norm();
    assert!(diff_x < 1e-10, "x-basis identity off by {diff_x}");

    let y_rot = rotate_all(&d63, Axis::Y);
    let phased: DVector<C64> = pattern.amplitudes() * C64::new(0.0, 1.0);
    let diff_y = (y_rot.amplitudes() - phased).norm();
    assert!(diff_y < 1e-10, "y-basis identity off by {diff_y}");

    println!("criterion 01 PASS: 20 equal amplitudes and x/y rotated-basis identities");
}

#[test]
fn criterion_02_transverse_spin_witness_value() {
    let d63 = dicke(6, 3).unwrap();
    let jx2 = j_moment(&d63, Axis::X, 2).unwrap();
    let jy2 = j_moment(&d63, Axis::Y, 2).unwrap();
    assert!((jx2 + jy2 - 12.0).abs() < 1e-10, "⟨Jx²+Jy²⟩ = {}", jx2 + jy2);

    // same number through the dense operator route
    let j2 = transverse_j2(6).unwrap();
    assert!((d63.expect(&j2).unwrap() - 12.0).abs() < 1e-10);

    let witness = j2_witness(6, J2_ALPHA_6).unwrap();
    let value = d63.expect(&witness).unwrap();
    assert!((value + 0.9821).abs() < 1e-4, "witness value {value}");

    println!("criterion 02 PASS: ⟨Jx²+Jy²⟩ = 12 and spin witness -0.9821");
}

#[test]
fn criterion_03_seesaw_bounds_for_j2_and_projector() {
    let j2 = transverse_j2(6).unwrap();
    let bound = optimize_bisep_bound(&j2, 24, 7).unwrap();
    assert!(bound.converged);
    assert!(
        (bound.value - 11.0179).abs() < 0.01,
        "product-state bound for Jx²+Jy² is {}",
        bound.value
    );

    let projector = Observable::projector(&dicke(6, 3).unwrap());
    let overlap = optimize_bisep_bound(&projector, 12, 11).unwrap();
    assert!(overlap.converged);
    assert!(
        (overlap.value - 0.6).abs() < 1e-6,
        "projector bound is {}",
        overlap.value
    );

    println!("criterion 03 PASS: see-saw bounds 11.0179 (Jx²+Jy²) and 0.6 (projector)");
}

#[test]
fn criterion_04_moments_witness_and_fidelity_bound() {
    let witness = moments_witness().unwrap();
    let d63 = dicke(6, 3).unwrap();
    let value = d63.expect(&witness).unwrap();
    assert!((value + 1.0).abs() < 1e-9, "moments witness gives {value}");

    let mixed = MixedState::maximally_mixed(6).unwrap();
    let on_mixed = mixed.expect(&witness).unwrap();
    assert!((on_mixed - 85.0 / 32.0).abs() < 1e-9, "on white noise: {on_mixed}");

    assert!((fidelity_bound_from_moments(-1.0) - 1.0).abs() < 1e-12);
    assert!((fidelity_bound_from_moments(-0.105) - 0.642).abs() < 1e-12);

    println!("criterion 04 PASS: moments witness -1.0 and fidelity bound map");
}

#[test]
fn criterion_05_bell_quantum_lhv_and_ghz_values() {
    let bell = bell_d63().unwrap();
    let d63 = dicke(6, 3).unwrap();
    let quantum = d63.expect(&bell).unwrap();
    assert!((quantum - 1.0).abs() < 1e-9, "⟨B⟩ on D(6,3) is {quantum}");

    let (classical, strategies) = bell_lhv_max();
    assert!((classical - 0.4).abs() < 1e-9, "LHV bound is {classical}");
    assert!(strategies >= 4096, "enumeration covered {strategies} strategies");

    let ghz_best = bell_ghz_max(48, 3);
    assert!(
        (ghz_best - 0.85).abs() < 1e-3,
        "GHZ-family maximum is {ghz_best}"
    );

    println!("criterion 05 PASS: Bell values 1 (quantum), 0.4 (LHV), 0.85 (GHZ family)");
}

#[test]
fn criterion_06_postselection_probabilities_and_fidelity() {
    let symmetric = SplitterTree::symmetric();
    let p_sym = ideal_sixfold_probability(&symmetric);
    assert!((p_sym - 5.0 / 324.0).abs() < 1e-12, "symmetric tree gives {p_sym}");

    let reference = SplitterTree::reference();
    let p_ref = ideal_sixfold_probability(&reference);
    assert!((p_ref - 0.0126).abs() < 2e-4, "reference tree gives {p_ref}");

    let d63 = dicke(6, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..100 {
        let tree = random_tree(&mut rng);
        let heralded = postselect_sixfold(&tree, 3, 1.0).unwrap();
        let fid = fidelity_with_pure(&heralded.state, &d63).unwrap();
        assert!(fid >= 1.0 - 1e-10, "tree {trial}: fidelity {fid}");
        let p_direct = ideal_sixfold_probability(&tree);
        assert!(
            (heralded.probability - p_direct).abs() < 1e-12 * p_direct.max(1.0),
            "tree {trial}: probability {} vs {p_direct}",
            heralded.probability
        );
    }

    println!("criterion 06 PASS: sixfold probabilities 5/324 and 0.0126, unit fidelity on 100 trees");
}

fn random_tree(rng: &mut ChaCha8Rng) -> SplitterTree {
    let r = |rng: &mut ChaCha8Rng| rng.gen_range(0.2..0.8);
    let arm_a = TreeNode::split(
        r(rng),
        TreeNode::split(r(rng), TreeNode::Leaf(0), TreeNode::Leaf(1)),
        TreeNode::Leaf(2),
    );
    let arm_b = TreeNode::split(
        r(rng),
        TreeNode::Leaf(3),
        TreeNode::split(r(rng), TreeNode::Leaf(4), TreeNode::Leaf(5)),
    );
    SplitterTree::new(TreeNode::split(r(rng), arm_a, arm_b)).unwrap()
}

#[test]
fn criterion_07_qubit_loss_persistency_contrast() {
    let d63 = dicke(6, 3).unwrap();
    let rho5 = partial_trace_pure(&d63, &[0]).unwrap();
    let expected = MixedState::mixture(&[
        (0.5, dicke(5, 2).unwrap().to_density()),
        (0.5, dicke(5, 3).unwrap().to_density()),
    ])
    .unwrap();
    let dist = rho5.entrywise_distance(&expected);
    assert!(dist < 1e-10, "loss state differs by {dist}");

    // five-qubit entanglement survives: the Dicke-pair subspace witness is
    // strictly negative on the loss state
    let span = subspace_projector(&[dicke(5, 2).unwrap(), dicke(5, 3).unwrap()]).unwrap();
    let bound = optimize_bisep_bound(&span, 12, 5).unwrap();
    assert!((bound.value - 0.8).abs() < 1e-6, "subspace bound {}", bound.value);
    let witness_value = bound.value - rho5.expect(&span).unwrap();
    assert!(
        witness_value < -0.1,
        "loss-state witness value {witness_value}"
    );
    assert!((witness_value + 0.2).abs() < 1e-6);

    // losing a qubit from GHZ₆ leaves nothing detectable: the matching
    // subspace has product states reaching its full overlap
    let ghz5_span = subspace_projector(&[
        PureState::basis_state(5, 0).unwrap(),
        PureState::basis_state(5, 31).unwrap(),
    ])
    .unwrap();
    let ghz_bound = optimize_bisep_bound(&ghz5_span, 8, 5).unwrap();
    assert!((ghz_bound.value - 1.0).abs() < 1e-6, "GHZ subspace bound {}", ghz_bound.value);
    let ghz5 = partial_trace_pure(&ghz(6, Sign::Plus).unwrap(), &[0]).unwrap();
    let ghz_witness_value = ghz_bound.value - ghz5.expect(&ghz5_span).unwrap();
    assert!(
        ghz_witness_value > -1e-9,
        "GHZ loss state should not be flagged: {ghz_witness_value}"
    );

    println!("criterion 07 PASS: qubit loss keeps D(6,3) entangled (-0.2) but not GHZ₆ (0.0)");
}

#[test]
fn criterion_08_projection_chain_states_and_probabilities() {
    let d63 = dicke(6, 3).unwrap();
    let close = |state: &PureState, target: &PureState, label: &str| {
        let deficit = 1.0 - state.overlap_sq(target);
        assert!(deficit < 1e-10, "{label}: overlap deficit {deficit}");
    };
    let prob = |p: f64, want: f64, label: &str| {
        assert!((p - want).abs() < 1e-10, "{label}: probability {p} vs {want}");
    };

    // one projection: five-qubit Dicke blends
    let (d53, p) = project_qubit(&d63, 0, &PureState::ket_h()).unwrap();
    close(&d53, &dicke(5, 3).unwrap(), "onto H");
    prob(p, 0.5, "onto H");

    let (blend, p) = project_qubit(&d63, 0, &PureState::ket_minus()).unwrap();
    close(
        &blend,
        &dicke_blend_five(std::f64::consts::FRAC_PI_4, std::f64::consts::PI).unwrap(),
        "onto -",
    );
    prob(p, 0.5, "onto -");

    // two projections: the four-qubit Dicke states
    let (d52, p) = project_qubit(&d63, 0, &PureState::ket_v()).unwrap();
    prob(p, 0.5, "onto V");
    let (d42, p) = project_qubit(&d52, 0, &PureState::ket_h()).unwrap();
    close(&d42, &dicke(4, 2).unwrap(), "V then H");
    prob(p, 0.6, "V then H");

    let (d41, p) = project_qubit(&d52, 0, &PureState::ket_v()).unwrap();
    close(&d41, &dicke(4, 1).unwrap(), "V then V");
    prob(p, 0.4, "V then V");

    // circular projections filter the GHZ component
    let (half, p) = project_qubit(&d63, 0, &PureState::ket_r()).unwrap();
    prob(p, 0.5, "onto R");
    let (ghz4, p) = project_qubit(&half, 0, &PureState::ket_l()).unwrap();
    prob(p, 0.2, "R then L");
    let target = superpose(&[
        (re(1.0), &dicke(4, 1).unwrap()),
        (re(1.0), &dicke(4, 3).unwrap()),
    ])
    .unwrap();
    close(&ghz4, &target, "R then L");

    println!("criterion 08 PASS: projection chain states and Born probabilities");
}

/// Exact fidelity with D(6,3) summed over the Pauli expansion of its
/// projector; also reports how many strings carry weight (all six qubits
/// non-identity vs any).
fn pauli_reference_fidelity(rho: &MixedState, weights: &[(usize, f64)]) -> f64 {
    let mat = rho.matrix();
    let mut total = 0.0;
    for &(string, t) in weights {
        let mut sum = C64::new(0.0, 0.0);
        for j in 0..64usize {
            let (m, c) = pauli_action(string, j);
            sum += mat[(j, m)] * c;
        }
        total += t * sum.re;
    }
    total / 64.0
}

/// Applies the base-4 encoded Pauli string (digit per qubit, qubit 0 most
/// significant: 0=I 1=X 2=Y 3=Z) to basis state `j`, returning the image
/// index and phase.
fn pauli_action(string: usize, j: usize) -> (usize, C64) {
    let mut m = j;
    let mut c = C64::new(1.0, 0.0);
    for q in 0..6 {
        let digit = string >> (2 * (5 - q)) & 3;
        let bit = j >> (5 - q) & 1;
        match digit {
            0 => {}
            1 => m ^= 1 << (5 - q),
            2 => {
                m ^= 1 << (5 - q);
                c *= if bit == 0 {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, -1.0)
                };
            }
            _ => {
                if bit == 1 {
                    c = -c;
                }
            }
        }
    }
    (m, c)
}

fn random_density(rng: &mut ChaCha8Rng) -> MixedState {
    let normal = StandardNormal;
    let g = DMatrix::<C64>::from_fn(64, 64, |_, _| {
        C64::new(normal.sample(rng), normal.sample(rng))
    });
    let mut h = &g * g.adjoint();
    let trace: C64 = h.diagonal().sum();
    h /= trace;
    let sym = (&h + h.adjoint()) * re(0.5);
    MixedState::new(6, sym).unwrap()
}

#[test]
fn criterion_09_setting_decomposition_and_fidelity_estimator() {
    let d63 = dicke(6, 3).unwrap();
    let projector = Observable::projector(&d63);
    let decomposition = decompose_settings(&projector, 21, 1e-9).unwrap();
    assert!(decomposition.len() <= 21, "{} settings", decomposition.len());
    assert!(
        decomposition.residual <= 1e-9,
        "residual {}",
        decomposition.residual
    );

    // Pauli expansion of the projector: amplitudes of D(6,3) under every
    // string, with the known support census
    let mut weights = Vec::new();
    let mut full_weight = 0;
    for string in 0..4096usize {
        let mut t = C64::new(0.0, 0.0);
        for j in 0..64usize {
            let (m, c) = pauli_action(string, j);
            t += d63.amp(m).conj() * c * d63.amp(j);
        }
        assert!(t.im.abs() < 1e-12);
        if t.re.abs() > 1e-12 {
            weights.push((string, t.re));
            let has_identity = (0..6).any(|q| string >> (2 * (5 - q)) & 3 == 0);
            if !has_identity {
                full_weight += 1;
            }
        }
    }
    assert_eq!(weights.len(), 544, "nonzero Pauli strings");
    assert_eq!(full_weight, 183, "full-weight Pauli strings");

    let settings = fidelity_settings(&decomposition, 6).unwrap();
    let detectors = DetectorEfficiencies::new(vec![
        [0.92, 0.60],
        [0.85, 0.71],
        [0.66, 0.95],
        [0.78, 0.82],
        [0.90, 0.55],
        [0.61, 0.88],
    ])
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let rho = random_density(&mut rng);
        let direct = fidelity_with_pure(&rho, &d63).unwrap();
        let reference = pauli_reference_fidelity(&rho, &weights);
        assert!(
            (direct - reference).abs() < 1e-6,
            "trial {trial}: direct {direct} vs Pauli sum {reference}"
        );

        let data = exact_run((&rho).into(), &settings, &detectors, 5e5).unwrap();
        let estimated = estimate_fidelity(&decomposition, &data, &detectors).unwrap();
        assert!(
            (estimated - direct).abs() < 1e-6,
            "trial {trial}: estimated {estimated} vs direct {direct}"
        );
    }

    println!("criterion 09 PASS: 21-setting decomposition and fidelity estimator vs Pauli oracle");
}

#[test]
fn criterion_10_statistical_pipeline_calibration() {
    let d63 = dicke(6, 3).unwrap();
    let kind = WitnessKind::TransverseSpin { alpha: J2_ALPHA_6 };
    let settings = witness_settings(kind, 6).unwrap();
    let detectors = DetectorEfficiencies::new(vec![
        [0.97, 0.93],
        [0.95, 0.94],
        [0.96, 0.92],
        [0.93, 0.95],
        [0.94, 0.96],
        [0.92, 0.97],
    ])
    .unwrap();
    let truth = J2_ALPHA_6 - 12.0;
    let estimator =
        |d: &[dicke6::measure::MeasuredSetting], e: &DetectorEfficiencies| {
            evaluate_witness_from_data(kind, d, e)
        };

    let seeds = 200u64;
    let mut values = Vec::new();
    let mut linear_sigmas = Vec::new();
    for seed in 0..seeds {
        let data = simulate_run((&d63).into(), &settings, &detectors, 1000.0, seed).unwrap();
        let est = propagate_error(&data, &detectors, 0.0, ErrorMethod::Linear, estimator).unwrap();
        values.push(est.value);
        linear_sigmas.push(est.sigma);
    }
    let mean = values.iter().sum::<f64>() / seeds as f64;
    let combined: f64 =
        linear_sigmas.iter().map(|s| s * s).sum::<f64>().sqrt() / seeds as f64;
    assert!(
        (mean - truth).abs() < 3.0 * combined,
        "mean {mean} vs truth {truth} (allowed {})",
        3.0 * combined
    );

    let subset = 60usize;
    let mut boot_sigmas = Vec::new();
    for seed in 0..subset as u64 {
        let data = simulate_run((&d63).into(), &settings, &detectors, 1000.0, seed).unwrap();
        let est = propagate_error(
            &data,
            &detectors,
            0.0,
            ErrorMethod::Bootstrap {
                replicates: 300,
                seed: seed ^ 0x5eed,
            },
            estimator,
        )
        .unwrap();
        boot_sigmas.push(est.sigma);
    }
    let mean_linear = linear_sigmas[..subset].iter().sum::<f64>() / subset as f64;
    let mean_boot = boot_sigmas.iter().sum::<f64>() / subset as f64;
    let rel = (mean_linear - mean_boot).abs() / mean_linear;
    assert!(
        rel < 0.2,
        "linear σ {mean_linear} vs bootstrap σ {mean_boot} ({:.1}% apart)",
        rel * 100.0
    );

    println!("criterion 10 PASS: estimator unbiased within 3 SE, error bars agree within 20%");
}
