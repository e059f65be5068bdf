//! Named multi-qubit states: Dicke states, GHZ states, and the
//! one-qubit-projected families that appear downstream of them.

use crate::linalg::C64;
use crate::qcore::{Axis, PureState};
use crate::{Error, Result};

/// Relative sign between the two branches of a GHZ state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn phase(self) -> f64 {
        match self {
            Sign::Plus => 0.0,
            Sign::Minus => std::f64::consts::PI,
        }
    }
}

/// Symmetric Dicke state with `excitations` qubits in |V⟩, uniformly
/// superposed over all arrangements.
pub fn dicke(num_qubits: usize, excitations: usize) -> Result<PureState> {
    if excitations > num_qubits {
        return Err(Error::InvalidArgument(format!(
            "cannot place {excitations} excitations on {num_qubits} qubits"
        )));
    }
    let dim = 1usize << num_qubits;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    let mut hits = 0usize;
    for (idx, amp) in amps.iter_mut().enumerate() {
        if idx.count_ones() as usize == excitations {
            *amp = C64::new(1.0, 0.0);
            hits += 1;
        }
    }
    debug_assert_eq!(hits, binomial(num_qubits, excitations));
    PureState::from_unnormalized(num_qubits, amps)
}

/// W state: single excitation shared across all qubits.
pub fn w_state(num_qubits: usize) -> Result<PureState> {
    dicke(num_qubits, 1)
}

/// GHZ state (|H…H⟩ ± |V…V⟩)/√2.
pub fn ghz(num_qubits: usize, sign: Sign) -> Result<PureState> {
    ghz_with_phase(num_qubits, sign.phase())
}

/// GHZ state with an arbitrary relative phase, (|H…H⟩ + e^{iγ}|V…V⟩)/√2.
pub fn ghz_with_phase(num_qubits: usize, gamma: f64) -> Result<PureState> {
    if num_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    let dim = 1usize << num_qubits;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = C64::new(1.0, 0.0);
    amps[dim - 1] = C64::from_polar(1.0, gamma);
    PureState::from_unnormalized(num_qubits, amps)
}

/// Normalized superposition Σ cᵢ |ψᵢ⟩ of equally sized states.
pub fn superpose(parts: &[(C64, &PureState)]) -> Result<PureState> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty superposition".into()))?;
    let n = first.1.num_qubits();
    let mut amps = vec![C64::new(0.0, 0.0); first.1.dim()];
    for (coeff, state) in std::iter::once(first).chain(rest) {
        if state.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                left: 1 << n,
                right: state.dim(),
            });
        }
        for (a, b) in amps.iter_mut().zip(state.amplitudes().iter()) {
            *a += coeff * b;
        }
    }
    PureState::from_unnormalized(n, amps)
}

/// Five-qubit interpolation cos θ |D(5,2)⟩ + sin θ e^{iφ} |D(5,3)⟩ reached by
/// projecting one qubit of |D(6,3)⟩ along [`projection_direction`]`(θ, φ)`.
pub fn dicke_blend_five(theta: f64, phi: f64) -> Result<PureState> {
    let d52 = dicke(5, 2)?;
    let d53 = dicke(5, 3)?;
    superpose(&[
        (C64::new(theta.cos(), 0.0), &d52),
        (C64::from_polar(theta.sin(), phi), &d53),
    ])
}

/// Single-qubit direction cos θ |V⟩ + sin θ e^{−iφ} |H⟩ whose projection turns
/// one qubit of |D(6,3)⟩ into [`dicke_blend_five`]`(θ, φ)` on the remainder.
pub fn projection_direction(theta: f64, phi: f64) -> PureState {
    let h = C64::from_polar(theta.sin(), -phi);
    let v = C64::new(theta.cos(), 0.0);
    PureState::qubit(h, v).expect("direction is normalized")
}

/// |+⟩/|−⟩/|L⟩/|R⟩-style product state with every qubit along the same
/// eigenvector of `axis` (`positive` selects the +1 eigenvector).
pub fn polarized(num_qubits: usize, axis: Axis, positive: bool) -> Result<PureState> {
    let single = match (axis, positive) {
        (Axis::X, true) => PureState::ket_plus(),
        (Axis::X, false) => PureState::ket_minus(),
        (Axis::Y, true) => PureState::ket_l(),
        (Axis::Y, false) => PureState::ket_r(),
        (Axis::Z, true) => PureState::ket_h(),
        (Axis::Z, false) => PureState::ket_v(),
    };
    let copies: Vec<PureState> = (0..num_qubits).map(|_| single.clone()).collect();
    PureState::tensor(&copies)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::rotate_all;
    use crate::ATOL;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dicke_six_three_amplitudes() {
        let d = dicke(6, 3).unwrap();
        let expected = 1.0 / 20f64.sqrt();
        let mut nonzero = 0;
        for idx in 0..64 {
            let a = d.amp(idx);
            if idx.count_ones() == 3 {
                assert_abs_diff_eq!(a.re, expected, epsilon = ATOL);
                assert_abs_diff_eq!(a.im, 0.0, epsilon = ATOL);
                nonzero += 1;
            } else {
                assert_eq!(a, C64::new(0.0, 0.0));
            }
        }
        assert_eq!(nonzero, 20);
    }

    #[test]
    fn dicke_rejects_overfull() {
        assert!(dicke(4, 5).is_err());
    }

    #[test]
    fn x_rotation_splits_into_ghz_and_even_dicke() {
        // (1/√2)^⊗6-rotated |D(6,3)⟩ = √(5/8)|GHZ⁻⟩ + √(3/16)(|D(6,4)⟩ − |D(6,2)⟩)
        let d63 = dicke(6, 3).unwrap();
        let rotated = rotate_all(&d63, Axis::X);
        let target = superpose(&[
            (C64::new((5f64 / 8.0).sqrt(), 0.0), &ghz(6, Sign::Minus).unwrap()),
            (C64::new((3f64 / 16.0).sqrt(), 0.0), &dicke(6, 4).unwrap()),
            (C64::new(-((3f64 / 16.0).sqrt()), 0.0), &dicke(6, 2).unwrap()),
        ])
        .unwrap();
        assert!(rotated.distance_up_to_phase(&target) < 1e-7);
    }

    #[test]
    fn y_rotation_matches_x_rotation_up_to_phase() {
        let d63 = dicke(6, 3).unwrap();
        let rx = rotate_all(&d63, Axis::X);
        let ry = rotate_all(&d63, Axis::Y);
        // the two rotated states differ by the global factor i
        let mut max_err: f64 = 0.0;
        for idx in 0..64 {
            let diff = ry.amp(idx) - C64::new(0.0, 1.0) * rx.amp(idx);
            max_err = max_err.max(diff.norm());
        }
        assert!(max_err < 1e-10);
    }

    #[test]
    fn ghz_four_minus_equals_odd_dicke_combination() {
        let ghz4 = ghz(4, Sign::Minus).unwrap();
        let root = superpose(&[
            (C64::new(1.0, 0.0), &dicke(4, 1).unwrap()),
            (C64::new(1.0, 0.0), &dicke(4, 3).unwrap()),
        ])
        .unwrap();
        // (|D(4,1)⟩ + |D(4,3)⟩)/√2 is the x-basis form (|+⁴⟩ − |−⁴⟩)/√2
        let rotated = rotate_all(&root, Axis::X);
        assert!(rotated.distance_up_to_phase(&ghz4) < 1e-7);
        let plus4 = polarized(4, Axis::X, true).unwrap();
        let minus4 = polarized(4, Axis::X, false).unwrap();
        let direct = superpose(&[
            (C64::new(1.0, 0.0), &plus4),
            (C64::new(-1.0, 0.0), &minus4),
        ])
        .unwrap();
        assert!(direct.distance_up_to_phase(&root) < 1e-7);
    }

    #[test]
    fn blend_hits_pure_dicke_at_the_ends() {
        let at_zero = dicke_blend_five(0.0, 0.3).unwrap();
        assert!(at_zero.distance_up_to_phase(&dicke(5, 2).unwrap()) < 1e-7);
        let at_half_pi = dicke_blend_five(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!(at_half_pi.distance_up_to_phase(&dicke(5, 3).unwrap()) < 1e-7);
    }

    #[test]
    fn ghz_phase_interpolates_sign() {
        let plus = ghz(6, Sign::Plus).unwrap();
        let by_phase = ghz_with_phase(6, 0.0).unwrap();
        assert!(plus.distance_up_to_phase(&by_phase) < 1e-7);
        let minus = ghz(6, Sign::Minus).unwrap();
        let by_pi = ghz_with_phase(6, std::f64::consts::PI).unwrap();
        assert!(minus.distance_up_to_phase(&by_pi) < 1e-7);
        assert!(plus.distance_up_to_phase(&minus) > 0.5);
    }

    #[test]
    fn w_state_is_single_excitation() {
        let w = w_state(3).unwrap();
        let expected = 1.0 / 3f64.sqrt();
        for idx in [0b001usize, 0b010, 0b100] {
            assert_abs_diff_eq!(w.amp(idx).re, expected, epsilon = 1e-12);
        }
        assert_eq!(w.amp(0), C64::new(0.0, 0.0));
        assert_eq!(w.amp(7), C64::new(0.0, 0.0));
    }

    #[test]
    fn superpose_rejects_mixed_sizes() {
        let a = dicke(3, 1).unwrap();
        let b = dicke(4, 1).unwrap();
        assert!(superpose(&[(C64::new(1.0, 0.0), &a), (C64::new(1.0, 0.0), &b)]).is_err());
    }
}
