//! Collective spin observables, Mermin-type operators, and the six-qubit
//! Bell operator whose quantum value is maximized by |D(6,3)⟩.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::C64;
use crate::qcore::{expectation, Axis, Observable, StateRef};
use crate::{Error, Result};

/// Weighted sum of full-weight Pauli strings, keyed by the per-qubit axes.
pub type PauliSum = BTreeMap<Vec<Axis>, f64>;

/// Collective spin component `J = Σᵢ σ⁽ⁱ⁾/2` along `axis`.
pub fn collective_j(num_qubits: usize, axis: Axis) -> Result<Observable> {
    let mut total = Observable::identity(num_qubits)?.scale(0.0);
    for q in 0..num_qubits {
        total = total.add(&Observable::pauli_string(num_qubits, &[(q, axis)])?)?;
    }
    Ok(total.scale(0.5).with_label(format!("J{}", axis.name())))
}

/// Moment `⟨J_axis^power⟩` of the collective spin.
pub fn j_moment<'a>(
    state: impl Into<StateRef<'a>>,
    axis: Axis,
    power: u32,
) -> Result<f64> {
    let state = state.into();
    if power == 0 {
        return Ok(1.0);
    }
    let j = collective_j(state.num_qubits(), axis)?;
    expectation(state, &j.power(power))
}

/// Transverse second moment `Jx² + Jy²`.
pub fn transverse_j2(num_qubits: usize) -> Result<Observable> {
    let jx = collective_j(num_qubits, Axis::X)?;
    let jy = collective_j(num_qubits, Axis::Y)?;
    jx.power(2)
        .add(&jy.power(2))
        .map(|o| o.with_label("Jx^2 + Jy^2"))
}

/// Dense observable for a weighted sum of full-weight Pauli strings.
pub fn observable_from_pauli_sum(num_qubits: usize, sum: &PauliSum) -> Result<Observable> {
    let mut total = Observable::identity(num_qubits)?.scale(0.0);
    for (axes, coeff) in sum {
        if axes.len() != num_qubits {
            return Err(Error::InvalidArgument(format!(
                "term with {} factors in a {num_qubits}-qubit sum",
                axes.len()
            )));
        }
        let factors: Vec<(usize, Axis)> = axes.iter().copied().enumerate().collect();
        total = total.add(&Observable::pauli_string(num_qubits, &factors)?.scale(*coeff))?;
    }
    Ok(total)
}

fn swap_xy(sum: &PauliSum) -> PauliSum {
    sum.iter()
        .map(|(axes, c)| {
            let swapped = axes
                .iter()
                .map(|a| match a {
                    Axis::X => Axis::Y,
                    Axis::Y => Axis::X,
                    Axis::Z => Axis::Z,
                })
                .collect();
            (swapped, *c)
        })
        .collect()
}

/// Mermin operator pair `(M_n, M'_n)` as symbolic Pauli sums. The recursion
/// starts from `M₁ = σx`, appends each new qubit as the last factor via
/// `M_n = ½[M_{n−1}⊗(σx+σy) + M'_{n−1}⊗(σx−σy)]`, and `M'` is `M` with the
/// x and y labels exchanged everywhere.
pub fn mermin_terms(num_qubits: usize) -> Result<(PauliSum, PauliSum)> {
    if num_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    let mut m: PauliSum = BTreeMap::from([(vec![Axis::X], 1.0)]);
    for _ in 1..num_qubits {
        let mp = swap_xy(&m);
        let mut next: PauliSum = BTreeMap::new();
        for (axes, c) in &m {
            for extra in [Axis::X, Axis::Y] {
                let mut k = axes.clone();
                k.push(extra);
                *next.entry(k).or_insert(0.0) += 0.5 * c;
            }
        }
        for (axes, c) in &mp {
            for (extra, f) in [(Axis::X, 0.5), (Axis::Y, -0.5)] {
                let mut k = axes.clone();
                k.push(extra);
                *next.entry(k).or_insert(0.0) += f * c;
            }
        }
        next.retain(|_, v| v.abs() > 1e-12);
        m = next;
    }
    let mp = swap_xy(&m);
    Ok((m, mp))
}

/// Dense Mermin operator pair `(M_n, M'_n)`.
pub fn mermin(num_qubits: usize) -> Result<(Observable, Observable)> {
    let (m, mp) = mermin_terms(num_qubits)?;
    Ok((
        observable_from_pauli_sum(num_qubits, &m)?.with_label(format!("M{num_qubits}")),
        observable_from_pauli_sum(num_qubits, &mp)?.with_label(format!("M{num_qubits}'")),
    ))
}

const BELL_QUBITS: usize = 6;

/// The 32 full-weight Pauli terms of the Bell operator, each with
/// coefficient ±1/20. One qubit measures {x, y}; the five others measure
/// {x, z} against it in the first half and {y, z} in the second.
pub fn bell_terms() -> Vec<([Axis; 6], f64)> {
    let mut out = Vec::with_capacity(32);
    for (first, partner) in [(Axis::X, Axis::X), (Axis::Y, Axis::Y)] {
        for subset in 0u32..32 {
            let picks = subset.count_ones();
            if picks % 2 == 0 {
                continue;
            }
            let sign = if (picks - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
            let mut axes = [Axis::Z; 6];
            axes[0] = first;
            for site in 0..5 {
                if subset >> site & 1 == 1 {
                    axes[site + 1] = partner;
                }
            }
            out.push((axes, sign / 20.0));
        }
    }
    out
}

fn kron_pow(base: &DMatrix<C64>, copies: usize) -> DMatrix<C64> {
    let mut out = DMatrix::identity(1, 1);
    for _ in 0..copies {
        out = out.kronecker(base);
    }
    out
}

/// Six-qubit Bell operator with quantum value 1 on |D(6,3)⟩, built as
/// `B = (4/5)(σx ⊗ M + σy ⊗ M')` with `M = Im[(σz+iσx)^⊗5]/16` and
/// `M' = −Im[(σz−iσy)^⊗5]/16` acting on the other five qubits.
pub fn bell_d63() -> Result<Observable> {
    let i = C64::new(0.0, 1.0);
    let zx = Axis::Z.pauli() + Axis::X.pauli() * i;
    let zy = Axis::Z.pauli() - Axis::Y.pauli() * i;
    let zx_dyn = DMatrix::from_fn(2, 2, |r, c| zx[(r, c)]);
    let zy_dyn = DMatrix::from_fn(2, 2, |r, c| zy[(r, c)]);
    let a5 = kron_pow(&zx_dyn, 5);
    let b5 = kron_pow(&zy_dyn, 5);
    let m = (&a5 - a5.adjoint()) * (C64::new(0.0, -0.5) / C64::new(16.0, 0.0));
    let mp = (&b5 - b5.adjoint()) * (C64::new(0.0, 0.5) / C64::new(16.0, 0.0));
    let sx = DMatrix::from_fn(2, 2, |r, c| Axis::X.pauli()[(r, c)]);
    let sy = DMatrix::from_fn(2, 2, |r, c| Axis::Y.pauli()[(r, c)]);
    let dense = (sx.kronecker(&m) + sy.kronecker(&mp)) * C64::new(0.8, 0.0);
    Observable::new(BELL_QUBITS, dense).map(|o| o.with_label("B"))
}

/// Largest |⟨B⟩| over deterministic local-value assignments, together with
/// the number of assignments examined. Each qubit answers ±1 for every axis
/// it measures; the first qubit's two signs are optimized analytically.
pub fn bell_lhv_max() -> (f64, usize) {
    let terms = bell_terms();
    let mut x_half = Vec::new(); // (axis codes for qubits 1..=5, coeff)
    let mut y_half = Vec::new();
    for (axes, c) in &terms {
        let rest: [usize; 5] = std::array::from_fn(|i| axes[i + 1] as usize);
        match axes[0] {
            Axis::X => x_half.push((rest, *c)),
            Axis::Y => y_half.push((rest, *c)),
            Axis::Z => unreachable!("first qubit never measures z"),
        }
    }
    let strategies = 8usize.pow(5);
    let best = (0..strategies)
        .into_par_iter()
        .map(|strategy| {
            let mut signs = [[1.0f64; 3]; 5];
            let mut v = strategy;
            for site in signs.iter_mut() {
                for (ax, slot) in site.iter_mut().enumerate() {
                    *slot = if v >> ax & 1 == 1 { 1.0 } else { -1.0 };
                }
                v >>= 3;
            }
            let eval = |half: &[([usize; 5], f64)]| -> f64 {
                half.iter()
                    .map(|(rest, c)| {
                        c * rest
                            .iter()
                            .enumerate()
                            .map(|(site, ax)| signs[site][*ax])
                            .product::<f64>()
                    })
                    .sum()
            };
            eval(&x_half).abs() + eval(&y_half).abs()
        })
        .reduce(|| 0.0, f64::max);
    (best, 4 * strategies)
}

/// Entries of `U† σ U` needed to evaluate full-weight strings on a rotated
/// GHZ state: (⟨0|·|0⟩, ⟨1|·|1⟩, ⟨0|·|1⟩) for each axis.
fn conjugated_entries(theta: f64, phi: f64) -> [[C64; 3]; 3] {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    let u = [
        [C64::new(c, 0.0), -e.conj() * s],
        [e * s, C64::new(c, 0.0)],
    ];
    let mut out = [[C64::new(0.0, 0.0); 3]; 3];
    for axis in Axis::ALL {
        let sigma = axis.pauli();
        let mut d = [[C64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for cc in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for p in 0..2 {
                    for q in 0..2 {
                        acc += u[p][r].conj() * sigma[(p, q)] * u[q][cc];
                    }
                }
                d[r][cc] = acc;
            }
        }
        out[axis as usize] = [d[0][0], d[1][1], d[0][1]];
    }
    out
}

fn ghz_orbit_value(angles: &[f64; 12], terms: &[([Axis; 6], f64)]) -> f64 {
    let ds: Vec<[[C64; 3]; 3]> = (0..6)
        .map(|i| conjugated_entries(angles[2 * i], angles[2 * i + 1]))
        .collect();
    let mut total = 0.0;
    for (axes, c) in terms {
        let mut p00 = C64::new(1.0, 0.0);
        let mut p11 = C64::new(1.0, 0.0);
        let mut p01 = C64::new(1.0, 0.0);
        for (i, axis) in axes.iter().enumerate() {
            let [d00, d11, d01] = ds[i][*axis as usize];
            p00 *= d00;
            p11 *= d11;
            p01 *= d01;
        }
        total += c * (0.5 * (p00 + p11).re + p01.re);
    }
    total
}

/// Largest ⟨B⟩ over products of local unitaries applied to the GHZ state,
/// found by multi-start coordinate descent over the twelve rotation angles.
pub fn bell_ghz_max(restarts: usize, seed: u64) -> f64 {
    let terms = bell_terms();
    let starts: Vec<[f64; 12]> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..restarts.max(1))
            .map(|_| std::array::from_fn(|_| rng.gen_range(0.0..std::f64::consts::PI)))
            .collect()
    };
    starts
        .into_par_iter()
        .map(|mut angles| {
            let mut value = ghz_orbit_value(&angles, &terms);
            for _sweep in 0..10 {
                let before = value;
                for coord in 0..12 {
                    let original = angles[coord];
                    let (mut lo, mut hi) = (original - 1.6, original + 1.6);
                    for _ in 0..34 {
                        let ml = lo + (hi - lo) / 3.0;
                        let mh = hi - (hi - lo) / 3.0;
                        let mut probe = angles;
                        probe[coord] = ml;
                        let vl = ghz_orbit_value(&probe, &terms);
                        probe[coord] = mh;
                        let vh = ghz_orbit_value(&probe, &terms);
                        if vl < vh {
                            lo = ml;
                        } else {
                            hi = mh;
                        }
                    }
                    angles[coord] = 0.5 * (lo + hi);
                    let candidate = ghz_orbit_value(&angles, &terms);
                    if candidate >= value {
                        value = candidate;
                    } else {
                        angles[coord] = original;
                    }
                }
                if value - before < 1e-12 {
                    break;
                }
            }
            value
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}
