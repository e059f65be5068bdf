//! Entanglement witnesses, biseparability bounds, and the decomposition of
//! symmetric observables into locally measurable settings.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::collective::{collective_j, transverse_j2};
use crate::linalg::{top_eigenpair, C64};
use crate::qcore::{
    scatter_bits, schmidt_spectrum, Axis, Bipartition, Observable, PureState,
};
use crate::states::polarized;
use crate::{Error, Result};

/// Offset of the transverse-moment witness `α·I − (Jx² + Jy²)` for six
/// qubits: the largest transverse second moment any biseparable six-qubit
/// state can reach, rounded to the published precision.
pub const J2_ALPHA_6: f64 = 11.0179;

/// Witness `α·I − |target⟩⟨target|`; negative values certify states closer
/// to the target than any state the bound `α` admits.
pub fn projector_witness(alpha: f64, target: &PureState) -> Observable {
    let dim = target.dim();
    let mut mat = DMatrix::from_diagonal_element(dim, dim, C64::new(alpha, 0.0));
    mat -= target.amplitudes() * target.amplitudes().adjoint();
    Observable::from_hermitian_unchecked(target.num_qubits(), mat)
}

/// Witness `α·I − (Jx² + Jy²)`.
pub fn j2_witness(num_qubits: usize, alpha: f64) -> Result<Observable> {
    let j2 = transverse_j2(num_qubits)?;
    Observable::identity(num_qubits)?
        .scale(alpha)
        .sub(&j2)
        .map(|o| o.with_label("j2 witness"))
}

/// Largest squared overlap of `state` with any pure state separable across
/// some bipartition — the maximum over all cuts of the top Schmidt weight.
pub fn max_bisep_overlap(state: &PureState) -> Result<(f64, Bipartition)> {
    let mut best: Option<(f64, Bipartition)> = None;
    for cut in Bipartition::all(state.num_qubits())? {
        let top = schmidt_spectrum(state, &cut)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if best.as_ref().map_or(true, |(b, _)| top > *b) {
            best = Some((top, cut));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no bipartition available".into()))
}

/// Projector onto the span of the given (not necessarily orthogonal) states.
pub fn subspace_projector(states: &[PureState]) -> Result<Observable> {
    let (first, _) = states
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty subspace".into()))?;
    let n = first.num_qubits();
    let dim = first.dim();
    let mut basis: Vec<DVector<C64>> = Vec::new();
    for s in states {
        if s.num_qubits() != n {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: s.dim(),
            });
        }
        let mut v = s.amplitudes().clone();
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-10 {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    let mut mat = DMatrix::zeros(dim, dim);
    for b in &basis {
        mat += b * b.adjoint();
    }
    Ok(Observable::from_hermitian_unchecked(n, mat))
}

/// Result of the alternating product-state maximization.
#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// Largest product-state expectation found.
    pub value: f64,
    /// Whether the best run met the convergence tolerance.
    pub converged: bool,
    /// The bipartition attaining the maximum.
    pub cut: Bipartition,
    /// Alternation rounds used by the best run.
    pub iterations: usize,
}

/// Maximizes `⟨a ⊗ b| op |a ⊗ b⟩` over product states across every
/// bipartition by alternating eigenvector updates, restarted from random
/// states. The result upper-bounds `op` on all biseparable states when the
/// landscape is benign; restarts guard against poor local maxima.
pub fn optimize_bisep_bound(op: &Observable, restarts: usize, seed: u64) -> Result<SeesawResult> {
    let n = op.num_qubits();
    let cuts = Bipartition::all(n)?;
    let mut jobs = Vec::new();
    for ci in 0..cuts.len() {
        for r in 0..restarts.max(1) {
            jobs.push((ci, r as u64));
        }
    }
    let outcomes: Vec<(f64, bool, usize, usize)> = jobs
        .into_par_iter()
        .map(|(ci, restart)| {
            let cut = &cuts[ci];
            let (value, converged, iterations) =
                seesaw_single(op, cut, seed ^ (ci as u64).wrapping_mul(0x9e3779b97f4a7c15) ^ restart);
            (value, converged, iterations, ci)
        })
        .collect();
    let best = outcomes
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one run");
    Ok(SeesawResult {
        value: best.0,
        converged: best.1,
        cut: cuts[best.3].clone(),
        iterations: best.2,
    })
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> DVector<C64> {
    let mut v = DVector::from_fn(dim, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    v
}

fn seesaw_single(op: &Observable, cut: &Bipartition, seed: u64) -> (f64, bool, usize) {
    let n = cut.num_qubits();
    let la = cut.left().len();
    let lb = n - la;
    let (da, db) = (1usize << la, 1usize << lb);
    let mat = op.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = random_state(db, &mut rng);
    let mut a: DVector<C64>;
    let right = cut.right();
    let full_index = |ia: usize, ib: usize| -> usize {
        scatter_bits(ia, cut.left(), n) | scatter_bits(ib, &right, n)
    };
    let mut value = f64::NEG_INFINITY;
    let max_rounds = 400;
    for round in 0..max_rounds {
        // effective operator on the left register given |b⟩
        let mut eff_a = DMatrix::<C64>::zeros(da, da);
        for i in 0..da {
            for j in 0..da {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..db {
                    let row = full_index(i, k);
                    for l in 0..db {
                        acc += b[k].conj() * mat[(row, full_index(j, l))] * b[l];
                    }
                }
                eff_a[(i, j)] = acc;
            }
        }
        let (_, va) = top_eigenpair(&eff_a);
        a = va;
        let mut eff_b = DMatrix::<C64>::zeros(db, db);
        for k in 0..db {
            for l in 0..db {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..da {
                    let row = full_index(i, k);
                    for j in 0..da {
                        acc += a[i].conj() * mat[(row, full_index(j, l))] * a[j];
                    }
                }
                eff_b[(k, l)] = acc;
            }
        }
        let (lb_val, vb) = top_eigenpair(&eff_b);
        b = vb;
        let new_value = lb_val;
        if (new_value - value).abs() < 1e-12 && round > 0 {
            return (new_value, true, round + 1);
        }
        value = new_value;
    }
    (value, false, max_rounds)
}

/// Sixth-order collective-moment witness: `(3/2)·I + Σ c_{i,j} J_i^{2j}`
/// over axes i ∈ {x, y, z} and moment orders 2j ∈ {2, 4, 6}. Its value is
/// exactly −1 on |D(6,3)⟩ and nonnegative on all separable states.
pub fn moments_witness() -> Result<Observable> {
    let coeffs: [(Axis, [f64; 3]); 3] = [
        (Axis::X, [-1.0 / 45.0, 1.0 / 36.0, -1.0 / 180.0]),
        (Axis::Y, [-1.0 / 45.0, 1.0 / 36.0, -1.0 / 180.0]),
        (Axis::Z, [1007.0 / 360.0, -31.0 / 36.0, 23.0 / 360.0]),
    ];
    let mut w = Observable::identity(6)?.scale(1.5);
    for (axis, row) in coeffs {
        let j = collective_j(6, axis)?;
        for (orderm1, c) in row.into_iter().enumerate() {
            let power = 2 * (orderm1 as u32 + 1);
            w = w.add(&j.power(power).scale(c))?;
        }
    }
    Ok(w.with_label("moments witness"))
}

/// Converts a measured moments-witness value into a fidelity lower bound
/// with respect to |D(6,3)⟩.
pub fn fidelity_bound_from_moments(witness_value: f64) -> f64 {
    0.6 - witness_value / 2.5
}

///// Two-setting GHZ witness for four qubits:
/// `(3/2)·I − P_odd − P_pop`, with `P_odd` the odd-z-parity projector and
/// `P_pop` the projector onto {|+⟩^⊗4, |−⟩^⊗4}.
pub fn ghz_two_setting_witness() -> Result<Observable> {
    let n = 4;
    let parity = Observable::pauli_string(n, &[(0, Axis::Z), (1, Axis::Z), (2, Axis::Z), (3, Axis::Z)])?;
    let p_odd = Observable::identity(n)?.sub(&parity)?.scale(0.5);
    let plus = polarized(n, Axis::X, true)?;
    let minus = polarized(n, Axis::X, false)?;
    let p_pop = Observable::projector(&plus).add(&Observable::projector(&minus))?;
    Observable::identity(n)?
        .scale(1.5)
        .sub(&p_odd)?
        .sub(&p_pop)
        .map(|o| o.with_label("ghz two-setting witness"))
}

/// A set of measurement directions with per-direction polynomial weights
/// that recombine into a permutation-symmetric observable.
#[derive(Debug, Clone)]
pub struct SettingDecomposition {
    /// Unit measurement directions (x, y, z).
    pub directions: Vec<[f64; 3]>,
    /// `coefficients[j][k]` multiplies the k-body symmetric power of
    /// direction j (index 0 is unused; the constant is separate).
    pub coefficients: Vec<Vec<f64>>,
    /// Identity contribution.
    pub constant: f64,
    /// Largest entrywise deviation of the recombined operator.
    pub residual: f64,
}

impl SettingDecomposition {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Rebuilds the dense observable described by this decomposition.
    pub fn recombine(&self, num_qubits: usize) -> Result<Observable> {
        let mut total = Observable::identity(num_qubits)?.scale(self.constant);
        for (dir, coeffs) in self.directions.iter().zip(&self.coefficients) {
            for (k, c) in coeffs.iter().enumerate().skip(1) {
                if c.abs() > 0.0 {
                    total = total.add(&symmetrized_power(num_qubits, *dir, k)?.scale(*c))?;
                }
            }
        }
        Ok(total)
    }
}

/// Sum of all k-fold products of `direction · σ` over distinct qubit
/// subsets, the symmetric k-body power of one measurement direction.
pub fn symmetrized_power(num_qubits: usize, direction: [f64; 3], k: usize) -> Result<Observable> {
    if k > num_qubits {
        return Err(Error::InvalidArgument(format!(
            "{k}-body term on {num_qubits} qubits"
        )));
    }
    let nd = Axis::X.pauli() * C64::new(direction[0], 0.0)
        + Axis::Y.pauli() * C64::new(direction[1], 0.0)
        + Axis::Z.pauli() * C64::new(direction[2], 0.0);
    let nd = DMatrix::from_fn(2, 2, |r, c| nd[(r, c)]);
    let eye = DMatrix::<C64>::identity(2, 2);
    let dim = 1usize << num_qubits;
    let mut total = DMatrix::<C64>::zeros(dim, dim);
    for subset in 0usize..(1 << num_qubits) {
        if subset.count_ones() as usize != k {
            continue;
        }
        let mut term = DMatrix::identity(1, 1);
        for q in 0..num_qubits {
            let on = subset >> (num_qubits - 1 - q) & 1 == 1;
            term = term.kronecker(if on { &nd } else { &eye });
        }
        total += term;
    }
    Ok(Observable::from_hermitian_unchecked(num_qubits, total))
}

/// Pauli-class coordinates of a permutation-symmetric observable: the value
/// is the shared coefficient of every weight-(a+b+c) string with a σx's,
/// b σy's and c σz's. Fails if the coefficients are not class-constant.
fn symmetric_class_coefficients(
    op: &Observable,
) -> Result<std::collections::BTreeMap<(usize, usize, usize), f64>> {
    let n = op.num_qubits();
    let dim = 1usize << n;
    let mat = op.matrix();
    let mut classes: std::collections::BTreeMap<(usize, usize, usize), (f64, bool)> =
        std::collections::BTreeMap::new();
    // One pass over all Pauli strings; each string has one nonzero entry per
    // row at column row ^ flip-mask, so every trace costs O(dim).
    for assignment in 0..4usize.pow(n as u32) {
        let mut axes = Vec::with_capacity(n);
        let mut v = assignment;
        for _ in 0..n {
            axes.push(v % 4);
            v /= 4;
        }
        let mut flip = 0usize;
        for (q, a) in axes.iter().enumerate() {
            if *a == 1 || *a == 2 {
                flip |= 1 << (n - 1 - q);
            }
        }
        let mut acc = C64::new(0.0, 0.0);
        for row in 0..dim {
            let col = row ^ flip;
            // phase of ⟨col| σ |row⟩ accumulated per qubit
            let mut phase = C64::new(1.0, 0.0);
            for (q, a) in axes.iter().enumerate() {
                let bit = row >> (n - 1 - q) & 1;
                phase *= match a {
                    0 => C64::new(1.0, 0.0),
                    1 => C64::new(1.0, 0.0),
                    2 => {
                        if bit == 0 {
                            C64::new(0.0, 1.0)
                        } else {
                            C64::new(0.0, -1.0)
                        }
                    }
                    _ => {
                        if bit == 0 {
                            C64::new(1.0, 0.0)
                        } else {
                            C64::new(-1.0, 0.0)
                        }
                    }
                };
            }
            acc += mat[(row, col)] * phase;
        }
        let coeff = acc / C64::new(dim as f64, 0.0);
        if coeff.im.abs() > 1e-10 {
            return Err(Error::InvalidState(
                "non-Hermitian component in Pauli expansion".into(),
            ));
        }
        let key = (
            axes.iter().filter(|a| **a == 1).count(),
            axes.iter().filter(|a| **a == 2).count(),
            axes.iter().filter(|a| **a == 3).count(),
        );
        match classes.get_mut(&key) {
            None => {
                classes.insert(key, (coeff.re, false));
            }
            Some((existing, flagged)) => {
                if (*existing - coeff.re).abs() > 1e-10 {
                    *flagged = true;
                }
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    for (key, (value, flagged)) in classes {
        if flagged {
            return Err(Error::InvalidArgument(
                "observable is not permutation symmetric".into(),
            ));
        }
        if value.abs() > 1e-14 {
            out.insert(key, value);
        }
    }
    Ok(out)
}

/// Candidate direction families tried by the decomposition, smallest first:
/// the pole, the axes, pole + equatorial ring, then pole + equator + one to
/// three mid-latitude rings, and finally a dense latitude-azimuth grid.
fn candidate_families(num_qubits: usize, budget: usize) -> Vec<Vec<[f64; 3]>> {
    let z = [0.0, 0.0, 1.0];
    let ring = |count: usize, theta: f64, offset: f64| -> Vec<[f64; 3]> {
        (0..count)
            .map(|i| {
                let phi = offset + 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                [
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ]
            })
            .collect()
    };
    let equator_size = if num_qubits <= 4 { 3 } else { 5 };
    let ring_size = num_qubits + 1;
    let thetas: Vec<f64> = (1..=13).map(|i| 0.1 + 0.1 * i as f64).collect();
    let mut families: Vec<Vec<[f64; 3]>> = Vec::new();
    families.push(vec![z]);
    families.push(vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], z]);
    let mut base = vec![z];
    base.extend(ring(equator_size, std::f64::consts::FRAC_PI_2, 0.0));
    families.push(base.clone());
    for &t1 in &[0.4, 0.7, 1.1] {
        let mut f = base.clone();
        f.extend(ring(ring_size, t1, 0.0));
        families.push(f);
    }
    for (t1, t2) in [(0.4, 1.1), (0.5, 1.0), (0.7, 1.2), (0.3, 0.9)] {
        let mut f = base.clone();
        f.extend(ring(ring_size, t1, 0.0));
        f.extend(ring(ring_size, t2, 0.5));
        families.push(f);
    }
    for (t1, t2, t3) in [(0.3, 0.8, 1.25), (0.4, 0.9, 1.3)] {
        let mut f = base.clone();
        f.extend(ring(ring_size, t1, 0.0));
        f.extend(ring(ring_size, t2, 0.5));
        f.extend(ring(ring_size, t3, 1.0));
        families.push(f);
    }
    // generic fallback: a full latitude-azimuth grid
    let mut grid = vec![z];
    for (li, &t) in thetas.iter().take(num_qubits + 1).enumerate() {
        grid.extend(ring(ring_size, t, 0.37 * li as f64));
    }
    families.push(grid);
    families.retain(|f| f.len() <= budget);
    families.sort_by_key(|f| f.len());
    families
}

/// Decomposes a permutation-symmetric observable into at most `budget`
/// measurement directions with per-direction symmetric-power weights, such
/// that the recombined operator matches within `tol` entrywise. Families of
/// directions are tried from smallest to largest; per-body-order weights are
/// fitted by least squares.
pub fn decompose_settings(
    target: &Observable,
    budget: usize,
    tol: f64,
) -> Result<SettingDecomposition> {
    let n = target.num_qubits();
    let classes = symmetric_class_coefficients(target)?;
    let constant = classes.get(&(0, 0, 0)).copied().unwrap_or(0.0);
    let mut best_residual = f64::INFINITY;
    for family in candidate_families(n, budget) {
        let mut coefficients = vec![vec![0.0; n + 1]; family.len()];
        let mut ls_residual: f64 = 0.0;
        for k in 1..=n {
            let mut rows: Vec<Vec<f64>> = Vec::new();
            let mut rhs: Vec<f64> = Vec::new();
            for a in 0..=k {
                for b in 0..=(k - a) {
                    let c = k - a - b;
                    rows.push(
                        family
                            .iter()
                            .map(|d| d[0].powi(a as i32) * d[1].powi(b as i32) * d[2].powi(c as i32))
                            .collect(),
                    );
                    rhs.push(classes.get(&(a, b, c)).copied().unwrap_or(0.0));
                }
            }
            let nrows = rows.len();
            let amat = DMatrix::from_fn(nrows, family.len(), |r, c| rows[r][c]);
            let yvec = DVector::from_vec(rhs);
            let svd = amat.clone().svd(true, true);
            let sol = svd
                .solve(&yvec, 1e-12)
                .map_err(|e| Error::InvalidState(format!("least squares failed: {e}")))?;
            let res = (&amat * &sol - &yvec).norm();
            ls_residual = ls_residual.max(res);
            for (j, c) in sol.iter().enumerate() {
                coefficients[j][k] = if c.abs() > 1e-12 { *c } else { 0.0 };
            }
        }
        if ls_residual > tol {
            best_residual = best_residual.min(ls_residual);
            continue;
        }
        let candidate = SettingDecomposition {
            directions: family,
            coefficients,
            constant,
            residual: ls_residual,
        };
        let rebuilt = candidate.recombine(n)?;
        let entrywise = (target.matrix() - rebuilt.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        best_residual = best_residual.min(entrywise);
        if entrywise <= tol {
            let mut refined = candidate;
            refined.residual = entrywise;
            return Ok(refined);
        }
    }
    Err(Error::DecompositionBudget {
        budget,
        residual: best_residual,
    })
}
