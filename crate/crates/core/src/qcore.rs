//! Exact dense linear algebra for small multiqubit registers.
//!
//! Pure states, mixed states and observables over at most eight polarization
//! qubits, with the operations the rest of the crate is built from:
//! composition, projection, partial trace, fidelity, Schmidt spectra and
//! uniform local basis rotations.
//!
//! Conventions used throughout the crate:
//!
//! * qubit 0 is the **most significant bit** of a basis index;
//! * `|H> = |0>` and `|V> = |1>`;
//! * `|+/-> = (|H> +/- |V>)/sqrt(2)` and `|L/R> = (|H> +/- i|V>)/sqrt(2)`.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::linalg::{self, C64};
use crate::{Error, Result, ATOL, MAX_QUBITS};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit of `index` belonging to `qubit` under the qubit-0-is-MSB convention.
#[inline]
pub fn bit_of(index: usize, qubit: usize, num_qubits: usize) -> usize {
    (index >> (num_qubits - 1 - qubit)) & 1
}

/// Number of set bits, i.e. the number of `|V>` factors of a basis string.
#[inline]
pub fn excitation_count(index: usize) -> u32 {
    index.count_ones()
}

/// Inserts `bit` at position `qubit` into an index over `num_qubits - 1`
/// qubits, producing an index over `num_qubits` qubits.
#[inline]
pub fn insert_bit(reduced: usize, qubit: usize, bit: usize, num_qubits: usize) -> usize {
    let shift = num_qubits - 1 - qubit;
    let high = reduced >> shift;
    let low = reduced & ((1 << shift) - 1);
    (high << (shift + 1)) | (bit << shift) | low
}

/// Spreads the bits of `group_value` over the qubit positions in `positions`
/// (sorted ascending, first position receives the most significant group bit)
/// and returns the resulting full-register index.
#[inline]
pub fn scatter_bits(group_value: usize, positions: &[usize], num_qubits: usize) -> usize {
    let k = positions.len();
    let mut index = 0;
    for (j, &q) in positions.iter().enumerate() {
        let bit = (group_value >> (k - 1 - j)) & 1;
        index |= bit << (num_qubits - 1 - q);
    }
    index
}

fn check_capacity(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            qubits: num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Returns the real part of `z` after checking that the imaginary residue is
/// negligible relative to the magnitude of the value.
fn checked_real(z: C64) -> Result<f64> {
    if z.im.abs() > ATOL * z.re.abs().max(1.0) {
        return Err(Error::InvalidState(format!(
            "expected a real value, got imaginary residue {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// One of the three Cartesian measurement axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The Pauli matrix of this axis.
    pub fn pauli(self) -> Matrix2<C64> {
        let i = C64::new(0.0, 1.0);
        match self {
            Axis::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
            Axis::Y => Matrix2::new(ZERO, -i, i, ZERO),
            Axis::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    /// Basis-change matrix whose rows are the bras of the +1 and -1
    /// eigenvectors, so that `U|psi>` expresses `|psi>` in this axis's
    /// eigenbasis.
    pub fn basis_rows(self) -> Matrix2<C64> {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            // rows <+| and <-|
            Axis::X => Matrix2::new(s, s, s, -s),
            // rows <L| and <R| with |L/R> = (|H> +/- i|V>)/sqrt(2)
            Axis::Y => Matrix2::new(s, -s * i, s, s * i),
            Axis::Z => Matrix2::new(ONE, ZERO, ZERO, ONE),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// A normalized complex amplitude vector over the computational basis.
#[derive(Clone, Debug)]
pub struct PureState {
    num_qubits: usize,
    amps: DVector<C64>,
}

impl PureState {
    /// Builds a state from amplitudes that must already be normalized.
    pub fn new(num_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_capacity(num_qubits)?;
        if amps.len() != 1 << num_qubits {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector of length {} for {} qubits (expected {})",
                amps.len(),
                num_qubits,
                1 << num_qubits
            )));
        }
        let amps = DVector::from_vec(amps);
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > ATOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm2} deviates from 1 beyond tolerance"
            )));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Builds a state from unnormalized amplitudes by dividing out the norm.
    pub fn from_unnormalized(num_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        check_capacity(num_qubits)?;
        if amps.len() != 1 << num_qubits {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector of length {} for {} qubits",
                amps.len(),
                num_qubits
            )));
        }
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            num_qubits,
            amps: v / C64::new(norm, 0.0),
        })
    }

    /// The computational basis state `|index>`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        if index >= 1 << num_qubits {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Self::new(num_qubits, amps)
    }

    /// Single-qubit state `a|H> + b|V>` (normalized on construction).
    pub fn qubit(a: C64, b: C64) -> Result<Self> {
        Self::from_unnormalized(1, vec![a, b])
    }

    pub fn ket_h() -> Self {
        Self::qubit(ONE, ZERO).expect("|H> is well formed")
    }

    pub fn ket_v() -> Self {
        Self::qubit(ZERO, ONE).expect("|V> is well formed")
    }

    pub fn ket_plus() -> Self {
        Self::qubit(ONE, ONE).expect("|+> is well formed")
    }

    pub fn ket_minus() -> Self {
        Self::qubit(ONE, -ONE).expect("|-> is well formed")
    }

    /// `|L> = (|H> + i|V>)/sqrt(2)`.
    pub fn ket_l() -> Self {
        Self::qubit(ONE, C64::new(0.0, 1.0)).expect("|L> is well formed")
    }

    /// `|R> = (|H> - i|V>)/sqrt(2)`.
    pub fn ket_r() -> Self {
        Self::qubit(ONE, C64::new(0.0, -1.0)).expect("|R> is well formed")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// Kronecker product of the factors in declared qubit order.
    pub fn tensor(factors: &[PureState]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("tensor of zero factors".into()));
        }
        let total: usize = factors.iter().map(|f| f.num_qubits).sum();
        check_capacity(total)?;
        let mut amps = vec![ONE];
        for f in factors {
            let mut next = vec![ZERO; amps.len() * f.dim()];
            for (i, a) in amps.iter().enumerate() {
                for (j, b) in f.amps.iter().enumerate() {
                    next[i * f.dim() + j] = a * b;
                }
            }
            amps = next;
        }
        Self::new(total, amps)
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Squared overlap `|<self|other>|^2`.
    pub fn overlap_sq(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Norm distance to `other` minimized over a global phase.
    pub fn distance_up_to_phase(&self, other: &PureState) -> f64 {
        let ov = self.inner(other).norm();
        (2.0 - 2.0 * ov).max(0.0).sqrt()
    }

    /// Fixes the global phase so the first non-negligible amplitude is real
    /// and positive.
    pub fn normalized_phase(mut self) -> Self {
        if let Some(a) = self.amps.iter().find(|a| a.norm() > 1e-12) {
            let phase = a / C64::new(a.norm(), 0.0);
            let correction = phase.conj();
            for amp in self.amps.iter_mut() {
                *amp *= correction;
            }
        }
        self
    }

    /// Density operator `|self><self|`.
    pub fn to_density(&self) -> MixedState {
        let mat = &self.amps * self.amps.adjoint();
        MixedState {
            num_qubits: self.num_qubits,
            mat,
        }
    }

    /// Expectation value `<self|obs|self>`.
    pub fn expect(&self, obs: &Observable) -> Result<f64> {
        check_same(self.num_qubits, obs.num_qubits)?;
        let v = &obs.mat * &self.amps;
        checked_real(self.amps.dotc(&v))
    }
}

/// A Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Clone, Debug)]
pub struct MixedState {
    num_qubits: usize,
    mat: DMatrix<C64>,
}

impl MixedState {
    /// Validates Hermiticity, unit trace and positivity before wrapping.
    pub fn new(num_qubits: usize, mat: DMatrix<C64>) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1 << num_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix for {} qubits",
                mat.nrows(),
                mat.ncols(),
                num_qubits
            )));
        }
        let dev = hermitian_deviation(&mat);
        if dev > ATOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace: C64 = mat.diagonal().iter().sum();
        if (trace.re - 1.0).abs() > ATOL || trace.im.abs() > ATOL {
            return Err(Error::InvalidState(format!(
                "trace {trace} deviates from 1 beyond tolerance"
            )));
        }
        let min_eig = *linalg::hermitian_eigenvalues(&mat)
            .last()
            .expect("nonempty spectrum");
        if min_eig < -1e-8 {
            return Err(Error::InvalidState(format!(
                "matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { num_qubits, mat })
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.to_density()
    }

    /// The maximally mixed state `I / 2^N`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1 << num_qubits;
        let mat = DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        Ok(Self { num_qubits, mat })
    }

    /// Convex mixture of states; weights must be nonnegative and are
    /// normalized to sum to 1.
    pub fn mixture(parts: &[(f64, MixedState)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("mixture of zero parts".into()));
        }
        let n = parts[0].1.num_qubits;
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidArgument(
                "mixture weights must be nonnegative with positive sum".into(),
            ));
        }
        let dim = 1 << n;
        let mut mat = DMatrix::<C64>::zeros(dim, dim);
        for (w, rho) in parts {
            check_same(n, rho.num_qubits)?;
            mat += &rho.mat * C64::new(w / total, 0.0);
        }
        Ok(Self { num_qubits: n, mat })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    /// Expectation value `Tr(obs * self)`.
    pub fn expect(&self, obs: &Observable) -> Result<f64> {
        check_same(self.num_qubits, obs.num_qubits)?;
        let mut tr = ZERO;
        for i in 0..self.mat.nrows() {
            tr += obs.mat.row(i).dot(&self.mat.column(i).transpose());
        }
        checked_real(tr)
    }

    /// Distance `max_ij |self_ij - other_ij|`.
    pub fn entrywise_distance(&self, other: &MixedState) -> f64 {
        (&self.mat - &other.mat)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

fn hermitian_deviation(mat: &DMatrix<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..mat.nrows() {
        for j in i..mat.ncols() {
            dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A Hermitian operator used for witnesses, collective spins and Bell
/// operators.
#[derive(Clone, Debug)]
pub struct Observable {
    num_qubits: usize,
    mat: DMatrix<C64>,
    label: Option<String>,
}

impl Observable {
    pub fn new(num_qubits: usize, mat: DMatrix<C64>) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1 << num_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "{}x{} matrix for {} qubits",
                mat.nrows(),
                mat.ncols(),
                num_qubits
            )));
        }
        let dev = hermitian_deviation(&mat);
        if dev > ATOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self {
            num_qubits,
            mat,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1 << num_qubits;
        Ok(Self {
            num_qubits,
            mat: DMatrix::identity(dim, dim),
            label: Some("identity".into()),
        })
    }

    /// Rank-one projector `|state><state|` as an observable.
    pub fn projector(state: &PureState) -> Self {
        let mat = state.amplitudes() * state.amplitudes().adjoint();
        Self {
            num_qubits: state.num_qubits(),
            mat,
            label: None,
        }
    }

    /// Product of Pauli operators at the given sites, identity elsewhere.
    pub fn pauli_string(num_qubits: usize, factors: &[(usize, Axis)]) -> Result<Self> {
        check_capacity(num_qubits)?;
        let mut per_site: Vec<Option<Axis>> = vec![None; num_qubits];
        for &(site, axis) in factors {
            if site >= num_qubits {
                return Err(Error::InvalidArgument(format!(
                    "site {site} out of range for {num_qubits} qubits"
                )));
            }
            if per_site[site].is_some() {
                return Err(Error::InvalidArgument(format!(
                    "site {site} listed twice in Pauli string"
                )));
            }
            per_site[site] = Some(axis);
        }
        let mut mat = DMatrix::<C64>::identity(1, 1);
        for slot in &per_site {
            let f = match slot {
                Some(axis) => DMatrix::from_fn(2, 2, |i, j| axis.pauli()[(i, j)]),
                None => DMatrix::identity(2, 2),
            };
            mat = mat.kronecker(&f);
        }
        Self::new(num_qubits, mat)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Wraps a matrix known by construction to be Hermitian, skipping the
    /// entrywise check (used by internal hot paths).
    pub(crate) fn from_hermitian_unchecked(num_qubits: usize, mat: DMatrix<C64>) -> Self {
        Self {
            num_qubits,
            mat,
            label: None,
        }
    }

    /// Sum `self + other`.
    pub fn add(&self, other: &Observable) -> Result<Self> {
        check_same(self.num_qubits, other.num_qubits)?;
        Ok(Self::from_hermitian_unchecked(
            self.num_qubits,
            &self.mat + &other.mat,
        ))
    }

    /// Difference `self - other`.
    pub fn sub(&self, other: &Observable) -> Result<Self> {
        check_same(self.num_qubits, other.num_qubits)?;
        Ok(Self::from_hermitian_unchecked(
            self.num_qubits,
            &self.mat - &other.mat,
        ))
    }

    /// Scalar multiple `factor * self`.
    pub fn scale(&self, factor: f64) -> Self {
        Self::from_hermitian_unchecked(self.num_qubits, &self.mat * C64::new(factor, 0.0))
    }

    /// Matrix power by repeated exact multiplication.
    pub fn power(&self, exponent: u32) -> Self {
        let dim = self.mat.nrows();
        let mut out = DMatrix::<C64>::identity(dim, dim);
        for _ in 0..exponent {
            out = &out * &self.mat;
        }
        Self::from_hermitian_unchecked(self.num_qubits, out)
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.mat)
    }
}

/// Expectation value of an observable on a pure or mixed state.
pub fn expectation(state: StateRef<'_>, obs: &Observable) -> Result<f64> {
    match state {
        StateRef::Pure(psi) => psi.expect(obs),
        StateRef::Mixed(rho) => rho.expect(obs),
    }
}

/// Borrowed pure-or-mixed state, for operations accepting both.
#[derive(Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a MixedState),
}

impl StateRef<'_> {
    pub fn num_qubits(&self) -> usize {
        match self {
            StateRef::Pure(s) => s.num_qubits(),
            StateRef::Mixed(s) => s.num_qubits(),
        }
    }
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a MixedState> for StateRef<'a> {
    fn from(s: &'a MixedState) -> Self {
        StateRef::Mixed(s)
    }
}

/// Overlap `<target|rho|target>` of a mixed state with a pure target.
pub fn fidelity_with_pure(rho: &MixedState, target: &PureState) -> Result<f64> {
    check_same(rho.num_qubits, target.num_qubits())?;
    let v = rho.matrix() * target.amplitudes();
    let f = checked_real(target.amplitudes().dotc(&v))?;
    if !(-1e-9..=1.0 + 1e-9).contains(&f) {
        return Err(Error::InvalidState(format!(
            "fidelity {f} outside [0, 1] beyond slack"
        )));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Projects `qubit` of `state` onto `direction`, returning the renormalized
/// post-measurement state on the remaining qubits and the Born probability.
pub fn project_qubit(
    state: &PureState,
    qubit: usize,
    direction: &PureState,
) -> Result<(PureState, f64)> {
    if direction.num_qubits() != 1 {
        return Err(Error::InvalidArgument(
            "projection direction must be a single-qubit state".into(),
        ));
    }
    let n = state.num_qubits();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "projection needs at least two qubits to leave a remainder".into(),
        ));
    }
    if qubit >= n {
        return Err(Error::InvalidArgument(format!(
            "qubit {qubit} out of range for {n} qubits"
        )));
    }
    let d0 = direction.amp(0).conj();
    let d1 = direction.amp(1).conj();
    let mut reduced = vec![ZERO; 1 << (n - 1)];
    for (j, r) in reduced.iter_mut().enumerate() {
        let i0 = insert_bit(j, qubit, 0, n);
        let i1 = insert_bit(j, qubit, 1, n);
        *r = d0 * state.amp(i0) + d1 * state.amp(i1);
    }
    let prob: f64 = reduced.iter().map(|a| a.norm_sqr()).sum();
    if prob <= 1e-12 {
        return Err(Error::DegenerateOutcome { prob });
    }
    let scale = C64::new(prob.sqrt(), 0.0);
    for r in reduced.iter_mut() {
        *r /= scale;
    }
    Ok((PureState::new(n - 1, reduced)?, prob))
}

/// Reduced state after tracing out the qubits in `drop`.
pub fn partial_trace(rho: &MixedState, drop: &[usize]) -> Result<MixedState> {
    let n = rho.num_qubits();
    let drop = sorted_unique(drop, n)?;
    if drop.is_empty() {
        return Err(Error::InvalidArgument("no qubits to trace out".into()));
    }
    if drop.len() == n {
        return Err(Error::InvalidArgument("cannot trace out every qubit".into()));
    }
    let keep: Vec<usize> = (0..n).filter(|q| !drop.contains(q)).collect();
    let kd = 1 << keep.len();
    let dd = 1 << drop.len();
    let mut out = DMatrix::<C64>::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut sum = ZERO;
            for e in 0..dd {
                let row = scatter_bits(a, &keep, n) | scatter_bits(e, &drop, n);
                let col = scatter_bits(b, &keep, n) | scatter_bits(e, &drop, n);
                sum += rho.matrix()[(row, col)];
            }
            out[(a, b)] = sum;
        }
    }
    MixedState::new(keep.len(), out)
}

/// Partial trace of a pure state, without forming the full density matrix of
/// the input first.
pub fn partial_trace_pure(state: &PureState, drop: &[usize]) -> Result<MixedState> {
    partial_trace(&state.to_density(), drop)
}

/// A cut of the register into two nonempty complementary groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    num_qubits: usize,
    left: Vec<usize>,
}

impl Bipartition {
    pub fn new(num_qubits: usize, left: &[usize]) -> Result<Self> {
        check_capacity(num_qubits)?;
        let left = sorted_unique(left, num_qubits)?;
        if left.is_empty() || left.len() == num_qubits {
            return Err(Error::InvalidArgument(
                "both sides of a bipartition must be nonempty".into(),
            ));
        }
        Ok(Self { num_qubits, left })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> Vec<usize> {
        (0..self.num_qubits)
            .filter(|q| !self.left.contains(q))
            .collect()
    }

    /// All distinct cuts of an `num_qubits` register (the side containing
    /// qubit 0 is taken as the left side), e.g. 31 cuts for six qubits.
    pub fn all(num_qubits: usize) -> Result<Vec<Bipartition>> {
        check_capacity(num_qubits)?;
        let mut cuts = Vec::new();
        // Subsets of {1..N-1} joined with qubit 0, excluding the full set.
        for mask in 0..(1usize << (num_qubits - 1)) {
            let mut left = vec![0];
            for q in 1..num_qubits {
                if (mask >> (q - 1)) & 1 == 1 {
                    left.push(q);
                }
            }
            if left.len() < num_qubits {
                cuts.push(Bipartition::new(num_qubits, &left)?);
            }
        }
        Ok(cuts)
    }
}

fn sorted_unique(qubits: &[usize], num_qubits: usize) -> Result<Vec<usize>> {
    let mut v: Vec<usize> = qubits.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != qubits.len() {
        return Err(Error::InvalidArgument("duplicate qubit indices".into()));
    }
    if v.iter().any(|&q| q >= num_qubits) {
        return Err(Error::InvalidArgument(format!(
            "qubit index out of range for {num_qubits} qubits"
        )));
    }
    Ok(v)
}

/// Squared Schmidt coefficients of `state` across `cut`, descending.
pub fn schmidt_spectrum(state: &PureState, cut: &Bipartition) -> Result<Vec<f64>> {
    check_same(state.num_qubits(), cut.num_qubits())?;
    let n = state.num_qubits();
    let left = cut.left();
    let right = cut.right();
    let ld = 1 << left.len();
    let rd = 1 << right.len();
    let mut a = DMatrix::<C64>::zeros(ld, rd);
    for l in 0..ld {
        for r in 0..rd {
            let index = scatter_bits(l, left, n) | scatter_bits(r, &right, n);
            a[(l, r)] = state.amp(index);
        }
    }
    // Squared Schmidt coefficients are the eigenvalues of A A^dagger.
    let gram = &a * a.adjoint();
    let mut vals = linalg::hermitian_eigenvalues(&gram);
    vals.retain(|v| *v > 1e-14);
    vals.sort_by(|x, y| y.total_cmp(x));
    Ok(vals)
}

/// Applies the same single-qubit basis change to every qubit, mapping the
/// chosen axis's eigenvectors to the computational basis: the new amplitude
/// at a bitstring is the overlap of the corresponding eigenvector product
/// with the input state.
pub fn rotate_all(state: &PureState, axis: Axis) -> PureState {
    let n = state.num_qubits();
    let u = axis.basis_rows();
    let mut amps = state.amplitudes().clone();
    for q in 0..n {
        let mut next = DVector::<C64>::zeros(amps.len());
        for j in 0..amps.len() >> 1 {
            let i0 = insert_bit(j, q, 0, n);
            let i1 = insert_bit(j, q, 1, n);
            next[i0] = u[(0, 0)] * amps[i0] + u[(0, 1)] * amps[i1];
            next[i1] = u[(1, 0)] * amps[i0] + u[(1, 1)] * amps[i1];
        }
        amps = next;
    }
    PureState {
        num_qubits: n,
        amps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn index_helpers_follow_msb_convention() {
        // |HVH| -> index 0b010: qubit 1 carries the V.
        assert_eq!(bit_of(0b010, 1, 3), 1);
        assert_eq!(bit_of(0b010, 0, 3), 0);
        assert_eq!(bit_of(0b010, 2, 3), 0);
        assert_eq!(insert_bit(0b01, 0, 1, 3), 0b101);
        assert_eq!(insert_bit(0b10, 2, 1, 3), 0b101);
        assert_eq!(scatter_bits(0b10, &[0, 2], 3), 0b100);
        assert_eq!(scatter_bits(0b01, &[0, 2], 3), 0b001);
    }

    #[test]
    fn tensor_of_basis_states() {
        let hv = PureState::tensor(&[PureState::ket_h(), PureState::ket_v()]).unwrap();
        assert_eq!(hv.amplitudes().as_slice(), &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let pp = PureState::tensor(&[PureState::ket_plus(), PureState::ket_plus()]).unwrap();
        for a in pp.amplitudes().iter() {
            assert_relative_eq!(a.re, 0.5, epsilon = 1e-12);
            assert_relative_eq!(a.im, 0.0, epsilon = 1e-12);
        }

        let six_h = PureState::tensor(&vec![PureState::ket_h(); 6]).unwrap();
        assert_relative_eq!(six_h.amp(0).re, 1.0, epsilon = 1e-12);
        assert_eq!(six_h.dim(), 64);
        assert!((six_h.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_capacity_is_enforced() {
        let nine = vec![PureState::ket_h(); 9];
        assert!(matches!(
            PureState::tensor(&nine),
            Err(Error::Capacity { qubits: 9, .. })
        ));
    }

    #[test]
    fn projection_of_bell_state() {
        // (|HH> + |VV>)/sqrt(2), project qubit 0 onto |H|.
        let bell = PureState::from_unnormalized(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let (rest, p) = project_qubit(&bell, 0, &PureState::ket_h()).unwrap();
        assert_relative_eq!(p, 0.5, epsilon = 1e-12);
        assert!(rest.distance_up_to_phase(&PureState::ket_h()) < 1e-12);

        // Projecting |H> part of |HV> onto |V> has zero probability.
        let hv = PureState::tensor(&[PureState::ket_h(), PureState::ket_v()]).unwrap();
        assert!(matches!(
            project_qubit(&hv, 0, &PureState::ket_v()),
            Err(Error::DegenerateOutcome { .. })
        ));
    }

    #[test]
    fn projection_probabilities_sum_to_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let amps: Vec<C64> = (0..16)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let psi = PureState::from_unnormalized(4, amps).unwrap();
            let d = PureState::qubit(c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen())).unwrap();
            let d_perp = PureState::qubit(-d.amp(1).conj(), d.amp(0).conj()).unwrap();
            let q = rng.gen_range(0..4);
            let p0 = project_qubit(&psi, q, &d).map(|(_, p)| p).unwrap_or(0.0);
            let p1 = project_qubit(&psi, q, &d_perp).map(|(_, p)| p).unwrap_or(0.0);
            assert_relative_eq!(p0 + p1, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_products() {
        let hp = PureState::tensor(&[PureState::ket_h(), PureState::ket_plus()]).unwrap();
        let reduced = partial_trace_pure(&hp, &[0]).unwrap();
        let plus = PureState::ket_plus().to_density();
        assert!(reduced.entrywise_distance(&plus) < 1e-12);

        // Complementary reductions of a pure state share their spectrum.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let amps: Vec<C64> = (0..32)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let psi = PureState::from_unnormalized(5, amps).unwrap();
        let left = partial_trace_pure(&psi, &[0, 3]).unwrap();
        let right = partial_trace_pure(&psi, &[1, 2, 4]).unwrap();
        let mut sl = Observable::from_hermitian_unchecked(3, left.matrix().clone()).eigenvalues();
        let mut sr = Observable::from_hermitian_unchecked(2, right.matrix().clone()).eigenvalues();
        sl.retain(|v| *v > 1e-12);
        sr.retain(|v| *v > 1e-12);
        assert_eq!(sl.len(), sr.len());
        for (a, b) in sl.iter().zip(sr.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn schmidt_spectrum_of_product_and_bell() {
        let prod = PureState::tensor(&[PureState::ket_plus(), PureState::ket_v()]).unwrap();
        let cut = Bipartition::new(2, &[0]).unwrap();
        let s = schmidt_spectrum(&prod, &cut).unwrap();
        assert_eq!(s.len(), 1);
        assert_relative_eq!(s[0], 1.0, epsilon = 1e-10);

        let bell = PureState::from_unnormalized(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let s = schmidt_spectrum(&bell, &cut).unwrap();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s[0], 0.5, epsilon = 1e-10);
        assert_relative_eq!(s[1], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn rotate_all_maps_plus_to_zero() {
        let plus6 = PureState::tensor(&vec![PureState::ket_plus(); 6]).unwrap();
        let rotated = rotate_all(&plus6, Axis::X);
        let zero6 = PureState::basis_state(6, 0).unwrap();
        assert!(rotated.distance_up_to_phase(&zero6) < 1e-7);

        let l = PureState::ket_l();
        let rot = rotate_all(&l, Axis::Y);
        assert!(rot.distance_up_to_phase(&PureState::ket_h()) < 1e-12);
    }

    #[test]
    fn expectation_checks_hermiticity_and_dimensions() {
        let dim_mismatch = PureState::ket_h()
            .expect(&Observable::identity(2).unwrap());
        assert!(matches!(dim_mismatch, Err(Error::DimensionMismatch { .. })));

        let m = DMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(Observable::new(1, m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let h = PureState::ket_h();
        let rho = h.to_density();
        assert_relative_eq!(fidelity_with_pure(&rho, &h).unwrap(), 1.0, epsilon = 1e-12);

        let mixed = MixedState::maximally_mixed(2).unwrap();
        let bell = PureState::from_unnormalized(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(fidelity_with_pure(&mixed, &bell).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn mixture_validates_and_normalizes() {
        let a = PureState::ket_h().to_density();
        let b = PureState::ket_v().to_density();
        let m = MixedState::mixture(&[(3.0, a), (1.0, b)]).unwrap();
        assert_relative_eq!(m.matrix()[(0, 0)].re, 0.75, epsilon = 1e-12);
        assert_relative_eq!(m.matrix()[(1, 1)].re, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn bipartition_enumeration_counts() {
        assert_eq!(Bipartition::all(6).unwrap().len(), 31);
        assert_eq!(Bipartition::all(2).unwrap().len(), 1);
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(3, &[]).is_err());
    }

    #[test]
    fn pauli_string_anticommutation() {
        let xy = Observable::pauli_string(1, &[(0, Axis::X)]).unwrap();
        let y = Observable::pauli_string(1, &[(0, Axis::Y)]).unwrap();
        let prod = xy.matrix() * y.matrix();
        let back = y.matrix() * xy.matrix();
        assert!((prod + back).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }
}
