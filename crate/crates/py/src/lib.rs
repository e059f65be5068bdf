//! Python bindings for the dicke6 toolkit.
//!
//! The module mirrors the Rust API at the level most analyses use it:
//! states, observables and witnesses, the splitter-tree source model, and
//! the counting pipeline with error propagation. Amplitudes cross the
//! boundary as Python complex numbers; axes and witness kinds as short
//! strings ("x", "j2", ...).

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use dicke6::analysis::{self, ErrorMethod, WitnessKind};
use dicke6::collective;
use dicke6::measure::{DetectorEfficiencies, Setting};
use dicke6::photonics::{self, SplitterTree, TreeNode};
use dicke6::qcore::{self, Axis, MixedState, Observable, PureState, StateRef};
use dicke6::states;
use dicke6::witness::{self, SettingDecomposition};

fn to_py(e: dicke6::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_axis(name: &str) -> PyResult<Axis> {
    match name {
        "x" | "X" => Ok(Axis::X),
        "y" | "Y" => Ok(Axis::Y),
        "z" | "Z" => Ok(Axis::Z),
        other => Err(PyValueError::new_err(format!(
            "axis {other:?} (expected \"x\", \"y\" or \"z\")"
        ))),
    }
}

fn parse_witness_kind(name: &str) -> PyResult<WitnessKind> {
    match name {
        "j2" => Ok(WitnessKind::TransverseSpin {
            alpha: witness::J2_ALPHA_6,
        }),
        "moments" => Ok(WitnessKind::Moments),
        "ghz" => Ok(WitnessKind::GhzTwoSetting),
        other => Err(PyValueError::new_err(format!(
            "witness kind {other:?} (expected \"j2\", \"moments\" or \"ghz\")"
        ))),
    }
}

/// A normalized pure state on up to eight qubits.
#[pyclass(frozen, from_py_object, name = "PureState")]
#[derive(Clone)]
struct PyPureState {
    inner: PureState,
}

#[pymethods]
impl PyPureState {
    /// Builds a state from amplitudes (normalized on construction).
    #[new]
    fn new(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(PyValueError::new_err(format!(
                "amplitude vector of length {dim} is not a qubit register"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        Ok(Self {
            inner: PureState::from_unnormalized(n, amplitudes).map_err(to_py)?,
        })
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().iter().copied().collect()
    }

    /// Inner product `<self|other>`.
    fn inner(&self, other: &PyPureState) -> Complex64 {
        self.inner.inner(&other.inner)
    }

    /// Squared overlap `|<self|other>|^2`.
    fn overlap_sq(&self, other: &PyPureState) -> f64 {
        self.inner.overlap_sq(&other.inner)
    }

    /// Norm distance to `other` minimized over a global phase.
    fn distance_up_to_phase(&self, other: &PyPureState) -> f64 {
        self.inner.distance_up_to_phase(&other.inner)
    }

    fn expect(&self, observable: &PyObservable) -> PyResult<f64> {
        self.inner.expect(&observable.inner).map_err(to_py)
    }

    /// Projects one qubit onto the direction `h|H> + v|V>` (normalized
    /// internally) and returns the remaining state with the outcome
    /// probability.
    fn project(
        &self,
        qubit: usize,
        h: Complex64,
        v: Complex64,
    ) -> PyResult<(PyPureState, f64)> {
        let direction = PureState::qubit(h, v).map_err(to_py)?;
        let (rest, prob) = qcore::project_qubit(&self.inner, qubit, &direction).map_err(to_py)?;
        Ok((PyPureState { inner: rest }, prob))
    }

    /// The state with every qubit rotated into the measurement frame of
    /// `axis`.
    fn rotated(&self, axis: &str) -> PyResult<PyPureState> {
        Ok(PyPureState {
            inner: qcore::rotate_all(&self.inner, parse_axis(axis)?),
        })
    }

    fn to_density(&self) -> PyMixedState {
        PyMixedState {
            inner: self.inner.to_density(),
        }
    }

    fn __repr__(&self) -> String {
        format!("PureState(num_qubits={})", self.inner.num_qubits())
    }
}

/// A density operator on up to eight qubits.
#[pyclass(frozen, from_py_object, name = "MixedState")]
#[derive(Clone)]
struct PyMixedState {
    inner: MixedState,
}

#[pymethods]
impl PyMixedState {
    /// The maximally mixed state on `num_qubits` qubits.
    #[staticmethod]
    fn maximally_mixed(num_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: MixedState::maximally_mixed(num_qubits).map_err(to_py)?,
        })
    }

    /// Convex mixture of `(weight, state)` parts, renormalized.
    #[staticmethod]
    fn mixture(parts: Vec<(f64, PyMixedState)>) -> PyResult<Self> {
        let parts: Vec<(f64, MixedState)> = parts.into_iter().map(|(w, s)| (w, s.inner)).collect();
        Ok(Self {
            inner: MixedState::mixture(&parts).map_err(to_py)?,
        })
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.matrix();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    fn expect(&self, observable: &PyObservable) -> PyResult<f64> {
        self.inner.expect(&observable.inner).map_err(to_py)
    }

    /// Overlap `<target|rho|target>` with a pure target.
    fn fidelity(&self, target: &PyPureState) -> PyResult<f64> {
        qcore::fidelity_with_pure(&self.inner, &target.inner).map_err(to_py)
    }

    fn purity(&self) -> f64 {
        let m = self.inner.matrix();
        (m * m).trace().re
    }

    /// Reduced state after tracing out the qubits in `drop`.
    fn partial_trace(&self, drop: Vec<usize>) -> PyResult<PyMixedState> {
        Ok(PyMixedState {
            inner: qcore::partial_trace(&self.inner, &drop).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("MixedState(num_qubits={})", self.inner.num_qubits())
    }
}

/// Either kind of state, wherever both are accepted.
#[derive(FromPyObject)]
enum AnyState {
    Pure(PyPureState),
    Mixed(PyMixedState),
}

impl AnyState {
    fn as_ref(&self) -> StateRef<'_> {
        match self {
            AnyState::Pure(p) => StateRef::Pure(&p.inner),
            AnyState::Mixed(m) => StateRef::Mixed(&m.inner),
        }
    }

    fn num_qubits(&self) -> usize {
        match self {
            AnyState::Pure(p) => p.inner.num_qubits(),
            AnyState::Mixed(m) => m.inner.num_qubits(),
        }
    }
}

/// A Hermitian operator on up to eight qubits.
#[pyclass(frozen, skip_from_py_object, name = "Observable")]
#[derive(Clone)]
struct PyObservable {
    inner: Observable,
}

#[pymethods]
impl PyObservable {
    #[staticmethod]
    fn identity(num_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Observable::identity(num_qubits).map_err(to_py)?,
        })
    }

    /// Rank-one projector `|state><state|`.
    #[staticmethod]
    fn projector(state: &PyPureState) -> Self {
        Self {
            inner: Observable::projector(&state.inner),
        }
    }

    /// Product of Pauli operators at `(site, axis)` pairs, identity
    /// elsewhere.
    #[staticmethod]
    fn pauli_string(num_qubits: usize, factors: Vec<(usize, String)>) -> PyResult<Self> {
        let factors: Vec<(usize, Axis)> = factors
            .iter()
            .map(|(site, axis)| Ok((*site, parse_axis(axis)?)))
            .collect::<PyResult<_>>()?;
        Ok(Self {
            inner: Observable::pauli_string(num_qubits, &factors).map_err(to_py)?,
        })
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.matrix();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    /// Eigenvalues in descending order.
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn __add__(&self, other: &PyObservable) -> PyResult<PyObservable> {
        Ok(PyObservable {
            inner: self.inner.add(&other.inner).map_err(to_py)?,
        })
    }

    fn __sub__(&self, other: &PyObservable) -> PyResult<PyObservable> {
        Ok(PyObservable {
            inner: self.inner.sub(&other.inner).map_err(to_py)?,
        })
    }

    fn __mul__(&self, factor: f64) -> PyObservable {
        PyObservable {
            inner: self.inner.scale(factor),
        }
    }

    fn __rmul__(&self, factor: f64) -> PyObservable {
        self.__mul__(factor)
    }

    fn __repr__(&self) -> String {
        match self.inner.label() {
            Some(label) => format!("Observable({label})"),
            None => format!("Observable(num_qubits={})", self.inner.num_qubits()),
        }
    }
}

/// Biseparable-bound optimization result.
#[pyclass(frozen, name = "BisepBound")]
struct PyBisepBound {
    #[pyo3(get)]
    value: f64,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    iterations: usize,
    /// Qubits on the left side of the best bipartition.
    #[pyo3(get)]
    cut: Vec<usize>,
}

#[pymethods]
impl PyBisepBound {
    fn __repr__(&self) -> String {
        format!(
            "BisepBound(value={}, converged={}, cut={:?})",
            self.value, self.converged, self.cut
        )
    }
}

/// Few-setting decomposition of an observable into symmetric powers of
/// collective spin directions.
#[pyclass(frozen, name = "Decomposition")]
struct PyDecomposition {
    inner: SettingDecomposition,
}

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn num_settings(&self) -> usize {
        self.inner.len()
    }

    /// Unit measurement directions (x, y, z).
    #[getter]
    fn directions(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .directions
            .iter()
            .map(|d| (d[0], d[1], d[2]))
            .collect()
    }

    /// `coefficients[j][k]` multiplies the k-body symmetric power of
    /// direction j (index 0 is unused; the constant is separate).
    #[getter]
    fn coefficients(&self) -> Vec<Vec<f64>> {
        self.inner.coefficients.clone()
    }

    #[getter]
    fn constant(&self) -> f64 {
        self.inner.constant
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    fn __repr__(&self) -> String {
        format!(
            "Decomposition(num_settings={}, residual={:.2e})",
            self.inner.len(),
            self.inner.residual
        )
    }
}

fn parse_tree(spec: &Bound<'_, PyAny>) -> PyResult<TreeNode> {
    if let Ok(leaf) = spec.extract::<usize>() {
        return Ok(TreeNode::Leaf(leaf));
    }
    let (ratio, first, second): (f64, Bound<'_, PyAny>, Bound<'_, PyAny>) =
        spec.extract().map_err(|_| {
            PyValueError::new_err(
                "tree spec must be a mode index or a (ratio, first, second) triple",
            )
        })?;
    Ok(TreeNode::split(
        ratio,
        parse_tree(&first)?,
        parse_tree(&second)?,
    ))
}

/// A beam-splitter tree distributing one input beam over six output modes.
#[pyclass(frozen, name = "SplitterTree")]
struct PySplitterTree {
    inner: SplitterTree,
}

#[pymethods]
impl PySplitterTree {
    /// Builds a tree from nested `(ratio, first, second)` triples with mode
    /// indices at the leaves.
    #[new]
    fn new(spec: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self {
            inner: SplitterTree::new(parse_tree(spec)?).map_err(to_py)?,
        })
    }

    /// The balanced tree splitting the beam evenly over all six modes.
    #[staticmethod]
    fn symmetric() -> Self {
        Self {
            inner: SplitterTree::symmetric(),
        }
    }

    /// The lopsided tree with the measured splitting ratios.
    #[staticmethod]
    fn reference() -> Self {
        Self {
            inner: SplitterTree::reference(),
        }
    }

    /// Per-mode transmission amplitudes, in mode order.
    fn leaf_amplitudes(&self) -> Vec<f64> {
        self.inner.leaf_amplitudes().to_vec()
    }

    /// Probability that three pairs herald a sixfold coincidence at unit
    /// detection efficiency.
    fn sixfold_probability(&self) -> f64 {
        photonics::ideal_sixfold_probability(&self.inner)
    }

    /// Postselected state and probability for a fixed number of pairs.
    #[pyo3(signature = (pairs, efficiency=1.0))]
    fn postselect(&self, pairs: usize, efficiency: f64) -> PyResult<(PyMixedState, f64)> {
        let out = photonics::postselect_sixfold(&self.inner, pairs, efficiency).map_err(to_py)?;
        Ok((PyMixedState { inner: out.state }, out.probability))
    }

    /// Modeled source state mixing the three- and four-pair contributions,
    /// with the total sixfold probability.
    #[pyo3(signature = (
        pair_weight_four=photonics::DEFAULT_PAIR_WEIGHT_FOUR,
        efficiency=photonics::DEFAULT_EFFICIENCY,
    ))]
    fn source(&self, pair_weight_four: f64, efficiency: f64) -> PyResult<(PyMixedState, f64)> {
        let (rho, prob) =
            photonics::source_state(&self.inner, pair_weight_four, efficiency).map_err(to_py)?;
        Ok((PyMixedState { inner: rho }, prob))
    }

    fn __repr__(&self) -> String {
        format!("SplitterTree(leaves={})", self.inner.leaf_amplitudes().len())
    }
}

/// The symmetric Dicke state with `excitations` vertically polarized
/// photons among `num_qubits`.
#[pyfunction]
fn dicke(num_qubits: usize, excitations: usize) -> PyResult<PyPureState> {
    Ok(PyPureState {
        inner: states::dicke(num_qubits, excitations).map_err(to_py)?,
    })
}

/// The GHZ state `(|0...0> + sign |1...1>)/sqrt(2)` with sign "+" or "-".
#[pyfunction]
#[pyo3(signature = (num_qubits, sign="+"))]
fn ghz(num_qubits: usize, sign: &str) -> PyResult<PyPureState> {
    let sign = match sign {
        "+" => states::Sign::Plus,
        "-" => states::Sign::Minus,
        other => {
            return Err(PyValueError::new_err(format!(
                "sign {other:?} (expected \"+\" or \"-\")"
            )))
        }
    };
    Ok(PyPureState {
        inner: states::ghz(num_qubits, sign).map_err(to_py)?,
    })
}

/// The W state (one excitation shared across all qubits).
#[pyfunction]
fn w_state(num_qubits: usize) -> PyResult<PyPureState> {
    Ok(PyPureState {
        inner: states::w_state(num_qubits).map_err(to_py)?,
    })
}

/// The computational basis state `|index>`.
#[pyfunction]
fn basis_state(num_qubits: usize, index: usize) -> PyResult<PyPureState> {
    Ok(PyPureState {
        inner: PureState::basis_state(num_qubits, index).map_err(to_py)?,
    })
}

/// Normalized superposition of `(coefficient, state)` parts.
#[pyfunction]
fn superpose(parts: Vec<(Complex64, PyPureState)>) -> PyResult<PyPureState> {
    let refs: Vec<(Complex64, &PureState)> =
        parts.iter().map(|(c, s)| (*c, &s.inner)).collect();
    Ok(PyPureState {
        inner: states::superpose(&refs).map_err(to_py)?,
    })
}

/// The collective operator `Jx^2 + Jy^2`.
#[pyfunction]
#[pyo3(signature = (num_qubits=6))]
fn transverse_j2(num_qubits: usize) -> PyResult<PyObservable> {
    Ok(PyObservable {
        inner: collective::transverse_j2(num_qubits).map_err(to_py)?,
    })
}

/// Expectation `<J_axis^power>` on a pure or mixed state.
#[pyfunction]
#[pyo3(signature = (state, axis, power=1))]
fn j_moment(state: AnyState, axis: &str, power: u32) -> PyResult<f64> {
    collective::j_moment(state.as_ref(), parse_axis(axis)?, power).map_err(to_py)
}

/// The two-setting witness `alpha - Jx^2 - Jy^2`.
#[pyfunction]
#[pyo3(signature = (num_qubits=6, alpha=witness::J2_ALPHA_6))]
fn j2_witness(num_qubits: usize, alpha: f64) -> PyResult<PyObservable> {
    Ok(PyObservable {
        inner: witness::j2_witness(num_qubits, alpha).map_err(to_py)?,
    })
}

/// The three-setting witness built from second and higher moments of the
/// collective spin.
#[pyfunction]
fn moments_witness() -> PyResult<PyObservable> {
    Ok(PyObservable {
        inner: witness::moments_witness().map_err(to_py)?,
    })
}

/// Fidelity lower bound implied by a moments-witness value.
#[pyfunction]
fn fidelity_bound_from_moments(witness_value: f64) -> f64 {
    witness::fidelity_bound_from_moments(witness_value)
}

/// The two-setting witness for the projected four-qubit GHZ state.
#[pyfunction]
fn ghz_two_setting_witness() -> PyResult<PyObservable> {
    Ok(PyObservable {
        inner: witness::ghz_two_setting_witness().map_err(to_py)?,
    })
}

/// The six-mode Bell operator whose local-realist bound is 0.4.
#[pyfunction]
fn bell_operator() -> PyResult<PyObservable> {
    Ok(PyObservable {
        inner: collective::bell_d63().map_err(to_py)?,
    })
}

/// Exact maximum of the Bell expectation over deterministic local
/// strategies, with the number of strategies enumerated.
#[pyfunction]
fn bell_lhv_max() -> (f64, usize) {
    collective::bell_lhv_max()
}

/// Best Bell expectation over locally rotated four-qubit GHZ states.
#[pyfunction]
#[pyo3(signature = (restarts=48, seed=3))]
fn bell_ghz_max(restarts: usize, seed: u64) -> f64 {
    collective::bell_ghz_max(restarts, seed)
}

/// Largest expectation of `observable` over biseparable product states,
/// maximized across every bipartition by an alternating eigenvector
/// see-saw.
#[pyfunction]
#[pyo3(signature = (observable, restarts=12, seed=7))]
fn optimize_bisep_bound(
    observable: &PyObservable,
    restarts: usize,
    seed: u64,
) -> PyResult<PyBisepBound> {
    let result = witness::optimize_bisep_bound(&observable.inner, restarts, seed).map_err(to_py)?;
    Ok(PyBisepBound {
        value: result.value,
        converged: result.converged,
        iterations: result.iterations,
        cut: result.cut.left().to_vec(),
    })
}

/// Decomposes an observable into few collective measurement settings.
#[pyfunction]
#[pyo3(signature = (observable, budget=21, tolerance=1e-9))]
fn decompose_settings(
    observable: &PyObservable,
    budget: usize,
    tolerance: f64,
) -> PyResult<PyDecomposition> {
    Ok(PyDecomposition {
        inner: witness::decompose_settings(&observable.inner, budget, tolerance).map_err(to_py)?,
    })
}

/// Reduced state of a pure state after tracing out the qubits in `drop`.
#[pyfunction]
fn partial_trace_pure(state: &PyPureState, drop: Vec<usize>) -> PyResult<PyMixedState> {
    Ok(PyMixedState {
        inner: qcore::partial_trace_pure(&state.inner, &drop).map_err(to_py)?,
    })
}

/// Simulates a witness measurement on `state` and returns the estimate
/// with its one-standard-deviation uncertainty.
///
/// `kind` selects the witness ("j2", "moments" or "ghz"); counts follow
/// Poisson statistics at `events` prepared states per setting unless
/// `exact` is set. `bootstrap` switches the error bar from linear
/// propagation to a parametric bootstrap with that many replicates.
#[pyfunction]
#[pyo3(signature = (state, kind, events, seed=0, efficiency=1.0, exact=false, bootstrap=None))]
fn simulate_witness(
    state: AnyState,
    kind: &str,
    events: f64,
    seed: u64,
    efficiency: f64,
    exact: bool,
    bootstrap: Option<usize>,
) -> PyResult<(f64, f64)> {
    let kind = parse_witness_kind(kind)?;
    let modes = state.num_qubits();
    let settings: Vec<Setting> = analysis::witness_settings(kind, modes).map_err(to_py)?;
    let detectors = DetectorEfficiencies::uniform(modes, efficiency).map_err(to_py)?;
    let data = if exact {
        dicke6::measure::exact_run(state.as_ref(), &settings, &detectors, events).map_err(to_py)?
    } else {
        dicke6::measure::simulate_run(state.as_ref(), &settings, &detectors, events, seed)
            .map_err(to_py)?
    };
    let method = match bootstrap {
        Some(replicates) => ErrorMethod::Bootstrap {
            replicates,
            seed: seed ^ 0x5eed,
        },
        None => ErrorMethod::Linear,
    };
    let estimate = analysis::propagate_error(&data, &detectors, 0.0, method, |d, e| {
        analysis::evaluate_witness_from_data(kind, d, e)
    })
    .map_err(to_py)?;
    Ok((estimate.value, estimate.sigma))
}

#[pymodule]
fn dicke6py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPureState>()?;
    m.add_class::<PyMixedState>()?;
    m.add_class::<PyObservable>()?;
    m.add_class::<PyBisepBound>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PySplitterTree>()?;
    m.add_function(wrap_pyfunction!(dicke, m)?)?;
    m.add_function(wrap_pyfunction!(ghz, m)?)?;
    m.add_function(wrap_pyfunction!(w_state, m)?)?;
    m.add_function(wrap_pyfunction!(basis_state, m)?)?;
    m.add_function(wrap_pyfunction!(superpose, m)?)?;
    m.add_function(wrap_pyfunction!(transverse_j2, m)?)?;
    m.add_function(wrap_pyfunction!(j_moment, m)?)?;
    m.add_function(wrap_pyfunction!(j2_witness, m)?)?;
    m.add_function(wrap_pyfunction!(moments_witness, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_bound_from_moments, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_two_setting_witness, m)?)?;
    m.add_function(wrap_pyfunction!(bell_operator, m)?)?;
    m.add_function(wrap_pyfunction!(bell_lhv_max, m)?)?;
    m.add_function(wrap_pyfunction!(bell_ghz_max, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_bisep_bound, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_settings, m)?)?;
    m.add_function(wrap_pyfunction!(partial_trace_pure, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_witness, m)?)?;
    m.add("J2_ALPHA_6", witness::J2_ALPHA_6)?;
    m.add("DEFAULT_PAIR_WEIGHT_FOUR", photonics::DEFAULT_PAIR_WEIGHT_FOUR)?;
    m.add("DEFAULT_EFFICIENCY", photonics::DEFAULT_EFFICIENCY)?;
    Ok(())
}
