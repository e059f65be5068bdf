//! Measurement settings, detector efficiencies and synthetic count data.
//!
//! A setting fixes one analysis basis per mode; an outcome is the pattern of
//! which of the two detectors fired in each mode, encoded like a basis state
//! (mode 0 in the most significant bit, bit 0 for the first detector).

use nalgebra::{DMatrix, Matrix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::linalg::C64;
use crate::qcore::{Axis, StateRef};
use crate::{Error, Result};

/// Analysis basis for a single mode: a Pauli axis or an arbitrary Bloch
/// direction `(theta, phi)` whose first outcome projects onto
/// `cos(theta/2)|H> + e^{i phi} sin(theta/2)|V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeBasis {
    Axis(Axis),
    Direction { theta: f64, phi: f64 },
}

impl ModeBasis {
    /// Basis-change matrix whose rows are the bras of the two detector
    /// outcomes, first detector first.
    pub fn rows(&self) -> Matrix2<C64> {
        match self {
            ModeBasis::Axis(axis) => axis.basis_rows(),
            ModeBasis::Direction { theta, phi } => {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let e = C64::from_polar(1.0, -phi);
                Matrix2::new(
                    C64::new(c, 0.0),
                    e * s,
                    C64::new(s, 0.0),
                    -e * c,
                )
            }
        }
    }

    /// Unit vector on the Bloch sphere that the first outcome points along.
    pub fn bloch_vector(&self) -> [f64; 3] {
        match self {
            ModeBasis::Axis(Axis::X) => [1.0, 0.0, 0.0],
            ModeBasis::Axis(Axis::Y) => [0.0, 1.0, 0.0],
            ModeBasis::Axis(Axis::Z) => [0.0, 0.0, 1.0],
            ModeBasis::Direction { theta, phi } => [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ],
        }
    }

    /// Basis along an arbitrary Bloch vector (need not be normalized).
    pub fn from_bloch(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidArgument(
                "zero Bloch vector has no direction".into(),
            ));
        }
        Ok(ModeBasis::Direction {
            theta: (v[2] / norm).clamp(-1.0, 1.0).acos(),
            phi: v[1].atan2(v[0]),
        })
    }

    pub fn is_axis(&self, axis: Axis) -> bool {
        matches!(self, ModeBasis::Axis(a) if *a == axis)
    }

    fn describe(&self) -> String {
        match self {
            ModeBasis::Axis(a) => a.name().to_string(),
            ModeBasis::Direction { theta, phi } => format!("({theta:.4},{phi:.4})"),
        }
    }
}

/// One measurement configuration: an analysis basis for every mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    bases: Vec<ModeBasis>,
}

impl Setting {
    pub fn new(bases: Vec<ModeBasis>) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::InvalidArgument("setting with no modes".into()));
        }
        if bases.len() > crate::MAX_QUBITS {
            return Err(Error::Capacity {
                qubits: bases.len(),
                max: crate::MAX_QUBITS,
            });
        }
        Ok(Self { bases })
    }

    /// The same basis in every mode.
    pub fn uniform(num_modes: usize, basis: ModeBasis) -> Result<Self> {
        Self::new(vec![basis; num_modes])
    }

    pub fn axis(num_modes: usize, axis: Axis) -> Result<Self> {
        Self::uniform(num_modes, ModeBasis::Axis(axis))
    }

    pub fn num_modes(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[ModeBasis] {
        &self.bases
    }

    /// Shared Bloch vector if every mode uses the same basis.
    pub fn uniform_bloch_vector(&self) -> Option<[f64; 3]> {
        let first = self.bases[0].bloch_vector();
        let close = |a: [f64; 3], b: [f64; 3]| {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() < 1e-18
        };
        self.bases
            .iter()
            .all(|b| close(b.bloch_vector(), first))
            .then_some(first)
    }

    /// Full basis-change matrix, the tensor product of the per-mode rows.
    pub fn unitary(&self) -> DMatrix<C64> {
        let mut u = DMatrix::<C64>::identity(1, 1);
        for basis in &self.bases {
            let rows = basis.rows();
            let m = DMatrix::from_fn(2, 2, |i, j| rows[(i, j)]);
            u = u.kronecker(&m);
        }
        u
    }

    pub fn describe(&self) -> String {
        if let Some(basis) = self.bases.iter().skip(1).all(|b| b == &self.bases[0]).then(|| &self.bases[0]) {
            basis.describe()
        } else {
            self.bases.iter().map(|b| b.describe()).collect::<Vec<_>>().join(",")
        }
    }
}

/// Probability of each detector-firing pattern when measuring `state` in
/// `setting`, before any detector imperfections.
pub fn outcome_probabilities(state: StateRef<'_>, setting: &Setting) -> Result<Vec<f64>> {
    let n = state.num_qubits();
    if n != setting.num_modes() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: setting.num_modes(),
        });
    }
    let u = setting.unitary();
    match state {
        StateRef::Pure(psi) => {
            let v = &u * psi.amplitudes();
            Ok(v.iter().map(|a| a.norm_sqr()).collect())
        }
        StateRef::Mixed(rho) => {
            let m = &u * rho.matrix() * u.adjoint();
            Ok((0..m.nrows()).map(|i| m[(i, i)].re.max(0.0)).collect())
        }
    }
}

/// Detection efficiency of each detector, indexed by mode and outcome bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorEfficiencies {
    pub values: Vec<[f64; 2]>,
}

impl DetectorEfficiencies {
    pub fn new(values: Vec<[f64; 2]>) -> Result<Self> {
        for pair in &values {
            for &e in pair {
                if !(e > 0.0 && e <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "detector efficiency {e} outside (0, 1]"
                    )));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn uniform(num_modes: usize, efficiency: f64) -> Result<Self> {
        Self::new(vec![[efficiency; 2]; num_modes])
    }

    pub fn num_modes(&self) -> usize {
        self.values.len()
    }

    /// Joint efficiency of the detector combination firing for `outcome`:
    /// the product over modes of the efficiency of whichever detector fired.
    pub fn outcome_weight(&self, outcome: usize) -> f64 {
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(m, pair)| pair[(outcome >> (n - 1 - m)) & 1])
            .product()
    }
}

/// Expected counts per outcome for a run of `events` prepared states:
/// `events * p(outcome) * efficiency(outcome)`. Lost events simply drop out,
/// so the bins sum to less than `events`.
pub fn expected_counts(
    state: StateRef<'_>,
    setting: &Setting,
    efficiencies: &DetectorEfficiencies,
    events: f64,
) -> Result<Vec<f64>> {
    if efficiencies.num_modes() != setting.num_modes() {
        return Err(Error::DimensionMismatch {
            left: efficiencies.num_modes(),
            right: setting.num_modes(),
        });
    }
    let probs = outcome_probabilities(state, setting)?;
    Ok(probs
        .iter()
        .enumerate()
        .map(|(o, p)| events * p * efficiencies.outcome_weight(o))
        .collect())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn bin_key(seed: u64, setting_index: u64, bin: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ setting_index) ^ bin)
}

/// Draws one Poisson count per bin. Each bin gets its own stream keyed by
/// `(seed, setting_index, bin)`, so histograms are reproducible and
/// independent of evaluation order.
pub fn sample_histogram(expected: &[f64], seed: u64, setting_index: u64) -> Vec<f64> {
    expected
        .iter()
        .enumerate()
        .map(|(bin, &lambda)| {
            if lambda <= 0.0 {
                return 0.0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(bin_key(seed, setting_index, bin as u64));
            // rand_distr 0.4 returns -1 when exp(-lambda) rounds to 1.0; at
            // such tiny means the true draw is 0, so clamp.
            Poisson::new(lambda)
                .expect("positive finite mean")
                .sample(&mut rng)
                .max(0.0)
        })
        .collect()
}

/// Counts recorded for one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSetting {
    pub setting: Setting,
    pub counts: Vec<f64>,
}

/// Simulates a full run: for each setting, Poisson counts around the
/// expected histogram of `events` prepared states.
pub fn simulate_run(
    state: StateRef<'_>,
    settings: &[Setting],
    efficiencies: &DetectorEfficiencies,
    events: f64,
    seed: u64,
) -> Result<Vec<MeasuredSetting>> {
    settings
        .iter()
        .enumerate()
        .map(|(idx, setting)| {
            let expected = expected_counts(state, setting, efficiencies, events)?;
            Ok(MeasuredSetting {
                setting: setting.clone(),
                counts: sample_histogram(&expected, seed, idx as u64),
            })
        })
        .collect()
}

/// The noiseless limit of [`simulate_run`]: counts equal to their
/// expectations, useful for validating estimators.
pub fn exact_run(
    state: StateRef<'_>,
    settings: &[Setting],
    efficiencies: &DetectorEfficiencies,
    events: f64,
) -> Result<Vec<MeasuredSetting>> {
    settings
        .iter()
        .map(|setting| {
            Ok(MeasuredSetting {
                setting: setting.clone(),
                counts: expected_counts(state, setting, efficiencies, events)?,
            })
        })
        .collect()
}
