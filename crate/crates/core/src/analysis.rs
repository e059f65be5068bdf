//! Estimation pipeline from count histograms to physical quantities.
//!
//! All estimators share one primitive: a ratio estimate over detector-pattern
//! bins in which each count is reweighted by the inverse efficiency of its
//! detector combination, so unequal detectors drop out of expectation values
//! without renormalizing the data first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::collective::bell_terms;
use crate::measure::{bin_key, DetectorEfficiencies, MeasuredSetting, ModeBasis, Setting};
use crate::qcore::Axis;
use crate::witness::SettingDecomposition;
use crate::{Error, Result};

/// Sign of each mode's outcome: +1 when the first detector fired.
pub fn outcome_signs(outcome: usize, num_modes: usize) -> Vec<f64> {
    (0..num_modes)
        .map(|m| {
            if (outcome >> (num_modes - 1 - m)) & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// All elementary symmetric polynomials `e_0..e_n` of the given values,
/// built up through the product of `(1 + v·x)` factors.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

fn half_spin_sum(outcome: usize, num_modes: usize) -> f64 {
    let ones = (outcome & ((1 << num_modes) - 1)).count_ones() as f64;
    (num_modes as f64 - 2.0 * ones) / 2.0
}

/// Efficiency-corrected ratio estimate of a per-outcome quantity `value`;
/// outcomes mapped to `None` are excluded from numerator and denominator,
/// which turns the estimate into a conditional expectation.
pub fn ratio_estimate(
    counts: &[f64],
    efficiencies: &DetectorEfficiencies,
    value: impl Fn(usize) -> Option<f64>,
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (o, &n) in counts.iter().enumerate() {
        if let Some(g) = value(o) {
            let w = n / efficiencies.outcome_weight(o);
            num += g * w;
            den += w;
        }
    }
    if den <= 0.0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(num / den)
}

/// Estimates the given power of the collective half-spin sum along the
/// measured direction.
pub fn estimate_moment(
    measured: &MeasuredSetting,
    efficiencies: &DetectorEfficiencies,
    power: u32,
) -> Result<f64> {
    let n = measured.setting.num_modes();
    ratio_estimate(&measured.counts, efficiencies, |o| {
        Some(half_spin_sum(o, n).powi(power as i32))
    })
}

/// Estimates the k-body symmetrized correlation along the measured
/// direction: the k-th elementary symmetric polynomial of the outcome signs.
pub fn estimate_symmetrized_power(
    measured: &MeasuredSetting,
    efficiencies: &DetectorEfficiencies,
    k: usize,
) -> Result<f64> {
    let n = measured.setting.num_modes();
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "{k}-body correlation from {n} modes"
        )));
    }
    ratio_estimate(&measured.counts, efficiencies, |o| {
        Some(elementary_symmetric(&outcome_signs(o, n))[k])
    })
}

/// Estimates the full product of outcome signs over all modes.
pub fn estimate_full_parity(
    measured: &MeasuredSetting,
    efficiencies: &DetectorEfficiencies,
) -> Result<f64> {
    let n = measured.setting.num_modes();
    ratio_estimate(&measured.counts, efficiencies, |o| {
        Some(outcome_signs(o, n).iter().product())
    })
}

/// Witness evaluated directly from count data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessKind {
    /// `alpha - <Jx^2> - <Jy^2>` from the x and y histograms.
    TransverseSpin { alpha: f64 },
    /// The three-setting collective-moment witness from x, y and z
    /// histograms.
    Moments,
    /// The two-setting GHZ witness on the four free modes after projecting
    /// the two direction-analyzed modes onto their first outcome.
    GhzTwoSetting,
}

fn find_axis_setting<'a>(
    data: &'a [MeasuredSetting],
    axis: Axis,
) -> Result<&'a MeasuredSetting> {
    data.iter()
        .find(|ms| ms.setting.bases().iter().all(|b| b.is_axis(axis)))
        .ok_or_else(|| Error::MissingSettings(format!("uniform {} histogram", axis.name())))
}

/// Free (axis-analyzed) modes of a projected-GHZ setting whose remaining
/// modes all use `rest`; `None` when the setting has a different shape.
fn ghz_free_modes(setting: &Setting, rest: Axis) -> Option<Vec<usize>> {
    let mut free = Vec::new();
    let mut pinned = 0usize;
    for (m, b) in setting.bases().iter().enumerate() {
        match b {
            ModeBasis::Direction { .. } => pinned += 1,
            ModeBasis::Axis(a) if *a == rest => free.push(m),
            _ => return None,
        }
    }
    (pinned == 2 && free.len() + 2 == setting.num_modes()).then_some(free)
}

fn conditioned_ghz_estimate(
    measured: &MeasuredSetting,
    efficiencies: &DetectorEfficiencies,
    free: &[usize],
    value: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    let n = measured.setting.num_modes();
    ratio_estimate(&measured.counts, efficiencies, |o| {
        let signs = outcome_signs(o, n);
        for m in 0..n {
            if !free.contains(&m) && signs[m] < 0.0 {
                return None; // projection failed in a pinned mode
            }
        }
        let free_signs: Vec<f64> = free.iter().map(|&m| signs[m]).collect();
        Some(value(&free_signs))
    })
}

/// Evaluates a witness of the given kind from measured histograms,
/// returning the witness expectation value (negative detects entanglement).
pub fn evaluate_witness_from_data(
    kind: WitnessKind,
    data: &[MeasuredSetting],
    efficiencies: &DetectorEfficiencies,
) -> Result<f64> {
    match kind {
        WitnessKind::TransverseSpin { alpha } => {
            let x = estimate_moment(find_axis_setting(data, Axis::X)?, efficiencies, 2)?;
            let y = estimate_moment(find_axis_setting(data, Axis::Y)?, efficiencies, 2)?;
            Ok(alpha - x - y)
        }
        WitnessKind::Moments => {
            let rows: [(Axis, [f64; 3]); 3] = [
                (Axis::X, [-1.0 / 45.0, 1.0 / 36.0, -1.0 / 180.0]),
                (Axis::Y, [-1.0 / 45.0, 1.0 / 36.0, -1.0 / 180.0]),
                (Axis::Z, [1007.0 / 360.0, -31.0 / 36.0, 23.0 / 360.0]),
            ];
            let mut total = 1.5;
            for (axis, coeffs) in rows {
                let ms = find_axis_setting(data, axis)?;
                for (j, c) in coeffs.iter().enumerate() {
                    total += c * estimate_moment(ms, efficiencies, 2 * (j as u32 + 1))?;
                }
            }
            Ok(total)
        }
        WitnessKind::GhzTwoSetting => {
            let (z_ms, z_free) = data
                .iter()
                .find_map(|ms| ghz_free_modes(&ms.setting, Axis::Z).map(|f| (ms, f)))
                .ok_or_else(|| {
                    Error::MissingSettings("projected setting with z analysis".into())
                })?;
            let (x_ms, x_free) = data
                .iter()
                .find_map(|ms| ghz_free_modes(&ms.setting, Axis::X).map(|f| (ms, f)))
                .ok_or_else(|| {
                    Error::MissingSettings("projected setting with x analysis".into())
                })?;
            if z_free != x_free {
                return Err(Error::MissingSettings(
                    "projected settings pin different modes".into(),
                ));
            }
            let odd = conditioned_ghz_estimate(z_ms, efficiencies, &z_free, |s| {
                if s.iter().product::<f64>() < 0.0 {
                    1.0
                } else {
                    0.0
                }
            })?;
            let pop = conditioned_ghz_estimate(x_ms, efficiencies, &x_free, |s| {
                let all_equal = s.iter().all(|&v| v == s[0]);
                if all_equal {
                    1.0
                } else {
                    0.0
                }
            })?;
            Ok(1.5 - odd - pop)
        }
    }
}

/// Measurement settings the given witness kind expects, in the layout that
/// [`evaluate_witness_from_data`] looks for.
pub fn witness_settings(kind: WitnessKind, num_modes: usize) -> Result<Vec<Setting>> {
    match kind {
        WitnessKind::TransverseSpin { .. } => Ok(vec![
            Setting::axis(num_modes, Axis::X)?,
            Setting::axis(num_modes, Axis::Y)?,
        ]),
        WitnessKind::Moments => Ok(vec![
            Setting::axis(num_modes, Axis::X)?,
            Setting::axis(num_modes, Axis::Y)?,
            Setting::axis(num_modes, Axis::Z)?,
        ]),
        WitnessKind::GhzTwoSetting => {
            if num_modes < 3 {
                return Err(Error::InvalidArgument(
                    "projected GHZ witness needs at least three modes".into(),
                ));
            }
            let half_pi = std::f64::consts::FRAC_PI_2;
            let pinned = [
                ModeBasis::Direction {
                    theta: half_pi,
                    phi: -half_pi,
                },
                ModeBasis::Direction {
                    theta: half_pi,
                    phi: half_pi,
                },
            ];
            let build = |rest: Axis| -> Result<Setting> {
                let mut bases = vec![ModeBasis::Axis(rest); num_modes];
                bases[0] = pinned[0];
                bases[1] = pinned[1];
                Setting::new(bases)
            };
            Ok(vec![build(Axis::Z)?, build(Axis::X)?])
        }
    }
}

/// Fidelity estimate from local symmetric settings: the decomposition's
/// constant plus its weighted k-body correlations, each estimated from the
/// histogram taken along the matching direction.
pub fn estimate_fidelity(
    decomposition: &SettingDecomposition,
    data: &[MeasuredSetting],
    efficiencies: &DetectorEfficiencies,
) -> Result<f64> {
    let mut total = decomposition.constant;
    for (dir, coeffs) in decomposition
        .directions
        .iter()
        .zip(&decomposition.coefficients)
    {
        let needed = coeffs.iter().skip(1).any(|c| c.abs() > 0.0);
        if !needed {
            continue;
        }
        let ms = data
            .iter()
            .find(|ms| {
                ms.setting.uniform_bloch_vector().is_some_and(|v| {
                    v.iter()
                        .zip(dir)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        < 1e-12
                })
            })
            .ok_or_else(|| {
                Error::MissingSettings(format!(
                    "uniform setting along ({:.4}, {:.4}, {:.4})",
                    dir[0], dir[1], dir[2]
                ))
            })?;
        for (k, c) in coeffs.iter().enumerate().skip(1) {
            if c.abs() > 0.0 {
                total += c * estimate_symmetrized_power(ms, efficiencies, k)?;
            }
        }
    }
    Ok(total)
}

/// Measurement settings for the fidelity decomposition, one uniform setting
/// per direction that carries a nonzero coefficient.
pub fn fidelity_settings(
    decomposition: &SettingDecomposition,
    num_modes: usize,
) -> Result<Vec<Setting>> {
    decomposition
        .directions
        .iter()
        .zip(&decomposition.coefficients)
        .filter(|(_, coeffs)| coeffs.iter().skip(1).any(|c| c.abs() > 0.0))
        .map(|(dir, _)| Setting::uniform(num_modes, ModeBasis::from_bloch(*dir)?))
        .collect()
}

/// Estimate of the Bell-operator expectation: the weighted sum of full
/// six-mode sign products over the 32 term settings.
pub fn estimate_bell(
    data: &[MeasuredSetting],
    efficiencies: &DetectorEfficiencies,
) -> Result<f64> {
    let mut total = 0.0;
    for (axes, coeff) in bell_terms() {
        let ms = data
            .iter()
            .find(|ms| {
                ms.setting.num_modes() == axes.len()
                    && ms
                        .setting
                        .bases()
                        .iter()
                        .zip(&axes)
                        .all(|(b, a)| b.is_axis(*a))
            })
            .ok_or_else(|| {
                let name: String = axes.iter().map(|a| a.name()).collect();
                Error::MissingSettings(format!("Bell term {name}"))
            })?;
        total += coeff * estimate_full_parity(ms, efficiencies)?;
    }
    Ok(total)
}

/// Settings for all 32 Bell terms, in term order.
pub fn bell_settings() -> Result<Vec<Setting>> {
    bell_terms()
        .iter()
        .map(|(axes, _)| Setting::new(axes.iter().map(|a| ModeBasis::Axis(*a)).collect()))
        .collect()
}

/// How to attach an uncertainty to an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorMethod {
    /// First-order propagation: Poissonian count variances plus the
    /// detector-efficiency uncertainty, combined through numerical
    /// derivatives of the estimator.
    Linear,
    /// Parametric bootstrap: Poisson-resampled histograms and normally
    /// jittered efficiencies, re-estimated `replicates` times.
    Bootstrap { replicates: usize, seed: u64 },
}

/// An estimate with a one-standard-deviation uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

/// Evaluates `f` on the data and attaches an uncertainty. Counts are treated
/// as independent Poisson variables; each detector efficiency carries an
/// absolute uncertainty `efficiency_sigma`.
pub fn propagate_error<F>(
    data: &[MeasuredSetting],
    efficiencies: &DetectorEfficiencies,
    efficiency_sigma: f64,
    method: ErrorMethod,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&[MeasuredSetting], &DetectorEfficiencies) -> Result<f64>,
{
    if efficiency_sigma < 0.0 {
        return Err(Error::InvalidArgument(
            "negative efficiency uncertainty".into(),
        ));
    }
    let value = f(data, efficiencies)?;
    match method {
        ErrorMethod::Linear => {
            let mut variance = 0.0;
            let mut work = data.to_vec();
            for si in 0..work.len() {
                for bin in 0..work[si].counts.len() {
                    let n = work[si].counts[bin];
                    if n <= 0.0 {
                        continue;
                    }
                    let h = (n * 1e-3).max(1e-3);
                    work[si].counts[bin] = n + h;
                    let up = f(&work, efficiencies)?;
                    work[si].counts[bin] = n - h;
                    let down = f(&work, efficiencies)?;
                    work[si].counts[bin] = n;
                    let slope = (up - down) / (2.0 * h);
                    variance += slope * slope * n;
                }
            }
            if efficiency_sigma > 0.0 {
                let h = 1e-4;
                let mut pert = efficiencies.clone();
                for m in 0..pert.values.len() {
                    for side in 0..2 {
                        let e = pert.values[m][side];
                        pert.values[m][side] = e + h;
                        let up = f(data, &pert)?;
                        pert.values[m][side] = e - h;
                        let down = f(data, &pert)?;
                        pert.values[m][side] = e;
                        let slope = (up - down) / (2.0 * h);
                        variance += slope * slope * efficiency_sigma * efficiency_sigma;
                    }
                }
            }
            Ok(Estimate {
                value,
                sigma: variance.sqrt(),
            })
        }
        ErrorMethod::Bootstrap { replicates, seed } => {
            if replicates < 2 {
                return Err(Error::InvalidArgument(
                    "bootstrap needs at least two replicates".into(),
                ));
            }
            let mut values = Vec::with_capacity(replicates);
            let mut resampled = data.to_vec();
            let mut jittered = efficiencies.clone();
            for r in 0..replicates {
                let mut rng = ChaCha8Rng::seed_from_u64(bin_key(seed, 0xB007, r as u64));
                for (rs, orig) in resampled.iter_mut().zip(data) {
                    for (bin, &n) in orig.counts.iter().enumerate() {
                        rs.counts[bin] = if n > 0.0 {
                            Poisson::new(n).expect("positive mean").sample(&mut rng)
                        } else {
                            0.0
                        };
                    }
                }
                if efficiency_sigma > 0.0 {
                    let noise = Normal::new(0.0, efficiency_sigma).expect("valid sigma");
                    for (jit, orig) in jittered.values.iter_mut().zip(&efficiencies.values) {
                        for side in 0..2 {
                            jit[side] =
                                (orig[side] + noise.sample(&mut rng)).clamp(1e-6, 1.0);
                        }
                    }
                }
                values.push(f(&resampled, &jittered)?);
            }
            let mean = values.iter().sum::<f64>() / replicates as f64;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (replicates as f64 - 1.0);
            Ok(Estimate {
                value,
                sigma: var.sqrt(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::{bell_d63, j_moment};
    use crate::measure::{exact_run, simulate_run};
    use crate::qcore::{expectation, Observable};
    use crate::states::dicke;
    use crate::witness::{
        decompose_settings, fidelity_bound_from_moments, symmetrized_power, J2_ALPHA_6,
    };
    use approx::assert_abs_diff_eq;

    fn lopsided() -> DetectorEfficiencies {
        DetectorEfficiencies::new(vec![
            [0.92, 0.60],
            [0.85, 0.71],
            [0.66, 0.95],
            [0.78, 0.82],
            [0.90, 0.55],
            [0.61, 0.88],
        ])
        .unwrap()
    }

    #[test]
    fn elementary_symmetric_matches_hand_expansion() {
        assert_eq!(
            elementary_symmetric(&[1.0, 1.0, 1.0, 1.0]),
            vec![1.0, 4.0, 6.0, 4.0, 1.0]
        );
        // (1+x)^2 (1-x)^2 = 1 - 2x^2 + x^4
        assert_eq!(
            elementary_symmetric(&[1.0, -1.0, 1.0, -1.0]),
            vec![1.0, 0.0, -2.0, 0.0, 1.0]
        );
    }

    #[test]
    fn exact_counts_reproduce_operator_moments_despite_unequal_detectors() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let settings = [
            Setting::axis(6, Axis::X).unwrap(),
            Setting::axis(6, Axis::Y).unwrap(),
            Setting::axis(6, Axis::Z).unwrap(),
        ];
        let data = exact_run((&d63).into(), &settings, &eff, 750.0).unwrap();
        for (ms, axis) in data.iter().zip(Axis::ALL) {
            for power in [1u32, 2, 4, 6] {
                let est = estimate_moment(ms, &eff, power).unwrap();
                let direct = j_moment(&d63, axis, power).unwrap();
                assert_abs_diff_eq!(est, direct, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn symmetrized_power_estimates_match_the_operator_route() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let dir = {
            let (t, p) = (0.9f64, 2.3f64);
            [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
        };
        let setting = Setting::uniform(6, ModeBasis::from_bloch(dir).unwrap()).unwrap();
        let data = exact_run((&d63).into(), &[setting], &eff, 415.0).unwrap();
        for k in 1..=6 {
            let est = estimate_symmetrized_power(&data[0], &eff, k).unwrap();
            let op = symmetrized_power(6, dir, k).unwrap();
            let direct = d63.expect(&op).unwrap();
            assert_abs_diff_eq!(est, direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn witnesses_from_exact_counts_hit_their_operator_values() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let kinds = [
            WitnessKind::TransverseSpin { alpha: J2_ALPHA_6 },
            WitnessKind::Moments,
        ];
        for kind in kinds {
            let settings = witness_settings(kind, 6).unwrap();
            let data = exact_run((&d63).into(), &settings, &eff, 1032.0).unwrap();
            let value = evaluate_witness_from_data(kind, &data, &eff).unwrap();
            match kind {
                WitnessKind::TransverseSpin { alpha } => {
                    assert_abs_diff_eq!(value, alpha - 12.0, epsilon = 1e-9);
                }
                WitnessKind::Moments => {
                    assert_abs_diff_eq!(value, -1.0, epsilon = 1e-9);
                    assert_abs_diff_eq!(
                        fidelity_bound_from_moments(value),
                        1.0,
                        epsilon = 1e-9
                    );
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn projected_ghz_witness_reaches_its_pure_state_value() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let settings = witness_settings(WitnessKind::GhzTwoSetting, 6).unwrap();
        let data = exact_run((&d63).into(), &settings, &eff, 1032.0).unwrap();
        let value = evaluate_witness_from_data(WitnessKind::GhzTwoSetting, &data, &eff).unwrap();
        assert_abs_diff_eq!(value, -0.5, epsilon = 1e-9);
    }

    #[test]
    fn fidelity_estimate_agrees_with_the_direct_overlap() {
        let d63 = dicke(6, 3).unwrap();
        let target = Observable::projector(&d63);
        let decomposition = decompose_settings(&target, 21, 1e-9).unwrap();
        let eff = lopsided();
        let settings = fidelity_settings(&decomposition, 6).unwrap();
        let data = exact_run((&d63).into(), &settings, &eff, 1032.0).unwrap();
        let f = estimate_fidelity(&decomposition, &data, &eff).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn bell_estimate_from_exact_counts_reaches_the_quantum_value() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let settings = bell_settings().unwrap();
        let data = exact_run((&d63).into(), &settings, &eff, 500.0).unwrap();
        let value = estimate_bell(&data, &eff).unwrap();
        assert_abs_diff_eq!(value, 1.0, epsilon = 1e-9);
        let op = bell_d63().unwrap();
        let direct = expectation((&d63).into(), &op).unwrap();
        assert_abs_diff_eq!(value, direct, epsilon = 1e-9);
    }

    #[test]
    fn linear_error_matches_the_closed_form_for_a_ratio_estimate() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let settings = [Setting::axis(6, Axis::X).unwrap()];
        let data = simulate_run((&d63).into(), &settings, &eff, 900.0, 21).unwrap();
        let est = propagate_error(&data, &eff, 0.0, ErrorMethod::Linear, |d, e| {
            estimate_moment(&d[0], e, 2)
        })
        .unwrap();
        // closed form: d(num/den)/dn_o = (g_o - E)/(E_o * den)
        let e_val = estimate_moment(&data[0], &eff, 2).unwrap();
        let den: f64 = data[0]
            .counts
            .iter()
            .enumerate()
            .map(|(o, n)| n / eff.outcome_weight(o))
            .sum();
        let mut variance = 0.0;
        for (o, &n) in data[0].counts.iter().enumerate() {
            let g = half_spin_sum(o, 6).powi(2);
            let slope = (g - e_val) / (eff.outcome_weight(o) * den);
            variance += slope * slope * n;
        }
        assert_abs_diff_eq!(est.value, e_val, epsilon = 1e-12);
        assert_abs_diff_eq!(est.sigma, variance.sqrt(), epsilon = variance.sqrt() * 1e-4);
    }

    #[test]
    fn bootstrap_and_linear_uncertainties_agree() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let kind = WitnessKind::TransverseSpin { alpha: J2_ALPHA_6 };
        let settings = witness_settings(kind, 6).unwrap();
        let data = simulate_run((&d63).into(), &settings, &eff, 2000.0, 3).unwrap();
        let f = |d: &[MeasuredSetting], e: &DetectorEfficiencies| {
            evaluate_witness_from_data(kind, d, e)
        };
        let linear = propagate_error(&data, &eff, 0.01, ErrorMethod::Linear, f).unwrap();
        let boot = propagate_error(
            &data,
            &eff,
            0.01,
            ErrorMethod::Bootstrap {
                replicates: 400,
                seed: 9,
            },
            f,
        )
        .unwrap();
        assert_abs_diff_eq!(linear.value, boot.value, epsilon = 1e-12);
        assert!(linear.sigma > 0.0);
        let rel = (linear.sigma - boot.sigma).abs() / linear.sigma;
        assert!(rel < 0.25, "linear {} vs bootstrap {}", linear.sigma, boot.sigma);
        // the sampled estimate should sit near the true value
        assert!((linear.value - (J2_ALPHA_6 - 12.0)).abs() < 5.0 * linear.sigma);
    }

    #[test]
    fn missing_settings_are_reported() {
        let d63 = dicke(6, 3).unwrap();
        let eff = lopsided();
        let settings = [Setting::axis(6, Axis::X).unwrap()];
        let data = exact_run((&d63).into(), &settings, &eff, 100.0).unwrap();
        let kind = WitnessKind::TransverseSpin { alpha: J2_ALPHA_6 };
        assert!(matches!(
            evaluate_witness_from_data(kind, &data, &eff),
            Err(Error::MissingSettings(_))
        ));
        assert!(matches!(
            estimate_bell(&data, &eff),
            Err(Error::MissingSettings(_))
        ));
        let empty = MeasuredSetting {
            setting: settings[0].clone(),
            counts: vec![0.0; 64],
        };
        assert!(matches!(
            estimate_moment(&empty, &eff, 2),
            Err(Error::EmptyHistogram)
        ));
    }
}


