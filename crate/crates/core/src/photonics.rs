//! Photonic source model: a collinear pair source feeding a tree of
//! beam splitters, with lossy detection and sixfold-coincidence
//! postselection producing the six-qubit polarization state.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::linalg::C64;
use crate::qcore::MixedState;
use crate::{Error, Result};

const MODES: usize = 6;
const SLOTS: usize = 2 * MODES; // one H and one V occupation slot per mode

/// Relative weight of the four-pair emission in the calibrated source.
pub const DEFAULT_PAIR_WEIGHT_FOUR: f64 = 0.131_092_547_041_100_4;

/// Calibrated per-photon detection efficiency.
pub const DEFAULT_EFFICIENCY: f64 = 0.15;

/// A node of the splitter tree: either an output mode or a splitter sending
/// a `ratio` fraction of the power to `first` and the rest to `second`.
#[derive(Debug, Clone)]
pub enum TreeNode {
    Leaf(usize),
    Split {
        ratio: f64,
        first: Box<TreeNode>,
        second: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Convenience constructor boxing both children.
    pub fn split(ratio: f64, first: TreeNode, second: TreeNode) -> TreeNode {
        TreeNode::Split {
            ratio,
            first: Box::new(first),
            second: Box::new(second),
        }
    }
}

/// A beam-splitter tree distributing one input beam over six output modes.
#[derive(Debug, Clone)]
pub struct SplitterTree {
    root: TreeNode,
    amplitudes: Vec<f64>,
}

impl SplitterTree {
    /// Validates that the leaves cover modes 0..6 exactly once and that all
    /// splitting ratios lie strictly between 0 and 1.
    pub fn new(root: TreeNode) -> Result<Self> {
        let mut amplitudes = vec![f64::NAN; MODES];
        let mut seen = vec![false; MODES];
        fn walk(
            node: &TreeNode,
            amp: f64,
            amplitudes: &mut [f64],
            seen: &mut [bool],
        ) -> Result<()> {
            match node {
                TreeNode::Leaf(mode) => {
                    if *mode >= MODES {
                        return Err(Error::InvalidArgument(format!(
                            "leaf mode {mode} out of range"
                        )));
                    }
                    if seen[*mode] {
                        return Err(Error::InvalidArgument(format!(
                            "mode {mode} appears twice in the tree"
                        )));
                    }
                    seen[*mode] = true;
                    amplitudes[*mode] = amp;
                    Ok(())
                }
                TreeNode::Split {
                    ratio,
                    first,
                    second,
                } => {
                    if !(*ratio > 0.0 && *ratio < 1.0) {
                        return Err(Error::InvalidArgument(format!(
                            "splitting ratio {ratio} outside (0, 1)"
                        )));
                    }
                    walk(first, amp * ratio.sqrt(), amplitudes, seen)?;
                    walk(second, amp * (1.0 - ratio).sqrt(), amplitudes, seen)
                }
            }
        }
        walk(&root, 1.0, &mut amplitudes, &mut seen)?;
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "mode {missing} has no leaf"
            )));
        }
        Ok(Self { root, amplitudes })
    }

    /// Balanced tree with all six output weights equal to 1/6.
    pub fn symmetric() -> Self {
        let arm = |a, b, c| {
            TreeNode::split(
                1.0 / 3.0,
                TreeNode::Leaf(a),
                TreeNode::split(0.5, TreeNode::Leaf(b), TreeNode::Leaf(c)),
            )
        };
        Self::new(TreeNode::split(0.5, arm(0, 1, 2), arm(3, 4, 5)))
            .expect("balanced tree is well formed")
    }

    /// Five-splitter layout with the measured laboratory ratios.
    pub fn reference() -> Self {
        let arm_a = TreeNode::split(
            0.58,
            TreeNode::split(0.58, TreeNode::Leaf(1), TreeNode::Leaf(2)),
            TreeNode::Leaf(0),
        );
        let arm_b = TreeNode::split(
            0.58,
            TreeNode::split(0.52, TreeNode::Leaf(4), TreeNode::Leaf(5)),
            TreeNode::Leaf(3),
        );
        Self::new(TreeNode::split(0.58, arm_a, arm_b)).expect("reference tree is well formed")
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    /// Field amplitude reaching each output mode; the squares sum to 1.
    pub fn leaf_amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }
}

/// Sixfold coincidence probability for three pairs with perfect detection:
/// every arrangement interferes constructively, giving 720·Π|t_m|².
pub fn ideal_sixfold_probability(tree: &SplitterTree) -> f64 {
    720.0 * tree.amplitudes.iter().map(|t| t * t).product::<f64>()
}

/// Postselected six-mode polarization state and the probability of the
/// sixfold coincidence that heralds it.
#[derive(Debug, Clone)]
pub struct Postselected {
    pub state: MixedState,
    pub probability: f64,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(first);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Distributes `pairs` photon pairs through the tree, applies per-photon
/// loss, and keeps the events where every mode fires exactly one detector.
///
/// Loss patterns label orthogonal environment states, so amplitudes stay
/// coherent only within a fixed pattern. Surviving configurations with one
/// photon per mode form the qubit sector; configurations that still fire
/// one detector per mode but carry extra photons in some slot enter as
/// classical diagonal noise at their click pattern.
pub fn postselect_sixfold(
    tree: &SplitterTree,
    pairs: usize,
    efficiency: f64,
) -> Result<Postselected> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "efficiency {efficiency} outside (0, 1]"
        )));
    }
    if !(3..=5).contains(&pairs) {
        return Err(Error::InvalidArgument(format!(
            "{pairs} pairs cannot herald a sixfold coincidence here (need 3 to 5)"
        )));
    }
    let q = pairs;
    let max_loss = 2 * q - MODES;
    let t = tree.leaf_amplitudes();
    let placements = compositions(q, MODES);
    // amplitude per (loss pattern, surviving pattern), keyed by the loss
    // pattern first: different loss patterns decohere
    let mut sectors: BTreeMap<Vec<u8>, Vec<([u8; SLOTS], f64)>> = BTreeMap::new();
    let sqrt_eta = efficiency.sqrt();
    let sqrt_loss = (1.0 - efficiency).sqrt();
    for h in &placements {
        let amp_h: f64 = factorial(q)
            * h.iter()
                .enumerate()
                .map(|(m, hm)| t[m].powi(*hm as i32) / factorial(*hm).sqrt())
                .product::<f64>();
        for v in &placements {
            let amp_hv: f64 = amp_h
                * v.iter()
                    .enumerate()
                    .map(|(m, vm)| t[m].powi(*vm as i32) / factorial(*vm).sqrt())
                    .product::<f64>();
            let mut slots = [0u8; SLOTS];
            for m in 0..MODES {
                slots[m] = h[m] as u8;
                slots[MODES + m] = v[m] as u8;
            }
            distribute_loss(
                &slots,
                amp_hv,
                max_loss,
                sqrt_eta,
                sqrt_loss,
                &mut sectors,
            );
        }
    }
    let dim = 1usize << MODES;
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    let mut probability = 0.0;
    for survivors in sectors.values() {
        let mut qubit_sector: Vec<(usize, f64)> = Vec::new();
        for (k, amp) in survivors {
            let mut index = 0usize;
            let mut single = true;
            let mut valid = true;
            for m in 0..MODES {
                let (hk, vk) = (k[m], k[MODES + m]);
                match (hk > 0, vk > 0) {
                    (true, false) => {
                        single &= hk == 1;
                    }
                    (false, true) => {
                        single &= vk == 1;
                        index |= 1 << (MODES - 1 - m);
                    }
                    _ => {
                        valid = false;
                        break;
                    }
                }
            }
            if !valid {
                continue;
            }
            if single {
                qubit_sector.push((index, *amp));
            } else {
                rho[(index, index)] += C64::new(amp * amp, 0.0);
                probability += amp * amp;
            }
        }
        for (i, a) in &qubit_sector {
            for (j, b) in &qubit_sector {
                rho[(*i, *j)] += C64::new(a * b, 0.0);
            }
            probability += a * a;
        }
    }
    if probability <= 0.0 {
        return Err(Error::ZeroProbability(
            "no surviving sixfold coincidences".into(),
        ));
    }
    rho /= C64::new(probability, 0.0);
    Ok(Postselected {
        state: MixedState::new(MODES, rho)?,
        probability,
    })
}

/// Sums over per-slot survival counts within the loss budget, accumulating
/// the binomial loss amplitudes into their decoherence sectors.
fn distribute_loss(
    slots: &[u8; SLOTS],
    base_amp: f64,
    max_loss: usize,
    sqrt_eta: f64,
    sqrt_loss: f64,
    sectors: &mut BTreeMap<Vec<u8>, Vec<([u8; SLOTS], f64)>>,
) {
    fn recurse(
        slot: usize,
        loss_left: usize,
        amp: f64,
        slots: &[u8; SLOTS],
        losses: &mut [u8; SLOTS],
        kept: &mut [u8; SLOTS],
        sqrt_eta: f64,
        sqrt_loss: f64,
        sectors: &mut BTreeMap<Vec<u8>, Vec<([u8; SLOTS], f64)>>,
    ) {
        if slot == SLOTS {
            sectors
                .entry(losses.to_vec())
                .or_default()
                .push((*kept, amp));
            return;
        }
        let n = slots[slot] as usize;
        for lost in 0..=n.min(loss_left) {
            let k = n - lost;
            let weight = binomial(n, k).sqrt()
                * sqrt_eta.powi(k as i32)
                * sqrt_loss.powi(lost as i32);
            if weight == 0.0 {
                continue;
            }
            losses[slot] = lost as u8;
            kept[slot] = k as u8;
            recurse(
                slot + 1,
                loss_left - lost,
                amp * weight,
                slots,
                losses,
                kept,
                sqrt_eta,
                sqrt_loss,
                sectors,
            );
        }
        losses[slot] = 0;
        kept[slot] = 0;
    }
    let mut losses = [0u8; SLOTS];
    let mut kept = [0u8; SLOTS];
    recurse(
        0,
        max_loss,
        base_amp,
        slots,
        &mut losses,
        &mut kept,
        sqrt_eta,
        sqrt_loss,
        sectors,
    );
}

/// Calibrated source: the three-pair state mixed with the four-pair
/// contribution at relative weight `pair_weight_four`, both postselected on
/// sixfold coincidences at the given efficiency. Returns the heralded state
/// and the total coincidence probability.
pub fn source_state(
    tree: &SplitterTree,
    pair_weight_four: f64,
    efficiency: f64,
) -> Result<(MixedState, f64)> {
    if pair_weight_four < 0.0 {
        return Err(Error::InvalidArgument(
            "four-pair weight must be nonnegative".into(),
        ));
    }
    let three = postselect_sixfold(tree, 3, efficiency)?;
    let four = postselect_sixfold(tree, 4, efficiency)?;
    let p3 = three.probability;
    let p4 = pair_weight_four * four.probability;
    let rho = MixedState::mixture(&[(p3, three.state), (p4, four.state)])?;
    Ok((rho, p3 + p4))
}
