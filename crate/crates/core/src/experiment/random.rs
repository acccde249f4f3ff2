use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Element, ExperimentGraph, SourceNode};
use crate::fock::{AncillaId, FockSpace};
use crate::measurement::{AbsorbingDetector, NonAbsorbingDetector, ReadoutBasis};
use crate::optics::{random_unitary_2x2, ModeTransform, PhaseShifter};
use crate::Result;

/// A random valid graph: 3–6 modes, 1–3 sources, Haar-random two-mode
/// unitaries and phases, up to two non-absorbing detectors (sometimes read
/// out jointly), absorbing detectors on a random subset of modes, and readout
/// times that fall before, between or after the clicks.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R) -> Result<ExperimentGraph> {
    let n_modes = rng.gen_range(3..=6usize);
    let n_ancillas = rng.gen_range(0..=2usize);
    let mut space = FockSpace::new((0..n_modes).map(|m| format!("m{m}")))?;
    for a in 0..n_ancillas {
        let overlap = if rng.gen_bool(0.5) { 0.0 } else { rng.gen::<f64>() };
        space = space.with_ancilla(AncillaId::new(a, format!("A{a}"), overlap)?)?;
    }
    let mut g = ExperimentGraph::new(space);

    let mut modes: Vec<usize> = (0..n_modes).collect();
    modes.shuffle(rng);
    let particles = rng.gen_range(1..=3usize.min(n_modes - 1));
    g.sources = modes[..particles].iter().enumerate().map(|(i, &m)| SourceNode::new(format!("S{i}"), m)).collect();

    let mut time = 0i64;
    let mut last_touch: BTreeMap<usize, i64> = BTreeMap::new();
    for k in 0..rng.gen_range(1..=5usize) {
        time += rng.gen_range(0..=1i64) + if k == 0 { 1 } else { 0 };
        if rng.gen_bool(0.75) {
            let mut pair: Vec<usize> = (0..n_modes).collect();
            pair.shuffle(rng);
            let ports = alloc::vec![pair[0], pair[1]];
            let transform = ModeTransform::new(ports.clone(), random_unitary_2x2(rng))?;
            for m in ports {
                last_touch.insert(m, time);
            }
            g.elements.push(Element::Unitary { label: format!("U{k}"), transform, time });
        } else {
            let mode = rng.gen_range(0..n_modes);
            last_touch.insert(mode, time);
            g.elements.push(Element::Phase { shifter: PhaseShifter { mode, theta: rng.gen::<f64>() * TAU }, time });
        }
    }

    let joint = n_ancillas == 2 && rng.gen_bool(0.5);
    let joint_readout = time + rng.gen_range(2..=8i64);
    for a in 0..n_ancillas {
        let mode = rng.gen_range(0..n_modes);
        let interaction_time = rng.gen_range(1..=time + 1);
        let t = last_touch.entry(mode).or_insert(interaction_time);
        *t = (*t).max(interaction_time);
        let (readout_time, basis) = if joint {
            (joint_readout, ReadoutBasis::PlusMinus)
        } else {
            (interaction_time + rng.gen_range(1..=8i64), ReadoutBasis::Computational)
        };
        g.ndetectors.push(NonAbsorbingDetector {
            label: format!("B{a}"),
            mode,
            ancilla: a,
            interaction_time,
            readout_time,
            basis,
        });
    }

    let mut detected: Vec<usize> = (0..n_modes).collect();
    detected.shuffle(rng);
    detected.truncate(rng.gen_range(1..=n_modes));
    detected.sort_unstable();
    for (i, m) in detected.into_iter().enumerate() {
        let after = last_touch.get(&m).copied().unwrap_or(0);
        g.detectors.push(AbsorbingDetector { label: format!("D{i}"), mode: m, click_time: after + rng.gen_range(1..=4i64) });
    }
    g.validate()?;
    Ok(g)
}
