//! The two-source, two-beam-splitter experiment with and without which-path
//! detectors on the `b` arms.
//!
//! Layout (times are ordering keys):
//!
//! ```text
//! S1 -> g1 -[BS1 @1]-> a1, b1      S2 -> g2 -[BS2 @1]-> a2, b2
//! phase θ1 on b1 @2, phase θ2 on b2 @2
//! BSprime  @3: (a1, a2) -> (c, f)
//! B1 on b1, B2 on b2: interact @4, readout @10
//! BSdprime @5: (b1, b2) -> (d, e)
//! C on c, D on d, E on e: click @6      (f is left undetected)
//! ```

use alloc::string::String;
use alloc::vec;

use super::{Element, ExperimentGraph, SourceNode};
use crate::fock::{AncillaId, FockSpace};
use crate::measurement::{AbsorbingDetector, NonAbsorbingDetector, ReadoutBasis};
use crate::optics::PhaseShifter;
use crate::Result;

const MODES: [&str; 12] = ["g1", "v1", "g2", "v2", "a1", "b1", "a2", "b2", "c", "f", "d", "e"];

fn mode(label: &str) -> usize {
    MODES.iter().position(|m| *m == label).expect("builder mode")
}

fn splitter(label: &str, ins: [&str; 2], outs: [&str; 2], time: i64) -> Element {
    Element::BeamSplitter {
        label: label.into(),
        in_a: mode(ins[0]),
        in_b: mode(ins[1]),
        out_a: mode(outs[0]),
        out_b: mode(outs[1]),
        time,
    }
}

fn base_graph(space: FockSpace, theta1: f64, theta2: f64) -> ExperimentGraph {
    let mut g = ExperimentGraph::new(space);
    g.sources = vec![SourceNode::new("S1", mode("g1")), SourceNode::new("S2", mode("g2"))];
    g.elements = vec![
        splitter("BS1", ["g1", "v1"], ["a1", "b1"], 1),
        splitter("BS2", ["g2", "v2"], ["a2", "b2"], 1),
        Element::Phase { shifter: PhaseShifter { mode: mode("b1"), theta: theta1 }, time: 2 },
        Element::Phase { shifter: PhaseShifter { mode: mode("b2"), theta: theta2 }, time: 2 },
        splitter("BSprime", ["a1", "a2"], ["c", "f"], 3),
        splitter("BSdprime", ["b1", "b2"], ["d", "e"], 5),
    ];
    g.detectors = ["C", "D", "E"]
        .iter()
        .zip(["c", "d", "e"])
        .map(|(label, m)| AbsorbingDetector { label: String::from(*label), mode: mode(m), click_time: 6 })
        .collect();
    g
}

/// Part A with computational (which-path) readout of both ancillas.
pub fn build_part_a(theta1: f64, theta2: f64, overlap: f64) -> Result<ExperimentGraph> {
    build_part_a_with(theta1, theta2, overlap, ReadoutBasis::Computational)
}

/// Part A with the given readout basis for the `B1`/`B2` ancillas.
pub fn build_part_a_with(theta1: f64, theta2: f64, overlap: f64, basis: ReadoutBasis) -> Result<ExperimentGraph> {
    let space =
        FockSpace::new(MODES)?.with_ancilla(AncillaId::new(0, "M", overlap)?)?.with_ancilla(AncillaId::new(1, "N", overlap)?)?;
    let mut g = base_graph(space, theta1, theta2);
    g.ndetectors = vec![
        NonAbsorbingDetector { label: "B1".into(), mode: mode("b1"), ancilla: 0, interaction_time: 4, readout_time: 10, basis },
        NonAbsorbingDetector { label: "B2".into(), mode: mode("b2"), ancilla: 1, interaction_time: 4, readout_time: 10, basis },
    ];
    Ok(g)
}

/// Part B: the same interferometer with `B1`/`B2` removed.
pub fn build_part_b(theta1: f64, theta2: f64) -> Result<ExperimentGraph> {
    Ok(base_graph(FockSpace::new(MODES)?, theta1, theta2))
}
