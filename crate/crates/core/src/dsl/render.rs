use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use crate::experiment::{Element, ExperimentGraph};
use crate::{Error, Result};

/// Canonical text for a graph; `parse(render(g))` rebuilds `g`.
///
/// Fails for graphs holding general unitaries, which the format cannot
/// express.
pub fn render(graph: &ExperimentGraph) -> Result<String> {
    let space = &graph.space;
    let mode = |m: usize| space.mode_label(m);
    let mut out = String::new();
    for m in space.modes() {
        writeln!(out, "mode {}", m.label).ok();
    }
    for a in space.ancillas() {
        writeln!(out, "ancilla {} overlap {}", a.label, a.scattered_overlap).ok();
    }
    for s in &graph.sources {
        writeln!(out, "source {} -> {}", s.label, mode(s.mode)?).ok();
    }
    for e in &graph.elements {
        match e {
            Element::BeamSplitter { label, in_a, in_b, out_a, out_b, time } => {
                writeln!(
                    out,
                    "beamsplitter {label} in {} {} out {} {} time {time}",
                    mode(*in_a)?,
                    mode(*in_b)?,
                    mode(*out_a)?,
                    mode(*out_b)?
                )
                .ok();
            }
            Element::Phase { shifter, time } => {
                writeln!(out, "phase {} {} time {time}", mode(shifter.mode)?, shifter.theta).ok();
            }
            Element::Unitary { label, .. } => {
                return Err(Error::Domain(format!("unitary element `{label}` has no text form")));
            }
        }
    }
    for d in &graph.ndetectors {
        writeln!(
            out,
            "ndetector {} on {} ancilla {} interact {} readout {} basis {}",
            d.label,
            mode(d.mode)?,
            space.ancilla_id(d.ancilla)?.label,
            d.interaction_time,
            d.readout_time,
            d.basis.keyword()
        )
        .ok();
    }
    for d in &graph.detectors {
        writeln!(out, "detector {} on {} time {}", d.label, mode(d.mode)?, d.click_time).ok();
    }
    Ok(out)
}
