use std::fs;
use std::path::Path;

use interfersim_core::dsl::{parse, parse_bytes, render, Diagnostic};
use interfersim_core::experiment::{build_part_a, build_part_a_with, build_part_b, random_graph};
use interfersim_core::measurement::ReadoutBasis;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MINIMAL: &str = "mode a\nsource S1 -> a\ndetector C on a time 1\n";

fn lines(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

#[test]
fn builder_graphs_round_trip() {
    let graphs = [
        build_part_a(0.3, 0.1, 0.0).unwrap(),
        build_part_a_with(1.7, -2.25, 0.35, ReadoutBasis::PlusMinus).unwrap(),
        build_part_b(0.3, 0.1).unwrap(),
        build_part_b(1e-17, std::f64::consts::TAU).unwrap(),
    ];
    for g in graphs {
        let text = render(&g).unwrap();
        let parsed = parse(&text, "rt.ifx").unwrap();
        assert!(parsed.warnings.is_empty());
        assert_eq!(parsed.graph, g);
        assert_eq!(render(&parsed.graph).unwrap(), text);
    }
}

#[test]
fn rendered_part_a_has_two_ndetectors() {
    let text = render(&build_part_a(0.3, 0.1, 0.0).unwrap()).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("ndetector ")).count(), 2);
    let text = render(&build_part_b(0.3, 0.1).unwrap()).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("ndetector ")).count(), 0);
}

#[test]
fn general_unitaries_have_no_text_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = std::iter::repeat_with(|| random_graph(&mut rng).unwrap())
        .find(|g| g.elements.iter().any(|e| matches!(e, interfersim_core::experiment::Element::Unitary { .. })))
        .unwrap();
    assert!(render(&g).is_err());
}

#[test]
fn minimal_program() {
    let p = parse(MINIMAL, "min.ifx").unwrap();
    assert_eq!((p.graph.space.modes().len(), p.graph.sources.len(), p.graph.detectors.len()), (1, 1, 1));
}

#[test]
fn golden_diagnostics() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "ifx") {
            let name = path.file_name().unwrap().to_str().unwrap();
            let diags = parse_bytes(&fs::read(&path).unwrap(), name).unwrap_err();
            let expected = fs::read_to_string(path.with_extension("expected")).unwrap();
            assert_eq!(lines(&diags), expected, "{name}");
            seen += 1;
        }
    }
    assert_eq!(seen, 5);
}

#[test]
fn fuzzed_bytes_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let base = render(&build_part_a(0.3, 0.1, 0.0).unwrap()).unwrap().into_bytes();
    for i in 0..1000 {
        let bytes: Vec<u8> = if i % 2 == 0 {
            let len = rng.gen_range(0..200);
            (0..len).map(|_| rng.gen()).collect()
        } else {
            let mut b = base.clone();
            for _ in 0..rng.gen_range(1..8) {
                let k = rng.gen_range(0..b.len());
                match rng.gen_range(0..3) {
                    0 => b[k] = rng.gen(),
                    1 => {
                        b.remove(k);
                    }
                    _ => b.insert(k, b" \n#-.0x"[rng.gen_range(0..7)]),
                }
            }
            b
        };
        let first = parse_bytes(&bytes, "fuzz.ifx");
        if let Err(diags) = &first {
            assert!(diags.iter().any(Diagnostic::is_error));
            assert!(diags.iter().all(|d| d.line >= 1 && d.column >= 1));
        }
        assert_eq!(first, parse_bytes(&bytes, "fuzz.ifx"));
    }
}

proptest! {
    #[test]
    fn parse_is_total_on_arbitrary_text(text in "\\PC*") {
        let _ = parse(&text, "p.ifx");
    }

    #[test]
    fn round_trip_with_arbitrary_angles(t1 in -10.0..10.0f64, t2 in -10.0..10.0f64, overlap in 0.0..=1.0f64) {
        let g = build_part_a_with(t1, t2, overlap, ReadoutBasis::PlusMinus).unwrap();
        prop_assert_eq!(parse(&render(&g).unwrap(), "g.ifx").unwrap().graph, g);
    }
}
