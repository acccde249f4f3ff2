mod common;

use std::f64::consts::PI;

use interfersim_core::experiment::{
    build_part_a, build_part_a_with, build_part_b, linspace, post_select, sample, sweep, visibility, Condition, ExperimentGraph,
    SourceNode, SweepConfig, ThetaParam,
};
use interfersim_core::measurement::{ClickPattern, Outcome, OutcomeDistribution, OutcomeEntry, ReadoutBasis};
use interfersim_core::{Error, FockSpace, CONVENTION};

const TOL: f64 = 1e-12;

fn grid25() -> Vec<f64> {
    linspace(0.0, 2.0 * PI, 25)
}

fn part_b_sweep(condition: &str) -> interfersim_core::experiment::ResultTable {
    let config =
        SweepConfig { parameter: ThetaParam::Theta1, grid: grid25(), condition: Some(Condition::parse(condition).unwrap()) };
    sweep(|t| build_part_b(t, 0.0), &config).unwrap()
}

#[test]
fn part_a_layout() {
    let g = build_part_a(0.3, 0.1, 0.0).unwrap();
    assert!(g.validate().is_ok());
    assert_eq!(g.sources.len(), 2);
    assert_eq!(g.ndetectors.len(), 2);
    assert!(g.sources.iter().all(|s| s.spin_tag == g.sources[0].spin_tag));
    let labels: Vec<&str> = g.detectors.iter().map(|d| d.label.as_str()).collect();
    assert_eq!(labels, ["C", "D", "E"]);
    for d in &g.detectors {
        assert!(g.ndetectors.iter().all(|n| d.click_time < n.readout_time));
    }
    assert!(build_part_a(0.0, 0.0, 1.5).is_err());
}

#[test]
fn only_the_phase_difference_matters() {
    let a = build_part_a_with(0.7, 0.7, 0.0, ReadoutBasis::PlusMinus).unwrap().run().unwrap();
    let b = build_part_a_with(0.0, 0.0, 0.0, ReadoutBasis::PlusMinus).unwrap().run().unwrap();
    assert!(a.total_variation(&b) < TOL);
    let c = build_part_b(1.9, 0.4).unwrap().run().unwrap();
    let d = build_part_b(1.5, 0.0).unwrap().run().unwrap();
    assert!(c.total_variation(&d) < TOL);
}

#[test]
fn removing_nondestructive_detectors_gives_part_b() {
    for theta in [0.0, 1.0, 4.0] {
        assert_eq!(build_part_a(theta, 0.2, 0.0).unwrap().without_nondestructive().unwrap(), build_part_b(theta, 0.2).unwrap());
    }
}

#[test]
fn part_a_full_distribution() {
    let dist = build_part_a(0.9, 0.0, 0.0).unwrap().run().unwrap();
    let clicked = |set: &[&str]| {
        dist.probability_where(|p| {
            let mut got: Vec<&str> = p.clicked().collect();
            got.sort_unstable();
            got == set
        })
    };
    assert!((clicked(&["C", "D"]) - 0.125).abs() < TOL);
    assert!((clicked(&["C", "E"]) - 0.125).abs() < TOL);
    assert!((clicked(&["D", "E"]) - 0.25).abs() < TOL);
    // both from the a side: one particle in c and one in f, never two in c
    assert!((clicked(&["C"]) - 0.25).abs() < TOL);
    assert!((dist.total() - 1.0).abs() < TOL);
}

#[test]
fn part_b_supported_on_c_coincidences() {
    let dist = build_part_b(1.0, 0.0).unwrap().run().unwrap();
    let cond = Condition::parse("C").unwrap();
    let given = post_select(&dist, |p| cond.matches(p, 2)).unwrap();
    for e in given.entries().iter().filter(|e| e.probability > 0.0) {
        let mut got: Vec<&str> = e.pattern.clicked().collect();
        got.sort_unstable();
        assert!(got == ["C", "D"] || got == ["C", "E"]);
    }
}

#[test]
fn sources_only_graph_is_trivial() {
    let mut g = ExperimentGraph::new(FockSpace::new(["a"]).unwrap());
    g.sources.push(SourceNode::new("S1", 0));
    let dist = g.run().unwrap();
    assert_eq!(dist.len(), 1);
    assert!(dist.entries()[0].pattern.is_empty());
    assert_eq!(dist.entries()[0].probability, 1.0);
}

#[test]
fn post_selection() {
    let dist = build_part_a(2.2, 0.0, 0.0).unwrap().run().unwrap();
    let cond = Condition::parse("C").unwrap();
    let given = post_select(&dist, |p| cond.matches(p, 2)).unwrap();
    let d = given.probability_where(|p| p.get("D") == Some(Outcome::Clicked));
    let e = given.probability_where(|p| p.get("E") == Some(Outcome::Clicked));
    assert!((d + e - 1.0).abs() < TOL);
    assert!(post_select(&dist, |_| true).unwrap().total_variation(&dist) < TOL);
    assert_eq!(post_select(&dist, |_| false).unwrap_err(), Error::ZeroProbability);
}

#[test]
fn joint_readout_fringes_given_c_and_d() {
    let mut minus = Vec::new();
    for &theta in &grid25() {
        let dist = build_part_a_with(theta, 0.0, 0.0, ReadoutBasis::PlusMinus).unwrap().run().unwrap();
        let cond = Condition::parse("C&D").unwrap();
        let given = post_select(&dist, |p| cond.matches(p, 2)).unwrap();
        let p = |o| given.probability_where(|pat| pat.get("B1+B2") == Some(o));
        assert!((p(Outcome::Minus) - (theta / 2.0).cos().powi(2)).abs() < TOL);
        assert!((p(Outcome::Plus) - (theta / 2.0).sin().powi(2)).abs() < TOL);
        minus.push(p(Outcome::Minus));
    }
    assert!((visibility(&minus).unwrap() - 1.0).abs() < TOL);
}

#[test]
fn part_a_marginals_are_flat() {
    let config = SweepConfig { parameter: ThetaParam::Theta1, grid: grid25(), condition: None };
    let table = sweep(|t| build_part_a(t, 0.0, 0.0), &config).unwrap();
    for header in ["p_CD", "p_CE"] {
        let col = table.column(header).unwrap();
        assert!(col.iter().all(|p| (p - 0.125).abs() < TOL), "{header}");
        assert!(visibility(&col).unwrap() < TOL);
    }
    let given =
        sweep(|t| build_part_a(t, 0.0, 0.0), &SweepConfig { condition: Some(Condition::parse("C").unwrap()), ..config }).unwrap();
    for header in ["p_D_given_C", "p_E_given_C"] {
        assert!(given.column(header).unwrap().iter().all(|p| (p - 0.5).abs() < TOL));
    }
}

#[test]
fn part_b_half_angle_fringes() {
    let table = part_b_sweep("C");
    assert_eq!(table.rows.len(), 25);
    let d = table.column("p_D_given_C").unwrap();
    let e = table.column("p_E_given_C").unwrap();
    for (row, (pd, pe)) in table.rows.iter().zip(d.iter().zip(&e)) {
        let half = row.theta / 2.0;
        assert!((pd + pe - 1.0).abs() < TOL);
        // D carries cos²((θ − π)/2) = sin²(θ/2)
        assert!((pd - ((row.theta - PI) / 2.0).cos().powi(2)).abs() < TOL);
        assert!((pe - half.cos().powi(2)).abs() < TOL);
    }
    assert!(d[0].abs() < TOL && (e[0] - 1.0).abs() < TOL);
    assert!((d[12] - 1.0).abs() < TOL && e[12].abs() < TOL);
    assert_eq!(table.meta.convention, CONVENTION);
}

#[test]
fn single_point_grid() {
    let config = SweepConfig { parameter: ThetaParam::Theta2, grid: vec![0.5], condition: None };
    let table = sweep(|t| build_part_b(0.0, t), &config).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].theta, 0.5);
    let empty = SweepConfig { grid: vec![], ..config };
    assert!(sweep(|t| build_part_b(0.0, t), &empty).is_err());
}

#[test]
fn sweep_columns_cover_readouts() {
    let config = SweepConfig { parameter: ThetaParam::Theta1, grid: vec![0.0], condition: None };
    let table = sweep(|t| build_part_a_with(t, 0.0, 0.0, ReadoutBasis::PlusMinus), &config).unwrap();
    for header in ["theta", "p_none", "p_C", "p_CD", "p_CE", "p_DE", "p_CD_plus", "p_CD_minus"] {
        assert!(header == "theta" || table.columns.iter().any(|c| c == header), "{header}");
    }
    for row in &table.rows {
        assert!(row.values.iter().all(|p| (0.0..=1.0 + TOL).contains(p)));
    }
}

#[test]
fn visibility_examples() {
    assert_eq!(visibility(&[0.3, 0.3, 0.3]).unwrap(), 0.0);
    let col: Vec<f64> = grid25().iter().map(|t| (t / 2.0).cos().powi(2)).collect();
    assert!((visibility(&col).unwrap() - 1.0).abs() < TOL);
    assert!(visibility(&[0.0, 0.0]).is_err());
    assert!(visibility(&[]).is_err());
}

#[test]
fn shipped_graphs_agree_across_models() {
    assert!(build_part_a(0.3, 0.0, 0.0).unwrap().compare_models().unwrap() < TOL);
    assert!(build_part_a_with(0.3, 0.0, 0.0, ReadoutBasis::PlusMinus).unwrap().compare_models().unwrap() < TOL);
    assert!(build_part_b(0.3, 0.0).unwrap().compare_models().unwrap() < TOL);
}

fn coin() -> OutcomeDistribution {
    let entry = |label: &str, p: f64| OutcomeEntry {
        pattern: ClickPattern::new().with(label, Outcome::Clicked),
        probability: p,
        post_state: None,
    };
    OutcomeDistribution::from_entries(vec![entry("H", 0.5), entry("T", 0.5)])
}

#[test]
fn sampling_is_reproducible_and_unbiased() {
    let n = 100_000u64;
    let counts = sample(&coin(), n, 42).unwrap();
    assert_eq!(counts, sample(&coin(), n, 42).unwrap());
    assert_ne!(counts, sample(&coin(), n, 43).unwrap());
    let sigma = (n as f64 * 0.25).sqrt();
    for (_, k) in &counts {
        assert!((*k as f64 - n as f64 / 2.0).abs() < 5.0 * sigma);
    }
    assert_eq!(counts.iter().map(|(_, k)| k).sum::<u64>(), n);
}

#[test]
fn deterministic_distribution_samples_one_pattern() {
    let dist = build_part_b(0.0, 0.0).unwrap().run().unwrap();
    let given = post_select(&dist, |p| Condition::parse("C").unwrap().matches(p, 2)).unwrap();
    let counts = sample(&given, 1000, 7).unwrap();
    assert_eq!(counts.iter().filter(|(_, k)| *k > 0).count(), 1);
    assert!(sample(&given, 0, 7).is_err());
}
