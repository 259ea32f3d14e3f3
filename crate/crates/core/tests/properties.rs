use num_complex::Complex64;
use proptest::prelude::*;
use qdt_core::calibration::{calibrate_lattice, calibrate_prospect, feasible_q_range, row_interference, CalibrationTarget};
use qdt_core::mindspace::{build_frame, ProspectLattice, ProspectState, StrategicState};
use qdt_core::paradox::allais_classical_contradiction;
use qdt_core::probability::{decompose, lattice_report, qdt_bayes};
use qdt_core::scenario::{builtin, evaluate_document, load_results, save_results};
use qdt_core::Tolerances;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

/// Dimension, strategic coefficients and one prospect's coefficients.
fn state_and_prospect() -> impl Strategy<Value = (usize, Vec<Complex64>, Vec<Complex64>)> {
    (2usize..=16).prop_flat_map(|d| (Just(d), complex_vec(d), complex_vec(d)))
        .prop_filter("nonzero state", |(_, c, _)| c.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6)
}

/// Probability with the interference written out pair by pair.
fn double_sum(b: &[Complex64], c: &[Complex64]) -> (f64, f64) {
    let z: Vec<Complex64> = b.iter().zip(c).map(|(b, c)| b.conj() * c).collect();
    let utility: f64 = z.iter().map(|z| z.norm_sqr()).sum();
    let mut q = 0.0;
    for a in 0..z.len() {
        for k in 0..z.len() {
            if a != k {
                q += (z[a] * z[k].conj()).re;
            }
        }
    }
    (utility, q)
}

/// Random row with its feasible q range.
fn feasible_row() -> impl Strategy<Value = (Vec<f64>, f64)> {
    prop::collection::vec(0.0f64..1.0, 1..6)
        .prop_filter("some mass", |r| r.iter().sum::<f64>() > 1e-3)
        .prop_flat_map(|r| {
            let total: f64 = r.iter().sum();
            let row: Vec<f64> = r.iter().map(|p| p / total).collect();
            let range = feasible_q_range(&row).unwrap();
            (Just(row), 0.0f64..=1.0).prop_map(move |(row, t)| {
                let q = range.q_min + t * (range.q_max - range.q_min);
                (row, q)
            })
        })
}

proptest! {
    #[test]
    fn decomposition_identity((d, c, b) in state_and_prospect()) {
        let frame = build_frame(&[("A", d)]).unwrap();
        let psi = StrategicState::normalized(&frame, c).unwrap();
        let prospect = ProspectState::new(&frame, "p", b.clone()).unwrap();
        let r = decompose(&prospect, &psi).unwrap();
        let (utility, q) = double_sum(&b, psi.amplitudes());
        prop_assert!((r.utility_factor - utility).abs() < 1e-12);
        prop_assert!((r.probability - utility - q).abs() < 1e-12);
        prop_assert!((r.attraction - q).abs() < 1e-12);
    }

    #[test]
    fn global_phase_invariance((d, c, b) in state_and_prospect(), theta in 0.0f64..std::f64::consts::TAU) {
        let frame = build_frame(&[("A", d)]).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let psi = StrategicState::normalized(&frame, c.clone()).unwrap();
        let turned = StrategicState::normalized(&frame, c.iter().map(|z| z * rot).collect()).unwrap();
        let prospect = ProspectState::new(&frame, "p", b).unwrap();
        let a = decompose(&prospect, &psi).unwrap();
        let t = decompose(&prospect, &turned).unwrap();
        prop_assert!((a.probability - t.probability).abs() < 1e-12);
        prop_assert!((a.attraction - t.attraction).abs() < 1e-12);
    }

    #[test]
    fn bayes_reduces_to_classical(raw in prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..6), pick in 0usize..6) {
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let weights: Vec<f64> = raw.iter().map(|(_, w)| w / total).collect();
        let cond: Vec<f64> = raw.iter().map(|(c, _)| *c).collect();
        let classical: f64 = cond.iter().zip(&weights).map(|(c, w)| c * w).sum();
        prop_assume!(classical > 1e-6);
        let j = pick % cond.len();
        let joint = cond[j] * weights[j];
        let post = qdt_bayes(&cond, &weights, 0.0, joint).unwrap();
        prop_assert!((post - joint / classical).abs() < 1e-12);
    }

    #[test]
    fn calibration_round_trip((row, q) in feasible_row()) {
        let phases = calibrate_prospect(&row, q).unwrap();
        prop_assert!((row_interference(&row, &phases) - q).abs() < 1e-9);
    }

    #[test]
    fn binary_lattices_alternate(r1 in prop::collection::vec(0.01f64..1.0, 1..5), r2 in prop::collection::vec(0.01f64..1.0, 1..5), split in 0.05f64..0.95) {
        // second row shares the first's width so both live on a 2 x W frame
        let w = r1.len().max(r2.len());
        let pad = |r: &[f64], s: f64| -> Vec<f64> {
            let t: f64 = r.iter().sum();
            (0..w).map(|k| r.get(k).map_or(0.0, |p| p / t * s)).collect()
        };
        let a = pad(&r1, split);
        let b = pad(&r2, 1.0 - split);
        let ra = feasible_q_range(&a).unwrap();
        let rb = feasible_q_range(&b).unwrap();
        let lo = ra.q_min.max(-rb.q_max);
        let hi = ra.q_max.min(-rb.q_min);
        let q = lo + (hi - lo) * 0.37;
        let frame = build_frame(&[("A", 2), ("X", w)]).unwrap();
        let target = CalibrationTarget::canonical(&frame, vec![a, b], vec![q, -q]).unwrap();
        let (psi, lattice) = calibrate_lattice(&target, &frame).unwrap();
        let rep = lattice_report(&lattice, &psi).unwrap();
        prop_assert!((rep.reports[0].attraction + rep.reports[1].attraction).abs() < 1e-12);
        prop_assert!((rep.probability_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn allais_differences_are_antisymmetric(u in prop::collection::vec(-10.0f64..10.0, 3)) {
        let sets = vec![vec![0.0, 1.0, 0.0], vec![0.01, 0.89, 0.10], vec![0.90, 0.0, 0.10], vec![0.89, 0.11, 0.0]];
        let (s12, s34) = allais_classical_contradiction(&sets, &u).unwrap();
        prop_assert!((s12 + s34).abs() < 1e-12);
    }
}

#[test]
fn lattice_joint_normalization_enforced() {
    let frame = build_frame(&[("A", 2)]).unwrap();
    let psi = StrategicState::uniform(&frame);
    let big = ProspectState::new(&frame, "p", vec![Complex64::new(2.0, 0.0); 2]).unwrap();
    let lattice = ProspectLattice::new(vec![big]).unwrap();
    assert!(lattice_report(&lattice, &psi).is_err());
}

#[test]
fn result_documents_round_trip() {
    for name in qdt_core::scenario::BUILTINS {
        let s = builtin(name).unwrap();
        let doc = evaluate_document(&s, None, &Tolerances::default(), true).unwrap();
        let text = save_results(&doc);
        assert_eq!(load_results(&text).unwrap(), doc, "{name}");
    }
}
