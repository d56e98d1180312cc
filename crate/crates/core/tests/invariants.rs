//! Property tests over random couplings and schedules.

use eoq::encoding::LogicalLayout;
use eoq::gates::{gate_report, propagate, synthesize_rz, PulseSchedule, Segment, TargetGate};
use eoq::linalg::hermitian_eig;
use eoq::spin::{build_hamiltonian, sz_sectors, total_spin, Axis, CouplingGraph, OPTIMAL_FIELD};
use proptest::prelude::*;

fn pair_graph(c: &[f64; 7], h: f64) -> CouplingGraph {
    CouplingGraph::new(
        6,
        [
            (0, 1, c[0]),
            (0, 2, c[1]),
            (1, 2, c[2]),
            (3, 4, c[3]),
            (3, 5, c[4]),
            (4, 5, c[5]),
            (0, 3, c[6]),
        ],
        h,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_sz(c in proptest::array::uniform7(0.0..2.0f64), h in 0.0..1.5f64) {
        let g = pair_graph(&c, h);
        let m = build_hamiltonian(&g);
        prop_assert!(m.matrix().hermiticity_defect() <= 1e-14);
        let sz = total_spin(6, Axis::Z);
        prop_assert!(m.matrix().commutator(sz.matrix()).max_abs() <= 1e-13);
    }

    #[test]
    fn sector_spectra_cover_the_dense_spectrum(c in proptest::array::uniform7(0.0..2.0f64), h in 0.0..1.5f64) {
        let g = pair_graph(&c, h);
        let m = build_hamiltonian(&g);
        let dense = hermitian_eig(&m).unwrap().eigenvalues;
        let mut blocks: Vec<f64> = sz_sectors(6)
            .iter()
            .flat_map(|s| hermitian_eig(&s.restrict(&m)).unwrap().eigenvalues)
            .collect();
        blocks.sort_by(f64::total_cmp);
        for (a, b) in dense.iter().zip(&blocks) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        // Heisenberg and Zeeman terms are traceless
        prop_assert!(dense.iter().sum::<f64>().abs() <= 1e-9);
    }

    #[test]
    fn ramped_evolution_is_unitary(j in 0.05..0.6f64, ramp in 0.5..4.0f64, hold in 0.1..4.0f64) {
        let idle = CouplingGraph::idle_pair(0.0, OPTIMAL_FIELD).unwrap();
        let peak = CouplingGraph::idle_pair(j, OPTIMAL_FIELD).unwrap();
        let s = PulseSchedule::new(
            idle.clone(),
            vec![
                Segment::linear(ramp, idle.clone(), peak.clone()),
                Segment::constant(hold, peak.clone()),
                Segment::linear(ramp, peak, idle),
            ],
        )
        .unwrap();
        let u = propagate(&s, 16).unwrap();
        prop_assert!(u.matrix().unitarity_defect() <= 1e-12);
        let r = gate_report(&u, &TargetGate::identity(4), &LogicalLayout::pair()).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
        prop_assert!(r.max_leakage >= -1e-12 && r.max_leakage <= 1.0);
        prop_assert!(r.avg_leakage <= r.max_leakage + 1e-15);
    }

    #[test]
    fn z_rotations_compose(a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let s = synthesize_rz(a, 0.5).unwrap().then(&synthesize_rz(b, 0.5).unwrap()).unwrap();
        let r = gate_report(&propagate(&s, 1).unwrap(), &TargetGate::rz(a + b).unwrap(), &LogicalLayout::single()).unwrap();
        prop_assert!(r.fidelity >= 1.0 - 1e-12);
    }
}
