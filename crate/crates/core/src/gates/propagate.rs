//! Time evolution under a pulse schedule.
//!
//! Every Hamiltonian along a schedule conserves total S_z, so each
//! magnetization block is evolved on its own and the blocks are assembled
//! into the full unitary at the end. Constant segments use one exact
//! exponential; linear ramps use midpoint steps
//! `exp(−i·H(t_k + Δt/2)·Δt)`, which are second-order accurate.

use serde::Serialize;

use super::schedule::{PulseSchedule, Ramp};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, propagator_from_spectrum, ComplexMatrix, UnitaryOperator};
use crate::spin::{build_hamiltonian, sz_sectors, CouplingGraph, SectorBasis};

/// Full-space unitary of `schedule` with `n_steps` midpoint steps per ramp.
pub fn propagate(schedule: &PulseSchedule, n_steps: usize) -> Result<UnitaryOperator> {
    if n_steps == 0 {
        return Err(Error::Precondition(
            "at least one step per segment is required".into(),
        ));
    }
    let n_sites = schedule.idle().n_sites();
    let sectors = sz_sectors(n_sites);
    let mut blocks: Vec<ComplexMatrix> = sectors
        .iter()
        .map(|s| ComplexMatrix::identity(s.len()))
        .collect();

    for seg in schedule.segments() {
        let (steps, dt) = match seg.ramp {
            Ramp::Constant => (1, seg.duration),
            Ramp::Linear => (n_steps, seg.duration / n_steps as f64),
        };
        for k in 0..steps {
            let graph = seg.graph_at((k as f64 + 0.5) / steps as f64);
            step_blocks(&graph, &sectors, &mut blocks, dt)?;
        }
    }
    Ok(assemble(&sectors, &blocks, 1 << n_sites))
}

fn step_blocks(
    graph: &CouplingGraph,
    sectors: &[SectorBasis],
    blocks: &mut [ComplexMatrix],
    dt: f64,
) -> Result<()> {
    let h = build_hamiltonian(graph);
    for (sector, block) in sectors.iter().zip(blocks.iter_mut()) {
        let spectrum = hermitian_eig(&sector.restrict(&h))?;
        let u = propagator_from_spectrum(&spectrum, dt);
        *block = u.matrix().matmul(block);
    }
    Ok(())
}

fn assemble(sectors: &[SectorBasis], blocks: &[ComplexMatrix], dim: usize) -> UnitaryOperator {
    let mut full = ComplexMatrix::zeros(dim, dim);
    for (sector, block) in sectors.iter().zip(blocks) {
        for (r, &gr) in sector.indices.iter().enumerate() {
            for (c, &gc) in sector.indices.iter().enumerate() {
                full[(gr, gc)] = block[(r, c)];
            }
        }
    }
    UnitaryOperator::from_matrix_unchecked(full)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Propagation {
    pub unitary: UnitaryOperator,
    /// `(4/3)·‖U(2n) − U(n)‖_max`, an estimate of the stepping error in
    /// `unitary` that bounds the change from doubling the step count.
    pub error_estimate: f64,
    pub n_steps: usize,
}

/// [`propagate`] plus a step-doubling error estimate.
pub fn propagate_with_estimate(schedule: &PulseSchedule, n_steps: usize) -> Result<Propagation> {
    let unitary = propagate(schedule, n_steps)?;
    let has_ramp = schedule.segments().iter().any(|s| s.ramp == Ramp::Linear);
    let error_estimate = if has_ramp {
        let fine = propagate(schedule, 2 * n_steps)?;
        (fine.matrix() - unitary.matrix()).max_abs() * 4.0 / 3.0
    } else {
        0.0
    };
    Ok(Propagation {
        unitary,
        error_estimate,
        n_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::logical_basis;
    use crate::gates::schedule::Segment;
    use crate::linalg::{expm_minus_i_h_t, C64};
    use crate::spin::OPTIMAL_FIELD;

    fn idle() -> CouplingGraph {
        CouplingGraph::idle_triple(OPTIMAL_FIELD)
    }

    /// Dense reference: every step exponentiates the full 2ⁿ Hamiltonian.
    fn propagate_dense(schedule: &PulseSchedule, n_steps: usize) -> ComplexMatrix {
        let mut u = ComplexMatrix::identity(schedule.idle().dim());
        for seg in schedule.segments() {
            let dt = seg.duration / n_steps as f64;
            for k in 0..n_steps {
                let g = seg.graph_at((k as f64 + 0.5) / n_steps as f64);
                u = expm_minus_i_h_t(&build_hamiltonian(&g), dt)
                    .unwrap()
                    .matrix()
                    .matmul(&u);
            }
        }
        u
    }

    #[test]
    fn idle_schedule_phases() {
        let t = 3.7;
        let s = PulseSchedule::new(idle(), vec![Segment::constant(t, idle())]).unwrap();
        let u = propagate(&s, 5).unwrap();
        let h = build_hamiltonian(&idle());
        assert!(u.matrix().commutator(h.matrix()).max_abs() <= 1e-10);
        let b = logical_basis([0, 1, 2], 3).unwrap();
        let phase = C64::from_polar(1.0, 9.0 / 8.0 * t);
        for v in [&b.zero, &b.one] {
            let out = u.apply(v);
            assert!(out.add(&v.scale(-phase)).norm() <= 1e-10);
        }
    }

    #[test]
    fn constant_segment_is_exact() {
        let g = idle().with_coupling(0, 1, 1.3).unwrap();
        let s = PulseSchedule::new(idle(), vec![Segment::constant(2.5, g.clone())]).unwrap();
        let exact = expm_minus_i_h_t(&build_hamiltonian(&g), 2.5).unwrap();
        for n in [1, 7, 40] {
            assert!((propagate(&s, n).unwrap().matrix() - exact.matrix()).max_abs() <= 1e-10);
        }
        assert_eq!(propagate_with_estimate(&s, 3).unwrap().error_estimate, 0.0);
        assert!(propagate(&s, 0).is_err());
    }

    #[test]
    fn zero_width_modulation_of_pure_field_is_identity() {
        let zero = CouplingGraph::new(3, [(0, 1, 0.0)], 0.0).unwrap();
        let s = PulseSchedule::new(zero.clone(), vec![Segment::linear(1.0, zero.clone(), zero)])
            .unwrap();
        assert!(
            (propagate(&s, 4).unwrap().matrix() - &ComplexMatrix::identity(8)).max_abs() <= 1e-15
        );
        assert_eq!(
            propagate(&PulseSchedule::empty(idle()), 3).unwrap(),
            UnitaryOperator::identity(8)
        );
    }

    #[test]
    fn sector_blocks_match_dense_stepping() {
        let pair = CouplingGraph::idle_pair(0.0, OPTIMAL_FIELD).unwrap();
        let peak = pair
            .clone()
            .with_coupling(0, 3, 0.4)
            .unwrap()
            .with_coupling(1, 2, 1.1)
            .unwrap();
        let s = PulseSchedule::new(
            pair.clone(),
            vec![
                Segment::linear(2.0, pair.clone(), peak.clone()),
                Segment::linear(2.0, peak, pair),
            ],
        )
        .unwrap();
        let blocked = propagate(&s, 6).unwrap();
        let dense = propagate_dense(&s, 6);
        assert!((blocked.matrix() - &dense).max_abs() <= 1e-10);
        assert!(blocked.matrix().unitarity_defect() <= 1e-9);
    }

    #[test]
    fn single_triple_ramps_are_exact() {
        // every intra-triple Hamiltonian commutes with the idle one, so a
        // linear ramp has no time-ordering error
        let peak = idle()
            .with_coupling(0, 1, 1.5)
            .unwrap()
            .with_coupling(1, 2, 0.6)
            .unwrap();
        let s = PulseSchedule::new(
            idle(),
            vec![
                Segment::linear(3.0, idle(), peak.clone()),
                Segment::linear(3.0, peak, idle()),
            ],
        )
        .unwrap();
        let coarse = propagate(&s, 2).unwrap();
        let fine = propagate(&s, 64).unwrap();
        assert!((coarse.matrix() - fine.matrix()).max_abs() <= 1e-12);
    }

    #[test]
    fn midpoint_stepping_is_second_order() {
        let pair = CouplingGraph::idle_pair(0.0, OPTIMAL_FIELD).unwrap();
        let peak = pair.clone().with_coupling(0, 3, 0.5).unwrap();
        let s = PulseSchedule::new(
            pair.clone(),
            vec![
                Segment::linear(4.0, pair.clone(), peak.clone()),
                Segment::linear(4.0, peak, pair),
            ],
        )
        .unwrap();
        let u: Vec<ComplexMatrix> = [8, 16, 32]
            .iter()
            .map(|&n| propagate(&s, n).unwrap().into_matrix())
            .collect();
        let d1 = (&u[1] - &u[0]).max_abs();
        let d2 = (&u[2] - &u[1]).max_abs();
        let ratio = d1 / d2;
        assert!((2.0..=8.0).contains(&ratio), "ratio {ratio}");
        let est = propagate_with_estimate(&s, 16).unwrap();
        assert!(d2 <= est.error_estimate);
    }
}
