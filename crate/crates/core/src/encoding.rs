//! Logical qubits encoded in the S = 1/2, S_z = +1/2 doublet of a spin triple.
//!
//! For a triple `(a, b, c)`:
//!
//! ```text
//! |0_L⟩ = (|↑↑↓⟩ − |↑↓↑⟩)/√2
//! |1_L⟩ = (|↑↑↓⟩ + |↑↓↑⟩ − 2|↓↑↑⟩)/√6
//! ```
//!
//! `|0_L⟩` carries a singlet on (b, c) and `|1_L⟩` a triplet, so the two are
//! odd and even under the b ↔ c swap. Sites outside every triple are held in
//! |↑⟩. Multi-qubit basis states are ordered with the first triple as the most
//! significant logical bit: `[|00⟩, |01⟩, |10⟩, |11⟩]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianOperator, StateVector, C64, ZERO};
use crate::spin::{build_hamiltonian, exchange_term, site_mask, CouplingGraph, IDLE_COUPLING};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Disjoint site triples hosting logical qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogicalLayout {
    triples: Vec<[usize; 3]>,
    n_sites: usize,
}

impl LogicalLayout {
    pub fn new(triples: Vec<[usize; 3]>, n_sites: usize) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::InvalidLayout(
                "at least one triple is required".into(),
            ));
        }
        let mut seen = vec![false; n_sites];
        for t in &triples {
            for &site in t {
                if site >= n_sites {
                    return Err(Error::InvalidLayout(format!(
                        "site {site} out of range for {n_sites} sites"
                    )));
                }
                if seen[site] {
                    return Err(Error::InvalidLayout(format!(
                        "site {site} appears in more than one slot"
                    )));
                }
                seen[site] = true;
            }
        }
        Ok(Self { triples, n_sites })
    }

    /// One logical qubit on sites (0, 1, 2).
    pub fn single() -> Self {
        Self {
            triples: vec![[0, 1, 2]],
            n_sites: 3,
        }
    }

    /// Two logical qubits on (0, 1, 2) and (3, 4, 5).
    pub fn pair() -> Self {
        Self {
            triples: vec![[0, 1, 2], [3, 4, 5]],
            n_sites: 6,
        }
    }

    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_logical(&self) -> usize {
        self.triples.len()
    }

    pub fn logical_dim(&self) -> usize {
        1 << self.triples.len()
    }

    /// 2·S_z shared by every logical basis state.
    pub fn twice_m(&self) -> i32 {
        // each triple contributes +1/2, each spectator site +1/2
        (self.n_sites - 2 * self.triples.len()) as i32
    }

    /// Embedded logical basis states in `[|0…0⟩, …, |1…1⟩]` order.
    pub fn basis_states(&self) -> Vec<StateVector> {
        let dim = 1usize << self.n_sites;
        (0..self.logical_dim())
            .map(|label| {
                // sparse product over triples, starting from all-up
                let mut terms: Vec<(usize, f64)> = vec![(0, 1.0)];
                for (slot, triple) in self.triples.iter().enumerate() {
                    let bit = (label >> (self.n_logical() - 1 - slot)) & 1;
                    let local = triple_amplitudes(self.n_sites, *triple, bit == 1);
                    terms = terms
                        .iter()
                        .flat_map(|&(idx, amp)| local.iter().map(move |&(m, a)| (idx | m, amp * a)))
                        .collect();
                }
                let mut v = vec![ZERO; dim];
                for (idx, amp) in terms {
                    v[idx] += amp;
                }
                StateVector::new(v)
            })
            .collect()
    }

    /// Basis states as the columns of a `2ⁿ × 2ᵏ` isometry.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        let states = self.basis_states();
        let cols: Vec<&[C64]> = states.iter().map(StateVector::amplitudes).collect();
        ComplexMatrix::from_columns(&cols).expect("equal-length basis states")
    }
}

/// (bit pattern, amplitude) pairs of |0_L⟩ or |1_L⟩ on a triple.
fn triple_amplitudes(n_sites: usize, [a, b, c]: [usize; 3], one: bool) -> Vec<(usize, f64)> {
    let (ma, mb, mc) = (
        site_mask(n_sites, a),
        site_mask(n_sites, b),
        site_mask(n_sites, c),
    );
    if one {
        let s6 = 6f64.sqrt();
        vec![(mc, 1.0 / s6), (mb, 1.0 / s6), (ma, -2.0 / s6)]
    } else {
        vec![(mc, 1.0 / SQRT_2), (mb, -1.0 / SQRT_2)]
    }
}

/// One of the three couplings inside a triple (a, b, c): J₁₂ is a–b, J₁₃ is
/// a–c and J₂₃ is b–c.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum IntraCoupling {
    J12,
    J13,
    J23,
}

impl IntraCoupling {
    pub const ALL: [IntraCoupling; 3] =
        [IntraCoupling::J12, IntraCoupling::J13, IntraCoupling::J23];

    pub fn sites(self, [a, b, c]: [usize; 3]) -> (usize, usize) {
        match self {
            IntraCoupling::J12 => (a, b),
            IntraCoupling::J13 => (a, c),
            IntraCoupling::J23 => (b, c),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IntraCoupling::J12 => "J12",
            IntraCoupling::J13 => "J13",
            IntraCoupling::J23 => "J23",
        }
    }
}

impl std::str::FromStr for IntraCoupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "J12" => Ok(IntraCoupling::J12),
            "J13" => Ok(IntraCoupling::J13),
            "J23" => Ok(IntraCoupling::J23),
            _ => Err(Error::Precondition(format!(
                "unknown coupling '{s}' (expected J12, J13 or J23)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LogicalState {
    Zero,
    One,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogicalBasis {
    pub zero: StateVector,
    pub one: StateVector,
}

impl LogicalBasis {
    pub fn state(&self, which: LogicalState) -> &StateVector {
        match which {
            LogicalState::Zero => &self.zero,
            LogicalState::One => &self.one,
        }
    }
}

/// |0_L⟩ and |1_L⟩ on `triple`, spectators up.
pub fn logical_basis(triple: [usize; 3], n_sites: usize) -> Result<LogicalBasis> {
    let layout = LogicalLayout::new(vec![triple], n_sites)?;
    let mut states = layout.basis_states().into_iter();
    let zero = states.next().expect("two states");
    let one = states.next().expect("two states");
    Ok(LogicalBasis { zero, one })
}

/// Projected Hamiltonian in the logical basis, split into a traceless part
/// and the identity component that it drops.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveHamiltonian {
    pub matrix: HermitianOperator,
    pub trace_offset: f64,
}

impl EffectiveHamiltonian {
    fn from_block(block: ComplexMatrix) -> Self {
        let d = block.rows();
        let offset = block.trace().re / d as f64;
        let mut traceless = block;
        for k in 0..d {
            traceless[(k, k)] -= offset;
        }
        let matrix = HermitianOperator::new(traceless).expect("projection of a Hermitian operator");
        Self {
            matrix,
            trace_offset: offset,
        }
    }

    /// Traceless part plus `trace_offset · I`.
    pub fn full(&self) -> HermitianOperator {
        self.matrix.shift(self.trace_offset)
    }
}

/// Closed-form logical Hamiltonian of one triple with couplings J₁₂ (a–b),
/// J₁₃ (a–c), J₂₃ (b–c) in field `h`:
///
/// ```text
/// H_L = ¼ [[ J₁₂ + J₁₃ − 2J₂₃,   √3(J₁₂ − J₁₃)      ],
///          [ √3(J₁₂ − J₁₃),       −(J₁₂ + J₁₃ − 2J₂₃) ]]
/// offset = −(J₁₂ + J₁₃ + J₂₃)/4 − h/2
/// ```
///
/// Raising J₂₃ lowers `|0_L⟩`, whose (b, c) pair is a singlet.
pub fn effective_h1(j12: f64, j13: f64, j23: f64, field: f64) -> EffectiveHamiltonian {
    let d = (j12 + j13 - 2.0 * j23) / 4.0;
    let o = 3f64.sqrt() * (j12 - j13) / 4.0;
    let m = ComplexMatrix::from_real_rows(&[&[d, o], &[o, -d]]).expect("2x2 literal");
    EffectiveHamiltonian {
        matrix: HermitianOperator::new(m).expect("real symmetric"),
        trace_offset: -(j12 + j13 + j23) / 4.0 - field / 2.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Projection {
    pub effective: EffectiveHamiltonian,
    /// ‖(I − P)·H·P‖_max: how far the logical span is from invariant.
    pub residual: f64,
}

/// ⟨i_L|H|j_L⟩ over the columns of `basis` (an isometry).
pub fn project_effective(h: &HermitianOperator, basis: &ComplexMatrix) -> Result<Projection> {
    if basis.rows() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, operator dimension is {}",
            basis.rows(),
            h.dim()
        )));
    }
    let hb = h.matrix().matmul(basis);
    let block = basis.adjoint().matmul(&hb);
    let leak = &hb - &basis.matmul(&block);
    Ok(Projection {
        effective: EffectiveHamiltonian::from_block(block),
        residual: leak.max_abs(),
    })
}

/// ⟨ψ|(1/4 − S⃗ᵢ·S⃗ⱼ)|ψ⟩, the (i, j) singlet population.
pub fn singlet_probability(state: &StateVector, pair: (usize, usize)) -> Result<f64> {
    let n = state.dim().trailing_zeros() as usize;
    if 1usize << n != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state length {} is not a power of two",
            state.dim()
        )));
    }
    let exchange = exchange_term(n, pair.0, pair.1)?;
    let p = 0.25 * state.inner(state).re - exchange.expectation(state);
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundStateReport {
    /// `None` when the ground level is degenerate.
    pub state: Option<LogicalState>,
    /// |⟨ground|state⟩|² (zero when degenerate).
    pub overlap: f64,
    pub ground_energy: f64,
    /// Distance to the next level.
    pub splitting: f64,
}

/// Largest |shift| of J₂₃ that keeps the logical pair below every other level.
pub const CROSSING_FREE_SHIFT: f64 = 0.75;

/// Unique ground state of an idle triple with J₂₃ = 1 + `j23_shift`.
pub fn initialization_ground(j23_shift: f64, field: f64) -> Result<GroundStateReport> {
    if !(j23_shift.abs() < CROSSING_FREE_SHIFT) {
        return Err(Error::Precondition(format!(
            "J23 shift {j23_shift} outside the crossing-free window (-{CROSSING_FREE_SHIFT}, {CROSSING_FREE_SHIFT})"
        )));
    }
    let graph = CouplingGraph::idle_triple(field).with_coupling(1, 2, IDLE_COUPLING + j23_shift)?;
    let spectrum = hermitian_eig(&build_hamiltonian(&graph))?;
    let classes = spectrum.degeneracy_classes();
    let ground = &classes[0];
    let ground_energy = spectrum.eigenvalues[0];
    let splitting = classes
        .get(1)
        .map_or(0.0, |c| spectrum.eigenvalues[c.start] - ground_energy);
    if ground.len() > 1 {
        return Ok(GroundStateReport {
            state: None,
            overlap: 0.0,
            ground_energy,
            splitting: 0.0,
        });
    }
    let v = StateVector::new(spectrum.eigenvector(0));
    let basis = logical_basis([0, 1, 2], 3)?;
    let p0 = basis.zero.inner(&v).norm_sqr();
    let p1 = basis.one.inner(&v).norm_sqr();
    let (state, overlap) = if p0 >= p1 {
        (LogicalState::Zero, p0)
    } else {
        (LogicalState::One, p1)
    };
    Ok(GroundStateReport {
        state: Some(state),
        overlap,
        ground_energy,
        splitting,
    })
}
