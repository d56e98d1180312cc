use serde::Serialize;

use crate::encoding::LogicalLayout;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, UnitaryOperator, C64, I, ONE};

/// A gate expressed in the logical basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TargetGate {
    matrix: UnitaryOperator,
}

impl TargetGate {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !m.is_square() || !(m.rows() == 2 || m.rows() == 4) {
            return Err(Error::DimensionMismatch(format!(
                "target must be 2x2 or 4x4, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if defect > Self::TOLERANCE {
            return Err(Error::NotUnitary { deviation: defect });
        }
        Ok(Self {
            matrix: UnitaryOperator::new(m)?,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: UnitaryOperator::identity(dim),
        }
    }

    /// exp(−iθ n̂·σ⃗/2) for a unit axis (n_x, n_y, n_z).
    pub fn rotation(axis: [f64; 3], theta: f64) -> Result<Self> {
        let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 0.0) || !theta.is_finite() {
            return Err(Error::Precondition(
                "rotation needs a nonzero axis and a finite angle".into(),
            ));
        }
        let [x, y, z] = axis.map(|a| a / norm);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                C64::new(c, -s * z),
                C64::new(-s * y, -s * x),
                C64::new(s * y, -s * x),
                C64::new(c, s * z),
            ],
        )?;
        Self::new(m)
    }

    pub fn rz(theta: f64) -> Result<Self> {
        Self::rotation([0.0, 0.0, 1.0], theta)
    }

    pub fn rx(theta: f64) -> Result<Self> {
        Self::rotation([1.0, 0.0, 0.0], theta)
    }

    /// diag(1, 1, 1, e^{iφ}).
    pub fn cphase(phi: f64) -> Result<Self> {
        Self::new(ComplexMatrix::diagonal(&[
            ONE,
            ONE,
            ONE,
            C64::from_polar(1.0, phi),
        ]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateReport {
    /// ⟨i_L|U|j_L⟩; unitary only when nothing leaks.
    pub logical_block: ComplexMatrix,
    pub fidelity: f64,
    pub max_leakage: f64,
    pub avg_leakage: f64,
    /// arg(u₀₀·u₁₁ / (u₀₁·u₁₀)) over the diagonal, two-qubit gates only.
    pub conditional_phase: Option<f64>,
}

/// Scores a full-space unitary against a logical target.
///
/// Fidelity is `|tr(T†L)|² / (d·tr(L†L))` on the logical block `L`, which
/// ignores global phase. Leakage of a basis input is `1 − ‖P·U·|j_L⟩‖²`.
pub fn gate_report(
    u: &UnitaryOperator,
    target: &TargetGate,
    layout: &LogicalLayout,
) -> Result<GateReport> {
    let basis = layout.basis_matrix();
    if basis.rows() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "unitary has dimension {}, layout needs {}",
            u.dim(),
            basis.rows()
        )));
    }
    let d = basis.cols();
    if target.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "target is {}x{0}, layout has {d} logical states",
            target.dim()
        )));
    }
    let logical = basis.adjoint().matmul(&u.matrix().matmul(&basis));
    let overlap = target
        .matrix()
        .adjoint()
        .matmul(&logical)
        .trace()
        .norm_sqr();
    let norm = logical.adjoint().matmul(&logical).trace().re;
    let fidelity = if norm > 0.0 {
        (overlap / (d as f64 * norm)).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let leakage: Vec<f64> = (0..d)
        .map(|j| (1.0 - (0..d).map(|i| logical[(i, j)].norm_sqr()).sum::<f64>()).clamp(0.0, 1.0))
        .collect();
    let max_leakage = leakage.iter().copied().fold(0.0, f64::max);
    let avg_leakage = leakage.iter().sum::<f64>() / d as f64;

    let conditional_phase = (d == 4).then(|| {
        let z = logical[(0, 0)] * logical[(3, 3)] / (logical[(1, 1)] * logical[(2, 2)]);
        z.arg()
    });
    Ok(GateReport {
        logical_block: logical,
        fidelity,
        max_leakage,
        avg_leakage,
        conditional_phase,
    })
}

/// Hermitian generator `G` with `exp(−i·G·t) ≈ L` for a short evolution,
/// from `i(L − L†)/(2t)` with the trace removed.
pub fn short_time_generator(logical: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let g = (logical - &logical.adjoint()).scale(I / (2.0 * t));
    let shift = g.trace() / g.rows() as f64;
    let mut out = g;
    for k in 0..out.rows() {
        out[(k, k)] -= shift;
    }
    out
}
