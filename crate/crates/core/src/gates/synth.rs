//! Square-pulse single-qubit gates on one triple.
//!
//! Holding intra-triple couplings at `1 + ΔJ` applies the logical generator
//!
//! ```text
//! J₂₃ + s:             −(s/2)·σ_z
//! J₁₂ + 2s, J₂₃ + s:   (√3 s/2)·σ_x
//! J₁₂ + s:             (s/4)(√3 σ_x + σ_z)
//! J₁₃ + s:             (s/4)(−√3 σ_x + σ_z)
//! ```
//!
//! The last two are rotations about axes 120° from +z in the x–z plane (each
//! generator has eigenvalues ±s/2). The logical doublet is an exact
//! eigenspace of every such Hamiltonian, so these gates never leak.

use std::f64::consts::PI;

use super::report::TargetGate;
use super::schedule::{PulseSchedule, Segment};
use crate::encoding::IntraCoupling;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::spin::{CouplingGraph, IDLE_COUPLING, OPTIMAL_FIELD};

/// Open interval of gate couplings that keeps the logical doublet lowest.
pub const CROSSING_FREE: (f64, f64) = (0.25, 1.75);

const TRIPLE: [usize; 3] = [0, 1, 2];

/// Angles below this are treated as zero when building schedules.
pub const ANGLE_EPS: f64 = 1e-12;

fn idle() -> CouplingGraph {
    CouplingGraph::idle_triple(OPTIMAL_FIELD)
}

fn check_inputs(theta: f64, delta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::Precondition(format!(
            "rotation angle must be finite, got {theta}"
        )));
    }
    if !(delta.is_finite() && delta != 0.0) {
        return Err(Error::Precondition(format!(
            "coupling offset must be finite and nonzero, got {delta}"
        )));
    }
    Ok(())
}

fn shifted(shifts: &[(IntraCoupling, f64)]) -> Result<CouplingGraph> {
    let mut g = idle();
    for &(which, shift) in shifts {
        let j = IDLE_COUPLING + shift;
        if !(j > CROSSING_FREE.0 && j < CROSSING_FREE.1) {
            return Err(Error::Precondition(format!(
                "{} = {j} is outside the crossing-free window ({}, {})",
                which.label(),
                CROSSING_FREE.0,
                CROSSING_FREE.1
            )));
        }
        let (i, k) = which.sites(TRIPLE);
        g = g.with_coupling(i, k, j)?;
    }
    Ok(g)
}

fn square(shifts: &[(IntraCoupling, f64)], hold: f64) -> Result<PulseSchedule> {
    let g = shifted(shifts)?;
    PulseSchedule::new(idle(), vec![Segment::constant(hold, g)])
}

/// Rz(θ) = exp(−iθσ_z/2) by holding J₂₃ = 1 − sign(θ)·|δ| for |θ/δ|.
pub fn synthesize_rz(theta: f64, delta: f64) -> Result<PulseSchedule> {
    check_inputs(theta, delta)?;
    let shift = -theta.signum() * delta.abs();
    // validate the window even when no pulse is needed
    shifted(&[(IntraCoupling::J23, shift)])?;
    if theta.abs() < ANGLE_EPS {
        return Ok(PulseSchedule::empty(idle()));
    }
    square(&[(IntraCoupling::J23, shift)], (theta / delta).abs())
}

/// Rx(θ) by holding J₁₂ = 1 + 2s, J₂₃ = 1 + s with s = sign(θ)·|δ|, for
/// |θ|/(√3|δ|).
pub fn synthesize_rx(theta: f64, delta: f64) -> Result<PulseSchedule> {
    check_inputs(theta, delta)?;
    let s = theta.signum() * delta.abs();
    let shifts = [(IntraCoupling::J12, 2.0 * s), (IntraCoupling::J23, s)];
    shifted(&shifts)?;
    if theta.abs() < ANGLE_EPS {
        return Ok(PulseSchedule::empty(idle()));
    }
    square(&shifts, theta.abs() / (3f64.sqrt() * delta.abs()))
}

/// Unit rotation axis produced by shifting J₁₂ or J₁₃ alone.
pub fn axis120(which: IntraCoupling) -> Result<[f64; 3]> {
    let x = 3f64.sqrt() / 2.0;
    match which {
        IntraCoupling::J12 => Ok([x, 0.0, 0.5]),
        IntraCoupling::J13 => Ok([-x, 0.0, 0.5]),
        IntraCoupling::J23 => Err(Error::Precondition(
            "the 120° axes come from J12 or J13".into(),
        )),
    }
}

/// Rotation by θ about [`axis120`]`(which)`: shift that coupling by
/// sign(θ)·|δ| for |θ/δ|.
pub fn synthesize_axis120(theta: f64, delta: f64, which: IntraCoupling) -> Result<PulseSchedule> {
    axis120(which)?;
    check_inputs(theta, delta)?;
    let shifts = [(which, theta.signum() * delta.abs())];
    shifted(&shifts)?;
    if theta.abs() < ANGLE_EPS {
        return Ok(PulseSchedule::empty(idle()));
    }
    square(&shifts, (theta / delta).abs())
}

/// z–x–z Euler angles `(a, b, c)` with `U ∝ Rz(a)·Rx(b)·Rz(c)`, each
/// wrapped to (−π, π].
pub fn euler_zxz(target: &TargetGate) -> Result<(f64, f64, f64)> {
    if target.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 2x2 target, got {}x{0}",
            target.dim()
        )));
    }
    let u = target.matrix();
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let root = det.sqrt();
    let p: C64 = u[(0, 0)] / root;
    let q: C64 = u[(0, 1)] / root;
    let b = 2.0 * q.norm().atan2(p.norm());
    // p = cos(b/2)·e^{−i(a+c)/2},  q = −i·sin(b/2)·e^{−i(a−c)/2}
    let (sum, diff) = if q.norm() < ANGLE_EPS {
        (-2.0 * p.arg(), -2.0 * p.arg())
    } else if p.norm() < ANGLE_EPS {
        (-2.0 * q.arg() - PI, -2.0 * q.arg() - PI)
    } else {
        (-2.0 * p.arg(), -2.0 * q.arg() - PI)
    };
    let (a, c) = if q.norm() < ANGLE_EPS || p.norm() < ANGLE_EPS {
        (sum, 0.0)
    } else {
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    Ok((wrap(a), wrap(b), wrap(c)))
}

/// Wraps an angle into (−π, π].
pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Rz(c), then Rx(b), then Rz(a), omitting zero angles.
pub fn decompose_su2(target: &TargetGate, delta_z: f64, delta_x: f64) -> Result<PulseSchedule> {
    let (a, b, c) = euler_zxz(target)?;
    let mut out = PulseSchedule::empty(idle());
    for piece in [
        synthesize_rz(c, delta_z)?,
        synthesize_rx(b, delta_x)?,
        synthesize_rz(a, delta_z)?,
    ] {
        out = out.then(&piece)?;
    }
    Ok(out)
}
