//! Conditional phase gate from one trapezoidal J₁₄ pulse.
//!
//! While J₁₄ is on, the logical states pick up the adiabatic phases
//! `Φ_xy = ∫λ_xy dt`. The gate is diag(1, 1, 1, e^{iφ}) up to global phase when
//!
//! ```text
//! C = Φ₀₀ + Φ₁₁ − 2Φ₀₁ ≡ −φ  (mod 2π)
//! L = Φ₀₁ − Φ₀₀         ≡ 0   (mod 2π)
//! ```
//!
//! C fixes the hold time. L is a single-qubit z phase; it is cancelled by
//! shifting J₂₃ and J₅₆ by the same amount during the pulse (following the
//! same trapezoid), or, in sequential mode, by a z pulse on both triples
//! after J₁₄ is switched off.

use serde::Serialize;

use super::schedule::{PulseSchedule, Segment};
use super::synth::wrap;
use crate::encoding::LogicalLayout;
use crate::error::{Error, Result};
use crate::lambda::LevelTracker;
use crate::spin::{CouplingGraph, IDLE_COUPLING, OPTIMAL_FIELD};

use std::f64::consts::PI;

/// J₁₄ at which the logical quartet meets the next level.
pub const GAP_CLOSING_J14: f64 = 0.75;

/// Largest coupling change between tracked diagonalizations during
/// calibration. Only level identification depends on it; the gap along the
/// pulse path stays far above this scale.
pub const CALIBRATION_TRACKING_STEP: f64 = 5e-3;

/// Bisection tolerance on the residual single-qubit phase (radians).
pub const PHASE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZCorrection {
    /// J₂₃ and J₅₆ follow the J₁₄ trapezoid.
    Simultaneous,
    /// Square z pulse on both triples after the J₁₄ pulse.
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CphaseOptions {
    pub correction: ZCorrection,
    /// Longest accepted schedule (1/J).
    pub max_duration: f64,
    /// |J₂₃ shift| of the sequential correction pulse.
    pub sequential_shift: f64,
}

impl Default for CphaseOptions {
    fn default() -> Self {
        Self {
            correction: ZCorrection::Simultaneous,
            max_duration: 1e4,
            sequential_shift: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CphaseCalibration {
    pub phi: f64,
    pub j14_peak: f64,
    pub ramp_time: f64,
    pub hold_time: f64,
    /// Peak shift of J₂₃ and J₅₆ during the pulse.
    pub z_shift: f64,
    /// λ₀₀ + λ₁₁ − 2λ₀₁ at the peak.
    pub conditional_rate: f64,
    /// λ₀₁ − λ₀₀ at the peak.
    pub local_rate: f64,
    /// Predicted C and L over the J₁₄ pulse.
    pub conditional_phase: f64,
    pub local_phase: f64,
    /// Sequential correction pulse (J₂₃ = J₅₆ = 1 + shift), if any.
    pub correction_shift: f64,
    pub correction_time: f64,
}

fn pair_idle() -> CouplingGraph {
    CouplingGraph::idle_pair(0.0, OPTIMAL_FIELD).expect("valid idle pair")
}

/// Couplings at fraction `s` of the way to the pulse peak.
fn pulse_graph(j14_peak: f64, z_shift: f64, s: f64) -> Result<CouplingGraph> {
    let j = IDLE_COUPLING + s * z_shift;
    CouplingGraph::idle_pair(s * j14_peak, OPTIMAL_FIELD)?
        .with_coupling(1, 2, j)?
        .with_coupling(4, 5, j)
}

/// Ramp integrals ∫₀¹ (C, L)(s) ds and the peak rates, from tracked levels.
struct PhaseProfile {
    ramp_c: f64,
    ramp_l: f64,
    peak_c: f64,
    peak_l: f64,
}

fn phase_profile(j14_peak: f64, z_shift: f64, nodes: usize) -> Result<PhaseProfile> {
    let step = (CALIBRATION_TRACKING_STEP / j14_peak.max(z_shift.abs())).min(1.0 / nodes as f64);
    let path = move |s: f64| pulse_graph(j14_peak, z_shift, s);
    let mut tracker = LevelTracker::new(path, &LogicalLayout::pair(), 0.0, step)?;
    let rates = |e: &[f64]| (e[0] + e[3] - 2.0 * e[1], e[1] - e[0]);
    let mut c = Vec::with_capacity(nodes + 1);
    let mut l = Vec::with_capacity(nodes + 1);
    let (c0, l0) = rates(tracker.energies());
    c.push(c0);
    l.push(l0);
    for k in 1..=nodes {
        let (ck, lk) = rates(tracker.advance_to(k as f64 / nodes as f64)?);
        c.push(ck);
        l.push(lk);
    }
    Ok(PhaseProfile {
        ramp_c: simpson(&c),
        ramp_l: simpson(&l),
        peak_c: c[nodes],
        peak_l: l[nodes],
    })
}

/// Composite Simpson rule on [0, 1] over an odd number of equally spaced samples.
fn simpson(y: &[f64]) -> f64 {
    let n = y.len() - 1;
    debug_assert!(n >= 2 && n & 1 == 0);
    let h = 1.0 / n as f64;
    let inner: f64 = (1..n)
        .map(|k| if k % 2 == 1 { 4.0 * y[k] } else { 2.0 * y[k] })
        .sum();
    h / 3.0 * (y[0] + inner + y[n])
}

struct Timing {
    hold: f64,
    total_c: f64,
    total_l: f64,
}

fn timing(profile: &PhaseProfile, ramp_time: f64, phi: f64) -> Result<Timing> {
    if !(profile.peak_c > 0.0) {
        return Err(Error::Calibration(format!(
            "conditional rate {} at the peak is not positive",
            profile.peak_c
        )));
    }
    let ramp_c = 2.0 * ramp_time * profile.ramp_c;
    // smallest C ≥ ramp_c with C ≡ −φ (mod 2π)
    let base = (-phi).rem_euclid(2.0 * PI);
    let target = base + 2.0 * PI * ((ramp_c - base) / (2.0 * PI)).ceil().max(0.0);
    let hold = (target - ramp_c) / profile.peak_c;
    Ok(Timing {
        hold,
        total_c: target,
        total_l: 2.0 * ramp_time * profile.ramp_l + hold * profile.peak_l,
    })
}

fn check_cphase_inputs(phi: f64, j14_peak: f64, ramp_time: f64, nodes: usize) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::Precondition(format!(
            "phase must be finite, got {phi}"
        )));
    }
    if !(j14_peak > 0.0 && j14_peak < GAP_CLOSING_J14) {
        return Err(Error::Precondition(format!(
            "J14 peak {j14_peak} outside the gapped window (0, {GAP_CLOSING_J14})"
        )));
    }
    if !(ramp_time >= 0.0 && ramp_time.is_finite()) {
        return Err(Error::Precondition(format!(
            "ramp time must be finite and non-negative, got {ramp_time}"
        )));
    }
    if nodes < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 calibration steps, got {nodes}"
        )));
    }
    Ok(())
}

/// Trapezoidal conditional phase gate with default options.
pub fn synthesize_cphase(
    phi: f64,
    j14_peak: f64,
    ramp_time: f64,
    n_calibration_steps: usize,
) -> Result<PulseSchedule> {
    Ok(calibrate_cphase(
        phi,
        j14_peak,
        ramp_time,
        n_calibration_steps,
        &CphaseOptions::default(),
    )?
    .0)
}

/// Trapezoidal conditional phase gate and the calibration data behind it.
///
/// `ramp_time = 0` gives a sudden square pulse at the peak couplings.
pub fn calibrate_cphase(
    phi: f64,
    j14_peak: f64,
    ramp_time: f64,
    n_calibration_steps: usize,
    options: &CphaseOptions,
) -> Result<(PulseSchedule, CphaseCalibration)> {
    check_cphase_inputs(phi, j14_peak, ramp_time, n_calibration_steps)?;
    let nodes = n_calibration_steps + n_calibration_steps % 2;
    let mut cal = CphaseCalibration {
        phi,
        j14_peak,
        ramp_time,
        hold_time: 0.0,
        z_shift: 0.0,
        conditional_rate: 0.0,
        local_rate: 0.0,
        conditional_phase: 0.0,
        local_phase: 0.0,
        correction_shift: 0.0,
        correction_time: 0.0,
    };
    if wrap(phi).abs() < 1e-12 {
        return Ok((PulseSchedule::empty(pair_idle()), cal));
    }

    let evaluate = |z: f64| -> Result<(PhaseProfile, Timing)> {
        let p = phase_profile(j14_peak, z, nodes)?;
        let t = timing(&p, ramp_time, phi)?;
        Ok((p, t))
    };

    let (profile, time, z_shift) = match options.correction {
        ZCorrection::Sequential => {
            let (p, t) = evaluate(0.0)?;
            (p, t, 0.0)
        }
        ZCorrection::Simultaneous => {
            // L grows with the J₂₃/J₅₆ shift; near J₁₄/3 it crosses zero
            let (mut lo, mut hi) = (0.0, (2.0 * j14_peak).min(0.7));
            let (p_lo, t_lo) = evaluate(lo)?;
            let (_, t_hi) = evaluate(hi)?;
            if !(t_lo.total_l < 0.0 && t_hi.total_l > 0.0) {
                return Err(Error::Calibration(format!(
                    "single-qubit phase not bracketed: L({lo}) = {}, L({hi}) = {}",
                    t_lo.total_l, t_hi.total_l
                )));
            }
            let mut best = (p_lo, t_lo, lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (p, t) = evaluate(mid)?;
                let done = t.total_l.abs() <= PHASE_TOL || hi - lo <= f64::EPSILON * hi;
                if t.total_l < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                best = (p, t, mid);
                if done {
                    break;
                }
            }
            if best.1.total_l.abs() > PHASE_TOL {
                return Err(Error::Calibration(format!(
                    "residual single-qubit phase {:e}",
                    best.1.total_l
                )));
            }
            best
        }
    };

    cal.hold_time = time.hold;
    cal.z_shift = z_shift;
    cal.conditional_rate = profile.peak_c;
    cal.local_rate = profile.peak_l;
    cal.conditional_phase = time.total_c;
    cal.local_phase = time.total_l;

    let idle = pair_idle();
    let peak = pulse_graph(j14_peak, z_shift, 1.0)?;
    let mut segments = Vec::new();
    if ramp_time > 0.0 {
        segments.push(Segment::linear(ramp_time, idle.clone(), peak.clone()));
    }
    if time.hold > 0.0 {
        segments.push(Segment::constant(time.hold, peak.clone()));
    }
    if ramp_time > 0.0 {
        segments.push(Segment::linear(ramp_time, peak, idle.clone()));
    }

    if options.correction == ZCorrection::Sequential {
        let residual = wrap(-time.total_l);
        if residual.abs() > 1e-12 {
            let shift = residual.signum() * options.sequential_shift.abs();
            let j = IDLE_COUPLING + shift;
            if !(options.sequential_shift > 0.0 && j > 0.25 && j < 1.75) {
                return Err(Error::Precondition(format!(
                    "sequential correction coupling {j} outside (0.25, 1.75)"
                )));
            }
            cal.correction_shift = shift;
            cal.correction_time = residual.abs() / shift.abs();
            let g = idle
                .clone()
                .with_coupling(1, 2, j)?
                .with_coupling(4, 5, j)?;
            segments.push(Segment::constant(cal.correction_time, g));
        }
    }

    let schedule = PulseSchedule::new(idle, segments)?;
    if schedule.total_duration() > options.max_duration {
        return Err(Error::Precondition(format!(
            "phase {phi} needs {:.3}/J, above the limit {}",
            schedule.total_duration(),
            options.max_duration
        )));
    }
    Ok((schedule, cal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let y: Vec<f64> = (0..=8).map(|k| (k as f64 / 8.0).powi(3)).collect();
        assert!((simpson(&y) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_phase_is_empty() {
        assert!(synthesize_cphase(0.0, 0.5, 10.0, 16).unwrap().is_empty());
        assert!(synthesize_cphase(2.0 * PI, 0.5, 10.0, 16)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_ungapped_peak() {
        assert!(matches!(
            synthesize_cphase(PI, 0.9, 10.0, 16),
            Err(Error::Precondition(_))
        ));
        assert!(synthesize_cphase(PI, 0.0, 10.0, 16).is_err());
        assert!(synthesize_cphase(PI, 0.5, -1.0, 16).is_err());
        assert!(synthesize_cphase(f64::NAN, 0.5, 1.0, 16).is_err());
    }

    #[test]
    fn calibration_hits_both_conditions() {
        let (s, cal) = calibrate_cphase(PI, 0.5, 5.0, 32, &CphaseOptions::default()).unwrap();
        assert!(cal.local_phase.abs() <= PHASE_TOL);
        assert!((wrap(cal.conditional_phase + PI)).abs() <= 1e-12);
        assert!(cal.hold_time >= 0.0);
        // first-order estimate of the shift
        assert!((cal.z_shift - 0.5 / 3.0).abs() < 0.05, "{}", cal.z_shift);
        assert_eq!(s.segments().len(), 3);
        assert!((s.total_duration() - 10.0 - cal.hold_time).abs() < 1e-12);
    }

    #[test]
    fn quench_and_sequential_layouts() {
        let (s, _) = calibrate_cphase(PI, 0.5, 0.0, 8, &CphaseOptions::default()).unwrap();
        assert_eq!(s.segments().len(), 1);
        let opts = CphaseOptions {
            correction: ZCorrection::Sequential,
            ..CphaseOptions::default()
        };
        let (s, cal) = calibrate_cphase(PI, 0.5, 5.0, 16, &opts).unwrap();
        assert_eq!(cal.z_shift, 0.0);
        assert!(cal.correction_time > 0.0);
        assert_eq!(s.segments().len(), 4);
        let tight = CphaseOptions {
            max_duration: 1.0,
            ..CphaseOptions::default()
        };
        assert!(calibrate_cphase(PI, 0.5, 5.0, 16, &tight).is_err());
    }
}
