//! Pulse schedules, time evolution and gate scoring.

mod cphase;
mod propagate;
mod report;
mod schedule;
mod synth;

pub use cphase::{
    calibrate_cphase, synthesize_cphase, CphaseCalibration, CphaseOptions, ZCorrection,
    CALIBRATION_TRACKING_STEP, GAP_CLOSING_J14, PHASE_TOL,
};
pub use propagate::{propagate, propagate_with_estimate, Propagation};
pub use report::{gate_report, short_time_generator, GateReport, TargetGate};
pub use schedule::{PulseSchedule, Ramp, Segment};
pub use synth::{
    axis120, decompose_su2, euler_zxz, synthesize_axis120, synthesize_rx, synthesize_rz, wrap,
    ANGLE_EPS, CROSSING_FREE,
};
