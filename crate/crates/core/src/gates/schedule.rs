use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin::CouplingGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    /// `start` held for the whole segment (`end` must equal `start`).
    Constant,
    /// Couplings interpolated linearly from `start` to `end`.
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub duration: f64,
    pub start: CouplingGraph,
    pub end: CouplingGraph,
    pub ramp: Ramp,
}

impl Segment {
    pub fn constant(duration: f64, graph: CouplingGraph) -> Self {
        Self {
            duration,
            start: graph.clone(),
            end: graph,
            ramp: Ramp::Constant,
        }
    }

    pub fn linear(duration: f64, start: CouplingGraph, end: CouplingGraph) -> Self {
        Self {
            duration,
            start,
            end,
            ramp: Ramp::Linear,
        }
    }

    /// Couplings at fraction `s ∈ [0, 1]` of the segment.
    pub fn graph_at(&self, s: f64) -> CouplingGraph {
        match self.ramp {
            Ramp::Constant => self.start.clone(),
            Ramp::Linear => self.start.interpolate(&self.end, s),
        }
    }
}

/// A coupling trajectory that starts and ends in the idle configuration.
///
/// Couplings may jump only at a boundary next to a constant segment, which
/// models a sudden switch. Two adjoining ramps, and a ramp at either end of
/// the schedule, must join continuously (idle before and after).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseSchedule {
    idle: CouplingGraph,
    segments: Vec<Segment>,
}

const JOIN_TOL: f64 = 1e-12;

impl PulseSchedule {
    pub fn new(idle: CouplingGraph, segments: Vec<Segment>) -> Result<Self> {
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return Err(Error::InvalidSchedule(format!(
                    "segment {k} has duration {}",
                    seg.duration
                )));
            }
            if !idle.same_topology(&seg.start) || !idle.same_topology(&seg.end) {
                return Err(Error::InvalidSchedule(format!(
                    "segment {k} changes the coupling graph topology"
                )));
            }
            if seg.ramp == Ramp::Constant && !close(&seg.start, &seg.end) {
                return Err(Error::InvalidSchedule(format!(
                    "constant segment {k} has distinct endpoints"
                )));
            }
        }
        for k in 0..=segments.len() {
            let before = if k == 0 { &idle } else { &segments[k - 1].end };
            let after = segments.get(k).map_or(&idle, |s| &s.start);
            let switch_allowed = (k > 0 && segments[k - 1].ramp == Ramp::Constant)
                || segments.get(k).is_some_and(|s| s.ramp == Ramp::Constant);
            if !switch_allowed && !close(before, after) {
                return Err(Error::InvalidSchedule(format!(
                    "couplings jump at the boundary before segment {k}"
                )));
            }
        }
        Ok(Self { idle, segments })
    }

    /// No segments: the identity gate.
    pub fn empty(idle: CouplingGraph) -> Self {
        Self {
            idle,
            segments: Vec::new(),
        }
    }

    pub fn idle(&self) -> &CouplingGraph {
        &self.idle
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// This schedule followed by `next`.
    pub fn then(&self, next: &PulseSchedule) -> Result<Self> {
        if !close(&self.idle, &next.idle) {
            return Err(Error::InvalidSchedule(
                "schedules have different idle configurations".into(),
            ));
        }
        let mut segments = self.segments.clone();
        segments.extend(next.segments.iter().cloned());
        Self::new(self.idle.clone(), segments)
    }
}

fn close(a: &CouplingGraph, b: &CouplingGraph) -> bool {
    a.same_topology(b)
        && (a.field() - b.field()).abs() <= JOIN_TOL
        && a.edges()
            .iter()
            .zip(b.edges())
            .all(|(x, y)| (x.coupling - y.coupling).abs() <= JOIN_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::OPTIMAL_FIELD;

    fn idle() -> CouplingGraph {
        CouplingGraph::idle_triple(OPTIMAL_FIELD)
    }

    fn shifted(d: f64) -> CouplingGraph {
        idle().with_coupling(1, 2, 1.0 + d).unwrap()
    }

    #[test]
    fn validation() {
        assert!(PulseSchedule::new(idle(), vec![Segment::constant(1.0, shifted(0.3))]).is_ok());
        assert!(PulseSchedule::new(idle(), vec![Segment::constant(0.0, shifted(0.3))]).is_err());
        assert!(
            PulseSchedule::new(idle(), vec![Segment::constant(f64::INFINITY, idle())]).is_err()
        );
        let bad = Segment {
            duration: 1.0,
            start: idle(),
            end: shifted(0.1),
            ramp: Ramp::Constant,
        };
        assert!(PulseSchedule::new(idle(), vec![bad]).is_err());
        // a ramp that does not return to idle
        assert!(
            PulseSchedule::new(idle(), vec![Segment::linear(1.0, idle(), shifted(0.2))]).is_err()
        );
        let trapezoid = vec![
            Segment::linear(1.0, idle(), shifted(0.2)),
            Segment::constant(2.0, shifted(0.2)),
            Segment::linear(1.0, shifted(0.2), idle()),
        ];
        let s = PulseSchedule::new(idle(), trapezoid).unwrap();
        assert_eq!(s.total_duration(), 4.0);
        let pair = CouplingGraph::idle_pair(0.0, OPTIMAL_FIELD).unwrap();
        assert!(PulseSchedule::new(idle(), vec![Segment::constant(1.0, pair)]).is_err());
    }

    #[test]
    fn composition_concatenates() {
        let a = PulseSchedule::new(idle(), vec![Segment::constant(1.0, shifted(0.3))]).unwrap();
        let b = PulseSchedule::new(idle(), vec![Segment::constant(2.0, shifted(-0.3))]).unwrap();
        let ab = a.then(&b).unwrap();
        assert_eq!(ab.segments().len(), 2);
        assert_eq!(ab.total_duration(), 3.0);
        assert!(a
            .then(&PulseSchedule::empty(idle().with_field(0.1).unwrap()))
            .is_err());
    }

    #[test]
    fn graph_at_interpolates() {
        let seg = Segment::linear(2.0, idle(), shifted(0.4));
        assert!((seg.graph_at(0.25).coupling(1, 2) - 1.1).abs() < 1e-15);
        assert_eq!(
            Segment::constant(1.0, shifted(0.4))
                .graph_at(0.9)
                .coupling(1, 2),
            1.4
        );
    }
}
