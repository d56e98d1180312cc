//! Parameter sweeps, gap extraction, crossing detection and unit conversion.
//!
//! Spectra are assembled from S_z blocks so every level carries its
//! magnetization. The gap at a point is
//! `min(non-logical levels) − max(logical levels)`: positive while the whole
//! logical subspace lies below everything else, negative once another level
//! has dropped into or below it.

use rayon::prelude::*;
use serde::Serialize;

use crate::encoding::{IntraCoupling, LogicalLayout};
use crate::error::{Error, Result};
use crate::gates::{calibrate_cphase, gate_report, propagate, CphaseOptions, TargetGate};
use crate::lambda::{lambda_spectrum, LambdaTriple, LevelTracker, TRACKING_STEP};
use crate::linalg::{hermitian_eig, UnitaryOperator, C64, DEGENERACY_TOL};
use crate::spin::{build_hamiltonian, sz_sectors, CouplingGraph, OPTIMAL_FIELD};

/// Default number of grid points per sweep.
pub const DEFAULT_POINTS: usize = 301;

/// Absolute tolerance for bisection of crossings and gap closings.
pub const CROSSING_TOL: f64 = 1e-12;

/// Bohr magneton in μeV/T.
pub const BOHR_MAGNETON_MICROEV_PER_TESLA: f64 = 57.88;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelLabel {
    pub twice_m: i32,
    /// Number of levels (any sector) within the degeneracy tolerance.
    pub degeneracy: usize,
    pub logical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter_name: String,
    pub grid: Vec<f64>,
    /// Ascending levels per grid point.
    pub spectra: Vec<Vec<f64>>,
    pub gap: Vec<f64>,
    pub labels: Vec<Vec<LevelLabel>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CrossingReport {
    pub crossings: Vec<f64>,
}

/// Levels of one Hamiltonian with their labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSpectrum {
    pub levels: Vec<f64>,
    pub labels: Vec<LevelLabel>,
}

impl LabeledSpectrum {
    pub fn gap(&self) -> f64 {
        let top_logical = self.iter_logical().fold(f64::NEG_INFINITY, f64::max);
        let bottom_other = self
            .levels
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| !l.logical)
            .map(|(e, _)| *e)
            .fold(f64::INFINITY, f64::min);
        bottom_other - top_logical
    }

    pub fn logical_levels(&self) -> Vec<f64> {
        self.iter_logical().collect()
    }

    fn iter_logical(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| l.logical)
            .map(|(e, _)| *e)
    }

    fn from_parts(mut parts: Vec<(f64, i32, bool)>) -> Self {
        parts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        let levels: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let labels = parts
            .iter()
            .map(|&(e, twice_m, logical)| LevelLabel {
                twice_m,
                degeneracy: levels
                    .iter()
                    .filter(|&&x| (x - e).abs() <= DEGENERACY_TOL)
                    .count(),
                logical,
            })
            .collect();
        Self { levels, labels }
    }
}

/// Sector-resolved spectrum with the logical levels of `layout` marked by
/// their weight in the logical span.
pub fn labeled_spectrum(graph: &CouplingGraph, layout: &LogicalLayout) -> Result<LabeledSpectrum> {
    if graph.n_sites() != layout.n_sites() {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} sites, layout {}",
            graph.n_sites(),
            layout.n_sites()
        )));
    }
    let h = build_hamiltonian(graph);
    let basis = layout.basis_states();
    let mut parts = Vec::with_capacity(graph.dim());
    for sector in sz_sectors(graph.n_sites()) {
        let spectrum = hermitian_eig(&sector.restrict(&h))?;
        let logical_here: Vec<Vec<C64>> = if sector.twice_m == layout.twice_m() {
            basis
                .iter()
                .map(|b| sector.restrict_vector(b.amplitudes()))
                .collect()
        } else {
            Vec::new()
        };
        for class in spectrum.degeneracy_classes() {
            // the class holds round(Σ weight) logical levels
            let weight: f64 = class
                .clone()
                .map(|k| {
                    let v = spectrum.eigenvector(k);
                    logical_here
                        .iter()
                        .map(|b| dot(b, &v).norm_sqr())
                        .sum::<f64>()
                })
                .sum();
            let n_logical = weight.round() as usize;
            for (offset, k) in class.enumerate() {
                parts.push((spectrum.eigenvalues[k], sector.twice_m, offset < n_logical));
            }
        }
    }
    Ok(LabeledSpectrum::from_parts(parts))
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `n` evenly spaced points on [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Precondition(format!(
            "need finite lo < hi and at least 2 points, got [{lo}, {hi}] x {n}"
        )));
    }
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn assemble(name: &str, grid: Vec<f64>, points: Vec<LabeledSpectrum>) -> SweepResult {
    let gap = points.iter().map(LabeledSpectrum::gap).collect();
    let (spectra, labels) = points.into_iter().map(|p| (p.levels, p.labels)).unzip();
    SweepResult {
        parameter_name: name.to_string(),
        grid,
        spectra,
        gap,
        labels,
    }
}

fn field_point(h: f64) -> Result<LabeledSpectrum> {
    labeled_spectrum(&CouplingGraph::idle_triple(h), &LogicalLayout::single())
}

/// Idle single-triple spectra against the field.
pub fn sweep_field(h_min: f64, h_max: f64, n_points: usize) -> Result<SweepResult> {
    let grid = linspace(h_min, h_max, n_points)?;
    let points = grid
        .par_iter()
        .map(|&h| field_point(h))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble("h", grid, points))
}

/// Gap of the idle triple at field `h`.
pub fn field_gap(h: f64) -> Result<f64> {
    Ok(field_point(h)?.gap())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalField {
    pub h_star: f64,
    pub gap: f64,
    /// False when sampling found the gap not unimodal and the search fell
    /// back to the best grid cell.
    pub unimodal: bool,
}

const UNIMODAL_SAMPLES: usize = 65;

/// Field that maximizes the gap on [lo, hi], by ternary search.
pub fn optimal_field(lo: f64, hi: f64) -> Result<OptimalField> {
    let grid = linspace(lo, hi, UNIMODAL_SAMPLES)?;
    let gaps = grid
        .par_iter()
        .map(|&h| field_gap(h))
        .collect::<Result<Vec<_>>>()?;
    let peak = gaps
        .iter()
        .enumerate()
        .fold(0, |best, (k, g)| if *g > gaps[best] { k } else { best });
    let rising = gaps[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let falling = gaps[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let unimodal = rising && falling;
    let (mut a, mut b) = if unimodal {
        (lo, hi)
    } else {
        (
            grid[peak.saturating_sub(1)],
            grid[(peak + 1).min(grid.len() - 1)],
        )
    };
    while b - a > 1e-10 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if field_gap(m1)? < field_gap(m2)? {
            a = m1;
        } else {
            b = m2;
        }
    }
    let h_star = 0.5 * (a + b);
    Ok(OptimalField {
        h_star,
        gap: field_gap(h_star)?,
        unimodal,
    })
}

fn intra_point(which: IntraCoupling, j: f64) -> Result<LabeledSpectrum> {
    let (a, b) = which.sites([0, 1, 2]);
    let g = CouplingGraph::idle_triple(OPTIMAL_FIELD).with_coupling(a, b, j)?;
    labeled_spectrum(&g, &LogicalLayout::single())
}

/// Roots of `f` bracketed by sign changes of `values` on `grid`, refined by bisection.
/// `f(k, x)` evaluates at `x` inside the cell starting at `grid[k]`.
fn locate_crossings(
    grid: &[f64],
    values: &[f64],
    f: impl Fn(usize, f64) -> Result<f64>,
) -> Result<CrossingReport> {
    let mut crossings = Vec::new();
    for k in 0..grid.len() {
        if values[k] == 0.0 {
            crossings.push(grid[k]);
            continue;
        }
        if k + 1 < grid.len() && values[k] * values[k + 1] < 0.0 {
            let (mut a, mut b) = (grid[k], grid[k + 1]);
            let mut fa = values[k];
            while b - a > CROSSING_TOL {
                let m = 0.5 * (a + b);
                let fm = f(k, m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm * fa < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            crossings.push(0.5 * (a + b));
        }
    }
    Ok(CrossingReport { crossings })
}

/// Single-triple spectra against one intra-triple coupling, with the
/// couplings where the logical doublet stops being lowest.
pub fn sweep_intra(
    which: IntraCoupling,
    j_min: f64,
    j_max: f64,
    n_points: usize,
) -> Result<(SweepResult, CrossingReport)> {
    let grid = linspace(j_min, j_max, n_points)?;
    let points = grid
        .par_iter()
        .map(|&j| intra_point(which, j))
        .collect::<Result<Vec<_>>>()?;
    let result = assemble(which.label(), grid, points);
    let report = locate_crossings(&result.grid, &result.gap, |_, j| {
        Ok(intra_point(which, j)?.gap())
    })?;
    Ok((result, report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterSweep {
    pub sweep: SweepResult,
    pub lambdas: Vec<LambdaTriple>,
    pub crossings: CrossingReport,
}

/// Two-triple spectra against J₁₄ with the tracked logical quartet.
fn inter_point(j14: f64, logical: &[f64]) -> Result<LabeledSpectrum> {
    let graph = CouplingGraph::idle_pair(j14, OPTIMAL_FIELD)?;
    let h = build_hamiltonian(&graph);
    let mut parts = Vec::with_capacity(graph.dim());
    let layout = LogicalLayout::pair();
    for sector in sz_sectors(graph.n_sites()) {
        let mut levels = hermitian_eig(&sector.restrict(&h))?.eigenvalues;
        let mut flags = vec![false; levels.len()];
        if sector.twice_m == layout.twice_m() {
            for &e in logical {
                let k = (0..levels.len())
                    .filter(|&k| !flags[k])
                    .min_by(|&x, &y| (levels[x] - e).abs().total_cmp(&(levels[y] - e).abs()))
                    .expect("sector holds the logical levels");
                flags[k] = true;
            }
        }
        for (e, f) in levels.drain(..).zip(flags) {
            parts.push((e, sector.twice_m, f));
        }
    }
    Ok(LabeledSpectrum::from_parts(parts))
}

fn quartet(l: &LambdaTriple) -> [f64; 4] {
    [l.lambda_00, l.lambda_01, l.lambda_10, l.lambda_11]
}

/// Gap of the two-triple system at `j14`.
pub fn inter_gap(j14: f64) -> Result<f64> {
    let l = lambda_spectrum(j14, OPTIMAL_FIELD)?;
    Ok(inter_point(j14, &quartet(&l))?.gap())
}

pub fn sweep_inter(j14_min: f64, j14_max: f64, n_points: usize) -> Result<InterSweep> {
    if j14_min < 0.0 {
        return Err(Error::Precondition(format!(
            "J14 sweep must start at or above 0, got {j14_min}"
        )));
    }
    let grid = linspace(j14_min, j14_max, n_points)?;
    let path = |j: f64| CouplingGraph::idle_pair(j, OPTIMAL_FIELD);
    let mut tracker = LevelTracker::new(path, &LogicalLayout::pair(), 0.0, TRACKING_STEP)?;
    let mut snapshots = Vec::with_capacity(grid.len());
    let mut lambdas = Vec::with_capacity(grid.len());
    for &j in &grid {
        let e = tracker.advance_to(j)?;
        lambdas.push(LambdaTriple {
            j14: j,
            lambda_00: e[0],
            lambda_01: e[1],
            lambda_10: e[2],
            lambda_11: e[3],
        });
        snapshots.push(tracker.clone());
    }
    let points = grid
        .par_iter()
        .zip(&lambdas)
        .map(|(&j, l)| inter_point(j, &quartet(l)))
        .collect::<Result<Vec<_>>>()?;
    let sweep = assemble("J14", grid, points);
    // refine from the tracked state at the left edge of each bracketing cell
    let crossings = locate_crossings(&sweep.grid, &sweep.gap, |k, j| {
        let mut t = snapshots[k].clone();
        let e = t.advance_to(j)?.to_vec();
        Ok(inter_point(j, &e)?.gap())
    })?;
    Ok(InterSweep {
        sweep,
        lambdas,
        crossings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeakagePoint {
    pub ramp_time: f64,
    pub hold_time: f64,
    pub max_leakage: f64,
    pub avg_leakage: f64,
    pub fidelity: f64,
}

/// Calibration nodes used for each point of [`adiabatic_leakage_curve`].
pub const LEAKAGE_CALIBRATION_STEPS: usize = 64;

/// Midpoint steps for a ramp of length `ramp_time`: Δt ≤ 0.05/J, at least 32.
pub fn ramp_steps(ramp_time: f64) -> usize {
    ((ramp_time / 0.05).ceil() as usize).max(32)
}

/// Calibrated conditional phase gate scored at each ramp time.
pub fn adiabatic_leakage_curve(
    phi: f64,
    j14_peak: f64,
    ramp_times: &[f64],
) -> Result<Vec<LeakagePoint>> {
    let target = TargetGate::cphase(phi)?;
    let layout = LogicalLayout::pair();
    ramp_times
        .par_iter()
        .map(|&ramp| {
            if j14_peak == 0.0 {
                let r = gate_report(
                    &UnitaryOperator::identity(1 << layout.n_sites()),
                    &target,
                    &layout,
                )?;
                return Ok(LeakagePoint {
                    ramp_time: ramp,
                    hold_time: 0.0,
                    max_leakage: r.max_leakage,
                    avg_leakage: r.avg_leakage,
                    fidelity: r.fidelity,
                });
            }
            let (schedule, cal) = calibrate_cphase(
                phi,
                j14_peak,
                ramp,
                LEAKAGE_CALIBRATION_STEPS,
                &CphaseOptions::default(),
            )?;
            let u = propagate(&schedule, ramp_steps(ramp))?;
            let r = gate_report(&u, &target, &layout)?;
            Ok(LeakagePoint {
                ramp_time: ramp,
                hold_time: cal.hold_time,
                max_leakage: r.max_leakage,
                avg_leakage: r.avg_leakage,
                fidelity: r.fidelity,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysicalUnits {
    pub j_microev: f64,
    pub g_factor: f64,
    pub h: f64,
    pub b_tesla: f64,
    pub gap_microev: f64,
}

/// Field and gap in laboratory units: `B = h·J/(g·μ_B)`, `ΔE = gap(h)·J`.
pub fn to_physical(j_microev: f64, g_factor: f64, h: f64) -> Result<PhysicalUnits> {
    if !(j_microev > 0.0 && j_microev.is_finite()) {
        return Err(Error::Precondition(format!(
            "J must be positive, got {j_microev} μeV"
        )));
    }
    if !(g_factor > 0.0 && g_factor.is_finite()) {
        return Err(Error::Precondition(format!(
            "g-factor magnitude must be positive, got {g_factor}"
        )));
    }
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::Precondition(format!(
            "field must be non-negative, got {h}"
        )));
    }
    Ok(PhysicalUnits {
        j_microev,
        g_factor,
        h,
        b_tesla: h * j_microev / (g_factor * BOHR_MAGNETON_MICROEV_PER_TESLA),
        gap_microev: field_gap(h)? * j_microev,
    })
}
