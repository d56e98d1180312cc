//! Dispatch from a [`RunConfig`] to the library and assembly of artifacts.

use std::fmt;
use std::path::PathBuf;

use eoq::encoding::{IntraCoupling, LogicalLayout};
use eoq::gates::{
    axis120, calibrate_cphase, decompose_su2, gate_report, propagate, synthesize_axis120,
    synthesize_rx, synthesize_rz, CphaseOptions, PulseSchedule, Ramp, TargetGate, ZCorrection,
};
use eoq::lambda::{lambda_path, verify_lambda_polynomials};
use eoq::spectra::{
    adiabatic_leakage_curve, labeled_spectrum, optimal_field, ramp_steps, sweep_field, sweep_inter,
    sweep_intra, to_physical, SweepResult,
};
use eoq::spin::CouplingGraph;
use serde_json::{json, Value};

use crate::config::{ConfigError, Format, RunConfig};
use crate::emit::{self, Artifact, Cell, Table};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(eoq::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Pool(String),
}

impl CliError {
    /// 2 for configuration, 3 for violated preconditions, 4 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Pool(_) => 2,
            CliError::Core(e) => match e {
                eoq::Error::Precondition(_)
                | eoq::Error::InvalidSchedule(_)
                | eoq::Error::InvalidEdge { .. }
                | eoq::Error::InvalidLayout(_)
                | eoq::Error::SiteOutOfRange { .. } => 3,
                _ => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "configuration error: {e}"),
            CliError::Core(e) if self.exit_code() == 3 => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "numerical failure: {e}"),
            CliError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
            CliError::Pool(e) => write!(f, "cannot start worker pool: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<eoq::Error> for CliError {
    fn from(e: eoq::Error) -> Self {
        CliError::Core(e)
    }
}

type Outcome = Result<(Artifact, String), CliError>;

/// Runs the command, writes its artifact and returns the summary line.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let work = || -> Outcome {
        match cfg.command.name {
            "spectrum" => spectrum(cfg),
            "sweep-field" => field(cfg),
            "sweep-intra" => intra(cfg),
            "sweep-inter" => inter(cfg),
            "lambdas" => lambdas(cfg),
            "verify-polynomials" => polynomials(cfg),
            "gate" => gate(cfg),
            "adiabatic" => adiabatic(cfg),
            "units" => units(cfg),
            other => unreachable!("command table lists {other}"),
        }
    };
    let (artifact, summary) = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let format = cfg.format.unwrap_or(artifact.default_format);
    let path = cfg.output.clone().unwrap_or_else(|| {
        PathBuf::from(format!(
            "{}.{}",
            cfg.command.name,
            if format == Format::Csv { "csv" } else { "json" }
        ))
    });
    let bytes = emit::render(&artifact, format).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    emit::write(&path, &bytes).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(format!("{summary} -> {}", path.display()))
}

fn artifact(cfg: &RunConfig, table: Table, result: Value, default_format: Format) -> Artifact {
    Artifact {
        command: cfg.command.name.to_string(),
        parameters: json!(cfg.effective()),
        table,
        result,
        default_format,
    }
}

fn sweep_table(r: &SweepResult, extra: &[&str]) -> Table {
    let width = r.spectra.first().map_or(0, Vec::len);
    let mut header = vec![r.parameter_name.clone()];
    header.extend((1..=width).map(|k| format!("e{k}")));
    header.push("gap".into());
    header.extend(extra.iter().map(|s| s.to_string()));
    let mut t = Table::new(header);
    for (k, x) in r.grid.iter().enumerate() {
        let mut row = vec![Cell::from(*x)];
        row.extend(r.spectra[k].iter().map(|&e| Cell::from(e)));
        row.push(Cell::from(r.gap[k]));
        row.resize(t.header.len(), Cell::Text(String::new()));
        t.push(row);
    }
    t
}

fn spectrum(cfg: &RunConfig) -> Outcome {
    let sites = cfg.count("sites", 3)?;
    let h = cfg.f64("h")?;
    let mut edges = vec![
        (0, 1, cfg.f64("j12")?),
        (0, 2, cfg.f64("j13")?),
        (1, 2, cfg.f64("j23")?),
    ];
    let layout = match sites {
        3 => {
            for k in ["j45", "j46", "j56", "j14"] {
                if cfg.given(k) {
                    return Err(ConfigError::Invalid {
                        key: k.into(),
                        value: cfg.raw(k)?,
                        constraint: "only valid with sites = 6".into(),
                    }
                    .into());
                }
            }
            LogicalLayout::single()
        }
        6 => {
            edges.extend([
                (3, 4, cfg.f64("j45")?),
                (3, 5, cfg.f64("j46")?),
                (4, 5, cfg.f64("j56")?),
            ]);
            edges.push((0, 3, cfg.f64("j14")?));
            LogicalLayout::pair()
        }
        _ => {
            return Err(ConfigError::Invalid {
                key: "sites".into(),
                value: sites.to_string(),
                constraint: "3 or 6".into(),
            }
            .into())
        }
    };
    let graph = CouplingGraph::new(sites, edges, h)?;
    let s = labeled_spectrum(&graph, &layout)?;
    let mut t = Table::new(["index", "energy", "twice_m", "degeneracy", "logical"]);
    for (k, (e, l)) in s.levels.iter().zip(&s.labels).enumerate() {
        t.push(vec![
            Cell::Int(k as i64),
            Cell::from(*e),
            Cell::Int(l.twice_m as i64),
            Cell::Int(l.degeneracy as i64),
            Cell::from(l.logical),
        ]);
    }
    let gap = s.gap();
    let summary = format!(
        "ground energy {:.12} (degeneracy {}), gap {gap:.12}",
        s.levels[0], s.labels[0].degeneracy
    );
    let result = json!({ "levels": s.levels, "labels": s.labels, "gap": gap });
    Ok((artifact(cfg, t, result, Format::Csv), summary))
}

fn field(cfg: &RunConfig) -> Outcome {
    let (lo, hi, n) = (cfg.f64("min")?, cfg.f64("max")?, cfg.count("points", 2)?);
    let r = sweep_field(lo, hi, n)?;
    let best = optimal_field(lo, hi)?;
    let summary = format!(
        "h* = {:.9}, gap {:.9}{}",
        best.h_star,
        best.gap,
        if best.unimodal {
            ""
        } else {
            " (grid fallback)"
        }
    );
    let t = sweep_table(&r, &[]);
    Ok((
        artifact(cfg, t, json!({ "sweep": r, "optimum": best }), Format::Csv),
        summary,
    ))
}

fn intra(cfg: &RunConfig) -> Outcome {
    let label = cfg.choice("coupling", &["J12", "J13", "J23"])?;
    let which: IntraCoupling = label.parse()?;
    let (r, c) = sweep_intra(
        which,
        cfg.f64("min")?,
        cfg.f64("max")?,
        cfg.count("points", 2)?,
    )?;
    let summary = if c.crossings.is_empty() {
        format!("no crossings in the {label} range")
    } else {
        let xs: Vec<String> = c.crossings.iter().map(|x| format!("{x:.9}")).collect();
        format!("crossings at {label} = {}", xs.join(", "))
    };
    let t = sweep_table(&r, &[]);
    Ok((
        artifact(
            cfg,
            t,
            json!({ "sweep": r, "crossings": c.crossings }),
            Format::Csv,
        ),
        summary,
    ))
}

fn inter(cfg: &RunConfig) -> Outcome {
    let s = sweep_inter(cfg.f64("min")?, cfg.f64("max")?, cfg.count("points", 2)?)?;
    let mut t = sweep_table(
        &s.sweep,
        &["lambda_00", "lambda_01", "lambda_10", "lambda_11"],
    );
    let width = t.header.len();
    for (row, l) in t.rows.iter_mut().zip(&s.lambdas) {
        row.truncate(width - 4);
        row.extend([l.lambda_00, l.lambda_01, l.lambda_10, l.lambda_11].map(Cell::from));
    }
    let summary = match s.crossings.crossings.first() {
        Some(j) => format!("gap closes at J14 = {j:.9}"),
        None => "gap stays open over the range".to_string(),
    };
    let result =
        json!({ "sweep": s.sweep, "lambdas": s.lambdas, "gap_closings": s.crossings.crossings });
    Ok((artifact(cfg, t, result, Format::Csv), summary))
}

fn lambdas(cfg: &RunConfig) -> Outcome {
    let path = lambda_path(&cfg.grid("grid")?, cfg.f64("h")?)?;
    let mut t = Table::new([
        "J14",
        "lambda_00",
        "lambda_01",
        "lambda_10",
        "lambda_11",
        "entangling_rate",
    ]);
    for l in &path {
        t.push(
            [
                l.j14,
                l.lambda_00,
                l.lambda_01,
                l.lambda_10,
                l.lambda_11,
                l.entangling_rate(),
            ]
            .map(Cell::from)
            .to_vec(),
        );
    }
    let last = path.last().expect("grid has at least 2 points");
    let summary = format!(
        "λ00 + λ11 − 2λ01 = {:.12} at J14 = {}",
        last.entangling_rate(),
        last.j14
    );
    Ok((
        artifact(cfg, t, json!({ "levels": path }), Format::Csv),
        summary,
    ))
}

fn polynomials(cfg: &RunConfig) -> Outcome {
    let checks = verify_lambda_polynomials(&cfg.grid("grid")?, cfg.f64("h")?)?;
    let mut t = Table::new([
        "J14",
        "lambda_00",
        "lambda_01",
        "lambda_10",
        "lambda_11",
        "line_00_const9",
        "line_00_const3",
        "quadratic_11",
        "quadratic_11_real_root",
        "cubic_01",
        "cubic_at_11",
        "quadratic_at_01",
    ]);
    for c in &checks {
        let l = &c.lambdas;
        t.push(vec![
            l.j14.into(),
            l.lambda_00.into(),
            l.lambda_01.into(),
            l.lambda_10.into(),
            l.lambda_11.into(),
            c.line_00.into(),
            c.line_00_c3.into(),
            c.quadratic_11.into(),
            c.quadratic_11_has_real_root.into(),
            c.cubic_01.into(),
            c.cubic_at_11.into(),
            c.quadratic_at_01.into(),
        ]);
    }
    let max = |f: fn(&eoq::lambda::PolynomialCheck) -> f64| {
        checks.iter().map(|c| f(c).abs()).fold(0.0, f64::max)
    };
    let summary = format!(
        "max |residual|: cubic on λ01 {:.3e}, on λ11 {:.3e}; constant-9 line {:.3e}; constant-3 line {:.3e}; quadratic real at first point: {}",
        max(|c| c.cubic_01),
        max(|c| c.cubic_at_11),
        max(|c| c.line_00),
        max(|c| c.line_00_c3),
        checks[0].quadratic_11_has_real_root
    );
    Ok((
        artifact(cfg, t, json!({ "points": checks }), Format::Json),
        summary,
    ))
}

fn edge_label(i: usize, j: usize) -> String {
    format!("J{}{}", i + 1, j + 1)
}

fn schedule_table(s: &PulseSchedule) -> Table {
    let edges: Vec<String> = s
        .idle()
        .edges()
        .iter()
        .map(|e| edge_label(e.i, e.j))
        .collect();
    let mut header = vec![
        "segment".to_string(),
        "t_start".into(),
        "duration".into(),
        "ramp".into(),
    ];
    header.extend(edges.iter().map(|e| format!("{e}_start")));
    header.extend(edges.iter().map(|e| format!("{e}_end")));
    let mut t = Table::new(header);
    let mut clock = 0.0;
    for (k, seg) in s.segments().iter().enumerate() {
        let mut row = vec![
            Cell::Int(k as i64),
            clock.into(),
            seg.duration.into(),
            (if seg.ramp == Ramp::Linear {
                "linear"
            } else {
                "constant"
            })
            .into(),
        ];
        row.extend(seg.start.edges().iter().map(|e| Cell::from(e.coupling)));
        row.extend(seg.end.edges().iter().map(|e| Cell::from(e.coupling)));
        t.push(row);
        clock += seg.duration;
    }
    t
}

fn gate(cfg: &RunConfig) -> Outcome {
    let kind = cfg.choice("type", &["rz", "rx", "axis120", "su2", "cphase"])?;
    let delta = |default: f64| {
        if cfg.given("delta") {
            cfg.f64("delta")
        } else {
            Ok(default)
        }
    };
    let mut calibration = Value::Null;
    let mut ramp = 0.0;
    let (schedule, target, layout) = match kind {
        "rz" => {
            let theta = cfg.angle("theta")?;
            (
                synthesize_rz(theta, delta(0.5)?)?,
                TargetGate::rz(theta)?,
                LogicalLayout::single(),
            )
        }
        "rx" => {
            let theta = cfg.angle("theta")?;
            (
                synthesize_rx(theta, delta(0.3)?)?,
                TargetGate::rx(theta)?,
                LogicalLayout::single(),
            )
        }
        "axis120" => {
            let theta = cfg.angle("theta")?;
            let which: IntraCoupling = cfg.choice("axis", &["J12", "J13"])?.parse()?;
            let target = TargetGate::rotation(axis120(which)?, theta)?;
            (
                synthesize_axis120(theta, delta(0.5)?, which)?,
                target,
                LogicalLayout::single(),
            )
        }
        "su2" => {
            let theta = cfg.angle("theta")?;
            let n = [cfg.f64("nx")?, cfg.f64("ny")?, cfg.f64("nz")?];
            let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(ConfigError::Invalid {
                    key: "nx,ny,nz".into(),
                    value: "0,0,0".into(),
                    constraint: "a nonzero axis".into(),
                }
                .into());
            }
            let target = TargetGate::rotation(n.map(|x| x / norm), theta)?;
            (
                decompose_su2(&target, cfg.f64("delta-z")?, cfg.f64("delta-x")?)?,
                target,
                LogicalLayout::single(),
            )
        }
        _ => {
            let phi = cfg.angle("phi")?;
            ramp = cfg.f64("ramp")?;
            let correction = match cfg.choice("correction", &["simultaneous", "sequential"])? {
                "sequential" => ZCorrection::Sequential,
                _ => ZCorrection::Simultaneous,
            };
            let options = CphaseOptions {
                correction,
                ..CphaseOptions::default()
            };
            let (s, cal) = calibrate_cphase(
                phi,
                cfg.f64("j14")?,
                ramp,
                cfg.count("calibration-steps", 2)?,
                &options,
            )?;
            calibration = json!(cal);
            (s, TargetGate::cphase(phi)?, LogicalLayout::pair())
        }
    };
    let steps = if cfg.given("steps") {
        cfg.count("steps", 1)?
    } else {
        ramp_steps(ramp)
    };
    let report = gate_report(&propagate(&schedule, steps)?, &target, &layout)?;
    let block: Vec<Vec<[f64; 2]>> = (0..report.logical_block.rows())
        .map(|r| {
            report
                .logical_block
                .row(r)
                .iter()
                .map(|z| [z.re, z.im])
                .collect()
        })
        .collect();
    let summary = format!(
        "fidelity {:.12}, max leakage {:.3e}, duration {:.6}",
        report.fidelity,
        report.max_leakage,
        schedule.total_duration()
    );
    let result = json!({
        "type": kind,
        "fidelity": report.fidelity,
        "max_leakage": report.max_leakage,
        "avg_leakage": report.avg_leakage,
        "conditional_phase": report.conditional_phase,
        "logical_block": block,
        "total_duration": schedule.total_duration(),
        "propagation_steps": steps,
        "schedule": schedule.segments(),
        "calibration": calibration,
    });
    Ok((
        artifact(cfg, schedule_table(&schedule), result, Format::Json),
        summary,
    ))
}

fn adiabatic(cfg: &RunConfig) -> Outcome {
    let curve = adiabatic_leakage_curve(cfg.angle("phi")?, cfg.f64("j14")?, &cfg.list("ramps")?)?;
    let mut t = Table::new([
        "ramp_time",
        "hold_time",
        "fidelity",
        "max_leakage",
        "avg_leakage",
    ]);
    for p in &curve {
        t.push(
            [
                p.ramp_time,
                p.hold_time,
                p.fidelity,
                p.max_leakage,
                p.avg_leakage,
            ]
            .map(Cell::from)
            .to_vec(),
        );
    }
    let best = curve
        .iter()
        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity))
        .expect("ramp list is non-empty");
    let summary = format!(
        "best fidelity {:.9} (max leakage {:.3e}) at ramp {}",
        best.fidelity, best.max_leakage, best.ramp_time
    );
    Ok((
        artifact(cfg, t, json!({ "points": curve }), Format::Csv),
        summary,
    ))
}

fn units(cfg: &RunConfig) -> Outcome {
    let u = to_physical(cfg.f64("J")?, cfg.f64("g")?, cfg.f64("h")?)?;
    let mut t = Table::new(["J_microeV", "g", "h", "B_tesla", "gap_microeV"]);
    t.push(
        [u.j_microev, u.g_factor, u.h, u.b_tesla, u.gap_microev]
            .map(Cell::from)
            .to_vec(),
    );
    let result = json!({
        "J_microeV": u.j_microev,
        "g": u.g_factor,
        "h": u.h,
        "B_tesla": u.b_tesla,
        "gap_microeV": u.gap_microev,
        "bohr_magneton_microeV_per_T": eoq::spectra::BOHR_MAGNETON_MICROEV_PER_TESLA,
    });
    Ok((
        artifact(cfg, t, result, Format::Json),
        format!("B = {:.6} T, gap = {:.6} μeV", u.b_tesla, u.gap_microev),
    ))
}
