//! The `run`, `sweep` and `cr` subcommands.

use std::collections::BTreeMap;
use std::str::FromStr;

use bosim::analysis::{effective_amplitudes, report_for_state, two_photon_cr_after_bs2, two_photon_cr_after_bs3};
use bosim::experiments::{
    build, linspace, parse_angle, presets, sweep_point, ExperimentConfig, ExperimentKind, PhaseName, Stage,
};
use bosim::simulator::run_sampled;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::output::{cell, num, pretty, read_config, OutputDir};
use crate::svg::{Plot, Series};
use crate::{CliError, Source};

/// A phase grid given as `phase:start:stop:points`.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub phase: PhaseName,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    text: String,
}

impl SweepSpec {
    fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.points)
    }
}

impl FromStr for SweepSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let [phase, start, stop, points] = parts[..] else {
            return Err(CliError::Usage(format!("sweep {s:?} is not of the form phase:start:stop:points")));
        };
        let points: usize =
            points.parse().map_err(|_| CliError::Usage(format!("sweep point count {points:?} is not an integer")))?;
        if points < 2 {
            return Err(CliError::Usage("a sweep needs at least 2 points".into()));
        }
        Ok(Self { phase: phase.parse()?, start: parse_angle(start)?, stop: parse_angle(stop)?, points, text: s.into() })
    }
}

fn load(source: &Source) -> Result<ExperimentConfig, CliError> {
    let mut config = match (&source.preset_name, &source.preset, &source.config) {
        (Some(name), _, _) | (None, Some(name), _) => presets::load(name)?,
        (None, None, Some(path)) => read_config(path)?,
        (None, None, None) => return Err(CliError::Usage("give a preset name, --preset or --config".into())),
    };
    if let Some(shots) = source.shots {
        config.shots = shots;
    }
    if let Some(seed) = source.seed {
        config.seed = seed;
    }
    if let Some(synthesis) = source.synthesis {
        config.synthesis = synthesis;
    }
    config.validate()?;
    Ok(config)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    writer.write_record(header).map_err(io)?;
    for row in rows {
        writer.write_record(row).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of ASCII fields"))
}

fn float_map(map: &BTreeMap<String, f64>) -> Value {
    Value::Object(map.iter().map(|(k, &v)| (k.clone(), num(v))).collect())
}

pub fn run(source: &Source) -> Result<(), CliError> {
    let config = load(source)?;
    let exp = build(&config, Stage::Full)?;
    let exact = exp.run_exact()?;
    exp.check_conservation(&exact)?;
    let mut histogram = json!({
        "experiment": config.kind.name(),
        "bits": exact.bit_header(),
        "exact": float_map(&exact.probabilities),
        "events": float_map(&exp.events(&exact)?),
    });
    let doc = histogram.as_object_mut().expect("object");
    if let Some(name) = &config.name {
        doc.insert("name".into(), json!(name));
    }
    if config.shots > 0 {
        let sampled = run_sampled(&exp.circuit, config.shots, config.seed)?;
        doc.insert(
            "sampled".into(),
            json!({
                "shots": config.shots,
                "seed": config.seed,
                "counts": sampled.counts.clone().unwrap_or_default(),
                "probabilities": float_map(&sampled.probabilities),
            }),
        );
    }
    let text = pretty(&histogram);
    match &source.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(dir) => {
            let mut out = OutputDir::create(dir)?;
            out.write("histogram.json", &text)?;
            out.finish("run", &config, Map::new())
        }
    }
}

pub fn sweep(source: &Source, spec: &SweepSpec, jobs: usize, svg: bool) -> Result<(), CliError> {
    let config = load(source)?;
    config.check_phase(spec.phase)?;
    let values = spec.values();
    let rows = pool(jobs)?.install(|| {
        values.par_iter().map(|&v| sweep_point(&config, spec.phase, v)).collect::<bosim::Result<Vec<_>>>()
    })?;
    let events = build(&config, Stage::Full)?.event_names();
    let mut header = vec![spec.phase.name().to_string()];
    header.extend(events.iter().cloned());
    let table: Vec<Vec<String>> = values
        .iter()
        .zip(&rows)
        .map(|(&v, row)| {
            let mut cells = vec![cell(v)];
            cells.extend(events.iter().map(|e| cell(row.get(e).copied().unwrap_or(0.0))));
            cells
        })
        .collect();
    let text = csv_text(&header, &table)?;
    let Some(dir) = &source.out else {
        print!("{text}");
        return Ok(());
    };
    let mut out = OutputDir::create(dir)?;
    out.write("sweep.csv", &text)?;
    if svg {
        let series = events
            .iter()
            .map(|e| Series { label: e.clone(), values: rows.iter().map(|r| r.get(e).copied().unwrap_or(0.0)).collect() })
            .collect();
        let plot = Plot { title: format!("{} event probabilities", config.kind.name()), x_label: spec.phase.name().into(), y_label: "probability".into(), x: values.clone(), series };
        out.write("sweep.svg", &plot.render())?;
    }
    let mut extra = Map::new();
    extra.insert("sweep".into(), json!(spec.text));
    out.finish("sweep", &config, extra)
}

/// Complementarity of one grid point; `closed` is set when a closed form applies.
struct CrPoint {
    phase: f64,
    c_l1: f64,
    p_l1: f64,
    slack: f64,
    pure: bool,
    basis: Vec<String>,
    branch_probability: Option<f64>,
    closed: Option<(f64, f64)>,
}

fn default_grid(config: &ExperimentConfig) -> SweepSpec {
    let phase = match config.kind {
        ExperimentKind::Pessoa => "phi_h",
        _ => "phi_e",
    };
    format!("{phase}:0:2pi:65").parse().expect("default grid parses")
}

fn closed_form(config: &ExperimentConfig, stage: Stage) -> Option<(f64, f64)> {
    if config.kind != ExperimentKind::TwoPhotonUnruh || config.has_blockers() {
        return None;
    }
    match stage {
        Stage::AfterBs2 => Some(two_photon_cr_after_bs2(config.phi_e)),
        Stage::BeforeDetection => Some(two_photon_cr_after_bs3(config.phi_e, config.phi_h)),
        _ => None,
    }
}

fn cr_point(config: &ExperimentConfig, spec: &SweepSpec, value: f64, stage: Stage, branch: Option<&str>) -> Result<CrPoint, CliError> {
    let cfg = config.with_phase(spec.phase, value)?;
    let exp = build(&cfg, stage)?;
    let leaves = exp.branches()?;
    let leaf = match branch {
        Some(label) => leaves
            .iter()
            .find(|l| l.record.label() == label)
            .ok_or_else(|| CliError::Usage(format!("branch {label:?} has zero probability at {}={value}", spec.phase)))?,
        None if leaves.len() == 1 => &leaves[0],
        None => {
            let labels: Vec<String> = leaves.iter().map(|l| l.record.label()).collect();
            return Err(CliError::Usage(format!(
                "blockers leave a mixture of branches {}; pass --branch",
                labels.join(", ")
            )));
        }
    };
    let absorbed: u32 = exp.blocker_occupations(&leaf.record)?.values().sum();
    let photons = exp.photons() - absorbed;
    let state = exp.decompose(&leaf.state)?.normalized()?;
    let modes: Vec<&str> = exp.rails.iter().map(String::as_str).collect();
    let report = report_for_state(&state, &modes, photons)?;
    let (_, basis) = effective_amplitudes(&state, &modes, photons)?;
    Ok(CrPoint {
        phase: value,
        c_l1: report.c_l1,
        p_l1: report.p_l1,
        slack: report.slack,
        pure: report.pure,
        basis,
        branch_probability: branch.map(|_| leaf.probability),
        closed: closed_form(&cfg, stage),
    })
}

pub fn cr(
    source: &Source,
    sweep: Option<&SweepSpec>,
    stage: Stage,
    branch: Option<&str>,
    jobs: usize,
    svg: bool,
) -> Result<(), CliError> {
    let config = load(source)?;
    let spec = sweep.cloned().unwrap_or_else(|| default_grid(&config));
    config.check_phase(spec.phase)?;
    if let Some(label) = branch {
        if !label.chars().all(|c| c == '0' || c == '1') {
            return Err(CliError::Usage(format!("branch {label:?} must be a string of 0 and 1")));
        }
    }
    let values = spec.values();
    let points = pool(jobs)?
        .install(|| values.par_iter().map(|&v| cr_point(&config, &spec, v, stage, branch)).collect::<Result<Vec<_>, _>>())?;

    let has_closed = points.iter().all(|p| p.closed.is_some());
    let mut header: Vec<String> = ["phase", "c_l1", "p_l1", "slack", "pure"].map(String::from).to_vec();
    if has_closed {
        header.extend(["closed_c_l1", "closed_p_l1"].map(String::from));
    }
    if branch.is_some() {
        header.push("branch_probability".into());
    }
    let table: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let mut row = vec![cell(p.phase), cell(p.c_l1), cell(p.p_l1), cell(p.slack), p.pure.to_string()];
            if let (true, Some((c, pp))) = (has_closed, p.closed) {
                row.extend([cell(c), cell(pp)]);
            }
            if let Some(bp) = p.branch_probability {
                row.push(cell(bp));
            }
            row
        })
        .collect();
    let text = csv_text(&header, &table)?;
    let Some(dir) = &source.out else {
        print!("{text}");
        return Ok(());
    };

    let json_points: Vec<Value> = points
        .iter()
        .map(|p| {
            let mut o = json!({
                "phase": num(p.phase),
                "c_l1": num(p.c_l1),
                "p_l1": num(p.p_l1),
                "slack": num(p.slack),
                "pure": p.pure,
            });
            let o_map = o.as_object_mut().expect("object");
            if let Some(bp) = p.branch_probability {
                o_map.insert("branch_probability".into(), num(bp));
            }
            if let Some((c, pp)) = p.closed {
                o_map.insert("closed_form".into(), json!({"c_l1": num(c), "p_l1": num(pp)}));
            }
            o
        })
        .collect();
    let mut report = json!({
        "experiment": config.kind.name(),
        "stage": stage.name(),
        "phase": spec.phase.name(),
        "basis": points[0].basis,
        "points": json_points,
    });
    if let Some(label) = branch {
        report.as_object_mut().expect("object").insert("branch".into(), json!(label));
    }

    let mut out = OutputDir::create(dir)?;
    out.write("cr.csv", &text)?;
    out.write("cr.json", &pretty(&report))?;
    if svg {
        let series = vec![
            Series { label: "C_l1".into(), values: points.iter().map(|p| p.c_l1).collect() },
            Series { label: "P_l1".into(), values: points.iter().map(|p| p.p_l1).collect() },
            Series { label: "C_l1 + P_l1".into(), values: points.iter().map(|p| p.c_l1 + p.p_l1).collect() },
        ];
        let plot = Plot {
            title: format!("{} complementarity at {}", config.kind.name(), stage.name()),
            x_label: spec.phase.name().into(),
            y_label: "value".into(),
            x: values,
            series,
        };
        out.write("cr.svg", &plot.render())?;
    }
    let mut extra = Map::new();
    extra.insert("sweep".into(), json!(spec.text));
    extra.insert("stage".into(), json!(stage.name()));
    if let Some(label) = branch {
        extra.insert("branch".into(), json!(label));
    }
    out.finish("cr", &config, extra)
}
