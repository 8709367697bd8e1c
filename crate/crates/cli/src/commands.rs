use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hflow_core::calculus::write_field_csv;
use hflow_core::flow::{self, FlowRecord, TRAJECTORY_HEADER};
use hflow_core::mass::{self, BhmsReport, MassReport, MonotonicityCertificate, VariationReport};
use hflow_core::surface::{ExtrinsicData, SurfaceGrid};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const MASS_SCHEMA: &str = "hflow-mass/1";
pub const VARIATION_SCHEMA: &str = "hflow-variation/1";
pub const SUMMARY_SCHEMA: &str = "hflow-summary/1";

#[derive(Debug, Serialize)]
pub struct MassDocument {
    pub schema: &'static str,
    pub spacetime: String,
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(flatten)]
    pub report: MassReport<f64>,
}

#[derive(Debug, Serialize)]
pub struct VariationDocument {
    pub schema: &'static str,
    pub variation: VariationReport<f64>,
    pub bhms: BhmsReport<f64>,
    pub certificate: MonotonicityCertificate<f64>,
}

#[derive(Debug, Serialize)]
pub struct FlowSummary {
    pub schema: &'static str,
    pub spacetime: String,
    pub steps: usize,
    pub s_final: f64,
    pub completed: bool,
    pub stopped: Option<String>,
    pub m_h_initial: f64,
    pub m_h_final: f64,
    /// `max |m_H(s) - m_H(0)|`.
    pub m_h_drift: f64,
    /// Smallest step-to-step change of `m_H`; absent without steps.
    pub min_mass_increment: Option<f64>,
    pub monotone: bool,
    pub monotone_tolerance: f64,
    pub area_initial: f64,
    pub area_final: f64,
    /// `|Σ(s)| / |Σ(0)|` at the final record.
    pub area_ratio: f64,
    /// `max | |Σ(s)| / (|Σ(0)| e^s) - 1 |` over the records.
    pub area_law_defect: f64,
    pub certificate_pass_rate: f64,
    pub max_fd_check: f64,
    pub max_normalization_defect: f64,
    pub min_mesh_quality: f64,
    pub mesh_warnings: usize,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(CliError::io(format!("creating {}", path.display())))
}

pub fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::io(format!("writing {name}"))(e.into()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(CliError::io(format!("writing {name}")))
}

/// The mass and variation documents of one surface, as `evaluate` writes them.
pub fn evaluate_documents(
    config: &RunConfig,
    extr: &ExtrinsicData<f64>,
    beta: &[f64],
) -> Result<(MassDocument, VariationDocument), CliError> {
    let model_name = config.model()?.name();
    let (case, theta) = config.certificate_choice();
    let mass_doc = MassDocument {
        schema: MASS_SCHEMA,
        spacetime: model_name,
        n_theta: config.grid.n_theta,
        n_phi: config.grid.n_phi,
        report: mass::hawking_mass(extr),
    };
    let variation = VariationDocument {
        schema: VARIATION_SCHEMA,
        variation: mass::variation_main(extr, beta)?,
        bhms: mass::bhms_report(extr, beta)?,
        certificate: mass::monotonicity_certificate(
            extr,
            beta,
            &theta,
            case,
            &config.flow.options.certificate,
        )?,
    };
    Ok((mass_doc, variation))
}

pub fn evaluate(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let model = config.model()?;
    let grid = SurfaceGrid::build(
        &config.surface,
        &model,
        config.grid.n_theta,
        config.grid.n_phi,
    )?;
    grid.write_csv(create(dir, "surface.csv")?)?;
    let extr = ExtrinsicData::compute(&grid, &model)?;
    let beta = flow::resolve_beta(&config.beta, &extr, &config.flow.options, None)?;
    let (mass_doc, variation) = evaluate_documents(config, &extr, &beta)?;
    write_json(dir, "mass.json", &mass_doc)?;
    write_json(dir, "variation.json", &variation)?;

    let n_phi = extr.n_phi();
    variation
        .variation
        .write_integrands_csv(create(dir, "integrands.csv")?, n_phi)?;
    write_field_csv(create(dir, "beta.csv")?, &beta, n_phi)
        .map_err(CliError::io("writing beta.csv"))?;
    write_field_csv(
        create(dir, "lemma_integrand.csv")?,
        &mass::lemma_integrand(&extr, &beta),
        n_phi,
    )
    .map_err(CliError::io("writing lemma_integrand.csv"))?;
    Ok(())
}

pub fn summarize(
    config: &RunConfig,
    spacetime: String,
    records: &[FlowRecord],
    stopped: Option<String>,
) -> FlowSummary {
    let first = &records[0];
    let last = records.last().unwrap_or(first);
    let steps = records.len() - 1;
    let min_increment = records
        .windows(2)
        .map(|w| w[1].m_h - w[0].m_h)
        .reduce(f64::min);
    let max_of = |f: &dyn Fn(&FlowRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    FlowSummary {
        schema: SUMMARY_SCHEMA,
        spacetime,
        steps,
        s_final: last.s,
        completed: stopped.is_none(),
        stopped,
        m_h_initial: first.m_h,
        m_h_final: last.m_h,
        m_h_drift: max_of(&|r| (r.m_h - first.m_h).abs()),
        min_mass_increment: min_increment,
        monotone: min_increment.map_or(true, |m| m >= -config.flow.monotone_tolerance),
        monotone_tolerance: config.flow.monotone_tolerance,
        area_initial: first.area,
        area_final: last.area,
        area_ratio: last.area / first.area,
        area_law_defect: max_of(&|r| (r.area / (first.area * r.s.exp()) - 1.0).abs()),
        certificate_pass_rate: records.iter().filter(|r| r.certificate_pass).count() as f64
            / records.len() as f64,
        max_fd_check: max_of(&|r| r.fd_check.abs()),
        max_normalization_defect: max_of(&|r| r.normalization_defect),
        min_mesh_quality: records
            .iter()
            .map(|r| r.mesh_q)
            .fold(f64::INFINITY, f64::min),
        mesh_warnings: records.iter().filter(|r| r.mesh_warning).count(),
    }
}

/// Runs the flow, streaming the trajectory CSV. Returns the exit code: 0, or
/// 3 when a step failed (the partial trajectory is kept).
pub fn flow(config: &RunConfig, dir: &Path) -> Result<u8, CliError> {
    let model = config.model()?;
    let grid = SurfaceGrid::build(
        &config.surface,
        &model,
        config.grid.n_theta,
        config.grid.n_phi,
    )?;
    let mut csv = create(dir, "trajectory.csv")?;
    let mut io_error = None;
    let header = writeln!(csv, "{TRAJECTORY_HEADER}");
    if let Err(e) = header {
        io_error = Some(e);
    }
    let traj = flow::run(
        grid,
        &model,
        &config.beta,
        config.flow.s_max,
        config.flow.ds,
        &config.flow.options,
        |record, _| {
            if io_error.is_none() {
                if let Err(e) = writeln!(csv, "{}", record.csv_line()).and_then(|_| csv.flush()) {
                    io_error = Some(e);
                }
            }
        },
    )?;
    if let Some(e) = io_error {
        return Err(CliError::io("writing trajectory.csv")(e));
    }
    traj.final_state
        .grid
        .write_csv(create(dir, "final_surface.csv")?)?;
    let stopped = traj.stopped.as_ref().map(|e| e.to_string());
    let summary = summarize(config, model.name(), &traj.records, stopped);
    write_json(dir, "summary.json", &summary)?;
    match traj.stopped {
        Some(e) => {
            eprintln!("hflow: flow stopped at s = {}: {e}", summary.s_final);
            Ok(3)
        }
        None => Ok(0),
    }
}
