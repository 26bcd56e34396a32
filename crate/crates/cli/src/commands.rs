//! The `steady`, `s2`, `sweep` and `reproduce` commands.

use std::path::{Path, PathBuf};

use starsync_core::lindblad::{build_liouvillian, solve_steady_state, SteadyState};
use starsync_core::measures::{pair_report, s2_husimi_oracle, reduce_pair, PairReport};
use starsync_core::spin::{magnetic_number, SITE_DIM};
use starsync_core::sweep::{sweep_1d, sweep_2d, SweepTable};

use crate::output::{write_text, Cell, Document, Metadata, STEADY_COLUMNS, S2_COLUMNS, SWEEP_COLUMNS};
use crate::presets::{preset, Job, PRESET_IDS};
use crate::spec::{ExperimentSpec, Format};
use crate::{CliError, CliResult, Status};

/// Largest allowed Husimi-vs-closed-form discrepancy.
pub const HUSIMI_AGREEMENT_TOL: f64 = 1e-6;

fn solve(spec: &ExperimentSpec) -> CliResult<SteadyState> {
    let l = build_liouvillian(&spec.network)?;
    Ok(solve_steady_state(&l, &spec.solver)?)
}

fn meta(key: &str, value: impl Into<Cell>) -> (String, Cell) {
    (key.to_string(), value.into())
}

/// Steady-state diagnostics: residual, trace, smallest eigenvalue and the
/// level populations and `⟨S^z⟩` of every site.
pub fn steady_document(spec: &ExperimentSpec) -> CliResult<(String, Status)> {
    let steady = solve(spec)?;
    let rho = &steady.rho;
    let min_eig = rho.min_eigenvalue();
    let trace = rho.trace();
    let status = match rho.validate() {
        Ok(()) => Status::Ok,
        Err(e) => Status::ToleranceUnmet(e.to_string()),
    };
    let rows = rho
        .site_populations()
        .iter()
        .enumerate()
        .map(|(site, p)| {
            let sz: f64 = (0..SITE_DIM).map(|l| magnetic_number(l) as f64 * p[l]).sum();
            vec![Cell::Int(site), p[0].into(), p[1].into(), p[2].into(), sz.into()]
        })
        .collect();
    let doc = Document {
        command: "steady",
        spec,
        metadata: vec![
            meta("residual", steady.residual),
            meta("trace_re", trace.re),
            meta("trace_im", trace.im),
            meta("min_eigenvalue", min_eig),
            meta("hermiticity_error", rho.hermiticity_error()),
            ("method".into(), Cell::Text(format!("{:?}", steady.method).to_lowercase())),
        ],
        columns: &STEADY_COLUMNS,
        rows,
    };
    Ok((doc.render(spec.output.format), status))
}

/// Phase-distribution table for `spec.measure.pair`.
pub fn s2_document(spec: &ExperimentSpec) -> CliResult<(String, Status)> {
    let [i, j] = spec.measure.pair;
    let n_sites = spec.network.n_sites();
    if i == j || i >= n_sites || j >= n_sites {
        return Err(CliError::Input(format!(
            "invalid `measure.pair` ({i}, {j}) for a {n_sites}-site network"
        )));
    }
    let steady = solve(spec)?;
    let report = pair_report(&steady.rho, i, j, spec.measure.grid_size)?;
    let mut metadata = s2_metadata(&report, steady.residual);
    let mut status = Status::Ok;
    if spec.measure.husimi_check {
        let reduced = reduce_pair(&steady.rho, i, j)?;
        let oracle = s2_husimi_oracle(&reduced, spec.measure.grid_size, spec.measure.quad_order)?;
        let diff = oracle
            .iter()
            .zip(&report.distribution.samples)
            .map(|(a, b)| (a.1 - b.1).abs())
            .fold(0.0, f64::max);
        metadata.push(meta("husimi_max_abs_diff", diff));
        if !(diff <= HUSIMI_AGREEMENT_TOL) {
            status = Status::ToleranceUnmet(format!(
                "Husimi quadrature differs from the closed form by {diff:.3e}"
            ));
        }
    }
    let d = &report.distribution;
    let rows = d
        .samples
        .iter()
        .map(|&(phi, s)| vec![phi.into(), s.into(), d.first(phi).into(), d.second(phi).into()])
        .collect();
    let doc = Document { command: "s2", spec, metadata, columns: &S2_COLUMNS, rows };
    Ok((doc.render(spec.output.format), status))
}

fn s2_metadata(report: &PairReport, residual: f64) -> Metadata {
    let d = &report.distribution;
    let m = &report.measure;
    let c = &report.correlators;
    let peak = |p: Option<starsync_core::measures::Peak>| (p.map(|p| p.phi), p.map(|p| p.height));
    let (main_phi, main_h) = peak(m.peak_main);
    let (second_phi, second_h) = peak(m.peak_second);
    vec![
        ("pair".into(), Cell::Text(format!("{},{}", report.pair.0, report.pair.1))),
        meta("residual", residual),
        meta("a1", d.a1),
        meta("phi1", d.phi1),
        meta("a2", d.a2),
        meta("phi2", d.phi2),
        meta("abs_c1", c.c1.norm()),
        meta("abs_c2", c.c2.norm()),
        meta("sync_measure", m.value),
        ("positive_peaks".into(), Cell::Int(m.positive_peaks())),
        meta("peak_main_phi", main_phi),
        meta("peak_main_height", main_h),
        meta("peak_second_phi", second_phi),
        meta("peak_second_height", second_h),
    ]
}

pub fn run_sweep(spec: &ExperimentSpec) -> CliResult<SweepTable> {
    let axes = spec.sweep_axes()?;
    let opts = spec.sweep_options()?;
    let table = match axes.as_slice() {
        [a] => sweep_1d(&spec.network, a, &opts)?,
        [a, b] => sweep_2d(&spec.network, a, b, &opts)?,
        _ => return Err(CliError::Input("invalid `sweep.axes`: give one or two axes".into())),
    };
    Ok(table)
}

pub fn sweep_document(spec: &ExperimentSpec) -> CliResult<(String, Status)> {
    let table = run_sweep(spec)?;
    Ok(render_sweep(spec, &table))
}

pub fn render_sweep(spec: &ExperimentSpec, table: &SweepTable) -> (String, Status) {
    let failures = table.failures();
    let worst = table
        .rows
        .iter()
        .filter_map(|r| r.measures.map(|m| m.residual))
        .fold(0.0, f64::max);
    let mut metadata = vec![
        meta("residual", worst),
        ("failures".into(), Cell::Int(failures)),
        ("rows".into(), Cell::Int(table.rows.len())),
    ];
    for (k, axis) in table.axes.iter().enumerate() {
        metadata.push((format!("axis{}", k + 1), Cell::Text(axis.parameter.name().into())));
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let m = r.measures;
            vec![
                r.axis1.into(),
                r.axis2.into(),
                m.map(|m| m.s01).into(),
                m.and_then(|m| m.s12).into(),
                m.map(|m| m.abs_c1_01).into(),
                m.map(|m| m.abs_c2_01).into(),
                m.and_then(|m| m.abs_c1_12).into(),
                m.and_then(|m| m.abs_c2_12).into(),
                m.map(|m| m.residual).into(),
                r.solve_seconds.into(),
                Cell::Bool(r.failed()),
            ]
        })
        .collect();
    let doc = Document { command: "sweep", spec, metadata, columns: &SWEEP_COLUMNS, rows };
    let status = if failures == 0 {
        Status::Ok
    } else {
        let first = table.rows.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        Status::ToleranceUnmet(format!("{failures} sweep point(s) failed; first error: {first}"))
    };
    (doc.render(spec.output.format), status)
}

/// Runs one command on a loaded spec and writes its output.
pub fn execute(command: &str, spec: &ExperimentSpec) -> CliResult<Status> {
    let (text, status) = match command {
        "steady" => steady_document(spec)?,
        "s2" => s2_document(spec)?,
        "sweep" => sweep_document(spec)?,
        other => return Err(CliError::Input(format!("unknown command `{other}`"))),
    };
    write_text(spec.output.path.as_deref(), &text)?;
    Ok(status)
}

/// Files written by [`reproduce`].
#[derive(Debug, Clone)]
pub struct Reproduced {
    pub files: Vec<PathBuf>,
    pub status: Status,
}

/// Runs a figure preset and writes one file per job into `dir`.
pub fn reproduce(
    figure_id: &str,
    dir: &Path,
    format: Format,
    workers: Option<usize>,
) -> CliResult<Reproduced> {
    let jobs = preset(figure_id).ok_or_else(|| {
        CliError::Input(format!("unknown figure id `{figure_id}`; valid ids: {}", PRESET_IDS.join(", ")))
    })?;
    let mut files = Vec::new();
    let mut status = Status::Ok;
    for job in jobs {
        let Job { name, command, mut spec } = job;
        let path = dir.join(format!("{name}.{}", format.extension()));
        spec.output = crate::spec::OutputSpec { path: Some(path.clone()), format };
        if let (Some(w), Some(sweep)) = (workers, spec.sweep.as_mut()) {
            sweep.workers = Some(w);
        }
        spec.validate()?;
        status = status.and(execute(command, &spec)?);
        files.push(path);
    }
    Ok(Reproduced { files, status })
}
