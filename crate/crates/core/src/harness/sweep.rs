//! ε-sweeps: one recovery construction or solver run per ε.

use super::config::{ExperimentConfig, Mode};
use crate::energy::{energy, griffith_eval, EnergyBreakdown, Variant};
use crate::error::{Error, Result};
use crate::lattice::io::FieldFile;
use crate::lattice::{LatticeDomain, ScalarField, VectorField};
use crate::recovery::build_recovery;
use crate::reduce::{self, Reduction};
use crate::solver::{alternate_minimize, default_init, SolveReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const CSV_HEADER: [&str; 8] = ["eps", "delta", "f_elastic", "f_div", "g_mm", "total", "griffith_ref", "rel_gap"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub delta: f64,
    pub f_elastic: f64,
    pub f_div: f64,
    pub g_mm: f64,
    /// `None` for an inadmissible pair.
    pub total: Option<f64>,
    pub griffith_ref: f64,
    /// `|total − ref| / |ref|`, or the absolute gap when `ref = 0`.
    pub rel_gap: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(eps: f64, delta: f64, err: &Error) -> Self {
        SweepRow {
            eps,
            delta,
            f_elastic: f64::NAN,
            f_div: f64::NAN,
            g_mm: f64::NAN,
            total: None,
            griffith_ref: f64::NAN,
            rel_gap: None,
            error: Some(err.to_string()),
        }
    }
}

/// Fields and solver report of one row, kept for file output.
pub struct RowFields {
    pub domain: LatticeDomain,
    pub u: VectorField,
    pub v: ScalarField,
    pub report: Option<SolveReport>,
}

pub fn relative_gap(total: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        (total - reference).abs()
    } else {
        (total - reference).abs() / reference.abs()
    }
}

fn row_from(eps: f64, delta: f64, b: &EnergyBreakdown, reference: f64) -> SweepRow {
    let total = b.total_value();
    SweepRow {
        eps,
        delta,
        f_elastic: b.f_elastic(),
        f_div: b.f_div(),
        g_mm: b.g_mm,
        total,
        griffith_ref: reference,
        rel_gap: total.map(|t| relative_gap(t, reference)),
        error: None,
    }
}

/// The recovery pair for the configured target at `eps` (the sampled target
/// with `v ≡ 1` when there is no crack).
pub fn recovery_fields(config: &ExperimentConfig, eps: f64) -> Result<RowFields> {
    let delta = config.schedule.delta(eps)?;
    let domain = config.domain(delta)?;
    let params = config.energy_params(eps)?;
    let reference = config.reference()?;
    let datum = config.datum(&domain)?;
    let (mut u, mut v) = if reference.crack.is_some() {
        let pair = build_recovery(&domain, &reference, &params, &config.recovery.options())?;
        (pair.u, pair.v)
    } else {
        (datum.clone(), ScalarField::constant(&domain, 1.0))
    };
    // the Dirichlet class prescribes u and v = 1 on the boundary layer
    if params.variant == Variant::Dirichlet {
        u.copy_dirichlet_from(&domain, &datum)?;
        v.apply_dirichlet(&domain)?;
    }
    Ok(RowFields { domain, u, v, report: None })
}

/// Staggered minimization from the default initialization, with `v₀`
/// optionally perturbed by `init_noise` (seeded per row).
pub fn minimize_fields(config: &ExperimentConfig, eps: f64, row: usize) -> Result<RowFields> {
    let delta = config.schedule.delta(eps)?;
    let domain = config.domain(delta)?;
    let params = config.energy_params(eps)?;
    let datum = config.datum(&domain)?;
    let pinned = !domain.dirichlet_nodes().is_empty();
    let datum = pinned.then_some(&datum);
    let (u0, mut v0) = default_init(&domain, datum);
    if config.init_noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(row as u64));
        for x in v0.as_mut_slice() {
            *x -= config.init_noise * rng.gen::<f64>();
        }
    }
    let (u, v, report) = alternate_minimize(&domain, &params, &u0, &v0, datum, &config.solver)?;
    Ok(RowFields { domain, u, v, report: Some(report) })
}

fn run_row(config: &ExperimentConfig, eps: f64, row: usize) -> Result<(SweepRow, RowFields)> {
    let delta = config.schedule.delta(eps)?;
    let fields = match config.mode {
        Mode::EvaluateRecovery => recovery_fields(config, eps)?,
        Mode::Minimize => minimize_fields(config, eps, row)?,
        Mode::Verify => return Err(Error::Config("mode \"verify\" does not produce a sweep".into())),
    };
    let params = config.energy_params(eps)?;
    let datum = config.datum(&fields.domain)?;
    let b = energy(&fields.domain, &fields.u, &fields.v, &params, Some(&datum))?;
    let reference = griffith_eval(&config.reference()?, &params)?;
    Ok((row_from(eps, delta, &b, reference), fields))
}

/// Runs every ε of the schedule (rows in parallel) and returns the rows in
/// schedule order. Failures are recorded in the row's `error` field.
///
/// With `out_dir`, writes the CSV table and, when `output.fields` is set, the
/// field files `u_<i>.glf`, `v_<i>.glf` (and `report_<i>.json` for solver runs).
pub fn run_sweep(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if config.mode == Mode::Verify {
        return Err(Error::Config("mode \"verify\" does not produce a sweep".into()));
    }
    let previous = reduce::mode();
    if config.solver.deterministic {
        reduce::set_mode(Reduction::Deterministic);
    }
    let write_fields = config.output.fields && out_dir.is_some();
    let results: Vec<(SweepRow, Option<RowFields>)> = config
        .schedule
        .eps
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| match run_row(config, eps, i) {
            Ok((row, fields)) => (row, write_fields.then_some(fields)),
            Err(e) => {
                log::warn!("row ε = {eps} failed: {e}");
                let delta = config.schedule.delta(eps).unwrap_or(f64::NAN);
                (SweepRow::failed(eps, delta, &e), None)
            }
        })
        .collect();
    reduce::set_mode(previous);

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for (i, (_, fields)) in results.iter().enumerate() {
            if let Some(f) = fields {
                FieldFile::from_vector(&f.domain, &f.u)?.save(dir.join(format!("u_{i}.glf")))?;
                FieldFile::from_scalar(&f.domain, &f.v)?.save(dir.join(format!("v_{i}.glf")))?;
                if let Some(r) = &f.report {
                    let json = serde_json::to_string_pretty(r).map_err(|e| Error::Config(e.to_string()))?;
                    std::fs::write(dir.join(format!("report_{i}.json")), json)?;
                }
            }
        }
    }
    let rows: Vec<SweepRow> = results.into_iter().map(|(r, _)| r).collect();
    if let Some(dir) = out_dir {
        let file = std::fs::File::create(dir.join(config.output.csv_name()))?;
        write_csv(&rows, std::io::BufWriter::new(file))?;
    }
    Ok(rows)
}

fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

/// Writes the table: one header line plus one line per row. An `error`
/// column is appended only when some row failed. Numbers use the shortest
/// round-trip representation; an inadmissible total is written as `inf`.
pub fn write_csv(rows: &[SweepRow], w: impl Write) -> Result<()> {
    let with_errors = rows.iter().any(|r| r.error.is_some());
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if with_errors {
        header.push("error");
    }
    out.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let total = match (&r.error, r.total) {
            (Some(_), _) => String::new(),
            (None, Some(t)) => cell(t),
            (None, None) => "inf".into(),
        };
        let mut rec = vec![
            cell(r.eps),
            cell(r.delta),
            cell(r.f_elastic),
            cell(r.f_div),
            cell(r.g_mm),
            total,
            cell(r.griffith_ref),
            r.rel_gap.map(cell).unwrap_or_default(),
        ];
        if with_errors {
            rec.push(r.error.clone().unwrap_or_default());
        }
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}
