//! Subcommand implementations. Each returns its stdout text; artifacts are
//! written atomically.

use std::fmt;
use std::path::Path;

use nls_collapse::criteria::{
    evaluate_all, mass_concentration, radial_localized, CriterionVerdict, LocalizedInput,
};
use nls_collapse::grid::RadialGrid;
use nls_collapse::profiles::{closed_form_diagnostics, sample};
use nls_collapse::quantities::compute_diagnostics;
use nls_collapse::scan::{
    analytic_bracket, sweep, worker_count, SweepPoint, SweepRow, DEFAULT_TOL,
};
use nls_collapse::solver::simulate_profile;
use nls_collapse::tables::{compute_table, TableId, TableOptions};
use nls_collapse::{Diagnostics, Error, GroundState, Profile, RadialField};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{RunConfig, Subcommand, UsageError};
use crate::output::{csv_string, key_values, num, opt_num, write_atomic};

const DEFAULT_DELTA: f64 = 0.01;
const DEFAULT_KAPPA_PSI: f64 = 64.0;

/// Why a run did not succeed, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(Error),
    /// The scan finished but some threshold is unresolved.
    Inconclusive(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Domain(_) => 2,
            Failure::Inconclusive(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Domain(e) => write!(f, "error: {e}"),
            Failure::Inconclusive(m) => write!(f, "inconclusive: {m}"),
        }
    }
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => Failure::Usage(m),
            other => Failure::Domain(other),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("cannot write {}: {e}", path.display()))
}

/// Result of a subcommand: text for stdout and, for scans with unresolved or
/// failed points, the failure that sets the exit code.
pub struct Report {
    pub stdout: String,
    pub failure: Option<Failure>,
}

impl Report {
    fn done(stdout: String) -> Self {
        Self {
            stdout,
            failure: None,
        }
    }
}

/// Write `text` to `out` with a one-line summary, or return it for stdout.
fn emit(
    out: Option<&Path>,
    text: String,
    summary: impl FnOnce() -> String,
) -> Result<String, Failure> {
    match out {
        Some(path) => {
            write_atomic(path, text.as_bytes()).map_err(|e| io_failure(path, e))?;
            Ok(format!("{} -> {}\n", summary(), path.display()))
        }
        None => Ok(text),
    }
}

pub fn run(cfg: &RunConfig, ground: &GroundState) -> Result<Report, Failure> {
    match cfg.subcommand {
        Subcommand::Ground => ground_cmd(cfg, ground).map(Report::done),
        Subcommand::Diag => diag(cfg, ground).map(Report::done),
        Subcommand::Criteria => criteria(cfg, ground).map(Report::done),
        Subcommand::Simulate => simulate(cfg, ground).map(Report::done),
        Subcommand::Scan => scan(cfg, ground),
        Subcommand::Table => table(cfg, ground).map(Report::done),
    }
}

fn ground_cmd(cfg: &RunConfig, q: &GroundState) -> Result<String, Failure> {
    let (poh_grad, poh_l4) = q.pohozhaev_residuals();
    let rows: Vec<(String, String)> = [
        ("peak", q.peak),
        ("mass_sq", q.mass_sq),
        ("grad_sq", q.grad_sq),
        ("l4_fourth", q.l4_fourth),
        ("var", q.var),
        ("hhalf_sq", q.hhalf_sq),
        ("energy", q.energy),
        ("pohozhaev_grad_residual", poh_grad),
        ("pohozhaev_l4_residual", poh_l4),
        ("tail_coefficient", q.tail_coefficient),
        ("tail_start", q.tail_start),
        ("r_max", q.grid.r_max()),
        ("intervals", q.grid.intervals() as f64),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), num(v)))
    .collect();
    let mut text = key_values(&rows);
    if let Some(path) = cfg.get("samples") {
        let samples: Vec<Vec<String>> = q
            .grid
            .radii()
            .zip(&q.samples)
            .map(|(r, v)| vec![num(r), num(*v)])
            .collect();
        let path = Path::new(path);
        write_atomic(path, csv_string(&["r", "Q"], &samples).as_bytes())
            .map_err(|e| io_failure(path, e))?;
        text.push_str(&format!(
            "wrote {} samples -> {}\n",
            samples.len(),
            path.display()
        ));
    }
    emit(cfg.out.as_deref(), text, || "ground state".into())
}

/// Read a field from CSV with columns `r,re[,im]` on a uniform grid from 0.
fn read_field(path: &Path) -> Result<RadialField, Failure> {
    let bad = |m: String| Failure::Usage(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let get = |i: usize| -> Result<f64, Failure> {
            rec.get(i).unwrap_or("0").trim().parse().map_err(|_| {
                bad(format!(
                    "non-numeric cell in record {}",
                    rec.position().map_or(0, |p| p.line())
                ))
            })
        };
        radii.push(get(0)?);
        values.push(Complex64::new(
            get(1)?,
            if rec.len() > 2 { get(2)? } else { 0.0 },
        ));
    }
    if radii.len() < 3 || radii[0] != 0.0 {
        return Err(bad("need at least 3 rows starting at r = 0".into()));
    }
    let r_max = *radii.last().expect("non-empty");
    let grid = RadialGrid::new(r_max, radii.len() - 1)?;
    let uniform = radii
        .iter()
        .enumerate()
        .all(|(j, r)| (r - j as f64 * grid.dr()).abs() <= 1e-9 * r_max);
    if !uniform {
        return Err(bad("radii must be uniformly spaced".into()));
    }
    Ok(RadialField::new(grid, values)?)
}

fn diagnostics_rows(d: &Diagnostics) -> Vec<(String, String)> {
    let mut rows: Vec<(String, String)> = [
        ("mass", Some(d.mass)),
        ("energy", Some(d.energy)),
        ("momentum", Some(d.momentum)),
        ("grad_sq", Some(d.grad_sq)),
        ("l4_fourth", Some(d.l4_fourth)),
        ("variance", Some(d.variance)),
        ("variance_rate", Some(d.variance_rate)),
        ("eta", Some(d.eta)),
        ("me_ratio", Some(d.me_ratio)),
        ("hhalf_sq", d.hhalf_sq),
        ("gamma", d.phase.map(|p| p.gamma)),
        ("energy_unphased", d.phase.map(|p| p.e0)),
        ("energy_phase", d.phase.map(|p| p.e_gamma)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), opt_num(v)))
    .collect();
    rows.push(("trusted".into(), d.trusted.to_string()));
    rows.push((
        "hhalf_from_quadrature".into(),
        d.hhalf_from_quadrature.to_string(),
    ));
    rows
}

fn diag(cfg: &RunConfig, ground: &GroundState) -> Result<String, Failure> {
    let (source, d) = match cfg.get("field") {
        Some(path) => {
            if cfg.get("family").is_some() {
                return Err(Failure::Usage(
                    "give either a profile or field=<csv>, not both".into(),
                ));
            }
            let field = read_field(Path::new(path))?;
            (format!("field={path}"), compute_diagnostics(&field, ground))
        }
        None => {
            let profile = cfg.profile()?;
            let d = if cfg.flag("sampled")? {
                compute_diagnostics(
                    &sample(&profile, ground, profile.quadrature_grid())?,
                    ground,
                )
            } else {
                closed_form_diagnostics(&profile, ground)?
            };
            (profile.to_string(), d)
        }
    };
    let text = if cfg.flag("json")? {
        let record = json!({ "source": source, "diagnostics": d });
        serde_json::to_string_pretty(&record).expect("serializable") + "\n"
    } else {
        let mut rows = vec![("source".to_string(), source)];
        rows.extend(diagnostics_rows(&d));
        key_values(&rows)
    };
    emit(cfg.out.as_deref(), text, || "diagnostics".into())
}

fn witnesses(v: &CriterionVerdict) -> String {
    v.witnesses
        .iter()
        .map(|(k, x)| format!("{k}={}", num(*x)))
        .collect::<Vec<_>>()
        .join(";")
}

fn criteria(cfg: &RunConfig, ground: &GroundState) -> Result<String, Failure> {
    let profile = cfg.profile()?;
    let delta = cfg.number("delta")?.unwrap_or(DEFAULT_DELTA);
    let kappa_psi = cfg.number("kappa_psi")?.unwrap_or(DEFAULT_KAPPA_PSI);
    let d = nls_collapse::scan::initial_diagnostics(&profile, ground)?;
    let mut verdicts = evaluate_all(&d);

    let field = sample(&profile, ground, profile.quadrature_grid())?;
    let floor = (kappa_psi * d.mass * d.mass / delta).sqrt();
    let radius = cfg.number("radius")?.unwrap_or(floor * (1.0 + 1e-9));
    let localized = LocalizedInput::from_field(&field, radius)?;
    verdicts.push(radial_localized(&localized, delta, kappa_psi)?);
    match mass_concentration(&field, delta) {
        Ok(v) => verdicts.push(v),
        Err(Error::Inapplicable(_)) => {}
        Err(e) => return Err(e.into()),
    }

    let rows: Vec<Vec<String>> = verdicts
        .iter()
        .map(|v| {
            vec![
                profile.to_string(),
                v.criterion.to_string(),
                v.verdict.to_string(),
                witnesses(v),
                v.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let text = if cfg.csv {
        csv_string(
            &["profile", "criterion", "verdict", "witnesses", "note"],
            &rows,
        )
    } else {
        let mut s = format!("profile  {profile}\n");
        let w = rows.iter().map(|r| r[1].len()).max().unwrap_or(0);
        for r in &rows {
            let note = if r[4].is_empty() {
                String::new()
            } else {
                format!("  ({})", r[4])
            };
            s.push_str(&format!("{:<w$}  {:<13}  {}{note}\n", r[1], r[2], r[3]));
        }
        s
    };
    emit(cfg.out.as_deref(), text, || {
        format!("{} criteria", rows.len())
    })
}

fn simulate(cfg: &RunConfig, ground: &GroundState) -> Result<String, Failure> {
    let profile = cfg.profile()?;
    let params = cfg.params.resolved_for(&profile);
    let outcome = simulate_profile(&profile, ground, &params)?;
    let record = json!({
        "profile": profile.to_string(),
        "classification": outcome.classification,
        "final_time": outcome.final_time(),
        "steps": outcome.steps,
        "mass_drift": outcome.mass_drift,
        "energy_drift": outcome.energy_drift,
        "energy_excursion": outcome.energy_excursion,
        "params": params,
    });
    let record = serde_json::to_string_pretty(&record).expect("serializable") + "\n";
    let series: Vec<Vec<String>> = outcome
        .series
        .iter()
        .map(|s| {
            let d = &s.diagnostics;
            [
                s.t,
                d.mass,
                d.energy,
                d.grad_sq,
                d.l4_fourth,
                d.variance,
                s.amplitude,
                d.eta,
            ]
            .into_iter()
            .map(num)
            .collect()
        })
        .collect();
    let series = csv_string(
        &["t", "M", "E", "grad_sq", "l4_fourth", "V", "amp_max", "eta"],
        &series,
    );
    let summary = format!(
        "{} at t={} after {} steps",
        outcome.classification.label(),
        num(outcome.final_time()),
        outcome.steps
    );
    match &cfg.out {
        Some(prefix) => {
            let json_path = prefix.with_extension("json");
            let csv_path = prefix.with_extension("csv");
            write_atomic(&json_path, record.as_bytes()).map_err(|e| io_failure(&json_path, e))?;
            write_atomic(&csv_path, series.as_bytes()).map_err(|e| io_failure(&csv_path, e))?;
            Ok(format!(
                "{summary} -> {}, {}\n",
                json_path.display(),
                csv_path.display()
            ))
        }
        None => Ok(record),
    }
}

fn parse_bracket(raw: &str) -> Result<Option<(f64, f64)>, Failure> {
    if raw == "auto" {
        return Ok(None);
    }
    let bad = || Failure::Usage(format!("bracket must be lo:hi or auto, got `{raw}`"));
    let (lo, hi) = raw.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Ok(Some((lo, hi)))
}

fn scan(cfg: &RunConfig, ground: &GroundState) -> Result<Report, Failure> {
    let vary = cfg.get("vary").unwrap_or("p").to_string();
    let tol = cfg.number("tol")?.unwrap_or(DEFAULT_TOL);
    let bracket = parse_bracket(cfg.get("bracket").unwrap_or("auto"))?;
    if bracket.is_none() && vary != "p" {
        return Err(Failure::Usage(format!(
            "an automatic bracket is only available for p; pass --bracket lo:hi to vary `{vary}`"
        )));
    }
    let templates = cfg.lattice(&vary)?;
    let family = templates[0].family();
    if !family.parameter_names().contains(&vary.as_str()) {
        return Err(Failure::Usage(format!(
            "`{vary}` is not a parameter of {}",
            family.name()
        )));
    }
    let mut points = Vec::with_capacity(templates.len());
    for template in templates {
        let bracket = match bracket {
            Some(b) => b,
            None => analytic_bracket(&template, ground)?,
        };
        points.push(SweepPoint { template, bracket });
    }
    let workers = worker_count(cfg.workers);
    let rows = sweep(&points, &vary, tol, &cfg.params, ground, workers)?;

    let fixed: Vec<&str> = family
        .parameter_names()
        .iter()
        .copied()
        .filter(|k| *k != vary)
        .collect();
    let mut header = vec!["family"];
    header.extend(&fixed);
    header.extend([
        "threshold_lo",
        "threshold_hi",
        "p_dhr_scatter",
        "p_lushnikov",
        "p_adapted",
        "p_hhalf",
        "status",
    ]);
    let (mut inconclusive, mut failed) = (0, 0);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let status = row_status(row);
            if status == "inconclusive" {
                inconclusive += 1;
            } else if status != "ok" {
                failed += 1;
            }
            scan_row(row, &fixed, status)
        })
        .collect();
    let text = csv_string(&header, &table);
    let n = table.len();
    let stdout = emit(cfg.out.as_deref(), text, || {
        format!("{n} scan points, {inconclusive} inconclusive, {failed} failed")
    })?;
    let failure = if failed > 0 {
        Some(Failure::Domain(Error::Bracket(format!(
            "{failed} of {n} scan points failed"
        ))))
    } else if inconclusive > 0 {
        Some(Failure::Inconclusive(format!(
            "{inconclusive} of {n} scan points"
        )))
    } else {
        None
    };
    Ok(Report { stdout, failure })
}

fn row_status(row: &SweepRow) -> String {
    match &row.threshold {
        Ok(t) if t.inconclusive => "inconclusive".into(),
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn scan_row(row: &SweepRow, fixed: &[&str], status: String) -> Vec<String> {
    let template: &Profile = &row.point.template;
    let mut out = vec![template.family().name().to_string()];
    out.extend(fixed.iter().map(|k| opt_num(template.param(k).ok())));
    let (lo, hi) = match &row.threshold {
        Ok(t) => (Some(t.p_scatter), Some(t.p_blowup)),
        Err(_) => (None, None),
    };
    let c = row.curves.as_ref().ok();
    out.extend([
        opt_num(lo),
        opt_num(hi),
        opt_num(c.and_then(|c| c.p_dhr_scatter)),
        opt_num(c.and_then(|c| c.p_lushnikov)),
        opt_num(c.and_then(|c| c.p_adapted)),
        opt_num(c.and_then(|c| c.p_hhalf)),
        status,
    ]);
    out
}

fn table(cfg: &RunConfig, ground: &GroundState) -> Result<String, Failure> {
    let id: TableId = cfg
        .get("id")
        .ok_or_else(|| Failure::Usage("table needs an id".into()))?
        .parse()?;
    let options = TableOptions {
        simulate: cfg.flag("simulate")?,
        tol: cfg.number("tol")?.unwrap_or(DEFAULT_TOL),
        params: cfg.params,
        workers: worker_count(cfg.workers),
    };
    let t = compute_table(id, ground, &options)?;
    let rows: Vec<Vec<String>> = t
        .cells
        .iter()
        .map(|c| {
            vec![
                id.name().to_string(),
                c.row.clone(),
                c.column.clone(),
                opt_num(c.computed),
                opt_num(c.reference),
                opt_num(c.abs_diff()),
            ]
        })
        .collect();
    let text = csv_string(
        &[
            "table",
            "row",
            "column",
            "computed",
            "reference",
            "abs_diff",
        ],
        &rows,
    );
    emit(cfg.out.as_deref(), text, || {
        format!("{id}: {} cells", rows.len())
    })
}
