//! Reference tables: closed-form root tables, Ḣ½ tables, criterion
//! coefficients, and simulated threshold tables, each paired with the
//! tabulated reference values shipped in `data/reference.tsv`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::criteria::{adapted_simple, kappa, lushnikov_simple, omega};
use crate::error::{Error, Result};
use crate::groundstate::GroundState;
use crate::profiles::{closed_form_core, closed_form_diagnostics, Family, Profile};
use crate::quantities::Diagnostics;
use crate::scan::{analytic_bracket, sweep, SweepPoint};
use crate::solver::EvolveParams;

const REFERENCE: &str = include_str!("../data/reference.tsv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub table: String,
    pub row: String,
    pub column: String,
    pub value: f64,
}

/// Every shipped reference value.
pub fn reference_entries() -> &'static [ReferenceEntry] {
    static ENTRIES: OnceLock<Vec<ReferenceEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        REFERENCE
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                assert_eq!(f.len(), 4, "malformed reference line `{l}`");
                ReferenceEntry {
                    table: f[0].to_string(),
                    row: f[1].to_string(),
                    column: f[2].to_string(),
                    value: f[3]
                        .parse()
                        .unwrap_or_else(|_| panic!("bad number in `{l}`")),
                }
            })
            .collect()
    })
}

pub fn reference_value(table: &str, row: &str, column: &str) -> Option<f64> {
    reference_entries()
        .iter()
        .find(|e| e.table == table && e.row == row && e.column == column)
        .map(|e| e.value)
}

/// Positive roots of `f` on `(lo, hi)`: sign changes on a geometric grid of
/// `samples` points, each refined by bisection. Non-finite samples are
/// skipped, so poles and undefined stretches never produce roots.
pub fn find_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && samples >= 2);
    let ratio = (hi / lo).powf(1.0 / (samples - 1) as f64);
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut x = lo;
    for _ in 0..samples {
        let y = f(x);
        if y.is_finite() {
            if y == 0.0 {
                roots.push(x);
            } else if let Some((px, py)) = prev {
                if py != 0.0 && py.signum() != y.signum() {
                    if let Some(r) = bisect(&f, px, x, py) {
                        roots.push(r);
                    }
                }
            }
            prev = Some((x, y));
        } else {
            prev = None;
        }
        x *= ratio;
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> Option<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if !fm.is_finite() {
            return None;
        }
        if fm == 0.0 || b - a <= 4.0 * f64::EPSILON * m {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Residuals whose zeros in `p` the root tables list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Residual {
    /// `M·E/(M[Q]E[Q]) − 1`.
    MassEnergy,
    /// Simplified phase-data Lushnikov form.
    Lushnikov,
    /// Simplified phase-data adapted form.
    Adapted,
}

impl Residual {
    pub fn eval(self, d: &Diagnostics) -> f64 {
        let e0 = d.phase.map_or(d.energy, |s| s.e0);
        match self {
            Residual::MassEnergy => d.me_ratio - 1.0,
            Residual::Lushnikov => lushnikov_simple(d.mass, d.energy, e0, d.variance),
            Residual::Adapted => adapted_simple(d.mass, d.energy, e0, d.variance),
        }
    }
}

/// The amplitude at which the energy vanishes; every diagnostic scales as
/// `p²` except `‖u‖₄⁴ ∝ p⁴`.
pub fn positive_energy_limit(template: &Profile, ground: &GroundState) -> Result<f64> {
    let d = closed_form_core(&template.with_param("p", 1.0)?, ground)?;
    Ok((2.0 * d.grad_sq / d.l4_fourth).sqrt())
}

const ROOT_SAMPLES: usize = 40_000;
/// Roots are searched up to this multiple of the positive-energy limit; the
/// adapted form stays real for negative energy.
const SEARCH_SPAN: f64 = 1.5;

/// Zeros in `p` of `residual` for `template`.
pub fn residual_roots(
    template: &Profile,
    residual: Residual,
    ground: &GroundState,
) -> Result<Vec<f64>> {
    let limit = positive_energy_limit(template, ground)?;
    let f = |p: f64| {
        template
            .with_param("p", p)
            .and_then(|t| closed_form_core(&t, ground))
            .map_or(f64::NAN, |d| residual.eval(&d))
    };
    let mut roots = find_roots(f, limit * 1e-4, limit * SEARCH_SPAN, ROOT_SAMPLES);
    // forms with a 1/√E term can cross zero in a sliver just below the limit
    let near = find_roots(|u| f(limit * (1.0 - u)), 1e-14, 1e-2, 2000);
    roots.extend(near.into_iter().map(|u| limit * (1.0 - u)));
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    Ok(roots)
}

/// `‖u‖²_Ḣ½/p²` and the amplitude at which `‖u‖_Ḣ½ = ‖Q‖_Ḣ½`.
pub fn hhalf_crossing(template: &Profile, ground: &GroundState) -> Result<(f64, f64)> {
    let d = closed_form_diagnostics(&template.with_param("p", 1.0)?, ground)?;
    let h = d.hhalf_sq.ok_or(Error::Truncated)?;
    Ok((h, (ground.hhalf_sq / h).sqrt()))
}

/// Real-data criterion coefficients for `template` (its `p` is ignored).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub positive_energy: f64,
    pub mass_gradient: f64,
    pub mass_energy_low: f64,
    pub mass_energy_high: f64,
    pub hhalf: f64,
    pub lushnikov: f64,
    pub adapted: f64,
}

pub fn coefficients(template: &Profile, ground: &GroundState) -> Result<Coefficients> {
    let limit = positive_energy_limit(template, ground)?;
    let roots_of = |f: &dyn Fn(&Diagnostics) -> f64| {
        find_roots(
            |p| {
                template
                    .with_param("p", p)
                    .and_then(|t| closed_form_core(&t, ground))
                    .map_or(f64::NAN, |d| f(&d))
            },
            limit * 1e-4,
            limit * (1.0 - 1e-12),
            ROOT_SAMPLES,
        )
    };
    let single = |name: &str, roots: Vec<f64>| {
        roots.first().copied().ok_or_else(|| {
            Error::Inapplicable(format!("no {name} root below the positive-energy limit"))
        })
    };
    let me = residual_roots(template, Residual::MassEnergy, ground)?;
    if me.len() < 2 {
        return Err(Error::Inapplicable(
            "mass-energy condition has fewer than two roots".into(),
        ));
    }
    Ok(Coefficients {
        positive_energy: limit,
        mass_gradient: single("mass-gradient", roots_of(&|d| d.eta - 1.0))?,
        mass_energy_low: me[0],
        mass_energy_high: me[me.len() - 1],
        hhalf: hhalf_crossing(template, ground)?.1,
        lushnikov: single("Lushnikov", roots_of(&|d| omega(d) - 1.0))?,
        adapted: single("adapted", roots_of(&|d| kappa(d) - 1.0))?,
    })
}

/// Tables this module regenerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    Coefficients,
    T1Num,
    T1Me,
    T1Lgauss,
    T1LAgauss,
    T1PhaseNum,
    T2NumH12,
    T1_2Super,
    TH12SuperPhase,
    T2Lsuper,
    T2LAsuperphase,
    T2PhSuper,
    TOffNophase,
    T3MEphase,
    T3Lsimple,
    T3LAsimple,
    T3NumPhase,
    T4H12,
    T4Me,
    T4Num,
    T4MEphase,
    T4H12Phase,
    T4LPhase,
    T4LAphase,
    T4NumPhase,
}

const ALL: [(TableId, &str); 25] = [
    (TableId::Coefficients, "coefficients"),
    (TableId::T1Num, "T1:num"),
    (TableId::T1Me, "T1:ME"),
    (TableId::T1Lgauss, "T1:Lgauss"),
    (TableId::T1LAgauss, "T1:LAgauss"),
    (TableId::T1PhaseNum, "T1:phase-num"),
    (TableId::T2NumH12, "T2:num+H12"),
    (TableId::T1_2Super, "T:1-2super"),
    (TableId::TH12SuperPhase, "T:H12-super-phase"),
    (TableId::T2Lsuper, "T2:Lsuper"),
    (TableId::T2LAsuperphase, "T2:LAsuperphase"),
    (TableId::T2PhSuper, "T2:ph+super"),
    (TableId::TOffNophase, "T:off-nophase"),
    (TableId::T3MEphase, "T3:MEphase"),
    (TableId::T3Lsimple, "T3:Lsimple"),
    (TableId::T3LAsimple, "T3:LAsimple"),
    (TableId::T3NumPhase, "T3:num-phase"),
    (TableId::T4H12, "T4:H12"),
    (TableId::T4Me, "T4:ME"),
    (TableId::T4Num, "T4:num"),
    (TableId::T4MEphase, "T4:MEphase"),
    (TableId::T4H12Phase, "T4:H12-phase"),
    (TableId::T4LPhase, "T4:L-phase"),
    (TableId::T4LAphase, "T4:LAphase"),
    (TableId::T4NumPhase, "T4:num-phase"),
];

impl TableId {
    pub fn all() -> impl Iterator<Item = TableId> {
        ALL.iter().map(|(t, _)| *t)
    }

    pub fn name(self) -> &'static str {
        ALL.iter()
            .find(|(t, _)| *t == self)
            .map(|(_, n)| *n)
            .expect("every id is listed")
    }

    /// Whether computing the table needs threshold simulations.
    pub fn is_simulated(self) -> bool {
        matches!(self.kind(), Kind::Simulated { .. })
    }

    fn kind(self) -> Kind {
        use TableId::*;
        let half = 0.5;
        match self {
            Coefficients => Kind::Coefficients,
            T1Me => Kind::Roots(Family::Gaussian, half, Residual::MassEnergy),
            T1Lgauss => Kind::Roots(Family::Gaussian, half, Residual::Lushnikov),
            T1LAgauss => Kind::Roots(Family::Gaussian, half, Residual::Adapted),
            T1_2Super => Kind::Roots(Family::SuperGaussian, half, Residual::MassEnergy),
            T2Lsuper => Kind::Roots(Family::SuperGaussian, half, Residual::Lushnikov),
            T2LAsuperphase => Kind::Roots(Family::SuperGaussian, half, Residual::Adapted),
            T3MEphase => Kind::Roots(Family::OffCentered, half, Residual::MassEnergy),
            T3Lsimple => Kind::Roots(Family::OffCentered, half, Residual::Lushnikov),
            T3LAsimple => Kind::Roots(Family::OffCentered, half, Residual::Adapted),
            T4Me => Kind::Roots(Family::Oscillatory, 0.0, Residual::MassEnergy),
            T4MEphase => Kind::Roots(Family::Oscillatory, half, Residual::MassEnergy),
            T4LPhase => Kind::Roots(Family::Oscillatory, half, Residual::Lushnikov),
            T4LAphase => Kind::Roots(Family::Oscillatory, half, Residual::Adapted),
            T2NumH12 => Kind::Hhalf(Family::SuperGaussian, 0.0),
            TH12SuperPhase => Kind::Hhalf(Family::SuperGaussian, half),
            T4H12 => Kind::Hhalf(Family::Oscillatory, 0.0),
            T4H12Phase => Kind::Hhalf(Family::Oscillatory, half),
            T1Num => Kind::Simulated {
                family: Family::Gaussian,
                signed: false,
            },
            T1PhaseNum => Kind::Simulated {
                family: Family::Gaussian,
                signed: true,
            },
            T2PhSuper => Kind::Simulated {
                family: Family::SuperGaussian,
                signed: true,
            },
            TOffNophase => Kind::Simulated {
                family: Family::OffCentered,
                signed: false,
            },
            T3NumPhase => Kind::Simulated {
                family: Family::OffCentered,
                signed: true,
            },
            T4Num => Kind::Simulated {
                family: Family::Oscillatory,
                signed: false,
            },
            T4NumPhase => Kind::Simulated {
                family: Family::Oscillatory,
                signed: true,
            },
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL.iter()
            .find(|(_, n)| n.eq_ignore_ascii_case(s.trim()))
            .map(|(t, _)| *t)
            .ok_or_else(|| {
                let known: Vec<&str> = ALL.iter().map(|(_, n)| *n).collect();
                Error::Parse(format!("unknown table `{s}`; known: {}", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Coefficients,
    Roots(Family, f64, Residual),
    /// Ḣ½ rows, plus simulated threshold rows when the table has them.
    Hhalf(Family, f64),
    Simulated {
        family: Family,
        signed: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub row: String,
    pub column: String,
    pub computed: Option<f64>,
    pub reference: Option<f64>,
}

impl TableCell {
    pub fn abs_diff(&self) -> Option<f64> {
        Some((self.computed? - self.reference?).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: TableId,
    pub cells: Vec<TableCell>,
}

impl Table {
    pub fn cell(&self, row: &str, column: &str) -> Option<&TableCell> {
        self.cells
            .iter()
            .find(|c| c.row == row && c.column == column)
    }
}

/// Settings for simulated tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    /// Run threshold scans for simulated tables; otherwise their computed
    /// cells stay empty.
    pub simulate: bool,
    pub tol: f64,
    pub params: EvolveParams,
    pub workers: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            simulate: false,
            tol: crate::scan::DEFAULT_TOL,
            params: EvolveParams::default(),
            workers: 1,
        }
    }
}

/// Column keys of the reference data, in order of first appearance.
fn reference_columns(id: TableId) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for e in reference_entries().iter().filter(|e| e.table == id.name()) {
        if !cols.contains(&e.column) {
            cols.push(e.column.clone());
        }
    }
    cols
}

fn reference_rows(id: TableId) -> Vec<String> {
    let mut rows: Vec<String> = Vec::new();
    for e in reference_entries().iter().filter(|e| e.table == id.name()) {
        if !rows.contains(&e.row) {
            rows.push(e.row.clone());
        }
    }
    rows
}

/// Parse a `name=value` column key.
fn column_value(column: &str) -> Result<(&str, &str)> {
    column
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("bad column key `{column}`")))
}

fn template_for(family: Family, column: &str, gamma: f64) -> Result<Profile> {
    let (name, value) = column_value(column)?;
    let v: f64 = value
        .parse()
        .map_err(|_| Error::Parse(format!("bad column value `{value}`")))?;
    // oscillatory β = 0 is allowed; the template's own p is a placeholder
    Profile::default_for(family)
        .with_param(name, v)?
        .with_param("gamma", gamma)
}

type Cell = (String, String, Option<f64>);

/// Threshold rows `p_s`/`p_b` (suffixed `+`/`-` for signed phases), from
/// sweeps bracketed by the analytic criteria.
fn simulated_cells(
    family: Family,
    signed: bool,
    columns: &[String],
    ground: &GroundState,
    options: &TableOptions,
) -> Result<Vec<Cell>> {
    let signs: &[(f64, &str)] = if signed {
        &[(0.5, "+"), (-0.5, "-")]
    } else {
        &[(0.0, "")]
    };
    let mut points = Vec::new();
    let mut keys = Vec::new();
    for &(gamma, suffix) in signs {
        for col in columns {
            let template = template_for(family, col, gamma)?;
            keys.push((col.clone(), suffix));
            if options.simulate {
                points.push(SweepPoint {
                    template,
                    bracket: analytic_bracket(&template, ground)?,
                });
            }
        }
    }
    let results: Vec<_> = if options.simulate {
        sweep(
            &points,
            "p",
            options.tol,
            &options.params,
            ground,
            options.workers,
        )?
        .into_iter()
        .map(|r| r.threshold.ok())
        .collect()
    } else {
        vec![None; keys.len()]
    };
    let mut cells = Vec::new();
    for ((col, suffix), r) in keys.into_iter().zip(results) {
        cells.push((
            format!("p_s{suffix}"),
            col.clone(),
            r.as_ref().map(|r| r.p_scatter),
        ));
        cells.push((format!("p_b{suffix}"), col, r.as_ref().map(|r| r.p_blowup)));
    }
    Ok(cells)
}

/// Regenerate table `id` next to its reference values.
pub fn compute_table(id: TableId, ground: &GroundState, options: &TableOptions) -> Result<Table> {
    let columns = reference_columns(id);
    let rows = reference_rows(id);
    let mut computed: Vec<Cell> = Vec::new();
    match id.kind() {
        Kind::Coefficients => {
            for col in &columns {
                let (_, fam) = column_value(col)?;
                let family: Family = fam.parse()?;
                let c = coefficients(&Profile::default_for(family), ground)?;
                for (row, v) in [
                    ("positive_energy", c.positive_energy),
                    ("mass_gradient", c.mass_gradient),
                    ("mass_energy_low", c.mass_energy_low),
                    ("mass_energy_high", c.mass_energy_high),
                    ("hhalf", c.hhalf),
                    ("lushnikov", c.lushnikov),
                    ("adapted", c.adapted),
                ] {
                    computed.push((row.into(), col.clone(), Some(v)));
                }
            }
        }
        Kind::Roots(family, gamma, residual) => {
            let labels = if residual == Residual::MassEnergy {
                ["p1", "p2"]
            } else {
                ["p_b", "p_t"]
            };
            for col in &columns {
                let roots = residual_roots(&template_for(family, col, gamma)?, residual, ground)?;
                let (low, high) = match roots.len() {
                    0 => (None, None),
                    1 => (Some(roots[0]), None),
                    n => (Some(roots[0]), Some(roots[n - 1])),
                };
                computed.push((labels[0].into(), col.clone(), low));
                computed.push((labels[1].into(), col.clone(), high));
            }
        }
        Kind::Hhalf(family, gamma) => {
            for col in &columns {
                let (h, p) = hhalf_crossing(&template_for(family, col, gamma)?, ground)?;
                computed.push(("hhalf_per_p2".into(), col.clone(), Some(h)));
                computed.push(("p_half".into(), col.clone(), Some(p)));
            }
            if rows.iter().any(|r| r == "p_s") {
                computed.extend(simulated_cells(family, false, &columns, ground, options)?);
            }
        }
        Kind::Simulated { family, signed } => {
            computed.extend(simulated_cells(family, signed, &columns, ground, options)?);
        }
    }
    let mut cells = Vec::new();
    for row in &rows {
        for col in &columns {
            let c = computed
                .iter()
                .find(|(r, c, _)| r == row && c == col)
                .and_then(|x| x.2);
            cells.push(TableCell {
                row: row.clone(),
                column: col.clone(),
                computed: c,
                reference: reference_value(id.name(), row, col),
            });
        }
    }
    Ok(Table { id, cells })
}
