//! Admissible statistics over one CSV column of readings.
//!
//! Every statistic is computed through the value algebra, so a statistic that
//! would need an undefined operation on the column's sort is refused with the
//! code that operation raises. Variance is the sample variance (divisor
//! `n - 1`).

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{ErrorCode, MeasureError, Result};
use crate::lang::output::SortJson;
use crate::quantity::{self, Quantity};
use crate::registry::{FamilyId, FamilyKind, Registry, ScaleId};
use crate::sort::{self, BinOp, Sort};

/// The fixed catalog, in report order.
pub const CATALOG: [&str; 12] = [
    "count", "mean", "median", "min", "max", "range", "variance", "std", "cv", "geomean", "sum",
    "zscores",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Point,
    Difference,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Point => "point",
            Role::Difference => "difference",
        }
    }
}

impl FromStr for Role {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(Role::Point),
            "difference" => Ok(Role::Difference),
            _ => Err(MeasureError::new(
                ErrorCode::RoleKind,
                format!("unknown role `{s}` (expected point or difference)"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub family: FamilyId,
    pub scale: ScaleId,
    pub role: Role,
    pub values: Vec<f64>,
}

impl Column {
    /// Validates a column built in memory.
    pub fn new(
        registry: &Registry,
        name: &str,
        scale: ScaleId,
        role: Role,
        values: Vec<f64>,
    ) -> Result<Column> {
        let family = registry.scale(scale).family;
        let fam = registry.family(family);
        if role == Role::Point && fam.kind != FamilyKind::Affine {
            return Err(MeasureError::new(
                ErrorCode::RoleKind,
                format!("{} family `{}` has no points", fam.kind, fam.name),
            ));
        }
        if values.is_empty() {
            return Err(MeasureError::new(
                ErrorCode::CsvParse,
                "column has no values",
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(MeasureError::new(
                ErrorCode::NonFinite,
                format!("value {bad} is not finite"),
            ));
        }
        Ok(Column {
            name: name.to_string(),
            family,
            scale,
            role,
            values,
        })
    }

    /// Sort of one reading.
    pub fn element_sort(&self, registry: &Registry) -> Sort {
        match (registry.family(self.family).kind, self.role) {
            (FamilyKind::Absolute, _) => Sort::Scalar,
            (_, Role::Point) => Sort::Point(self.family),
            (_, Role::Difference) => Sort::Power(self.family, 1),
        }
    }

    pub fn quantities(&self, registry: &Registry) -> Result<Vec<Quantity>> {
        let sort = self.element_sort(registry);
        let scale = sort.family().map(|_| self.scale);
        self.values
            .iter()
            .map(|&v| Quantity::new(registry, v, sort, scale))
            .collect()
    }
}

/// Reads column `column` of a headed CSV text. Row numbers in errors are
/// file line numbers, the header being line 1.
pub fn load_column(
    registry: &Registry,
    csv_text: &str,
    column: &str,
    family: &str,
    scale: &str,
    role: Role,
) -> Result<Column> {
    let fid = registry.family_id(family).ok_or_else(|| {
        MeasureError::new(
            ErrorCode::UnknownFamily,
            format!("unknown family `{family}`"),
        )
    })?;
    let sid = registry.scale_id(scale).ok_or_else(|| {
        MeasureError::new(ErrorCode::UnknownScale, format!("unknown scale `{scale}`"))
    })?;
    if registry.scale(sid).family != fid {
        return Err(MeasureError::new(
            ErrorCode::FamilyMix,
            format!("scale `{scale}` does not belong to family `{family}`"),
        ));
    }
    let csv_err = |e: csv::Error| MeasureError::new(ErrorCode::CsvParse, e.to_string());
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let index = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| MeasureError::new(ErrorCode::NoColumn, format!("no column `{column}`")))?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let row = record.position().map_or(0, |p| p.line());
        let cell = record.get(index).unwrap_or("");
        let value = cell
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                MeasureError::new(
                    ErrorCode::CsvParse,
                    format!("row {row}: `{cell}` is not a decimal number"),
                )
            })?;
        values.push(value);
    }
    Column::new(registry, column, sid, role, values).map_err(|e| match e.code {
        ErrorCode::NonFinite => MeasureError::new(ErrorCode::CsvParse, e.message),
        _ => e,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum StatValue {
    One(Quantity),
    Many(Vec<Quantity>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refusal {
    pub code: ErrorCode,
    pub message: String,
    pub cite: &'static str,
}

pub type Outcome = std::result::Result<StatValue, Refusal>;

/// Short statement of the rule behind a refusal code.
pub fn cite(code: ErrorCode) -> &'static str {
    match code {
        ErrorCode::PointRatio => "points have no ratio; only their differences can be divided",
        ErrorCode::PointSum => {
            "points cannot be added or multiplied; only affine combinations are defined"
        }
        ErrorCode::StdZero => "standardizing needs a nonzero standard deviation",
        ErrorCode::GeomeanDomain => "geometric mean needs strictly positive values",
        ErrorCode::DivZero => "sample variance needs at least two values",
        _ => "operation undefined for the column's sort",
    }
}

fn refuse(e: MeasureError) -> Refusal {
    Refusal {
        code: e.code,
        cite: cite(e.code),
        message: e.message,
    }
}

struct Calc<'a> {
    registry: &'a Registry,
    xs: Vec<Quantity>,
    /// Readings on the reference scale, ascending.
    sorted: Vec<Quantity>,
}

impl Calc<'_> {
    fn bin(&self, op: BinOp, a: &Quantity, b: &Quantity) -> Result<Quantity> {
        quantity::apply_binary(self.registry, op, a, b)
    }

    fn n(&self) -> Quantity {
        Quantity::scalar(self.xs.len() as f64)
    }

    fn sum(&self) -> Result<Quantity> {
        let mut acc = self.xs[0];
        for x in &self.xs[1..] {
            acc = self.bin(BinOp::Add, &acc, x)?;
        }
        // a single reading is not a sum; the sort rule still applies
        if self.xs.len() == 1 {
            sort::binary_sort(BinOp::Add, acc.sort, acc.sort).map_err(|e| {
                MeasureError::new(
                    e.code,
                    format!("sum of {}: {}", self.registry.describe(acc.sort), e.detail),
                )
            })?;
        }
        self.registry.to_reference(&acc)
    }

    fn mean(&self) -> Result<Quantity> {
        match self.xs[0].sort {
            Sort::Point(_) => {
                let w = vec![1.0 / self.xs.len() as f64; self.xs.len()];
                quantity::mix(self.registry, &w, &self.xs)
            }
            _ => self.bin(BinOp::Div, &self.sum()?, &self.n()),
        }
    }

    fn midpoint(&self, a: &Quantity, b: &Quantity) -> Result<Quantity> {
        match a.sort {
            Sort::Point(_) => quantity::mix(self.registry, &[0.5, 0.5], &[*a, *b]),
            _ => self.bin(
                BinOp::Div,
                &self.bin(BinOp::Add, a, b)?,
                &Quantity::scalar(2.0),
            ),
        }
    }

    fn median(&self) -> Result<Quantity> {
        let n = self.sorted.len();
        if n % 2 == 1 {
            Ok(self.sorted[n / 2])
        } else {
            self.midpoint(&self.sorted[n / 2 - 1], &self.sorted[n / 2])
        }
    }

    fn range(&self) -> Result<Quantity> {
        self.bin(
            BinOp::Sub,
            &self.sorted[self.sorted.len() - 1],
            &self.sorted[0],
        )
    }

    fn variance(&self) -> Result<Quantity> {
        let mean = self.mean()?;
        let mut acc: Option<Quantity> = None;
        for x in &self.xs {
            let d = self.bin(BinOp::Sub, x, &mean)?;
            let sq = quantity::power_int(self.registry, &d, 2)?;
            acc = Some(match acc {
                None => sq,
                Some(a) => self.bin(BinOp::Add, &a, &sq)?,
            });
        }
        let dof = Quantity::scalar(self.xs.len() as f64 - 1.0);
        self.bin(BinOp::Div, &acc.expect("nonempty column"), &dof)
    }

    fn std(&self) -> Result<Quantity> {
        quantity::sqrt_even_power(self.registry, &self.variance()?)
    }

    /// Standard deviation for use as a divisor.
    fn nonzero_std(&self) -> Result<Quantity> {
        match self.std() {
            Ok(s) if s.value != 0.0 => Ok(s),
            _ => Err(MeasureError::new(
                ErrorCode::StdZero,
                "standard deviation is zero or undefined",
            )),
        }
    }

    fn cv(&self) -> Result<Quantity> {
        let mean = self.mean()?;
        let spread = sort::binary_sort(BinOp::Sub, self.xs[0].sort, self.xs[0].sort)
            .expect("readings of one sort always subtract");
        // the sort rule is checked before the data-dependent ones
        sort::binary_sort(BinOp::Div, spread, mean.sort).map_err(|e| {
            MeasureError::new(
                e.code,
                format!(
                    "std / mean is {} / {}: {}",
                    self.registry.describe(spread),
                    self.registry.describe(mean.sort),
                    e.detail
                ),
            )
        })?;
        let std = self.nonzero_std()?;
        self.bin(BinOp::Div, &std, &mean)
    }

    fn geomean(&self) -> Result<Quantity> {
        let first = self.xs[0].sort;
        let mut product = first;
        for _ in 1..self.xs.len().max(2) {
            product = sort::binary_sort(BinOp::Mul, product, first).map_err(|e| {
                MeasureError::new(
                    e.code,
                    format!("product of {}: {}", self.registry.describe(first), e.detail),
                )
            })?;
        }
        if let Some(bad) = self.sorted.iter().find(|x| x.value <= 0.0) {
            return Err(MeasureError::new(
                ErrorCode::GeomeanDomain,
                format!("value {} is not positive", bad.value),
            ));
        }
        let mean_log = self.sorted.iter().map(|x| x.value.ln()).sum::<f64>() / self.xs.len() as f64;
        let scale = first.family().map(|f| self.registry.reference_scale(f));
        Quantity::new(self.registry, mean_log.exp(), first, scale)
    }

    fn zscores(&self) -> Result<Vec<Quantity>> {
        let std = self.nonzero_std()?;
        let mean = self.mean()?;
        self.xs
            .iter()
            .map(|x| self.bin(BinOp::Div, &self.bin(BinOp::Sub, x, &mean)?, &std))
            .collect()
    }
}

fn calc<'a>(registry: &'a Registry, column: &Column) -> Result<Calc<'a>> {
    let xs = column.quantities(registry)?;
    let mut sorted = xs
        .iter()
        .map(|x| registry.to_reference(x))
        .collect::<Result<Vec<_>>>()?;
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(Calc {
        registry,
        xs,
        sorted,
    })
}

/// Re-expresses a reference-scale result on the column's scale.
fn on_column_scale(registry: &Registry, column: &Column, q: Quantity) -> Result<Quantity> {
    match q.sort.family() {
        Some(_) => registry.convert(&q, column.scale),
        None => Ok(q),
    }
}

pub fn compute_stat(registry: &Registry, column: &Column, name: &str) -> Result<Outcome> {
    let c = calc(registry, column)?;
    let one = |r: Result<Quantity>| -> Outcome {
        r.and_then(|q| on_column_scale(registry, column, q))
            .map(StatValue::One)
            .map_err(refuse)
    };
    Ok(match name {
        "count" => Ok(StatValue::One(c.n())),
        "mean" => one(c.mean()),
        "median" => one(c.median()),
        "min" => one(Ok(c.sorted[0])),
        "max" => one(Ok(c.sorted[c.sorted.len() - 1])),
        "range" => one(c.range()),
        "variance" => one(c.variance()),
        "std" => one(c.std()),
        "cv" => one(c.cv()),
        "geomean" => one(c.geomean()),
        "sum" => one(c.sum()),
        "zscores" => c.zscores().map(StatValue::Many).map_err(refuse),
        _ => {
            return Err(MeasureError::new(
                ErrorCode::UnknownStat,
                format!("unknown statistic `{name}`"),
            ))
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatReport {
    pub column: Column,
    pub entries: Vec<(&'static str, Outcome)>,
}

impl StatReport {
    pub fn get(&self, name: &str) -> Option<&Outcome> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, o)| o)
    }

    pub fn refusals(&self) -> impl Iterator<Item = (&'static str, &Refusal)> {
        self.entries
            .iter()
            .filter_map(|(n, o)| o.as_ref().err().map(|r| (*n, r)))
    }
}

pub fn report(registry: &Registry, column: &Column) -> Result<StatReport> {
    let entries = CATALOG
        .iter()
        .map(|&name| Ok((name, compute_stat(registry, column, name)?)))
        .collect::<Result<_>>()?;
    Ok(StatReport {
        column: column.clone(),
        entries,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum ValueJson {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct StatJson {
    pub name: &'static str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sort: Option<SortJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<ValueJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<ErrorCode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cite: Option<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportJson {
    pub column: String,
    pub family: String,
    pub scale: String,
    pub role: Role,
    pub stats: Vec<StatJson>,
}

impl ReportJson {
    pub fn new(registry: &Registry, report: &StatReport) -> Self {
        let col = &report.column;
        let stats = report
            .entries
            .iter()
            .map(|(name, outcome)| match outcome {
                Ok(v) => {
                    let (sort, value, scale) = match v {
                        StatValue::One(q) => (q.sort, ValueJson::One(q.value), q.scale),
                        StatValue::Many(qs) => (
                            Sort::Scalar,
                            ValueJson::Many(qs.iter().map(|q| q.value).collect()),
                            None,
                        ),
                    };
                    StatJson {
                        name,
                        status: "ok",
                        sort: Some(SortJson::new(registry, sort)),
                        value: Some(value),
                        scale: scale.map(|s| registry.scale(s).name.clone()),
                        code: None,
                        cite: None,
                    }
                }
                Err(r) => StatJson {
                    name,
                    status: "refused",
                    sort: None,
                    value: None,
                    scale: None,
                    code: Some(r.code),
                    cite: Some(r.cite),
                },
            })
            .collect();
        ReportJson {
            column: col.name.clone(),
            family: registry.family(col.family).name.clone(),
            scale: registry.scale(col.scale).name.clone(),
            role: col.role,
            stats,
        }
    }
}

/// Plain-text table of a report.
pub fn render_report(registry: &Registry, report: &StatReport) -> String {
    let col = &report.column;
    let mut out = format!(
        "column {} ({} {} on {}, n = {}; variance uses n−1)\n",
        col.name,
        registry.family(col.family).name,
        col.role.as_str(),
        registry.scale(col.scale).name,
        col.values.len()
    );
    for (name, outcome) in &report.entries {
        let cell = match outcome {
            Ok(StatValue::One(q)) => format!("{}  [{}]", q.value, registry.describe(q.sort)),
            Ok(StatValue::Many(qs)) => {
                let vals: Vec<String> = qs.iter().map(|q| q.value.to_string()).collect();
                let sort = qs.first().map_or(Sort::Scalar, |q| q.sort);
                format!("[{}]  [{}]", vals.join(", "), registry.describe(sort))
            }
            Err(r) => format!("refused {}: {}", r.code, r.cite),
        };
        let _ = writeln!(out, "  {name:<9} {cell}");
    }
    out
}
