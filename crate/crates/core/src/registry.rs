//! Families, named scales and conversions between them.
//!
//! A scale is an `(offset, factor)` pair relative to its family's reference
//! scale: a point reading `x` corresponds to the reference reading
//! `offset + factor * x`, and a `Power(_, k)` reading is multiplied by
//! `factor^k`. Scale changes are [`Transformation`]s; they act on quantities
//! but never take part in the value algebra.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{ErrorCode, MeasureError, Result};
use crate::numfmt::sig17;
use crate::quantity::Quantity;
use crate::sort::Sort;
use crate::transform::Transformation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaleId(pub u32);

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// No absolute zero: points, differences and their powers.
    Affine,
    /// Absolute zero, arbitrary unit: differences and their powers only.
    Linear,
    /// Absolute zero and unit: plain scalars.
    Absolute,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Affine => "affine",
            FamilyKind::Linear => "linear",
            FamilyKind::Absolute => "absolute",
        }
    }

    pub fn admits_points(self) -> bool {
        self == FamilyKind::Affine
    }

    pub fn admits_powers(self) -> bool {
        self != FamilyKind::Absolute
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "affine" => Ok(FamilyKind::Affine),
            "linear" => Ok(FamilyKind::Linear),
            "absolute" => Ok(FamilyKind::Absolute),
            other => Err(format!("unknown family kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub name: String,
    pub kind: FamilyKind,
    /// Whose property is being measured, for subjective families.
    pub owner: Option<String>,
    pub reference: ScaleId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scale {
    pub name: String,
    pub family: FamilyId,
    pub offset: f64,
    pub factor: f64,
}

impl Scale {
    /// The map from readings on this scale to reference readings.
    pub fn to_reference(&self) -> Transformation {
        Transformation::unchecked(self.family, self.offset, self.factor)
    }
}

/// Append-only registry of families and scales.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    families: Vec<Family>,
    scales: Vec<Scale>,
    family_names: HashMap<String, FamilyId>,
    scale_names: HashMap<String, ScaleId>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a family together with its reference scale `<name>.ref`.
    pub fn register_family(
        &mut self,
        name: &str,
        kind: FamilyKind,
        owner: Option<&str>,
    ) -> Result<FamilyId> {
        if self.family_names.contains_key(name) {
            return Err(MeasureError::new(
                ErrorCode::DupFamily,
                format!("family `{name}` is already registered"),
            ));
        }
        let ref_name = format!("{name}.ref");
        if self.scale_names.contains_key(&ref_name) {
            return Err(MeasureError::new(
                ErrorCode::DupScale,
                format!("scale `{ref_name}` is already registered"),
            ));
        }
        let id = FamilyId(self.families.len() as u32);
        let reference = ScaleId(self.scales.len() as u32);
        self.scales.push(Scale {
            name: ref_name.clone(),
            family: id,
            offset: 0.0,
            factor: 1.0,
        });
        self.scale_names.insert(ref_name, reference);
        self.families.push(Family {
            name: name.to_string(),
            kind,
            owner: owner.map(str::to_string),
            reference,
        });
        self.family_names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn register_scale(
        &mut self,
        name: &str,
        family: FamilyId,
        offset: f64,
        factor: f64,
    ) -> Result<ScaleId> {
        let fam = self.family(family);
        if fam.kind == FamilyKind::Absolute {
            return Err(MeasureError::new(
                ErrorCode::ScaleOnAbsolute,
                format!("absolute family `{}` admits no named scales", fam.name),
            ));
        }
        if !(factor.is_finite() && factor > 0.0) {
            return Err(MeasureError::new(
                ErrorCode::BadFactor,
                format!("scale factor must be positive and finite, got {factor}"),
            ));
        }
        if !offset.is_finite() {
            return Err(MeasureError::new(
                ErrorCode::NonFinite,
                format!("scale offset must be finite, got {offset}"),
            ));
        }
        if fam.kind == FamilyKind::Linear && offset != 0.0 {
            return Err(MeasureError::new(
                ErrorCode::OffsetOnLinear,
                format!(
                    "linear family `{}` has a fixed zero; offset must be 0, got {offset}",
                    fam.name
                ),
            ));
        }
        if self.scale_names.contains_key(name) {
            return Err(MeasureError::new(
                ErrorCode::DupScale,
                format!("scale `{name}` is already registered"),
            ));
        }
        let id = ScaleId(self.scales.len() as u32);
        self.scales.push(Scale {
            name: name.to_string(),
            family,
            offset,
            factor,
        });
        self.scale_names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn family(&self, id: FamilyId) -> &Family {
        &self.families[id.0 as usize]
    }

    pub fn scale(&self, id: ScaleId) -> &Scale {
        &self.scales[id.0 as usize]
    }

    pub fn family_id(&self, name: &str) -> Option<FamilyId> {
        self.family_names.get(name).copied()
    }

    pub fn scale_id(&self, name: &str) -> Option<ScaleId> {
        self.scale_names.get(name).copied()
    }

    pub fn reference_scale(&self, family: FamilyId) -> ScaleId {
        self.family(family).reference
    }

    pub fn families(&self) -> impl Iterator<Item = (FamilyId, &Family)> {
        self.families
            .iter()
            .enumerate()
            .map(|(i, f)| (FamilyId(i as u32), f))
    }

    pub fn scales(&self) -> impl Iterator<Item = (ScaleId, &Scale)> {
        self.scales
            .iter()
            .enumerate()
            .map(|(i, s)| (ScaleId(i as u32), s))
    }

    pub fn scales_of(&self, family: FamilyId) -> impl Iterator<Item = ScaleId> + '_ {
        self.scales()
            .filter(move |(_, s)| s.family == family)
            .map(|(id, _)| id)
    }

    pub fn family_count(&self) -> usize {
        self.families.len()
    }

    /// Human-readable sort with family names substituted.
    pub fn describe(&self, sort: Sort) -> String {
        match sort {
            Sort::Scalar => "Scalar".to_string(),
            Sort::Power(f, k) => format!("Power({}, {k})", self.family(f).name),
            Sort::Point(f) => format!("Point({})", self.family(f).name),
        }
    }

    /// Checks that `sort` may exist given its family's kind.
    pub fn validate_sort(&self, sort: Sort) -> Result<()> {
        match sort {
            Sort::Scalar => Ok(()),
            Sort::Point(f) if !self.family(f).kind.admits_points() => Err(MeasureError::new(
                ErrorCode::SortKind,
                format!(
                    "{} family `{}` has no points",
                    self.family(f).kind,
                    self.family(f).name
                ),
            )),
            Sort::Power(f, _) if !self.family(f).kind.admits_powers() => Err(MeasureError::new(
                ErrorCode::SortKind,
                format!("absolute family `{}` has only scalars", self.family(f).name),
            )),
            Sort::Power(_, 0) => Err(MeasureError::new(
                ErrorCode::SortKind,
                "Power with exponent 0 must be a Scalar",
            )),
            _ => Ok(()),
        }
    }

    /// Re-expresses `a` on scale `target` of the same family.
    pub fn convert(&self, a: &Quantity, target: ScaleId) -> Result<Quantity> {
        let Some(family) = a.sort.family() else {
            return Err(MeasureError::new(
                ErrorCode::ScalarConvert,
                "scalars have no scale to convert",
            ));
        };
        let to = self.scale(target);
        if to.family != family {
            return Err(MeasureError::new(
                ErrorCode::FamilyMix,
                format!(
                    "cannot convert {} to scale `{}` of family `{}`",
                    self.describe(a.sort),
                    to.name,
                    self.family(to.family).name
                ),
            ));
        }
        let from = self.scale(a.scale.expect("family-bearing quantity has a scale"));
        let value = match a.sort {
            Sort::Point(_) => ((from.offset - to.offset) + from.factor * a.value) / to.factor,
            Sort::Power(_, k) => (from.factor / to.factor).powi(k) * a.value,
            Sort::Scalar => unreachable!(),
        };
        Quantity::checked(value, a.sort, Some(target))
    }

    pub fn to_reference(&self, a: &Quantity) -> Result<Quantity> {
        match a.sort.family() {
            None => Ok(*a),
            Some(f) => self.convert(a, self.reference_scale(f)),
        }
    }

    /// The admissible transformation taking readings on `from` to readings on
    /// `to`.
    pub fn conversion(&self, from: ScaleId, to: ScaleId) -> Result<Transformation> {
        let (s, t) = (self.scale(from), self.scale(to));
        if s.family != t.family {
            return Err(MeasureError::new(
                ErrorCode::FamilyMix,
                format!(
                    "scales `{}` and `{}` measure different families",
                    s.name, t.name
                ),
            ));
        }
        t.to_reference().invert().compose(&s.to_reference())
    }

    /// Validated transformation for `family`, honouring its kind.
    pub fn transformation(&self, family: FamilyId, p: f64, q: f64) -> Result<Transformation> {
        let kind = self.family(family).kind;
        if !(q.is_finite() && q > 0.0) {
            return Err(MeasureError::new(
                ErrorCode::BadFactor,
                format!("transformation factor must be positive, got {q}"),
            ));
        }
        if !p.is_finite() {
            return Err(MeasureError::new(
                ErrorCode::NonFinite,
                "offset must be finite",
            ));
        }
        match kind {
            FamilyKind::Linear if p != 0.0 => Err(MeasureError::new(
                ErrorCode::OffsetOnLinear,
                "linear transformations fix zero",
            )),
            FamilyKind::Absolute if p != 0.0 || q != 1.0 => Err(MeasureError::new(
                ErrorCode::ScaleOnAbsolute,
                "absolute families admit only the identity",
            )),
            _ => Ok(Transformation::unchecked(family, p, q)),
        }
    }

    pub fn export(&self) -> RegistryExport {
        RegistryExport {
            families: self
                .families
                .iter()
                .map(|f| FamilyExport {
                    name: f.name.clone(),
                    kind: f.kind,
                    owner: f.owner.clone(),
                })
                .collect(),
            scales: self
                .scales
                .iter()
                .map(|s| ScaleExport {
                    name: s.name.clone(),
                    family: self.family(s.family).name.clone(),
                    offset: sig17(s.offset),
                    factor: sig17(s.factor),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegistryExport {
    pub families: Vec<FamilyExport>,
    pub scales: Vec<ScaleExport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyExport {
    pub name: String,
    pub kind: FamilyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub owner: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleExport {
    pub name: String,
    pub family: String,
    pub offset: String,
    pub factor: String,
}
