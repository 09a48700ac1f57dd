use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Stable error identifiers shared by the value algebra, the registry, the
/// language front end and the statistics engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorCode {
    // value algebra
    PointRatio,
    PointSum,
    PointNegate,
    PointPower,
    FamilyMix,
    PowerMismatch,
    SortMismatch,
    DivZero,
    OddPowerSqrt,
    NegativeSqrt,
    WeightSum,
    MixSort,
    NonFinite,
    SortKind,
    // registry
    DupFamily,
    DupScale,
    UnknownFamily,
    BadFactor,
    OffsetOnLinear,
    ScaleOnAbsolute,
    ScalarConvert,
    // language
    Syntax,
    UnboundName,
    UnknownScale,
    Rebind,
    AssertFailed,
    RawMode,
    // statistics
    CsvParse,
    NoColumn,
    RoleKind,
    StdZero,
    GeomeanDomain,
    UnknownStat,
    // oracle
    Eval,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 34] = [
        ErrorCode::PointRatio,
        ErrorCode::PointSum,
        ErrorCode::PointNegate,
        ErrorCode::PointPower,
        ErrorCode::FamilyMix,
        ErrorCode::PowerMismatch,
        ErrorCode::SortMismatch,
        ErrorCode::DivZero,
        ErrorCode::OddPowerSqrt,
        ErrorCode::NegativeSqrt,
        ErrorCode::WeightSum,
        ErrorCode::MixSort,
        ErrorCode::NonFinite,
        ErrorCode::SortKind,
        ErrorCode::DupFamily,
        ErrorCode::DupScale,
        ErrorCode::UnknownFamily,
        ErrorCode::BadFactor,
        ErrorCode::OffsetOnLinear,
        ErrorCode::ScaleOnAbsolute,
        ErrorCode::ScalarConvert,
        ErrorCode::Syntax,
        ErrorCode::UnboundName,
        ErrorCode::UnknownScale,
        ErrorCode::Rebind,
        ErrorCode::AssertFailed,
        ErrorCode::RawMode,
        ErrorCode::CsvParse,
        ErrorCode::NoColumn,
        ErrorCode::RoleKind,
        ErrorCode::StdZero,
        ErrorCode::GeomeanDomain,
        ErrorCode::UnknownStat,
        ErrorCode::Eval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::PointRatio => "E_POINT_RATIO",
            ErrorCode::PointSum => "E_POINT_SUM",
            ErrorCode::PointNegate => "E_POINT_NEGATE",
            ErrorCode::PointPower => "E_POINT_POWER",
            ErrorCode::FamilyMix => "E_FAMILY_MIX",
            ErrorCode::PowerMismatch => "E_POWER_MISMATCH",
            ErrorCode::SortMismatch => "E_SORT_MISMATCH",
            ErrorCode::DivZero => "E_DIV_ZERO",
            ErrorCode::OddPowerSqrt => "E_ODD_POWER_SQRT",
            ErrorCode::NegativeSqrt => "E_NEGATIVE_SQRT",
            ErrorCode::WeightSum => "E_WEIGHT_SUM",
            ErrorCode::MixSort => "E_MIX_SORT",
            ErrorCode::NonFinite => "E_NON_FINITE",
            ErrorCode::SortKind => "E_SORT_KIND",
            ErrorCode::DupFamily => "E_DUP_FAMILY",
            ErrorCode::DupScale => "E_DUP_SCALE",
            ErrorCode::UnknownFamily => "E_UNKNOWN_FAMILY",
            ErrorCode::BadFactor => "E_BAD_FACTOR",
            ErrorCode::OffsetOnLinear => "E_OFFSET_ON_LINEAR",
            ErrorCode::ScaleOnAbsolute => "E_SCALE_ON_ABSOLUTE",
            ErrorCode::ScalarConvert => "E_SCALAR_CONVERT",
            ErrorCode::Syntax => "E_SYNTAX",
            ErrorCode::UnboundName => "E_UNBOUND_NAME",
            ErrorCode::UnknownScale => "E_UNKNOWN_SCALE",
            ErrorCode::Rebind => "E_REBIND",
            ErrorCode::AssertFailed => "E_ASSERT_FAILED",
            ErrorCode::RawMode => "W_RAW_MODE",
            ErrorCode::CsvParse => "E_CSV_PARSE",
            ErrorCode::NoColumn => "E_NO_COLUMN",
            ErrorCode::RoleKind => "E_ROLE_KIND",
            ErrorCode::StdZero => "E_STD_ZERO",
            ErrorCode::GeomeanDomain => "E_GEOMEAN_DOMAIN",
            ErrorCode::UnknownStat => "E_UNKNOWN_STAT",
            ErrorCode::Eval => "E_EVAL",
        }
    }

    /// Errors that reflect an ill-sorted operation rather than a bad value
    /// (division by zero, weights, overflow) or a front-end problem.
    pub fn is_sort_error(self) -> bool {
        matches!(
            self,
            ErrorCode::PointRatio
                | ErrorCode::PointSum
                | ErrorCode::PointNegate
                | ErrorCode::PointPower
                | ErrorCode::FamilyMix
                | ErrorCode::PowerMismatch
                | ErrorCode::SortMismatch
                | ErrorCode::OddPowerSqrt
                | ErrorCode::MixSort
                | ErrorCode::SortKind
        )
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ErrorCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{code}: {message}")]
pub struct MeasureError {
    pub code: ErrorCode,
    pub message: String,
}

impl MeasureError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        MeasureError {
            code,
            message: message.into(),
        }
    }
}

pub type Result<T, E = MeasureError> = std::result::Result<T, E>;
