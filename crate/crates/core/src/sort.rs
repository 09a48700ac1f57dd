//! Semantic sorts and the static operation table.
//!
//! A sort says which of the three admissible models a value lives in: a plain
//! real (`Scalar`), an integer power of a family's difference unit (`Power`,
//! with `k = 1` the difference-vectors themselves), or a point of an affine
//! family (`Point`). The functions here decide the result sort of every
//! operation without looking at values; [`crate::quantity`] layers the
//! arithmetic on top and the language checker reuses them verbatim.

use std::fmt;

use crate::error::ErrorCode;
use crate::registry::FamilyId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Scalar,
    /// k-th power of the family's difference unit; `k != 0`.
    Power(FamilyId, i32),
    Point(FamilyId),
}

impl Sort {
    /// Builds `Power(family, k)`, collapsing `k == 0` to `Scalar`.
    pub fn power(family: FamilyId, k: i32) -> Sort {
        if k == 0 {
            Sort::Scalar
        } else {
            Sort::Power(family, k)
        }
    }

    pub fn difference(family: FamilyId) -> Sort {
        Sort::Power(family, 1)
    }

    pub fn family(&self) -> Option<FamilyId> {
        match *self {
            Sort::Scalar => None,
            Sort::Power(f, _) | Sort::Point(f) => Some(f),
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Sort::Point(_))
    }

    pub fn exponent(&self) -> Option<i32> {
        match *self {
            Sort::Power(_, k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Scalar => write!(f, "Scalar"),
            Sort::Power(fam, k) => write!(f, "Power({fam}, {k})"),
            Sort::Point(fam) => write!(f, "Point({fam})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub const ALL: [BinOp; 4] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A rule violation found by the sort table; `detail` explains the rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SortError {
    pub code: ErrorCode,
    pub detail: &'static str,
}

impl SortError {
    const fn new(code: ErrorCode, detail: &'static str) -> Self {
        SortError { code, detail }
    }
}

pub type SortResult = Result<Sort, SortError>;

/// Result sort of `a op b`.
///
/// Precedence when several rules are violated at once: point rules
/// (`E_POINT_RATIO`, `E_POINT_SUM`, `E_POINT_NEGATE`), then `E_FAMILY_MIX`,
/// then exponent and sort mismatches.
pub fn binary_sort(op: BinOp, a: Sort, b: Sort) -> SortResult {
    use Sort::*;

    let any_point = a.is_point() || b.is_point();
    match op {
        BinOp::Div if any_point => {
            return Err(SortError::new(
                ErrorCode::PointRatio,
                "points have no ratio; divide differences of points instead",
            ))
        }
        BinOp::Mul if any_point => {
            return Err(SortError::new(
                ErrorCode::PointSum,
                "points cannot be multiplied",
            ))
        }
        BinOp::Add if a.is_point() && b.is_point() => {
            return Err(SortError::new(
                ErrorCode::PointSum,
                "points cannot be added; use mix for affine combinations",
            ))
        }
        BinOp::Sub if b.is_point() && !a.is_point() => {
            return Err(SortError::new(
                ErrorCode::PointNegate,
                "subtracting a point from a non-point would negate the point",
            ))
        }
        _ => {}
    }

    if let (Some(fa), Some(fb)) = (a.family(), b.family()) {
        if fa != fb {
            return Err(SortError::new(
                ErrorCode::FamilyMix,
                "operands belong to different families",
            ));
        }
    }

    let mismatch = || SortError::new(ErrorCode::SortMismatch, "operand sorts do not match");
    let power_mismatch = || {
        SortError::new(
            ErrorCode::PowerMismatch,
            "powers of different degree cannot be added or subtracted",
        )
    };

    match (op, a, b) {
        (_, Scalar, Scalar) => Ok(Scalar),

        (BinOp::Add | BinOp::Sub, Power(f, k), Power(_, m)) => {
            if k == m {
                Ok(Power(f, k))
            } else {
                Err(power_mismatch())
            }
        }
        (BinOp::Add | BinOp::Sub, Point(f), Power(_, k)) => {
            if k == 1 {
                Ok(Point(f))
            } else {
                Err(power_mismatch())
            }
        }
        (BinOp::Add, Power(_, k), Point(f)) => {
            if k == 1 {
                Ok(Point(f))
            } else {
                Err(power_mismatch())
            }
        }
        (BinOp::Sub, Point(f), Point(_)) => Ok(Power(f, 1)),
        (BinOp::Add | BinOp::Sub, _, _) => Err(mismatch()),

        (BinOp::Mul, Power(f, k), Power(_, m)) => Ok(Sort::power(f, k + m)),
        (BinOp::Mul, Scalar, Power(f, k)) | (BinOp::Mul, Power(f, k), Scalar) => Ok(Power(f, k)),

        (BinOp::Div, Power(f, k), Power(_, m)) => Ok(Sort::power(f, k - m)),
        (BinOp::Div, Power(f, k), Scalar) => Ok(Power(f, k)),
        (BinOp::Div, Scalar, Power(f, k)) => Ok(Power(f, -k)),

        // every point pairing for * and / was rejected above
        (BinOp::Mul | BinOp::Div, _, _) => unreachable!("point operand reached product rules"),
    }
}

pub fn negate_sort(a: Sort) -> SortResult {
    match a {
        Sort::Point(_) => Err(SortError::new(
            ErrorCode::PointNegate,
            "an affine space has no origin to reflect through",
        )),
        s => Ok(s),
    }
}

pub fn power_sort(a: Sort, n: i32) -> SortResult {
    match a {
        Sort::Point(_) => Err(SortError::new(
            ErrorCode::PointPower,
            "points have no powers",
        )),
        Sort::Scalar => Ok(Sort::Scalar),
        Sort::Power(f, k) => k
            .checked_mul(n)
            .map(|e| Sort::power(f, e))
            .ok_or(SortError::new(ErrorCode::NonFinite, "exponent overflow")),
    }
}

pub fn sqrt_sort(a: Sort) -> SortResult {
    match a {
        Sort::Point(_) => Err(SortError::new(
            ErrorCode::PointPower,
            "points have no roots",
        )),
        Sort::Scalar => Ok(Sort::Scalar),
        Sort::Power(f, k) if k % 2 == 0 => Ok(Sort::power(f, k / 2)),
        Sort::Power(..) => Err(SortError::new(
            ErrorCode::OddPowerSqrt,
            "the root of an odd power has a fractional exponent",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: FamilyId = FamilyId(0);
    const G: FamilyId = FamilyId(1);

    #[test]
    fn ratio_of_differences_is_scalar() {
        assert_eq!(
            binary_sort(BinOp::Div, Sort::Power(F, 1), Sort::Power(F, 1)).unwrap(),
            Sort::Scalar
        );
    }

    #[test]
    fn point_rules() {
        let p = Sort::Point(F);
        assert_eq!(
            binary_sort(BinOp::Div, p, p).unwrap_err().code,
            ErrorCode::PointRatio
        );
        assert_eq!(binary_sort(BinOp::Sub, p, p).unwrap(), Sort::Power(F, 1));
        assert_eq!(
            binary_sort(BinOp::Add, p, p).unwrap_err().code,
            ErrorCode::PointSum
        );
        assert_eq!(
            binary_sort(BinOp::Mul, Sort::Scalar, p).unwrap_err().code,
            ErrorCode::PointSum
        );
        assert_eq!(binary_sort(BinOp::Add, Sort::Power(F, 1), p).unwrap(), p);
        assert_eq!(
            binary_sort(BinOp::Sub, Sort::Power(F, 1), p)
                .unwrap_err()
                .code,
            ErrorCode::PointNegate
        );
        assert_eq!(
            binary_sort(BinOp::Add, p, Sort::Power(F, 2))
                .unwrap_err()
                .code,
            ErrorCode::PowerMismatch
        );
    }

    #[test]
    fn exponents_add_and_cancel() {
        assert_eq!(
            binary_sort(BinOp::Mul, Sort::Power(F, 2), Sort::Power(F, -2)).unwrap(),
            Sort::Scalar
        );
        assert_eq!(
            binary_sort(BinOp::Div, Sort::Scalar, Sort::Power(F, 3)).unwrap(),
            Sort::Power(F, -3)
        );
    }

    #[test]
    fn families_do_not_mix() {
        assert_eq!(
            binary_sort(BinOp::Mul, Sort::Power(F, 1), Sort::Power(G, 1))
                .unwrap_err()
                .code,
            ErrorCode::FamilyMix
        );
    }

    #[test]
    fn unary_rules() {
        assert_eq!(
            negate_sort(Sort::Point(F)).unwrap_err().code,
            ErrorCode::PointNegate
        );
        assert_eq!(power_sort(Sort::Power(F, 2), 0).unwrap(), Sort::Scalar);
        assert_eq!(
            power_sort(Sort::Power(F, 1), -2).unwrap(),
            Sort::Power(F, -2)
        );
        assert_eq!(sqrt_sort(Sort::Power(F, -2)).unwrap(), Sort::Power(F, -1));
        assert_eq!(
            sqrt_sort(Sort::Power(F, 1)).unwrap_err().code,
            ErrorCode::OddPowerSqrt
        );
    }
}
