//! Quantities and the value algebra on scale values for a fixed scale.
//!
//! Every operation first rewrites its family-bearing operands to the family's
//! reference scale, dispatches on sorts via [`crate::sort`], and returns its
//! result on the reference scale.

use crate::error::{ErrorCode, MeasureError, Result};
use crate::registry::{Registry, ScaleId};
use crate::sort::{self, BinOp, Sort, SortError};

/// Tolerance on `|Σ weights - 1|` accepted by [`mix`].
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub sort: Sort,
    /// Present iff `sort` carries a family.
    pub scale: Option<ScaleId>,
}

impl Quantity {
    pub fn scalar(value: f64) -> Quantity {
        Quantity {
            value,
            sort: Sort::Scalar,
            scale: None,
        }
    }

    /// Finite-value check only; callers are responsible for the scale tag.
    pub(crate) fn checked(value: f64, sort: Sort, scale: Option<ScaleId>) -> Result<Quantity> {
        if !value.is_finite() {
            return Err(MeasureError::new(
                ErrorCode::NonFinite,
                format!("result {value} is not a finite real"),
            ));
        }
        Ok(Quantity { value, sort, scale })
    }

    /// A quantity of `sort` read on `scale`, validated against the registry.
    pub fn new(
        registry: &Registry,
        value: f64,
        sort: Sort,
        scale: Option<ScaleId>,
    ) -> Result<Quantity> {
        registry.validate_sort(sort)?;
        match (sort.family(), scale) {
            (None, None) => {}
            (Some(f), Some(s)) if registry.scale(s).family == f => {}
            (None, Some(_)) => {
                return Err(MeasureError::new(
                    ErrorCode::ScalarConvert,
                    "scalars carry no scale",
                ))
            }
            (Some(_), _) => {
                return Err(MeasureError::new(
                    ErrorCode::FamilyMix,
                    format!(
                        "{} needs a scale of its own family",
                        registry.describe(sort)
                    ),
                ))
            }
        }
        Quantity::checked(value, sort, scale)
    }

    pub fn point(registry: &Registry, value: f64, scale: ScaleId) -> Result<Quantity> {
        let f = registry.scale(scale).family;
        Quantity::new(registry, value, Sort::Point(f), Some(scale))
    }

    pub fn difference(registry: &Registry, value: f64, scale: ScaleId) -> Result<Quantity> {
        Quantity::power(registry, value, 1, scale)
    }

    pub fn power(registry: &Registry, value: f64, k: i32, scale: ScaleId) -> Result<Quantity> {
        let f = registry.scale(scale).family;
        let sort = Sort::power(f, k);
        let scale = sort.family().map(|_| scale);
        Quantity::new(registry, value, sort, scale)
    }

    fn on_reference(registry: &Registry, value: f64, sort: Sort) -> Result<Quantity> {
        let scale = sort.family().map(|f| registry.reference_scale(f));
        Quantity::checked(value, sort, scale)
    }
}

/// `a op b` on the reference scale.
pub fn apply_binary(
    registry: &Registry,
    op: BinOp,
    a: &Quantity,
    b: &Quantity,
) -> Result<Quantity> {
    let sort = sort::binary_sort(op, a.sort, b.sort).map_err(|e| {
        MeasureError::new(
            e.code,
            format!(
                "{} {op} {}: {}",
                registry.describe(a.sort),
                registry.describe(b.sort),
                e.detail
            ),
        )
    })?;
    let a = registry.to_reference(a)?;
    let b = registry.to_reference(b)?;
    if op == BinOp::Div && b.value == 0.0 {
        return Err(MeasureError::new(ErrorCode::DivZero, "division by zero"));
    }
    Quantity::on_reference(registry, op.apply(a.value, b.value), sort)
}

fn unary_error(registry: &Registry, what: &str, a: &Quantity, e: SortError) -> MeasureError {
    MeasureError::new(
        e.code,
        format!("{what} {}: {}", registry.describe(a.sort), e.detail),
    )
}

pub fn negate(registry: &Registry, a: &Quantity) -> Result<Quantity> {
    let sort =
        sort::negate_sort(a.sort).map_err(|e| unary_error(registry, "cannot negate", a, e))?;
    let a = registry.to_reference(a)?;
    Quantity::on_reference(registry, -a.value, sort)
}

/// `a^n` for integer `n`.
pub fn power_int(registry: &Registry, a: &Quantity, n: i32) -> Result<Quantity> {
    let sort = sort::power_sort(a.sort, n)
        .map_err(|e| unary_error(registry, "cannot raise to a power:", a, e))?;
    let a = registry.to_reference(a)?;
    if n < 0 && a.value == 0.0 {
        return Err(MeasureError::new(
            ErrorCode::DivZero,
            "negative power of zero",
        ));
    }
    Quantity::on_reference(registry, a.value.powi(n), sort)
}

/// Square root of a scalar or an even power.
pub fn sqrt_even_power(registry: &Registry, a: &Quantity) -> Result<Quantity> {
    let sort =
        sort::sqrt_sort(a.sort).map_err(|e| unary_error(registry, "no square root of", a, e))?;
    let a = registry.to_reference(a)?;
    if a.value < 0.0 {
        return Err(MeasureError::new(
            ErrorCode::NegativeSqrt,
            format!("square root of negative value {}", a.value),
        ));
    }
    Quantity::on_reference(registry, a.value.sqrt(), sort)
}

/// Affine combination `Σ wᵢ·xᵢ` of points of one family, weights summing to 1.
pub fn mix(registry: &Registry, weights: &[f64], points: &[Quantity]) -> Result<Quantity> {
    if weights.is_empty() || weights.len() != points.len() {
        return Err(MeasureError::new(
            ErrorCode::MixSort,
            format!(
                "mix needs equal, nonempty weight and point lists (got {} and {})",
                weights.len(),
                points.len()
            ),
        ));
    }
    let sort = points[0].sort;
    let Sort::Point(_) = sort else {
        return Err(MeasureError::new(
            ErrorCode::MixSort,
            format!("mix operand {} is not a point", registry.describe(sort)),
        ));
    };
    if let Some(bad) = points.iter().find(|q| q.sort != sort) {
        return Err(MeasureError::new(
            ErrorCode::MixSort,
            format!(
                "mix operand {} is not a {}",
                registry.describe(bad.sort),
                registry.describe(sort)
            ),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(MeasureError::new(
            ErrorCode::WeightSum,
            format!("mix weights sum to {total}, not 1"),
        ));
    }
    let mut acc = 0.0;
    for (w, q) in weights.iter().zip(points) {
        acc += w * registry.to_reference(q)?.value;
    }
    Quantity::on_reference(registry, acc, sort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{FamilyKind, ScaleId};

    struct Temps {
        reg: Registry,
        c: ScaleId,
        f: ScaleId,
    }

    fn temps() -> Temps {
        let mut reg = Registry::new();
        let t = reg
            .register_family("temperature", FamilyKind::Affine, None)
            .unwrap();
        let c = reg.register_scale("C", t, 0.0, 1.0).unwrap();
        let f = reg.register_scale("F", t, -160.0 / 9.0, 5.0 / 9.0).unwrap();
        Temps { reg, c, f }
    }

    #[test]
    fn point_difference_across_scales() {
        let Temps { reg, c, f } = temps();
        let a = Quantity::point(&reg, 20.0, c).unwrap();
        let b = Quantity::point(&reg, 68.0, f).unwrap();
        let d = apply_binary(&reg, BinOp::Sub, &a, &b).unwrap();
        assert!(matches!(d.sort, Sort::Power(_, 1)));
        assert!(d.value.abs() < 1e-12);
        assert_eq!(reg.scale(d.scale.unwrap()).name, "temperature.ref");
    }

    #[test]
    fn difference_ratio_and_product() {
        let Temps { reg, c, .. } = temps();
        let two = Quantity::difference(&reg, 2.0, c).unwrap();
        let four = Quantity::difference(&reg, 4.0, c).unwrap();
        let r = apply_binary(&reg, BinOp::Div, &two, &four).unwrap();
        assert_eq!((r.sort, r.value), (Sort::Scalar, 0.5));
        let three = Quantity::difference(&reg, 3.0, c).unwrap();
        let sq = apply_binary(&reg, BinOp::Mul, &three, &three).unwrap();
        assert_eq!(sq.sort.exponent(), Some(2));
        assert_eq!(sq.value, 9.0);
    }

    #[test]
    fn point_ratio_and_div_zero() {
        let Temps { reg, c, .. } = temps();
        let t1 = Quantity::point(&reg, 10.0, c).unwrap();
        let t2 = Quantity::point(&reg, 20.0, c).unwrap();
        let e = apply_binary(&reg, BinOp::Div, &t1, &t2).unwrap_err();
        assert_eq!(e.code, ErrorCode::PointRatio);
        assert!(e.message.contains("Point(temperature)"), "{}", e.message);
        let z = Quantity::difference(&reg, 0.0, c).unwrap();
        assert_eq!(
            apply_binary(&reg, BinOp::Div, &Quantity::scalar(1.0), &z)
                .unwrap_err()
                .code,
            ErrorCode::DivZero
        );
    }

    #[test]
    fn negate_examples() {
        let Temps { reg, c, .. } = temps();
        assert_eq!(negate(&reg, &Quantity::scalar(2.5)).unwrap().value, -2.5);
        let v = Quantity::difference(&reg, 3.0, c).unwrap();
        let n = negate(&reg, &v).unwrap();
        assert_eq!((n.value, n.sort), (-3.0, v.sort));
        let p = Quantity::point(&reg, 20.0, c).unwrap();
        assert_eq!(negate(&reg, &p).unwrap_err().code, ErrorCode::PointNegate);
    }

    #[test]
    fn power_examples() {
        let Temps { reg, c, .. } = temps();
        let v = Quantity::difference(&reg, 3.0, c).unwrap();
        let sq = power_int(&reg, &v, 2).unwrap();
        assert_eq!((sq.value, sq.sort.exponent()), (9.0, Some(2)));
        assert_eq!(
            power_int(&reg, &Quantity::scalar(2.0), -1).unwrap().value,
            0.5
        );
        let four = Quantity::power(&reg, 4.0, 2, c).unwrap();
        let one = power_int(&reg, &four, 0).unwrap();
        assert_eq!((one.sort, one.value, one.scale), (Sort::Scalar, 1.0, None));
        let zero = Quantity::difference(&reg, 0.0, c).unwrap();
        assert_eq!(
            power_int(&reg, &zero, -1).unwrap_err().code,
            ErrorCode::DivZero
        );
        let p = Quantity::point(&reg, 1.0, c).unwrap();
        assert_eq!(
            power_int(&reg, &p, 2).unwrap_err().code,
            ErrorCode::PointPower
        );
    }

    #[test]
    fn sqrt_examples() {
        let Temps { reg, c, .. } = temps();
        let hundred = Quantity::power(&reg, 100.0, 2, c).unwrap();
        let r = sqrt_even_power(&reg, &hundred).unwrap();
        assert_eq!((r.value, r.sort.exponent()), (10.0, Some(1)));
        assert_eq!(
            sqrt_even_power(&reg, &Quantity::scalar(9.0)).unwrap().value,
            3.0
        );
        let odd = Quantity::difference(&reg, 4.0, c).unwrap();
        assert_eq!(
            sqrt_even_power(&reg, &odd).unwrap_err().code,
            ErrorCode::OddPowerSqrt
        );
        assert_eq!(
            sqrt_even_power(&reg, &Quantity::scalar(-1.0))
                .unwrap_err()
                .code,
            ErrorCode::NegativeSqrt
        );
        let p = Quantity::point(&reg, 4.0, c).unwrap();
        assert_eq!(
            sqrt_even_power(&reg, &p).unwrap_err().code,
            ErrorCode::PointPower
        );
    }

    #[test]
    fn mix_examples() {
        let Temps { reg, c, f } = temps();
        let p = |v, s| Quantity::point(&reg, v, s).unwrap();
        let m = mix(&reg, &[0.5, 0.5], &[p(10.0, c), p(30.0, c)]).unwrap();
        assert_eq!(m.value, 20.0);
        let m = mix(&reg, &[0.5, 0.5], &[p(0.0, c), p(32.0, f)]).unwrap();
        assert!(m.value.abs() < 1e-12);
        assert_eq!(
            mix(&reg, &[0.7, 0.2], &[p(10.0, c), p(30.0, c)])
                .unwrap_err()
                .code,
            ErrorCode::WeightSum
        );
        let d = Quantity::difference(&reg, 1.0, c).unwrap();
        assert_eq!(
            mix(&reg, &[0.5, 0.5], &[p(1.0, c), d]).unwrap_err().code,
            ErrorCode::MixSort
        );
    }

    #[test]
    fn non_finite_results_are_errors() {
        let big = Quantity::scalar(1e300);
        let reg = Registry::new();
        assert_eq!(
            apply_binary(&reg, BinOp::Mul, &big, &big).unwrap_err().code,
            ErrorCode::NonFinite
        );
    }
}
