//! Admissible scale transformations `x -> p + q * x` and their group law.
//!
//! Transformations act on the set of scales, not on scale values: there is no
//! way to multiply a quantity by a transformation, only to re-describe it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ErrorCode, MeasureError, Result};
use crate::quantity::Quantity;
use crate::registry::{FamilyId, FamilyKind};
use crate::sort::Sort;

/// Range of `log10(q)` sampled by [`Transformation::random_admissible`].
pub const LOG10_FACTOR_RANGE: (f64, f64) = (-1.0, 1.0);
/// Range of `p` sampled for affine families.
pub const OFFSET_RANGE: (f64, f64) = (-100.0, 100.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transformation {
    pub family: FamilyId,
    pub p: f64,
    pub q: f64,
}

impl Transformation {
    /// Builds a transformation without checking it against a family kind; see
    /// [`crate::registry::Registry::transformation`] for the checked form.
    pub fn unchecked(family: FamilyId, p: f64, q: f64) -> Self {
        Transformation { family, p, q }
    }

    pub fn identity(family: FamilyId) -> Self {
        Transformation {
            family,
            p: 0.0,
            q: 1.0,
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Transformation) -> Result<Transformation> {
        if self.family != first.family {
            return Err(MeasureError::new(
                ErrorCode::FamilyMix,
                format!(
                    "cannot compose transformations of {} and {}",
                    self.family, first.family
                ),
            ));
        }
        Ok(Transformation {
            family: self.family,
            p: self.p + self.q * first.p,
            q: self.q * first.q,
        })
    }

    pub fn invert(&self) -> Transformation {
        Transformation {
            family: self.family,
            p: -self.p / self.q,
            q: 1.0 / self.q,
        }
    }

    /// Action on a bare reading of the given sort.
    pub fn act(&self, sort: Sort, x: f64) -> f64 {
        match sort {
            Sort::Scalar => x,
            Sort::Power(_, k) => self.q.powi(k) * x,
            Sort::Point(_) => self.p + self.q * x,
        }
    }

    /// Re-describes `a` under this transformation. Scalars are invariant; the
    /// scale tag is kept.
    pub fn apply(&self, a: &Quantity) -> Result<Quantity> {
        match a.sort.family() {
            None => Ok(*a),
            Some(f) if f != self.family => Err(MeasureError::new(
                ErrorCode::FamilyMix,
                format!(
                    "transformation of {} applied to a quantity of {f}",
                    self.family
                ),
            )),
            Some(_) => Quantity::checked(self.act(a.sort, a.value), a.sort, a.scale),
        }
    }

    /// Deterministic random admissible transformation for a family of `kind`:
    /// affine draws `q` log-uniform on [0.1, 10] and `p` uniform on
    /// [-100, 100]; linear keeps `p = 0`; absolute is the identity.
    pub fn random_admissible(family: FamilyId, kind: FamilyKind, seed: u64) -> Transformation {
        if kind == FamilyKind::Absolute {
            return Transformation::identity(family);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = 10f64.powf(rng.random_range(LOG10_FACTOR_RANGE.0..=LOG10_FACTOR_RANGE.1));
        let p = rng.random_range(OFFSET_RANGE.0..=OFFSET_RANGE.1);
        match kind {
            FamilyKind::Affine => Transformation { family, p, q },
            _ => Transformation { family, p: 0.0, q },
        }
    }
}
