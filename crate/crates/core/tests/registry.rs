//! Transformation group laws and conversion coherence.

use measure::{
    apply_binary, BinOp, FamilyId, FamilyKind, Quantity, Registry, ScaleId, Sort, Transformation,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn transformation() -> impl Strategy<Value = Transformation> {
    (-100.0..100.0f64, -1.0..1.0f64)
        .prop_map(|(p, lq)| Transformation::unchecked(FamilyId(0), p, 10f64.powf(lq)))
}

fn same(a: Transformation, b: Transformation) -> bool {
    close(a.p, b.p, 1e-12) && close(a.q, b.q, 1e-12)
}

/// A registry with one affine family and `n` random scales.
fn random_registry(consts: &[(f64, f64)]) -> (Registry, FamilyId, Vec<ScaleId>) {
    let mut reg = Registry::new();
    let f = reg.register_family("x", FamilyKind::Affine, None).unwrap();
    let mut scales = vec![reg.reference_scale(f)];
    for (i, &(p, lq)) in consts.iter().enumerate() {
        scales.push(
            reg.register_scale(&format!("s{i}"), f, p, 10f64.powf(lq))
                .unwrap(),
        );
    }
    (reg, f, scales)
}

fn scale_consts() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-100.0..100.0f64, -1.0..1.0f64), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn group_laws(a in transformation(), b in transformation(), c in transformation()) {
        let id = Transformation::identity(FamilyId(0));
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(same(left, right));
        prop_assert!(same(a.compose(&id).unwrap(), a));
        prop_assert!(same(id.compose(&a).unwrap(), a));
        prop_assert!(same(a.invert().compose(&a).unwrap(), id));
    }
}

proptest! {
    #[test]
    fn conversion_round_trip(consts in scale_consts(), x in -1000.0..1000.0f64, diff in any::<bool>()) {
        let (reg, _, scales) = random_registry(&consts);
        for &s in &scales {
            for &t in &scales {
                let a = if diff {
                    Quantity::difference(&reg, x, s).unwrap()
                } else {
                    Quantity::point(&reg, x, s).unwrap()
                };
                let there = reg.convert(&a, t).unwrap();
                let back = reg.convert(&there, s).unwrap();
                prop_assert!(close(back.value, x, 1e-9), "{} vs {x}", back.value);
                prop_assert_eq!(back.scale, Some(s));
            }
        }
    }

    #[test]
    fn conversion_is_a_transformation(consts in scale_consts(), x in -1000.0..1000.0f64) {
        let (reg, f, scales) = random_registry(&consts);
        for &t in &scales {
            // reference reading -> scale t is the inverse of t's own map
            let tr = reg.conversion(reg.reference_scale(f), t).unwrap();
            let direct = reg
                .convert(&Quantity::point(&reg, x, reg.reference_scale(f)).unwrap(), t)
                .unwrap();
            prop_assert!(close(tr.act(Sort::Point(f), x), direct.value, 1e-9));
            prop_assert!(tr.q > 0.0);
        }
    }

    #[test]
    fn convert_commutes_with_operations(
        consts in scale_consts(), a in -500.0..500.0f64, b in -500.0..500.0f64,
        op in 0usize..4, ka in 0i32..=2, kb in 0i32..=2, pick in 0usize..6,
    ) {
        let (reg, f, scales) = random_registry(&consts);
        let t = scales[pick % scales.len()];
        let sort = |k: i32| if k == 0 { Sort::Point(f) } else { Sort::Power(f, k) };
        let qa = Quantity::new(&reg, a, sort(ka), Some(scales[0])).unwrap();
        let qb = Quantity::new(&reg, b, sort(kb), Some(scales[0])).unwrap();
        let op = BinOp::ALL[op];
        if let Ok(r) = apply_binary(&reg, op, &qa, &qb) {
            let ca = reg.convert(&qa, t).unwrap();
            let cb = reg.convert(&qb, t).unwrap();
            let r2 = apply_binary(&reg, op, &ca, &cb).unwrap();
            match r.sort.family() {
                Some(_) => {
                    let lhs = reg.convert(&r, t).unwrap().value;
                    let rhs = reg.convert(&r2, t).unwrap().value;
                    let mag = (a.abs() + b.abs()).powi(ka.max(kb).max(1) * 2).max(1.0);
                    prop_assert!((lhs - rhs).abs() <= 1e-9 * mag.max(lhs.abs()), "{lhs} vs {rhs}");
                }
                None => prop_assert!(close(r.value, r2.value, 1e-9)),
            }
        }
    }
}
