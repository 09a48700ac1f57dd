//! The invariance oracle against the static checker.

use measure::corpus::{Fixture, Generator, MAX_DEPTH};
use measure::exec::Execution;
use measure::lang::check::{infer_sort, SortEnv};
use measure::lang::eval::eval_raw;
use measure::lang::printer::print_expr;
use measure::meaning::{self, Mode, Options, Status};
use measure::ErrorCode;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sort_env(fixture: &Fixture) -> SortEnv {
    fixture
        .bindings
        .iter()
        .map(|(n, s)| (n.clone(), Some(*s)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn well_sorted_expressions_are_meaningful(seed in any::<u64>(), trial_seed in any::<u64>()) {
        let fixture = Fixture::standard();
        let generator = Generator::new(&fixture);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, sort) = generator.random_typed(&mut rng, &fixture.targets());
        prop_assert_eq!(infer_sort(&e, &sort_env(&fixture), &fixture.registry), Ok(sort));
        match meaning::check_meaningful(&fixture.registry, &e, &fixture.env, &Options::new(20, trial_seed)) {
            Ok(v) => prop_assert_eq!(v.status, Status::Meaningful, "{}", print_expr(&e)),
            // a non-total expression has nothing to compare
            Err(err) => prop_assert_eq!(err.code, ErrorCode::Eval),
        }
    }

    #[test]
    fn verdicts_do_not_depend_on_execution(seed in any::<u64>(), raw in any::<bool>()) {
        let fixture = Fixture::standard();
        let generator = Generator::new(&fixture);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.random_range(1..=MAX_DEPTH);
        let e = generator.unconstrained(&mut rng, depth);
        let mode = if raw { Mode::Raw } else { Mode::Typed };
        let run = |execution| {
            meaning::check_meaningful(
                &fixture.registry, &e, &fixture.env,
                &Options::new(40, seed).mode(mode).execution(execution),
            )
        };
        prop_assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
        prop_assert_eq!(run(Execution::Parallel), run(Execution::Parallel));
    }

    #[test]
    fn witnesses_replay(seed in any::<u64>()) {
        let fixture = Fixture::standard();
        let generator = Generator::new(&fixture);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.random_range(1..=MAX_DEPTH);
        let e = generator.unconstrained(&mut rng, depth);
        let Ok(v) = meaning::check_meaningful(
            &fixture.registry, &e, &fixture.env, &Options::new(50, seed).mode(Mode::Raw),
        ) else {
            return Ok(());
        };
        let Some(w) = v.witness else { return Ok(()) };
        prop_assert_eq!(
            &w.transformations,
            &meaning::trial_transformations(&fixture.registry, seed, v.trials - 1)
        );
        let t = meaning::check_trial(&fixture.registry, &e, &fixture.env, &w.transformations, Mode::Raw)
            .unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        prop_assert!(close(t.y, w.y));
        prop_assert!(close(t.y_transformed, w.y_transformed));
        prop_assert!(close(t.deviation, w.deviation));
        prop_assert!(w.deviation > meaning::DEFAULT_TOLERANCE);
    }
}

/// Every expression rejected only for a point ratio or point sum, whose raw
/// evaluation is total, is caught within 50 trials.
#[test]
fn point_errors_are_caught_by_the_oracle() {
    let fixture = Fixture::standard();
    let generator = Generator::new(&fixture).literals_only();
    let mut covered = 0;
    for seed in 0..2000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let depth = rng.random_range(1..=MAX_DEPTH);
        let e = generator.unconstrained(&mut rng, depth);
        let Err(diags) = infer_sort(&e, &SortEnv::new(), &fixture.registry) else {
            continue;
        };
        let point_error = diags
            .iter()
            .all(|d| matches!(d.code, ErrorCode::PointRatio | ErrorCode::PointSum));
        if !point_error || eval_raw(&e, &fixture.env, &fixture.registry, None).is_err() {
            continue;
        }
        covered += 1;
        let v = meaning::check_meaningful(
            &fixture.registry,
            &e,
            &fixture.env,
            &Options::new(50, seed).mode(Mode::Raw),
        )
        .unwrap();
        assert_eq!(
            v.status,
            Status::NotMeaningful,
            "{} ({:?})",
            print_expr(&e),
            diags[0].code
        );
    }
    assert!(
        covered >= 100,
        "only {covered} point-error expressions drawn"
    );
}
