use lbsched::gen::{gen_vs, normalize_lb, VsFamily};
use lbsched::oracle::{brute_force_vs_opt, OracleBudget};
use lbsched::seed::{derive_path, rng_from_seed};
use lbsched::vecsched::{is_good_subset, sample_subset, QDenominator};
use lbsched::{
    compute_lb, list_schedule, load_matrix, makespan, vs_schedule, vs_schedule_with_retries,
    Assignment, VsInstance, VsParams,
};
use proptest::prelude::*;
use rand::Rng;

fn direct_lb(m: usize, rows: &[Vec<f64>]) -> f64 {
    let d = rows[0].len();
    (0..d)
        .map(|r| {
            let col: Vec<f64> = rows.iter().map(|p| p[r]).collect();
            let max = col.iter().copied().fold(0.0, f64::max);
            max.max(col.iter().sum::<f64>() / m as f64)
        })
        .fold(0.0, f64::max)
}

#[test]
fn lb_matches_direct_evaluation_on_integer_instances() {
    for seed in 0..50 {
        let mut rng = rng_from_seed(seed);
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..2).map(|_| rng.random_range(0..=4) as f64).collect())
            .collect();
        let inst = VsInstance::from_sizes(3, 2, rows.clone()).unwrap();
        assert_eq!(compute_lb(&inst), direct_lb(3, &rows));
    }
}

#[test]
fn load_columns_conserve_total_size() {
    let mut rng = rng_from_seed(9);
    for _ in 0..20 {
        let inst = gen_vs(VsFamily::Uniform, 6, 3, 4, &mut rng).unwrap();
        let a = Assignment::new((0..6).map(|_| rng.random_range(0..3)).collect());
        let loads = load_matrix(&inst, &a).unwrap();
        for (got, want) in loads.column_sums().iter().zip(inst.totals()) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn good_subset_agrees_with_direct_inequalities() {
    let params = VsParams::default();
    let mut rng = rng_from_seed(17);
    for _ in 0..200 {
        let m = rng.random_range(7..20);
        let inst = normalize_lb(&gen_vs(VsFamily::Spike, 40, m, 3, &mut rng).unwrap()).unwrap();
        let scale = params.scale_l(inst.d());
        let subset: Vec<usize> = (0..inst.n()).filter(|_| rng.random_bool(0.3)).collect();
        let left = rng.random_range(7..=m);
        let mut inside = vec![0.0; inst.d()];
        let mut outside = vec![0.0; inst.d()];
        for (j, job) in inst.jobs().iter().enumerate() {
            let target = if subset.contains(&j) {
                &mut inside
            } else {
                &mut outside
            };
            for (acc, v) in target.iter_mut().zip(&job.p) {
                *acc += v;
            }
        }
        let direct = inside.iter().all(|&s| s <= 14.0 * scale)
            && outside.iter().all(|&s| s <= (left as f64 - 1.0) * scale);
        assert_eq!(is_good_subset(&inst, &subset, scale, left, &params), direct);
    }
}

#[test]
fn sampling_with_probability_one_takes_everything() {
    let jobs: Vec<usize> = (0..25).collect();
    assert_eq!(sample_subset(&jobs, 1.0, &mut rng_from_seed(1)), jobs);
    let a = sample_subset(&jobs, 0.2, &mut rng_from_seed(4));
    let b = sample_subset(&jobs, 0.2, &mut rng_from_seed(4));
    assert_eq!(a, b);
}

#[test]
fn hand_simulated_list_schedule() {
    let inst = VsInstance::from_sizes(2, 1, vec![vec![3.0], vec![3.0], vec![2.0]]).unwrap();
    let value = makespan(&inst, &list_schedule(&inst)).unwrap();
    assert_eq!(value, 5.0);
    assert_eq!(compute_lb(&inst), 4.0);
    assert!(value <= 2.0 * compute_lb(&inst));
}

#[test]
fn unit_cube_jobs_respect_certificate() {
    for d in [2, 5, 30] {
        let inst = VsInstance::from_sizes(12, d, vec![vec![1.0; d]; 12]).unwrap();
        let res = vs_schedule(&inst, &VsParams::default(), &mut rng_from_seed(d as u64)).unwrap();
        assert!(res.makespan <= 14.0 * (d as f64).ln().max(1.0) + 1e-9);
    }
}

#[test]
fn single_job_gets_its_own_size() {
    let inst = VsInstance::from_sizes(9, 3, vec![vec![0.5, 2.0, 1.0]]).unwrap();
    let res = vs_schedule(&inst, &VsParams::default(), &mut rng_from_seed(0)).unwrap();
    assert_eq!(res.makespan, 2.0);
    assert_eq!(res.makespan, compute_lb(&inst));
}

#[test]
fn both_sampling_denominators_certify() {
    for denom in [QDenominator::Residual, QDenominator::Original] {
        let params = VsParams {
            q_denominator: denom,
            ..VsParams::default()
        };
        let mut ok = 0;
        for case in 0..40 {
            let mut rng = rng_from_seed(derive_path(77, &[case]));
            let m = rng.random_range(7..40);
            let inst =
                normalize_lb(&gen_vs(VsFamily::Uniform, 20 * m, m, 8, &mut rng).unwrap()).unwrap();
            if let Ok((res, _)) = vs_schedule_with_retries(&inst, &params, &mut rng, 10) {
                assert!(res.certified);
                assert!(res.makespan <= res.bound + 1e-9);
                ok += 1;
            }
        }
        assert!(ok >= 38, "{denom:?}: {ok}/40");
    }
}

#[test]
fn schedules_are_reproducible_from_seed() {
    let inst =
        normalize_lb(&gen_vs(VsFamily::PowerLaw, 300, 16, 8, &mut rng_from_seed(3)).unwrap())
            .unwrap();
    let run = |s| vs_schedule(&inst, &VsParams::default(), &mut rng_from_seed(s)).unwrap();
    assert_eq!(run(11), run(11));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimum_never_beats_lower_bound(seed in any::<u64>(), n in 1usize..8, m in 1usize..4, d in 1usize..4) {
        let inst = gen_vs(VsFamily::Uniform, n, m, d, &mut rng_from_seed(seed)).unwrap();
        let (a, opt) = brute_force_vs_opt(&inst, &OracleBudget::default()).unwrap();
        prop_assert!(opt + 1e-12 >= compute_lb(&inst));
        prop_assert_eq!(makespan(&inst, &a).unwrap(), opt);
    }

    #[test]
    fn list_schedule_within_twice_lb(seed in any::<u64>(), n in 1usize..80, m in 1usize..16) {
        let inst = gen_vs(VsFamily::PowerLaw, n, m, 1, &mut rng_from_seed(seed)).unwrap();
        let lb = compute_lb(&inst);
        prop_assert!(makespan(&inst, &list_schedule(&inst)).unwrap() <= 2.0 * lb + 1e-9);
    }

    #[test]
    fn scaling_commutes_with_lb(seed in any::<u64>(), c in 0.01f64..100.0) {
        let inst = gen_vs(VsFamily::Spike, 20, 5, 3, &mut rng_from_seed(seed)).unwrap();
        let scaled = compute_lb(&inst.scale(c).unwrap());
        prop_assert!((scaled - c * compute_lb(&inst)).abs() <= 1e-9 * scaled.max(1.0));
    }
}
