use camp_core::adversarial::{skill_reward, style_reward};
use camp_core::analysis::{circular_distance, dtw_distance, phase_signature_distance, tracking_accuracy};
use camp_core::config::RewardWeights;
use camp_core::ppo::{compose_reward, gae_advantages, gaussian_kl, normalize_advantages};
use camp_core::sim::{stance_odometry, task_reward, Command};
use ndarray::Array2;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    -1e3..1e3f64
}

proptest! {
    #[test]
    fn style_reward_is_bounded(d in finite()) {
        let r = style_reward(d);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn skill_reward_is_a_cosine(a in prop::collection::vec(-5.0..5.0f64, 8), b in prop::collection::vec(-5.0..5.0f64, 8)) {
        let r = skill_reward(&a, &b);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
        prop_assert!((r - skill_reward(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn composition_is_linear(task in 0.0..2.25f64, style in 0.0..1.0f64, skill in -1.0..1.0f64, w in (0.0..3.0f64, 0.0..3.0f64, 0.0..3.0f64)) {
        let w = RewardWeights { task: w.0, style: w.1, skill: w.2 };
        let r = compose_reward(task, style, skill, &w);
        prop_assert!((r - (w.task * task + w.style * style + w.skill * skill)).abs() < 1e-12);
    }

    #[test]
    fn task_reward_peaks_at_the_command(v in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), e in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)) {
        let cmd = Command::one_hot([v.0, v.1, v.2], 0, 1).unwrap();
        let exact = task_reward([v.0, v.1, 0.0], [0.0, 0.0, v.2], &cmd);
        let off = task_reward([v.0 + e.0, v.1 + e.1, 0.0], [0.0, 0.0, v.2 + e.2], &cmd);
        prop_assert!((exact - 2.25).abs() < 1e-12);
        prop_assert!(off > 0.0 && off <= exact);
    }

    #[test]
    fn gae_with_zero_discount_is_the_td_error(
        rows in prop::collection::vec((finite(), finite(), finite()), 1..20),
    ) {
        let t = rows.len();
        let r = Array2::from_shape_fn((t, 1), |(i, _)| rows[i].0);
        let v = Array2::from_shape_fn((t, 1), |(i, _)| rows[i].1);
        let nv = Array2::from_shape_fn((t, 1), |(i, _)| rows[i].2);
        let flags = Array2::from_elem((t, 1), false);
        let (adv, ret) = gae_advantages(r.view(), v.view(), nv.view(), flags.view(), flags.view(), 0.0, 0.95);
        for i in 0..t {
            prop_assert!((adv[[i, 0]] - (rows[i].0 - rows[i].1)).abs() < 1e-9);
            prop_assert!((ret[[i, 0]] - rows[i].0).abs() < 1e-9);
        }
    }

    #[test]
    fn normalized_advantages_are_centered(mut a in prop::collection::vec(finite(), 2..64)) {
        let spread = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - a.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assume!(spread > 1e-3);
        normalize_advantages(&mut a);
        let n = a.len() as f64;
        let mean = a.iter().sum::<f64>() / n;
        let var = a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!((var - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_self(m in prop::collection::vec(-2.0..2.0f64, 4), s in prop::collection::vec(-1.0..1.0f64, 4), d in prop::collection::vec(-1.0..1.0f64, 4)) {
        prop_assert!(gaussian_kl(&m, &s, &m, &s).abs() < 1e-12);
        let m2: Vec<f64> = m.iter().zip(&d).map(|(a, b)| a + b).collect();
        prop_assert!(gaussian_kl(&m, &s, &m2, &s) >= 0.0);
    }

    #[test]
    fn circular_distance_is_a_half_cycle_metric(a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let d = circular_distance(a, b);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((d - circular_distance(b, a)).abs() < 1e-12);
        prop_assert!((circular_distance(a + 1.0, b) - d).abs() < 1e-9);
    }

    #[test]
    fn phase_signature_distance_is_symmetric(a in prop::array::uniform4(0.0..1.0f64), b in prop::array::uniform4(0.0..1.0f64)) {
        prop_assert!((phase_signature_distance(&a, &b) - phase_signature_distance(&b, &a)).abs() < 1e-12);
        prop_assert_eq!(phase_signature_distance(&a, &a), 0.0);
    }

    #[test]
    fn dtw_is_symmetric_and_zero_on_self(
        a in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 1..12),
        b in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 1..12),
    ) {
        let ab = dtw_distance(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - dtw_distance(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn perfect_tracking_scores_100(phase in 0.0..6.0f64, n in 4usize..40) {
        let t = Array2::from_shape_fn((n, 3), |(i, j)| (phase + 0.3 * i as f64 + j as f64).sin());
        prop_assert_eq!(tracking_accuracy(t.view(), t.view()).unwrap(), 100.0);
    }

    #[test]
    fn odometry_recovers_rigid_planar_motion(
        v in (-1.0..1.0f64, -1.0..1.0f64),
        w in -2.0..2.0f64,
        feet in prop::collection::vec((-0.3..0.3f64, -0.2..0.2f64), 2..5),
    ) {
        let spread: f64 = feet.iter().map(|f| (f.0 - feet[0].0).abs() + (f.1 - feet[0].1).abs()).sum();
        prop_assume!(spread > 1e-2);
        let stance: Vec<([f64; 2], [f64; 2])> = feet.iter().map(|&(x, y)| ([x, y], [-v.0 + w * y, -v.1 - w * x])).collect();
        let (est, yaw) = stance_odometry(&stance).unwrap();
        prop_assert!((est[0] - v.0).abs() < 1e-9 && (est[1] - v.1).abs() < 1e-9 && (yaw - w).abs() < 1e-9);
    }
}
