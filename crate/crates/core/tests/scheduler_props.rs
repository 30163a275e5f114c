use proptest::prelude::*;
use sscc_core::scheduler::{
    basic_s2c2, coverage_of, general_s2c2, quantize_speeds, reassign_pending, verify_coverage, SpeedVector,
};

fn check(u: &[usize], m: usize) {
    let sv = SpeedVector::new(u.to_vec());
    let asg = general_s2c2(&sv, m).unwrap_or_else(|e| panic!("u={u:?} m={m}: {e}"));
    let c = sv.total();
    assert_eq!(asg.c, c);
    assert_eq!(asg.total_chunks(), m * c, "u={u:?} m={m}");
    for (w, iv) in asg.intervals.iter().enumerate() {
        assert!(iv.len <= c, "u={u:?} m={m}");
        if u[w] == 0 {
            assert_eq!(iv.len, 0);
        }
    }
    let report = verify_coverage(&asg);
    assert!(report.per_chunk.iter().all(|&cov| cov == m), "u={u:?} m={m}: {:?}", report.per_chunk);
    for a in 0..u.len() {
        for b in 0..u.len() {
            if u[a] > u[b] && asg.intervals[a].len < c {
                assert!(asg.intervals[a].len >= asg.intervals[b].len, "u={u:?} m={m}");
            }
        }
    }
}

#[test]
fn general_assignment_exhaustive() {
    for n in 1..=8usize {
        let mut u = vec![0usize; n];
        loop {
            let live = u.iter().filter(|&&x| x > 0).count();
            for m in 1..=live {
                check(&u, m);
            }
            for m in live + 1..=n {
                assert!(general_s2c2(&SpeedVector::new(u.clone()), m).is_err());
            }
            let mut i = 0;
            while i < n && u[i] == 5 {
                u[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            u[i] += 1;
        }
    }
}

#[test]
fn too_few_live_workers_is_rejected() {
    assert!(general_s2c2(&SpeedVector::new(vec![3, 0, 2]), 3).is_err());
}

proptest! {
    #[test]
    fn quantize_then_assign_is_scale_invariant(
        speeds in prop::collection::vec(0.05f64..10.0, 2..9),
        scale in 0.001f64..1000.0,
        c_target in 8usize..40,
    ) {
        let m = (speeds.len() / 2).max(1);
        let u1 = quantize_speeds(&speeds, c_target).unwrap();
        let scaled: Vec<f64> = speeds.iter().map(|s| s * scale).collect();
        let u2 = quantize_speeds(&scaled, c_target).unwrap();
        let exact: Vec<f64> = speeds.iter().map(|s| s * c_target as f64 / speeds.iter().sum::<f64>()).collect();
        for (&u, &e) in u1.u.iter().zip(&exact) {
            prop_assert!((u as f64 - e).abs() <= 0.5 + 1e-6);
        }
        prop_assert_eq!(&u1, &u2);
        if u1.live() >= m {
            prop_assert_eq!(general_s2c2(&u1, m).unwrap(), general_s2c2(&u2, m).unwrap());
        }
    }

    #[test]
    fn reassignment_restores_coverage(
        u in prop::collection::vec(0usize..5, 3..9),
        m_frac in 0.0f64..1.0,
        drop_mask in prop::collection::vec(any::<bool>(), 9),
        speeds in prop::collection::vec(0.1f64..5.0, 9),
    ) {
        let sv = SpeedVector::new(u.clone());
        prop_assume!(sv.live() >= 1);
        let m = 1 + ((sv.live() - 1) as f64 * m_frac) as usize;
        let asg = general_s2c2(&sv, m).unwrap();
        let responded: Vec<usize> = (0..u.len()).filter(|&w| !drop_mask[w]).collect();
        let speeds = &speeds[..u.len()];
        match reassign_pending(&asg, &responded, speeds) {
            Ok(delta) => {
                let sets: Vec<Vec<usize>> = (0..u.len())
                    .map(|w| {
                        if responded.contains(&w) {
                            let mut s = asg.chunks_of(w);
                            s.extend(&delta.extra[w]);
                            s
                        } else {
                            Vec::new()
                        }
                    })
                    .collect();
                for w in 0..u.len() {
                    prop_assert!(responded.contains(&w) || delta.extra[w].is_empty());
                }
                for w in &responded {
                    let own = asg.chunks_of(*w);
                    prop_assert!(delta.extra[*w].iter().all(|c| !own.contains(c)));
                }
                let report = coverage_of(asg.c, m, &sets);
                prop_assert!(report.decodable);
            }
            Err(_) => prop_assert!(responded.len() < m),
        }
    }

    #[test]
    fn basic_gives_each_live_worker_m_chunks(alive in prop::collection::vec(any::<bool>(), 1..10), m_frac in 0.0f64..1.0) {
        let live = alive.iter().filter(|&&a| a).count();
        prop_assume!(live >= 1);
        let m = 1 + ((live - 1) as f64 * m_frac) as usize;
        let asg = basic_s2c2(&alive, m).unwrap();
        prop_assert_eq!(asg.c, live);
        for (w, &a) in alive.iter().enumerate() {
            prop_assert_eq!(asg.intervals[w].len, if a { m } else { 0 });
        }
    }
}
