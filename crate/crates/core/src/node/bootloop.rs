use super::BootRecord;

/// Runs of consecutive boots that never completed a duty cycle.
fn failed_runs(boots: &[BootRecord]) -> impl Iterator<Item = &[BootRecord]> {
    boots.split(|b| b.completed_cycle).filter(|run| !run.is_empty())
}

fn run_has_loop(run: &[BootRecord], k: usize, window_s: f64) -> bool {
    run.len() >= k && run.windows(k).any(|w| w[k - 1].time_s - w[0].time_s <= window_s)
}

/// True iff some `k` consecutive boots, none completing a cycle, fall inside
/// a span of `window_s` seconds.
pub fn detect_boot_loop(boots: &[BootRecord], k: usize, window_s: f64) -> bool {
    let k = k.max(1);
    failed_runs(boots).any(|run| run_has_loop(run, k, window_s))
}

/// Number of distinct boot loops: maximal failed runs that contain a loop.
pub fn count_boot_loops(boots: &[BootRecord], k: usize, window_s: f64) -> usize {
    let k = k.max(1);
    failed_runs(boots)
        .filter(|run| run_has_loop(run, k, window_s))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn boots(spec: &[(f64, bool)]) -> Vec<BootRecord> {
        spec.iter()
            .map(|&(time_s, completed_cycle)| BootRecord {
                time_s,
                completed_cycle,
            })
            .collect()
    }

    #[test]
    fn empty_history() {
        assert!(!detect_boot_loop(&[], 3, 60.0));
        assert_eq!(count_boot_loops(&[], 3, 60.0), 0);
    }

    #[test]
    fn three_failed_boots_in_thirty_seconds() {
        let b = boots(&[(0.0, false), (15.0, false), (30.0, false)]);
        assert!(detect_boot_loop(&b, 3, 60.0));
    }

    #[test]
    fn completed_middle_boot_breaks_the_run() {
        let b = boots(&[(0.0, false), (15.0, true), (30.0, false)]);
        assert!(!detect_boot_loop(&b, 3, 60.0));
    }

    #[test]
    fn spread_out_boots_are_not_a_loop() {
        let b = boots(&[(0.0, false), (50.0, false), (100.0, false)]);
        assert!(!detect_boot_loop(&b, 3, 60.0));
    }

    #[test]
    fn separate_runs_counted_separately() {
        let b = boots(&[
            (0.0, false),
            (1.0, false),
            (2.0, false),
            (3.0, true),
            (4.0, false),
            (5.0, false),
            (6.0, false),
            (7.0, false),
        ]);
        assert_eq!(count_boot_loops(&b, 3, 60.0), 2);
    }

    proptest! {
        #[test]
        fn adding_a_failed_boot_never_clears_detection(
            mut times in proptest::collection::vec(0.0f64..600.0, 0..20),
            flags in proptest::collection::vec(any::<bool>(), 20),
            extra in 0.0f64..600.0,
        ) {
            times.sort_by(f64::total_cmp);
            let mut b: Vec<BootRecord> = times.iter().zip(&flags)
                .map(|(&time_s, &completed_cycle)| BootRecord { time_s, completed_cycle })
                .collect();
            let before = detect_boot_loop(&b, 3, 60.0);
            let pos = b.partition_point(|r| r.time_s <= extra);
            b.insert(pos, BootRecord { time_s: extra, completed_cycle: false });
            prop_assert!(!before || detect_boot_loop(&b, 3, 60.0));
        }
    }
}
