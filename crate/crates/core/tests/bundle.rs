mod common;

use std::collections::BTreeSet;

use common::*;
use limbscope_core::{
    apply_threshold, compare_bundles, BundleComparison, CompareConfig, Error, MuscleGroup, MuscleId, MuscleRecording,
    RawEmgChannel, Side,
};

fn config() -> CompareConfig {
    CompareConfig::default()
}

fn visible_set(c: &BundleComparison, tau: f64) -> BTreeSet<(String, Side)> {
    apply_threshold(c, tau).unwrap().visible_charts().map(|(m, s)| (m.to_string(), s)).collect()
}

#[test]
fn self_comparison_scores_zero_and_collapses() {
    let (a, u) = identical_pair();
    let c = compare_bundles(&a, &u, &config()).unwrap();
    assert_eq!(c.muscles.len(), 8);
    for m in &c.muscles {
        for (_, side) in m.sides.iter() {
            assert!(side.significance.score <= 1e-9);
            assert_eq!(side.significance.normalized_score, 0.0);
        }
    }
    for tau in [0.0, 1e-6, 0.1, 0.5, 1.0] {
        let report = apply_threshold(&c, tau).unwrap();
        assert!(report.surviving.is_empty(), "tau={tau}");
        assert!(report.muscles.iter().all(|m| m.collapsed));
    }
}

#[test]
fn planted_muscle_wins_and_survives_last() {
    let (a, u) = planted_pair("TRI");
    let c = compare_bundles(&a, &u, &config()).unwrap();
    let tri = c.significance("TRI", Side::Affected).unwrap();
    assert_eq!(tri.normalized_score, 1.0);
    for m in c.muscles.iter().filter(|m| m.muscle.name != "TRI") {
        for (_, side) in m.sides.iter() {
            assert_eq!(side.significance.score, 0.0, "{}", m.muscle);
        }
    }

    let mut previous = visible_set(&c, 0.0);
    let mut last_survivors = previous.clone();
    for step in 1..=100 {
        let tau = step as f64 / 100.0;
        let current = visible_set(&c, tau);
        assert!(current.is_subset(&previous), "visible set grew at tau={tau}");
        if !current.is_empty() {
            last_survivors = current.clone();
        }
        previous = current;
    }
    let expected: BTreeSet<_> = [("TRI".to_string(), Side::Affected)].into();
    assert_eq!(last_survivors, expected);
    assert_eq!(apply_threshold(&c, 1.0).unwrap().surviving, vec!["TRI".to_string()]);
}

#[test]
fn elevated_biceps_and_triceps_survive_longest() {
    // Other muscles differ only by carrier phase, as repeated recordings would.
    let a = assessment(
        Side::Affected,
        |m| match m {
            "BIC" => 2.2,
            "TRI" => 1.8,
            _ => 1.0,
        },
        |m| if m == "PT" || m == "FDS" { 0.7 } else { 0.0 },
    );
    let u = assessment(Side::Unaffected, |_| 1.0, |m| if m == "LT" { 0.4 } else { 1.1 });
    let c = compare_bundles(&a, &u, &config()).unwrap();

    // The tau at which each row collapses: it survives every tau up to its peak ratio.
    let mut collapse_tau: Vec<(String, f64)> = c
        .muscles
        .iter()
        .map(|m| {
            let peak = m.sides.affected.chart.peak().max(m.sides.unaffected.chart.peak());
            (m.muscle.name.clone(), peak / c.h_max)
        })
        .collect();
    collapse_tau.sort_by(|x, y| y.1.total_cmp(&x.1));
    let top: BTreeSet<&str> = collapse_tau[..2].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(top, ["BIC", "TRI"].into(), "{collapse_tau:?}");

    // Cross-check with a sweep.
    let mut order = Vec::new();
    for step in 0..=1000 {
        let report = apply_threshold(&c, step as f64 / 1000.0).unwrap();
        for m in &report.muscles {
            if m.collapsed && !order.contains(&m.muscle) {
                order.push(m.muscle.clone());
            }
        }
    }
    let survivors = apply_threshold(&c, 1.0).unwrap().surviving;
    order.extend(survivors);
    let tail: BTreeSet<&str> = order[order.len() - 2..].iter().map(String::as_str).collect();
    assert_eq!(tail, ["BIC", "TRI"].into(), "{order:?}");
}

#[test]
fn highlight_never_exceeds_base() {
    let (a, u) = planted_pair("UT");
    let c = compare_bundles(&a, &u, &config()).unwrap();
    for m in &c.muscles {
        for (_, side) in m.sides.iter() {
            let s = &side.significance;
            assert!((s.score - s.divergence * s.skew_weight).abs() <= 1e-12);
            assert!((0.0..=1.0).contains(&s.normalized_score));
            for (h, b) in side.chart.highlighted.iter().zip(&side.chart.base.values) {
                assert!(h <= b);
                assert!((h - b * s.normalized_score).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn threshold_extremes() {
    let (a, u) = planted_pair("PQ");
    let c = compare_bundles(&a, &u, &config()).unwrap();
    let zero = apply_threshold(&c, 0.0).unwrap();
    for m in &c.muscles {
        for (side, chart) in m.sides.iter() {
            let active = chart.chart.highlighted.iter().any(|&h| h > 0.0);
            let shown = zero.visible_charts().any(|(n, s)| n == m.muscle.name && s == side);
            assert_eq!(active, shown);
        }
    }
    assert!(apply_threshold(&c, -0.1).is_err());
    assert!(apply_threshold(&c, 1.5).is_err());
    let masked = c.with_threshold(0.4).unwrap();
    let report = masked.visibility();
    for m in &masked.muscles {
        for (side, chart) in m.sides.iter() {
            let vis = report.visible_charts().any(|(n, s)| n == m.muscle.name && s == side);
            assert_eq!(chart.chart.is_visible(), vis);
        }
    }
}

#[test]
fn mute_unmute_round_trip() {
    let (a, u) = planted_pair("BIC");
    let c = compare_bundles(&a, &u, &config()).unwrap().with_threshold(0.2).unwrap();
    let muted = c.mute_muscle("EDC").unwrap();
    assert!(muted.muted.contains("EDC"));
    let back = muted.unmute_muscle("EDC").unwrap();
    assert_eq!(back, c);
}

#[test]
fn muting_the_max_renormalizes() {
    let a = assessment(
        Side::Affected,
        |m| match m {
            "BIC" => 3.0,
            "TRI" => 1.5,
            _ => 1.0,
        },
        |_| 0.0,
    );
    let u = assessment(Side::Unaffected, |_| 1.0, |_| 0.0);
    let c = compare_bundles(&a, &u, &config()).unwrap();
    assert_eq!(c.significance("BIC", Side::Affected).unwrap().normalized_score, 1.0);
    let m = c.mute_muscle("BIC").unwrap();
    let best = m
        .muscles
        .iter()
        .filter(|x| x.muscle.name != "BIC")
        .flat_map(|x| {
            [x.sides.affected.significance.normalized_score, x.sides.unaffected.significance.normalized_score]
        })
        .fold(0.0, f64::max);
    assert_eq!(best, 1.0);
    assert!(m.h_max <= c.h_max);
}

#[test]
fn muting_a_zero_score_muscle_changes_nothing_else() {
    let (a, u) = planted_pair("BIC");
    let c = compare_bundles(&a, &u, &config()).unwrap();
    let m = c.mute_muscle("LT").unwrap();
    for (x, y) in c.muscles.iter().zip(&m.muscles).filter(|(x, _)| x.muscle.name != "LT") {
        for side in Side::BOTH {
            assert_eq!(
                x.sides.get(side).significance.normalized_score,
                y.sides.get(side).significance.normalized_score
            );
        }
    }
    assert_eq!(m.h_max, c.h_max);
}

#[test]
fn cannot_mute_everything() {
    let (a, u) = planted_pair("BIC");
    let mut c = compare_bundles(&a, &u, &config()).unwrap();
    let names: Vec<String> = c.muscles.iter().map(|m| m.muscle.name.clone()).collect();
    for name in &names[..names.len() - 1] {
        c = c.mute_muscle(name).unwrap();
    }
    let err = c.mute_muscle(names.last().unwrap()).unwrap_err();
    assert_eq!(err, Error::CannotMuteAll);
    assert_eq!(err.to_string(), "cannot mute all muscles");
    assert!(matches!(c.mute_muscle("XYZ"), Err(Error::UnknownMuscle(_))));
}

#[test]
fn unpaired_muscles_are_listed_not_scored() {
    let (mut a, u) = planted_pair("BIC");
    let extra = MuscleId::new("DEL", MuscleGroup::Pushing);
    let values = raw(0, 1.0, 0.0);
    a.muscles.insert("DEL".into(), MuscleRecording::single(RawEmgChannel::uniform(extra, RATE, 0.0, values)));
    let c = compare_bundles(&a, &u, &config()).unwrap();
    assert_eq!(c.unpaired, vec!["DEL".to_string()]);
    assert!(c.muscle("DEL").is_none());
}

#[test]
fn rejects_mismatched_inputs() {
    let (a, u) = planted_pair("BIC");
    let mut other = u.clone();
    other.patient_id = "P2".into();
    assert!(matches!(compare_bundles(&a, &other, &config()), Err(Error::MismatchedAssessments(_))));
    assert!(compare_bundles(&a, &a, &config()).is_err());
    let bad = CompareConfig { window_s: 0.0, ..config() };
    assert!(matches!(compare_bundles(&a, &u, &bad), Err(Error::InvalidParameter(_))));
}

#[test]
fn truncation_feeds_the_comparison() {
    let (a, u) = planted_pair("BIC");
    let full = compare_bundles(&a, &u, &config()).unwrap();
    let a2 = a.truncate(1.0, 4.0).unwrap();
    let u2 = u.truncate(1.0, 4.0).unwrap();
    let cut = compare_bundles(&a2, &u2, &config()).unwrap();
    let n_full = full.muscle("BIC").unwrap().sides.affected.chart.base.len();
    let n_cut = cut.muscle("BIC").unwrap().sides.affected.chart.base.len();
    assert!(n_cut < n_full);
    assert!(cut.muscle("BIC").unwrap().sides.affected.chart.base.times[0] >= 1.0);
}

#[test]
fn deterministic_bits() {
    let (a, u) = planted_pair("FDS");
    let x = compare_bundles(&a, &u, &config()).unwrap();
    let y = compare_bundles(&a, &u, &config()).unwrap();
    for (m, n) in x.muscles.iter().zip(&y.muscles) {
        for side in Side::BOTH {
            assert_eq!(m.sides.get(side).significance.score.to_bits(), n.sides.get(side).significance.score.to_bits());
        }
    }
    assert_eq!(x, y);
}

#[test]
fn amplitude_scaling_keeps_top_rank() {
    let mut previous_rank = usize::MAX;
    for alpha in [1.1, 1.5, 2.0, 3.0, 5.0, 8.0] {
        let a = assessment(Side::Affected, |m| if m == "PT" { alpha } else { 1.0 }, |_| 0.0);
        let u = assessment(Side::Unaffected, |_| 1.0, |_| 0.0);
        let c = compare_bundles(&a, &u, &config()).unwrap();
        let pt = c.significance("PT", Side::Affected).unwrap().divergence;
        let rank = 1 + c.muscles.iter().filter(|m| m.sides.affected.significance.divergence > pt).count();
        assert!(rank <= previous_rank, "alpha={alpha}");
        assert_eq!(rank, 1);
        previous_rank = rank;
    }
}
