use serde_json::{json, Value};

use entroseg::experiments::{make_beam_fixture, noise_sweep, run_beam_study, tangent_vs_hurst};
use entroseg::rng::RngSeed;
use entroseg::segmentation::{classify, segment, to_hough, SegmentationConfig, SegmentationReport};
use entroseg::signal::piecewise_test_fixture;

#[test]
fn segmentation_report_layout() {
    let s = piecewise_test_fixture();
    let cfg = SegmentationConfig::new(0.998);
    let segs = segment(s.x(), s.y(), &cfg).unwrap();
    let labels = classify(&to_hough(&segs).unwrap(), 0.25).unwrap();
    let v: Value =
        serde_json::to_value(SegmentationReport::new(&segs, &labels, &cfg, 0.25, false)).unwrap();

    let first = &v["segments"][0];
    let mut keys: Vec<&str> = first
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.as_str())
        .collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "a",
            "alpha_deg",
            "b",
            "end",
            "error",
            "label",
            "length",
            "position",
            "r2",
            "start"
        ]
    );
    assert_eq!(first["start"], 0);
    assert_eq!(first["end"], 20);
    assert_eq!(v["segments"][2]["label"], "singularity");
    assert_eq!(
        v["config"],
        json!({"rm2": 0.998, "max_lines": 256, "min_len": 2, "traversal": "left-anchored", "short_frac": 0.25, "entropy": false})
    );
}

#[test]
fn segmentation_csv_matches_json() {
    let s = piecewise_test_fixture();
    let cfg = SegmentationConfig::new(0.998);
    let segs = segment(s.x(), s.y(), &cfg).unwrap();
    let labels = classify(&to_hough(&segs).unwrap(), 0.25).unwrap();
    let report = SegmentationReport::new(&segs, &labels, &cfg, 0.25, false);
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[3].starts_with("29,30,"));
    assert!(rows[3].ends_with(",singularity"));
}

/// Parallel trials give bit-identical results to a single-threaded run.
#[test]
fn experiments_do_not_depend_on_thread_count() {
    let run = || {
        let sweep = noise_sweep(
            &piecewise_test_fixture(),
            &[0.0, 0.05],
            &[0.99, 0.998],
            4,
            12,
            RngSeed(4),
        )
        .unwrap();
        let tangent = tangent_vs_hurst(
            &[0.3, 0.7],
            32,
            8,
            &SegmentationConfig::new(0.988),
            RngSeed(4),
        )
        .unwrap();
        (
            serde_json::to_string(&sweep).unwrap(),
            serde_json::to_string(&tangent).unwrap(),
        )
    };
    let parallel = run();
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(parallel, serial);
}

#[test]
fn beam_report_layout() {
    let fx = make_beam_fixture(0.05, 1e-4, Some(RngSeed(1))).unwrap();
    let v = serde_json::to_value(run_beam_study(&fx, &SegmentationConfig::new(0.999)).unwrap())
        .unwrap();
    for key in [
        "severity",
        "noise_std",
        "damage_idx",
        "segments",
        "config",
        "hough",
        "capped",
        "interior_singularities",
        "damage_distance",
        "median_len_before",
        "median_len_after",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v.get("lines").is_none());
}
