mod common;

use std::collections::HashMap;

use shadowjob::corpus::ingest;
use shadowjob::metrics::{file_change_fix_lines, find_file_change, resolution_distance};
use shadowjob::simulate::{read_manifest, Distribution, MANIFEST_FILE};
use shadowjob::{analyze, generate, ErrorType, ScenarioSpec};

fn spec(seed: u64, n: usize) -> ScenarioSpec {
    ScenarioSpec {
        seed,
        n_series: n,
        unresolved_prob: 0.1,
        ..ScenarioSpec::default()
    }
}

#[test]
fn fixes_apply_to_the_pre_fix_file() {
    let corpus = generate(&spec(3, 400)).unwrap();
    let patches: HashMap<&str, _> = corpus
        .patches
        .iter()
        .map(|(id, p)| (id.as_str(), p))
        .collect();
    let builds: HashMap<&str, _> = corpus
        .builds
        .iter()
        .map(|b| (b.build_id.as_str(), b))
        .collect();
    let mut checked = 0;
    for truth in &corpus.manifest.series {
        let patch = patches[builds[truth.fixing_build_id.as_str()].patch_id.as_str()];
        let (Some(source), Some(file)) = (truth.pre_fix_source(), truth.file.as_deref()) else {
            continue;
        };
        let fc = find_file_change(patch, file).expect("fix touches the reported file");
        let fixed =
            common::apply(&source, fc).unwrap_or_else(|e| panic!("{}: {e}", truth.fixing_build_id));
        assert_eq!(
            fixed.len() as i64 - source.len() as i64,
            fc.additions() as i64 - fc.deletions() as i64
        );
        assert_eq!(file_change_fix_lines(fc), truth.fix_lines);
        let e = truth.error_line.unwrap();
        assert_eq!(
            resolution_distance(e, &truth.fix_lines),
            truth.true_distance
        );
        checked += 1;
    }
    assert!(checked > 300);
}

#[test]
fn disk_round_trip_matches_memory() {
    let corpus = generate(&spec(8, 150)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    corpus.write_to(dir.path()).unwrap();
    let store = ingest(dir.path()).unwrap();
    assert_eq!(store.digest(), corpus.to_store().unwrap().digest());
    for stream in &corpus.manifest.streams {
        let ids: Vec<&str> = store
            .streams()
            .find(|(c, _)| *c == stream.change_id)
            .unwrap()
            .1
            .iter()
            .map(|b| b.build_id.as_str())
            .collect();
        assert_eq!(ids, stream.build_ids);
    }
    assert_eq!(
        read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap(),
        corpus.manifest.series
    );

    let (linkage, records) = analyze(&store).unwrap();
    assert_eq!(linkage.unresolved.len(), corpus.manifest.unresolved_runs);
    assert_eq!(records.len(), corpus.manifest.series.len());
}

#[test]
fn alien_messages_become_unclassified() {
    let corpus = generate(&ScenarioSpec {
        seed: 21,
        n_series: 5000,
        alien_message_prob: 0.02,
        ..ScenarioSpec::default()
    })
    .unwrap();
    let (_, records) = analyze(&corpus.to_store().unwrap()).unwrap();
    let planted = corpus
        .manifest
        .series
        .iter()
        .filter(|s| s.error_type == ErrorType::Unclassified)
        .count();
    let found = records
        .iter()
        .filter(|r| r.error.error_type == ErrorType::Unclassified)
        .count();
    assert_eq!(found, planted);
    let share = found as f64 / records.len() as f64;
    assert!((share - 0.02).abs() < 0.01, "{share}");
}

#[test]
fn forced_error_line_and_distance() {
    let corpus = generate(&ScenarioSpec {
        n_series: 30,
        type_mixture: [(ErrorType::HasNoMemberNamed, 1.0)].into_iter().collect(),
        size_model: Distribution::Fixed { value: 2 },
        distance_model: Distribution::Fixed { value: 2 },
        error_line_model: Some(Distribution::Fixed { value: 42 }),
        distractor_prob: 1.0,
        ..ScenarioSpec::default()
    })
    .unwrap();
    let (_, records) = analyze(&corpus.to_store().unwrap()).unwrap();
    assert_eq!(records.len(), 30);
    for r in &records {
        assert_eq!(r.error.diagnostic.line, Some(42));
        assert_eq!(r.resolution_size, 2);
        assert_eq!(r.resolution_distance, Some(2));
    }
}
