use std::fs;
use std::path::Path;

use committee::corpus_file::load_corpus;
use committee::snapshot::{
    persist, read_snapshot, read_trace, restore_dir, restore_folder, snapshot_path, trace_path, FolderSnapshot,
    SnapshotError,
};
use committee_core::{Action, Engine, EngineConfig, FeedbackEvent, Folder};

fn engine() -> Engine {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy_graph_a.jsonl");
    Engine::new(load_corpus(&path).unwrap(), EngineConfig::default())
}

fn event(action: Action, subject: &str, timestamp: u64) -> FeedbackEvent {
    FeedbackEvent {
        action,
        subject_id: subject.into(),
        timestamp,
    }
}

fn busy_folder(e: &Engine, id: &str) -> Folder {
    let (mut f, _) = Folder::create(e, id, "graph mining", &["P2", "P3"], Some("A4"), 3, 0, 19_600).unwrap();
    f.load_batch(e, 1).unwrap();
    f.record_feedback(e, &event(Action::SaveAuthor, "A1", 2), 19_600).unwrap();
    f.record_feedback(e, &event(Action::DownvotePaper, "P4", 3), 19_600).unwrap();
    f.record_feedback(e, &event(Action::BlockAuthor, "A3", 4), 19_600).unwrap();
    f.load_batch(e, 5).unwrap();
    f
}

#[test]
fn round_trip_preserves_folder_and_next_batch() {
    let e = engine();
    let dir = tempfile::tempdir().unwrap();
    let mut live = busy_folder(&e, "gm");
    assert_eq!(persist(dir.path(), &e, &live, 0).unwrap(), live.trace().len());

    let snap = read_snapshot(&snapshot_path(dir.path(), "gm")).unwrap();
    assert_eq!(snap.format_version, 1);
    assert_eq!(snap.committee, ["A1"]);
    assert_eq!(snap.blocked, ["A3"]);
    assert_eq!(snap.user_author_id.as_deref(), Some("A4"));
    assert_eq!(snap.model_version, 3);

    let mut restored = restore_folder(&e, dir.path(), "gm").unwrap();
    assert_eq!(restored, live);
    assert_eq!(restored.model(), live.model());
    assert_eq!(restored.load_batch(&e, 6).unwrap(), live.load_batch(&e, 6).unwrap());
}

#[test]
fn trace_is_appended_incrementally() {
    let e = engine();
    let dir = tempfile::tempdir().unwrap();
    let mut f = busy_folder(&e, "gm");
    let flushed = persist(dir.path(), &e, &f, 0).unwrap();
    f.open_author(&e, "A2", None, 10).unwrap();
    f.search_authors(&e, "a", 11).unwrap();
    assert_eq!(persist(dir.path(), &e, &f, flushed).unwrap(), flushed + 2);

    let trace = read_trace(&trace_path(dir.path(), "gm")).unwrap();
    assert_eq!(trace, f.trace());
    let actions: Vec<&str> = trace.iter().map(|t| t.action.name()).collect();
    assert_eq!(
        actions,
        [
            "load_batch",
            "save_author",
            "downvote_paper",
            "block_author",
            "load_batch",
            "open_author_details",
            "search_author"
        ]
    );
    assert!(trace.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
}

#[test]
fn restore_dir_loads_independent_folders() {
    let e = engine();
    let dir = tempfile::tempdir().unwrap();
    let a = busy_folder(&e, "a");
    let (b, _) = Folder::create(&e, "b", "protein", &["P5"], None, 9, 0, 19_600).unwrap();
    persist(dir.path(), &e, &a, 0).unwrap();
    persist(dir.path(), &e, &b, 0).unwrap();

    let folders = restore_dir(&e, dir.path()).unwrap();
    assert_eq!(folders.len(), 2);
    assert_eq!(folders[0], a);
    assert_eq!(folders[1], b);
    assert_ne!(folders[0].model_version(), folders[1].model_version());
}

#[test]
fn empty_or_damaged_directories_are_errors() {
    let e = engine();
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(restore_dir(&e, dir.path()), Err(SnapshotError::Empty(_))));

    let f = busy_folder(&e, "gm");
    persist(dir.path(), &e, &f, 0).unwrap();
    let trace = trace_path(dir.path(), "gm");
    let mut text = fs::read_to_string(&trace).unwrap();
    text.push_str("{not json\n");
    fs::write(&trace, text).unwrap();
    match restore_folder(&e, dir.path(), "gm") {
        Err(SnapshotError::CorruptTrace { line, .. }) => assert_eq!(line, f.trace().len() + 1),
        other => panic!("expected a corrupt trace error, got {other:?}"),
    }

    let mut snap = FolderSnapshot::capture(&e.corpus, &f);
    snap.format_version = 2;
    fs::write(snapshot_path(dir.path(), "gm"), serde_json::to_string(&snap).unwrap()).unwrap();
    assert!(matches!(restore_folder(&e, dir.path(), "gm"), Err(SnapshotError::Version { found: 2 })));

    fs::write(snapshot_path(dir.path(), "gm"), "{").unwrap();
    assert!(matches!(restore_folder(&e, dir.path(), "gm"), Err(SnapshotError::Corrupt { .. })));
}

#[test]
fn snapshot_against_a_different_corpus_is_rejected() {
    let e = engine();
    let dir = tempfile::tempdir().unwrap();
    persist(dir.path(), &e, &busy_folder(&e, "gm"), 0).unwrap();

    let mut records = committee::corpus_file::read_records(
        fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy_graph_a.jsonl"))
            .unwrap()
            .as_bytes(),
    )
    .unwrap();
    records.retain(|(_, r)| r.paper_id != "P3");
    for (_, r) in &mut records {
        r.reference_ids.retain(|x| x != "P3");
    }
    let smaller = Engine::new(
        committee_core::CorpusIndex::from_records(records.into_iter().map(|(_, r)| r).collect()).unwrap(),
        EngineConfig::default(),
    );
    assert!(matches!(restore_folder(&smaller, dir.path(), "gm"), Err(SnapshotError::Engine(_))));
}
