use std::fs;

use actigraph::dataset::{load_dataset, Corpus, DatasetFormat};
use actigraph::tokenizer::{detokenize, encode_sample, tokenize, BOS, SEP};
use actigraph::Error;

#[test]
fn byte_tokenization() {
    assert_eq!(tokenize("AB"), vec![65, 66]);
    assert!(tokenize("").is_empty());
    let s = "naïve — ünïcode ✓";
    assert_eq!(detokenize(&tokenize(s)), s);
    assert_eq!(encode_sample("hi", 2), vec![BOS, 104]);
}

#[test]
fn text_records_split_on_blank_lines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two.txt");
    fs::write(&p, "first line\ncontinues\n\n  \nsecond\n").unwrap();
    let c = load_dataset(&p, DatasetFormat::Text, None).unwrap();
    assert_eq!(c.name, "two");
    assert_eq!(c.records.len(), 2);
    assert!(c.records[0].starts_with("first line"));
    assert_eq!(c.records[1], "second");
}

#[test]
fn jsonl_records_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.jsonl");
    fs::write(&p, "{\"text\": \"a\"}\n{\"text\": \"b\", \"x\": 1}\n{\"text\": \"c\"}\n").unwrap();
    let c = load_dataset(&p, DatasetFormat::from_path(&p), Some("text")).unwrap();
    assert_eq!(c.records, vec!["a", "b", "c"]);
    assert_eq!(c.token_stream(), &[97, SEP, 98, SEP, 99]);
}

#[test]
fn malformed_jsonl_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.jsonl");
    fs::write(&p, "{\"text\": \"a\"}\n{not json\n{\"text\": \"c\"}\n").unwrap();
    match load_dataset(&p, DatasetFormat::Jsonl, Some("text")) {
        Err(Error::Data(msg)) => assert!(msg.contains("line 2"), "{msg}"),
        other => panic!("{other:?}"),
    }
    fs::write(&p, "{\"text\": \"a\"}\n{\"body\": \"b\"}\n").unwrap();
    match load_dataset(&p, DatasetFormat::Jsonl, Some("text")) {
        Err(Error::Data(msg)) => assert!(msg.contains("line 2") && msg.contains("text"), "{msg}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        load_dataset(dir.path().join("missing.txt"), DatasetFormat::Text, None),
        Err(Error::Io { .. })
    ));
}

#[test]
fn samples_skip_records_without_targets() {
    let c = Corpus::new("c", vec!["".into(), "x".into(), "long record".into()]);
    let s = c.samples(5);
    assert_eq!(s, vec![vec![BOS, 120], vec![BOS, 108, 111, 110, 103]]);
}
