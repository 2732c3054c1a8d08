mod common;

use std::fs;
use std::path::PathBuf;

use arbac_core::bank::{division_policy, generate_bank, BankConfig, Division, Instrumentation};
use arbac_core::{oracle_reach, parse_policy, reach, serialize_policy, SearchLimits};

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "arbac"))
        .collect();
    files.sort();
    assert!(files.len() >= 5);
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect()
}

#[test]
fn corpus_round_trips() {
    for (name, text) in corpus() {
        let policy = parse_policy(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canonical = serialize_policy(&policy).unwrap();
        assert_eq!(parse_policy(&canonical).unwrap(), policy, "{name}");
        assert_eq!(
            serialize_policy(&parse_policy(&canonical).unwrap()).unwrap(),
            canonical,
            "{name}"
        );
        if !text.starts_with("//") {
            assert_eq!(canonical, text, "{name} is not in canonical form");
        }
    }
}

#[test]
fn corpus_answers_match_oracle() {
    for (name, text) in corpus() {
        let policy = parse_policy(&text).unwrap();
        for q in &policy.queries {
            let oracle = oracle_reach(&policy, q).unwrap();
            let v = reach(&policy, q, SearchLimits::unlimited(), true).unwrap();
            assert!(v.outcome.same_answer(&oracle.outcome), "{name} {q}");
        }
    }
}

#[test]
fn division_file_matches_generator() {
    let text = fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus/fa_division.arbac"),
    )
    .unwrap();
    let generated = division_policy(Division::FinancialAnalyst, 1, common::user("newUser"));
    assert_eq!(serialize_policy(&generated).unwrap(), text);
}

#[test]
fn generated_banks_round_trip() {
    for branches in [1, 2, 18] {
        for instrumentation in [Instrumentation::None, Instrumentation::Both] {
            let policy =
                generate_bank(&BankConfig::new(branches).with_instrumentation(instrumentation))
                    .unwrap();
            let text = serialize_policy(&policy).unwrap();
            let parsed = parse_policy(&text).unwrap();
            assert_eq!(parsed, policy);
            assert_eq!(serialize_policy(&parsed).unwrap(), text);
        }
    }
}
