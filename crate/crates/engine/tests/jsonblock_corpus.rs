use locot2v::jsonblock::parse_json_block;
use serde::Deserialize;
use serde_json::Value;

#[derive(Deserialize)]
struct Case {
    name: String,
    output: String,
    /// `null` when no value should be found.
    expected: Value,
}

#[test]
fn model_output_corpus() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/json_blocks.json")).unwrap();
    let cases: Vec<Case> = serde_json::from_str(&text).unwrap();
    assert_eq!(cases.len(), 20);
    for c in cases {
        match (parse_json_block(&c.output), c.expected) {
            (Ok(got), want) => assert_eq!(got, want, "{}", c.name),
            (Err(_), Value::Null) => {}
            (Err(e), want) => panic!("{}: expected {want}, got {e}", c.name),
        }
    }
}
