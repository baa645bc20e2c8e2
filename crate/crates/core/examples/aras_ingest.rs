//! Converts ARAS-style wide sensor rows into activation lines and counts
//! them. Reads rows from the file given as argument, or uses a few
//! built-in rows.
//!
//! cargo run --example aras_ingest -- path/to/DAY_1.txt

use occucount::csp::estimate_line;
use occucount::env::{parse_environment, ColumnAdapter};

const SAMPLE: &str = "\
0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 11 11
0 1 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 2
0 1 1 0 1 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 1 3
0 0 0 0 0 0 0 1 0 0 1 0 0 0 0 0 0 0 0 0 5 9
";

fn main() {
    let env = parse_environment(include_str!("../configs/aras_fc.env")).unwrap();
    let adapter = ColumnAdapter::parse(include_str!("../configs/aras_columns.map"), &env).unwrap();
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(p).expect("readable input"),
        None => SAMPLE.to_string(),
    };
    let lines = adapter.convert(&text, &env).unwrap();
    for line in lines.iter().take(20) {
        println!("{line}  ->  {}", estimate_line(&env, line).delta);
    }
    if lines.len() > 20 {
        println!("... {} rows", lines.len());
    }
}
