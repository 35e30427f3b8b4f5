use qclab::verify::{run_criterion, VerifyOptions};
use std::io::Write;

#[test]
fn acceptance_criteria() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    // written to the stream directly so the lines survive output capture
    let mut log = std::io::stderr();
    for id in 1..=13 {
        let r = run_criterion(id, &opts);
        writeln!(log, "{}", r.line()).unwrap();
        if !r.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
