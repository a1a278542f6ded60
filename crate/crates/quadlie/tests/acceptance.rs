//! End-to-end acceptance runs: one line of output per criterion, every
//! criterion exercised even when an earlier one fails, exact arithmetic
//! throughout.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use quadlie::suite::criteria;

fn panic_text(e: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = e.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = e.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic without message".to_string()
    }
}

#[test]
fn acceptance_criteria() {
    let mut failures = Vec::new();
    for (idx, criterion) in criteria().into_iter().enumerate() {
        let n = idx + 1;
        let label = criterion.label;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion.run));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(()) => {
                if let Some(b) = criterion.budget.filter(|b| start.elapsed() > *b) {
                    println!(
                        "criterion {n} ({label}): FAIL (exceeded {} ms budget at {ms} ms)",
                        b.as_millis()
                    );
                    failures.push(format!("criterion {n} over budget"));
                } else {
                    println!("criterion {n} ({label}): pass [{ms} ms]");
                }
            }
            Err(e) => {
                let msg = panic_text(e);
                println!("criterion {n} ({label}): FAIL ({msg}) [{ms} ms]");
                failures.push(format!("criterion {n}: {msg}"));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("; "));
}
