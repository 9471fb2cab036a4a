//! Run one verification suite and print its checks:
//! `cargo run --example run_suite -- dickman [quick|full]`

use pd_core::verify::{run_suite, Budget};

fn main() {
    let suite = std::env::args().nth(1).unwrap_or_else(|| "core".into());
    let budget = match std::env::args().nth(2).as_deref() {
        Some("full") => Budget::Full,
        _ => Budget::Quick,
    };
    let rep = run_suite(&suite, budget, 424242).expect("suite failed to run");
    for c in &rep.checks {
        println!(
            "{} {} = {:.6e} (ref {:.6e}, tol {:.2e}){}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.reference,
            c.tolerance,
            c.note.as_deref().map(|n| format!("  [{n}]")).unwrap_or_default()
        );
    }
    println!(
        "suite {} ({:?}): {} in {:.1}s",
        rep.suite,
        rep.budget,
        if rep.pass { "pass" } else { "FAIL" },
        rep.runtime_s
    );
}
