//! Trains RBMs on the XOR truth table and prints the logical rule carried by each
//! hidden unit, ordered by score, followed by aggregate statistics.
//!
//! `cargo run --example xor_rules -- [seeds] [hidden]`

use rbm_transfer::experiment::xor::{format_rule_table, run_xor, XorSettings};

fn main() -> rbm_transfer::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let hidden = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let settings = XorSettings { hidden, seeds, ..XorSettings::default() };
    let report = run_xor(&settings, 2024)?;

    print!("{}", format_rule_table(&report.runs[0]));
    let s = &report.summary;
    println!();
    println!("seeds                         {}", s.seeds);
    println!("consistent rules              {} (mean score {:.4})", s.rules_consistent, s.mean_consistent_score);
    println!("inconsistent rules            {} (mean score {:.4})", s.rules_inconsistent, s.mean_inconsistent_score);
    println!("top-ranked rule consistent    {:.0}%", 100.0 * s.top_rule_consistent_fraction);
    println!("log-likelihood improved       {}/{}", s.likelihood_improved, s.seeds);
    println!("reconstruction improved       {}/{}", s.reconstruction_improved, s.seeds);
    Ok(())
}
