//! Compares a few hand-written rules against the construction heuristics
//! to gauge how much headroom learned rules have.

use teamform_core::baselines::{ch1_solve, ch2_solve};
use teamform_core::evaluator::total_efficiency;
use teamform_core::gp::{Decoder, RuleTree};
use teamform_core::problem::{generate_instance, GeneratorParams};

fn main() {
    let rules = [
        "SCN",
        "(+ SCN (* 0.05 SCW))",
        "(+ SCN (* 0.15 SCW))",
        "(+ SCN (* 0.3 SCW))",
        "(+ SCN (* 0.6 SCW))",
        "SCW",
        "(+ (* 0.2 SCN) (* 0.3 (/ SCW RNP)))",
        "(+ SCN (* NCR 0.01))",
    ];
    for positions in [25, 50] {
        let mut wins = vec![0usize; rules.len()];
        let mut any_rule_wins = 0usize;
        let n = 12;
        for seed in 0..n {
            let inst =
                generate_instance(&GeneratorParams::with_positions(positions), seed).unwrap();
            let decoder = Decoder::new(&inst).unwrap();
            let ch = ch1_solve(&decoder)
                .eval
                .total_efficiency
                .max(ch2_solve(&decoder).eval.total_efficiency);
            let mut best_rule_te = 0.0f64;
            for (k, text) in rules.iter().enumerate() {
                let tree: RuleTree = text.parse().unwrap();
                let out = decoder.decode(&tree);
                let te = total_efficiency(&inst, decoder.match_matrix(), &out.assignment)
                    .unwrap()
                    .total_efficiency;
                best_rule_te = best_rule_te.max(te);
                if te > ch + 1e-9 {
                    wins[k] += 1;
                }
            }
            if best_rule_te > ch + 1e-9 {
                any_rule_wins += 1;
            }
            if seed < 4 {
                let c2 = ch2_solve(&decoder).eval.total_efficiency;
                let scw: RuleTree = "(+ SCN (* 0.15 SCW))".parse().unwrap();
                let out = decoder.decode(&scw);
                let te = total_efficiency(&inst, decoder.match_matrix(), &out.assignment)
                    .unwrap();
                println!(
                    "  P={positions} seed {seed}: maxCH {ch:.3} (ch2 {c2:.3}) scw-rule {:.3} (gamma {:?})",
                    te.total_efficiency, te.gamma
                );
            }
        }
        println!("P={positions}: per-rule wins over maxCH: {wins:?}; any-rule wins {any_rule_wins}/{n}");
    }
}
