//! Measures how often greedy constructions strand or miss the optimum on
//! generated instances, across sizes and seeds.

use teamform_core::baselines::{ch1_solve, ch2_solve};
use teamform_core::evaluator::brute_force_optimum;
use teamform_core::gp::{init_population, Decoder, GpConfig};
use teamform_core::problem::{generate_instance, GeneratorParams};
use teamform_core::rng::{stream, StreamId};
use teamform_core::train::{run_training, TrainConfig};

fn main() {
    // Tiny instances: greedy-reachable best vs the exhaustive optimum.
    let tiny = GeneratorParams {
        num_positions: 3,
        candidate_ratio: 2.5,
        ..GeneratorParams::default()
    };
    let mut worst_ratio: f64 = 1.0;
    let mut below95 = 0;
    for seed in 0..20 {
        let inst = generate_instance(&tiny, seed).unwrap();
        let decoder = Decoder::new(&inst).unwrap();
        let opt = brute_force_optimum(&inst).unwrap().best.unwrap().1;
        // Probe the reachable set: many random rules plus a short training
        // run at the acceptance budget.
        let cfg = GpConfig::default();
        let trees = init_population(400, &cfg, &mut stream(seed, StreamId::Test)).unwrap();
        let mut best = 0.0f64;
        for t in &trees {
            let out = decoder.decode(t);
            let te = teamform_core::evaluator::total_efficiency(
                &inst,
                decoder.match_matrix(),
                &out.assignment,
            )
            .unwrap()
            .total_efficiency;
            best = best.max(te);
        }
        let trained = run_training(
            &inst,
            &TrainConfig {
                generations: 30,
                gp: GpConfig { pop_size: 30, ..Default::default() },
                ..TrainConfig::default()
            },
            seed,
        )
        .unwrap()
        .best_te;
        let ratio = best.max(trained) / opt;
        worst_ratio = worst_ratio.min(ratio);
        if ratio < 0.95 {
            below95 += 1;
            println!("tiny seed {seed}: reachable/opt = {ratio:.3} (trained {:.3})", trained / opt);
        }
    }
    println!("tiny: worst reachable/opt {worst_ratio:.3}, below-95% on {below95}/20\n");

    // Mid sizes: construction-heuristic and quick-trained feasibility.
    for positions in [25, 50, 75] {
        let mut ch1_ok = 0;
        let mut ch2_ok = 0;
        let mut rl_ok = 0;
        let mut rl_beats = 0;
        let mut rl_ties = 0;
        let n = 12;
        for seed in 0..n {
            let inst =
                generate_instance(&GeneratorParams::with_positions(positions), seed).unwrap();
            let decoder = Decoder::new(&inst).unwrap();
            let c1 = ch1_solve(&decoder);
            let c2 = ch2_solve(&decoder);
            ch1_ok += usize::from(c1.eval.feasible);
            ch2_ok += usize::from(c2.eval.feasible);
            let cfg = TrainConfig {
                generations: 30,
                gp: teamform_core::gp::GpConfig { pop_size: 40, ..Default::default() },
                ..TrainConfig::default()
            };
            let out = run_training(&inst, &cfg, seed).unwrap();
            rl_ok += usize::from(out.best_te > 0.0);
            let ch_best = c1.eval.total_efficiency.max(c2.eval.total_efficiency);
            if out.best_te > ch_best + 1e-9 {
                rl_beats += 1;
            } else if (out.best_te - ch_best).abs() <= 1e-9 {
                rl_ties += 1;
            }
        }
        println!(
            "P={positions}: CH1 feasible {ch1_ok}/{n}, CH2 {ch2_ok}/{n}, RL-GP>0 {rl_ok}/{n}, RL>maxCH {rl_beats}/{n}, ties {rl_ties}/{n}"
        );
    }
}
