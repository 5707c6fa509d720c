//! Rough decode/evaluation timing probe across instance sizes.

use std::time::Instant;

use teamform_core::evaluator::total_efficiency;
use teamform_core::gp::{init_population, Decoder, GpConfig};
use teamform_core::problem::{generate_instance, GeneratorParams};
use teamform_core::rng::{stream, StreamId};
use teamform_core::surrogate::decision_vector;
use teamform_core::train::{run_training, TrainConfig};

fn main() {
    for positions in [25, 50, 75, 100] {
        let inst = generate_instance(&GeneratorParams::with_positions(positions), 1).unwrap();
        let decoder = Decoder::new(&inst).unwrap();
        let cfg = GpConfig::default();
        let trees = init_population(100, &cfg, &mut stream(3, StreamId::Test)).unwrap();

        let t0 = Instant::now();
        let mut sink = 0usize;
        for tree in &trees {
            sink += decoder.decode(tree).assignment.len();
        }
        let decode_ms = t0.elapsed().as_secs_f64() * 1000.0 / trees.len() as f64;

        let t0 = Instant::now();
        for tree in &trees {
            sink += decision_vector(tree, &decoder).ranks.len();
        }
        let traced_ms = t0.elapsed().as_secs_f64() * 1000.0 / trees.len() as f64;

        let outcomes: Vec<_> = trees.iter().map(|t| decoder.decode(t)).collect();
        let t0 = Instant::now();
        let mut te_sum = 0.0;
        for o in &outcomes {
            te_sum += total_efficiency(&inst, decoder.match_matrix(), &o.assignment)
                .unwrap()
                .total_efficiency;
        }
        let eval_ms = t0.elapsed().as_secs_f64() * 1000.0 / outcomes.len() as f64;

        println!(
            "P={positions:3}  decode {decode_ms:7.3} ms  traced {traced_ms:7.3} ms  eval {eval_ms:7.3} ms   (sink {sink}, te {te_sum:.2})"
        );
    }

    for positions in [25, 50] {
        let inst = generate_instance(&GeneratorParams::with_positions(positions), 1).unwrap();
        let t0 = Instant::now();
        let out = run_training(&inst, &TrainConfig::default(), 7).unwrap();
        let on = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let cfg_off = TrainConfig {
            surrogate: false,
            ..TrainConfig::default()
        };
        let out_off = run_training(&inst, &cfg_off, 7).unwrap();
        let off = t0.elapsed().as_secs_f64();
        println!(
            "P={positions:3}  train on {on:6.2} s (te {:.2}, evals {})  off {off:6.2} s (te {:.2}, evals {})",
            out.best_te, out.real_evals, out_off.best_te, out_off.real_evals
        );
    }
}
