//! Sweeps the share of nonlinear edges on the asia network and prints mean
//! SHD and Jaccard index of PC, PC-NNCL and NNCL.
//!
//!     cargo run --release --example sweep -- [reps] [n]

use nncl_core::exec::Executor;
use nncl_core::metrics::{score, GraphScore};
use nncl_core::nncl::{run_pipeline, Learner, PipelineConfig};
use nncl_core::simulate::{asia, assign_nonlinear, ground_truth, simulate, SimConfig, TruthPolicy};
use nncl_core::RngStream;
use nncl::parallel::Rayon;

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("expected a number"));
    let reps = args.next().unwrap_or(10);
    let n = args.next().unwrap_or(1000);
    let net = asia();
    let exec = Rayon;

    println!("{:>6}  {:>7} {:>7} {:>7}  {:>6} {:>6} {:>6}", "nonlin", "SHD pc", "pc-nncl", "nncl", "JI pc", "pc-nn", "nncl");
    for step in 0..=4 {
        let fraction = step as f64 / 4.0;
        let runs: Vec<[GraphScore; 3]> = exec.map(reps, |rep| {
            let root = RngStream::from_seed(42).child(step).child(rep as u64);
            let spec = assign_nonlinear(&net.dag, &net.names, fraction, &SimConfig::default(), &root.child(0)).unwrap();
            let data = simulate(&spec, n, &root.child(1)).unwrap();
            let truth = ground_truth(&spec, TruthPolicy::AllNonlinear).unwrap();
            let mut cfg = PipelineConfig::default();
            cfg.nncl.seed = rep as u64;
            let pc_nncl = run_pipeline(&data, &cfg, &Rayon).unwrap();
            cfg.learner = Learner::Empty;
            let nncl = run_pipeline(&data, &cfg, &Rayon).unwrap();
            [
                score(&pc_nncl.initial, &truth).unwrap(),
                score(&pc_nncl.state.graph, &truth).unwrap(),
                score(&nncl.state.graph, &truth).unwrap(),
            ]
        });
        let mean = |f: &dyn Fn(&[GraphScore; 3]) -> f64| runs.iter().map(f).sum::<f64>() / reps as f64;
        println!(
            "{:>5.0}%  {:>7.2} {:>7.2} {:>7.2}  {:>6.3} {:>6.3} {:>6.3}",
            fraction * 100.0,
            mean(&|r| r[0].shd as f64),
            mean(&|r| r[1].shd as f64),
            mean(&|r| r[2].shd as f64),
            mean(&|r| r[0].ji),
            mean(&|r| r[1].ji),
            mean(&|r| r[2].ji),
        );
    }
}
