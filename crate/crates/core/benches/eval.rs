use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ris_qlearn::belief::generate_dataset;
use ris_qlearn::chansim::SystemConfig;
use ris_qlearn::codebook::build_codebook;
use ris_qlearn::exec::Execution;
use ris_qlearn::expcli::{evaluate_methods, ExperimentConfig, Method};
use ris_qlearn::protocol::Session;
use ris_qlearn::ssp::{build_state_space, default_q_grid};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn dataset(c: &mut Criterion) {
    let sys = SystemConfig::from_snr_db(64, 100, 20.0, 0).unwrap();
    let cb = build_codebook(&sys, 3, 0).unwrap();
    let mut group = c.benchmark_group("generate_dataset");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 500), &exec, |b, &exec| {
            b.iter(|| generate_dataset(&sys, &cb, 500, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let sys = SystemConfig::from_snr_db(64, 100, 20.0, 0).unwrap();
    let cb = build_codebook(&sys, 3, 0).unwrap();
    let ds = generate_dataset(&sys, &cb, 500, 1, Execution::Sequential).unwrap();
    let ss = build_state_space(8, &default_q_grid(), 0.9).unwrap();
    let session = Session {
        cfg: &sys,
        cb: &cb,
        ds: &ds,
        ss: &ss,
        eps_floor: ds.default_eps_floor(),
    };
    let cfg = ExperimentConfig {
        n_eval_channels: 200,
        methods: vec![Method::Exhaustive, Method::Hierarchical, Method::Random],
        ..ExperimentConfig::default()
    };
    let mut group = c.benchmark_group("evaluate_methods");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 200), &exec, |b, &exec| {
            b.iter(|| evaluate_methods(&cfg, &session, None, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dataset, evaluation);
criterion_main!(benches);
