use criterion::{criterion_group, criterion_main, Criterion};
use graphon_core::rng::rng_from_seed;
use graphon_core::search::{train_search, NetworkSpec, StageNetwork};
use graphon_core::{SearchConfig, SearchSetup, TaskSpec};
use std::hint::black_box;

fn gradients(c: &mut Criterion) {
    let setup = SearchSetup::new(&TaskSpec::default(), 0).unwrap();
    let config = SearchConfig::default();
    let spec = NetworkSpec {
        hidden: config.hidden,
        features: setup.task.feature_dim,
        classes: setup.task.classes,
        aggregation: config.aggregation,
        activation: config.activation,
    };
    let net = StageNetwork::new(spec, setup.candidates.clone(), (0..setup.task.nodes).collect()).unwrap();
    let params = net.init_params(0);
    let (train, _) = setup.task.data();
    let idx: Vec<usize> = (0..config.batch).collect();
    let (x, y) = train.rows(&idx);
    let noise = net.sample_noise(&mut rng_from_seed(0));
    c.bench_function("gradients_batch_32", |b| {
        b.iter(|| net.gradients(black_box(&params), x.view(), y.view(), &noise, 1.0))
    });
}

fn search(c: &mut Criterion) {
    let setup = SearchSetup::new(&TaskSpec::default(), 0).unwrap();
    let config = SearchConfig {
        epochs: 4,
        ..SearchConfig::default()
    };
    let mut group = c.benchmark_group("train_search");
    group.sample_size(10);
    group.bench_function("four_epochs", |b| b.iter(|| train_search(&setup, &config, 0).unwrap()));
    group.finish();
}

criterion_group!(benches, gradients, search);
criterion_main!(benches);
