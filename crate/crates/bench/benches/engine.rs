use criterion::{criterion_group, criterion_main, Criterion};
use solora_core::engine::{parse_scenario, preset, run_scenario};
use std::path::Path;

fn run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_scenario");
    group.sample_size(10);
    for name in ["sec631-bench-16mA", "sec632-three-panel"] {
        let sc = parse_scenario(preset(name).unwrap(), Path::new("."))
            .unwrap()
            .with_override("duration_s=20")
            .unwrap();
        group.bench_function(name, |b| b.iter(|| run_scenario(&sc).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, run);
criterion_main!(benches);
