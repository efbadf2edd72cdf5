use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gemtrail_core::gen::{self, LogShape, GEN_APP};
use gemtrail_core::{book, Audit, Execution, LedgerConfig, Strategy};

fn logs(n: usize) -> Vec<Vec<gemtrail_core::Event>> {
    let mut rng = gen::rng(42);
    (0..n)
        .map(|_| gen::random_log(&mut rng, &LogShape::default()))
        .collect()
}

fn replay(c: &mut Criterion) {
    let mut g = c.benchmark_group("replay_and_audit");
    g.sample_size(20);
    let config = LedgerConfig::new(Strategy::Fifo, "USD");
    for n in [100usize, 1000] {
        let batch = logs(n);
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            g.bench_with_input(BenchmarkId::new(label, n), &batch, |b, batch| {
                b.iter(|| {
                    let ledgers = book::replay_all(batch, GEN_APP, &config, exec);
                    let ok: Vec<_> = ledgers.into_iter().map(Result::unwrap).collect();
                    exec.map(&ok, |l| Audit::of(l).balanced())
                        .into_iter()
                        .all(|b| b)
                })
            });
        }
    }
    g.finish();
}

criterion_group!(benches, replay);
criterion_main!(benches);
