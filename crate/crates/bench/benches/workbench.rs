//! Criterion benchmarks for the heavy paths of the workbench; filled in as
//! the corresponding modules land.

use criterion::{criterion_group, criterion_main, Criterion};

fn bench_placeholder(_c: &mut Criterion) {}

criterion_group!(benches, bench_placeholder);
criterion_main!(benches);
