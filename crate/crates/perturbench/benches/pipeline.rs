//! Parallel vs sequential throughput for the batch stages: manifest
//! build/verify and scoring. The parallel variants go through the public
//! API (rayon under the default `parallel` feature); the sequential
//! baselines run the same per-item work in a plain loop.
//!
//! Run with: cargo bench --bench pipeline

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use perturbench::benchgen::{build_benchmark, pair_distractor, verify_manifest};
use perturbench::prompt::Protocol;
use perturbench::runner::{FinishReason, ModelResponse};
use perturbench::sanitize::{sanitize_text, ProblemRecord};
use perturbench::scoring::classify_sample;
use perturbench::transform::{self, TransformId, TransformSpec};

fn sample_records(n: usize) -> Vec<ProblemRecord> {
    (0..n)
        .map(|i| ProblemRecord {
            id: format!("p{i:03}"),
            statement: sanitize_text(&format!(
                "Let $x_{{{i}}}$ be the least prime number greater than {i}. \
                 Find the remainder when $x_{{{i}}}^{{2}} + {i}$ is divided by 1000."
            )),
            answer: (i as u32 * 117) % 1000,
            source: "bench".into(),
        })
        .collect()
}

fn all_specs() -> Vec<TransformSpec> {
    TransformId::ALL
        .iter()
        .map(|&id| TransformSpec::with_defaults(id))
        .collect()
}

fn bench_manifest_build(c: &mut Criterion) {
    let records = sample_records(30);
    let specs = all_specs();

    let mut group = c.benchmark_group("manifest_build");
    group.bench_function("parallel", |b| {
        b.iter(|| build_benchmark(black_box(&records), black_box(&specs), 42).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            // The same encode + invert-verify work as build_benchmark, in a
            // plain loop.
            let mut count = 0usize;
            for (i, record) in records.iter().enumerate() {
                for spec in &specs {
                    let seeded = spec.with_seed(42 ^ i as u64);
                    let distractor = if seeded.id.needs_distractor() {
                        Some(pair_distractor(&records, i).unwrap())
                    } else {
                        None
                    };
                    let out = transform::encode(
                        &seeded,
                        &record.statement,
                        distractor.map(|d| &d.statement),
                    )
                    .unwrap();
                    let decoded = transform::invert(&seeded, &out).unwrap();
                    assert_eq!(decoded, record.statement.as_str());
                    count += 1;
                }
            }
            black_box(count)
        })
    });
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let records = sample_records(30);
    let specs = all_specs();
    let manifest = build_benchmark(&records, &specs, 42).unwrap();

    c.bench_function("verify_manifest", |b| {
        b.iter(|| {
            let failures = verify_manifest(black_box(&manifest));
            assert!(failures.is_empty());
        })
    });
}

fn bench_scoring(c: &mut Criterion) {
    let responses: Vec<(ModelResponse, u32)> = (0..2000)
        .map(|i| {
            let text = format!(
                "Decoding first: the statement says {i}. Reasoning follows. \
                 The halves rejoin and the product is computed. \\boxed{{{}}}",
                i % 1000
            );
            (
                ModelResponse {
                    text,
                    finish_reason: if i % 17 == 0 {
                        FinishReason::Length
                    } else {
                        FinishReason::Stop
                    },
                    prompt_tokens: 100,
                    completion_tokens: 900,
                    latency_ms: 3,
                },
                (i % 1000) as u32,
            )
        })
        .collect();

    let mut group = c.benchmark_group("scoring");
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let verdicts = perturbench::exec::map_ordered(black_box(&responses), |(r, truth)| {
                classify_sample(r, *truth, Protocol::Transform)
            });
            black_box(verdicts)
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let verdicts = perturbench::exec::map_ordered_seq(black_box(&responses), |(r, truth)| {
                classify_sample(r, *truth, Protocol::Transform)
            });
            black_box(verdicts)
        })
    });
    group.finish();
}

fn bench_single_encoders(c: &mut Criterion) {
    let statement = sanitize_text(
        "Let $p$ be the least prime number for which there exists a positive \
         integer $n$ such that $n^{4}+1$ is divisible by $p^{2}$. Find the \
         least positive integer $m$ such that $m^{4}+1$ is divisible by $p^{2}$.",
    );
    let mut group = c.benchmark_group("encode");
    for id in [
        TransformId::SymbolReversal,
        TransformId::RailFence,
        TransformId::RectanglePerimeter,
        TransformId::SnakeVertical,
        TransformId::Wrappers,
    ] {
        let spec = TransformSpec::with_defaults(id);
        group.bench_function(id.as_str(), |b| {
            b.iter(|| transform::encode(black_box(&spec), black_box(&statement), None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_manifest_build,
    bench_verify,
    bench_scoring,
    bench_single_encoders
);
criterion_main!(benches);
