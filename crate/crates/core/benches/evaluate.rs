use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use moca_core::engine::{evaluate_batch, evaluate_with};
use moca_core::model::{
    AgileElement, CultureLevel, CulturalMetric, ElementKind, ImpactRule, MetricSource, Sign,
    StatedLevel,
};
use moca_core::{seed, CulturalProfile, EvaluationContext, Execution, KnowledgeBase};

/// 8 metrics x 200 elements with one rule per cell.
fn dense_kb() -> KnowledgeBase {
    let metrics: Vec<CulturalMetric> = (0..8)
        .map(|i| CulturalMetric {
            id: format!("M{i}"),
            name: format!("metric {i}"),
            level: CultureLevel::National,
            low_pole: "low".into(),
            high_pole: "high".into(),
            source: MetricSource::Hofstede,
        })
        .collect();
    let elements: Vec<AgileElement> = (0..200)
        .map(|i| AgileElement {
            id: format!("e{i:03}"),
            name: format!("element {i}"),
            kind: ElementKind::Role,
            category: None,
            source_methods: vec![],
        })
        .collect();
    let mut rules = Vec::new();
    for m in &metrics {
        for (j, e) in elements.iter().enumerate() {
            rules.push(ImpactRule {
                id: format!("{}_{}", m.id, e.id),
                title: None,
                condition: None,
                metric: m.id.clone(),
                stated_level: if j % 2 == 0 { StatedLevel::High } else { StatedLevel::Low },
                sign: if j % 3 == 0 { Sign::Negative } else { Sign::Positive },
                element: e.id.clone(),
                rationale: None,
            });
        }
    }
    KnowledgeBase::from_parts(metrics, elements, vec![], rules, None).unwrap()
}

/// Profiles sweeping each metric across the scale.
fn sweep(n: usize, metrics: &[&str]) -> Vec<EvaluationContext> {
    (0..n)
        .map(|k| {
            let mut p = CulturalProfile::new(format!("s{k}"));
            for (i, m) in metrics.iter().enumerate() {
                p = p.with(m, ((k * 37 + i * 13) % 101) as i64);
            }
            EvaluationContext::new(p).with_flag("manager_attends_meeting")
        })
        .collect()
}

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn bench_single_context(c: &mut Criterion) {
    let kb = dense_kb();
    let ctx = sweep(1, &["M0", "M1", "M2", "M3", "M4", "M5", "M6", "M7"]).remove(0);
    let mut group = c.benchmark_group("evaluate_dense_kb");
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| evaluate_with(&kb, &ctx, exec).unwrap()));
    }
    group.finish();
}

fn bench_batch(c: &mut Criterion) {
    let seed_kb = seed::knowledge_base();
    let dense = dense_kb();
    let seed_ctxs = sweep(1000, &["PDI", "UAI", "IDV", "MAS", "LTO", "IVR", "OPS", "OF"]);
    let dense_ctxs = sweep(200, &["M0", "M1", "M2", "M3", "M4", "M5", "M6", "M7"]);
    let mut group = c.benchmark_group("evaluate_batch");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new("seed_1000_profiles", name), &exec, |b, &exec| {
            b.iter(|| evaluate_batch(&seed_kb, &seed_ctxs, exec))
        });
        group.bench_with_input(BenchmarkId::new("dense_200_profiles", name), &exec, |b, &exec| {
            b.iter(|| evaluate_batch(&dense, &dense_ctxs, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_single_context, bench_batch);
criterion_main!(benches);
