use std::hint::black_box;

use bandshift::detection::{difference_normalized, normalize, threshold_level, ThresholdMode};
use bandshift::kinematics::select_adjustments;
use bandshift::pipeline::{analyze, detect, detection_report, AnalysisConfig, DetectionConfig};
use bandshift::sim::simulate;
use bandshift::{Band, Vec2};
use bandshift_bench::{scene, scene_script};
use criterion::{criterion_group, criterion_main, Criterion};

fn bench_simulate(c: &mut Criterion) {
    let script = scene_script(256, 4);
    c.bench_function("simulate_256", |b| b.iter(|| simulate(black_box(&script)).unwrap()));
}

fn bench_stages(c: &mut Criterion) {
    let sim = scene(512, 6);
    let a = normalize(sim.scene.band(Band::Yellow));
    let r = normalize(sim.scene.band(Band::Red));
    c.bench_function("normalize_512", |b| b.iter(|| normalize(black_box(sim.scene.band(Band::Yellow)))));
    c.bench_function("difference_512", |b| b.iter(|| difference_normalized(black_box(&a), black_box(&r)).unwrap()));
    let d = difference_normalized(&a, &r).unwrap();
    c.bench_function("threshold_level_512", |b| {
        b.iter(|| threshold_level(black_box(&d.values), ThresholdMode::default(), 5.0).unwrap())
    });
}

fn bench_pipeline(c: &mut Criterion) {
    let sim = scene(512, 6);
    let config = DetectionConfig::default();
    c.bench_function("detect_512", |b| b.iter(|| detect(black_box(&sim.scene), &config).unwrap()));
    let (report, _) = detection_report(&sim.scene, &config).unwrap();
    let timing = sim.scene.timing().unwrap();
    let analysis = AnalysisConfig::default();
    c.bench_function("analyze_512", |b| b.iter(|| analyze(black_box(&report), &timing, &analysis).unwrap()));
}

fn bench_adjustments(c: &mut Criterion) {
    let d = Some(Vec2::new(20.0, 15.0));
    let mut displacements = vec![d; 7];
    displacements[3] = Some(Vec2::new(20.0, 15.0 + 1194.6));
    c.bench_function("select_adjustments_7", |b| {
        b.iter(|| select_adjustments(black_box(&displacements), 0.396, 0.17).unwrap())
    });
}

criterion_group!(benches, bench_simulate, bench_stages, bench_pipeline, bench_adjustments);
criterion_main!(benches);
