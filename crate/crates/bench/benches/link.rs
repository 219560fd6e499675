use ajwave_bench::short_link;
use ajwave_core::harness::{run_ber, ClipperConfig};
use ajwave_core::WaveformMode;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn ber(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_ber/2000_bits");
    g.sample_size(20);
    let optimized = short_link(2000);
    g.bench_function("optimized", |b| b.iter(|| black_box(run_ber(&optimized).unwrap())));
    let doublet_clip = ajwave_core::SimConfig {
        waveform_mode: WaveformMode::GaussianDoublet,
        clipper: ClipperConfig { enabled: true, k: 1.2 },
        ..short_link(2000)
    };
    g.bench_function("doublet_clipped", |b| b.iter(|| black_box(run_ber(&doublet_clip).unwrap())));
    g.finish();
}

criterion_group!(benches, ber);
criterion_main!(benches);
