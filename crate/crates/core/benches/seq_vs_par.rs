use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ellconn::connections::{direct_image_matrix, Rank1Connection};
use ellconn::curves::BiellipticCover;
use ellconn::monodromy::{standard_loops, transport_monodromy, transport_monodromy_seq, TransportSettings};
use ellconn::C64;

fn configs() -> Vec<(&'static str, BiellipticCover, Rank1Connection)> {
    let cov = BiellipticCover::from_real(2.0, 3.0).unwrap();
    let trivial = Rank1Connection::trivial(C64::new(0.3, 0.1), C64::new(0.2, -0.4));
    let cx = BiellipticCover::new(C64::new(1.8, 0.3), C64::new(3.5, -0.2)).unwrap();
    let q1 = cx.point_at(C64::new(0.7, 0.4), 1.0);
    let q2 = cx.point_at(C64::new(-0.5, 0.9), -1.0);
    let general = Rank1Connection::points(C64::new(0.2, -0.1), C64::new(0.4, 0.3), q1, q2);
    vec![("trivial", cov, trivial), ("general", cx, general)]
}

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("transport_monodromy");
    g.sample_size(10);
    let settings = TransportSettings::default();
    for (name, cov, conn) in configs() {
        let a = direct_image_matrix(&conn, &cov).unwrap();
        let loops = standard_loops(&cov, &a.avoid_x()).unwrap();
        g.bench_with_input(BenchmarkId::new("sequential", name), &(), |b, _| {
            b.iter(|| transport_monodromy_seq(&conn, &cov, &loops, &settings).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("parallel", name), &(), |b, _| {
            b.iter(|| transport_monodromy(&conn, &cov, &loops, &settings).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
