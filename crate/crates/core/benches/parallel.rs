use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use stp_core::eval::oracle::{compare_recommendations, oracle_recommend};
use stp_core::eval::synth::{generate_population, SyntheticSpec};
use stp_core::eval::{leave_one_out, random_case, random_case_today};
use stp_core::{Exec, RecommendParams, Recommender};

fn strategies() -> Vec<(&'static str, Exec)> {
    let mut s = vec![("sequential", Exec::Sequential)];
    if Exec::is_parallel_available() {
        s.push(("parallel", Exec::Parallel));
    }
    s
}

fn bench_recommend_all(c: &mut Criterion) {
    let params = RecommendParams::default();
    let today = random_case_today();
    let mut group = c.benchmark_group("recommend_all");
    group.sample_size(20);
    for n in [100usize, 400] {
        let state = generate_population(&SyntheticSpec::new(7, n, 4 * n, 8, 0.2)).unwrap();
        let engine = Recommender::from_snapshot(&state);
        for (name, exec) in strategies() {
            group.bench_with_input(BenchmarkId::new(name, n), &exec, |b, &exec| {
                b.iter(|| black_box(engine.recommend_all(&params, today, exec)))
            });
        }
    }
    group.finish();
}

fn bench_leave_one_out(c: &mut Criterion) {
    let params = RecommendParams::default();
    let state = generate_population(&SyntheticSpec::new(42, 200, 800, 4, 0.3)).unwrap();
    let mut group = c.benchmark_group("leave_one_out");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(name, |b| b.iter(|| black_box(leave_one_out(&state, &params, 10, exec).unwrap())));
    }
    group.finish();
}

// Every seed builds a small state and checks the engine against the
// brute-force oracle for each of its users.
fn bench_oracle_campaign(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..500).collect();
    let today = random_case_today();
    let mut group = c.benchmark_group("oracle_campaign");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_function(name, |b| {
            b.iter(|| {
                let ok = exec.map(&seeds, |&seed| {
                    let (state, params) = random_case(seed, 5, 10);
                    let engine = Recommender::from_snapshot(&state);
                    state.faculty.iter().all(|u| {
                        let got = engine.recommend(u, &params, today);
                        compare_recommendations(&got, &oracle_recommend(u, &state, &params, today), 1e-9).is_ok()
                    })
                });
                assert!(ok.into_iter().all(|x| x));
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_recommend_all, bench_leave_one_out, bench_oracle_campaign);
criterion_main!(benches);
