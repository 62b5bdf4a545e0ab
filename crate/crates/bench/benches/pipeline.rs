use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::rngs::StdRng;
use rand::SeedableRng;

use mu2_core::corpus::{golden, random_formula, random_game, random_model, FormulaShape};
use mu2_core::countermodel::verified_refute;
use mu2_core::paritygames::solve;
use mu2_core::search::{prove, Outcome, SearchConfig};
use mu2_core::semantics::model_check;

fn parity(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(1);
    let games: Vec<_> = (0..20).map(|_| random_game(&mut rng, 200, 6)).collect();
    c.bench_function("zielonka 20x200", |b| {
        b.iter(|| {
            for g in &games {
                black_box(solve(g));
            }
        })
    });
}

fn modelcheck(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(2);
    let shape = FormulaShape::default();
    let cases: Vec<_> = (0..20)
        .map(|_| {
            (
                random_formula(&mut rng, &shape),
                random_model(&mut rng, 8, &shape.props, &shape.actions, 0.3),
            )
        })
        .collect();
    c.bench_function("model check 20 formulas", |b| {
        b.iter(|| {
            for (phi, m) in &cases {
                black_box(model_check(m, 0, phi).unwrap());
            }
        })
    });
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    for name in ["back-to-p", "zigzag", "well-founded", "loop-or-root"] {
        let case = golden().into_iter().find(|g| g.name == name).unwrap();
        let (ctx, root) = case.context_and_root().unwrap();
        group.bench_function(name, |b| {
            b.iter(
                || match prove(ctx.clone(), &root, SearchConfig::default()).unwrap() {
                    Outcome::Refuted(w) => {
                        black_box(verified_refute(&w, 8).unwrap());
                    }
                    Outcome::Proved(p) => {
                        black_box(p);
                    }
                },
            )
        });
    }
    group.finish();
}

criterion_group!(benches, parity, modelcheck, search);
criterion_main!(benches);
