//! Paired TPE vs random-search benchmarks on cheap synthetic objectives.

use timeblock_core::optimizer::{
    generate_orderings, tpe_search, Evaluation, Observation, ParamRange, SearchSpace, Tpe, TrialRequest,
};
use timeblock_core::rng;
use timeblock_core::Result;

fn unit_interval(categories: usize) -> SearchSpace {
    SearchSpace::new(vec![ParamRange::new(0.0, 1.0).unwrap()], generate_orderings(2, categories, 0)).unwrap()
}

fn run_tpe(space: &SearchSpace, budget: usize, seed: u64, f: impl Fn(&[f64], usize) -> f64) -> Vec<Observation> {
    let tpe = Tpe::default();
    let mut history = Vec::with_capacity(budget);
    for i in 0..budget {
        let mut rng = rng::stream(seed, &[i as u64]);
        let s = tpe.suggest(&history, space, &mut rng);
        let objective = f(&s.params, s.category);
        history.push(Observation { params: s.params, category: s.category, objective });
    }
    history
}

fn best(history: &[Observation]) -> f64 {
    history.iter().map(|o| o.objective).fold(f64::INFINITY, f64::min)
}

#[test]
fn tpe_beats_random_search_on_a_quadratic() {
    let space = unit_interval(1);
    let f = |x: &[f64], _: usize| (x[0] - 0.7).powi(2);
    let mut wins = 0;
    for run in 0..20u64 {
        let tpe = best(&run_tpe(&space, 200, 1000 + run, f));
        let mut rng = rng::stream(2000 + run, &[]);
        let random = (0..200).map(|_| f(&space.sample_params(&mut rng), 0)).fold(f64::INFINITY, f64::min);
        if tpe < random {
            wins += 1;
        }
    }
    assert!(wins >= 16, "TPE won {wins}/20");
}

#[test]
fn tpe_prefers_the_better_category() {
    let space = unit_interval(2);
    let startup = Tpe::default().config.startup_trials;
    let history = run_tpe(&space, startup + 100, 5, |_, c| c as f64);
    let picks_a = history[startup..].iter().filter(|o| o.category == 0).count();
    assert!(picks_a >= 70, "category A chosen {picks_a}/100");
}

#[test]
fn batched_tpe_stays_in_range_and_is_deterministic() {
    let space = SearchSpace::for_ansatz(1, generate_orderings(4, 3, 0)).unwrap();
    let f = |req: &TrialRequest| -> Result<Evaluation> {
        let objective = (req.params[0] - 0.7).powi(2) + (req.params[1] - 2.0).powi(2) + req.ordering_index as f64;
        Ok(Evaluation { objective, ar: None })
    };
    let a = tpe_search(&space, 60, 4, Tpe::default(), f, 9).unwrap();
    let b = tpe_search(&space, 60, 4, Tpe::default(), f, 9).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert!(a.trials().iter().all(|t| space.contains(&t.angles().flatten(), t.ordering_index)));
    let late = a.trials()[40..].iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
    let early = a.trials()[1..11].iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
    assert!(late <= early);
}
