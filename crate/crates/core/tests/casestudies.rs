use std::collections::HashMap;

use hypersmc::casestudies::*;
use hypersmc::checker::{check, CheckTask};
use hypersmc::dtmc::{sample_path, sample_trace_from, ModelSampler};
use hypersmc::sprt::ErrorBudget;
use hypersmc::stream::substream;

fn final_state<M: ModelSampler>(m: &M, seed: u64, k: u64, steps: usize) -> M::State {
    let mut rng = substream(seed, 0, k);
    let mut s = m.initial_state();
    for _ in 0..steps {
        m.advance(&mut s, &mut rng);
    }
    s
}

#[test]
fn dining_announcements_reveal_only_whether_a_cryptographer_paid() {
    for (payer, expected) in [(Payer::Uniform, true), (Payer::Nsa, false)] {
        let mut cfg = DiningConfig::new(5);
        cfg.payer = payer;
        let m = DiningModel::new(cfg).unwrap();
        for k in 0..100_000 {
            let s = final_state(&m, 1, k, m.horizon());
            assert_eq!(s.parity(), expected);
            let disagree = announcements(s.coins(), s.payer());
            assert_eq!(disagree.iter().fold(false, |x, b| x ^ b), expected);
        }
    }
}

#[test]
fn dining_small_table_is_anonymous() {
    let m = DiningModel::new(DiningConfig::new(6)).unwrap();
    let f = m.formula(0.1);
    for seed in 0..10 {
        let mut task = CheckTask::new(&m, f.clone(), ErrorBudget::new(0.01, 0.01).unwrap(), 0.01);
        task.horizon = Some(m.horizon());
        task.seed = seed;
        assert_eq!(check(&task).unwrap().holds(), Some(true));
    }
}

/// Probability that the last iteration belongs to an odd thread, by
/// enumerating every schedule.
fn final_l_one(counts: Vec<u32>) -> f64 {
    fn go(left: &mut Vec<u32>, last: Option<usize>, memo: &mut HashMap<(Vec<u32>, bool), f64>) -> f64 {
        let live: Vec<usize> = (0..left.len()).filter(|&i| left[i] > 0).collect();
        if live.is_empty() {
            // Thread i runs with k = i + 1.
            return if last.unwrap() % 2 == 0 { 1.0 } else { 0.0 };
        }
        let key = (left.clone(), last.is_some_and(|i| i % 2 == 0));
        if let Some(p) = memo.get(&key) {
            return *p;
        }
        let mut total = 0.0;
        for &i in &live {
            left[i] -= 1;
            total += go(left, Some(i), memo) / live.len() as f64;
            left[i] += 1;
        }
        memo.insert(key, total);
        total
    }
    go(&mut counts.clone(), None, &mut HashMap::new())
}

#[test]
fn threads_match_schedule_enumeration() {
    for n in 1..=3u32 {
        let exact: Vec<f64> = (1..=2)
            .flat_map(|rounds| {
                let one = final_l_one((1..=n).map(|k| rounds * k).collect());
                [0.5 * (1.0 - one), 0.5 * one]
            })
            .collect();
        let m = ThreadsModel::new(ThreadsConfig::new(n as usize)).unwrap();
        let runs = 100_000;
        let mut freq = [0.0; 4];
        for k in 0..runs {
            let s = final_state(&m, 2, k, m.horizon());
            assert!(s.finished());
            let cell = 2 * usize::from(s.h().unwrap()) + usize::from(s.l());
            freq[cell] += 1.0 / runs as f64;
        }
        let tv: f64 = freq.iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.02, "n={n}: {freq:?} vs {exact:?}");
    }
    assert_eq!(final_l_one(vec![1]), 1.0);
}

#[test]
fn two_line_cache_hit_rates_match_the_occupancy_chain() {
    let mut cfg = CacheConfig::with_size(2, 3);
    cfg.access = AccessDistribution::Uniform;
    let m = CacheModel::new(cfg).unwrap();
    let steps = 8;
    // Occupancy 0, 1 or 2; a uniform access hits with probability k / 3.
    let mut occ = [1.0, 0.0, 0.0];
    let mut exact = Vec::new();
    for _ in 0..steps {
        exact.push(occ[1] / 3.0 + occ[2] * 2.0 / 3.0);
        occ = [0.0, occ[0] + occ[1] / 3.0, occ[1] * 2.0 / 3.0 + occ[2]];
    }
    let runs = 100_000;
    let hit = m.proposition_id("H").unwrap();
    let mut freq = vec![0.0; steps];
    for k in 0..runs {
        let p = sample_trace_from(&m, m.initial_state(), &mut substream(3, 0, k), steps);
        for (t, f) in freq.iter_mut().enumerate() {
            if p.labels[t + 1].contains(hit) {
                *f += 1.0 / runs as f64;
            }
        }
    }
    for t in 0..steps {
        assert!((freq[t] - exact[t]).abs() < 0.02, "step {}: {} vs {}", t + 1, freq[t], exact[t]);
    }
}

#[test]
fn samplers_are_reproducible() {
    fn same<M: ModelSampler>(m: &M, horizon: usize)
    where
        M::State: PartialEq,
    {
        for k in 0..5 {
            let a = sample_path(m, &mut substream(9, 1, k), horizon);
            let b = sample_path(m, &mut substream(9, 1, k), horizon);
            assert_eq!(a, b);
        }
    }
    same(&DiningModel::new(DiningConfig::new(7)).unwrap(), 9);
    same(&ThreadsModel::new(ThreadsConfig::new(4)).unwrap(), 21);
    same(&CacheModel::new(CacheConfig::with_size(8, 32)).unwrap(), 40);
    let timing = TimingConfig {
        first: StepDistribution::from_weights(vec![0.0, 1.0, 2.0, 3.0]).unwrap(),
        second: StepDistribution::point(2).unwrap(),
        tau: 2,
    };
    same(&TimingModel::new(timing).unwrap(), 4);
}

fn timing_verdicts(cfg: TimingConfig, eps: f64, margin: f64, runs: u64) -> (u32, u32) {
    let m = TimingModel::new(cfg).unwrap();
    let f = m.formula(eps);
    let (mut holds, mut fails) = (0, 0);
    for seed in 0..runs {
        let mut task = CheckTask::new(&m, f.clone(), ErrorBudget::new(0.01, 0.01).unwrap(), margin);
        task.seed = seed;
        match check(&task).unwrap().holds() {
            Some(true) => holds += 1,
            Some(false) => fails += 1,
            None => {}
        }
    }
    (holds, fails)
}

#[test]
fn timing_identical_distributions_leak_nothing() {
    let d = StepDistribution::from_weights(vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
    let cfg = TimingConfig { first: d.clone(), second: d, tau: 3 };
    let (holds, _) = timing_verdicts(cfg, 0.1, 0.05, 20);
    assert!(holds >= 19);
}

#[test]
fn timing_deterministic_separation_is_a_leak() {
    let cfg = TimingConfig {
        first: StepDistribution::point(5).unwrap(),
        second: StepDistribution::point(20).unwrap(),
        tau: 10,
    };
    let (_, fails) = timing_verdicts(cfg, 0.1, 0.05, 20);
    assert!(fails >= 19);
}
