//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `PARPBO_ACCEPTANCE=1,2,5` runs a subset.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use parpbo_core::{
    assume_and_propagate, competition_score, generate_instance, parse_opb, run_portfolio,
    write_opb, Assignment, GeneratorParams, InsertOutcome, Lit, Objective, PboInstance,
    PolarityWeights, PoolConfig, PortfolioConfig, RejectReason, SearchConfig, SearchState,
    Solution, SolutionPool, Term, Var,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THREE_VAR: &str =
    "* #variable= 3 #constraint= 1\nmin: +10 x1 +20 x2 +30 x3 ;\n+2 x1 +3 x2 +4 x3 >= 5 ;\n";

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let selected: Option<BTreeSet<u32>> = std::env::var("PARPBO_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [Criterion; 9] = [
        (
            1,
            "golden scores and selection on the three-variable instance",
            golden_three_var,
        ),
        (2, "golden polarity-weighted scores", golden_polarity_scores),
        (
            3,
            "oracle equivalence on 200 generated instances",
            oracle_equivalence,
        ),
        (
            4,
            "propagation soundness by enumeration",
            propagation_soundness,
        ),
        (
            5,
            "pool selection law, eviction and polarity bounds",
            pool_law,
        ),
        (
            6,
            "ratio dynamics over 50 infeasible windows",
            ratio_dynamics,
        ),
        (7, "competition score", competition_metric),
        (8, "single-worker determinism", determinism),
        (9, "parallel smoke, T=8 vs T=1", parallel_smoke),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&id)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS criterion {id}: {name} ({detail}) [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id}: {name} ({detail}) [{secs:.2}s]");
            }
        }
        let _ = std::io::stdout().flush();
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---- independent helpers ---------------------------------------------------

fn bools(bits: &[u8]) -> Assignment {
    Assignment::from_bools(bits.iter().map(|&b| b == 1))
}

/// Term-by-term evaluation, independent of the library's caches.
fn feasible(inst: &PboInstance, a: &[bool]) -> bool {
    inst.constraints().iter().all(|c| {
        let lhs: i64 = c
            .terms()
            .iter()
            .filter(|t| a[t.lit.var().index()] == t.lit.is_positive())
            .map(|t| t.coef)
            .sum();
        lhs >= c.degree()
    })
}

fn objective(inst: &PboInstance, a: &[bool]) -> i64 {
    inst.objective()
        .terms()
        .iter()
        .filter(|t| a[t.lit.var().index()] == t.lit.is_positive())
        .map(|t| t.coef)
        .sum()
}

fn to_bools(a: &Assignment) -> Vec<bool> {
    a.iter().collect()
}

fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

fn optimum(inst: &PboInstance) -> Option<i64> {
    all_assignments(inst.num_vars())
        .filter(|a| feasible(inst, a))
        .map(|a| objective(inst, &a))
        .min()
}

// ---- criteria --------------------------------------------------------------

fn example_state(inst: &PboInstance) -> SearchState<'_> {
    let mut st = SearchState::new(inst, SearchConfig::default()).unwrap();
    st.restart_from(bools(&[1, 0, 0])).unwrap();
    st.set_hard_weight(0, 2);
    st.set_obj_weight(1);
    st
}

fn golden_three_var() -> Check {
    let inst = parse_opb(THREE_VAR).unwrap();
    let start = Instant::now();
    let mut st = example_state(&inst);
    let vars: Vec<Var> = (1..=3).map(Var::from_opb).collect();
    let h: Vec<i128> = vars.iter().map(|&v| st.hscore(v)).collect();
    let o: Vec<i128> = vars.iter().map(|&v| st.oscore(v)).collect();
    st.set_ratio(2.0);
    let s2: Vec<f64> = vars.iter().map(|&v| st.dynamic_score(v)).collect();
    let pick2 = st.pick_variable(&parpbo_core::NeutralPolarity);
    st.set_ratio(0.1);
    let s01: Vec<f64> = vars.iter().map(|&v| st.dynamic_score(v)).collect();
    let pick01 = st.pick_variable(&parpbo_core::NeutralPolarity);
    let elapsed = start.elapsed();

    check!(h == [-4, 6, 6], "hscore {h:?}");
    check!(o == [10, -20, -30], "oscore {o:?}");
    check!(s2 == [16.0, -34.0, -54.0], "score* at p=2 {s2:?}");
    check!(s01 == [-3.0, 4.0, 3.0], "score* at p=0.1 {s01:?}");
    check!(pick2 == Some(vars[0]), "pick at p=2 {pick2:?}");
    check!(pick01 == Some(vars[1]), "pick at p=0.1 {pick01:?}");
    check!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
    Ok(format!(
        "hscore {h:?}, oscore {o:?}, picks x1/x2, {elapsed:?}"
    ))
}

fn golden_polarity_scores() -> Check {
    let inst = parse_opb(THREE_VAR).unwrap();
    let mut st = example_state(&inst);
    st.set_ratio(1.0);
    let wpd = vec![1.1, 1.1, 0.9];
    let want = [6.0 / 1.1, -14.0 * 1.1, -24.0 * 0.9];
    let mut worst = 0.0f64;
    for (i, w) in want.iter().enumerate() {
        let v = Var::new(i);
        let got = st.combined_score(v, wpd.weight(v));
        let rel = ((got - w) / w).abs();
        check!(rel <= 1e-12, "score**(x{}) = {got}, expected {w}", i + 1);
        worst = worst.max(rel);
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn oracle_equivalence() -> Check {
    let (mut optimal, mut reported) = (0, 0);
    let mut misses = Vec::new();
    for seed in 0..200u64 {
        let inst = generate_instance(&GeneratorParams {
            num_vars: 6 + (seed % 9) as usize,
            num_constraints: 3 + (seed / 9 % 8) as usize,
            max_coeff: 10,
            density: 0.35,
            seed,
        })
        .unwrap();
        let opt = optimum(&inst)
            .ok_or_else(|| format!("seed {seed}: generated instance is infeasible"))?;
        let cfg = PortfolioConfig {
            num_workers: 4,
            cutoff: Some(Duration::from_secs(5)),
            seed,
            target_objective: Some(opt),
            ..PortfolioConfig::default()
        };
        let mut events = Vec::new();
        let r = run_portfolio(&inst, &cfg, &mut |s| events.push(s.clone()))
            .map_err(|e| e.to_string())?;
        events.extend(r.best.clone());
        for s in &events {
            let a = to_bools(&s.assignment);
            check!(
                feasible(&inst, &a),
                "seed {seed}: infeasible solution reported"
            );
            check!(
                objective(&inst, &a) == s.objective,
                "seed {seed}: objective label mismatch"
            );
            check!(
                s.objective >= opt,
                "seed {seed}: objective {} below optimum {opt}",
                s.objective
            );
            reported += 1;
        }
        match r.best {
            Some(b) if b.objective == opt => optimal += 1,
            other => misses.push((seed, other.map(|b| b.objective), opt)),
        }
    }
    let detail = format!(
        "{optimal}/200 optimal, {reported} reported solutions all feasible, misses {misses:?}"
    );
    check!(optimal >= 190, "{detail}");
    Ok(detail)
}

fn propagation_soundness() -> Check {
    let inst = parse_opb(THREE_VAR).unwrap();
    let r = assume_and_propagate(&inst, Var::from_opb(3), false);
    let fixed: Vec<(usize, bool)> = r.fixed().map(|(v, b)| (v.opb_index(), b)).collect();
    check!(
        fixed == [(1, true), (2, true), (3, false)],
        "worked example fixed {fixed:?}"
    );

    let (mut checks, mut conflicts, mut forced) = (0usize, 0usize, 0usize);
    for seed in 0..200u64 {
        let n = 2 + (seed % 11) as usize;
        let inst = generate_instance(&GeneratorParams {
            num_vars: n,
            num_constraints: 1 + (seed % 8) as usize,
            max_coeff: 1 + (seed % 9) as i64,
            density: [0.25, 0.5, 0.8][(seed % 3) as usize],
            seed: 10_000 + seed,
        })
        .unwrap();
        let models: Vec<Vec<bool>> = all_assignments(n).filter(|a| feasible(&inst, a)).collect();
        for i in 0..n {
            for value in [false, true] {
                let expected: BTreeSet<Vec<bool>> =
                    models.iter().filter(|a| a[i] == value).cloned().collect();
                let r = assume_and_propagate(&inst, Var::new(i), value);
                checks += 1;
                let Some(simp) = r.simplified() else {
                    conflicts += 1;
                    check!(
                        expected.is_empty(),
                        "seed {seed} x{}={value}: conflict but models exist",
                        i + 1
                    );
                    continue;
                };
                forced += r.num_fixed() - 1;
                let mut lifted = BTreeSet::new();
                for a in all_assignments(simp.num_vars()).filter(|a| feasible(simp, a)) {
                    let full = r.lift(&Assignment::from_bools(a.iter().copied()));
                    let fb = to_bools(&full);
                    check!(
                        objective(&inst, &fb) == objective(simp, &a) + r.objective_offset(),
                        "seed {seed}: objective offset mismatch"
                    );
                    lifted.insert(fb);
                }
                check!(
                    lifted == expected,
                    "seed {seed} x{}={value}: {} lifted models vs {} restricted models",
                    i + 1,
                    lifted.len(),
                    expected.len()
                );
            }
        }
    }
    Ok(format!(
        "worked example exact; {checks} assumptions equal, {conflicts} conflicts, {forced} forced variables"
    ))
}

fn pool_instance(obj: &[i64]) -> PboInstance {
    let n = obj.len();
    let objective = Objective::new(
        obj.iter()
            .enumerate()
            .map(|(i, &c)| Term::new(c, Lit::new(Var::new(i), true))),
    )
    .unwrap();
    PboInstance::new(n, Vec::new(), objective).unwrap()
}

fn solution(inst: &PboInstance, a: Vec<bool>) -> Solution {
    let objective = objective(inst, &a);
    Solution {
        assignment: Assignment::from_bools(a),
        objective,
        source_worker: 0,
        discovery_step: 0,
    }
}

/// Mixed-rank rating from scratch; items in age order, oldest first.
fn oracle_ratings(items: &[(i64, Vec<bool>)], p: f64) -> Vec<f64> {
    let k = items.len();
    let div: Vec<usize> = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| {
                    items[i]
                        .1
                        .iter()
                        .zip(&items[j].1)
                        .filter(|(x, y)| x != y)
                        .count()
                })
                .sum()
        })
        .collect();
    (0..k)
        .map(|i| {
            let rank_obj = 1
                + (0..k)
                    .filter(|&j| items[j].0 < items[i].0 || (items[j].0 == items[i].0 && j < i))
                    .count();
            let rank_div = 1
                + (0..k)
                    .filter(|&j| div[j] > div[i] || (div[j] == div[i] && j < i))
                    .count();
            rank_obj as f64 * p + rank_div as f64 * (1.0 - p)
        })
        .collect()
}

fn pool_law() -> Check {
    // restart selection on pool {5, 8} with caller at 10
    let inst = pool_instance(&[5, 8, 10]);
    let pool = SolutionPool::new(&inst, PoolConfig::default()).unwrap();
    for a in [vec![true, false, false], vec![false, true, false]] {
        pool.try_insert(solution(&inst, a)).unwrap();
    }
    let mine = solution(&inst, vec![false, false, true]);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut counts = [0usize; 3];
    const DRAWS: usize = 100_000;
    for _ in 0..DRAWS {
        let s = pool.select_for_restart(10, &mine, &mut rng);
        counts[match s.objective {
            5 => 0,
            8 => 1,
            10 => 2,
            o => return Err(format!("selected objective {o}")),
        }] += 1;
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / DRAWS as f64).collect();
    let want = [5.0 / 7.0, 2.0 / 7.0, 0.0];
    for i in 0..3 {
        check!((freq[i] - want[i]).abs() <= 0.01, "frequencies {freq:?}");
    }

    // eviction against the from-scratch rating
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut evictions, mut rejections, mut weights_checked) = (0usize, 0usize, 0usize);
    for seq in 0..10_000 {
        let n = rng.random_range(3..=8);
        let coefs: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        let inst = pool_instance(&coefs);
        let p_star = match seq % 5 {
            0 => 0.0,
            1 => 1.0,
            2 => 0.58,
            _ => rng.random_range(0.0..=1.0),
        };
        let cfg = PoolConfig {
            capacity: rng.random_range(1..=6),
            p_star,
            beta: rng.random_range(0.0..0.1),
            epsilon: rng.random_range(0.0..0.3),
        };
        let pool = SolutionPool::new(&inst, cfg.clone()).unwrap();
        let (lo, hi) = (1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
        let mut model: Vec<(i64, Vec<bool>)> = Vec::new();
        for _ in 0..rng.random_range(1..=20) {
            let a: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            let cand = solution(&inst, a.clone());
            let outcome = pool.try_insert(cand.clone()).map_err(|e| e.to_string())?;
            if model.iter().any(|(_, b)| *b == a) {
                check!(
                    outcome == InsertOutcome::Rejected(RejectReason::Duplicate),
                    "sequence {seq}: duplicate gave {outcome:?}"
                );
            } else if model.len() < cfg.capacity {
                check!(
                    outcome == InsertOutcome::Inserted,
                    "sequence {seq}: gave {outcome:?}"
                );
                model.push((cand.objective, a));
            } else {
                let mut items = model.clone();
                items.push((cand.objective, a.clone()));
                let ratings = oracle_ratings(&items, cfg.p_star);
                let max = ratings.iter().copied().fold(f64::MIN, f64::max);
                match outcome {
                    InsertOutcome::Rejected(RejectReason::Worst) => {
                        check!(
                            ratings[items.len() - 1] == max,
                            "sequence {seq}: rejected candidate rated {} < max {max}",
                            ratings[items.len() - 1]
                        );
                        rejections += 1;
                    }
                    InsertOutcome::Replaced(evicted) => {
                        let ev = to_bools(&evicted.assignment);
                        let idx = model
                            .iter()
                            .position(|(_, b)| *b == ev)
                            .ok_or("evicted unknown entry")?;
                        check!(
                            ratings[idx] == max,
                            "sequence {seq}: evicted entry rated {} < max {max}",
                            ratings[idx]
                        );
                        model.remove(idx);
                        model.push((cand.objective, a));
                        evictions += 1;
                    }
                    other => return Err(format!("sequence {seq}: full pool gave {other:?}")),
                }
            }
            let entries: Vec<Vec<bool>> = pool
                .entries()
                .iter()
                .map(|e| to_bools(&e.assignment))
                .collect();
            let expected: Vec<Vec<bool>> = model.iter().map(|(_, b)| b.clone()).collect();
            check!(entries == expected, "sequence {seq}: pool content diverged");
            for w in pool.polarity().snapshot() {
                check!(
                    w >= lo && w <= hi,
                    "sequence {seq}: weight {w} outside [{lo}, {hi}]"
                );
                weights_checked += 1;
            }
        }
    }
    Ok(format!(
        "frequencies {:.4}/{:.4}/{:.4}; {evictions} evictions and {rejections} rejections match the oracle; {weights_checked} weights in bounds",
        freq[0], freq[1], freq[2]
    ))
}

fn ratio_dynamics() -> Check {
    let inst = parse_opb(THREE_VAR).unwrap();
    let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
    check!(
        st.ratio() == 1.0 && !st.is_feasible(),
        "unexpected start state"
    );
    let mut worst = 0.0f64;
    for j in 1..=50 {
        let p = st.update_ratio();
        let want = 1.15f64.powi(-j);
        let err = (p - want).abs();
        check!(err <= 1e-9, "j={j}: p={p}, expected {want}");
        worst = worst.max(err);
    }
    Ok(format!(
        "p after 50 windows {:.6e}, max error {worst:.1e}",
        st.ratio()
    ))
}

fn competition_metric() -> Check {
    let eq = |r: Ratio<i128>, n: i128, d: i128| r == Ratio::new(n, d);
    let a = competition_score(7, 7, 0);
    let b = competition_score(5, 9, 0);
    let c = competition_score(-5, 0, 5);
    check!(eq(a, 1, 1), "identity gave {a}");
    check!(eq(b, 6, 10), "(5, 9, 0) gave {b}");
    check!(eq(c, 1, 6), "(-5, 0, 5) gave {c}");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let offset = rng.random_range(0..=1_000i64);
        let best = rng.random_range(-offset..=1_000_000);
        let cost = best + rng.random_range(0..=1_000_000);
        let r = competition_score(best, cost, offset);
        let (num, den) = (*r.numer(), *r.denom());
        check!(
            num >= 0 && num <= den,
            "sc*({best}, {cost}, {offset}) = {r}"
        );
        check!(
            (num == den) == (best == cost),
            "sc*({best}, {cost}, {offset}) = {r}"
        );
        check!(
            competition_score(best, cost + 1, offset) <= r,
            "not monotone at {cost}"
        );
    }
    Ok("examples exact, 1000 random triples in [0, 1]".into())
}

fn determinism() -> Check {
    let inst = generate_instance(&GeneratorParams::new(80, 50, 42)).unwrap();
    let mut file = tempfile::Builder::new().suffix(".opb").tempfile().unwrap();
    file.write_all(write_opb(&inst).as_bytes()).unwrap();
    let path = file.path().to_str().unwrap().to_string();
    let run = || {
        let mut out = Vec::new();
        let code = parpbo_cli::run(
            [
                "parpbo",
                &path,
                "--threads",
                "1",
                "--steps",
                "300000",
                "--seed",
                "5",
                "--cutoff",
                "600",
            ],
            &mut out,
        );
        let o: Vec<u8> = String::from_utf8(out)
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("o "))
            .flat_map(|l| format!("{l}\n").into_bytes())
            .collect();
        (code, o)
    };
    let (c1, a) = run();
    let (c2, b) = run();
    check!(c1 == 10 && c2 == 10, "exit codes {c1}, {c2}");
    check!(!a.is_empty(), "no o lines");
    check!(a == b, "o sequences differ");
    Ok(format!(
        "{} identical o lines",
        a.iter().filter(|&&c| c == b'\n').count()
    ))
}

fn parallel_smoke() -> Check {
    let mut no_worse = 0;
    let mut rows = Vec::new();
    for i in 0..50u64 {
        let inst = generate_instance(&GeneratorParams::new(60, 40, 9_000 + i)).unwrap();
        let best = |t: usize| {
            let cfg = PortfolioConfig {
                num_workers: t,
                cutoff: Some(Duration::from_secs(10)),
                seed: i,
                ..PortfolioConfig::default()
            };
            let r = run_portfolio(&inst, &cfg, &mut |_| {}).unwrap();
            if let Some(b) = &r.best {
                assert!(feasible(&inst, &to_bools(&b.assignment)));
            }
            r.best.map(|b| b.objective)
        };
        let (one, eight) = (best(1), best(8));
        let ok = match (eight, one) {
            (Some(e), Some(o)) => e <= o,
            (Some(_), None) | (None, None) => true,
            (None, Some(_)) => false,
        };
        no_worse += ok as usize;
        rows.push((one, eight));
    }
    let worse: Vec<_> = rows
        .iter()
        .enumerate()
        .filter(|(_, (o, e))| e > o || e.is_none() && o.is_some())
        .collect();
    let detail = format!("T=8 no worse on {no_worse}/50, worse on {worse:?}");
    check!(no_worse >= 40, "{detail}");
    Ok(detail)
}
