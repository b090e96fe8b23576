//! One line per acceptance criterion, written straight to stdout so that it
//! shows up without `--nocapture`.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use common::oracle::compare;
use common::*;
use lsbbi::formula::{parse, print, Formula};
use lsbbi::kernel::{check, CheckOptions, Derivation, Extra, Label, Rule, RuleParams, Sequent};
use lsbbi::search::{Outcome, StopReason};
use lsbbi::semantics::{countermodel, MAX_ATOMS};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const BENCHMARK_LIMIT: Duration = Duration::from_secs(5);
const HARD_LIMIT: Duration = Duration::from_secs(1);
const SWEEP_LIMIT: Duration = Duration::from_secs(120);
const SWEEP_MODEL_SIZE: usize = 3;
const ORACLE_INSTANCES: usize = 600;
const ROUND_TRIPS: u32 = 1000;

struct Verdict {
    id: usize,
    pass: bool,
    detail: String,
}

fn verdict(id: usize, pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        id,
        pass,
        detail: detail.into(),
    }
}

fn accepted(out: &Outcome, extras: &BTreeSet<Extra>) -> Option<Derivation> {
    let d = &out.proof()?.derivation;
    kernel_accepts(d, extras).then(|| d.clone())
}

fn benchmark_suite(proved: &mut Vec<Formula>) -> Verdict {
    let mut fails = Vec::new();
    let mut slowest = Duration::ZERO;
    for (i, g) in benchmark().iter().enumerate() {
        let t = Instant::now();
        let out = prove_with(g, BTreeSet::new());
        let took = t.elapsed();
        slowest = slowest.max(took);
        if accepted(&out, &BTreeSet::new()).is_none() || took > BENCHMARK_LIMIT {
            fails.push(format!("row {} ({:.2}s)", i + 1, took.as_secs_f64()));
        } else {
            proved.push(g.clone());
        }
    }
    verdict(
        1,
        fails.is_empty(),
        format!(
            "benchmark suite: {}/14 proved and kernel-checked, slowest {:.3}s (limit {}s){}",
            14 - fails.len(),
            slowest.as_secs_f64(),
            BENCHMARK_LIMIT.as_secs(),
            if fails.is_empty() { String::new() } else { format!("; failed: {}", fails.join(", ")) }
        ),
    )
}

fn unit_example(proved: &mut Vec<Formula>) -> Verdict {
    let g = f(UNIT_INTRO);
    let Some(d) = accepted(&prove_with(&g, BTreeSet::new()), &BTreeSet::new()) else {
        return verdict(2, false, "a -> T* * a not proved");
    };
    proved.push(g);
    let logical: Vec<Rule> = d.rules().into_iter().filter(|r| !STRUCTURAL.contains(r)).collect();
    let mut want = vec![Rule::ImpR, Rule::StarR, Rule::EmpR, Rule::Id];
    let mut got = logical.clone();
    want.sort();
    got.sort();
    verdict(2, got == want, format!("a -> T* * a: logical rules {logical:?}, {} structural", d.size() - logical.len()))
}

fn monoid_laws(proved: &mut Vec<Formula>) -> Verdict {
    let mut ok = 0;
    for text in MONOID_LAWS {
        let g = f(text);
        if accepted(&prove_with(&g, BTreeSet::new()), &BTreeSet::new()).is_some() {
            ok += 1;
            proved.push(g);
        }
    }
    verdict(3, ok == 4, format!("monoid laws: {ok}/4 proved"))
}

fn unit_asymmetry() -> Verdict {
    let t = Instant::now();
    let out = prove_with(&f(UNIT), BTreeSet::new());
    let stop = matches!(out, Outcome::Unproved(StopReason::Exhausted, _));
    let hand = Derivation::leaf(Rule::EmpR, Sequent::goal(Label::Eps, Formula::MEmp), RuleParams::right(0));
    let eps_ok = check(&hand, &CheckOptions::default()).accepted;
    verdict(
        4,
        stop && eps_ok,
        format!(
            "T* at a0: {} in {:.3}s; hand proof of eps : T* {}",
            if stop { "UNPROVED (exhausted)" } else { "not refuted" },
            t.elapsed().as_secs_f64(),
            if eps_ok { "accepted" } else { "rejected" }
        ),
    )
}

fn hard_formula(proved: &mut Vec<Formula>) -> Verdict {
    let g = f(HARD);
    let t = Instant::now();
    let out = prove_with(&g, BTreeSet::new());
    let took = t.elapsed();
    let Some(d) = accepted(&out, &BTreeSet::new()) else {
        return verdict(6, false, "hard formula not proved");
    };
    proved.push(g);
    let (emp, star, wand) = (d.count(Rule::EmpL), d.count(Rule::StarL), d.count(Rule::WandR));
    verdict(
        6,
        took <= HARD_LIMIT && emp >= 2 && star >= 1 && wand >= 1,
        format!(
            "hard formula proved in {:.3}s (limit {}s): T*L x{emp}, *L x{star}, -*R x{wand}",
            took.as_secs_f64(),
            HARD_LIMIT.as_secs()
        ),
    )
}

/// Theorems of the variants are proved up front; the non-theorems stop by
/// exhaustion or timeout and run concurrently.
fn variant_separation() -> Verdict {
    let p = extras(&[Extra::P]);
    let pt = extras(&[Extra::P, Extra::T]);
    let mut proved = Vec::new();
    for (text, ex) in [(PD_ONLY, &p), (TD_ONLY[0], &pt), (TD_ONLY[1], &pt)] {
        let ok = accepted(&prove_with(&f(text), ex.clone()), ex).is_some();
        proved.push(ok);
    }
    let refuted: Vec<(String, bool)> = std::thread::scope(|s| {
        let jobs: Vec<_> = [(PD_ONLY, BTreeSet::new()), (TD_ONLY[0], BTreeSet::new()), (TD_ONLY[1], BTreeSet::new()), (TD_ONLY[0], p.clone()), (TD_ONLY[1], p.clone())]
            .into_iter()
            .map(|(text, ex)| {
                s.spawn(move || {
                    let out = prove_with(&f(text), ex.clone());
                    let how = match &out {
                        Outcome::Proved(..) => "PROVED",
                        Outcome::Unproved(StopReason::Exhausted, _) => "exhausted",
                        Outcome::Unproved(StopReason::Timeout, _) => "timeout",
                    };
                    (how.to_string(), !out.is_proved())
                })
            })
            .collect();
        jobs.into_iter().map(|j| j.join().expect("search thread")).collect()
    });
    let pass = proved.iter().all(|&b| b) && refuted.iter().all(|(_, b)| *b);
    let how: Vec<&str> = refuted.iter().map(|(h, _)| h.as_str()).collect();
    verdict(
        5,
        pass,
        format!(
            "--pd proves (F*F)->F: {}; --td proves both: {}; without: {} / {} / {}; totality formulas with P only: {} / {}",
            proved[0],
            proved[1] && proved[2],
            how[0],
            how[1],
            how[2],
            how[3],
            how[4]
        ),
    )
}

fn soundness_sweep(proved: &[Formula]) -> Verdict {
    let t = Instant::now();
    let mut checked = 0;
    let mut skipped = 0;
    let mut bad = Vec::new();
    for g in proved {
        if g.atoms().len() > MAX_ATOMS {
            skipped += 1;
            continue;
        }
        checked += 1;
        match countermodel(g, SWEEP_MODEL_SIZE, &BTreeSet::new()) {
            Ok(None) => {}
            Ok(Some(_)) => bad.push(print(g)),
            Err(e) => bad.push(format!("{}: {e}", print(g))),
        }
    }
    let took = t.elapsed();
    verdict(
        7,
        bad.is_empty() && took <= SWEEP_LIMIT && checked > 0,
        format!(
            "{checked} proved formulas have no countermodel up to size {SWEEP_MODEL_SIZE} ({skipped} over {MAX_ATOMS} atoms skipped), {:.1}s (limit {}s){}",
            took.as_secs_f64(),
            SWEEP_LIMIT.as_secs(),
            if bad.is_empty() { String::new() } else { format!("; countermodels: {}", bad.join(", ")) }
        ),
    )
}

fn heuristic_oracle() -> Verdict {
    let c = compare(ORACLE_INSTANCES, 7);
    verdict(
        8,
        c.agree == ORACLE_INSTANCES && c.discrepancies.is_empty(),
        format!(
            "{}/{ORACLE_INSTANCES} instances agree ({} solvable), {} discrepancies",
            c.agree,
            c.solvable,
            c.discrepancies.len()
        ),
    )
}

fn kernel_mutations() -> Verdict {
    let corpus = mutation_corpus();
    let (mut total, mut killed, mut proofs) = (0, 0, 0);
    for (text, ex) in &corpus {
        let Some(d) = accepted(&prove_with(&f(text), ex.clone()), ex) else {
            continue;
        };
        proofs += 1;
        for m in mutants(&d) {
            total += 1;
            killed += usize::from(!kernel_accepts(&m.tree, ex));
        }
    }
    verdict(
        9,
        proofs == corpus.len() && proofs >= 10 && killed == total && total > 0,
        format!("{proofs} proofs, {killed}/{total} mutants rejected"),
    )
}

fn parser_round_trip() -> Verdict {
    let config = Config {
        cases: ROUND_TRIPS,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let random = runner.run(&formula(), |g| {
        proptest::prop_assert!(depth(&g) <= 8);
        proptest::prop_assert_eq!(parse(&print(&g)).ok(), Some(g));
        Ok(())
    });
    let rows = benchmark();
    let table_ok = rows.iter().all(|g| parse(&print(g)).ok().as_ref() == Some(g));
    verdict(
        10,
        random.is_ok() && table_ok && rows.len() == 14,
        format!(
            "{ROUND_TRIPS} random formulas: {}; 14 suite strings: {}",
            if random.is_ok() { "ok" } else { "failed" },
            if table_ok { "ok" } else { "failed" }
        ),
    )
}

#[test]
fn acceptance_criteria() {
    // Timed criteria run alone; the rest share the machine.
    let mut proved = Vec::new();
    let mut verdicts = vec![
        benchmark_suite(&mut proved),
        unit_example(&mut proved),
        monoid_laws(&mut proved),
        unit_asymmetry(),
        hard_formula(&mut proved),
    ];
    let proved = &proved;
    std::thread::scope(|s| {
        let jobs = [
            s.spawn(variant_separation),
            s.spawn(move || soundness_sweep(proved)),
            s.spawn(heuristic_oracle),
            s.spawn(kernel_mutations),
            s.spawn(parser_round_trip),
        ];
        verdicts.extend(jobs.into_iter().map(|j| j.join().expect("criterion thread")));
    });
    verdicts.sort_by_key(|v| v.id);
    let mut out = std::io::stdout().lock();
    for v in &verdicts {
        writeln!(out, "criterion {:>2}: {} - {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.detail).unwrap();
    }
    drop(out);
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
