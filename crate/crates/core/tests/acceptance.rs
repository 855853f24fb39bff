//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one verdict line, followed by its evidence.
//!
//! `cargo test -p hvtm --test acceptance -- <substring>` runs a subset.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use hvtm::data::{long_table_csv, mean_sd, summary_table_csv};
use hvtm::experiment::{
    prepare_data, run_ensemble, run_replica, xor_samples, DatasetConfig, PreparedData,
    Representation, RunConfig,
};
use hvtm::explain::{decode_clause, export_clauses, negated_literal_fraction, DecodeRole, Stance};
use hvtm::rng::derive_stream;
use hvtm::tm::{literals_of, ClauseBank, FeedbackProbabilities};
use hvtm::{
    bundle, capacity, overlap_likelihood, Hypervector, Metrics, Model, TMConfig, TokenCodebook,
    TsetlinMachine,
};
use num_bigint::BigUint;
use rand::{Rng, RngCore};

/// Outcome of one criterion: pass flag plus evidence lines.
struct Verdict {
    pass: bool,
    notes: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, note: impl Into<String>) {
        let note = note.into();
        if !ok {
            self.pass = false;
            self.notes.push(format!("FAILED {note}"));
        } else {
            self.notes.push(note);
        }
    }

    /// Records a failure without an evidence line for every passing case.
    fn require(&mut self, ok: bool, note: impl FnOnce() -> String) {
        if !ok {
            self.pass = false;
            if self.notes.len() < 20 {
                self.notes.push(format!("FAILED {}", note()));
            }
        }
    }
}

fn hv(d: usize, w: u64) -> Hypervector {
    Hypervector::from_words(d, vec![w]).unwrap()
}

fn random_hv<R: RngCore>(rng: &mut R, d: usize) -> Hypervector {
    let density = rng.random_range(0.0..0.2);
    let bits: Vec<bool> = (0..d).map(|_| rng.random_bool(density)).collect();
    Hypervector::from_bools(&bits)
}

/// Bitwise reference rotation.
fn rotate_oracle(v: &Hypervector, k: i64) -> Hypervector {
    let d = v.size();
    let mut out = vec![false; d];
    for (p, b) in v.to_bools().into_iter().enumerate() {
        out[(p as i64 + k).rem_euclid(d as i64) as usize] = b;
    }
    Hypervector::from_bools(&out)
}

fn hv_algebra() -> Verdict {
    let mut v = Verdict::new();
    let d = 8;
    let all: Vec<Hypervector> = (0..256u64).map(|w| hv(d, w)).collect();
    let zero = Hypervector::zeros(d);
    let or = |a: &Hypervector, b: &Hypervector| bundle([a, b]).unwrap();

    let mut cases = 0u64;
    for a in &all {
        v.require(or(a, a) == *a, || format!("idempotence {a:?}"));
        v.require(or(a, &zero) == *a, || format!("identity {a:?}"));
        for b in &all {
            let ab = or(a, b);
            v.require(ab == or(b, a), || format!("commutativity {a:?} {b:?}"));
            v.require(a.overlap(b).unwrap() <= a.popcount().min(b.popcount()), || {
                format!("overlap bound {a:?} {b:?}")
            });
            for c in &all {
                v.require(or(&ab, c) == or(a, &or(b, c)), || {
                    format!("associativity {a:?} {b:?} {c:?}")
                });
                cases += 1;
            }
        }
    }
    for k in -(d as i64)..=2 * d as i64 {
        let images: HashSet<Vec<u64>> = all.iter().map(|a| a.rotate(k).words().to_vec()).collect();
        v.require(images.len() == 256, || format!("rotate({k}) is not a bijection"));
        for a in &all {
            let r = a.rotate(k);
            v.require(r == rotate_oracle(a, k), || format!("rotate({a:?}, {k})"));
            v.require(r.popcount() == a.popcount(), || format!("popcount under rotate {k}"));
            for j in 0..d as i64 {
                v.require(a.rotate(k + j) == r.rotate(j), || format!("composition {k}+{j}"));
            }
        }
    }
    for a in &all {
        v.require(a.rotate(d as i64) == *a, || format!("rotate(v, D) for {a:?}"));
    }
    v.check(true, format!("D=8 exhaustive: {cases} bundle triples, shifts -8..=16"));

    let d = 1024;
    let mut rng = derive_stream(1, &[b"acceptance-hv"]);
    for _ in 0..10_000 {
        let a = random_hv(&mut rng, d);
        let b = random_hv(&mut rng, d);
        let c = random_hv(&mut rng, d);
        let k = rng.random_range(-3000i64..3000);
        let j = rng.random_range(-3000i64..3000);
        v.require(or(&a, &b) == or(&b, &a), || "commutativity at D=1024".into());
        v.require(or(&or(&a, &b), &c) == or(&a, &or(&b, &c)), || {
            "associativity at D=1024".into()
        });
        v.require(or(&a, &a) == a, || "idempotence at D=1024".into());
        let r = a.rotate(k);
        v.require(r == rotate_oracle(&a, k), || format!("rotate oracle k={k}"));
        v.require(r.popcount() == a.popcount(), || "popcount under rotate".into());
        v.require(r.rotate(-k) == a, || format!("rotate inverse k={k}"));
        v.require(a.rotate(k + j) == r.rotate(j), || format!("composition {k}+{j}"));
        v.require(a.rotate(d as i64) == a, || "rotate(v, D)".into());
        v.require(a.overlap(&b).unwrap() <= a.popcount().min(b.popcount()), || {
            "overlap bound at D=1024".into()
        });
    }
    v.check(true, "D=1024: 10000 randomized cases");
    v
}

/// Pascal's triangle rows `0..=n`.
fn pascal(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows = vec![vec![BigUint::from(1u32)]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![BigUint::from(1u32); i + 1];
        for k in 1..i {
            row[k] = &prev[k - 1] + &prev[k];
        }
        rows.push(row);
    }
    rows
}

/// `num / den` rounded to f64 through a 64-bit integer quotient.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.bits() == 0 {
        return 0.0;
    }
    let shift = (den.bits() as i64 - num.bits() as i64 + 64).max(0) as u64;
    let q: BigUint = (num << shift) / den;
    let q64 = u128::try_from(&q).expect("quotient fits in 128 bits") as f64;
    q64 * 2f64.powi(-(shift as i32))
}

fn formula_oracles() -> Verdict {
    let mut v = Verdict::new();
    let rows = pascal(64);
    let mut n = 0;
    for (d, row) in rows.iter().enumerate() {
        for (s, expect) in row.iter().enumerate() {
            let got = capacity(d as u64, s as u64).unwrap();
            v.require(&got == expect, || format!("capacity({d},{s}) = {got}, oracle {expect}"));
            n += 1;
        }
    }
    v.check(true, format!("capacity matches Pascal's triangle for {n} pairs with D <= 64"));

    let num: BigUint = (1017u32..=1024).map(BigUint::from).product();
    let den: BigUint = (1u32..=8).map(BigUint::from).product();
    let oracle = num / den;
    let got = capacity(1024, 8).unwrap();
    v.check(got == oracle, format!("capacity(1024, 8) = {got}"));

    let mut worst: f64 = 0.0;
    for d in [2u64, 256, 1024] {
        for p in [1u32, 4, 8] {
            for t in [0u64, 1, 100, 1000] {
                // L = (D^(PT) - (D^P - 1)^T) / D^(PT), exactly.
                let dp = BigUint::from(d).pow(p);
                let den = dp.pow(t as u32);
                let keep = (&dp - 1u32).pow(t as u32);
                let exact = ratio_to_f64(&(&den - &keep), &den);
                let got = overlap_likelihood(d, p, t);
                let rel = if exact == 0.0 {
                    got.abs()
                } else {
                    ((got - exact) / exact).abs()
                };
                worst = worst.max(rel);
                v.require(rel <= 1e-12, || {
                    format!("overlap_likelihood({d},{p},{t}) = {got:e}, oracle {exact:e}")
                });
            }
        }
    }
    v.check(true, format!("overlap_likelihood grid: worst relative error {worst:.2e}"));
    v
}

/// One feedback cell: start state, expected step probability and direction.
struct Cell {
    name: &'static str,
    literal: usize,
    start: u8,
    /// +1 toward include, -1 toward exclude.
    direction: i16,
    p: f64,
}

fn feedback_conformance() -> Verdict {
    const TRIALS: usize = 100_000;
    const N: u8 = 127;
    let mut v = Verdict::new();
    // Features x = [1, 0]; literals 0..2 positive, 2..4 negated.
    let d = 2;
    let x = literals_of(&Hypervector::from_bools(&[true, false]), d).unwrap();
    // Include on literal 0 (true) keeps the clause firing.
    let fire = (0usize, N + 1);

    for s in [1.0f64, 2.0, 5.0, 100.0] {
        for boost in [false, true] {
            let probs = FeedbackProbabilities::new(s, boost);
            let hi = if boost { 1.0 } else { (s - 1.0) / s };
            let lo = 1.0 / s;
            let fired = [
                Cell { name: "I c=1 x=1 include reward", literal: 0, start: N + 1, direction: 1, p: hi },
                Cell { name: "I c=1 x=1 exclude penalty", literal: 3, start: N, direction: 1, p: hi },
                Cell { name: "I c=1 x=0 exclude reward", literal: 1, start: N, direction: -1, p: lo },
                Cell { name: "I c=1 x=0 negated exclude reward", literal: 2, start: N, direction: -1, p: lo },
            ];
            let silent = [
                Cell { name: "I c=0 include penalty", literal: 0, start: N + 1, direction: -1, p: lo },
                Cell { name: "I c=0 exclude reward", literal: 1, start: N, direction: -1, p: lo },
            ];
            let type_ii = [
                Cell { name: "II x=0 exclude penalty", literal: 1, start: N, direction: 1, p: 1.0 },
                Cell { name: "II x=1 exclude inaction", literal: 3, start: N, direction: 1, p: 0.0 },
                Cell { name: "II x=1 include inaction", literal: 0, start: N + 1, direction: 1, p: 0.0 },
            ];
            let groups: [(&[Cell], u8); 3] = [(&fired, 1), (&silent, 0), (&type_ii, 2)];
            for (cells, kind) in groups {
                for cell in cells {
                    let mut rng =
                        derive_stream(s.to_bits() ^ boost as u64, &[b"stub", cell.name.as_bytes()]);
                    let mut hits = 0usize;
                    let mut wrong_way = 0usize;
                    for _ in 0..TRIALS {
                        let mut bank = ClauseBank::new(1, d, N);
                        if kind != 0 && cell.literal != fire.0 {
                            bank.set_state(0, fire.0, fire.1);
                        }
                        bank.set_state(0, cell.literal, cell.start);
                        match kind {
                            0 => bank.type_i_feedback(0, &x, false, &probs, &mut rng),
                            1 => bank.type_i_feedback(0, &x, true, &probs, &mut rng),
                            _ => bank.type_ii_feedback(0, &x),
                        }
                        let delta = bank.state(0, cell.literal) as i16 - cell.start as i16;
                        if delta == cell.direction {
                            hits += 1;
                        } else if delta != 0 {
                            wrong_way += 1;
                        }
                    }
                    let f = hits as f64 / TRIALS as f64;
                    let se = (cell.p * (1.0 - cell.p) / TRIALS as f64).sqrt();
                    let ok = wrong_way == 0 && (f - cell.p).abs() <= 3.0 * se + 1e-9;
                    v.require(ok, || {
                        format!(
                            "s={s} boost={boost} {}: freq {f:.5} expected {:.5} (3 SE = {:.5}, wrong-way {wrong_way})",
                            cell.name,
                            cell.p,
                            3.0 * se
                        )
                    });
                }
            }
        }
    }
    v.check(true, format!("9 cells x 4 specificities x boost on/off, {TRIALS} trials each"));
    v
}

fn xor_convergence() -> Verdict {
    let mut v = Verdict::new();
    let data = xor_samples();
    let mut solved = 0;
    let mut first = Vec::new();
    for seed in 0..10u64 {
        let cfg = TMConfig::new(2, 10, 5, 3.0).with_seed(seed);
        let mut tm = TsetlinMachine::new_binary(cfg).unwrap();
        let mut hit = None;
        for e in 1..=200 {
            tm.fit_epoch(&data).unwrap();
            if tm.evaluate(&data).unwrap().accuracy == 1.0 {
                hit = Some(e);
                break;
            }
        }
        first.push(hit.map_or("-".to_string(), |e| e.to_string()));
        solved += hit.is_some() as usize;
    }
    v.check(
        solved >= 9,
        format!("{solved}/10 seeds reach accuracy 1.0; first epoch per seed: {}", first.join(" ")),
    );
    v
}

fn balanced_accuracy_oracle() -> Verdict {
    let mut v = Verdict::new();
    let mut rng = derive_stream(8, &[b"acceptance-metrics"]);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..7usize);
        let n = rng.random_range(1..60usize);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut confusion = vec![vec![0u64; k]; k];
        for (&t, &p) in truth.iter().zip(&pred) {
            confusion[t][p] += 1;
        }
        let recall: f64 = (0..k)
            .map(|i| {
                let row: u64 = confusion[i].iter().sum();
                if row == 0 {
                    0.0
                } else {
                    confusion[i][i] as f64 / row as f64
                }
            })
            .sum();
        let oracle = recall / k as f64;
        let diag: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let m = Metrics::from_predictions(&truth, &pred, k).unwrap();
        worst = worst.max((m.balanced_accuracy - oracle).abs());
        v.require((m.balanced_accuracy - oracle).abs() <= 1e-12, || {
            format!("balanced accuracy {} vs oracle {oracle}", m.balanced_accuracy)
        });
        v.require((m.accuracy - diag as f64 / n as f64).abs() <= 1e-12, || {
            "accuracy vs oracle".into()
        });
    }
    v.check(true, format!("100 random prediction sets, worst deviation {worst:.1e}"));

    let truth: Vec<usize> = (0..100).map(|i| (i == 99) as usize).collect();
    let pred = vec![0; 100];
    let m = Metrics::from_predictions(&truth, &pred, 2).unwrap();
    v.check(
        (m.accuracy - 0.99).abs() <= 1e-12 && (m.balanced_accuracy - 0.5).abs() <= 1e-12,
        format!(
            "99:1 majority predictor: accuracy {}, balanced {}",
            m.accuracy, m.balanced_accuracy
        ),
    );
    v
}

fn explain_round_trip() -> Verdict {
    let mut v = Verdict::new();
    let d = 2048;
    let nbits = 4;
    let mut books = Vec::new();
    for (r, name) in ["patch", "row", "column"].into_iter().enumerate() {
        let mut cb = TokenCodebook::new(d, nbits, 100 + r as u64).unwrap();
        for t in 0..64 {
            cb.new_token(&t.to_string()).unwrap();
        }
        books.push((name, cb, r as i64));
    }
    let roles: Vec<DecodeRole> = books
        .iter()
        .map(|(name, cb, shift)| DecodeRole::new(*name, cb, *shift))
        .collect();

    let mut rng = derive_stream(9, &[b"acceptance-explain"]);
    let mut ok = 0;
    for i in 0..100 {
        let role = i % 3;
        let (name, cb, shift) = &books[role];
        let (id, token) = cb.get_index(rng.random_range(0..cb.len()));
        let planted = token.rotate(*shift);
        let mut bank = ClauseBank::new(2, d, 127);
        let against = i % 2 == 1;
        for p in planted.positions() {
            let literal = if against { d + p } else { p };
            bank.set_state(1, literal, 254);
        }
        let before = bank.states().to_vec();
        let report = export_clauses(std::slice::from_ref(&bank)).remove(1);
        let decoded = decode_clause(&report, d, &roles, Some(5)).unwrap();
        let best = decoded.matches.first();
        let good = best.is_some_and(|m| {
            m.token == id
                && m.role == *name
                && m.score == 1.0
                && m.stance == if against { Stance::Against } else { Stance::Pro }
        });
        v.require(good, || format!("token {id} role {name}: decoded {:?}", decoded.matches));
        v.require(bank.states() == before.as_slice(), || "decoding mutated the bank".into());
        ok += good as usize;
    }
    v.check(ok == 100, format!("{ok}/100 planted tokens decoded at rank 1 with score 1.0"));
    v
}

fn mnist_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-desk")
}

fn mnist_base(per_class: usize) -> RunConfig {
    RunConfig {
        dataset: DatasetConfig::Mnist { dir: mnist_dir() },
        train_per_class: Some(per_class),
        test_per_class: Some(per_class),
        ..RunConfig::default()
    }
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let cfg = RunConfig {
        hv_size: 512,
        clauses_per_class: Some(20),
        epochs: Some(3),
        ensembles: 2,
        seed: 77,
        ..mnist_base(20)
    };
    let a = run_ensemble(&cfg, &prepare_data(&cfg).unwrap()).unwrap();
    let b = run_ensemble(&cfg, &prepare_data(&cfg).unwrap()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        v.check(
            x.final_model.to_json().unwrap() == y.final_model.to_json().unwrap()
                && x.best_model.to_json().unwrap() == y.best_model.to_json().unwrap(),
            format!("replica {}: model files byte-identical across runs", x.record.ensemble),
        );
    }
    let ra: Vec<_> = a.iter().map(|o| o.record.clone()).collect();
    let rb: Vec<_> = b.iter().map(|o| o.record.clone()).collect();
    v.check(
        long_table_csv(&ra).unwrap() == long_table_csv(&rb).unwrap()
            && summary_table_csv(&ra).unwrap() == summary_table_csv(&rb).unwrap(),
        "long and summary CSVs byte-identical",
    );

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let model = &a[0].final_model;
    model.save(&path).unwrap();
    let back = Model::load(&path).unwrap();
    let same_states = model
        .machine
        .banks()
        .iter()
        .zip(back.machine.banks())
        .all(|(p, q)| p.states() == q.states());
    v.check(
        same_states && back.to_json().unwrap() == model.to_json().unwrap(),
        "save/load round trip is bit-exact",
    );

    let mut other = cfg.clone();
    other.seed = 78;
    let c = run_replica(&other, &prepare_data(&other).unwrap(), 0).unwrap();
    v.check(
        c.final_model.to_json().unwrap() != a[0].final_model.to_json().unwrap(),
        "a different seed gives a different model",
    );
    v
}

/// Per-replica results of one training arm.
#[derive(Clone)]
struct Arm {
    final_acc: Vec<f64>,
    max_acc: Vec<f64>,
    negated: Vec<f64>,
}

impl Arm {
    fn describe(&self) -> String {
        let (fm, fs) = mean_sd(&self.final_acc);
        let (mm, _) = mean_sd(&self.max_acc);
        let each: Vec<String> = self.final_acc.iter().map(|a| format!("{a:.4}")).collect();
        format!("final {fm:.4} (sd {fs:.4}) [{}], max {mm:.4}", each.join(" "))
    }
}

/// Desk-scale MNIST: 200 train and 200 test images per class, 5 replicas.
struct Mnist {
    data: Option<PreparedData>,
    base: RunConfig,
    arms: RefCell<BTreeMap<String, Arm>>,
}

impl Mnist {
    fn new() -> Self {
        let base = RunConfig {
            ensembles: 5,
            ..mnist_base(200)
        };
        let data = prepare_data(&base)
            .map_err(|e| eprintln!("MNIST subset unavailable: {e}"))
            .ok();
        Self {
            data,
            base,
            arms: RefCell::new(BTreeMap::new()),
        }
    }

    fn arm(&self, name: &str, tweak: impl FnOnce(&mut RunConfig)) -> Arm {
        if let Some(a) = self.arms.borrow().get(name) {
            return a.clone();
        }
        let mut cfg = self.base.clone();
        tweak(&mut cfg);
        let data = self.data.as_ref().expect("MNIST subset under data/mnist-desk");
        let t0 = Instant::now();
        let outcomes = run_ensemble(&cfg, data).unwrap();
        let arm = Arm {
            final_acc: outcomes
                .iter()
                .map(|o| o.record.final_metrics.as_ref().unwrap().accuracy)
                .collect(),
            max_acc: outcomes.iter().map(|o| o.record.max_accuracy().unwrap()).collect(),
            negated: outcomes
                .iter()
                .map(|o| negated_literal_fraction(o.final_model.machine.banks()).overall.fraction)
                .collect(),
        };
        eprintln!("  [{name}: {} in {:.0} s]", arm.describe(), t0.elapsed().as_secs_f64());
        self.arms.borrow_mut().insert(name.to_string(), arm.clone());
        arm
    }

    fn hvtm(&self) -> Arm {
        self.arm("hv d=2048 n=100 s=5", |_| {})
    }
}

fn mnist_comparison(m: &Mnist) -> Verdict {
    let mut v = Verdict::new();
    let vanilla = m.arm("vanilla n=100 s=5", |c| c.representation = Representation::Vanilla);
    let hv = m.hvtm();
    let (van, _) = mean_sd(&vanilla.final_acc);
    let (hvm, _) = mean_sd(&hv.final_acc);
    v.check(van >= 0.85, format!("vanilla mean final accuracy {van:.4} >= 0.85"));
    v.check(hvm >= 0.85, format!("HV (D=2048, NBits=4) mean final accuracy {hvm:.4} >= 0.85"));
    v.check(
        hvm >= van - 0.02,
        format!("HV - vanilla = {:+.4} >= -0.02", hvm - van),
    );
    v
}

fn hv_size_trend(m: &Mnist) -> Verdict {
    let mut v = Verdict::new();
    let small = m.arm("hv d=512 n=100 s=5", |c| c.hv_size = 512);
    let large = m.arm("hv d=4096 n=100 s=5", |c| c.hv_size = 4096);
    let (s, _) = mean_sd(&small.max_acc);
    let (l, _) = mean_sd(&large.max_acc);
    v.check(s < l, format!("mean max accuracy D=512 {s:.4} < D=4096 {l:.4}"));
    v
}

fn clause_degradation(m: &Mnist) -> Verdict {
    let mut v = Verdict::new();
    let arms: Vec<(usize, Arm)> = [512usize, 128, 32]
        .into_iter()
        .map(|n| (n, m.arm(&format!("hv d=2048 n={n} s=5"), |c| c.clauses_per_class = Some(n))))
        .collect();
    for w in arms.windows(2) {
        let (hi_n, hi) = (&w[0].0, mean_sd(&w[0].1.final_acc).0);
        let (lo_n, lo) = (&w[1].0, mean_sd(&w[1].1.final_acc).0);
        v.check(
            lo <= hi + 0.01,
            format!("mean final accuracy {lo_n} clauses {lo:.4} <= {hi_n} clauses {hi:.4} + 0.01"),
        );
    }
    let (_, sd512) = mean_sd(&arms[0].1.final_acc);
    let (_, sd32) = mean_sd(&arms[2].1.final_acc);
    for (n, arm) in &arms {
        v.check(true, format!("{n} clauses: {}", arm.describe()));
    }
    v.check(sd32 > sd512, format!("sd at 32 clauses {sd32:.4} > sd at 512 clauses {sd512:.4}"));
    v
}

fn negated_literals(m: &Mnist) -> Verdict {
    let mut v = Verdict::new();
    let rbe = m.arm("hv d=2048 n=100 s=1 boost", |c| c.specificity = Some(1.0));
    let s5 = m.hvtm();
    let (a, _) = mean_sd(&rbe.negated);
    let (b, _) = mean_sd(&s5.negated);
    v.check(true, format!("s=1: {}", rbe.describe()));
    let each = |xs: &[f64]| xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    v.check(true, format!("negated fraction per replica s=1 [{}], s=5 [{}]", each(&rbe.negated), each(&s5.negated)));
    v.check(a > b, format!("negated-literal fraction s=1 {a:.4} > s=5 {b:.4}"));
    v
}

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mnist = Mnist::new();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("01 hypervector algebra", Box::new(hv_algebra)),
        ("02 capacity and overlap formulas", Box::new(formula_oracles)),
        ("03 feedback conformance", Box::new(feedback_conformance)),
        ("04 xor convergence", Box::new(xor_convergence)),
        ("05 mnist vanilla vs hypervector", Box::new(|| mnist_comparison(&mnist))),
        ("06 hv size lossiness", Box::new(|| hv_size_trend(&mnist))),
        ("07 clause count degradation", Box::new(|| clause_degradation(&mnist))),
        ("08 balanced accuracy oracle", Box::new(balanced_accuracy_oracle)),
        ("09 explain round trip", Box::new(explain_round_trip)),
        ("10 determinism and persistence", Box::new(determinism)),
        ("11 negated literal fraction", Box::new(|| negated_literals(&mnist))),
    ];
    let mut failed = Vec::new();
    let mut ran = 0;
    for (name, run) in &criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict {
                pass: false,
                notes: vec![format!("FAILED panic: {msg}")],
            }
        });
        let secs = t0.elapsed().as_secs_f64();
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        println!("criterion {name:<36} {tag} ({secs:.1} s)");
        for n in &verdict.notes {
            println!("    {n}");
        }
        if !verdict.pass {
            failed.push(*name);
        }
    }
    println!("\nacceptance: {} of {ran} criteria passed", ran - failed.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
