//! Acceptance suite. Prints one line per criterion and exits non-zero only
//! when a criterion fails that is not listed in `EXPECTED_RED`.
//!
//! Run with `cargo test -p bioie --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bioie::autodiff::{grad_check, Activation, AdamConfig, DropoutMode, GradCheckOptions, Tape, Tensor, Var};
use bioie::corpus::{
    make_folds, parse_chemprot, parse_chemprot_str, parse_pathology_records, parse_pubtator, synth_corpus,
    to_record, write_records, Document, EmbeddingTable, EntityKind, LabelSet, Source, SynthSpec, Task, Vocabulary,
};
use bioie::eval::{constant_baseline, evaluate, macro_f, report_table, Prf};
use bioie::layers::{gcn_propagate, scaled_dot_attention, ModelConfig, ParamStore};
use bioie::pipeline::{
    build_dataset, check_model_gradients, count_parameters, init_model, loss, make_variant, predict, predict_proba,
    softmax_row, AblationVariant, CoordSampling, Dataset, DatasetOptions, Example, CLS_B, CLS_W,
};
use bioie::textgraph::{build_sequence_graph, project_adjacency, CorpusGraphs, GraphKind, SemanticFeatures};
use bioie::training::{
    decode_checkpoint, encode_checkpoint, holdout_split, model_for, run_cross_validation, train_and_test,
    training_accuracy, Checkpoint, RngState, TrainPlan, Trainer,
};

/// Criteria known to fail, with the reason recorded in the README.
const EXPECTED_RED: &[usize] = &[1];

enum Status {
    Pass,
    Fail,
    /// Needs external data that is not present.
    NotRun,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Res<Outcome>);

fn main() {
    let criteria: [Criterion; 12] = [
        ("gradient fidelity", c1_gradients),
        ("softmax normalization", c2_softmax),
        ("attention permutation invariance", c3_attention),
        ("GCN properties", c4_gcn),
        ("PMI oracle", c5_pmi),
        ("metric arithmetic", c6_metrics),
        ("overfit sanity", c7_overfit),
        ("separable fixture", c8_separable),
        ("CDR smoke", c9_cdr_smoke),
        ("ablation harness", c10_ablation),
        ("determinism and persistence", c11_determinism),
        ("corpus parsing", c12_parsing),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome {
            status: Status::Fail,
            detail: format!("error: {e}"),
        });
        let secs = start.elapsed().as_secs_f64();
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotRun => "FAIL (NOT RUN)",
        };
        println!("criterion {n:>2} {tag:<14} {name} [{secs:.1}s]: {}", outcome.detail);
        if matches!(outcome.status, Status::Fail) && !EXPECTED_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

/// `sum(x ⊙ R)` for a fixed pseudo-random `R`, so every output coordinate
/// reaches the loss with a different weight.
fn probe(t: &mut Tape, x: Var) -> bioie::Result<Var> {
    let shape = t.shape(x).to_vec();
    let r = uniform(&mut ChaCha8Rng::seed_from_u64(99), &shape, 1.0);
    let r = t.constant(r);
    let y = t.hadamard(x, r)?;
    Ok(t.sum(y))
}

fn row_normalize(a: &Tensor) -> Tensor {
    let n = a.rows();
    let mut out = a.clone();
    for i in 0..n {
        let s: f64 = a.row(i).iter().sum();
        for v in &mut out.values_mut()[i * n..(i + 1) * n] {
            *v /= s;
        }
    }
    out
}

fn five_token_example(label_count: usize) -> (Arc<Vocabulary>, Arc<EmbeddingTable>, Example) {
    let mut doc = Document::from_text("d0", Source::Synthetic, "tumor measures 3 cm wide");
    doc.linear_chain();
    let docs = vec![doc];
    let vocab = Arc::new(Vocabulary::build(&docs, 1));
    let words = EmbeddingTable::random(&vocab, 100, 5);
    let graphs = CorpusGraphs::build(&docs, &vocab, SemanticFeatures::Static(&words), 0.9, 3).unwrap();
    let adj = project_adjacency(&docs[0], &vocab, &graphs);
    let ids: Vec<usize> = docs[0].tokens.iter().map(|t| vocab.id(&t.surface)).collect();
    assert_eq!(ids.len(), 5);
    let ex = Example {
        doc_id: "d0".into(),
        head_id: "h".into(),
        tail_id: "t".into(),
        ids: Arc::new(ids),
        head_start: 0,
        tail_start: 2,
        adjacency: Some(Arc::new(GraphKind::ALL.map(|k| adj.normalized(k)))),
        label: 1 % label_count,
    };
    (vocab, Arc::new(words), ex)
}

fn c1_gradients() -> Res<Outcome> {
    const EPS: f64 = 1e-5;
    const TOL: f64 = 1e-4;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let opts = GradCheckOptions {
        epsilon: EPS,
        max_coords: None,
        seed: 0,
    };
    let m34 = uniform(&mut rng, &[3, 4], 1.0);
    let m42 = uniform(&mut rng, &[4, 2], 1.0);
    let v4 = uniform(&mut rng, &[4], 1.0);
    let m54 = uniform(&mut rng, &[5, 4], 1.0);
    let adj = {
        let raw = Tensor::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ])?;
        row_normalize(&raw)
    };

    type OpFn = Box<dyn Fn(&mut Tape, Var) -> bioie::Result<Var>>;
    let c = |t: &Tensor| t.clone();
    let (b42, a34, bias4, k54, v54, adj3) = (c(&m42), c(&m34), c(&v4), c(&m54), c(&m54), c(&adj));
    let w44 = uniform(&mut rng, &[4, 4], 1.0);
    let ops: Vec<(&str, Tensor, OpFn)> = vec![
        ("matmul left", m34.clone(), Box::new(move |t, x| {
            let b = t.constant(b42.clone());
            let y = t.matmul(x, b)?;
            probe(t, y)
        })),
        ("matmul right", m42.clone(), Box::new(move |t, x| {
            let a = t.constant(a34.clone());
            let y = t.matmul(a, x)?;
            probe(t, y)
        })),
        ("add", m34.clone(), Box::new(|t, x| {
            let y = t.add(x, x)?;
            probe(t, y)
        })),
        ("sub", m34.clone(), Box::new(|t, x| {
            let s = t.scale(x, 3.0);
            let y = t.sub(x, s)?;
            probe(t, y)
        })),
        ("hadamard", m34.clone(), Box::new(|t, x| {
            let y = t.hadamard(x, x)?;
            probe(t, y)
        })),
        ("add_bias input", m34.clone(), Box::new(move |t, x| {
            let b = t.constant(bias4.clone());
            let y = t.add_bias(x, b)?;
            probe(t, y)
        })),
        ("add_bias bias", v4.clone(), Box::new(|t, x| {
            let m = t.constant(Tensor::filled(vec![3, 4], 0.5));
            let y = t.add_bias(m, x)?;
            probe(t, y)
        })),
        ("tanh", m34.clone(), Box::new(|t, x| {
            let y = t.tanh(x);
            probe(t, y)
        })),
        ("sigmoid", m34.clone(), Box::new(|t, x| {
            let y = t.sigmoid(x);
            probe(t, y)
        })),
        ("identity", m34.clone(), Box::new(|t, x| {
            let y = t.activation(Activation::Identity, x);
            probe(t, y)
        })),
        ("concat axis 0", m34.clone(), Box::new(|t, x| {
            let s = t.tanh(x);
            let y = t.concat(&[x, s], 0)?;
            probe(t, y)
        })),
        ("concat axis 1", m34.clone(), Box::new(|t, x| {
            let s = t.sigmoid(x);
            let y = t.concat(&[s, x], 1)?;
            probe(t, y)
        })),
        ("split", m34.clone(), Box::new(|t, x| {
            let parts = t.split(x, 1, &[1, 3])?;
            let a = t.tanh(parts[0]);
            let y = t.concat(&[parts[1], a], 1)?;
            probe(t, y)
        })),
        ("transpose", m34.clone(), Box::new(|t, x| {
            let y = t.transpose(x)?;
            probe(t, y)
        })),
        ("gather_rows", m34.clone(), Box::new(|t, x| {
            let y = t.gather_rows(x, &[2, 0, 2, 1])?;
            probe(t, y)
        })),
        ("softmax axis 1", m34.clone(), Box::new(|t, x| {
            let y = t.softmax(x, 1)?;
            probe(t, y)
        })),
        ("softmax axis 0", m34.clone(), Box::new(|t, x| {
            let y = t.softmax(x, 0)?;
            probe(t, y)
        })),
        ("dropout", m34.clone(), Box::new(|t, x| {
            let mut r = ChaCha8Rng::seed_from_u64(4);
            let y = t.dropout(x, 0.5, DropoutMode::Train, &mut r)?;
            probe(t, y)
        })),
        ("max_pool_over_time", m54.clone(), Box::new(|t, x| {
            let y = t.max_pool_over_time(x)?;
            probe(t, y)
        })),
        ("cross_entropy", m34.clone(), Box::new(|t, x| t.cross_entropy(x, &[0, 3, 1]))),
        ("attention query", m34.clone(), Box::new(move |t, x| {
            let k = t.constant(k54.clone());
            let v = t.constant(v54.clone());
            let y = scaled_dot_attention(t, x, k, v)?;
            probe(t, y)
        })),
        ("self-attention", m54.clone(), Box::new(|t, x| {
            let y = scaled_dot_attention(t, x, x, x)?;
            probe(t, y)
        })),
        ("gcn states", m34.clone(), Box::new(move |t, x| {
            let a = t.constant(adj3.clone());
            let w = t.constant(w44.clone());
            let b = t.constant(Tensor::filled(vec![4], 0.1));
            let y = gcn_propagate(t, x, a, w, b, Activation::Tanh)?;
            probe(t, y)
        })),
        ("gcn weights", uniform(&mut rng, &[4, 4], 1.0), Box::new({
            let (h, a) = (m34.clone(), adj.clone());
            move |t, x| {
                let h = t.constant(h.clone());
                let a = t.constant(a.clone());
                let b = t.constant(Tensor::zeros(vec![4]));
                let y = gcn_propagate(t, h, a, x, b, Activation::Sigmoid)?;
                probe(t, y)
            }
        })),
    ];
    let mut worst_op = ("", 0.0f64);
    for (name, x, f) in &ops {
        let e = grad_check(f, x, &opts)?;
        if e > worst_op.1 {
            worst_op = (name, e);
        }
    }

    let (vocab, words, ex) = five_token_example(2);
    let model = init_model(&ModelConfig::default(), vocab, Some(words), 7)?;
    let examples = [ex];
    let sampling = CoordSampling::PerParameter(4);
    let pipeline = check_model_gradients(&model, &examples, sampling, EPS, 0)?;
    let cross = check_model_gradients(&model, &examples, sampling, 1e-4, 0)?;
    let elapsed = start.elapsed();
    let ok = worst_op.1 <= TOL && pipeline <= TOL && elapsed < Duration::from_secs(60);
    Ok(Outcome::check(
        ok,
        format!(
            "{} ops, worst {} rel.err {:.2e}; full pipeline rel.err {:.2e} at eps 1e-5 (limit 1e-4), {:.2e} at eps 1e-4; {:.1}s (limit 60s)",
            ops.len(),
            worst_op.0,
            worst_op.1,
            pipeline,
            cross,
            elapsed.as_secs_f64()
        ),
    ))
}

fn c2_softmax() -> Res<Outcome> {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut slices = 0usize;
    for trial in 0..1000 {
        let scale = [1.0, 10.0, 100.0, 1000.0][trial % 4];
        let (m, n, d) = (rng.gen_range(1..12), rng.gen_range(1..12), rng.gen_range(1..9));
        // Attention weights, built the way the attention layer builds them.
        let mut t = Tape::new();
        let q = t.constant(uniform(&mut rng, &[m, d], scale));
        let k = t.constant(uniform(&mut rng, &[n, d], scale));
        let kt = t.transpose(k)?;
        let s = t.matmul(q, kt)?;
        let s = t.scale(s, 1.0 / (d as f64).sqrt());
        let w = t.softmax(s, 1)?;
        let w = t.tensor(w);
        for r in 0..m {
            worst = worst.max((w.row(r).iter().sum::<f64>() - 1.0).abs());
            slices += 1;
        }
        // Classifier output.
        let logits: Vec<f64> = (0..rng.gen_range(2..8)).map(|_| rng.gen_range(-scale..scale)).collect();
        worst = worst.max((softmax_row(&logits).iter().sum::<f64>() - 1.0).abs());
        slices += 1;
    }
    let (vocab, words, ex) = five_token_example(6);
    let config = ModelConfig {
        label_count: 6,
        ..ModelConfig::default()
    };
    let model = init_model(&config, vocab, Some(words), 2)?;
    for row in predict_proba(&model, &[ex])? {
        worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
        slices += 1;
    }
    Ok(Outcome::check(
        worst <= TOL,
        format!("{slices} slices over 1000 random inputs, max |sum - 1| = {worst:.2e} (limit 1e-12)"),
    ))
}

fn c3_attention() -> Res<Outcome> {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (m, n, d, dv) = (
            rng.gen_range(1..6),
            rng.gen_range(2..12),
            rng.gen_range(1..9),
            rng.gen_range(1..9),
        );
        let q = uniform(&mut rng, &[m, d], 2.0);
        let k = uniform(&mut rng, &[n, d], 2.0);
        let v = uniform(&mut rng, &[n, dv], 2.0);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let run = |k: Tensor, v: Tensor| -> bioie::Result<Tensor> {
            let mut t = Tape::new();
            let (q, k, v) = (t.constant(q.clone()), t.constant(k), t.constant(v));
            let o = scaled_dot_attention(&mut t, q, k, v)?;
            Ok(t.tensor(o))
        };
        let a = run(k.clone(), v.clone())?;
        let b = run(k.gather_rows(&perm)?, v.gather_rows(&perm)?)?;
        for (x, y) in a.values().iter().zip(b.values()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(Outcome::check(
        worst < TOL,
        format!("100 trials, max output change {worst:.2e} (limit 1e-12)"),
    ))
}

fn gcn_eval(h: &Tensor, adj: &Tensor, w: &Tensor, b: &Tensor, f: Activation) -> bioie::Result<Tensor> {
    let mut t = Tape::new();
    let (h, a, w, b) = (t.constant(h.clone()), t.constant(adj.clone()), t.constant(w.clone()), t.constant(b.clone()));
    let o = gcn_propagate(&mut t, h, a, w, b, f)?;
    Ok(t.tensor(o))
}

fn max_abs_diff(a: &Tensor, b: &Tensor) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c4_gcn() -> Res<Outcome> {
    const TOL: f64 = 1e-12;
    let two = row_normalize(&Tensor::filled(vec![2, 2], 1.0));
    let h = Tensor::from_rows(&[vec![2.0], vec![0.0]])?;
    let out = gcn_eval(&h, &two, &Tensor::identity(1), &Tensor::zeros(vec![1]), Activation::Identity)?;
    let exact = out.values() == [1.0, 1.0];

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut equiv = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(2..10);
        let (d, e) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let mut a = Tensor::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.4) {
                    a.values_mut()[i * n + j] = 1.0;
                    a.values_mut()[j * n + i] = 1.0;
                }
            }
        }
        let a = row_normalize(&a);
        let h = uniform(&mut rng, &[n, d], 1.0);
        let w = uniform(&mut rng, &[d, e], 1.0);
        let b = uniform(&mut rng, &[e], 1.0);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut pa = Tensor::zeros(vec![n, n]);
        for i in 0..n {
            for j in 0..n {
                pa.values_mut()[i * n + j] = a.values()[perm[i] * n + perm[j]];
            }
        }
        let base = gcn_eval(&h, &a, &w, &b, Activation::Tanh)?.gather_rows(&perm)?;
        let moved = gcn_eval(&h.gather_rows(&perm)?, &pa, &w, &b, Activation::Tanh)?;
        equiv = equiv.max(max_abs_diff(&base, &moved));
    }

    // Ring where every node links to its `k/2` neighbours on each side, plus a self-loop.
    let mut fixed = 0.0f64;
    let mut uniform_rows = 0.0f64;
    for (n, k) in [(6, 2), (9, 4), (12, 6), (7, 6)] {
        let mut a = Tensor::identity(n);
        for i in 0..n {
            for s in 1..=k / 2 {
                a.values_mut()[i * n + (i + s) % n] = 1.0;
                a.values_mut()[i * n + (i + n - s) % n] = 1.0;
            }
        }
        let a = row_normalize(&a);
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = Tensor::from_rows(&vec![u.clone(); n])?;
        let same = gcn_eval(&h, &a, &Tensor::identity(3), &Tensor::zeros(vec![3]), Activation::Identity)?;
        fixed = fixed.max(max_abs_diff(&same, &h));
        let w = uniform(&mut rng, &[3, 4], 1.0);
        let b = uniform(&mut rng, &[4], 1.0);
        let out = gcn_eval(&h, &a, &w, &b, Activation::Tanh)?;
        for r in 1..n {
            for (x, y) in out.row(r).iter().zip(out.row(0)) {
                uniform_rows = uniform_rows.max((x - y).abs());
            }
        }
    }
    Ok(Outcome::check(
        exact && equiv <= TOL && fixed <= TOL && uniform_rows <= TOL,
        format!(
            "2-node example -> {:?} (expect [1, 1] exactly); permutation max diff {equiv:.2e}; regular fixed point {fixed:.2e}, row spread {uniform_rows:.2e} (limit 1e-12)",
            out.values()
        ),
    ))
}

fn docs_from(texts: &[String]) -> Vec<Document> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| Document::from_text(format!("d{i}"), Source::Synthetic, t.as_str()))
        .collect()
}

/// Enumerates every window and recomputes positive PMI from scratch.
fn brute_force_pmi(seqs: &[Vec<usize>], w: usize) -> BTreeMap<(usize, usize), f64> {
    let mut windows: Vec<BTreeSet<usize>> = Vec::new();
    for s in seqs.iter().filter(|s| !s.is_empty()) {
        if s.len() <= w {
            windows.push(s.iter().copied().collect());
        } else {
            for i in 0..=s.len() - w {
                windows.push(s[i..i + w].iter().copied().collect());
            }
        }
    }
    let n = windows.len() as f64;
    let words: BTreeSet<usize> = seqs.iter().flatten().copied().collect();
    let mut out = BTreeMap::new();
    for &a in &words {
        for &b in words.range(a + 1..) {
            let nab = windows.iter().filter(|x| x.contains(&a) && x.contains(&b)).count() as f64;
            if nab == 0.0 {
                continue;
            }
            let na = windows.iter().filter(|x| x.contains(&a)).count() as f64;
            let nb = windows.iter().filter(|x| x.contains(&b)).count() as f64;
            out.insert((a, b), ((nab / n) / ((na / n) * (nb / n))).ln().max(0.0));
        }
    }
    out
}

fn c5_pmi() -> Res<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut edges = 0;
    for _ in 0..200 {
        let n_docs = rng.gen_range(1..6);
        let budget = rng.gen_range(1..=200);
        let vocab_size = rng.gen_range(1..30);
        let window = rng.gen_range(2..13);
        let mut lens: Vec<usize> = (0..n_docs).map(|_| rng.gen_range(0..=budget / n_docs)).collect();
        lens[0] = lens[0].max(1);
        let seqs: Vec<Vec<usize>> = lens
            .iter()
            .map(|&l| (0..l).map(|_| rng.gen_range(0..vocab_size)).collect())
            .collect();
        let texts: Vec<String> = seqs
            .iter()
            .map(|s| s.iter().map(|i| format!("w{i}")).collect::<Vec<_>>().join(" "))
            .collect();
        let docs = docs_from(&texts);
        let vocab = Vocabulary::build(&docs, 1);
        let ids: Vec<Vec<usize>> = seqs
            .iter()
            .map(|s| s.iter().map(|i| vocab.id(&format!("w{i}"))).collect())
            .collect();
        let g = build_sequence_graph(&docs, &vocab, window)?;
        let expect = brute_force_pmi(&ids, window);
        edges += expect.len();
        if g.len() != expect.len() || expect.iter().any(|(&(a, b), &w)| g.weight(a, b) != w) {
            mismatches += 1;
        }
    }

    let docs = docs_from(&["a b x y a b".to_string()]);
    let vocab = Vocabulary::build(&docs, 1);
    let w = build_sequence_graph(&docs, &vocab, 2)?.weight(vocab.id("a"), vocab.id("b"));
    let fixture = (w - (10.0f64 / 9.0).ln()).abs() < 1e-15 && (w - 0.1054).abs() < 5e-5;

    // Windows {a,b} {b,c} {c,a}: p(a,b) / (p(a) p(b)) = (1/3) / (4/9) = 3/4.
    let docs = docs_from(&["a b c a".to_string()]);
    let vocab = Vocabulary::build(&docs, 1);
    let g = build_sequence_graph(&docs, &vocab, 2)?;
    let stat = g.get(vocab.id("a"), vocab.id("b"));
    let clipped = g.total == 3 && stat.is_some_and(|s| s.count == 1 && s.weight == 0.0) && (0.75f64).ln() < 0.0;

    Ok(Outcome::check(
        mismatches == 0 && fixture && clipped,
        format!(
            "200 random corpora ({edges} edges), {mismatches} mismatches (exact equality); ln(10/9) fixture {w:.6}; ln(3/4) pair clipped to 0: {clipped}"
        ),
    ))
}

fn c6_metrics() -> Res<Outcome> {
    let f1 = Prf::from_pr(86.9, 83.7).f;
    let f2 = Prf::from_pr(61.5, 72.3).f;
    let mut worst = 0.0f64;
    for c in 2..=10usize {
        let mut t = Tape::new();
        let z = t.constant(Tensor::zeros(vec![3, c]));
        let l = t.cross_entropy(z, &[0, c - 1, c / 2])?;
        worst = worst.max((t.scalar_value(l) - (c as f64).ln()).abs());
    }
    // Whole model with a zeroed output layer.
    for c in [2usize, 6] {
        let (vocab, words, ex) = five_token_example(c);
        let config = ModelConfig {
            label_count: c,
            ..ModelConfig::default()
        };
        let mut model = init_model(&config, vocab, Some(words), 6)?;
        model.params.get_mut(CLS_W)?.values_mut().fill(0.0);
        model.params.get_mut(CLS_B)?.values_mut().fill(0.0);
        worst = worst.max((loss(&model, &[ex])? - (c as f64).ln()).abs());
    }
    let ok = (f1 - 85.3).abs() <= 0.05 && (f2 - 66.4).abs() <= 0.15 && worst <= 1e-12;
    Ok(Outcome::check(
        ok,
        format!(
            "F(86.9, 83.7) = {f1:.3} (85.3 +- 0.05); F(61.5, 72.3) = {f2:.3} (66.4 +- 0.15); uniform-logit loss vs ln C max diff {worst:.2e} (limit 1e-12)"
        ),
    ))
}

fn synth_dataset(spec: &SynthSpec, seed: u64, opts: &DatasetOptions) -> bioie::Result<Dataset> {
    let (corpus, _) = synth_corpus(spec, seed)?;
    build_dataset(corpus.documents, Task::Pathology(EntityKind::Size), None, None, opts)
}

fn defaults_for(data: &Dataset) -> ModelConfig {
    ModelConfig {
        label_count: data.label_set.len(),
        ..ModelConfig::default()
    }
}

/// Epochs until training accuracy reaches 100%, or `None` within `limit`.
fn epochs_to_memorize(data: &Dataset, examples: &[Example], limit: usize) -> bioie::Result<Option<usize>> {
    let mut trainer = Trainer::new(model_for(data, &defaults_for(data), 0)?, TrainPlan::default())?;
    for epoch in 1..=limit {
        trainer.run_epoch(examples, &data.label_set)?;
        if training_accuracy(&trainer.model, examples)? == 1.0 {
            return Ok(Some(epoch));
        }
    }
    Ok(None)
}

fn c7_overfit() -> Res<Outcome> {
    let start = Instant::now();
    let data = synth_dataset(&SynthSpec::separable(20, Source::Tcga), 7, &DatasetOptions::default())?;
    let examples: Vec<Example> = data.examples.iter().take(20).cloned().collect();
    let planted = epochs_to_memorize(&data, &examples, 300)?;
    // Labels unrelated to the text, so only memorization can fit them.
    let shuffled: Vec<Example> = examples
        .iter()
        .enumerate()
        .map(|(i, e)| Example {
            label: (i * 7 / 3) % 2,
            ..e.clone()
        })
        .collect();
    let random = epochs_to_memorize(&data, &shuffled, 300)?;
    let elapsed = start.elapsed();
    Ok(Outcome::check(
        examples.len() == 20 && planted.is_some() && random.is_some() && elapsed < Duration::from_secs(120),
        format!(
            "{} instances, default config and plan: 100% after {planted:?} epochs (planted labels), {random:?} epochs (arbitrary labels); {:.1}s (limit 300 epochs, 120s)",
            examples.len(),
            elapsed.as_secs_f64()
        ),
    ))
}

fn reduced_config(label_count: usize) -> ModelConfig {
    ModelConfig {
        d_w: 50,
        d_p: 10,
        hidden: 32,
        heads: 4,
        label_count,
        ..ModelConfig::default()
    }
}

fn c8_separable() -> Res<Outcome> {
    let opts = DatasetOptions {
        d_w: 50,
        ..DatasetOptions::default()
    };
    let data = synth_dataset(&SynthSpec::separable(200, Source::Tcga), 8, &opts)?;
    let docs: BTreeMap<&str, &Document> = data.documents.iter().map(|d| (d.id.as_str(), d)).collect();
    let gold = data.labels();
    let oracle: Vec<usize> = data
        .examples
        .iter()
        .map(|e| usize::from(docs[e.doc_id.as_str()].text.contains("diameter")))
        .collect();
    let oracle_f = macro_f(&oracle, &gold, &data.label_set)?;
    let cv = run_cross_validation(&data, &reduced_config(data.label_set.len()), 10, &TrainPlan::default())?;
    let (pooled, mean) = (cv.pooled.macro_prf.f, cv.mean.f);
    Ok(Outcome::check(
        pooled >= 95.0 && mean >= 95.0 && oracle_f == 100.0,
        format!(
            "{} instances, 10 folds: pooled macro-F {pooled:.2}, mean fold macro-F {mean:.2} (limit >= 95); cue oracle {oracle_f:.1} (expect 100)",
            data.examples.len()
        ),
    ))
}

fn env_dir(var: &str) -> Option<PathBuf> {
    std::env::var_os(var).map(PathBuf::from).filter(|p| p.is_dir())
}

/// The one file under `dir` whose name contains every needle.
fn find_file(dir: &Path, needles: &[&str]) -> Res<PathBuf> {
    let mut hits: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| needles.iter().all(|s| n.contains(s)))
        })
        .collect();
    if hits.len() != 1 {
        return Err(format!("{}: expected one file matching {needles:?}, found {}", dir.display(), hits.len()).into());
    }
    Ok(hits.remove(0))
}

fn c9_cdr_smoke() -> Res<Outcome> {
    let Some(dir) = env_dir("BIOIE_CDR_DIR") else {
        return Ok(Outcome {
            status: Status::NotRun,
            detail: "set BIOIE_CDR_DIR to the directory holding the CDR PubTator files".into(),
        });
    };
    let start = Instant::now();
    let mut train = parse_pubtator(&find_file(&dir, &["Training", "PubTator"])?)?.documents;
    let dev = parse_pubtator(&find_file(&dir, &["Development", "PubTator"])?)?.documents;
    train.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
    train.truncate(train.len().div_ceil(10));
    let dev_ids: BTreeSet<String> = dev.iter().map(|d| d.id.clone()).collect();
    let docs: Vec<Document> = train.into_iter().chain(dev).collect();
    let opts = DatasetOptions {
        d_w: 50,
        ..DatasetOptions::default()
    };
    let data = build_dataset(docs, Task::Cdr, None, None, &opts)?;
    let (dev_ex, train_ex): (Vec<Example>, Vec<Example>) =
        data.examples.iter().cloned().partition(|e| dev_ids.contains(&e.doc_id));
    let config = ModelConfig {
        use_pretrained: false,
        ..reduced_config(data.label_set.len())
    };
    let plan = TrainPlan {
        epochs: 5,
        patience: None,
        ..TrainPlan::default()
    };
    let mut trainer = Trainer::new(model_for(&data, &config, 0)?, plan)?;
    trainer.fit(&train_ex, &[], &data.label_set)?;
    let gold: Vec<usize> = dev_ex.iter().map(|e| e.label).collect();
    let f = macro_f(&predict(&trainer.model, &dev_ex)?, &gold, &data.label_set)?;
    let positive = LabelSet::cdr().index_of("CID").expect("CID label");
    let baseline = constant_baseline(&gold, positive, &data.label_set)?.f;
    let elapsed = start.elapsed();
    Ok(Outcome::check(
        f >= baseline + 10.0 && elapsed < Duration::from_secs(1800),
        format!(
            "{} train / {} dev instances: dev F {f:.2} vs all-positive {baseline:.2} (need +10); {:.0}s (limit 1800s)",
            train_ex.len(),
            dev_ex.len(),
            elapsed.as_secs_f64()
        ),
    ))
}

const TABLE_ROWS: [&str; 7] = [
    "Proposed Method",
    "- pretrained embeddings",
    "- position",
    "- position - pretrained embeddings",
    "- Multi-head Attention",
    "- Multi-head Attention + Single-head attention",
    "- GCN",
];

fn c10_ablation() -> Res<Outcome> {
    let data = synth_dataset(&SynthSpec::separable(20, Source::Tcga), 10, &DatasetOptions::default())?;
    let base = defaults_for(&data);
    let plan = TrainPlan {
        epochs: 1,
        ..TrainPlan::default()
    };
    let mut counts = Vec::new();
    let mut rows = Vec::new();
    for v in AblationVariant::ALL {
        let mut trainer = Trainer::new(model_for(&data, &make_variant(&base, v), 0)?, plan.clone())?;
        trainer.run_epoch(&data.examples, &data.label_set)?;
        counts.push(count_parameters(&trainer.model).0);
        let pred = predict(&trainer.model, &data.examples)?;
        rows.push((v.label().to_string(), evaluate(&pred, &data.labels(), &data.label_set, 0, 0)?));
    }
    let distinct = counts.iter().collect::<BTreeSet<_>>().len() == counts.len();
    let table = report_table(&rows);
    let body: Vec<&str> = table.lines().skip(2).collect();
    let rows_ok = body.len() == TABLE_ROWS.len()
        && body.iter().zip(TABLE_ROWS).all(|(line, label)| {
            line.strip_prefix(label)
                .is_some_and(|rest| rest.starts_with("  ") && !rest.trim_start().starts_with('-'))
        });
    Ok(Outcome::check(
        distinct && rows_ok,
        format!("7 variants trained one epoch; parameter counts {counts:?} distinct: {distinct}; table rows match: {rows_ok}"),
    ))
}

fn bits(store: &ParamStore) -> Vec<(String, Vec<u64>)> {
    store
        .iter()
        .map(|(n, t)| (n.to_string(), t.values().iter().map(|v| v.to_bits()).collect()))
        .collect()
}

fn small_config(label_count: usize) -> ModelConfig {
    ModelConfig {
        d_w: 8,
        d_p: 3,
        max_dist: 10,
        hidden: 6,
        heads: 3,
        label_count,
        ..ModelConfig::default()
    }
}

fn small_plan(epochs: usize, batch_size: usize) -> TrainPlan {
    TrainPlan {
        epochs,
        batch_size,
        seed: 11,
        adam: AdamConfig {
            lr: 0.01,
            ..AdamConfig::default()
        },
        ..TrainPlan::default()
    }
}

fn c11_determinism() -> Res<Outcome> {
    let opts = DatasetOptions {
        d_w: 8,
        window: 5,
        ..DatasetOptions::default()
    };
    // Corpus generation through evaluation, twice.
    let run = || -> bioie::Result<_> {
        let data = synth_dataset(&SynthSpec::separable(30, Source::Tcga), 11, &opts)?;
        let split = holdout_split(data.examples.len(), 11)?;
        let (model, fit, report, pred) =
            train_and_test(&data, &small_config(data.label_set.len()), &split, &small_plan(3, 4), 100)?;
        let losses: Vec<u64> = fit.history.iter().map(|r| r.loss.to_bits()).collect();
        Ok((bits(&model.params), losses, format!("{report:?}"), pred, model, data))
    };
    let a = run()?;
    let b = run()?;
    let reproducible = a.0 == b.0 && a.1 == b.1 && a.2 == b.2 && a.3 == b.3;

    let (model, data) = (a.4, a.5);
    let mut trainer = Trainer::new(model.clone(), small_plan(1, 4))?;
    trainer.run_epoch(&data.examples, &data.label_set)?;
    let ckpt = Checkpoint {
        model: trainer.model.clone(),
        labels: data.label_set.labels.clone(),
        optimizer: Some(trainer.optimizer.clone()),
        rng: RngState { seed: 11, epoch: 1 },
    };
    let bytes = encode_checkpoint(&ckpt);
    let back = decode_checkpoint(&bytes, Some(&ckpt.model.config))?;
    let round_trip = bits(&back.model.params) == bits(&ckpt.model.params)
        && back == ckpt
        && encode_checkpoint(&back) == bytes;

    // 20 instances at batch size 1 for 5 epochs is 100 optimizer steps.
    let twenty: Vec<Example> = data.examples.iter().take(20).cloned().collect();
    let plan = TrainPlan {
        frozen: vec!["lstm".into(), "embed.pos".into()],
        ..small_plan(1, 1)
    };
    let mut tuner = Trainer::new(model, plan)?;
    let before = bits(&tuner.model.params);
    let mut steps = 0;
    for _ in 0..5 {
        tuner.run_epoch(&twenty, &data.label_set)?;
        steps += twenty.len();
    }
    let after = bits(&tuner.model.params);
    let frozen = tuner.frozen().clone();
    let frozen_ok = !frozen.is_empty()
        && before.iter().zip(&after).all(|((name, x), (_, y))| (x == y) == frozen.contains(name));

    let mut folds_ok = true;
    for n in [10usize, 37, 200, 1001] {
        for k in [2usize, 5, 10] {
            for seed in 0..4 {
                let plan = make_folds(n, k, seed)?;
                let mut seen = vec![0usize; n];
                for f in 0..k {
                    let s = plan.split(f);
                    s.test.iter().for_each(|&i| seen[i] += 1);
                    let mut all: Vec<usize> = s.train.iter().chain(&s.dev).chain(&s.test).copied().collect();
                    all.sort_unstable();
                    folds_ok &= all == (0..n).collect::<Vec<_>>();
                }
                folds_ok &= seen.iter().all(|&c| c == 1);
            }
        }
    }
    Ok(Outcome::check(
        reproducible && round_trip && frozen_ok && steps == 100 && folds_ok,
        format!(
            "repeat run bitwise equal: {reproducible}; checkpoint ({} bytes) bit-exact: {round_trip}; {} frozen tensors unchanged after {steps} steps, all others updated: {frozen_ok}; folds disjoint and covering: {folds_ok}",
            bytes.len(),
            frozen.len()
        ),
    ))
}

fn c12_parsing() -> Res<Outcome> {
    let mut parts = Vec::new();
    let mut failed = false;
    let mut missing = false;

    // Synthetic TFAH-shaped corpus through records and back.
    let (corpus, _) = synth_corpus(&SynthSpec::tfah(), 12)?;
    let dir = tempfile::tempdir()?;
    let (p1, p2) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    write_records(&p1, &corpus.documents)?;
    let first = parse_pathology_records(&p1)?.documents;
    write_records(&p2, &first)?;
    let second = parse_pathology_records(&p2)?.documents;
    let same_records = corpus
        .documents
        .iter()
        .zip(&first)
        .all(|(a, b)| to_record(a).ok() == to_record(b).ok());
    let tfah = first.len() == 1404 && corpus.documents.len() == 1404 && first == second && same_records
        && std::fs::read(&p1)? == std::fs::read(&p2)?;
    failed |= !tfah;
    parts.push(format!("synthetic TFAH {} documents round-trip: {tfah}", first.len()));

    // Only CPR:3/4/5/6/9 survive as positives; other groups fold into the negative class.
    let p = Path::new("fixture");
    let abs = "10\tT\tAspirin inhibits COX1. Later KRAS rose.\n";
    let ents = "10\tT1\tCHEMICAL\t2\t9\tAspirin\n10\tT2\tGENE-Y\t19\t23\tCOX1\n";
    let label_of = |group: &str| -> Res<String> {
        let rel = format!("10\t{group}\tArg1:T1\tArg2:T2\n");
        let c = parse_chemprot_str((abs, p), (ents, p), (&rel, p))?;
        let i = &c.instances[0];
        Ok(i.label_set.labels[i.label].clone())
    };
    let mut mapping_ok = true;
    for n in 1..=10 {
        let group = format!("CPR:{n}");
        let expect = if [3, 4, 5, 6, 9].contains(&n) { group.clone() } else { "negative".into() };
        mapping_ok &= label_of(&group)? == expect;
    }
    failed |= !mapping_ok;
    parts.push(format!("CPR group mapping: {mapping_ok}"));

    match env_dir("BIOIE_CDR_DIR") {
        Some(dir) => {
            let mut total = 0;
            for split in ["Training", "Development", "Test"] {
                total += parse_pubtator(&find_file(&dir, &[split, "PubTator"])?)?.documents.len();
            }
            failed |= total != 1500;
            parts.push(format!("CDR documents {total} (expect 1500)"));
        }
        None => {
            missing = true;
            parts.push("CDR not run (set BIOIE_CDR_DIR)".into());
        }
    }
    match env_dir("BIOIE_CHEMPROT_DIR") {
        Some(dir) => {
            let c = parse_chemprot(
                &find_file(&dir, &["abstracts.tsv"])?,
                &find_file(&dir, &["entities.tsv"])?,
                &find_file(&dir, &["gold_standard.tsv"]).or_else(|_| find_file(&dir, &["relations.tsv"]))?,
            )?;
            let allowed = ["CPR:3", "CPR:4", "CPR:5", "CPR:6", "CPR:9"];
            let positives: Vec<&str> = c
                .instances
                .iter()
                .filter(|i| Some(i.label) != i.label_set.negative)
                .map(|i| i.label_set.labels[i.label].as_str())
                .collect();
            let ok = !positives.is_empty() && positives.iter().all(|l| allowed.contains(l));
            failed |= !ok;
            parts.push(format!("ChemProt {} positives, all in CPR:3/4/5/6/9: {ok}", positives.len()));
        }
        None => {
            missing = true;
            parts.push("ChemProt not run (set BIOIE_CHEMPROT_DIR)".into());
        }
    }
    let status = if failed {
        Status::Fail
    } else if missing {
        Status::NotRun
    } else {
        Status::Pass
    };
    Ok(Outcome {
        status,
        detail: parts.join("; "),
    })
}
