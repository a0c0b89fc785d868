use park_core::corpus::{generate_synthetic, SynthConfig, SynthOutput};
use park_core::dense::{embed_corpus, DocEmbeddingStore, HashedBowEncoder};
use park_core::kg::{build_catalog, build_kg, EntityCatalog, EntityKind, KgConfig, RelationType, Triple};
use park_core::kge::*;
use park_core::lexical::Analyzer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

#[test]
fn transe_matches_direct_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (h, r, t) = (rand_vec(&mut rng, 64), rand_vec(&mut rng, 64), rand_vec(&mut rng, 64));
        let mut acc = 0.0;
        for i in 0..64 {
            let x = h[i] + r[i] - t[i];
            acc += x * x;
        }
        assert!((transe_score(&h, &r, &t) - acc.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn transh_is_projection_then_transe() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let (h, t, d) = (rand_vec(&mut rng, 32), rand_vec(&mut rng, 32), rand_vec(&mut rng, 32));
        let w = unit(rand_vec(&mut rng, 32));
        let composed = transe_score(&transh_project(&h, &w), &d, &transh_project(&t, &w));
        assert!((transh_score(&h, &t, &w, &d) - composed).abs() < 1e-12);
    }
}

/// Margin loss as a function of a flat parameter vector
/// [h, t, h', t', rel, normal], evaluated without the library.
fn reference_loss(model: KgModel, x: &[f64], d: usize, margin: f64) -> f64 {
    let part = |i: usize| &x[i * d..(i + 1) * d];
    let dist = |h: &[f64], t: &[f64]| -> f64 {
        let rel = part(4);
        let mut acc = 0.0;
        match model {
            KgModel::TransE => {
                for i in 0..d {
                    acc += (h[i] + rel[i] - t[i]).powi(2);
                }
            }
            KgModel::TransH => {
                let w = part(5);
                let wh: f64 = (0..d).map(|i| w[i] * h[i]).sum();
                let wt: f64 = (0..d).map(|i| w[i] * t[i]).sum();
                for i in 0..d {
                    acc += ((h[i] - wh * w[i]) + rel[i] - (t[i] - wt * w[i])).powi(2);
                }
            }
        }
        acc.sqrt()
    };
    (margin + dist(part(0), part(1)) - dist(part(2), part(3))).max(0.0)
}

fn gradient_check(model: KgModel) {
    let d = 8;
    let margin = 1.0;
    let h_step = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 100 {
        let x: Vec<f64> = (0..6).flat_map(|_| rand_vec(&mut rng, d)).map(|v| v * 0.6).collect();
        let mut x = x;
        if model == KgModel::TransH {
            let w = unit(x[5 * d..].to_vec());
            x[5 * d..].copy_from_slice(&w);
        }
        let loss = reference_loss(model, &x, d, margin);
        if loss.abs() < 1e-6 {
            continue; // hinge kink
        }
        let p = |i: usize| &x[i * d..(i + 1) * d];
        let normal: &[f64] = if model == KgModel::TransH { p(5) } else { &[] };
        let g = pair_loss_grad(model, (p(0), p(1)), (p(2), p(3)), p(4), normal, margin);
        assert!((g.loss - loss).abs() < 1e-12);
        let mut analytic = Vec::new();
        analytic.extend(&g.pos.h);
        analytic.extend(&g.pos.t);
        analytic.extend(&g.neg.h);
        analytic.extend(&g.neg.t);
        analytic.extend(g.pos.rel.iter().zip(&g.neg.rel).map(|(a, b)| a + b));
        if model == KgModel::TransH {
            analytic.extend(g.pos.normal.iter().zip(&g.neg.normal).map(|(a, b)| a + b));
        }
        let mut fd = Vec::new();
        for i in 0..analytic.len() {
            let mut xp = x.clone();
            xp[i] += h_step;
            let mut xm = x.clone();
            xm[i] -= h_step;
            fd.push((reference_loss(model, &xp, d, margin) - reference_loss(model, &xm, d, margin)) / (2.0 * h_step));
        }
        let diff: f64 = analytic.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-8);
        assert!(diff / scale < 1e-4, "{model:?}: relative error {}", diff / scale);
        checked += 1;
    }
}

#[test]
fn transe_margin_gradient_matches_finite_differences() {
    gradient_check(KgModel::TransE);
}

#[test]
fn transh_margin_gradient_matches_finite_differences() {
    gradient_check(KgModel::TransH);
}

#[test]
fn transh_penalty_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 6;
    for _ in 0..50 {
        let w = unit(rand_vec(&mut rng, d));
        let r = rand_vec(&mut rng, d);
        let (v, gw, gr) = transh_penalty(&w, &r, 1e-3);
        if v < 1e-6 {
            continue;
        }
        let f = |w: &[f64], r: &[f64]| transh_penalty(w, r, 1e-3).0;
        for i in 0..d {
            let h = 1e-6;
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[i] += h;
            wm[i] -= h;
            assert!(((f(&wp, &r) - f(&wm, &r)) / (2.0 * h) - gw[i]).abs() < 1e-6);
            let (mut rp, mut rm) = (r.clone(), r.clone());
            rp[i] += h;
            rm[i] -= h;
            assert!(((f(&w, &rp) - f(&w, &rm)) / (2.0 * h) - gr[i]).abs() < 1e-6);
        }
    }
}

struct Fixture {
    synth: SynthOutput,
    store: DocEmbeddingStore,
    catalog: EntityCatalog,
    triples: Vec<Triple>,
    doc_rows: Vec<usize>,
}

fn fixture(n_docs: usize) -> Fixture {
    let cfg = SynthConfig {
        n_docs,
        n_authors: n_docs / 10,
        n_venues: 20,
        n_affiliations: 30,
        ..Default::default()
    };
    let synth = generate_synthetic(&cfg, 3).unwrap();
    let enc = HashedBowEncoder::new(32, 1 << 12, Analyzer::default(), 1).unwrap();
    let store = embed_corpus(&enc, &synth.corpus);
    let catalog = build_catalog(&synth.corpus, &synth.authors, &KgConfig::default());
    let triples = build_kg(&synth.corpus, &synth.authors, &catalog, &KgConfig::default(), None).unwrap();
    let doc_rows = catalog
        .range(EntityKind::Document)
        .map(|e| synth.corpus.ordinal(catalog.id(e as u32)).unwrap())
        .collect();
    Fixture {
        synth,
        store,
        catalog,
        triples,
        doc_rows,
    }
}

#[test]
fn documents_stay_frozen_and_constraints_hold() {
    let f = fixture(600);
    for model in [KgModel::TransE, KgModel::TransH] {
        let cfg = KgTrainConfig {
            epochs: 3,
            batch_size: 256,
            ..Default::default()
        };
        let (emb, logs) = train_kg(model, &f.triples, &f.store, &f.doc_rows, &f.catalog, &cfg).unwrap();
        for (i, e) in f.catalog.range(EntityKind::Document).enumerate() {
            assert!(emb.frozen[e]);
            let a: Vec<u32> = emb.entities.row(e).iter().map(|x| x.to_bits()).collect();
            let b: Vec<u32> = f.store.row(f.doc_rows[i]).iter().map(|x| x.to_bits()).collect();
            assert_eq!(a, b);
        }
        assert_eq!(emb.frozen.iter().filter(|&&x| x).count(), f.catalog.count(EntityKind::Document));
        for log in &logs {
            assert!(log.max_trainable_norm <= 1.0 + 1e-6);
            assert!(log.max_normal_deviation < 1e-6);
        }
        if let Some(n) = &emb.normals {
            for r in 0..n.count {
                let w = n.row_f64(r);
                assert!((w.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn zero_epochs_gives_normalized_initialization() {
    let f = fixture(300);
    let cfg = KgTrainConfig {
        epochs: 0,
        ..Default::default()
    };
    let (emb, logs) = train_kg(KgModel::TransE, &f.triples, &f.store, &f.doc_rows, &f.catalog, &cfg).unwrap();
    assert!(logs.is_empty());
    let u = f.catalog.range(EntityKind::User).next().unwrap() as u32;
    let v = entity_vector(&emb, EntityKind::User, f.catalog.id(u)).unwrap();
    assert!(!v.frozen);
    assert!((v.vector.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-6);
    let d = f.synth.corpus.docs()[0].doc_id.clone();
    assert!(entity_vector(&emb, EntityKind::Document, &d).unwrap().frozen);
    assert!(entity_vector(&emb, EntityKind::User, "nobody").is_err());
}

#[test]
fn bad_inputs_are_config_errors() {
    let f = fixture(300);
    let cfg = KgTrainConfig::default();
    let short = &f.doc_rows[1..];
    assert!(matches!(
        train_kg(KgModel::TransE, &f.triples, &f.store, short, &f.catalog, &cfg),
        Err(park_core::Error::Config(_))
    ));
}

#[test]
fn training_is_reproducible_single_threaded_and_loss_falls() {
    park_core::par::set_threads(1);
    let f = fixture(400);
    let cfg = KgTrainConfig {
        epochs: 6,
        batch_size: 512,
        lr: 5e-3,
        ..Default::default()
    };
    let (a, la) = train_kg(KgModel::TransH, &f.triples, &f.store, &f.doc_rows, &f.catalog, &cfg).unwrap();
    let (b, _) = train_kg(KgModel::TransH, &f.triples, &f.store, &f.doc_rows, &f.catalog, &cfg).unwrap();
    park_core::par::set_threads(0);
    assert_eq!(a, b);
    assert!(la.last().unwrap().loss < la[0].loss);
}

#[test]
fn negative_sides_are_balanced() {
    let f = fixture(1500);
    let known = TripleSet::new(f.triples.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut head, mut total) = (0usize, 0usize);
    for i in 0..10_000 {
        let t = &f.triples[(i * 7919) % f.triples.len()];
        if let Some(n) = sample_negative(t, &f.catalog, &known, &mut rng) {
            let (hk, tk) = n.triple.relation.signature();
            assert_eq!(f.catalog.kind(n.triple.head), hk);
            assert_eq!(f.catalog.kind(n.triple.tail), tk);
            assert!(!known.contains(&n.triple));
            total += 1;
            head += usize::from(n.side == Side::Head);
        }
    }
    let share = head as f64 / total as f64;
    assert!((share - 0.5).abs() < 0.02, "head share {share}");
}

#[test]
fn link_prediction_beats_initialization() {
    let f = fixture(3000);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut wrote: Vec<usize> = (0..f.triples.len()).filter(|&i| f.triples[i].relation == RelationType::Wrote).collect();
    rand::seq::SliceRandom::shuffle(wrote.as_mut_slice(), &mut rng);
    let held: std::collections::HashSet<usize> = wrote.into_iter().take(300).collect();
    let train: Vec<Triple> = (0..f.triples.len()).filter(|i| !held.contains(i)).map(|i| f.triples[i]).collect();
    let test: Vec<Triple> = held.iter().map(|&i| f.triples[i]).collect();
    let all = TripleSet::new(f.triples.clone());
    let cfg = KgTrainConfig {
        epochs: 30,
        batch_size: 1024,
        ..Default::default()
    };
    let init = KgTrainConfig { epochs: 0, ..cfg.clone() };
    let (e0, _) = train_kg(KgModel::TransE, &train, &f.store, &f.doc_rows, &f.catalog, &init).unwrap();
    let (e1, _) = train_kg(KgModel::TransE, &train, &f.store, &f.doc_rows, &f.catalog, &cfg).unwrap();
    let (r0, r1) = (filtered_mean_rank(&e0, &test, &all), filtered_mean_rank(&e1, &test, &all));
    assert!(r1 <= r0 / 2.0, "trained {r1} vs init {r0}");
}

#[test]
fn embeddings_round_trip() {
    let f = fixture(300);
    let cfg = KgTrainConfig {
        epochs: 1,
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    for model in [KgModel::TransE, KgModel::TransH] {
        let (emb, _) = train_kg(model, &f.triples, &f.store, &f.doc_rows, &f.catalog, &cfg).unwrap();
        let p = dir.path().join(model.name());
        save_kg_embeddings(&p, &emb).unwrap();
        let back = load_kg_embeddings(&p).unwrap();
        assert_eq!(back, emb);
    }
}
