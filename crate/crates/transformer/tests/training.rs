use patternboost_transformer::{
    load_checkpoint, save_checkpoint, train_step, AdamW, Checkpoint, Model, ModelConfig, ACCUMULATION_WINDOW,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const START: u32 = 0;
const END: u32 = 1;

fn config(seed: u64) -> ModelConfig {
    ModelConfig {
        n_layers: 2,
        dim: 16,
        n_heads: 4,
        vocab_size: 8,
        max_len: 12,
        seed,
    }
}

fn corpus() -> Vec<Vec<u32>> {
    (0..ACCUMULATION_WINDOW as u32)
        .map(|i| {
            let mut s = vec![START];
            s.extend((0..(3 + i % 7)).map(|j| 2 + (i * 3 + j * 5) % 6));
            s.push(END);
            s
        })
        .collect()
}

#[test]
fn replay_is_bitwise_identical() {
    let run = || {
        let mut m = Model::<f32>::new(config(21)).unwrap();
        let mut opt = AdamW::new(m.num_params());
        let losses: Vec<u32> = (0..5)
            .map(|_| train_step(&mut m, &mut opt, &corpus()).unwrap().to_bits())
            .collect();
        (m, opt, losses)
    };
    let (m1, o1, l1) = run();
    let (m2, o2, l2) = run();
    assert_eq!(l1, l2);
    let bits = |x: &[f32]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(m1.params()), bits(m2.params()));
    assert_eq!(bits(&o1.m), bits(&o2.m));
    assert_eq!(bits(&o1.v), bits(&o2.v));
}

#[test]
fn memorizes_a_single_sequence() {
    let target = vec![START, 4, 2, 7, 7, 3, 5, END];
    let mut m = Model::<f32>::new(config(4)).unwrap();
    let mut opt = AdamW::new(m.num_params());
    let initial = m.loss(&target).unwrap();
    let batch = vec![target.clone(); 4];
    for _ in 0..500 {
        train_step(&mut m, &mut opt, &batch).unwrap();
    }
    let trained = m.loss(&target).unwrap();
    assert!(trained < initial, "{trained} vs {initial}");
    for _ in 0..1500 {
        train_step(&mut m, &mut opt, &batch).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let hits = (0..100)
        .filter(|_| {
            let s = m.sample(&mut rng, &[START], END).unwrap();
            s.ended && s.tokens == target[1..target.len() - 1]
        })
        .count();
    assert!(hits > 90, "{hits} of 100 draws reproduced the sequence");
}

#[test]
fn sampling_is_reproducible_and_bounded() {
    let m = Model::<f32>::new(config(2)).unwrap();
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..20)
            .map(|_| m.sample(&mut rng, &[START], END).unwrap())
            .collect::<Vec<_>>()
    };
    let a = draw(1);
    assert_eq!(a, draw(1));
    for s in &a {
        assert!(s.tokens.len() <= m.config().max_len);
        assert!(!s.tokens.contains(&END));
        if !s.ended {
            assert_eq!(s.tokens.len(), m.config().max_len);
        }
    }
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let mut m = Model::<f32>::new(config(6)).unwrap();
    let mut opt = AdamW::new(m.num_params());
    for _ in 0..3 {
        train_step(&mut m, &mut opt, &corpus()).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&path, &m, &opt).unwrap();
    let back: Checkpoint<f32> = load_checkpoint(&path).unwrap();
    assert_eq!(back.model, m);
    assert_eq!(back.opt, opt);
    assert_eq!(back.to_bytes(), std::fs::read(&path).unwrap());

    // Training resumes from the loaded state exactly as it would have continued.
    let (mut m2, mut o2) = (back.model, back.opt);
    train_step(&mut m, &mut opt, &corpus()).unwrap();
    train_step(&mut m2, &mut o2, &corpus()).unwrap();
    assert_eq!(m, m2);

    assert!(load_checkpoint::<f64>(&path).is_err());
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.pop();
    assert!(Checkpoint::<f32>::from_bytes(&bytes).is_err());
}
