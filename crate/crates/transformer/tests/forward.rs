use patternboost_transformer::{Model, ModelConfig, TransformerError};

fn config(vocab_size: usize) -> ModelConfig {
    ModelConfig {
        n_layers: 2,
        dim: 16,
        n_heads: 4,
        vocab_size,
        max_len: 12,
        seed: 7,
    }
}

#[test]
fn rows_are_distributions() {
    let input = [0u32, 4, 9, 1, 1, 3, 8, 2];
    let m32 = Model::<f32>::new(config(10)).unwrap();
    for row in m32.probabilities(&input).unwrap() {
        let s: f64 = row.iter().map(|&p| p as f64).sum();
        assert!((s - 1.0).abs() <= 1e-6, "{s}");
        assert!(row.iter().all(|&p| p >= 0.0));
    }
    let m64 = Model::<f64>::new(config(10)).unwrap();
    for row in m64.probabilities(&input).unwrap() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn zero_parameters_give_uniform_rows() {
    let v = 6;
    let m = Model::<f64>::zeros(config(v)).unwrap();
    let seq = [0u32, 1, 2, 3, 4, 5];
    for row in m.probabilities(&seq[..5]).unwrap() {
        assert!(row.iter().all(|&p| (p - 1.0 / v as f64).abs() < 1e-15));
    }
    let l = seq.len() - 2;
    let expected = (l + 1) as f64 * (v as f64).ln();
    assert!((m.loss(&seq).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn outputs_are_causal() {
    let m = Model::<f32>::new(config(10)).unwrap();
    let base = [0u32, 4, 9, 1, 1, 3, 8, 2, 5];
    let reference = m.probabilities(&base).unwrap();
    for j in 0..base.len() {
        let mut changed = base;
        changed[j] = (base[j] + 3) % 10;
        let out = m.probabilities(&changed).unwrap();
        for i in 0..j {
            assert_eq!(out[i], reference[i], "row {i} moved when token {j} changed");
        }
        assert_ne!(out[j], reference[j]);
    }
}

#[test]
fn cached_path_matches_full_forward() {
    let m = Model::<f64>::new(config(10)).unwrap();
    let input = [0u32, 4, 9, 1, 1, 3, 8, 2, 5, 5, 7, 6];
    let full = m.probabilities(&input).unwrap();
    let cached = m.probabilities_cached(&input).unwrap();
    for (a, b) in full.iter().zip(&cached) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

#[test]
fn overlength_and_foreign_tokens_are_rejected() {
    let m = Model::<f32>::new(config(10)).unwrap();
    assert!(matches!(
        m.probabilities(&[0; 13]),
        Err(TransformerError::TooLong { got: 13, max_len: 12 })
    ));
    assert!(m.probabilities(&[0; 12]).is_ok());
    assert!(matches!(m.loss(&[0; 14]), Err(TransformerError::TooLong { .. })));
    assert!(matches!(
        m.loss(&[0, 10]),
        Err(TransformerError::Token { token: 10, .. })
    ));
    assert!(matches!(m.loss(&[0]), Err(TransformerError::TooShort(1))));
}

#[test]
fn loss_is_non_negative() {
    let m = Model::<f32>::new(config(10)).unwrap();
    for seq in [vec![0u32, 1], vec![0, 9, 9, 9, 9, 2], vec![3; 13]] {
        assert!(m.loss(&seq).unwrap() >= 0.0);
    }
}
