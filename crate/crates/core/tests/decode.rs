mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use occucount::hmm::{Hmm, HmmObservation};
use occucount::infer::{sliding_window_decode, viterbi, InferError, SlidingDecoder, WindowConfig};

fn models(rng: &mut ChaCha8Rng, omega: u32) -> Vec<Hmm> {
    vec![
        Hmm::new(&common::random_params(rng), omega).unwrap(),
        common::random_dense_model(rng, omega),
    ]
}

#[test]
fn viterbi_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        for omega in [1, 2] {
            let max_len = if omega == 1 { 6 } else { 4 };
            for model in models(&mut rng, omega) {
                let len = rng.gen_range(1..=max_len);
                let obs = common::random_observations(&mut rng, omega, len);
                let fast = viterbi(&model, &obs).unwrap();
                let (path, score) = common::brute_force_viterbi(&model, &obs);
                assert_eq!(fast.states, path, "{obs:?}");
                assert!((fast.log_prob - score).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn ties_prefer_lower_states() {
    // Flat model: every path has the same score.
    let n = 4;
    let flat = ndarray::Array2::from_elem((n, n), 0.25);
    let pi = ndarray::Array1::from_elem(n, 0.25);
    let model = Hmm::from_matrices(1, pi, flat.clone(), flat).unwrap();
    let obs = vec![HmmObservation::new(1, true); 3];
    let d = viterbi(&model, &obs).unwrap();
    assert!(d.states.iter().all(|s| s.index() == 0));
}

#[test]
fn online_matches_window_by_window_decoding() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..25 {
        let omega = rng.gen_range(1..=6);
        let model = Hmm::new(&common::random_params(&mut rng), omega).unwrap();
        let len = rng.gen_range(1..40);
        let obs = common::random_observations(&mut rng, omega, len);
        let size = rng.gen_range(1..12);
        let online = sliding_window_decode(&model, &obs, WindowConfig::new(size).unwrap()).unwrap();
        assert_eq!(online.len(), obs.len());
        for (t, &count) in online.iter().enumerate() {
            let from = (t + 1).saturating_sub(size);
            let offline = viterbi(&model, &obs[from..=t]).unwrap();
            assert_eq!(count, offline.states.last().unwrap().omega);
            assert!(count <= omega);
        }
    }
}

#[test]
fn full_window_ends_on_offline_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let model = Hmm::new(&common::random_params(&mut rng), 5).unwrap();
    let obs = common::random_observations(&mut rng, 5, 30);
    let online = sliding_window_decode(&model, &obs, WindowConfig::new(30).unwrap()).unwrap();
    let offline = viterbi(&model, &obs).unwrap();
    assert_eq!(
        *online.last().unwrap(),
        offline.states.last().unwrap().omega
    );
}

#[test]
fn decoding_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let model = Hmm::new(&common::random_params(&mut rng), 4).unwrap();
    let obs = common::random_observations(&mut rng, 4, 200);
    let cfg = WindowConfig::default();
    assert_eq!(
        sliding_window_decode(&model, &obs, cfg).unwrap(),
        sliding_window_decode(&model, &obs, cfg).unwrap()
    );
}

#[test]
fn reset_forgets_history() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let model = Hmm::new(&common::random_params(&mut rng), 3).unwrap();
    let obs = common::random_observations(&mut rng, 3, 8);
    let mut dec = SlidingDecoder::new(&model, WindowConfig::new(5).unwrap());
    for &o in &obs {
        dec.push(o).unwrap();
    }
    assert_eq!(dec.window_len(), 5);
    dec.reset();
    assert_eq!(dec.window_len(), 0);
    let again = dec.push(obs[0]).unwrap();
    assert_eq!(again, viterbi(&model, &obs[..1]).unwrap().states[0].omega);
}

#[test]
fn bad_input_is_rejected() {
    let model = Hmm::new(&Default::default(), 2).unwrap();
    assert!(matches!(viterbi(&model, &[]), Err(InferError::Empty)));
    assert!(viterbi(&model, &[HmmObservation::new(3, false)]).is_err());
    assert!(WindowConfig::new(0).is_err());
}
