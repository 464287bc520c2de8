use ndarray::{array, Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rbm_transfer::data::Dataset;
use rbm_transfer::ranking::score_features;
use rbm_transfer::rbm::{self, Velocity};
use rbm_transfer::rng::{seeded, seeded_stream};
use rbm_transfer::transfer::{adaptive_step, build_transfer_spec, extract_features, init_target, self_taught_features, train_adaptive};
use rbm_transfer::{Rbm, TargetRbm, TrainConfig, VisibleType};

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn random_rbm(nv: usize, nh: usize, vt: VisibleType, seed: u64) -> Rbm {
    let mut r = seeded(seed);
    let n = Normal::new(0.0, 0.8).unwrap();
    Rbm::from_parts(
        Array2::from_shape_simple_fn((nv, nh), || n.sample(&mut r)),
        Array1::from_shape_simple_fn(nv, || n.sample(&mut r)),
        Array1::from_shape_simple_fn(nh, || n.sample(&mut r)),
        vt,
    )
    .unwrap()
}

fn binary_data(rows: usize, cols: usize, seed: u64) -> Dataset {
    let mut r = seeded(seed);
    Dataset::new(Array2::from_shape_simple_fn((rows, cols), || if r.random::<f64>() < 0.4 { 1.0 } else { 0.0 }), None).unwrap()
}

fn target(source: &Rbm, k: usize, m: usize, theta: f64, seed: u64) -> TargetRbm {
    let spec = build_transfer_spec(source, &score_features(source), k, theta).unwrap();
    init_target(spec, source.n_visible(), m, source.visible_type, seed).unwrap()
}

#[test]
fn top_units_are_transferred_in_rank_order() {
    let source = Rbm::from_parts(array![[3.0, 1.0, -2.0], [-3.0, 1.0, 2.0]], array![0.0, 0.0], array![0.1, 0.2, 0.3], VisibleType::Binary).unwrap();
    let spec = build_transfer_spec(&source, &score_features(&source), 2, 0.5).unwrap();
    assert_eq!(spec.source_indices, vec![0, 2]);
    assert_eq!(spec.weights, array![[3.0, -2.0], [-3.0, 2.0]]);
    assert_eq!(spec.hidden_bias, array![0.1, 0.3]);

    let none = build_transfer_spec(&source, &score_features(&source), 0, 0.0).unwrap();
    let t = init_target(none, 2, 4, VisibleType::Binary, 1).unwrap();
    assert_eq!((t.k(), t.m()), (0, 4));
    assert!(build_transfer_spec(&source, &score_features(&source), 4, 0.0).is_err());
    assert!(build_transfer_spec(&source, &score_features(&source), 1, 1.5).is_err());
}

#[test]
fn target_setup_rejects_bad_shapes() {
    let source = random_rbm(5, 4, VisibleType::Binary, 1);
    let spec = build_transfer_spec(&source, &score_features(&source), 2, 1.0).unwrap();
    assert!(init_target(spec.clone(), 5, 0, VisibleType::Binary, 0).is_err());
    assert!(init_target(spec.clone(), 6, 3, VisibleType::Binary, 0).is_err());
    let t = init_target(spec, 5, 3, VisibleType::Binary, 0).unwrap();
    assert!(train_adaptive(&t, &binary_data(4, 6, 0), &TrainConfig::default()).is_err());
}

#[test]
fn adaptive_init_matches_plain_init() {
    let source = random_rbm(7, 5, VisibleType::Binary, 2);
    let t = target(&source, 3, 4, 1.0, 99);
    assert_eq!(t.adaptive, Rbm::init(7, 4, VisibleType::Binary, 99).unwrap());
}

#[test]
fn zero_influence_decouples_the_new_units() {
    for seed in 0..5 {
        let source = random_rbm(6, 5, VisibleType::Binary, seed);
        let data = binary_data(30, 6, seed + 100);
        let t = target(&source, 3, 4, 0.0, seed);
        let cfg = TrainConfig { epochs: 5, batch_size: 7, seed: seed + 7, ..TrainConfig::default() };
        let (trained, _) = train_adaptive(&t, &data, &cfg).unwrap();
        let (plain, _) = rbm::train(&Rbm::init(6, 4, VisibleType::Binary, seed).unwrap(), &data, &cfg).unwrap();
        assert_eq!(trained.adaptive, plain);
        assert_eq!(trained.spec, t.spec);
    }
}

#[test]
fn frozen_block_is_never_written() {
    for (theta, vt) in [(1.0, VisibleType::Binary), (0.3, VisibleType::Gaussian), (0.0, VisibleType::Binary)] {
        let source = random_rbm(6, 5, vt, 3);
        let t = target(&source, 2, 3, theta, 4);
        let cfg = TrainConfig { epochs: 4, batch_size: 5, cd_k: 2, learning_rate: 0.01, ..TrainConfig::default() };
        let (trained, _) = train_adaptive(&t, &binary_data(20, 6, 5), &cfg).unwrap();
        assert_eq!(trained.spec.weights, t.spec.weights);
        assert_eq!(trained.spec.hidden_bias, t.spec.hidden_bias);
        assert_eq!(trained.spec.source_indices, t.spec.source_indices);
        assert_ne!(trained.adaptive, t.adaptive);
    }
}

#[test]
fn influence_enters_continuously() {
    let source = random_rbm(4, 3, VisibleType::Gaussian, 8);
    let batch = array![[0.5, -1.0, 0.2, 1.3], [0.0, 0.7, -0.4, 0.1]];
    let cfg = TrainConfig { learning_rate: 0.05, momentum: 0.0, weight_decay: 0.0, ..TrainConfig::default() };
    let step = |theta: f64| {
        let t = target(&source, 2, 2, theta, 3);
        let mut vel = Velocity::zeros_like(&t.adaptive);
        adaptive_step(&t, batch.view(), &cfg, &mut vel, &mut seeded(1), &mut seeded_stream(1, 1)).unwrap().0.adaptive
    };
    let base = step(0.0);
    let gaps: Vec<f64> = [1e-3, 1e-4]
        .iter()
        .map(|&e| {
            let m = step(e);
            (&m.weights - &base.weights).iter().chain((&m.visible_bias - &base.visible_bias).iter()).map(|d| d.abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(gaps[0] > 0.0 && gaps[0] < 1e-2, "{gaps:?}");
    let ratio = gaps[0] / gaps[1];
    assert!((ratio - 10.0).abs() < 0.5, "{gaps:?}");
}

/// One adaptive update replayed by hand from cloned random streams.
#[test]
fn adaptive_step_matches_hand_computation() {
    let (nv, k, m, n) = (4usize, 2usize, 2usize, 3usize);
    let source = random_rbm(nv, 4, VisibleType::Binary, 21);
    for theta in [0.0, 0.4, 1.0] {
        let t = target(&source, k, m, theta, 5);
        let batch = array![[1.0, 0.0, 1.0, 1.0], [0.0, 1.0, 0.0, 0.0], [1.0, 1.0, 1.0, 0.0]];
        let cfg = TrainConfig { learning_rate: 0.2, momentum: 0.0, weight_decay: 0.001, ..TrainConfig::default() };
        let mut rng = seeded(40);
        let mut frng = seeded_stream(40, 1);
        let (mut tape, mut ftape) = (rng.clone(), frng.clone());
        let mut vel = Velocity::zeros_like(&t.adaptive);
        let (next, state) = adaptive_step(&t, batch.view(), &cfg, &mut vel, &mut rng, &mut frng).unwrap();

        let u = &t.adaptive.weights;
        let wt = &t.spec.weights;
        let up = |v: &[f64], w: &Array2<f64>, b: &Array1<f64>, j: usize| sig(b[j] + (0..nv).map(|i| v[i] * w[[i, j]]).sum::<f64>());
        let mut hp = vec![vec![0.0; m]; n];
        let mut fp = vec![vec![0.0; k]; n];
        for r in 0..n {
            let v = batch.row(r).to_vec();
            for j in 0..m {
                hp[r][j] = up(&v, u, &t.adaptive.hidden_bias, j);
            }
            for j in 0..k {
                fp[r][j] = up(&v, wt, &t.spec.hidden_bias, j);
            }
        }
        let draw = |p: f64, g: &mut rbm_transfer::rng::ChaCha8Rng| if g.random::<f64>() < p { 1.0 } else { 0.0 };
        let hs: Vec<Vec<f64>> = hp.iter().map(|row| row.iter().map(|&p| draw(p, &mut tape)).collect()).collect();
        let fs: Vec<Vec<f64>> = fp.iter().map(|row| row.iter().map(|&p| draw(p, &mut ftape)).collect()).collect();
        let mut vs = vec![vec![0.0; nv]; n];
        for r in 0..n {
            for i in 0..nv {
                let mut a = t.adaptive.visible_bias[i] + (0..m).map(|j| u[[i, j]] * hs[r][j]).sum::<f64>();
                a += theta * (0..k).map(|j| wt[[i, j]] * fs[r][j]).sum::<f64>();
                assert!((state.v_minus[[r, i]] - sig(a)).abs() <= 1e-12);
                vs[r][i] = draw(sig(a), &mut tape);
            }
        }
        let hm: Vec<Vec<f64>> = vs.iter().map(|v| (0..m).map(|j| up(v, u, &t.adaptive.hidden_bias, j)).collect()).collect();
        for i in 0..nv {
            for j in 0..m {
                let stat: f64 = (0..n).map(|r| batch[[r, i]] * hp[r][j] - vs[r][i] * hm[r][j]).sum();
                let want = u[[i, j]] + 0.2 / n as f64 * stat - 0.2 * 0.001 * u[[i, j]];
                assert!((next.adaptive.weights[[i, j]] - want).abs() <= 1e-12, "theta {theta}");
            }
        }
        for j in 0..m {
            let want = t.adaptive.hidden_bias[j] + 0.2 / n as f64 * (0..n).map(|r| hp[r][j] - hm[r][j]).sum::<f64>();
            assert!((next.adaptive.hidden_bias[j] - want).abs() <= 1e-12);
        }
        let fm = state.frozen_h_minus.unwrap();
        for r in 0..n {
            for j in 0..k {
                assert!((fm[[r, j]] - up(&vs[r], wt, &t.spec.hidden_bias, j)).abs() <= 1e-12);
            }
        }
        assert_eq!(next.spec, t.spec);
    }
}

#[test]
fn transferred_features_are_source_features() {
    let source = random_rbm(6, 5, VisibleType::Binary, 30);
    let t = target(&source, 3, 2, 1.0, 31);
    let data = binary_data(8, 6, 32);
    let f = extract_features(&t, &data).unwrap();
    assert_eq!(f.ncols(), 5);
    let stl = self_taught_features(&source, &data).unwrap();
    for (c, &j) in t.spec.source_indices.iter().enumerate() {
        assert_eq!(f.column(c), stl.column(j));
    }
    assert_eq!(f.slice(ndarray::s![.., 3..]), t.adaptive.hidden_probs(data.samples.view()).unwrap());

    let plain = target(&source, 0, 2, 0.0, 31);
    assert_eq!(extract_features(&plain, &data).unwrap(), plain.adaptive.hidden_probs(data.samples.view()).unwrap());
}

#[test]
fn combined_model_scales_only_down_weights() {
    let source = random_rbm(3, 3, VisibleType::Binary, 40);
    let t = target(&source, 2, 1, 0.25, 41);
    let c = t.as_rbm();
    assert_eq!(c.n_hidden(), 3);
    assert_eq!(c.weights.column(0), &t.spec.weights.column(0) * 0.25);
    assert_eq!(c.weights.column(2), t.adaptive.weights.column(0));
}

#[test]
fn training_is_deterministic() {
    let source = random_rbm(6, 5, VisibleType::Binary, 50);
    let t = target(&source, 2, 3, 1.0, 51);
    let data = binary_data(25, 6, 52);
    let cfg = TrainConfig { epochs: 3, batch_size: 4, ..TrainConfig::default() };
    assert_eq!(train_adaptive(&t, &data, &cfg).unwrap().0, train_adaptive(&t, &data, &cfg).unwrap().0);
}
