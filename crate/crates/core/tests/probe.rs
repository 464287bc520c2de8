use ndarray::{array, Array1, Array2};
use rand::Rng;
use rbm_transfer::probe::{accuracy, loss_and_gradient, mean_ci95, predict, probe_accuracy, softmax_probs, train_softmax};
use rbm_transfer::rng::seeded;
use rbm_transfer::{ProbeConfig, SoftmaxModel};

fn random_instance(seed: u64) -> (SoftmaxModel, Array2<f64>, Vec<i64>) {
    let mut r = seeded(seed);
    let (n, d, c) = (r.random_range(1..8), r.random_range(1..5), r.random_range(2..5));
    let mut u = move || r.random::<f64>() * 2.0 - 1.0;
    let model = SoftmaxModel {
        weights: Array2::from_shape_simple_fn((d, c), &mut u),
        bias: Array1::from_shape_simple_fn(c, &mut u),
        class_labels: (0..c as i64).map(|k| 3 * k - 1).collect(),
    };
    let x = Array2::from_shape_simple_fn((n, d), &mut u);
    let labels = (0..n).map(|i| model.class_labels[(i * 7 + seed as usize) % c]).collect();
    (model, x, labels)
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-5;
    for seed in 0..20 {
        let (model, x, y) = random_instance(seed);
        for l2 in [0.0, 0.3] {
            let (_, gw, gb) = loss_and_gradient(&model, x.view(), &y, l2).unwrap();
            let f = |m: &SoftmaxModel| loss_and_gradient(m, x.view(), &y, l2).unwrap().0;
            for ((i, j), &g) in gw.indexed_iter() {
                let (mut p, mut q) = (model.clone(), model.clone());
                p.weights[[i, j]] += h;
                q.weights[[i, j]] -= h;
                let fd = (f(&p) - f(&q)) / (2.0 * h);
                assert!((g - fd).abs() <= 1e-6 * (g.abs() + fd.abs()).max(1e-3), "{g} vs {fd}");
            }
            for (c, &g) in gb.indexed_iter() {
                let (mut p, mut q) = (model.clone(), model.clone());
                p.bias[c] += h;
                q.bias[c] -= h;
                let fd = (f(&p) - f(&q)) / (2.0 * h);
                assert!((g - fd).abs() <= 1e-6 * (g.abs() + fd.abs()).max(1e-3), "{g} vs {fd}");
            }
        }
    }
}

#[test]
fn zero_model_has_uniform_loss_and_lowest_label() {
    let m = SoftmaxModel { weights: Array2::zeros((2, 3)), bias: Array1::zeros(3), class_labels: vec![4, 6, 9] };
    let x = array![[1.0, 2.0], [-1.0, 0.5]];
    let (loss, _, _) = loss_and_gradient(&m, x.view(), &[6, 9], 0.0).unwrap();
    assert!((loss - 3f64.ln()).abs() < 1e-15);
    assert_eq!(predict(&m, x.view()).unwrap(), vec![4, 4]);
    assert!(softmax_probs(&m, x.view()).iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn unknown_label_is_rejected() {
    let m = SoftmaxModel { weights: Array2::zeros((1, 2)), bias: Array1::zeros(2), class_labels: vec![0, 1] };
    assert!(loss_and_gradient(&m, array![[1.0]].view(), &[2], 0.0).is_err());
    assert!(predict(&m, array![[1.0, 2.0]].view()).is_err());
}

#[test]
fn confidence_interval_matches_hand_values() {
    let v = [0.8, 0.9, 1.0, 0.7];
    let (mean, half) = mean_ci95(&v).unwrap();
    let sd = (v.iter().map(|x| (x - 0.85f64).powi(2)).sum::<f64>() / 3.0).sqrt();
    assert!((mean - 0.85).abs() < 1e-15);
    assert!((half - 1.96 * sd / 2.0).abs() < 1e-15);
    assert_eq!(mean_ci95(&[0.5, 0.5]).unwrap(), (0.5, 0.0));
    assert!(mean_ci95(&[1.0]).is_err());
}

#[test]
fn accuracy_counts_matches() {
    assert_eq!(accuracy(&[1, 2, 3, 4], &[1, 0, 3, 0]).unwrap(), 0.5);
    assert!(accuracy(&[], &[]).is_err());
    assert!(accuracy(&[1], &[1, 2]).is_err());
}

#[test]
fn training_loss_never_rises() {
    let mut r = seeded(9);
    let x = Array2::from_shape_simple_fn((60, 5), || r.random::<f64>());
    let y: Vec<i64> = x.rows().into_iter().map(|row| if row[0] + row[1] > 1.0 { 1 } else { 0 }).collect();
    let cfg = ProbeConfig { learning_rate: 50.0, epochs: 30, ..ProbeConfig::default() };
    let (_, trace) = train_softmax(x.view(), &y, &cfg).unwrap();
    assert!(trace.losses.windows(2).all(|w| w[1] <= w[0]));
    assert!(!trace.backoffs.is_empty());
    let acc = probe_accuracy(x.view(), &y, x.view(), &y, &ProbeConfig::default()).unwrap();
    assert!(acc > 0.85, "{acc}");
}

#[test]
fn training_needs_two_classes() {
    let x = array![[0.0], [1.0]];
    assert!(train_softmax(x.view(), &[3, 3], &ProbeConfig::default()).is_err());
    assert!(train_softmax(x.view(), &[3], &ProbeConfig::default()).is_err());
    assert!(train_softmax(x.view(), &[0, 1], &ProbeConfig { batch_size: 0, ..ProbeConfig::default() }).is_err());
}

#[test]
fn training_is_seeded() {
    let mut r = seeded(2);
    let x = Array2::from_shape_simple_fn((30, 3), || r.random::<f64>());
    let y: Vec<i64> = (0..30).map(|i| i % 3).collect();
    let cfg = ProbeConfig { epochs: 5, batch_size: 4, ..ProbeConfig::default() };
    assert_eq!(train_softmax(x.view(), &y, &cfg).unwrap(), train_softmax(x.view(), &y, &cfg).unwrap());
    let other = ProbeConfig { seed: 1, ..cfg.clone() };
    assert_ne!(train_softmax(x.view(), &y, &cfg).unwrap().0, train_softmax(x.view(), &y, &other).unwrap().0);
}
