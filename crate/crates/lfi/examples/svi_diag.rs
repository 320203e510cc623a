use lfi::dataset::SimDataset;
use lfi::gmath::{kl_gaussian, Gaussian};
use lfi::mdn::{MdnDims, TrainConfig};
use lfi::rng::seeded;
use lfi::svi::train_mdn_svi;
use ndarray::arr1;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() {
    let mut rng = seeded(59);
    let pairs = (0..500)
        .map(|_| {
            let t: f64 = rng.sample(StandardNormal);
            let x = t + 0.1 * rng.sample::<f64, _>(StandardNormal);
            (arr1(&[t]), arr1(&[x]))
        })
        .collect();
    let data = SimDataset::new(pairs, None);
    let truth = Gaussian::scalar(0.5 / 1.01, 1.0 / 101.0);
    let mut net = lfi::svi::SviNet::random_init(MdnDims::new(1, 1, 1, vec![20]), 0.01, &mut seeded(77));
    let mut total = 0usize;
    for stage in [500usize, 1000, 1500, 3000] {
        let cfg = TrainConfig { n_epochs: stage - total, rng_seed: 61 + stage as u64, ..TrainConfig::default() };
        net = train_mdn_svi(&net, &data, &cfg).unwrap();
        total = stage;
        let s = net.phi_s.to_flat();
        let smax = s.iter().cloned().fold(f64::MIN, f64::max);
        let smean = s.iter().sum::<f64>() / s.len() as f64;
        let learned = net.forward_predict(&arr1(&[0.5])).components()[0].clone();
        println!(
            "epochs {total}: phi_s mean {smean:.2} max {smax:.2}; m={:.4} v={:.5} KL={:.4}",
            learned.mean()[0],
            learned.cov()[[0, 0]],
            kl_gaussian(&truth, &learned)
        );
    }
}
