//! Cascade-forward multilayer networks and their trainers.
//!
//! A cascade-forward layer receives the network input and the outputs of
//! every earlier layer, each through its own weight block. With
//! `cascade = false` the same code is a plain feedforward net.

mod net;
mod norm;
mod optim;
mod train;

pub use net::{Activation, Batch, CascadeNet, Jacobian, LayerShape, Topology};
pub use norm::{dminmax, dminmax_inverse, NormalizationSpec, Standardizer};
pub use train::{
    check_memory_contract, lm_step, train, Algorithm, EpochRecord, StopReason, TrainConfig,
    TrainLog, LM_MAX_WEIGHTS,
};

/// Hidden layer sizes of the reference fault-location network.
pub const REFERENCE_HIDDEN: [usize; 4] = [20, 18, 10, 5];

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(n: usize, dim: usize, seed: u64) -> Batch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..0.9)).collect();
        Batch::scalar(inputs, &targets)
    }

    /// Straight-line forward pass written independently of `CascadeNet`:
    /// explicit loops over the documented parameter layout.
    fn reference_forward(topology: &Topology, params: &[f64], x: &[f64]) -> f64 {
        let mut sizes = vec![topology.input_dim];
        sizes.extend(&topology.hidden);
        sizes.push(1);
        let mut outs: Vec<Vec<f64>> = vec![x.to_vec()];
        let mut offset = 0;
        for l in 1..sizes.len() {
            let inputs: Vec<f64> = if topology.cascade {
                outs.iter().flatten().copied().collect()
            } else {
                outs[l - 1].clone()
            };
            let fan_in = inputs.len();
            let mut layer = Vec::new();
            for i in 0..sizes[l] {
                let mut z = params[offset + sizes[l] * fan_in + i];
                for (j, v) in inputs.iter().enumerate() {
                    z += params[offset + i * fan_in + j] * v;
                }
                layer.push(if l + 1 == sizes.len() { z } else { z.tanh() });
            }
            offset += sizes[l] * fan_in + sizes[l];
            outs.push(layer);
        }
        outs.last().unwrap()[0]
    }

    #[test]
    fn forward_matches_independent_reimplementation() {
        for cascade in [true, false] {
            let mut topo = Topology::cascade(7, &[5, 4, 3]);
            topo.cascade = cascade;
            let net = CascadeNet::init_weights(topo.clone(), 11).unwrap();
            let mut params = net.params().to_vec();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            params.iter_mut().for_each(|p| *p = rng.gen_range(-1.0..1.0));
            let net = CascadeNet::from_params(topo.clone(), params.clone()).unwrap();
            for x in random_batch(5, 7, 9).inputs {
                let a = net.predict(&x).unwrap();
                let b = reference_forward(&topo, &params, &x);
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_cascade_blocks_reduce_to_feedforward() {
        let topo = Topology::cascade(4, &[3, 2]);
        let ff_topo = Topology::feedforward(4, &[3, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut casc = CascadeNet::zeros(topo).unwrap();
        let mut ff = CascadeNet::zeros(ff_topo).unwrap();
        for p in ff.params_mut() {
            *p = rng.gen_range(-1.0..1.0);
        }
        // Copy each feedforward layer's single block into the matching
        // block of the cascade net; every other block stays zero.
        for l in 0..ff.layout().len() {
            let fs = ff.layout()[l].clone();
            let cs = casc.layout()[l].clone();
            let (c0, c1) = casc.block_columns(l, l).unwrap();
            for i in 0..fs.out {
                for j in 0..(c1 - c0) {
                    casc.params_mut()[cs.weight_offset + i * cs.fan_in + c0 + j] =
                        ff.params()[fs.weight_offset + i * fs.fan_in + j];
                }
                casc.params_mut()[cs.bias_offset + i] = ff.params()[fs.bias_offset + i];
            }
        }
        for x in random_batch(6, 4, 1).inputs {
            assert!((casc.predict(&x).unwrap() - ff.predict(&x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_net_outputs_zero() {
        let net = CascadeNet::zeros(Topology::cascade(3, &REFERENCE_HIDDEN)).unwrap();
        assert_eq!(net.predict(&[0.3, -2.0, 5.0]).unwrap(), 0.0);
        assert!(net.predict(&[1.0]).is_err());
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let topo = Topology::cascade(128, &REFERENCE_HIDDEN);
        let a = CascadeNet::init_weights(topo.clone(), 42).unwrap();
        let b = CascadeNet::init_weights(topo.clone(), 42).unwrap();
        let c = CascadeNet::init_weights(topo, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for shape in a.layout() {
            let bound = 1.0 / (shape.fan_in as f64).sqrt();
            let w = &a.params()[shape.weight_offset..shape.bias_offset];
            assert!(w.iter().all(|v| v.abs() <= bound));
            let b = &a.params()[shape.bias_offset..shape.bias_offset + shape.out];
            assert!(b.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn reference_block8_net_fits_lm_contract() {
        let n = Topology::cascade(128, &REFERENCE_HIDDEN).param_count();
        assert_eq!(n, 7999);
        assert!(check_memory_contract(Algorithm::Lm, n).is_ok());
        let wide = Topology::cascade(584, &REFERENCE_HIDDEN).param_count();
        assert!(check_memory_contract(Algorithm::Lm, wide).is_err());
        assert!(check_memory_contract(Algorithm::Cgb, wide).is_ok());
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let topo = Topology::cascade(5, &[4, 3]);
        let net = CascadeNet::init_weights(topo.clone(), 8).unwrap();
        let batch = random_batch(6, 5, 21);
        let grad = net.gradient(&batch).unwrap();
        let loss = |p: &[f64]| {
            let n = CascadeNet::from_params(topo.clone(), p.to_vec()).unwrap();
            0.5 * n.residuals(&batch).unwrap().iter().map(|r| r * r).sum::<f64>()
        };
        let h = 1e-6;
        let mut p = net.params().to_vec();
        for k in 0..p.len() {
            let orig = p[k];
            p[k] = orig + h;
            let up = loss(&p);
            p[k] = orig - h;
            let down = loss(&p);
            p[k] = orig;
            let fd = (up - down) / (2.0 * h);
            let rel = (fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-3);
            assert!(rel < 1e-6, "param {k}: fd {fd} analytic {}", grad[k]);
        }
    }

    #[test]
    fn zero_residuals_give_zero_gradient() {
        let topo = Topology::cascade(3, &[4]);
        let net = CascadeNet::init_weights(topo, 2).unwrap();
        let mut batch = random_batch(4, 3, 5);
        batch.targets = batch
            .inputs
            .iter()
            .map(|x| vec![net.predict(x).unwrap()])
            .collect();
        assert!(net.gradient(&batch).unwrap().iter().all(|&g| g.abs() < 1e-15));
    }

    #[test]
    fn batch_gradient_is_sum_of_sample_gradients() {
        let topo = Topology::cascade(3, &[4, 2]);
        let net = CascadeNet::init_weights(topo, 6).unwrap();
        let batch = random_batch(5, 3, 8);
        let total = net.gradient(&batch).unwrap();
        let mut summed = vec![0.0; total.len()];
        for (x, t) in batch.inputs.iter().zip(&batch.targets) {
            let single = Batch {
                inputs: vec![x.clone()],
                targets: vec![t.clone()],
            };
            for (s, g) in summed.iter_mut().zip(net.gradient(&single).unwrap()) {
                *s += g;
            }
        }
        for (a, b) in total.iter().zip(&summed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_transpose_residual_is_gradient() {
        let topo = Topology::cascade(6, &[5, 3]);
        let net = CascadeNet::init_weights(topo, 4).unwrap();
        let batch = random_batch(7, 6, 2);
        let (jac, r) = net.jacobian(&batch).unwrap();
        let jtr = jac.transpose_mul(&r);
        let grad = net.gradient(&batch).unwrap();
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let diff = jtr.iter().zip(&grad).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(diff <= 1e-10 * norm);
    }

    #[test]
    fn heavily_damped_lm_step_follows_negative_gradient() {
        let topo = Topology::cascade(5, &[4, 3]);
        let net = CascadeNet::init_weights(topo, 12).unwrap();
        for n in [4, 60] {
            let batch = random_batch(n, 5, 30);
            let (jac, r) = net.jacobian(&batch).unwrap();
            let step = lm_step(&jac, &r, 1e8).unwrap();
            let g = jac.transpose_mul(&r);
            let cos = -step.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
                / (step.iter().map(|v| v * v).sum::<f64>().sqrt()
                    * g.iter().map(|v| v * v).sum::<f64>().sqrt());
            assert!(cos > 0.999, "n={n}: cos={cos}");
        }
    }

    #[test]
    fn lm_fits_a_constant_quickly() {
        let topo = Topology::cascade(2, &[3]);
        let net = CascadeNet::init_weights(topo, 1).unwrap();
        let inputs: Vec<Vec<f64>> = (0..10).map(|k| vec![k as f64 / 10.0, 1.0 - k as f64 / 7.0]).collect();
        let batch = Batch::scalar(inputs, &[0.5; 10]);
        let cfg = TrainConfig {
            goal_mse: 1e-10,
            max_epochs: 5,
            ..TrainConfig::with_algorithm(Algorithm::Lm)
        };
        let (_, log) = train(&net, &batch, &cfg).unwrap();
        assert!(log.final_mse < 1e-10, "mse {}", log.final_mse);
        assert!(log.epochs.len() <= 5);
    }

    fn sine_batch() -> Batch {
        let inputs: Vec<Vec<f64>> = (0..20).map(|k| vec![-3.0 + 6.0 * k as f64 / 19.0]).collect();
        let targets: Vec<f64> = inputs.iter().map(|x| x[0].sin()).collect();
        Batch::scalar(inputs, &targets)
    }

    #[test]
    fn lm_fits_sine() {
        let net = CascadeNet::init_weights(Topology::cascade(1, &[8]), 3).unwrap();
        let cfg = TrainConfig {
            goal_mse: 1e-6,
            max_epochs: 200,
            ..TrainConfig::with_algorithm(Algorithm::Lm)
        };
        let (_, log) = train(&net, &sine_batch(), &cfg).unwrap();
        assert!(log.final_mse < 1e-4, "mse {}", log.final_mse);
        for pair in log.epochs.windows(2) {
            assert!(pair[1].mse <= pair[0].mse);
        }
    }

    #[test]
    fn first_order_trainers_reduce_loss() {
        for algo in [Algorithm::Cgb, Algorithm::Scg, Algorithm::Oss, Algorithm::Gdx] {
            let net = CascadeNet::init_weights(Topology::cascade(1, &[8]), 3).unwrap();
            let cfg = TrainConfig {
                goal_mse: 1e-6,
                max_epochs: 400,
                learning_rate: 0.1,
                ..TrainConfig::with_algorithm(algo)
            };
            let (_, log) = train(&net, &sine_batch(), &cfg).unwrap();
            assert!(log.final_mse < 0.1 * log.initial_mse, "{algo:?}: {} -> {}", log.initial_mse, log.final_mse);
            if algo != Algorithm::Gdx {
                assert!(log.final_mse < 1e-3, "{algo:?}: {}", log.final_mse);
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        for algo in [Algorithm::Lm, Algorithm::Cgb, Algorithm::Scg] {
            let net = CascadeNet::init_weights(Topology::cascade(1, &[6, 3]), 9).unwrap();
            let cfg = TrainConfig {
                max_epochs: 50,
                ..TrainConfig::with_algorithm(algo)
            };
            let (a, la) = train(&net, &sine_batch(), &cfg).unwrap();
            let (b, lb) = train(&net, &sine_batch(), &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(la, lb);
        }
    }

    #[test]
    fn lm_refuses_oversized_nets() {
        let net = CascadeNet::zeros(Topology::cascade(584, &REFERENCE_HIDDEN)).unwrap();
        let batch = random_batch(3, 584, 1);
        assert!(train(&net, &batch, &TrainConfig::with_algorithm(Algorithm::Lm)).is_err());
    }

    #[test]
    fn non_finite_data_aborts() {
        let net = CascadeNet::init_weights(Topology::cascade(1, &[2]), 1).unwrap();
        let batch = Batch::scalar(vec![vec![f64::NAN]], &[0.5]);
        assert!(train(&net, &batch, &TrainConfig::with_algorithm(Algorithm::Cgb)).is_err());
    }
}
