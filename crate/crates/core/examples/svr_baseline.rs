//! ε-SVR with an RBF kernel: grid search, then a final fit.

use faultloc::svr::{grid_search, train_svr, SvrGrid};

fn main() -> faultloc::Result<()> {
    // A smooth one-dimensional target on [0, 1].
    let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 39.0]).collect();
    let z: Vec<f64> = x.iter().map(|v| 0.1 + 0.8 * v[0] * v[0]).collect();

    let (grid, best) = grid_search(&x, &z, &SvrGrid::default(), 7)?;
    for p in &grid {
        println!(
            "C {:>5}  ε {:<5}  γ {:<4}  cv mse {:.3e}",
            p.params.c, p.params.epsilon, p.params.gamma, p.cv_mse
        );
    }
    let params = &grid[best].params;
    let model = train_svr(&x, &z, params)?;
    println!("best {params:?}: {} support vectors", model.support_vectors.len());
    for v in [0.25, 0.5, 0.9] {
        println!("f({v}) = {:.4}  (target {:.4})", model.predict(&[v])?, 0.1 + 0.8 * v * v);
    }
    Ok(())
}
