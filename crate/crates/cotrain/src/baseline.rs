//! Cyclic coordinate descent for `½‖Xw − y‖² + λ‖w‖₁` on pooled data, the
//! centralized reference the secure model is compared against.

use cotrain_core::admm::{soft_threshold, Dataset};

/// Stops when no coordinate moves by more than `tol` in a sweep.
pub fn lasso_cd(datasets: &[Dataset], lambda: f64, max_sweeps: usize, tol: f64) -> Vec<f64> {
    let d = datasets.first().map_or(0, Dataset::d);
    let mut w = vec![0.0; d];
    let mut resid: Vec<Vec<f64>> = datasets.iter().map(|ds| ds.y.clone()).collect();
    let col_sq: Vec<f64> = (0..d)
        .map(|j| datasets.iter().map(|ds| ds.x.column(j).iter().map(|v| v * v).sum::<f64>()).sum())
        .collect();
    for _ in 0..max_sweeps {
        let mut moved = 0.0f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let mut rho = 0.0;
            for (ds, r) in datasets.iter().zip(&resid) {
                for i in 0..ds.n() {
                    rho += ds.x[(i, j)] * (r[i] + ds.x[(i, j)] * w[j]);
                }
            }
            let new = soft_threshold(rho, lambda) / col_sq[j];
            let step = new - w[j];
            if step != 0.0 {
                for (ds, r) in datasets.iter().zip(resid.iter_mut()) {
                    for i in 0..ds.n() {
                        r[i] -= ds.x[(i, j)] * step;
                    }
                }
                w[j] = new;
            }
            moved = moved.max(step.abs());
        }
        if moved <= tol {
            break;
        }
    }
    w
}
