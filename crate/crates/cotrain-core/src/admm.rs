//! Plaintext ADMM for LASSO and ridge, the SVD summaries each party commits
//! to, and the integer replay of the secure pipeline.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{symmetric_eigen, Matrix, NoConvergence};

pub mod fixed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdmmError {
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("invalid dataset: {0}")]
    InvalidDataset(&'static str),
    #[error("at least one party is required")]
    NoParties,
    #[error("penalty parameter must be positive")]
    NonPositiveRho,
    #[error(transparent)]
    Svd(#[from] NoConvergence),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Lasso,
    Ridge,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lasso => "lasso",
            ModelKind::Ridge => "ridge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lasso" => Some(ModelKind::Lasso),
            "ridge" => Some(ModelKind::Ridge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>) -> Result<Self, AdmmError> {
        if x.cols() == 0 {
            return Err(AdmmError::InvalidDataset("no feature columns"));
        }
        if x.rows() < x.cols() {
            return Err(AdmmError::InvalidDataset("fewer samples than features"));
        }
        if y.len() != x.rows() {
            return Err(AdmmError::Dimension("label count differs from row count"));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }
}

/// The matrices a party derives from its data before training.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// `(XᵀX + ρI)⁻¹`, symmetric.
    pub a: Matrix,
    /// `Xᵀy`.
    pub b: Vec<f64>,
    /// Right singular vectors of `X`, as columns.
    pub v: Matrix,
    pub sigma: Vec<f64>,
    /// `1 / (σᵢ² + ρ)`.
    pub theta: Vec<f64>,
    /// First `d` entries of `Uᵀy`; zero where `σᵢ = 0`.
    pub ystar: Vec<f64>,
}

impl Summary {
    pub fn d(&self) -> usize {
        self.b.len()
    }
}

pub fn compute_summary(ds: &Dataset, rho: f64) -> Result<Summary, AdmmError> {
    if !(rho > 0.0) {
        return Err(AdmmError::NonPositiveRho);
    }
    let d = ds.d();
    let (eig, v) = symmetric_eigen(&ds.x.gram())?;
    let sigma: Vec<f64> = eig.iter().map(|&l| libm::sqrt(l.max(0.0))).collect();
    let theta: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s + rho)).collect();
    let b = ds.x.tmatvec(&ds.y);
    let vtb = v.tmatvec(&b);
    let smax = sigma.iter().fold(0.0f64, |m, s| m.max(*s));
    let cutoff = 1e-12 * smax.max(1.0);
    let ystar = sigma
        .iter()
        .zip(&vtb)
        .map(|(s, c)| if *s > cutoff { c / s } else { 0.0 })
        .collect();
    let mut a = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += v[(i, k)] * theta[k] * v[(j, k)];
            }
            a[(i, j)] = acc;
            a[(j, i)] = acc;
        }
    }
    Ok(Summary { a, b, v, sigma, theta, ystar })
}

/// Soft-thresholding operator `S_κ(a)`.
pub fn soft_threshold(a: f64, kappa: f64) -> f64 {
    if a > kappa {
        a - kappa
    } else if a < -kappa {
        a + kappa
    } else {
        0.0
    }
}

fn check_len(v: &[f64], d: usize, what: &'static str) -> Result<(), AdmmError> {
    if v.len() == d {
        Ok(())
    } else {
        Err(AdmmError::Dimension(what))
    }
}

/// `A (b + ρ(z − u))`.
pub fn lasso_local_update(s: &Summary, z: &[f64], u: &[f64], rho: f64) -> Result<Vec<f64>, AdmmError> {
    let d = s.d();
    check_len(z, d, "z")?;
    check_len(u, d, "u")?;
    let c: Vec<f64> = (0..d).map(|j| s.b[j] + rho * (z[j] - u[j])).collect();
    Ok(s.a.matvec(&c))
}

fn mean_of_sums(ws: &[Vec<f64>], us: &[Vec<f64>]) -> Result<Vec<f64>, AdmmError> {
    if ws.is_empty() {
        return Err(AdmmError::NoParties);
    }
    if ws.len() != us.len() {
        return Err(AdmmError::Dimension("w and u party counts differ"));
    }
    let d = ws[0].len();
    let mut acc = vec![0.0; d];
    for (w, u) in ws.iter().zip(us) {
        check_len(w, d, "w")?;
        check_len(u, d, "u")?;
        for j in 0..d {
            acc[j] += w[j] + u[j];
        }
    }
    let m = ws.len() as f64;
    Ok(acc.into_iter().map(|v| v / m).collect())
}

pub fn lasso_z_update(ws: &[Vec<f64>], us: &[Vec<f64>], lambda: f64, rho: f64) -> Result<Vec<f64>, AdmmError> {
    let avg = mean_of_sums(ws, us)?;
    let kappa = lambda / (ws.len() as f64 * rho);
    Ok(avg.into_iter().map(|a| soft_threshold(a, kappa)).collect())
}

pub fn ridge_z_update(ws: &[Vec<f64>], us: &[Vec<f64>], lambda: f64, rho: f64) -> Result<Vec<f64>, AdmmError> {
    let avg = mean_of_sums(ws, us)?;
    let m = ws.len() as f64;
    let gamma = rho / (2.0 * lambda / m + rho);
    Ok(avg.into_iter().map(|a| gamma * a).collect())
}

pub fn u_update(u: &[f64], w: &[f64], z: &[f64]) -> Result<Vec<f64>, AdmmError> {
    check_len(w, u.len(), "w")?;
    check_len(z, u.len(), "z")?;
    Ok(u.iter().zip(w).zip(z).map(|((u, w), z)| u + w - z).collect())
}

/// Iterates of the consensus problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub ws: Vec<Vec<f64>>,
    pub z: Vec<f64>,
    pub us: Vec<Vec<f64>>,
    pub rho: f64,
    pub lambda: f64,
    pub k: usize,
}

impl AdmmState {
    pub fn zero(m: usize, d: usize, rho: f64, lambda: f64) -> Self {
        Self {
            ws: vec![vec![0.0; d]; m],
            z: vec![0.0; d],
            us: vec![vec![0.0; d]; m],
            rho,
            lambda,
            k: 0,
        }
    }

    pub fn step(&mut self, summaries: &[Summary], model: ModelKind) -> Result<(), AdmmError> {
        if summaries.len() != self.us.len() {
            return Err(AdmmError::Dimension("summary count differs from party count"));
        }
        self.ws = summaries
            .iter()
            .zip(&self.us)
            .map(|(s, u)| lasso_local_update(s, &self.z, u, self.rho))
            .collect::<Result<_, _>>()?;
        self.z = match model {
            ModelKind::Lasso => lasso_z_update(&self.ws, &self.us, self.lambda, self.rho)?,
            ModelKind::Ridge => ridge_z_update(&self.ws, &self.us, self.lambda, self.rho)?,
        };
        self.us = self
            .us
            .iter()
            .zip(&self.ws)
            .map(|(u, w)| u_update(u, w, &self.z))
            .collect::<Result<_, _>>()?;
        self.k += 1;
        Ok(())
    }
}

pub fn train_plaintext(
    datasets: &[Dataset],
    lambda: f64,
    rho: f64,
    iters: usize,
    model: ModelKind,
) -> Result<Vec<f64>, AdmmError> {
    let summaries = summaries_for(datasets, rho)?;
    let mut state = AdmmState::zero(summaries.len(), summaries[0].d(), rho, lambda);
    for _ in 0..iters {
        state.step(&summaries, model)?;
    }
    Ok(state.z)
}

pub fn summaries_for(datasets: &[Dataset], rho: f64) -> Result<Vec<Summary>, AdmmError> {
    let first = datasets.first().ok_or(AdmmError::NoParties)?;
    if datasets.iter().any(|ds| ds.d() != first.d()) {
        return Err(AdmmError::Dimension("datasets disagree on feature count"));
    }
    datasets.iter().map(|ds| compute_summary(ds, rho)).collect()
}

/// `½ Σᵢ ‖Xᵢw − yᵢ‖² + λR(w)` with `R = ‖·‖₁` for LASSO and `‖·‖²` for ridge,
/// the penalty under which the ridge consensus step is exact.
pub fn objective(datasets: &[Dataset], w: &[f64], lambda: f64, model: ModelKind) -> f64 {
    let loss: f64 = datasets
        .iter()
        .map(|ds| {
            let pred = ds.x.matvec(w);
            pred.iter().zip(&ds.y).map(|(p, y)| (p - y) * (p - y)).sum::<f64>()
        })
        .sum();
    let reg = match model {
        ModelKind::Lasso => w.iter().map(|v| libm::fabs(*v)).sum::<f64>(),
        ModelKind::Ridge => w.iter().map(|v| v * v).sum::<f64>(),
    };
    0.5 * loss + lambda * reg
}
