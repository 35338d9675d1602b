use chrono::{TimeDelta, TimeZone, Utc};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::marketdata::AlignedPanel;

use super::rng::NormalStream;

/// First hourly timestamp of every generated panel; an arbitrary fixed
/// instant so outputs are reproducible byte for byte.
fn base_time() -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2000, 1, 3, 0, 0, 0).unwrap()
}

/// A stationary first-order vector autoregression
/// `x(t) = phi * x(t-1) + eps(t)`, `eps ~ N(0, sigma)`.
#[derive(Debug, Clone)]
pub struct VarModel {
    phi: DMatrix<f64>,
    sigma: DMatrix<f64>,
    seed: u64,
    spectral_radius: f64,
    chol: DMatrix<f64>,
}

impl VarModel {
    /// Validates stationarity (spectral radius of `phi` below one) and that
    /// `sigma` is symmetric within 1e-12 and positive definite.
    pub fn new(phi: DMatrix<f64>, sigma: DMatrix<f64>, seed: u64) -> Result<Self> {
        let n = phi.nrows();
        if n == 0 || !phi.is_square() || !sigma.is_square() || sigma.nrows() != n {
            return Err(Error::Validation(format!(
                "model needs square phi and sigma of equal dimension, got {}x{} and {}x{}",
                phi.nrows(),
                phi.ncols(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if phi.iter().any(|v| !v.is_finite()) || sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("model matrices must be finite".into()));
        }
        let asym = (&sigma - sigma.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::Validation(format!(
                "sigma must be symmetric within 1e-12, max asymmetry {asym:e}"
            )));
        }
        let spectral_radius = phi
            .complex_eigenvalues()
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        if !(spectral_radius < 1.0) {
            return Err(Error::Validation(format!(
                "phi is non-stationary: spectral radius {spectral_radius}"
            )));
        }
        let chol = nalgebra::Cholesky::new(sigma.clone())
            .ok_or_else(|| Error::Validation("sigma must be positive definite".into()))?
            .l();
        Ok(Self {
            phi,
            sigma,
            seed,
            spectral_radius,
            chol,
        })
    }

    /// Convenience constructor from row-major nested slices.
    pub fn from_rows(phi: &[Vec<f64>], sigma: &[Vec<f64>], seed: u64) -> Result<Self> {
        let to_matrix = |rows: &[Vec<f64>], name: &str| -> Result<DMatrix<f64>> {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Validation(format!("{name} must be square")));
            }
            Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
        };
        Self::new(to_matrix(phi, "phi")?, to_matrix(sigma, "sigma")?, seed)
    }

    /// White-noise model: zero coupling, identity innovations.
    pub fn white_noise(dimension: usize, seed: u64) -> Result<Self> {
        Self::new(
            DMatrix::zeros(dimension, dimension),
            DMatrix::identity(dimension, dimension),
            seed,
        )
    }

    pub fn dimension(&self) -> usize {
        self.phi.nrows()
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    fn burn_in(&self) -> usize {
        (10.0 / (1.0 - self.spectral_radius)).ceil() as usize
    }
}

/// How the recursion is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initialization {
    /// Start at zero and discard `ceil(10 / (1 - spectral_radius))` steps.
    #[default]
    BurnIn,
    /// Draw x(0) from the exact stationary distribution; no discard.
    Stationary,
}

/// Stationary covariance S solving `S = phi S phi' + sigma`, via the
/// Kronecker-vectorized linear system.
pub fn stationary_covariance(model: &VarModel) -> DMatrix<f64> {
    let n = model.dimension();
    let kron = model.phi.kronecker(&model.phi);
    let system = DMatrix::identity(n * n, n * n) - kron;
    let vec_sigma = DMatrix::from_column_slice(n * n, 1, model.sigma.as_slice());
    let solved = system
        .lu()
        .solve(&vec_sigma)
        .expect("stationary model implies an invertible Lyapunov system");
    let mut s = DMatrix::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            s[(r, c)] = solved[(c * n + r, 0)];
        }
    }
    // enforce exact symmetry lost to rounding
    let st = s.transpose();
    (&s + &st) * 0.5
}

/// Exact population normalized lag-1 correlation between columns `i` and
/// `j`: `E[x_i(t+1) x_j(t)]` over the geometric mean of the stationary
/// variances. Zero-mean processes make the centered and uncentered
/// conventions coincide, matching the estimator.
pub fn population_lag1_correlation(model: &VarModel, i: usize, j: usize) -> Result<f64> {
    let n = model.dimension();
    if i >= n || j >= n {
        return Err(Error::Validation(format!(
            "column ({i}, {j}) out of range for dimension {n}"
        )));
    }
    let s = stationary_covariance(model);
    let lag1 = &model.phi * &s;
    Ok(lag1[(i, j)] / (s[(i, i)] * s[(j, j)]).sqrt())
}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("X{k}")).collect()
}

/// Draw a stationary panel of `length` rows. Hourly timestamps from a
/// fixed base instant; instruments named X1..XN.
pub fn generate_var(model: &VarModel, length: usize, init: Initialization) -> Result<AlignedPanel> {
    generate_var_named(model, length, init, &default_names(model.dimension()))
}

pub fn generate_var_named(
    model: &VarModel,
    length: usize,
    init: Initialization,
    names: &[String],
) -> Result<AlignedPanel> {
    if length < 100 {
        return Err(Error::Validation(format!(
            "panel length must be at least 100, got {length}"
        )));
    }
    if names.len() != model.dimension() {
        return Err(Error::Validation(format!(
            "{} names for dimension {}",
            names.len(),
            model.dimension()
        )));
    }
    let n = model.dimension();
    let mut stream = NormalStream::new(model.seed);
    let mut state = DMatrix::zeros(n, 1);
    let burn = match init {
        Initialization::BurnIn => model.burn_in(),
        Initialization::Stationary => {
            let chol_s = nalgebra::Cholesky::new(stationary_covariance(model))
                .ok_or_else(|| {
                    Error::Validation("stationary covariance is not positive definite".into())
                })?
                .l();
            let z = DMatrix::from_fn(n, 1, |_, _| stream.next_normal());
            state = chol_s * z;
            0
        }
    };

    let mut z = vec![0.0; n];
    let mut values = Vec::with_capacity(length * n);
    for step in 0..burn + length {
        stream.fill_normals(&mut z);
        let eps = &model.chol * DMatrix::from_column_slice(n, 1, &z);
        state = &model.phi * state + eps;
        if step >= burn {
            values.extend(state.column(0).iter());
        }
    }

    let base = base_time();
    let timestamps: Vec<_> = (0..length)
        .map(|k| base + TimeDelta::hours(k as i64))
        .collect();
    let window = (base, base + TimeDelta::hours(length as i64));
    AlignedPanel::new(names.to_vec(), timestamps, values, window)
}

/// Draw a panel whose coupling matrix moves linearly from the model's
/// `phi` at the first row to `phi_end` at the last. Both endpoints must be
/// stationary; the burn-in runs under the starting coupling.
pub fn generate_var_ramped(
    model: &VarModel,
    phi_end: &DMatrix<f64>,
    length: usize,
) -> Result<AlignedPanel> {
    // endpoint validation reuses the model checks
    let end_model = VarModel::new(phi_end.clone(), model.sigma.clone(), model.seed)?;
    if length < 100 {
        return Err(Error::Validation(format!(
            "panel length must be at least 100, got {length}"
        )));
    }
    let n = model.dimension();
    let names = default_names(n);
    let mut stream = NormalStream::new(model.seed);
    let mut state = DMatrix::zeros(n, 1);
    let burn = model.burn_in().max(end_model.burn_in());

    let mut z = vec![0.0; n];
    let mut values = Vec::with_capacity(length * n);
    for step in 0..burn + length {
        stream.fill_normals(&mut z);
        let eps = &model.chol * DMatrix::from_column_slice(n, 1, &z);
        let phi_t = if step < burn {
            model.phi.clone()
        } else {
            let s = (step - burn) as f64 / (length - 1).max(1) as f64;
            &model.phi * (1.0 - s) + phi_end * s
        };
        state = phi_t * state + eps;
        if step >= burn {
            values.extend(state.column(0).iter());
        }
    }

    let base = base_time();
    let timestamps: Vec<_> = (0..length)
        .map(|k| base + TimeDelta::hours(k as i64))
        .collect();
    let window = (base, base + TimeDelta::hours(length as i64));
    AlignedPanel::new(names, timestamps, values, window)
}
