use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// A finite set of arms, stored as the rows of a `K x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    arms: Matrix,
}

impl ActionSet {
    pub fn new(arms: Matrix) -> Result<Self> {
        if arms.nrows() == 0 || arms.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "action set needs at least one arm and one dimension".into(),
            ));
        }
        if arms.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "action set has non-finite entries".into(),
            ));
        }
        Ok(Self { arms })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("ragged arm rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(Matrix::from_row_slice(k, d, &flat))
    }

    pub fn arms(&self) -> &Matrix {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.nrows()
    }

    pub fn dim(&self) -> usize {
        self.arms.ncols()
    }

    pub fn arm(&self, k: usize) -> Vector {
        self.arms.row(k).transpose()
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.arms)
    }

    pub fn spans(&self) -> bool {
        self.rank() == self.dim()
    }

    /// True when some arm has an entry outside `[-1, 1]`. Not an error; the
    /// solvers report it as a warning.
    pub fn exceeds_unit_box(&self) -> bool {
        self.arms.iter().any(|x| x.abs() > 1.0)
    }

    /// Mean rewards `<a_k, theta>` for every arm.
    pub fn rewards(&self, theta: &Vector) -> Vector {
        &self.arms * theta
    }

    /// Keep only the listed coordinates of every arm.
    pub fn restrict(&self, coords: &[usize]) -> Result<Self> {
        if let Some(&c) = coords.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "coordinate {c} out of range"
            )));
        }
        let cols: Vec<Vector> = coords
            .iter()
            .map(|&c| self.arms.column(c).into_owned())
            .collect();
        Self::new(Matrix::from_columns(&cols))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            arms: &self.arms * c,
        }
    }
}

/// Sampling distribution over the arms of an [`ActionSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    weights: Vector,
}

impl Design {
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(weights: Vector) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("design over zero arms".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "design weights must be finite and >= 0".into(),
            ));
        }
        let total = weights.sum();
        if (total - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "design weights sum to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            weights: Vector::from_element(k, 1.0 / k as f64),
        }
    }

    /// Normalise arbitrary nonnegative weights onto the simplex.
    pub fn normalized(weights: Vector) -> Result<Self> {
        let total = weights.sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("design weights sum to zero".into()));
        }
        Self::new(weights / total)
    }

    pub fn weights(&self) -> &Vector {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices with positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&k| self.weights[k] > 0.0)
            .collect()
    }
}

/// A symmetric positive-definite covariance with its cached inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    q: Matrix,
    q_inv: Matrix,
}

impl CovMatrix {
    pub const SYM_TOL: f64 = 1e-10;

    pub fn new(q: Matrix) -> Result<Self> {
        if !q.is_square() || q.nrows() == 0 {
            return Err(Error::DimensionMismatch("covariance must be square".into()));
        }
        let scale = q.amax().max(1.0);
        if (&q - q.transpose()).amax() > Self::SYM_TOL * scale {
            return Err(Error::InvalidParameter(
                "covariance is not symmetric".into(),
            ));
        }
        let q = linalg::symmetrize(q);
        let q_inv = linalg::spd_inverse(&q)?;
        Ok(Self { q, q_inv })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            q: Matrix::identity(d, d),
            q_inv: Matrix::identity(d, d),
        }
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn q_inv(&self) -> &Matrix {
        &self.q_inv
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn inv_diag(&self, i: usize) -> f64 {
        self.q_inv[(i, i)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.q)
    }
}

/// Output of the design solvers.
#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub design: Design,
    pub cov: CovMatrix,
    /// `H^2(Q)` for the H-star solver, `lambda_min(Q)` for the C_min solver.
    pub objective: f64,
    pub iterations: usize,
    pub certified_gap: f64,
    pub warnings: Vec<String>,
}
