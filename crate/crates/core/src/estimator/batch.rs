use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Covariate storage. Bandit exploration only ever observes arms of a finite
/// set, so those batches keep an arm index per row instead of a dense copy.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariates {
    Dense(Matrix),
    Indexed { arms: Matrix, index: Vec<u32> },
}

/// `(X_t, r_t)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    covariates: Covariates,
    responses: Vec<f64>,
}

impl SampleBatch {
    pub fn dense(covariates: Matrix, responses: Vec<f64>) -> Result<Self> {
        if covariates.nrows() != responses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate rows, {} responses",
                covariates.nrows(),
                responses.len()
            )));
        }
        if responses.is_empty() || covariates.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "batch needs n >= 1 and d >= 1".into(),
            ));
        }
        Ok(Self {
            covariates: Covariates::Dense(covariates),
            responses,
        })
    }

    pub fn indexed(arms: Matrix, index: Vec<u32>, responses: Vec<f64>) -> Result<Self> {
        validate_indexed(&arms, &index, &responses)?;
        Ok(Self {
            covariates: Covariates::Indexed { arms, index },
            responses,
        })
    }

    pub fn view(&self) -> BatchView<'_> {
        let covariates = match &self.covariates {
            Covariates::Dense(m) => CovariateView::Dense {
                matrix: m,
                offset: 0,
            },
            Covariates::Indexed { arms, index } => CovariateView::Indexed { arms, index },
        };
        BatchView {
            covariates,
            responses: &self.responses,
        }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.view().dim()
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn covariates(&self) -> &Covariates {
        &self.covariates
    }
}

fn validate_indexed(arms: &Matrix, index: &[u32], responses: &[f64]) -> Result<()> {
    if index.len() != responses.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariate rows, {} responses",
            index.len(),
            responses.len()
        )));
    }
    if responses.is_empty() || arms.ncols() == 0 {
        return Err(Error::InvalidParameter(
            "batch needs n >= 1 and d >= 1".into(),
        ));
    }
    if let Some(&bad) = index.iter().find(|&&k| k as usize >= arms.nrows()) {
        return Err(Error::ArmOutOfRange {
            index: bad as usize,
            arms: arms.nrows(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub enum CovariateView<'a> {
    /// Rows `offset..offset + n` of `matrix`.
    Dense {
        matrix: &'a Matrix,
        offset: usize,
    },
    Indexed {
        arms: &'a Matrix,
        index: &'a [u32],
    },
}

/// Borrowed batch; this is what the estimators consume.
#[derive(Debug, Clone, Copy)]
pub struct BatchView<'a> {
    covariates: CovariateView<'a>,
    responses: &'a [f64],
}

impl<'a> BatchView<'a> {
    /// Borrow arm indices and rewards collected by a bandit run.
    pub fn from_arms(arms: &'a Matrix, index: &'a [u32], responses: &'a [f64]) -> Result<Self> {
        validate_indexed(arms, index, responses)?;
        Ok(Self {
            covariates: CovariateView::Indexed { arms, index },
            responses,
        })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        match self.covariates {
            CovariateView::Dense { matrix, .. } => matrix.ncols(),
            CovariateView::Indexed { arms, .. } => arms.ncols(),
        }
    }

    pub fn responses(&self) -> &'a [f64] {
        self.responses
    }

    pub fn covariates(&self) -> CovariateView<'a> {
        self.covariates
    }

    pub fn row(&self, t: usize) -> Vector {
        match self.covariates {
            CovariateView::Dense { matrix, offset } => matrix.row(offset + t).transpose(),
            CovariateView::Indexed { arms, index } => arms.row(index[t] as usize).transpose(),
        }
    }

    /// Rows `0..mid` and `mid..n`.
    pub fn split_at(&self, mid: usize) -> (BatchView<'a>, BatchView<'a>) {
        let (r1, r2) = self.responses.split_at(mid);
        let (c1, c2) = match self.covariates {
            CovariateView::Dense { matrix, offset } => (
                CovariateView::Dense { matrix, offset },
                CovariateView::Dense {
                    matrix,
                    offset: offset + mid,
                },
            ),
            CovariateView::Indexed { arms, index } => {
                let (i1, i2) = index.split_at(mid);
                (
                    CovariateView::Indexed { arms, index: i1 },
                    CovariateView::Indexed { arms, index: i2 },
                )
            }
        };
        (
            BatchView {
                covariates: c1,
                responses: r1,
            },
            BatchView {
                covariates: c2,
                responses: r2,
            },
        )
    }

    /// `X^T X / n` and `X^T r / n`.
    pub fn gram(&self) -> (Matrix, Vector) {
        let d = self.dim();
        let n = self.len() as f64;
        let mut g = Matrix::zeros(d, d);
        let mut c = Vector::zeros(d);
        match self.covariates {
            CovariateView::Dense { matrix, offset } => {
                let x = matrix.rows(offset, self.len());
                g = x.transpose() * x;
                c = x.transpose() * Vector::from_column_slice(self.responses);
            }
            CovariateView::Indexed { arms, index } => {
                let k = arms.nrows();
                let mut counts = vec![0.0; k];
                let mut sums = vec![0.0; k];
                for (&a, &r) in index.iter().zip(self.responses) {
                    counts[a as usize] += 1.0;
                    sums[a as usize] += r;
                }
                for a in 0..k {
                    if counts[a] == 0.0 {
                        continue;
                    }
                    let row = arms.row(a).transpose();
                    g.ger(counts[a], &row, &row, 1.0);
                    c.axpy(sums[a], &row, 1.0);
                }
            }
        }
        (g / n, c / n)
    }

    /// Dense copy of the covariates.
    pub fn to_matrix(&self) -> Matrix {
        match self.covariates {
            CovariateView::Dense { matrix, offset } => matrix.rows(offset, self.len()).into_owned(),
            CovariateView::Indexed { arms, index } => {
                Matrix::from_fn(index.len(), arms.ncols(), |t, j| {
                    arms[(index[t] as usize, j)]
                })
            }
        }
    }
}

impl<'a> From<&'a SampleBatch> for BatchView<'a> {
    fn from(batch: &'a SampleBatch) -> Self {
        batch.view()
    }
}
