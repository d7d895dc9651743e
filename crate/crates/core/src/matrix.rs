//! Input containers: the activation matrix, two-trial recordings and row weights.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Dense P x Q activation matrix: rows are stimuli, columns are units.
///
/// Always stored in row-major layout with every entry finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: Array2<f64>,
}

impl SampleMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteInput { row, col });
        }
        let values = if values.is_standard_layout() {
            values
        } else {
            values.as_standard_layout().into_owned()
        };
        Ok(Self { values })
    }

    pub fn from_shape_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let values = Array2::from_shape_vec((rows, cols), data)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let q = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != q) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Self::from_shape_vec(rows.len(), q, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn transposed(&self) -> SampleMatrix {
        SampleMatrix {
            values: self.values.t().as_standard_layout().into_owned(),
        }
    }

    /// Rows `rows` and columns `cols`, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SampleMatrix {
        let values = self.values.select(Axis(0), rows).select(Axis(1), cols);
        SampleMatrix { values }
    }

    pub fn select_rows(&self, rows: &[usize]) -> SampleMatrix {
        SampleMatrix {
            values: self.values.select(Axis(0), rows),
        }
    }

    /// Multiply every entry by `c`.
    pub fn scaled(&self, c: f64) -> SampleMatrix {
        SampleMatrix {
            values: &self.values * c,
        }
    }
}

/// Two recordings of the same stimuli x units grid with independent noise.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPair {
    trial1: SampleMatrix,
    trial2: SampleMatrix,
    symmetrize: bool,
}

impl TrialPair {
    pub fn new(trial1: SampleMatrix, trial2: SampleMatrix) -> Result<Self> {
        if trial1.shape() != trial2.shape() {
            return Err(Error::ShapeMismatch {
                first: trial1.shape(),
                second: trial2.shape(),
            });
        }
        Ok(Self {
            trial1,
            trial2,
            symmetrize: false,
        })
    }

    /// Also average every term over the swapped trial assignment (2,1,2,1).
    pub fn symmetrized(mut self, on: bool) -> Self {
        self.symmetrize = on;
        self
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrize
    }

    pub fn trial1(&self) -> &SampleMatrix {
        &self.trial1
    }

    pub fn trial2(&self) -> &SampleMatrix {
        &self.trial2
    }

    pub fn shape(&self) -> (usize, usize) {
        self.trial1.shape()
    }

    /// Element-wise mean of the two trials.
    pub fn mean(&self) -> SampleMatrix {
        SampleMatrix {
            values: (&self.trial1.values + &self.trial2.values) * 0.5,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> TrialPair {
        TrialPair {
            trial1: self.trial1.select_rows(rows),
            trial2: self.trial2.select_rows(rows),
            symmetrize: self.symmetrize,
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> TrialPair {
        TrialPair {
            trial1: self.trial1.submatrix(rows, cols),
            trial2: self.trial2.submatrix(rows, cols),
            symmetrize: self.symmetrize,
        }
    }
}

/// Nonnegative per-row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is {w}; weights must be finite and nonnegative"
            )));
        }
        Ok(Self(weights))
    }

    pub fn uniform(len: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; len])
    }

    /// 1 for listed rows, 0 elsewhere.
    pub fn indicator(len: usize, members: &[usize]) -> Self {
        let mut w = vec![0.0; len];
        for &m in members {
            w[m] = 1.0;
        }
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn positive_count(&self) -> usize {
        self.0.iter().filter(|w| **w > 0.0).count()
    }
}

/// Either a single recording or a trial pair; everything the estimators accept.
#[derive(Debug, Clone, Copy)]
pub enum Observations<'a> {
    Single(&'a SampleMatrix),
    Pair(&'a TrialPair),
}

impl<'a> Observations<'a> {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Observations::Single(m) => m.shape(),
            Observations::Pair(p) => p.shape(),
        }
    }

    pub fn rows(&self) -> usize {
        self.shape().0
    }

    pub fn cols(&self) -> usize {
        self.shape().1
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, Observations::Pair(_))
    }

    pub(crate) fn first(&self) -> &'a SampleMatrix {
        match self {
            Observations::Single(m) => m,
            Observations::Pair(p) => &p.trial1,
        }
    }

    pub(crate) fn second(&self) -> &'a SampleMatrix {
        match self {
            Observations::Single(m) => m,
            Observations::Pair(p) => &p.trial2,
        }
    }

    pub(crate) fn symmetrize(&self) -> bool {
        match self {
            Observations::Single(_) => false,
            Observations::Pair(p) => p.symmetrize,
        }
    }
}

impl<'a> From<&'a SampleMatrix> for Observations<'a> {
    fn from(m: &'a SampleMatrix) -> Self {
        Observations::Single(m)
    }
}

impl<'a> From<&'a TrialPair> for Observations<'a> {
    fn from(p: &'a TrialPair) -> Self {
        Observations::Pair(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = SampleMatrix::from_shape_vec(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteInput { row: 0, col: 1 }));
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(
            SampleMatrix::from_shape_vec(0, 3, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
    }

    #[test]
    fn pair_requires_equal_shapes() {
        let a = SampleMatrix::from_shape_vec(2, 2, vec![1.0; 4]).unwrap();
        let b = SampleMatrix::from_shape_vec(2, 1, vec![1.0; 2]).unwrap();
        assert!(matches!(TrialPair::new(a, b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn weights_must_be_nonnegative() {
        assert!(WeightVector::new(vec![1.0, -0.5]).is_err());
        assert!(WeightVector::new(vec![1.0, f64::INFINITY]).is_err());
        let w = WeightVector::new(vec![0.0, 2.0, 1.0]).unwrap();
        assert_eq!(w.positive_count(), 2);
    }

    #[test]
    fn transposed_is_standard_layout() {
        let m = SampleMatrix::from_shape_vec(2, 3, (0..6).map(f64::from).collect()).unwrap();
        let t = m.transposed();
        assert_eq!(t.shape(), (3, 2));
        assert!(t.values().is_standard_layout());
        assert_eq!(t.values()[[2, 1]], 5.0);
    }
}
