use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Weights of a one-hidden-layer perceptron `w2 · max(0, w1 · x + b1) + b2`.
///
/// `w1` is `hidden x input` and `w2` is `output x hidden`, both row-major.
/// Parameters are injected (from JSON or a seeded draw); nothing here trains.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
}

/// The MLP that turns `[f_i - f_j, d_g]` into relation logits.
pub type RelationMlpParams = MlpParams;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpDoc {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>,
    b2: Vec<f64>,
}

impl MlpParams {
    pub fn new(w1: Matrix, b1: Vec<f64>, w2: Matrix, b2: Vec<f64>) -> Result<Self> {
        if b1.len() != w1.rows() {
            return Err(Error::WidthMismatch {
                expected: w1.rows(),
                found: b1.len(),
                context: "b1 length vs w1 rows",
            });
        }
        if w2.cols() != w1.rows() {
            return Err(Error::WidthMismatch {
                expected: w1.rows(),
                found: w2.cols(),
                context: "w2 columns vs hidden width",
            });
        }
        if b2.len() != w2.rows() {
            return Err(Error::WidthMismatch {
                expected: w2.rows(),
                found: b2.len(),
                context: "b2 length vs w2 rows",
            });
        }
        if w1.rows() == 0 || w1.cols() == 0 || w2.rows() == 0 {
            return Err(Error::invalid("mlp widths must be nonzero"));
        }
        if !(w1.all_finite() && w2.all_finite()) || !b1.iter().chain(&b2).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("mlp parameters".into()));
        }
        Ok(MlpParams { w1, b1, w2, b2 })
    }

    pub fn from_rows(w1: &[Vec<f64>], b1: Vec<f64>, w2: &[Vec<f64>], b2: Vec<f64>) -> Result<Self> {
        Self::new(Matrix::from_rows(w1)?, b1, Matrix::from_rows(w2)?, b2)
    }

    /// Uniform draws in `[-scale, scale]` from a ChaCha8 stream seeded by `seed`.
    pub fn seeded(
        input: usize,
        hidden: usize,
        output: usize,
        scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!(
                "mlp scale must be > 0, got {scale}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-scale..=scale)).collect()
        };
        let w1 = Matrix::from_vec(hidden, input, draw(hidden * input))?;
        let b1 = draw(hidden);
        let w2 = Matrix::from_vec(output, hidden, draw(output * hidden))?;
        let b2 = draw(output);
        Self::new(w1, b1, w2, b2)
    }

    pub fn w1(&self) -> &Matrix {
        &self.w1
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &Matrix {
        &self.w2
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub fn input_width(&self) -> usize {
        self.w1.cols()
    }

    pub fn hidden_width(&self) -> usize {
        self.w1.rows()
    }

    pub fn output_width(&self) -> usize {
        self.w2.rows()
    }

    /// Forward pass; `hidden` is scratch space of at least `hidden_width()`.
    pub(crate) fn forward_into(&self, input: &[f64], hidden: &mut [f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.input_width());
        for (h, (row, b)) in hidden.iter_mut().zip(self.w1.iter_rows().zip(&self.b1)) {
            let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
            *h = z.max(0.0);
        }
        for (o, (row, b)) in out.iter_mut().zip(self.w2.iter_rows().zip(&self.b2)) {
            *o = row
                .iter()
                .zip(hidden.iter())
                .map(|(w, h)| w * h)
                .sum::<f64>()
                + b;
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                found: input.len(),
                context: "mlp input",
            });
        }
        let mut hidden = vec![0.0; self.hidden_width()];
        let mut out = vec![0.0; self.output_width()];
        self.forward_into(input, &mut hidden, &mut out);
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MlpDoc {
            w1: self.w1.to_rows(),
            b1: self.b1.clone(),
            w2: self.w2.to_rows(),
            b2: self.b2.clone(),
        })
        .expect("finite parameters serialize")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: MlpDoc = serde_json::from_value(value.clone())
            .map_err(|e| Error::invalid(format!("mlp json: {e}")))?;
        Self::from_rows(&doc.w1, doc.b1, &doc.w2, doc.b2)
    }
}

impl Serialize for MlpParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MlpParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = MlpDoc::deserialize(d)?;
        MlpParams::from_rows(&doc.w1, doc.b1, &doc.w2, doc.b2).map_err(serde::de::Error::custom)
    }
}
