use serde::{Deserialize, Serialize};

/// Binary confusion matrix with "manipulation-free" as the positive class.
/// Rows are the truth, columns the prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1PerClass {
    pub manipulation_free: f64,
    pub manipulated: f64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fn_, fp, tn }
    }

    /// Records one decision; `true` means manipulation-free.
    pub fn record(&mut self, truth_clean: bool, predicted_clean: bool) {
        match (truth_clean, predicted_clean) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => (self.tp + self.tn) as f64 / n as f64,
        }
    }

    fn f1(hits: u64, misses: u64) -> f64 {
        match 2 * hits + misses {
            0 => 0.0,
            d => (2 * hits) as f64 / d as f64,
        }
    }

    pub fn f1_per_class(&self) -> F1PerClass {
        let errors = self.fn_ + self.fp;
        F1PerClass {
            manipulation_free: Self::f1(self.tp, errors),
            manipulated: Self::f1(self.tn, errors),
        }
    }
}
