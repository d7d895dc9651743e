use super::variant::{Centering, EstimatorVariant};
use crate::dd::Dd;

/// The five term estimates and the assembled numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermBreakdown {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
    /// Numerator. `t1 - 2 t2 + t5` when centered, `t1` otherwise.
    pub a: f64,
    /// Denominator. `t3 - 2 t4 + t5` when centered, `t3` otherwise.
    pub b: f64,
}

impl TermBreakdown {
    pub fn assemble(t: [f64; 5], centering: Centering) -> Self {
        let [t1, t2, t3, t4, t5] = t;
        let (a, b) = match centering {
            Centering::None => (t1, t3),
            Centering::Task | Centering::Neuron => (t1 - 2.0 * t2 + t5, t3 - 2.0 * t4 + t5),
        };
        Self {
            t1,
            t2,
            t3,
            t4,
            t5,
            a,
            b,
        }
    }

    /// [`Self::assemble`] from unrounded terms; `A` and `B` are rounded once.
    pub(crate) fn assemble_dd(t: [Dd; 5], centering: Centering) -> Self {
        let [t1, t2, t3, t4, t5] = t;
        let (a, b) = match centering {
            Centering::None => (t1, t3),
            Centering::Task | Centering::Neuron => (t1 - t2.mul_f64(2.0) + t5, t3 - t4.mul_f64(2.0) + t5),
        };
        Self {
            a: a.to_f64(),
            b: b.to_f64(),
            ..Self::assemble(t.map(Dd::to_f64), centering)
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.t1, self.t2, self.t3, self.t4, self.t5]
    }
}

/// A dimensionality estimate. `value` is `None` whenever the ratio is not
/// usable (nonpositive or non-finite denominator); `diagnostics` then says why.
#[derive(Debug, Clone, PartialEq)]
pub struct DimEstimate {
    pub value: Option<f64>,
    pub variant: EstimatorVariant,
    pub noise_corrected: bool,
    pub terms: TermBreakdown,
    pub diagnostics: Vec<String>,
}

impl DimEstimate {
    pub fn from_terms(terms: TermBreakdown, variant: EstimatorVariant, noise_corrected: bool) -> Self {
        let mut diagnostics = Vec::new();
        // NaN lands here too
        let value = if terms.b.is_nan() || terms.b <= 0.0 {
            diagnostics.push(format!("denominator nonpositive (B = {:e})", terms.b));
            None
        } else {
            let ratio = terms.a / terms.b;
            if ratio.is_finite() {
                Some(ratio)
            } else {
                diagnostics.push(format!("ratio is not finite (A = {:e}, B = {:e})", terms.a, terms.b));
                None
            }
        };
        Self {
            value,
            variant,
            noise_corrected,
            terms,
            diagnostics,
        }
    }

    /// An invalid estimate standing in for an operation that returned `reason`.
    pub fn failed(variant: EstimatorVariant, noise_corrected: bool, reason: &crate::error::Error) -> Self {
        Self {
            value: None,
            variant,
            noise_corrected,
            terms: TermBreakdown::assemble([f64::NAN; 5], variant.centering),
            diagnostics: vec![reason.to_string()],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.value.is_some()
    }

    /// The estimate, or NaN when invalid.
    pub fn gamma(&self) -> f64 {
        self.value.unwrap_or(f64::NAN)
    }
}
