use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Which index sums are restricted to unequal indices.
///
/// `Row` and `Col` always name the axes of the matrix as supplied (stimuli
/// and units), independent of the centering mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Correction {
    Naive,
    Row,
    Col,
    Both,
}

impl Correction {
    pub const ALL: [Correction; 4] = [
        Correction::Naive,
        Correction::Row,
        Correction::Col,
        Correction::Both,
    ];

    pub fn corrects_rows(self) -> bool {
        matches!(self, Correction::Row | Correction::Both)
    }

    pub fn corrects_cols(self) -> bool {
        matches!(self, Correction::Col | Correction::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Correction::Naive => "naive",
            Correction::Row => "row",
            Correction::Col => "col",
            Correction::Both => "both",
        }
    }
}

/// Which axis is mean-subtracted before the participation ratio is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Centering {
    /// Each column (unit) is centered; covariance over stimuli.
    #[default]
    Task,
    /// Each row (stimulus) is centered; computed on the transposed matrix.
    Neuron,
    /// No centering; the ratio is t1 / t3.
    None,
}

impl Centering {
    pub const ALL: [Centering; 3] = [Centering::Task, Centering::Neuron, Centering::None];

    pub fn as_str(self) -> &'static str {
        match self {
            Centering::Task => "task",
            Centering::Neuron => "neuron",
            Centering::None => "none",
        }
    }

    /// Whether the computation runs on the transposed matrix.
    pub(crate) fn transposes(self) -> bool {
        self == Centering::Neuron
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EstimatorVariant {
    pub correction: Correction,
    pub centering: Centering,
}

impl EstimatorVariant {
    pub const fn new(correction: Correction, centering: Centering) -> Self {
        Self {
            correction,
            centering,
        }
    }

    pub const fn both() -> Self {
        Self::new(Correction::Both, Centering::Task)
    }

    pub const fn naive() -> Self {
        Self::new(Correction::Naive, Centering::Task)
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Centering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for EstimatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.correction, self.centering)
    }
}

impl FromStr for Correction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" => Ok(Correction::Naive),
            "row" => Ok(Correction::Row),
            "col" | "column" => Ok(Correction::Col),
            "both" => Ok(Correction::Both),
            other => Err(Error::InvalidArgument(format!("unknown correction '{other}'"))),
        }
    }
}

impl FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "task" => Ok(Centering::Task),
            "neuron" => Ok(Centering::Neuron),
            "none" => Ok(Centering::None),
            other => Err(Error::InvalidArgument(format!("unknown centering '{other}'"))),
        }
    }
}
