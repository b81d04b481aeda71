use std::fmt;

use serde::{Deserialize, Serialize};

/// Activation functions available to CPPN nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sin,
    Tanh,
    Gauss,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Sin, Activation::Tanh, Activation::Gauss];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sin => x.sin(),
            Activation::Tanh => x.tanh(),
            // exp(-5x^2), the neat-python convention
            Activation::Gauss => (-5.0 * x * x).exp(),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Activation::Sin => "sin",
            Activation::Tanh => "tanh",
            Activation::Gauss => "gauss",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_peaks_at_one() {
        assert_eq!(Activation::Gauss.apply(0.0), 1.0);
        assert!(Activation::Gauss.apply(1.0) < 0.01);
    }

    #[test]
    fn serde_labels() {
        let json = serde_json::to_string(&Activation::ALL).unwrap();
        assert_eq!(json, r#"["sin","tanh","gauss"]"#);
    }
}
