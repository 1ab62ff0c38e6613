
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const CUBIC: f64 = 0.044_715;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activation {
    /// tanh-approximated GELU.
    Gelu,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Gelu => gelu(x),
            Activation::Identity => x,
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Gelu => gelu_grad(x),
            Activation::Identity => 1.0,
        }
    }

    /// Value and derivative from a single tanh evaluation.
    pub fn apply_with_derivative(self, x: f64) -> (f64, f64) {
        match self {
            Activation::Gelu => {
                let s = half_one_plus_tanh(x);
                (x * s, gelu_grad_from(x, s))
            }
            Activation::Identity => (x, 1.0),
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Activation::Identity => 0,
            Activation::Gelu => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Gelu),
            _ => None,
        }
    }
}

#[cfg(feature = "std")]
fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(not(feature = "std"))]
fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `0.5 (1 + tanh(u))` with `u = sqrt(2/pi) (x + 0.044715 x^3)`, computed as
/// the logistic `1 / (1 + e^(-2u))`: one exp and no cancellation near zero.
fn half_one_plus_tanh(x: f64) -> f64 {
    let u = SQRT_2_OVER_PI * (x + CUBIC * x * x * x);
    1.0 / (1.0 + exp(-2.0 * u))
}

// 1 - tanh(u)^2 = 4 s (1 - s)
fn gelu_grad_from(x: f64, s: f64) -> f64 {
    s + 2.0 * x * s * (1.0 - s) * SQRT_2_OVER_PI * (1.0 + 3.0 * CUBIC * x * x)
}

/// `0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))`
pub fn gelu(x: f64) -> f64 {
    x * half_one_plus_tanh(x)
}

pub fn gelu_grad(x: f64) -> f64 {
    gelu_grad_from(x, half_one_plus_tanh(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gelu_fixes_origin_and_tails() {
        assert_eq!(gelu(0.0), 0.0);
        assert!((gelu(10.0) - 10.0).abs() < 1e-12);
        assert!(gelu(-10.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_form_matches_tanh_form() {
        for i in 0..=4000 {
            let x = -25.0 + 0.0125 * i as f64;
            let u = SQRT_2_OVER_PI * (x + CUBIC * x * x * x);
            let reference = 0.5 * x * (1.0 + libm::tanh(u));
            assert!((gelu(x) - reference).abs() <= 1e-15 * (1.0 + x.abs()), "x = {x}");
        }
        assert!((gelu(1e-9) - 0.5e-9 * (1.0 + SQRT_2_OVER_PI * 1e-9)).abs() < 1e-24);
    }

    #[test]
    fn value_and_derivative_agree_with_separate_forms() {
        for i in 0..=100 {
            let x = -5.0 + 0.1 * i as f64;
            let (v, g) = Activation::Gelu.apply_with_derivative(x);
            assert_eq!(v, gelu(x));
            assert!((g - gelu_grad(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn gelu_grad_matches_central_difference() {
        let h = 1e-6;
        for i in 0..=120 {
            let x = -6.0 + 0.1 * i as f64;
            let fd = (gelu(x + h) - gelu(x - h)) / (2.0 * h);
            assert!((fd - gelu_grad(x)).abs() < 1e-8, "x = {x}");
        }
    }
}
