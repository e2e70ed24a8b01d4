use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fraction {num}/{den} is not in (0,1]")]
    NotInUnitInterval { num: u64, den: u64 },

    #[error("{num}/{den} is not a reduced fraction (gcd != 1)")]
    NotCoprime { num: u64, den: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("even q = {0} is unsupported for the band taxonomy")]
    EvenDenominator(u64),

    #[error("interlacing violated: {0}")]
    InterlacingViolated(String),

    #[error("derivative unresolved at E = {energy}: product rule {product_rule:e}, finite difference {finite_difference:e}")]
    DerivativeUnresolved {
        energy: f64,
        product_rule: f64,
        finite_difference: f64,
    },

    #[error("digamma has a pole or is undefined at x = {0}")]
    DigammaDomain(f64),

    #[error("T undefined: {0}")]
    HalfIntegerSumUndefined(String),

    #[error("parity condition violated for continued fraction {0:?}")]
    ParityViolated(Vec<u64>),

    #[error("divergent tail: gamma = {gamma} outside [{lo}, {hi}]")]
    DivergentTail { gamma: f64, lo: f64, hi: f64 },

    #[error("quadrature unconverged: error estimate {estimate:e} above tolerance {tol:e}")]
    QuadratureUnconverged { estimate: f64, tol: f64 },

    #[error("argument hits a multiple of pi: {0}")]
    SingularTerm(String),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotInUnitInterval { .. } => "not_in_unit_interval",
            Error::NotCoprime { .. } => "not_coprime",
            Error::InvalidInput(_) => "invalid_input",
            Error::Overflow(_) => "overflow",
            Error::EvenDenominator(_) => "even_denominator",
            Error::InterlacingViolated(_) => "interlacing_violated",
            Error::DerivativeUnresolved { .. } => "derivative_unresolved",
            Error::DigammaDomain(_) => "digamma_domain",
            Error::HalfIntegerSumUndefined(_) => "half_integer_sum_undefined",
            Error::ParityViolated(_) => "parity_violated",
            Error::DivergentTail { .. } => "divergent_tail",
            Error::QuadratureUnconverged { .. } => "quadrature_unconverged",
            Error::SingularTerm(_) => "singular_term",
        }
    }
}
