use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid spectral window: a = {a} > b = {b}")]
    InvalidWindow { a: f64, b: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical decomposition failed: {0}")]
    Decomposition(String),

    #[error("power-law Fourier transform is singular at xi = 0")]
    SingularFrequency,

    #[error("cutoff radius {0} below the admissible minimum 1")]
    CutoffTooSmall(f64),

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("potential is not in the regular class: {0}")]
    NotRegularClass(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("chemical-potential bracket exhausted: mass = {mass} at mu = {mu}")]
    BracketExhausted { mu: f64, mass: f64 },

    #[error("SCF iteration diverged after {iterations} steps (last residual {last:.3e})")]
    ScfDiverged {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("ill-formed interaction tensor: symmetry defect {0:.3e}")]
    IllFormedTensor(f64),

    #[error("mode count {0} exceeds the exact-diagonalization limit 12")]
    TooManyModes(usize),

    #[error("eigensolver did not converge: {0}")]
    EigenNonConvergence(String),

    #[error("rate fit requires positive values and at least 3 points: {0}")]
    FitDomain(String),

    #[error("momentum grid too coarse: {0}")]
    Aliasing(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
