use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input is outside the range where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The supplied configuration cannot be turned into a valid model.
    #[error("configuration error: {0}")]
    Config(String),

    /// Arrays or grids that must agree do not.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested energy window touches or exceeds an edge potential.
    #[error("energy window {lo}..{hi} meV reaches the edge potential {edge} meV; move the window below it")]
    WindowAtEdge { lo: f64, hi: f64, edge: f64 },

    /// A closed-form expression hit an exact zero denominator.
    #[error("singular parameters: {0}")]
    Singular(String),

    /// A numerical procedure failed to converge or was ill-posed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A steady state is not unique.
    #[error("ambiguous steady state: {0}")]
    Ambiguous(String),

    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
