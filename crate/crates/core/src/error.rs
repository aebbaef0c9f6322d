use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Kraus operators are not trace preserving (max deviation {deviation:e})")]
    NonTracePreserving { deviation: f64 },
    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:e})")]
    NotAChannel { min_eigenvalue: f64 },
    #[error("channel is not unitary")]
    NotUnitary,
    #[error("invalid Bloch vector: norm {norm} exceeds 1")]
    InvalidBloch { norm: f64 },
    #[error("not a unit vector: norm {norm}")]
    NotUnit { norm: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("parameter {name} = {value} out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("degenerate random draw after {attempts} attempts")]
    DegenerateDraw { attempts: usize },
    #[error("invalid correlator index ({i}, {j})")]
    InvalidIndex { i: u8, j: u8 },
    #[error("invalid optimization spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = core::result::Result<T, Error>;
