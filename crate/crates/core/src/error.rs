use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("not a real unit vector (|v|^2 = {0})")]
    NotUnit(f64),
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("point {0:?} is too close to the boundary (distance {1:.3e}, need {2:.3e})")]
    TooClose([f64; 3], f64, f64),
    #[error("matrix of dimension {0} exceeds the dense storage cap")]
    TooLarge(usize),
    #[error("singular system: sigma_min = {sigma_min:.3e}, sigma_max = {sigma_max:.3e}")]
    Singular { sigma_min: f64, sigma_max: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
