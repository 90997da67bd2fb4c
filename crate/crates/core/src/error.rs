use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("inverse branch index {index} out of range for degree {degree}")]
    BranchOutOfRange { index: usize, degree: usize },

    #[error("periodic orbits need an integer-slope linear map: {0}")]
    InexactMap(String),

    #[error("OverlappingPetals: petals {0} and {1} intersect")]
    OverlappingPetals(usize, usize),

    #[error("ImagesOverlap: images of the petals overlap (total image length {0})")]
    ImagesOverlap(f64),

    #[error("CoverageGap: images of the petals do not cover the circle (total image length {0})")]
    CoverageGap(f64),

    #[error("DegeneratePetal: petal {0} has empty interior or colliding endpoints")]
    DegeneratePetal(usize),

    #[error("flower has no petals")]
    EmptyFlower,

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("NoSignChange: Phi has no zero on the scan (min {min}, max {max})")]
    NoSignChange { min: f64, max: f64 },

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
