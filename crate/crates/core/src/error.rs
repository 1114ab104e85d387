use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("cells per axis must be a positive power of two, got {0}")]
    NotPowerOfTwo(usize),

    #[error("half width must be positive and finite, got {0}")]
    NonPositiveHalfWidth(f64),

    #[error("factor dimension must be 1, 2 or 3, got {0}")]
    UnsupportedDimension(usize),

    #[error("non-finite sample {value} at cell {cell}")]
    NonFiniteSample { cell: usize, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("grid dimensions ({grid_n}, {grid_m}) do not match exponents ({n}, {m})")]
    DimensionMismatch {
        grid_n: usize,
        grid_m: usize,
        n: usize,
        m: usize,
    },

    #[error("slice index {index} out of range (factor has {len} cells)")]
    SliceOutOfRange { index: usize, len: usize },

    #[error("rectangle exceeds the grid")]
    RectOutOfBounds,

    #[error("the `all` family is limited to 16 cells per axis, grid has {0}")]
    FamilyTooLarge(usize),

    #[error("weight must be strictly positive, found {value} at cell {cell}")]
    NonPositiveWeight { cell: usize, value: f64 },

    #[error("field must be nonnegative, found {value} at cell {cell}")]
    NegativeValue { cell: usize, value: f64 },

    #[error("no cube of the family has its double inside the domain")]
    NoTestableRectangles,

    #[error("rectangle family does not contain every single cell")]
    MissingSingleCells,

    #[error("exponent condition violated: {0}")]
    ExponentCondition(String),

    #[error("solver input must be strictly positive: {0}")]
    NonPositiveInput(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("report error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
