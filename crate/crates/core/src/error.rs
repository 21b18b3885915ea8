use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset needs at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("training data needs at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("attribute `{0}` is not present")]
    MissingAttribute(String),
    #[error("attribute `{name}` is {left} in one dataset and {right} in the other")]
    KindConflict {
        name: String,
        left: &'static str,
        right: &'static str,
    },
    #[error("datasets share no attribute names")]
    EmptyIntersection,
    #[error("class sets differ between datasets")]
    ClassMismatch,
    #[error("class `{0}` was not seen during training")]
    UnknownClass(String),
    #[error("no normalization statistics for attribute `{0}`")]
    MissingStats(String),
    #[error("row has {found} values, schema has {expected} attributes")]
    RowLength { expected: usize, found: usize },
    #[error("all class weights are zero")]
    ZeroWeight,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("no continuous attributes to add noise to")]
    NoContinuousAttributes,
}
