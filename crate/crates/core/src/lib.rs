//! Coherence-breaking quantum channels: representations, classification,
//! iteration dynamics and concentration-of-measure estimates.

pub mod channels;
pub mod classifiers;
pub mod concentration;
pub mod coherence;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod states;

pub use channels::{ChoiMatrix, KrausChannel, QubitAffine};
pub use classifiers::{classify, ClassificationReport, Verdict};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use states::{CVector, DensityMatrix};
