//! Classification performance measures with exact arithmetic, property audits
//! by exhaustive enumeration, and inconsistency analysis between measures.
//!
//! ```
//! use measure_audit::{ConfusionMatrix, Measure};
//!
//! let c = ConfusionMatrix::from_rows(&[[4, 1], [2, 3]]).unwrap();
//! let acc = Measure::accuracy().evaluate(&c).unwrap();
//! assert_eq!(acc.to_string(), "7/10");
//! ```

pub mod averaging;
pub mod combinatorics;
pub mod confusion;
pub mod enumerate;
pub mod error;
pub mod inconsistency;
pub mod measures;
pub mod properties;
pub mod value;

pub use averaging::AveragingScheme;
pub use combinatorics::Budget;
pub use confusion::{build_confusion, expected_matrix, BinaryCounts, ConfusionMatrix, Labeling};
pub use error::{Error, Result};
pub use measures::{parse_measure, BaseMeasure, Measure, MeasureDescriptor};
pub use value::{Value, ValueKind, EPSILON};
