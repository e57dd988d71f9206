//! The probability space `[0, 1)`: intervals, finite unions, step functions
//! and piecewise translations, all in exact arithmetic.

mod interval;
mod step;
mod translation;

pub use interval::{Interval, IntervalSet};
pub use step::StepFunction;
pub use translation::{Branch, PiecewiseTranslation};
