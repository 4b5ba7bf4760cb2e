// Negated float comparisons double as NaN guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distfield;
pub mod error;
pub mod hypersurface;
pub mod numerics;
pub mod pointcloud;
pub mod poly;
pub mod report;
pub mod sample;
pub mod topology;
