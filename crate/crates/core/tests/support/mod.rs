#![allow(dead_code)]

pub mod cloud_oracle;
pub mod curves;
