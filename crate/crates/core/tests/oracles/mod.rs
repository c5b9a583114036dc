//! Independent reference implementations shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

pub mod fd;
pub mod loss;
pub mod metrics;
pub mod nms;
pub mod recorder;
