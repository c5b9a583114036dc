//! Grid-based single-shot trash detector built from scratch: network and
//! training ([`netcore`], [`train`]), target encoding and loss
//! ([`detector`]), datasets ([`data`]), metrics ([`evalx`]) and the
//! clip-recording watch loop ([`pipeline`]).

pub mod data;
pub mod detector;
mod error;
pub mod evalx;
pub mod infer;
pub mod netcore;
pub mod pipeline;
pub mod train;

pub use error::Error;
