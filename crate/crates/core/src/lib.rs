//! Write-failure reliability analysis for ECC-protected STT-MRAM caches.
//!
//! A block of 512 data bits is protected by eight SEC-DED(72,64) codewords.
//! Which data bits share a codeword is decided by a [`mapping::MappingScheme`]
//! (per-word, interleaved or ROBIN). Since only cells that flip can suffer a
//! write failure, the block write succeeds with a probability that depends on
//! how the flips of a write spread over the codewords.

pub mod analysis;
pub mod block;
pub mod error;
pub mod fault;
pub mod mapping;
pub mod reliability;
pub mod report;
pub mod secded;
pub mod trace;
pub mod workload;

pub use block::CacheBlock;
pub use error::{Error, Result};
pub use mapping::{BitCoordinate, MappingScheme, SchemeKind, TransitionVector};
pub use reliability::{DeviceParams, SuccessProbability};
