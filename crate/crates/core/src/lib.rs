//! Secret key rates of an RIS-assisted terahertz MIMO CV-QKD link.
//!
//! The crate goes from geometry to bits per channel use:
//! [`system`] and [`channel`] synthesize the segment matrices, [`gaussian`]
//! holds the covariance machinery, [`localized`] and [`global`] turn a link
//! into key rates for the two eavesdropping models, and [`pso`] with
//! [`objective`] tunes RIS phases and splitter transmissivities.
//! [`experiment`] drives sweeps from a JSON configuration.

// range checks are written as !(x >= lo) so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod global;
pub mod linalg;
pub mod localized;
pub mod noise;
pub mod objective;
pub mod pso;
pub mod skr;
pub mod system;

pub use channel::{ChannelMatrix, LinkChannels, RisPhaseConfig, SegmentTag};
pub use error::{Error, Result};
pub use gaussian::{ChannelDilation, QuadratureCovariance, SymplecticSpectrum};
pub use localized::{LinkDilations, SplitterSettings};
pub use noise::NoiseVariances;
pub use objective::{LinkState, OperatingPoint, SkrObjective};
pub use pso::{OptimizationResult, SearchSpace, SwarmConfig};
pub use skr::{Scenario, Segment, SkrBreakdown};
pub use system::SystemParams;
