//! Unique-word GFDM transceiver.
//!
//! The crate implements frequency-shift OQAM GFDM with a unique word (UW)
//! in place of the cyclic prefix: redundant subcarriers are computed so that
//! selected sub-symbol slots are zero in the time domain, a known sequence is
//! added on top, and the receiver exploits the resulting correlation with a
//! Wiener (LMMSE) smoother after zero-forcing frequency-domain equalization.
//!
//! CP-GFDM, UW-OFDM and CP-OFDM are realized as presets of the same chain
//! (OFDM is GFDM with one sub-symbol and a rectangular prototype), see
//! [`baselines`].
//!
//! All signal-processing types are generic over [`Real`] (`f32` or `f64`);
//! the `*64` aliases below are what the simulator uses.

pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod link;
pub mod modem;
pub mod numerics;
pub mod pulse;
pub mod receiver;
pub mod scalar;
pub mod uw;

pub use config::{
    CodingScope, FrameConfig, GuardKind, NoiseModel, RedundantPlacement, UwPlacement, Variant,
};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;

pub type PrototypeFilter64 = pulse::PrototypeFilter<f64>;
pub type ModulationSet64 = modem::ModulationSet<f64>;
pub type SymbolGrid64 = modem::SymbolGrid<f64>;
pub type GfdmBlock64 = modem::GfdmBlock<f64>;
pub type UwCoder64 = uw::UwCoder<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type WienerSmoother64 = receiver::WienerSmoother<f64>;
pub type Link64 = link::Link<f64>;

pub type PrototypeFilter32 = pulse::PrototypeFilter<f32>;
pub type ModulationSet32 = modem::ModulationSet<f32>;
pub type Link32 = link::Link<f32>;
