//! 5G NR n78 cell search: SSB transmitter, AWGN channel and a blind
//! decimated-correlation receiver, with a Monte Carlo detection harness.
//!
//! The pipeline runs [`tx_phy::schedule_frames`] → [`channel::apply_channel`]
//! → [`rx_sync::pss_search`] → [`rx_decode`] → [`boundary::compute_boundaries`];
//! [`receiver::cell_search`] chains the receive side.

pub mod boundary;
pub mod channel;
pub mod error;
pub mod harness;
pub mod numerology;
mod ofdm;
pub mod quantize;
pub mod receiver;
pub mod rx_decode;
pub mod rx_sync;
pub mod sequences;
pub mod ssb_grid;
pub mod stream;
pub mod tx_phy;

pub use boundary::{compute_boundaries, tick_stream, BoundaryResult, TickKind};
pub use channel::{apply_channel, ChannelConfig};
pub use error::{Error, Result};
pub use numerology::{CarrierConfig, Gscn};
pub use quantize::{FixedPointFormat, NumericMode};
pub use receiver::{cell_search, CellSearchConfig, CellSearchResult};
pub use rx_sync::{pss_search, PssDetection, PssSearchConfig, PssSearcher};
pub use sequences::{Pci, SsbIndex};
pub use ssb_grid::{assemble_ssb, PbchPayload, SsbGrid};
pub use stream::IqStream;
pub use tx_phy::{schedule_frames, TxConfig};
