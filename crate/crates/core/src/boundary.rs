//! Frame, subframe and slot timing recovered from one detected SSB.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerology::{
    symbol_start_sample, SAMPLES_PER_FRAME, SAMPLES_PER_SLOT, SAMPLES_PER_SUBFRAME, SHORT_CP,
    SLOTS_PER_SUBFRAME, SUBFRAMES_PER_FRAME, SYMBOLS_PER_SLOT,
};
use crate::sequences::SsbIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameParity {
    /// SSB bursts are only sent in even frames.
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryResult {
    pub pss_symbol_in_frame: usize,
    /// Symbols from the PSS symbol to the next slot edge.
    pub n_slot_edge: usize,
    pub slot_tick_sample: usize,
    pub subframe_tick_sample: usize,
    pub frame_start_sample: usize,
    pub frame_parity: FrameParity,
}

pub fn n_slot_edge(l: usize) -> usize {
    SYMBOLS_PER_SLOT - l % SYMBOLS_PER_SLOT
}

pub fn compute_boundaries(ssb_index: SsbIndex, pss_useful_start: usize) -> Result<BoundaryResult> {
    let l = ssb_index.start_symbol();
    let into_frame = symbol_start_sample(l)? + SHORT_CP;
    let frame_start = pss_useful_start
        .checked_sub(into_frame)
        .ok_or(Error::NegativeFrameStart(
            pss_useful_start as i64 - into_frame as i64,
        ))?;
    let slot = l / SYMBOLS_PER_SLOT;
    let subframe = slot / SLOTS_PER_SUBFRAME;
    Ok(BoundaryResult {
        pss_symbol_in_frame: l,
        n_slot_edge: n_slot_edge(l),
        slot_tick_sample: frame_start + SAMPLES_PER_SLOT * (slot + 1),
        subframe_tick_sample: frame_start + SAMPLES_PER_SUBFRAME * (subframe + 1),
        frame_start_sample: frame_start,
        frame_parity: FrameParity::Even,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TickKind {
    Slot,
    Subframe,
    Frame,
}

impl TickKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TickKind::Slot => "slot",
            TickKind::Subframe => "subframe",
            TickKind::Frame => "frame",
        }
    }
}

/// Ticks in `[slot_tick_sample, slot_tick_sample + horizon)`.
///
/// Every slot edge emits a slot tick; edges that also start a subframe or a
/// frame emit those kinds too, in slot, subframe, frame order.
pub fn tick_stream(b: &BoundaryResult, horizon_samples: usize) -> Vec<(usize, TickKind)> {
    let mut out = Vec::new();
    let first = b.slot_tick_sample;
    let first_slot = (first - b.frame_start_sample) / SAMPLES_PER_SLOT;
    let n_slots = horizon_samples.div_ceil(SAMPLES_PER_SLOT);
    let slots_per_frame = SLOTS_PER_SUBFRAME * SUBFRAMES_PER_FRAME;
    for k in 0..n_slots {
        let sample = first + k * SAMPLES_PER_SLOT;
        let slot = first_slot + k;
        out.push((sample, TickKind::Slot));
        if slot.is_multiple_of(SLOTS_PER_SUBFRAME) {
            out.push((sample, TickKind::Subframe));
        }
        if slot.is_multiple_of(slots_per_frame) {
            out.push((sample, TickKind::Frame));
        }
    }
    debug_assert!(out
        .iter()
        .all(|(s, _)| (s - b.frame_start_sample).is_multiple_of(SAMPLES_PER_SLOT)));
    debug_assert!(SAMPLES_PER_FRAME == slots_per_frame * SAMPLES_PER_SLOT);
    out
}

pub fn write_ticks_csv<W: Write>(ticks: &[(usize, TickKind)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "sample_index,kind")?;
    for (s, k) in ticks {
        writeln!(out, "{s},{}", k.as_str())?;
    }
    Ok(())
}
