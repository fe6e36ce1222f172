//! Packet generation, queueing, delivery and AoI bookkeeping.
//!
//! Time is kept in whole slots: a packet is stamped with the index of the
//! slot it was sampled in, and AoI is the number of slots since the
//! generation of the freshest delivered packet. Seconds are `slots * tau`,
//! always computed the same way so threshold comparisons are exact.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::scenario::ServiceOrder;

/// `count` packets sampled at the start of slot `generation_slot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketBatch {
    pub generation_slot: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("packet generated in slot {generation} delivered in earlier slot {slot}")]
    FutureStampedPacket { generation: u64, slot: u64 },
}

/// Packets sampled in slot `t`: `floor(rate)` plus one more with probability `frac(rate)`.
pub fn generate_arrivals<R: Rng + ?Sized>(rate: f64, t: u64, rng: &mut R) -> PacketBatch {
    let whole = rate.floor();
    let frac = rate - whole;
    let extra = if frac > 0.0 && rng.random::<f64>() < frac { 1 } else { 0 };
    PacketBatch { generation_slot: t, count: whole as u64 + extra }
}

/// The sensor's output buffer, stored as runs of same-slot packets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensorQueue {
    batches: VecDeque<PacketBatch>,
    len: u64,
}

impl SensorQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, batch: PacketBatch) {
        if batch.count == 0 {
            return;
        }
        debug_assert!(self.batches.back().map_or(true, |b| b.generation_slot <= batch.generation_slot));
        self.len += batch.count;
        match self.batches.back_mut() {
            Some(last) if last.generation_slot == batch.generation_slot => last.count += batch.count,
            _ => self.batches.push_back(batch),
        }
    }

    /// Generation slots from head to tail, one entry per packet.
    pub fn generation_slots(&self) -> impl Iterator<Item = u64> + '_ {
        self.batches.iter().flat_map(|b| std::iter::repeat(b.generation_slot).take(b.count as usize))
    }

    /// Removes up to `floor(rate)` packets in service order. The fractional
    /// part of the rate is lost.
    pub fn deliver(&mut self, rate: f64, order: ServiceOrder) -> Vec<PacketBatch> {
        let mut budget = if rate.is_finite() { rate.max(0.0).floor() as u64 } else { u64::MAX };
        let mut out = Vec::new();
        while budget > 0 {
            let batch = match order {
                ServiceOrder::Fifo => self.batches.front_mut(),
                ServiceOrder::Lifo => self.batches.back_mut(),
            };
            let Some(batch) = batch else { break };
            let take = budget.min(batch.count);
            out.push(PacketBatch { generation_slot: batch.generation_slot, count: take });
            batch.count -= take;
            budget -= take;
            self.len -= take;
            if batch.count == 0 {
                match order {
                    ServiceOrder::Fifo => self.batches.pop_front(),
                    ServiceOrder::Lifo => self.batches.pop_back(),
                };
            }
        }
        out
    }
}

/// Age of the freshest update at the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AoiState {
    /// AoI at the current slot boundary, in slots.
    pub aoi_slots: u64,
    /// Generation slot of the freshest delivered packet.
    pub last_generation_slot: u64,
}

impl Default for AoiState {
    fn default() -> Self {
        Self { aoi_slots: 0, last_generation_slot: 0 }
    }
}

impl AoiState {
    pub fn seconds(&self, tau: f64) -> f64 {
        slots_to_seconds(self.aoi_slots, tau)
    }

    /// Advances from the boundary of slot `t` to that of `t + 1`, given the
    /// packets delivered during slot `t`.
    pub fn update(&self, delivered: &[PacketBatch], t: u64) -> Result<AoiState, LinkError> {
        let mut freshest = None;
        for b in delivered.iter().filter(|b| b.count > 0) {
            if b.generation_slot > t {
                return Err(LinkError::FutureStampedPacket { generation: b.generation_slot, slot: t });
            }
            freshest = freshest.max(Some(b.generation_slot));
        }
        Ok(match freshest {
            Some(g) if g > self.last_generation_slot => AoiState { aoi_slots: t + 1 - g, last_generation_slot: g },
            _ => AoiState { aoi_slots: self.aoi_slots + 1, last_generation_slot: self.last_generation_slot },
        })
    }
}

pub fn slots_to_seconds(slots: u64, tau: f64) -> f64 {
    slots as f64 * tau
}
