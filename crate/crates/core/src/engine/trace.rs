/// One (run, slot, subnetwork) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub run: u64,
    pub slot: u64,
    pub subnetwork: usize,
    /// AoI at the start of the slot (s).
    pub aoi: f64,
    /// Index of the chosen action in the action set.
    pub action: usize,
    /// Predicted mean of the next AoI (s), when the action came from the learner.
    pub mu: Option<f64>,
    /// Predicted variance (s^2).
    pub var: Option<f64>,
    /// Realized AoI at the start of the next slot (s).
    pub next_aoi: f64,
    /// Achievable rate (packets per slot).
    pub rate: f64,
    /// Interference at this subnetwork's AP on every RB (W).
    pub interference: Vec<f64>,
    /// Queue length before this slot's arrivals.
    pub backlog_before: u64,
    pub arrivals: u64,
    pub delivered: u64,
    pub backlog_after: u64,
    /// Generation slot of the newest delivered packet.
    pub freshest_delivered: Option<u64>,
}
