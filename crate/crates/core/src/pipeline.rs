// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! From sampled flow records to per-group five-minute byte totals.
//!
//! Records are scaled by the sampling factor, then each flow's bytes are
//! spread over the intervals it was active in at its average rate, and the
//! shares are summed per (group, interval).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inventory::{GroupId, Inventory, Resolution};
use crate::ipfix::{Direction, FlowRecord};
use crate::time::{self, hour_start, Month, INTERVAL_MS, INTERVAL_SECS};

pub const MAX_SAMPLING_FACTOR: u32 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("sampling factor {0} outside 1..=1000000")]
    InvalidSamplingFactor(u32),
    #[error("window [{start}, {end}) is not aligned to 300-second intervals or is empty")]
    MisalignedWindow { start: i64, end: i64 },
    #[error("series is not sorted by interval start")]
    Unsorted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Each packet is kept with probability 1/N.
    Random,
    /// Every Nth packet on an interface is kept.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSampling")]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    factor: u32,
}

#[derive(Deserialize)]
struct RawSampling {
    mode: SamplingMode,
    factor: u32,
}

impl TryFrom<RawSampling> for SamplingConfig {
    type Error = PipelineError;

    fn try_from(raw: RawSampling) -> Result<Self, Self::Error> {
        SamplingConfig::new(raw.mode, raw.factor)
    }
}

impl SamplingConfig {
    pub fn new(mode: SamplingMode, factor: u32) -> Result<Self, PipelineError> {
        if factor == 0 || factor > MAX_SAMPLING_FACTOR {
            return Err(PipelineError::InvalidSamplingFactor(factor));
        }
        Ok(Self { mode, factor })
    }

    pub fn random(factor: u32) -> Result<Self, PipelineError> {
        Self::new(SamplingMode::Random, factor)
    }

    pub fn deterministic(factor: u32) -> Result<Self, PipelineError> {
        Self::new(SamplingMode::Deterministic, factor)
    }

    /// No sampling at all.
    pub fn unsampled() -> Self {
        Self {
            mode: SamplingMode::Deterministic,
            factor: 1,
        }
    }

    pub fn factor(&self) -> u32 {
        self.factor
    }
}

/// A flow record with counters scaled back up by the sampling factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormalizedFlow {
    pub est_bytes: u64,
    pub est_packets: u64,
    pub flow_start_ms: u64,
    pub flow_end_ms: u64,
    pub group: GroupId,
    pub direction: Direction,
}

impl NormalizedFlow {
    pub fn duration_ms(&self) -> u64 {
        self.flow_end_ms - self.flow_start_ms
    }

    /// Average rate over the flow lifetime in bits per second, `None` for
    /// zero-duration flows.
    pub fn average_bitrate(&self) -> Option<f64> {
        let ms = self.duration_ms();
        (ms > 0).then(|| self.est_bytes as f64 * 8.0 * 1000.0 / ms as f64)
    }
}

pub fn normalize_flow(rec: &FlowRecord, cfg: &SamplingConfig, group: GroupId) -> NormalizedFlow {
    let n = u64::from(cfg.factor);
    NormalizedFlow {
        est_bytes: rec.octet_delta.saturating_mul(n),
        est_packets: rec.packet_delta.saturating_mul(n),
        flow_start_ms: rec.flow_start_ms,
        flow_end_ms: rec.flow_end_ms.max(rec.flow_start_ms),
        group,
        direction: rec.direction,
    }
}

/// Splits the flow's bytes over the five-minute intervals it overlaps, at a
/// uniform rate. Shares are floored and the leftover bytes go to the
/// intervals with the largest fractional parts (earliest first on ties), so
/// the shares always add up to `est_bytes`. A zero-duration flow lands
/// entirely in the interval holding its start.
pub fn attribute_to_intervals(flow: &NormalizedFlow) -> Vec<(i64, u64)> {
    let start = flow.flow_start_ms;
    let end = flow.flow_end_ms;
    let duration = end.saturating_sub(start);
    if duration == 0 {
        return vec![(time::interval_start_ms(start), flow.est_bytes)];
    }

    let first = start / INTERVAL_MS;
    let last = (end - 1) / INTERVAL_MS;
    let total = u128::from(flow.est_bytes);
    let dur = u128::from(duration);

    let mut shares: Vec<(i64, u64)> = Vec::with_capacity((last - first + 1) as usize);
    let mut remainders: Vec<(u128, usize)> = Vec::with_capacity(shares.capacity());
    let mut assigned = 0u64;
    for (i, bucket) in (first..=last).enumerate() {
        let lo = (bucket * INTERVAL_MS).max(start);
        let hi = ((bucket + 1) * INTERVAL_MS).min(end);
        let weighted = total * u128::from(hi - lo);
        let share = (weighted / dur) as u64;
        assigned += share;
        shares.push(((bucket * INTERVAL_MS / 1000) as i64, share));
        remainders.push((weighted % dur, i));
    }

    let leftover = (flow.est_bytes - assigned) as usize;
    if leftover > 0 {
        remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in remainders.iter().take(leftover) {
            shares[i].1 += 1;
        }
    }
    shares
}

/// Bytes attributed to one group and interval, per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalAggregate {
    pub group: GroupId,
    pub interval_start: i64,
    pub ingress_bytes: u64,
    pub egress_bytes: u64,
}

impl IntervalAggregate {
    pub fn empty(group: GroupId, interval_start: i64) -> Self {
        Self {
            group,
            interval_start,
            ingress_bytes: 0,
            egress_bytes: 0,
        }
    }

    pub fn bytes(&self, direction: Direction) -> u64 {
        match direction {
            Direction::Ingress => self.ingress_bytes,
            Direction::Egress => self.egress_bytes,
        }
    }

    fn add(&mut self, direction: Direction, bytes: u64) {
        match direction {
            Direction::Ingress => self.ingress_bytes += bytes,
            Direction::Egress => self.egress_bytes += bytes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contribution {
    pub group: GroupId,
    pub direction: Direction,
    pub interval_start: i64,
    pub bytes: u64,
}

/// Exact per-(group, interval) sums. Insertion order does not matter, and
/// partial aggregators over disjoint inputs can be merged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Aggregator {
    cells: HashMap<(GroupId, i64), IntervalAggregate>,
}

impl Aggregator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, c: Contribution) {
        self.cells
            .entry((c.group, c.interval_start))
            .or_insert_with(|| IntervalAggregate::empty(c.group, c.interval_start))
            .add(c.direction, c.bytes);
    }

    pub fn add_flow(&mut self, flow: &NormalizedFlow) {
        for (interval_start, bytes) in attribute_to_intervals(flow) {
            self.add(Contribution {
                group: flow.group,
                direction: flow.direction,
                interval_start,
                bytes,
            });
        }
    }

    pub fn merge(&mut self, other: Aggregator) {
        for (key, agg) in other.cells {
            let cell = self
                .cells
                .entry(key)
                .or_insert_with(|| IntervalAggregate::empty(key.0, key.1));
            cell.ingress_bytes += agg.ingress_bytes;
            cell.egress_bytes += agg.egress_bytes;
        }
    }

    pub fn get(&self, group: GroupId, interval_start: i64) -> Option<&IntervalAggregate> {
        self.cells.get(&(group, interval_start))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_bytes(&self, direction: Direction) -> u64 {
        self.cells.values().map(|a| a.bytes(direction)).sum()
    }

    /// All cells ordered by (group, interval).
    pub fn sorted(&self) -> Vec<IntervalAggregate> {
        let mut out: Vec<_> = self.cells.values().copied().collect();
        out.sort_by_key(|a| (a.group, a.interval_start));
        out
    }

    /// Per-group series ordered by interval.
    pub fn series(&self) -> BTreeMap<GroupId, Vec<IntervalAggregate>> {
        let mut out: BTreeMap<GroupId, Vec<IntervalAggregate>> = BTreeMap::new();
        for agg in self.sorted() {
            out.entry(agg.group).or_default().push(agg);
        }
        out
    }
}

pub fn aggregate(contribs: impl IntoIterator<Item = Contribution>) -> Aggregator {
    let mut agg = Aggregator::new();
    contribs.into_iter().for_each(|c| agg.add(c));
    agg
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HourlyPeaks {
    /// (hour start, largest five-minute byte count in that hour)
    pub peaks: Vec<(i64, u64)>,
    /// Sum of the hourly peaks per calendar month.
    pub monthly_sums: BTreeMap<Month, u64>,
    /// Hours between the first and last interval that had no intervals.
    pub empty_hours: usize,
}

impl HourlyPeaks {
    pub fn total(&self) -> u64 {
        self.peaks.iter().map(|p| p.1).sum()
    }
}

/// Largest five-minute value of each clock hour, and the monthly sums of
/// those peaks, for one group's series.
pub fn hourly_peak_sum(series: &[IntervalAggregate], direction: Direction) -> Result<HourlyPeaks, PipelineError> {
    if series.windows(2).any(|w| w[0].interval_start > w[1].interval_start) {
        return Err(PipelineError::Unsorted);
    }
    let mut out = HourlyPeaks::default();
    for agg in series {
        let hour = hour_start(agg.interval_start);
        let bytes = agg.bytes(direction);
        match out.peaks.last_mut() {
            Some(last) if last.0 == hour => last.1 = last.1.max(bytes),
            Some(last) => {
                out.empty_hours += ((hour - last.0) / time::HOUR_SECS - 1) as usize;
                out.peaks.push((hour, bytes));
            }
            None => out.peaks.push((hour, bytes)),
        }
    }
    for &(hour, peak) in &out.peaks {
        *out.monthly_sums.entry(Month::of(hour)).or_default() += peak;
    }
    Ok(out)
}

/// Half-open reporting window aligned to interval boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Result<Self, PipelineError> {
        if start % INTERVAL_SECS != 0 || end % INTERVAL_SECS != 0 || end <= start {
            return Err(PipelineError::MisalignedWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, interval_start: i64) -> bool {
        (self.start..self.end).contains(&interval_start)
    }

    pub fn intervals(&self) -> impl Iterator<Item = i64> {
        (self.start..self.end).step_by(INTERVAL_SECS as usize)
    }

    pub fn interval_count(&self) -> usize {
        ((self.end - self.start) / INTERVAL_SECS) as usize
    }
}

/// Sampling factors: one default, optionally overridden per access ISP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub default: SamplingConfig,
    #[serde(default)]
    pub per_isp: BTreeMap<String, SamplingConfig>,
}

impl SamplingPlan {
    pub fn uniform(cfg: SamplingConfig) -> Self {
        Self {
            default: cfg,
            per_isp: BTreeMap::new(),
        }
    }

    pub fn for_isp(&self, isp: &str) -> &SamplingConfig {
        self.per_isp.get(isp).unwrap_or(&self.default)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub records: u64,
    pub unmonitored_records: u64,
    pub estimated_bytes: u64,
    /// Estimated bytes that fell outside the window.
    pub clipped_bytes: u64,
}

/// Resolves, normalizes and aggregates records against one inventory.
pub struct FlowPipeline<'a> {
    inventory: &'a Inventory,
    sampling: SamplingPlan,
    window: Option<Window>,
    aggregator: Aggregator,
    stats: IngestStats,
}

impl<'a> FlowPipeline<'a> {
    pub fn new(inventory: &'a Inventory, sampling: SamplingPlan, window: Option<Window>) -> Self {
        Self {
            inventory,
            sampling,
            window,
            aggregator: Aggregator::new(),
            stats: IngestStats::default(),
        }
    }

    pub fn ingest(&mut self, rec: &FlowRecord) {
        self.stats.records += 1;
        let group = match self.inventory.resolve_record(rec) {
            Resolution::Group(g) => g,
            Resolution::Unmonitored => {
                self.stats.unmonitored_records += 1;
                return;
            }
        };
        let isp = &self.inventory.group(group).expect("resolved group exists").isp;
        let flow = normalize_flow(rec, self.sampling.for_isp(isp), group);
        self.stats.estimated_bytes += flow.est_bytes;
        for (interval_start, bytes) in attribute_to_intervals(&flow) {
            if self.window.is_some_and(|w| !w.contains(interval_start)) {
                self.stats.clipped_bytes += bytes;
                continue;
            }
            self.aggregator.add(Contribution {
                group,
                direction: flow.direction,
                interval_start,
                bytes,
            });
        }
    }

    pub fn ingest_all<'r>(&mut self, records: impl IntoIterator<Item = &'r FlowRecord>) {
        records.into_iter().for_each(|r| self.ingest(r));
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    pub fn finish(self) -> (Aggregator, IngestStats) {
        (self.aggregator, self.stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MB: u64 = 1_000_000;
    const GB: u64 = 1_000_000_000;

    fn flow(bytes: u64, start_ms: u64, end_ms: u64) -> NormalizedFlow {
        NormalizedFlow {
            est_bytes: bytes,
            est_packets: 1,
            flow_start_ms: start_ms,
            flow_end_ms: end_ms,
            group: GroupId(1),
            direction: Direction::Ingress,
        }
    }

    fn record(octets: u64, packets: u64) -> FlowRecord {
        FlowRecord {
            octet_delta: octets,
            packet_delta: packets,
            flow_start_ms: 0,
            flow_end_ms: 10,
            input_interface: 1,
            output_interface: 0,
            direction: Direction::Ingress,
            exporter: 1,
        }
    }

    #[test]
    fn single_packet_normalization() {
        let cfg = SamplingConfig::random(1_000).unwrap();
        let f = normalize_flow(&record(1_000, 1), &cfg, GroupId(1));
        assert_eq!((f.est_bytes, f.est_packets), (1_000_000, 1_000));
        let f = normalize_flow(&record(500, 1), &SamplingConfig::random(8_000).unwrap(), GroupId(1));
        assert_eq!(f.est_bytes, 4_000_000);
        let f = normalize_flow(&record(1234, 3), &SamplingConfig::unsampled(), GroupId(1));
        assert_eq!((f.est_bytes, f.est_packets), (1234, 3));
    }

    #[test]
    fn sampling_factor_bounds() {
        assert!(SamplingConfig::random(0).is_err());
        assert!(SamplingConfig::random(1_000_001).is_err());
        assert!(SamplingConfig::deterministic(1_000_000).is_ok());
        let parsed: Result<SamplingConfig, _> = toml::from_str("mode = \"random\"\nfactor = 0\n");
        assert!(parsed.is_err());
    }

    #[test]
    fn ten_second_gigabyte() {
        let f = flow(GB, 60_000, 70_000);
        assert_eq!(attribute_to_intervals(&f), vec![(0, GB)]);
        assert_eq!(f.average_bitrate(), Some(800_000_000.0));
    }

    #[test]
    fn full_interval() {
        assert_eq!(attribute_to_intervals(&flow(777, 300_000, 600_000)), vec![(300, 777)]);
    }

    #[test]
    fn straddles_three_intervals() {
        // 600 s flow from t=180 s: 120 s, 300 s, 180 s of overlap.
        let shares = attribute_to_intervals(&flow(900 * MB, 180_000, 780_000));
        assert_eq!(shares, vec![(0, 180 * MB), (300, 450 * MB), (600, 270 * MB)]);
    }

    #[test]
    fn zero_duration_goes_to_start_interval() {
        assert_eq!(attribute_to_intervals(&flow(42, 299_999, 299_999)), vec![(0, 42)]);
        assert_eq!(attribute_to_intervals(&flow(42, 300_000, 300_000)), vec![(300, 42)]);
    }

    #[test]
    fn largest_remainder_rounding() {
        // 10 bytes over three equal thirds of 900 s
        let shares = attribute_to_intervals(&flow(10, 0, 900_000));
        assert_eq!(shares, vec![(0, 4), (300, 3), (600, 3)]);
        let shares = attribute_to_intervals(&flow(1, 100_000, 700_000));
        assert_eq!(shares.iter().map(|s| s.1).sum::<u64>(), 1);
        assert_eq!(shares[1], (300, 1));
    }

    #[test]
    fn additive_and_order_free() {
        let a = Contribution {
            group: GroupId(1),
            direction: Direction::Ingress,
            interval_start: 0,
            bytes: 100 * MB,
        };
        let b = Contribution { bytes: 200 * MB, ..a };
        let fwd = aggregate([a, b]);
        let rev = aggregate([b, a]);
        assert_eq!(fwd, rev);
        assert_eq!(fwd.get(GroupId(1), 0).unwrap().ingress_bytes, 300 * MB);
    }

    #[test]
    fn hourly_peaks() {
        let values = [10, 40, 20, 5, 5, 5];
        let series: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &mb)| IntervalAggregate {
                ingress_bytes: mb * MB,
                ..IntervalAggregate::empty(GroupId(1), i as i64 * INTERVAL_SECS)
            })
            .collect();
        let peaks = hourly_peak_sum(&series, Direction::Ingress).unwrap();
        assert_eq!(peaks.peaks, vec![(0, 40 * MB)]);
        assert_eq!(peaks.monthly_sums.values().copied().collect::<Vec<_>>(), vec![40 * MB]);

        let mut reversed = series.clone();
        reversed.reverse();
        assert_eq!(
            hourly_peak_sum(&reversed, Direction::Ingress),
            Err(PipelineError::Unsorted)
        );
    }

    #[test]
    fn empty_hours_counted() {
        let series = [
            IntervalAggregate {
                ingress_bytes: 7,
                ..IntervalAggregate::empty(GroupId(1), 0)
            },
            IntervalAggregate {
                ingress_bytes: 9,
                ..IntervalAggregate::empty(GroupId(1), 3 * 3600)
            },
        ];
        let peaks = hourly_peak_sum(&series, Direction::Ingress).unwrap();
        assert_eq!(peaks.empty_hours, 2);
        assert_eq!(peaks.total(), 16);
    }

    #[test]
    fn windows() {
        assert!(Window::new(0, 301).is_err());
        assert!(Window::new(300, 300).is_err());
        let w = Window::new(0, 900).unwrap();
        assert_eq!(w.intervals().collect::<Vec<_>>(), vec![0, 300, 600]);
        assert!(!w.contains(900));
    }
}
