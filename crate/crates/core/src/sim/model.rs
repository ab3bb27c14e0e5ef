// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Traffic model parameters and the distributions drawn from them.
//!
//! Flows come in two classes. Body flows are short, mostly small-packet
//! exchanges; tail flows are long video streams with near-MTU packets. The
//! tail's mean size is derived from the configured flow fraction and byte
//! share, so with the defaults 20% of flows carry 90% of the bytes.

use std::collections::BTreeMap;

use chrono::{DateTime, Timelike};
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSizeModel {
    /// Share of packets at exactly `max_bytes`.
    pub mtu_fraction: f64,
    pub min_bytes: u32,
    pub max_bytes: u32,
}

impl PacketSizeModel {
    pub fn mean(&self) -> f64 {
        let uniform = (self.min_bytes as f64 + self.max_bytes as f64) / 2.0;
        self.mtu_fraction * self.max_bytes as f64 + (1.0 - self.mtu_fraction) * uniform
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.mtu_fraction) || self.min_bytes == 0 || self.min_bytes > self.max_bytes {
            return Err(SimError::Model("packet size model"));
        }
        Ok(())
    }

    pub(crate) fn sampler(&self) -> SizeSampler {
        SizeSampler {
            mtu_threshold: (self.mtu_fraction * u64::MAX as f64) as u64,
            min: self.min_bytes,
            span: (self.max_bytes - self.min_bytes + 1) as u64,
            max: self.max_bytes,
        }
    }
}

/// Packet sizes as a pure function of (flow seed, packet index), so a flow's
/// packets can be regenerated on demand instead of stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeSampler {
    mtu_threshold: u64,
    min: u32,
    span: u64,
    max: u32,
}

impl SizeSampler {
    #[inline]
    pub fn size(&self, seed: u64, index: u64) -> u32 {
        let h = splitmix64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        if h < self.mtu_threshold {
            self.max
        } else {
            self.min + (((h & 0xFFFF_FFFF) * self.span) >> 32) as u32
        }
    }
}

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSizeModel {
    /// Fraction of flows drawn from the tail class.
    pub tail_flow_fraction: f64,
    /// Expected share of all bytes carried by tail flows.
    pub tail_byte_share: f64,
    /// Mean packets per body flow; counts are geometric on 1, 2, ...
    pub body_mean_packets: f64,
    /// Body flow duration, uniform over this range, in milliseconds.
    pub body_duration_ms: [u64; 2],
    /// Pareto shape of the tail packet count.
    pub tail_shape: f64,
    /// Upper bound on tail packet counts.
    pub tail_max_packets: u64,
    /// Tail stream packet rate, uniform over this range.
    pub tail_rate_pps: [f64; 2],
}

impl Default for FlowSizeModel {
    fn default() -> Self {
        Self {
            tail_flow_fraction: 0.2,
            tail_byte_share: 0.9,
            body_mean_packets: 4.0,
            body_duration_ms: [20, 5_000],
            tail_shape: 1.6,
            tail_max_packets: 40_000,
            tail_rate_pps: [2.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiurnalCurve {
    /// UTC hour of the daily maximum.
    pub peak_hour: f64,
    /// Load at the daily minimum relative to the peak.
    pub trough_level: f64,
}

impl Default for DiurnalCurve {
    fn default() -> Self {
        Self {
            peak_hour: 21.0,
            trough_level: 0.35,
        }
    }
}

impl DiurnalCurve {
    /// Relative load in (0, 1] at unix time `ts`; 1 at the peak hour.
    pub fn level(&self, ts: i64) -> f64 {
        let t = DateTime::from_timestamp(ts, 0).expect("timestamp in range");
        let hour = t.hour() as f64 + t.minute() as f64 / 60.0 + t.second() as f64 / 3600.0;
        let phase = 2.0 * std::f64::consts::PI * (hour - self.peak_hour) / 24.0;
        self.trough_level + (1.0 - self.trough_level) * (1.0 + phase.cos()) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficModel {
    pub seed: u64,
    pub flow_sizes: FlowSizeModel,
    pub body_packets: PacketSizeModel,
    pub tail_packets: PacketSizeModel,
    pub diurnal: DiurnalCurve,
    /// Expected egress bytes per ingress byte.
    pub egress_ratio: f64,
    /// Ingress utilization at the diurnal peak for groups without an entry
    /// in `peak_utilization`.
    pub default_peak_utilization: f64,
    /// Per-group peak ingress utilization, keyed by group id.
    pub peak_utilization: BTreeMap<u32, f64>,
    /// Multiplier on every group's flow arrival rate; 0 silences the fleet.
    pub arrival_scale: f64,
    /// Flows start this long before the run so that long streams are
    /// already in progress when it begins.
    pub warmup_secs: u64,
}

impl Default for TrafficModel {
    fn default() -> Self {
        Self {
            seed: 1,
            flow_sizes: FlowSizeModel::default(),
            body_packets: PacketSizeModel {
                mtu_fraction: 0.15,
                min_bytes: 40,
                max_bytes: 1500,
            },
            tail_packets: PacketSizeModel {
                mtu_fraction: 0.85,
                min_bytes: 64,
                max_bytes: 1500,
            },
            diurnal: DiurnalCurve::default(),
            egress_ratio: 0.12,
            default_peak_utilization: 0.5,
            peak_utilization: BTreeMap::new(),
            arrival_scale: 1.0,
            warmup_secs: 3600,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowClass {
    Body,
    Tail,
}

/// Size and duration of one drawn flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowShape {
    pub class: FlowClass,
    pub packets: u64,
    pub duration_ms: u64,
}

/// A model with its derived constants precomputed.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub model: TrafficModel,
    tail_lower: f64,
    body_geometric: Geometric,
    pub body_sizes: SizeSampler,
    pub tail_sizes: SizeSampler,
    mean_flow_bytes: f64,
}

impl TrafficModel {
    // Negated comparisons reject NaN along with out-of-range values.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SimError> {
        let f = &self.flow_sizes;
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(f.tail_flow_fraction) || !open_unit(f.tail_byte_share) {
            return Err(SimError::Model("tail fractions must lie in (0, 1)"));
        }
        if !(f.body_mean_packets >= 1.0) || f.body_duration_ms[0] > f.body_duration_ms[1] {
            return Err(SimError::Model("body flow parameters"));
        }
        if !(f.tail_shape > 1.0) || f.tail_max_packets < 2 {
            return Err(SimError::Model("tail shape must exceed 1 and the bound 2 packets"));
        }
        if !(f.tail_rate_pps[0] > 0.0) || f.tail_rate_pps[0] > f.tail_rate_pps[1] {
            return Err(SimError::Model("tail packet rate"));
        }
        self.body_packets.validate()?;
        self.tail_packets.validate()?;
        if !(0.0..1.0).contains(&self.diurnal.trough_level) || self.diurnal.trough_level <= 0.0 {
            return Err(SimError::Model("trough level must lie in (0, 1)"));
        }
        if !(self.egress_ratio >= 0.0) || !(self.arrival_scale >= 0.0) {
            return Err(SimError::Model("egress ratio and arrival scale must be non-negative"));
        }
        let peaks = std::iter::once(&self.default_peak_utilization).chain(self.peak_utilization.values());
        for &p in peaks {
            if !(p > 0.0 && p <= 2.0) {
                return Err(SimError::Model("peak utilization must lie in (0, 2]"));
            }
        }
        Ok(())
    }

    /// Mean packets per tail flow implied by the class mix.
    pub fn tail_mean_packets(&self) -> f64 {
        let f = &self.flow_sizes;
        let body_bytes = f.body_mean_packets * self.body_packets.mean();
        let tail_bytes = f.tail_byte_share / (1.0 - f.tail_byte_share) * (1.0 - f.tail_flow_fraction)
            / f.tail_flow_fraction
            * body_bytes;
        tail_bytes / self.tail_packets.mean()
    }

    pub fn peak_for(&self, group: u32) -> f64 {
        self.peak_utilization
            .get(&group)
            .copied()
            .unwrap_or(self.default_peak_utilization)
    }

    pub fn compile(&self) -> Result<CompiledModel, SimError> {
        self.validate()?;
        let f = &self.flow_sizes;
        let target = self.tail_mean_packets();
        let upper = f.tail_max_packets as f64;
        if target >= upper {
            return Err(SimError::Model("tail mean exceeds the tail packet bound"));
        }
        let tail_lower = solve_lower_bound(f.tail_shape, upper, target);
        let body_mean_bytes = f.body_mean_packets * self.body_packets.mean();
        let tail_mean_bytes = target * self.tail_packets.mean();
        let mean_flow_bytes = (1.0 - f.tail_flow_fraction) * body_mean_bytes + f.tail_flow_fraction * tail_mean_bytes;
        Ok(CompiledModel {
            model: self.clone(),
            tail_lower,
            body_geometric: Geometric::new(1.0 / f.body_mean_packets).expect("p in (0, 1]"),
            body_sizes: self.body_packets.sampler(),
            tail_sizes: self.tail_packets.sampler(),
            mean_flow_bytes,
        })
    }
}

fn bounded_pareto_mean(shape: f64, lower: f64, upper: f64) -> f64 {
    let a = shape;
    let norm = 1.0 - (lower / upper).powf(a);
    lower.powf(a) / norm * a / (a - 1.0) * (lower.powf(1.0 - a) - upper.powf(1.0 - a))
}

// The mean grows with the lower bound, so bisection on it hits any target
// in (mean at 1, upper).
fn solve_lower_bound(shape: f64, upper: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (1e-9, upper);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if bounded_pareto_mean(shape, mid, upper) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

impl CompiledModel {
    /// Expected bytes per flow over both classes.
    pub fn mean_flow_bytes(&self) -> f64 {
        self.mean_flow_bytes
    }

    pub fn draw_flow(&self, rng: &mut impl Rng) -> FlowShape {
        let f = &self.model.flow_sizes;
        if rng.gen_bool(f.tail_flow_fraction) {
            let upper = f.tail_max_packets as f64;
            let a = f.tail_shape;
            let u: f64 = rng.gen();
            let x = self.tail_lower * (1.0 - u * (1.0 - (self.tail_lower / upper).powf(a))).powf(-1.0 / a);
            let packets = (x.round() as u64).clamp(1, f.tail_max_packets);
            let rate = rng.gen_range(f.tail_rate_pps[0]..=f.tail_rate_pps[1]);
            let duration_ms = if packets > 1 {
                ((packets - 1) as f64 / rate * 1000.0).round() as u64
            } else {
                0
            };
            FlowShape {
                class: FlowClass::Tail,
                packets,
                duration_ms,
            }
        } else {
            let packets = 1 + self.body_geometric.sample(rng);
            let [lo, hi] = f.body_duration_ms;
            let duration_ms = if packets > 1 { rng.gen_range(lo..=hi) } else { 0 };
            FlowShape {
                class: FlowClass::Body,
                packets,
                duration_ms,
            }
        }
    }

    pub fn sizes(&self, class: FlowClass) -> SizeSampler {
        match class {
            FlowClass::Body => self.body_sizes,
            FlowClass::Tail => self.tail_sizes,
        }
    }
}
