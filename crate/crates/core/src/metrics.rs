// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Utilization statistics over the per-group dataset: nearest-rank
//! percentiles, monthly 95th-percentile peaks, link- and capacity-weighted
//! distributions, per-interval box statistics, per-ISP peaks and capacity
//! growth.
//!
//! Utilization is `bytes * 8 / (300 s * capacity)`. Values above 1 are kept
//! as they are; [`UtilizationPoint::over_capacity`] flags them.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::dataset::PrivateRow;
use crate::ipfix::Direction;
use crate::pipeline::Window;
use crate::time::{Month, INTERVAL_SECS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("capacity is zero")]
    ZeroCapacity,
    #[error("no values to summarize")]
    EmptyInput,
    #[error("percentile {0} outside [0, 100]")]
    InvalidPercentile(f64),
    #[error("value is not a finite number")]
    NonFinite,
    #[error("unknown region {0:?}")]
    UnknownRegion(String),
    #[error("capacity growth needs at least two monthly totals")]
    InsufficientHistory,
}

pub type Result<T> = std::result::Result<T, MetricsError>;

pub fn utilization(bytes: u64, capacity_bps: u64) -> Result<f64> {
    if capacity_bps == 0 {
        return Err(MetricsError::ZeroCapacity);
    }
    Ok(bytes as f64 * 8.0 / (INTERVAL_SECS as f64 * capacity_bps as f64))
}

/// Nearest-rank percentile: the value at rank `ceil(p / 100 * n)` of the
/// sorted input, with rank 0 read as the minimum.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(MetricsError::InvalidPercentile(p));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mut scratch = values.to_vec();
    let idx = nearest_rank(scratch.len(), p) - 1;
    let (_, v, _) = scratch.select_nth_unstable_by(idx, f64::total_cmp);
    Ok(*v)
}

fn nearest_rank(n: usize, p: f64) -> usize {
    // p * n first keeps integer percentiles exact, e.g. 95 * 20 / 100 = 19.
    // Fractional p such as 99.9 carries representation error, so a product
    // within rounding distance of an integer is taken as that integer.
    let x = p * n as f64 / 100.0;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        x.ceil()
    };
    (rank as usize).clamp(1, n)
}

/// Several nearest-rank percentiles from one sort.
pub fn percentiles(values: &[f64], ps: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if let Some(&p) = ps.iter().find(|p| !(0.0..=100.0).contains(*p)) {
        return Err(MetricsError::InvalidPercentile(p));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ps.iter().map(|&p| sorted[nearest_rank(sorted.len(), p) - 1]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats {
    pub p5: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub p95: f64,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let q = percentiles(values, &[5.0, 25.0, 50.0, 75.0, 95.0])?;
        Ok(Self {
            p5: q[0],
            p25: q[1],
            median: q[2],
            p75: q[3],
            p95: q[4],
        })
    }

    pub fn is_ordered(&self) -> bool {
        self.p5 <= self.p25 && self.p25 <= self.median && self.median <= self.p75 && self.p75 <= self.p95
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub value: f64,
    pub cumulative: f64,
}

/// Step CDF of weighted values; equal values collapse into one step.
pub fn weighted_cdf(samples: &[(f64, f64)]) -> Result<Vec<CdfPoint>> {
    if samples.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if samples
        .iter()
        .any(|(v, w)| !v.is_finite() || !w.is_finite() || *w < 0.0)
    {
        return Err(MetricsError::NonFinite);
    }
    let total: f64 = samples.iter().map(|s| s.1).sum();
    if total <= 0.0 {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<CdfPoint> = Vec::new();
    let mut acc = 0.0;
    for (value, weight) in sorted {
        acc += weight;
        match out.last_mut() {
            Some(last) if last.value == value => last.cumulative = acc / total,
            _ => out.push(CdfPoint {
                value,
                cumulative: acc / total,
            }),
        }
    }
    if let Some(last) = out.last_mut() {
        last.cumulative = 1.0;
    }
    Ok(out)
}

/// Share of total weight with a value strictly above `threshold`.
pub fn fraction_above(cdf: &[CdfPoint], threshold: f64) -> f64 {
    let below = cdf
        .iter()
        .take_while(|p| p.value <= threshold)
        .last()
        .map_or(0.0, |p| p.cumulative);
    1.0 - below
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Each group counts once.
    PerGroup,
    /// Each group counts once per member link.
    PerLink,
    /// Each group counts with its share of total capacity.
    ByCapacity,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroupKey {
    pub isp: String,
    pub region: String,
    pub partner: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupPoint {
    pub interval_start: i64,
    pub ingress_bytes: u64,
    pub egress_bytes: u64,
    pub capacity_bps: u64,
}

impl GroupPoint {
    pub fn bytes(&self, direction: Direction) -> u64 {
        match direction {
            Direction::Ingress => self.ingress_bytes,
            Direction::Egress => self.egress_bytes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilizationPoint {
    pub interval_start: i64,
    pub ingress: f64,
    pub egress: f64,
}

impl UtilizationPoint {
    pub fn get(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Ingress => self.ingress,
            Direction::Egress => self.egress,
        }
    }

    /// More bits than the provisioned capacity can carry in the interval;
    /// only possible through estimation noise.
    pub fn over_capacity(&self) -> bool {
        self.ingress > 1.0 || self.egress > 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSeries {
    pub key: GroupKey,
    pub link_count: u32,
    /// Sorted by interval start.
    pub points: Vec<GroupPoint>,
}

impl GroupSeries {
    pub fn in_month(&self, month: Month) -> impl Iterator<Item = &GroupPoint> {
        let (start, end) = month.bounds();
        let lo = self.points.partition_point(|p| p.interval_start < start);
        let hi = self.points.partition_point(|p| p.interval_start < end);
        self.points[lo..hi].iter()
    }

    pub fn utilizations(&self, direction: Direction, month: Option<Month>) -> Result<Vec<f64>> {
        let points: Box<dyn Iterator<Item = &GroupPoint>> = match month {
            Some(m) => Box::new(self.in_month(m)),
            None => Box::new(self.points.iter()),
        };
        points
            .map(|p| utilization(p.bytes(direction), p.capacity_bps))
            .collect()
    }

    pub fn utilization_points(&self) -> Result<Vec<UtilizationPoint>> {
        self.points
            .iter()
            .map(|p| {
                Ok(UtilizationPoint {
                    interval_start: p.interval_start,
                    ingress: utilization(p.ingress_bytes, p.capacity_bps)?,
                    egress: utilization(p.egress_bytes, p.capacity_bps)?,
                })
            })
            .collect()
    }

    /// 95th percentile of the group's five-minute utilizations in `month`.
    pub fn peak_utilization_95(&self, month: Month, direction: Direction) -> Result<f64> {
        percentile(&self.utilizations(direction, Some(month))?, 95.0)
    }

    /// Highest five-minute utilization in `month`.
    pub fn max_utilization(&self, month: Option<Month>, direction: Direction) -> Result<f64> {
        self.utilizations(direction, month)?
            .into_iter()
            .reduce(f64::max)
            .ok_or(MetricsError::EmptyInput)
    }

    /// Capacity in effect at the last interval of `month`.
    pub fn capacity_in(&self, month: Month) -> Option<u64> {
        self.in_month(month).last().map(|p| p.capacity_bps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IspPeak {
    pub isp: String,
    pub peak_utilization_95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityGrowth {
    /// Month-over-month growth, percent.
    pub monthly_pct: Vec<f64>,
    /// Growth from the first to the last total, percent.
    pub cumulative_pct: f64,
    /// Constant monthly rate that compounds to the cumulative growth, percent.
    pub geometric_mean_pct: f64,
}

/// Growth rates between consecutive monthly capacity totals.
pub fn capacity_growth(totals: &[f64]) -> Result<CapacityGrowth> {
    if totals.len() < 2 {
        return Err(MetricsError::InsufficientHistory);
    }
    if totals.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(MetricsError::ZeroCapacity);
    }
    let monthly_pct = totals.windows(2).map(|w| (w[1] / w[0] - 1.0) * 100.0).collect();
    let ratio = totals[totals.len() - 1] / totals[0];
    let steps = (totals.len() - 1) as f64;
    Ok(CapacityGrowth {
        monthly_pct,
        cumulative_pct: (ratio - 1.0) * 100.0,
        geometric_mean_pct: (ratio.powf(1.0 / steps) - 1.0) * 100.0,
    })
}

/// Monthly rate that compounds to `cumulative_pct` over `steps` months.
pub fn implied_monthly_rate(cumulative_pct: f64, steps: usize) -> f64 {
    ((1.0 + cumulative_pct / 100.0).powf(1.0 / steps as f64) - 1.0) * 100.0
}

/// Per-group utilization series for a reporting period.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UtilizationDataset {
    groups: Vec<GroupSeries>,
}

impl UtilizationDataset {
    pub fn from_rows(rows: &[PrivateRow]) -> Self {
        let mut by_key: BTreeMap<GroupKey, GroupSeries> = BTreeMap::new();
        for r in rows {
            let key = GroupKey {
                isp: r.access_isp.clone(),
                region: r.region.clone(),
                partner: r.partner.clone(),
            };
            let series = by_key.entry(key.clone()).or_insert_with(|| GroupSeries {
                key,
                link_count: 0,
                points: Vec::new(),
            });
            series.link_count = series.link_count.max(r.link_count);
            series.points.push(GroupPoint {
                interval_start: r.timestamp,
                ingress_bytes: r.ingress_bytes,
                egress_bytes: r.egress_bytes,
                capacity_bps: r.capacity_bps,
            });
        }
        let groups = by_key
            .into_values()
            .map(|mut g| {
                g.points.sort_by_key(|p| p.interval_start);
                g
            })
            .collect();
        Self { groups }
    }

    pub fn from_groups(mut groups: Vec<GroupSeries>) -> Self {
        groups.sort_by(|a, b| a.key.cmp(&b.key));
        groups
            .iter_mut()
            .for_each(|g| g.points.sort_by_key(|p| p.interval_start));
        Self { groups }
    }

    pub fn groups(&self) -> &[GroupSeries] {
        &self.groups
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn regions(&self) -> BTreeSet<&str> {
        self.groups.iter().map(|g| g.key.region.as_str()).collect()
    }

    pub fn isps(&self) -> BTreeSet<&str> {
        self.groups.iter().map(|g| g.key.isp.as_str()).collect()
    }

    pub fn months(&self) -> BTreeSet<Month> {
        self.groups
            .iter()
            .flat_map(|g| g.points.iter().map(|p| Month::of(p.interval_start)))
            .collect()
    }

    pub fn intervals(&self) -> BTreeSet<i64> {
        self.groups
            .iter()
            .flat_map(|g| g.points.iter().map(|p| p.interval_start))
            .collect()
    }

    pub fn filter(&self, keep: impl Fn(&GroupKey) -> bool) -> Self {
        Self {
            groups: self.groups.iter().filter(|g| keep(&g.key)).cloned().collect(),
        }
    }

    /// One `(group, monthly 95th-percentile utilization)` per group with data in `month`.
    pub fn group_peaks(&self, month: Month, direction: Direction) -> Vec<(&GroupSeries, f64)> {
        self.groups
            .iter()
            .filter_map(|g| g.peak_utilization_95(month, direction).ok().map(|p| (g, p)))
            .collect()
    }

    /// CDF of monthly 95th-percentile peaks over groups, each group weighted
    /// equally, by its link count or by its capacity share.
    pub fn weighted_peak_distribution(
        &self,
        weighting: Weighting,
        month: Month,
        direction: Direction,
    ) -> Result<Vec<CdfPoint>> {
        let samples: Vec<(f64, f64)> = self
            .group_peaks(month, direction)
            .into_iter()
            .map(|(g, peak)| {
                let weight = match weighting {
                    Weighting::PerGroup => 1.0,
                    Weighting::PerLink => f64::from(g.link_count),
                    Weighting::ByCapacity => g.capacity_in(month).unwrap_or(0) as f64,
                };
                (peak, weight)
            })
            .collect();
        weighted_cdf(&samples)
    }

    /// Per-interval box statistics over the utilization of every group
    /// matching `region` (all groups when `None`).
    pub fn box_series(
        &self,
        region: Option<&str>,
        window: Option<Window>,
        direction: Direction,
    ) -> Result<Vec<(i64, BoxStats)>> {
        let mut per_interval: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for g in self.groups.iter().filter(|g| region.is_none_or(|r| g.key.region == r)) {
            for p in &g.points {
                if window.is_some_and(|w| !w.contains(p.interval_start)) {
                    continue;
                }
                per_interval
                    .entry(p.interval_start)
                    .or_default()
                    .push(utilization(p.bytes(direction), p.capacity_bps)?);
            }
        }
        per_interval
            .into_iter()
            .map(|(ts, values)| Ok((ts, BoxStats::from_values(&values)?)))
            .collect()
    }

    pub fn region_box_series(
        &self,
        region: &str,
        window: Option<Window>,
        direction: Direction,
    ) -> Result<Vec<(i64, BoxStats)>> {
        if !self.groups.iter().any(|g| g.key.region == region) {
            return Err(MetricsError::UnknownRegion(region.to_string()));
        }
        self.box_series(Some(region), window, direction)
    }

    /// Box statistics over groups of each group's highest five-minute
    /// utilization in the month.
    pub fn monthly_peak_box(&self, month: Month, direction: Direction) -> Result<BoxStats> {
        let peaks: Vec<f64> = self
            .groups
            .iter()
            .filter_map(|g| g.max_utilization(Some(month), direction).ok())
            .collect();
        BoxStats::from_values(&peaks)
    }

    /// Per-ISP 95th percentile of pooled utilization: each interval's bytes
    /// over all of the ISP's groups divided by their summed capacity.
    pub fn isp_peak_distribution(&self, month: Month, direction: Direction) -> Result<Vec<IspPeak>> {
        let mut pooled: BTreeMap<&str, BTreeMap<i64, (u64, u64)>> = BTreeMap::new();
        for g in &self.groups {
            let per_isp = pooled.entry(g.key.isp.as_str()).or_default();
            for p in g.in_month(month) {
                let cell = per_isp.entry(p.interval_start).or_default();
                cell.0 += p.bytes(direction);
                cell.1 += p.capacity_bps;
            }
        }
        let out: Vec<IspPeak> = pooled
            .into_iter()
            .filter(|(_, cells)| !cells.is_empty())
            .map(|(isp, cells)| {
                let values = cells
                    .values()
                    .map(|&(bytes, cap)| utilization(bytes, cap))
                    .collect::<Result<Vec<_>>>()?;
                Ok(IspPeak {
                    isp: isp.to_string(),
                    peak_utilization_95: percentile(&values, 95.0)?,
                })
            })
            .collect::<Result<_>>()?;
        if out.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        Ok(out)
    }

    /// Number of groups with at least one interval above `threshold`.
    pub fn groups_exceeding(&self, threshold: f64, month: Option<Month>, direction: Direction) -> usize {
        self.groups
            .iter()
            .filter(|g| g.max_utilization(month, direction).is_ok_and(|u| u > threshold))
            .count()
    }

    /// Sum over groups of the capacity in effect at the end of each month.
    pub fn monthly_capacity_totals(&self) -> Vec<(Month, f64)> {
        self.months()
            .into_iter()
            .map(|m| {
                (
                    m,
                    self.groups.iter().filter_map(|g| g.capacity_in(m)).sum::<u64>() as f64,
                )
            })
            .collect()
    }

    /// Interval points whose utilization exceeds 1 in either direction.
    pub fn over_capacity_points(&self) -> Vec<(&GroupKey, UtilizationPoint)> {
        self.groups
            .iter()
            .flat_map(|g| {
                g.utilization_points()
                    .unwrap_or_default()
                    .into_iter()
                    .filter(UtilizationPoint::over_capacity)
                    .map(move |p| (&g.key, p))
            })
            .collect()
    }
}
