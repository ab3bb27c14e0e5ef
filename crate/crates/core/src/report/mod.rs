// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Report tables and plots over a utilization dataset.
//!
//! | file                 | contents                                             |
//! |----------------------|------------------------------------------------------|
//! | `utilization_boxes`  | per-interval box statistics over all groups          |
//! | `monthly_peak_boxes` | per-month box over each group's highest interval     |
//! | `isp_peaks`          | pooled 95th-percentile peak per ISP, equal weights   |
//! | `peak_cdf`           | 95th-percentile peak CDFs weighted by links/capacity |
//! | `region_boxes`       | per-interval box statistics per region               |
//! | `capacity_growth`    | monthly capacity totals and growth                   |
//! | `hourly_peaks`       | per-group monthly sums of hourly peak bytes          |
//! | `over_capacity`      | intervals with utilization above 1                   |
//! | `headline.json`      | summary numbers                                      |
//!
//! Each table is a CSV; the first five tables and capacity growth also get an SVG.

pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::inventory::GroupId;
use crate::ipfix::Direction;
use crate::metrics::{
    capacity_growth, fraction_above, implied_monthly_rate, percentile, utilization, BoxStats, CdfPoint, MetricsError,
    UtilizationDataset, Weighting,
};
use crate::pipeline::{hourly_peak_sum, IntervalAggregate, Window};
use crate::time::{format_iso, Month, HOUR_SECS};
use svg::{stack, Chart, PALETTE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportConfig {
    pub direction: Direction,
    /// Month for the monthly tables; the latest month in the data if unset.
    pub month: Option<Month>,
    /// Restricts the time-series tables.
    pub window: Option<Window>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            direction: Direction::Ingress,
            month: None,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSummary {
    pub months: usize,
    pub monthly_pct: Vec<f64>,
    /// Growth from the first to the last month.
    pub cumulative_pct: f64,
    /// Compounding rate over the month-to-month steps.
    pub geometric_mean_pct: f64,
    /// The same cumulative growth spread over as many steps as months.
    pub rate_over_month_count_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Headline {
    pub month: Month,
    pub direction: Direction,
    pub groups: usize,
    pub links: u64,
    pub isps: usize,
    pub regions: usize,
    pub intervals: usize,
    /// Highest per-interval median utilization across groups.
    pub peak_median_utilization: f64,
    pub peak_median_at: String,
    pub aggregate_peak_utilization_95: f64,
    pub groups_exceeding_095: usize,
    pub groups_exceeding_095_fraction: f64,
    /// Link-weighted share of groups whose monthly 95th percentile tops 0.90.
    pub links_above_090: f64,
    /// Capacity-weighted share of groups whose monthly 95th percentile tops 0.95.
    pub capacity_above_095: f64,
    pub median_isp_peak_utilization_95: f64,
    pub over_capacity_points: usize,
    pub capacity_growth: Option<GrowthSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub plots: Vec<(&'static str, String)>,
    pub headline: Headline,
}

fn f(v: f64) -> String {
    format!("{v:.6}")
}

fn box_cells(b: &BoxStats) -> [String; 5] {
    [f(b.p5), f(b.p25), f(b.median), f(b.p75), f(b.p95)]
}

const BOX_HEADER: [&str; 5] = ["p5", "p25", "median", "p75", "p95"];

fn with_box(prefix: &[&'static str]) -> Vec<&'static str> {
    prefix.iter().copied().chain(BOX_HEADER).collect()
}

// Utilization of the sum of all groups' bytes over their summed capacity,
// interval by interval.
fn pooled_utilizations(ds: &UtilizationDataset, month: Month, direction: Direction) -> Result<Vec<f64>, MetricsError> {
    let mut cells: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
    for g in ds.groups() {
        for p in g.in_month(month) {
            let c = cells.entry(p.interval_start).or_default();
            c.0 += p.bytes(direction);
            c.1 += p.capacity_bps;
        }
    }
    cells.values().map(|&(b, c)| utilization(b, c)).collect()
}

fn group_counts(ds: &UtilizationDataset, region: Option<&str>, window: Option<Window>) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    for g in ds.groups().iter().filter(|g| region.is_none_or(|r| g.key.region == r)) {
        for p in &g.points {
            if window.is_none_or(|w| w.contains(p.interval_start)) {
                *out.entry(p.interval_start).or_default() += 1;
            }
        }
    }
    out
}

pub fn build_report(ds: &UtilizationDataset, cfg: &ReportConfig) -> Result<Report, MetricsError> {
    if ds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let dir = cfg.direction;
    let months = ds.months();
    let month = match cfg.month {
        Some(m) => m,
        None => *months.last().ok_or(MetricsError::EmptyInput)?,
    };
    let mut tables = Vec::new();
    let mut plots = Vec::new();

    let boxes = ds.box_series(None, cfg.window, dir)?;
    let counts = group_counts(ds, None, cfg.window);
    let mut t = Table::new("utilization_boxes", &with_box(&["timestamp", "groups"]));
    for (ts, b) in &boxes {
        let mut row = vec![format_iso(*ts), counts[ts].to_string()];
        row.extend(box_cells(b));
        t.rows.push(row);
    }
    tables.push(t);
    plots.push((
        "utilization_boxes",
        plot_box_series(&boxes, "Utilization across link groups"),
    ));

    let mut t = Table::new("monthly_peak_boxes", &with_box(&["month", "groups"]));
    let mut monthly = Vec::new();
    for &m in &months {
        let b = ds.monthly_peak_box(m, dir)?;
        let n = ds.groups().iter().filter(|g| g.in_month(m).next().is_some()).count();
        let mut row = vec![m.to_string(), n.to_string()];
        row.extend(box_cells(&b));
        t.rows.push(row);
        monthly.push((m, b));
    }
    tables.push(t);
    plots.push(("monthly_peak_boxes", plot_monthly_boxes(&monthly)));

    let mut isp = ds.isp_peak_distribution(month, dir)?;
    isp.sort_by(|a, b| {
        a.peak_utilization_95
            .total_cmp(&b.peak_utilization_95)
            .then(a.isp.cmp(&b.isp))
    });
    let mut t = Table::new("isp_peaks", &["isp", "peak_utilization_95", "cumulative"]);
    let n = isp.len() as f64;
    let mut isp_cdf = Vec::new();
    for (i, p) in isp.iter().enumerate() {
        let cum = (i + 1) as f64 / n;
        t.rows.push(vec![p.isp.clone(), f(p.peak_utilization_95), f(cum)]);
        isp_cdf.push(CdfPoint {
            value: p.peak_utilization_95,
            cumulative: cum,
        });
    }
    tables.push(t);
    plots.push((
        "isp_peaks",
        plot_cdfs(
            &[("ISPs, equal weight", &isp_cdf)],
            &format!("95th percentile peak per ISP, {month}"),
        ),
    ));

    let per_link = ds.weighted_peak_distribution(Weighting::PerLink, month, dir)?;
    let by_cap = ds.weighted_peak_distribution(Weighting::ByCapacity, month, dir)?;
    let mut t = Table::new("peak_cdf", &["weighting", "peak_utilization_95", "cumulative"]);
    for (name, cdf) in [("per-link", &per_link), ("by-capacity", &by_cap)] {
        for p in cdf {
            t.rows.push(vec![name.to_string(), f(p.value), f(p.cumulative)]);
        }
    }
    tables.push(t);
    plots.push((
        "peak_cdf",
        stack(&[
            cdf_chart(
                &[("weighted by links", &per_link)],
                &format!("Monthly 95th percentile peak, {month}"),
            ),
            cdf_chart(&[("weighted by capacity", &by_cap)], ""),
        ]),
    ));

    let mut t = Table::new("region_boxes", &with_box(&["region", "timestamp", "groups"]));
    let mut regional = Vec::new();
    for region in ds.regions() {
        let series = ds.region_box_series(region, cfg.window, dir)?;
        let counts = group_counts(ds, Some(region), cfg.window);
        for (ts, b) in &series {
            let mut row = vec![region.to_string(), format_iso(*ts), counts[ts].to_string()];
            row.extend(box_cells(b));
            t.rows.push(row);
        }
        regional.push((region.to_string(), series));
    }
    tables.push(t);
    plots.push((
        "region_boxes",
        stack(
            &regional
                .iter()
                .map(|(r, s)| box_series_chart(s, &format!("Utilization in {r}"), 200.0))
                .collect::<Vec<_>>(),
        ),
    ));

    let totals = ds.monthly_capacity_totals();
    let mut t = Table::new("capacity_growth", &["month", "total_capacity_bps", "growth_pct"]);
    for (i, (m, total)) in totals.iter().enumerate() {
        let growth = if i == 0 {
            String::new()
        } else {
            f((total / totals[i - 1].1 - 1.0) * 100.0)
        };
        t.rows.push(vec![m.to_string(), format!("{total:.0}"), growth]);
    }
    tables.push(t);
    plots.push(("capacity_growth", plot_capacity(&totals)));
    let values: Vec<f64> = totals.iter().map(|t| t.1).collect();
    let growth = match capacity_growth(&values) {
        Ok(g) => Some(GrowthSummary {
            months: values.len(),
            rate_over_month_count_pct: implied_monthly_rate(g.cumulative_pct, values.len()),
            monthly_pct: g.monthly_pct,
            cumulative_pct: g.cumulative_pct,
            geometric_mean_pct: g.geometric_mean_pct,
        }),
        Err(MetricsError::InsufficientHistory) => None,
        Err(e) => return Err(e),
    };

    let mut t = Table::new(
        "hourly_peaks",
        &[
            "region",
            "access_isp",
            "partner",
            "month",
            "ingress_peak_sum_bytes",
            "egress_peak_sum_bytes",
            "hours",
        ],
    );
    for g in ds.groups() {
        let series: Vec<IntervalAggregate> = g
            .points
            .iter()
            .map(|p| IntervalAggregate {
                group: GroupId(0),
                interval_start: p.interval_start,
                ingress_bytes: p.ingress_bytes,
                egress_bytes: p.egress_bytes,
            })
            .collect();
        let ingress = hourly_peak_sum(&series, Direction::Ingress).expect("points are sorted");
        let egress = hourly_peak_sum(&series, Direction::Egress).expect("points are sorted");
        for (m, sum) in &ingress.monthly_sums {
            let hours = ingress.peaks.iter().filter(|(h, _)| Month::of(*h) == *m).count();
            t.rows.push(vec![
                g.key.region.clone(),
                g.key.isp.clone(),
                g.key.partner.clone(),
                m.to_string(),
                sum.to_string(),
                egress.monthly_sums.get(m).copied().unwrap_or(0).to_string(),
                hours.to_string(),
            ]);
        }
    }
    tables.push(t);

    let over = ds.over_capacity_points();
    let mut t = Table::new(
        "over_capacity",
        &[
            "timestamp",
            "region",
            "access_isp",
            "partner",
            "ingress_utilization",
            "egress_utilization",
        ],
    );
    for (key, p) in &over {
        t.rows.push(vec![
            format_iso(p.interval_start),
            key.region.clone(),
            key.isp.clone(),
            key.partner.clone(),
            f(p.ingress),
            f(p.egress),
        ]);
    }
    tables.push(t);

    let (peak_at, peak_median) =
        boxes.iter()
            .map(|(ts, b)| (*ts, b.median))
            .fold(
                (boxes[0].0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
    let isp_values: Vec<f64> = isp.iter().map(|p| p.peak_utilization_95).collect();
    let exceeding = ds.groups_exceeding(0.95, None, dir);
    let headline = Headline {
        month,
        direction: dir,
        groups: ds.groups().len(),
        links: ds.groups().iter().map(|g| g.link_count as u64).sum(),
        isps: ds.isps().len(),
        regions: ds.regions().len(),
        intervals: ds.intervals().len(),
        peak_median_utilization: peak_median,
        peak_median_at: format_iso(peak_at),
        aggregate_peak_utilization_95: percentile(&pooled_utilizations(ds, month, dir)?, 95.0)?,
        groups_exceeding_095: exceeding,
        groups_exceeding_095_fraction: exceeding as f64 / ds.groups().len() as f64,
        links_above_090: fraction_above(&per_link, 0.90),
        capacity_above_095: fraction_above(&by_cap, 0.95),
        median_isp_peak_utilization_95: percentile(&isp_values, 50.0)?,
        over_capacity_points: over.len(),
        capacity_growth: growth,
    };
    Ok(Report {
        tables,
        plots,
        headline,
    })
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn headline_json(&self) -> String {
        serde_json::to_string_pretty(&self.headline).expect("headline serializes") + "\n"
    }

    /// Writes every table, plot and `headline.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            fs::write(&p, t.to_csv())?;
            written.push(p);
        }
        for (name, svg) in &self.plots {
            let p = dir.join(format!("{name}.svg"));
            fs::write(&p, svg)?;
            written.push(p);
        }
        let p = dir.join("headline.json");
        fs::write(&p, self.headline_json())?;
        written.push(p);
        Ok(written)
    }
}

fn y_top(max: f64) -> f64 {
    (max.max(1.0) * 10.0).ceil() / 10.0
}

fn y_ticks(top: f64) -> Vec<f64> {
    (0..=(top * 5.0).round() as usize).map(|i| i as f64 * 0.2).collect()
}

fn box_series_chart(series: &[(i64, BoxStats)], title: &str, height: f64) -> Chart {
    let t0 = series.first().map_or(0, |s| s.0);
    let t1 = series.last().map_or(0, |s| s.0);
    let hours = |ts: i64| (ts - t0) as f64 / HOUR_SECS as f64;
    let top = y_top(series.iter().map(|s| s.1.p95).fold(0.0, f64::max));
    let mut c = Chart::new(720.0, height, (0.0, hours(t1).max(1.0)), (0.0, top));
    let span_h = hours(t1);
    let step = if span_h > 72.0 {
        24
    } else if span_h > 12.0 {
        6
    } else {
        1
    };
    let ticks: Vec<(f64, String)> = (0..=span_h as i64)
        .step_by(step)
        .map(|h| {
            let ts = t0 + h * HOUR_SECS;
            (h as f64, format_iso(ts)[5..16].replace('T', " "))
        })
        .collect();
    c.title(title).axes("time (UTC)", "utilization", &ticks, &y_ticks(top));
    let pts = |sel: fn(&BoxStats) -> f64| series.iter().map(|(ts, b)| (hours(*ts), sel(b))).collect::<Vec<_>>();
    c.band(&pts(|b| b.p5), &pts(|b| b.p95), PALETTE[0], 0.15);
    c.band(&pts(|b| b.p25), &pts(|b| b.p75), PALETTE[0], 0.35);
    c.line(&pts(|b| b.median), "#000", 1.2);
    c.hline(0.5, PALETTE[1]);
    c
}

fn plot_box_series(series: &[(i64, BoxStats)], title: &str) -> String {
    box_series_chart(series, title, 360.0).finish()
}

fn plot_monthly_boxes(boxes: &[(Month, BoxStats)]) -> String {
    let top = y_top(boxes.iter().map(|b| b.1.p95).fold(0.0, f64::max));
    let n = boxes.len() as f64;
    let mut c = Chart::new(720.0, 360.0, (0.0, n.max(1.0)), (0.0, top));
    let ticks: Vec<(f64, String)> = boxes
        .iter()
        .enumerate()
        .map(|(i, (m, _))| (i as f64 + 0.5, m.to_string()))
        .collect();
    c.title("Highest interval utilization per group, by month")
        .axes("month", "utilization", &ticks, &y_ticks(top));
    for (i, (_, b)) in boxes.iter().enumerate() {
        c.boxplot(i as f64 + 0.5, 0.3, b, PALETTE[0]);
    }
    c.finish()
}

fn cdf_chart(series: &[(&str, &[CdfPoint])], title: &str) -> Chart {
    let top = series
        .iter()
        .flat_map(|(_, s)| s.iter().map(|p| p.value))
        .fold(1.0, f64::max);
    let mut c = Chart::new(720.0, 320.0, (0.0, top), (0.0, 1.0));
    let ticks: Vec<(f64, String)> = (0..=(top * 10.0).ceil() as usize)
        .map(|i| (i as f64 / 10.0, format!("{:.1}", i as f64 / 10.0)))
        .collect();
    c.title(title).axes(
        "95th percentile utilization",
        "cumulative fraction",
        &ticks,
        &y_ticks(1.0),
    );
    let mut legend = Vec::new();
    for (i, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.iter().map(|p| (p.value, p.cumulative)).collect();
        c.steps(&pts, color);
        legend.push((*name, color));
    }
    c.legend(&legend);
    c
}

fn plot_cdfs(series: &[(&str, &[CdfPoint])], title: &str) -> String {
    cdf_chart(series, title).finish()
}

fn plot_capacity(totals: &[(Month, f64)]) -> String {
    let max = totals.iter().map(|t| t.1).fold(0.0, f64::max);
    let unit = 1e9;
    let top = (max / unit * 1.1).max(1.0);
    let n = totals.len() as f64;
    let mut c = Chart::new(720.0, 320.0, (0.0, n.max(1.0)), (0.0, top));
    let ticks: Vec<(f64, String)> = totals
        .iter()
        .enumerate()
        .map(|(i, (m, _))| (i as f64 + 0.5, m.to_string()))
        .collect();
    let y: Vec<f64> = (0..=5).map(|i| top * i as f64 / 5.0).collect();
    c.title("Monitored capacity at month end")
        .axes("month", "Gb/s", &ticks, &y);
    let pts: Vec<(f64, f64)> = totals
        .iter()
        .enumerate()
        .map(|(i, t)| (i as f64 + 0.5, t.1 / unit))
        .collect();
    c.line(&pts, PALETTE[2], 2.0);
    c.finish()
}
