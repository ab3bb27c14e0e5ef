// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

pub mod cli;
pub mod dataset;
pub mod export;
pub mod inventory;
pub mod ipfix;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod sim;
pub mod time;
