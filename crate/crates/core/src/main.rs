// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

use interconnect::cli;
use interconnect::export::KEY_ENV;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = cli::run(
        std::env::args_os(),
        std::env::var_os(KEY_ENV),
        &mut std::io::stdout().lock(),
    );
    std::process::exit(code);
}
