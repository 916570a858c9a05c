// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace camcond {

/// Parses and runs one CLI invocation (rays | reproject | calibrate |
/// voxelize | toy-forward | eval | synth). Returns the process exit code:
/// 0 success, 1 usage, 2 format/io, 3 contract, 4 numeric. Never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace camcond
