// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/pipeline.hpp"

int main(int argc, char** argv) { return camcond::run_cli(argc, argv); }
