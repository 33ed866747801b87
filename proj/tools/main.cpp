// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/commands.hpp"

int main(int argc, char** argv) { return appraisal::run_cli(argc, argv); }
