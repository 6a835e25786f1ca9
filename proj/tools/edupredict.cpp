/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "edupredict/cli.hpp"

int main(int argc, char** argv) { return edupredict::cli::dispatch(argc, argv); }
