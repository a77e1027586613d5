// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "revlin/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return revlin::cli::execute(args, std::cout, std::cerr);
}
