// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <iostream>

#include "distilrobust/cli.hpp"

int main(int argc, char** argv) {
  return distilrobust::cli::run(argc, argv, std::cout, std::cerr);
}
