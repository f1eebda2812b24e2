// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_COUNTERS_HPP
#define MAXTOMO_COUNTERS_HPP

#include <atomic>

namespace maxtomo {

// Global instrumentation counters. A cost+gradient evaluation is expected
// to perform exactly one matrix assembly, one preconditioner factorization
// and two block solves (state + adjoint); tests assert this.
struct Counters {
  std::atomic<long> assemblies{0};
  std::atomic<long> factorizations{0};
  std::atomic<long> block_solves{0};

  void reset() {
    assemblies = 0;
    factorizations = 0;
    block_solves = 0;
  }
};

Counters& counters();

}  // namespace maxtomo

#endif  // MAXTOMO_COUNTERS_HPP
