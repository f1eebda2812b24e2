// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "maxtomo/counters.hpp"

namespace maxtomo {

Counters& counters() {
  static Counters c;
  return c;
}

}  // namespace maxtomo
