// SPDX-License-Identifier: Apache-2.0
#include "medsim/util.hpp"

#include "medsim/rng.hpp"

namespace medsim {

std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

uint64_t derive_seed(uint64_t base, std::string_view label) {
  uint64_t h = fnv1a64(label);
  // One splitmix round keeps related labels from producing related streams.
  Rng mix(base ^ h);
  return mix.next();
}

}  // namespace medsim
