// Copyright 2026 The poxsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POXSIM_CRYPTO_H_
#define POXSIM_CRYPTO_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace poxsim {

using Digest = std::array<uint8_t, 32>;

Digest HmacSha256(std::span<const uint8_t> key, std::span<const uint8_t> msg);
Digest Sha256(std::span<const uint8_t> msg);

bool ConstantTimeEqual(std::span<const uint8_t> a, std::span<const uint8_t> b);

// Deterministic generator for test-mode nonces: block i is
// SHA-256(seed_be64 || i_be64).
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : seed_(seed) {}
  Digest NextBlock();

 private:
  uint64_t seed_;
  uint64_t counter_ = 0;
};

std::string ToHex(std::span<const uint8_t> bytes);
// Throws Error on odd length or non-hex characters.
std::vector<uint8_t> FromHex(const std::string& hex);

}  // namespace poxsim

#endif  // POXSIM_CRYPTO_H_
