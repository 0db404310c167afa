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

#ifndef POXSIM_ERRORS_H_
#define POXSIM_ERRORS_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace poxsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllegalOpcode : public Error {
 public:
  IllegalOpcode(uint16_t pc, std::array<uint8_t, 4> octets);
  uint16_t pc() const { return pc_; }
  const std::array<uint8_t, 4>& octets() const { return octets_; }

 private:
  uint16_t pc_;
  std::array<uint8_t, 4> octets_;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& reason);
  int line() const { return line_; }

 private:
  int line_;
};

class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(const std::string& symbol);
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

class LinkError : public Error {
 public:
  enum class Kind { kOverflow, kIvtConflict, kBadSections };
  LinkError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class BadRequestToken : public Error {
 public:
  BadRequestToken() : Error("challenge auth token does not verify") {}
};

class ProtocolError : public Error {
 public:
  enum class Kind { kFrameTooLarge, kTruncatedFrame, kUnknownType, kMalformed };
  ProtocolError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace poxsim

#endif  // POXSIM_ERRORS_H_
