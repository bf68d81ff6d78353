// Copyright 2026 The Estate Events Authors.
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

#ifndef ESTATE_ERROR_HPP
#define ESTATE_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace estate {

// Two families: ValidationError (bad input, exit code 1 at the CLI) and
// SystemError (I/O, storage, remote backends; exit code 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCorpusError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DivergenceError : public ValidationError {
 public:
  DivergenceError(int epoch, const std::string& what)
      : ValidationError(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public SystemError {
 public:
  using SystemError::SystemError;
};

class BackendUnavailable : public SystemError {
 public:
  BackendUnavailable(std::string endpoint, const std::string& what)
      : SystemError(what), endpoint_(std::move(endpoint)) {}
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
};

class DurableWriteError : public SystemError {
 public:
  DurableWriteError(std::int64_t last_durable_seq, const std::string& what)
      : SystemError(what), last_durable_seq_(last_durable_seq) {}
  std::int64_t last_durable_seq() const { return last_durable_seq_; }

 private:
  std::int64_t last_durable_seq_;
};

class CorruptionError : public SystemError {
 public:
  CorruptionError(std::int64_t seq, const std::string& what)
      : SystemError(what), seq_(seq) {}
  std::int64_t seq() const { return seq_; }

 private:
  std::int64_t seq_;
};

}  // namespace estate

#endif  // ESTATE_ERROR_HPP
