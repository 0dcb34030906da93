// Copyright 2026 The vrudetect Authors
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

#ifndef VRU_CORE_ERROR_HPP_
#define VRU_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace vru
{

/// Base of every error the library throws. `kind()` is a stable machine-readable tag
/// used by the CLI when it serializes failures as JSON.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string & message)
  : std::runtime_error(message), kind_(std::move(kind))
  {
  }
  const std::string & kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define VRU_DEFINE_ERROR(Name, tag)                                                \
  class Name : public Error                                                        \
  {                                                                                \
  public:                                                                          \
    explicit Name(const std::string & message) : Error(tag, message) {}            \
  };

VRU_DEFINE_ERROR(ConfigError, "config")
VRU_DEFINE_ERROR(BoundsError, "bounds")
VRU_DEFINE_ERROR(DataError, "data")
VRU_DEFINE_ERROR(DimensionError, "dimension")
VRU_DEFINE_ERROR(NumericError, "numeric")
VRU_DEFINE_ERROR(IoError, "io")
VRU_DEFINE_ERROR(SequenceTooLongError, "sequence_too_long")

#undef VRU_DEFINE_ERROR

/// Raised when the training loss turns non-finite. `dump_path` names the state dump
/// written before throwing (empty when no dump location was configured).
class TrainingError : public Error
{
public:
  TrainingError(const std::string & message, std::string dump_path)
  : Error("training", message), dump_path_(std::move(dump_path))
  {
  }
  const std::string & dump_path() const noexcept { return dump_path_; }

private:
  std::string dump_path_;
};

}  // namespace vru

#endif  // VRU_CORE_ERROR_HPP_
