// Copyright 2026 The PrivTier Authors. All Rights Reserved.
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace privtier {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `offset` is the byte offset (or 1-based line
/// number for line-oriented formats) where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed input that violates a schema rule or record invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string video_id,
                  std::string field)
      : Error(what), video_id_(std::move(video_id)), field_(std::move(field)) {}
  const std::string& video_id() const noexcept { return video_id_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string video_id_;
  std::string field_;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A metric cannot be evaluated for the given input (e.g. ROI smaller than
/// the SSIM window).
class MetricUndefined : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Should never happen; raised when a probabilistic bound is exceeded.
class InternalFault : public Error {
 public:
  using Error::Error;
};

}  // namespace privtier
