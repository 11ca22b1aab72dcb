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

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace privtier {

/// Relative path (forward slashes, NFC) -> lowercase hex SHA-256.
struct Manifest {
  std::map<std::string, std::string> entries;
  bool operator==(const Manifest&) const = default;
};

struct ManifestOptions {
  /// Relative paths left out of the tree walk (e.g. "manifest.json").
  std::set<std::string> excluded;
  unsigned workers = 1;
};

/// Hashes every regular file under `root`. Directory symlinks are followed;
/// a cycle throws IoError, as does any unreadable file.
Manifest build_manifest(const std::filesystem::path& root,
                        const ManifestOptions& options = {});

std::string serialize_manifest(const Manifest& manifest);
/// Throws ParseError on malformed JSON or non-hex digests.
Manifest parse_manifest(std::string_view document);

struct ManifestReport {
  std::vector<std::string> matched;
  std::vector<std::string> mismatched;
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  /// (path, message) for files that could not be read.
  std::vector<std::pair<std::string, std::string>> errors;

  bool clean() const {
    return mismatched.empty() && missing.empty() && errors.empty();
  }
};

/// Never throws for per-file problems; they land in `errors`.
ManifestReport verify_manifest(const std::filesystem::path& root,
                               const Manifest& manifest,
                               const ManifestOptions& options = {});

/// Forward slashes and Unicode NFC.
std::string normalize_relative_path(const std::filesystem::path& relative);

}  // namespace privtier
