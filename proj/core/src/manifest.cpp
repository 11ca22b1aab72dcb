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

#include "privtier/manifest.hpp"

#include <fmt/format.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"
#include "privtier/digest.hpp"
#include "privtier/error.hpp"

namespace fs = std::filesystem;

namespace privtier {

std::string normalize_relative_path(const fs::path& relative) {
  const std::string generic = relative.generic_string();
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return generic;
  const icu::UnicodeString source = icu::UnicodeString::fromUTF8(generic);
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) return generic;
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

namespace {

struct FileEntry {
  std::string key;
  fs::path path;
};

void walk(const fs::path& root, const fs::path& dir,
          std::vector<fs::path>& ancestors, std::vector<FileEntry>& files,
          const std::set<std::string>& excluded) {
  std::error_code ec;
  const fs::path canonical = fs::canonical(dir, ec);
  if (ec) throw IoError("cannot resolve directory: " + ec.message(), dir.string());
  if (std::find(ancestors.begin(), ancestors.end(), canonical) != ancestors.end()) {
    throw IoError("symlink cycle", dir.string());
  }
  ancestors.push_back(canonical);

  std::vector<fs::path> children;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    children.push_back(it->path());
  }
  if (ec) throw IoError("cannot list directory: " + ec.message(), dir.string());
  std::sort(children.begin(), children.end());

  for (const fs::path& child : children) {
    const std::string key = normalize_relative_path(child.lexically_relative(root));
    if (excluded.contains(key)) continue;
    const fs::file_status st = fs::status(child, ec);
    if (ec) throw IoError("cannot stat: " + ec.message(), child.string());
    if (fs::is_directory(st)) {
      walk(root, child, ancestors, files, excluded);
    } else if (fs::is_regular_file(st)) {
      files.push_back({key, child});
    } else if (!fs::exists(st)) {
      throw IoError("dangling symlink", child.string());
    }
  }
  ancestors.pop_back();
}

std::vector<FileEntry> list_files(const fs::path& root,
                                  const std::set<std::string>& excluded) {
  if (!fs::is_directory(root)) throw IoError("not a directory", root.string());
  std::vector<fs::path> ancestors;
  std::vector<FileEntry> files;
  walk(root, root, ancestors, files, excluded);
  return files;
}

/// Hashes `files` with a small worker pool; slot i receives file i's digest
/// or the error text.
std::vector<std::pair<std::optional<std::string>, std::string>> hash_all(
    const std::vector<FileEntry>& files, unsigned workers) {
  std::vector<std::pair<std::optional<std::string>, std::string>> results(files.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        results[i].first = to_hex(sha256_file(files[i].path));
      } catch (const std::exception& e) {
        results[i].second = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, files.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
    work();
  }
  return results;
}

}  // namespace

Manifest build_manifest(const fs::path& root, const ManifestOptions& options) {
  const auto files = list_files(root, options.excluded);
  const auto hashes = hash_all(files, options.workers);
  Manifest manifest;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!hashes[i].first) throw IoError(hashes[i].second, files[i].path.string());
    if (!manifest.entries.emplace(files[i].key, *hashes[i].first).second) {
      throw IoError("path reached twice (symlinked directory?)", files[i].key);
    }
  }
  return manifest;
}

std::string serialize_manifest(const Manifest& manifest) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [path, digest] : manifest.entries) doc[path] = digest;
  return doc.dump(2) + "\n";
}

Manifest parse_manifest(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document.begin(), document.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("manifest: {}", e.what()), e.byte);
  }
  if (!doc.is_object()) throw ParseError("manifest must be a JSON object", 0);
  Manifest manifest;
  for (const auto& [path, digest] : doc.items()) {
    if (!digest.is_string()) throw ParseError("manifest digest for " + path + " is not a string", 0);
    const std::string hex = digest.get<std::string>();
    const bool ok = hex.size() == 64 && std::all_of(hex.begin(), hex.end(), [](char c) {
                      return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                    });
    if (!ok) throw ParseError("manifest digest for " + path + " is not 64 lowercase hex chars", 0);
    manifest.entries.emplace(path, hex);
  }
  return manifest;
}

ManifestReport verify_manifest(const fs::path& root, const Manifest& manifest,
                               const ManifestOptions& options) {
  ManifestReport report;
  std::vector<FileEntry> files;
  try {
    files = list_files(root, options.excluded);
  } catch (const IoError& e) {
    report.errors.emplace_back(e.path(), e.what());
  }
  const auto hashes = hash_all(files, options.workers);

  std::map<std::string, std::size_t> on_disk;
  for (std::size_t i = 0; i < files.size(); ++i) on_disk.emplace(files[i].key, i);

  for (const auto& [path, digest] : manifest.entries) {
    auto it = on_disk.find(path);
    if (it == on_disk.end()) {
      report.missing.push_back(path);
      continue;
    }
    const auto& [hash, error] = hashes[it->second];
    if (!hash) {
      report.errors.emplace_back(path, error);
    } else if (*hash == digest) {
      report.matched.push_back(path);
    } else {
      report.mismatched.push_back(path);
    }
  }
  for (const auto& [path, index] : on_disk) {
    if (!manifest.entries.contains(path)) report.extra.push_back(path);
  }
  return report;
}

}  // namespace privtier
