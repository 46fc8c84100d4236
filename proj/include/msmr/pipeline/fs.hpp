#pragma once

#include <filesystem>
#include <string>

namespace msmr::pipeline {

/// Writes to a sibling temporary file, then renames over `path`.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

/// Output directory built under a temporary sibling name and moved into
/// place by commit(). Dropping an uncommitted StagedDir deletes it.
class StagedDir {
 public:
  /// Fails when `target` exists and is not an empty directory, unless
  /// `replace` is set.
  StagedDir(std::filesystem::path target, bool replace = false);
  ~StagedDir();
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;

  const std::filesystem::path& path() const { return staging_; }
  const std::filesystem::path& target() const { return target_; }
  void commit();

 private:
  std::filesystem::path target_, staging_;
  bool committed_ = false;
};

std::string read_text(const std::filesystem::path& path);

}  // namespace msmr::pipeline
