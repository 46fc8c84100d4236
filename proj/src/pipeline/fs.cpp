#include "msmr/pipeline/fs.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "msmr/error.hpp"

namespace msmr::pipeline {

namespace fs = std::filesystem;

namespace {

fs::path temp_sibling(const fs::path& path) {
  return path.parent_path() / ("." + path.filename().string() + ".tmp-" + std::to_string(::getpid()));
}

}  // namespace

void atomic_write_text(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty() && !fs::is_directory(path.parent_path()))
    throw IoError("output directory does not exist: " + path.parent_path().string());
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("cannot write " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

StagedDir::StagedDir(fs::path target, bool replace) : target_(std::move(target)) {
  if (target_.filename().empty()) target_ = target_.parent_path();
  if (fs::exists(target_) && !replace && !(fs::is_directory(target_) && fs::is_empty(target_)))
    throw IoError("output directory exists and is not empty: " + target_.string() + " (pass --overwrite)");
  const fs::path parent = target_.parent_path().empty() ? fs::path(".") : target_.parent_path();
  if (!fs::is_directory(parent)) throw IoError("parent directory does not exist: " + parent.string());
  staging_ = temp_sibling(target_);
  fs::remove_all(staging_);
  fs::create_directory(staging_);
}

StagedDir::~StagedDir() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void StagedDir::commit() {
  std::error_code ec;
  if (fs::exists(target_)) fs::remove_all(target_, ec);
  if (ec) throw IoError("cannot replace " + target_.string() + ": " + ec.message());
  fs::rename(staging_, target_, ec);
  if (ec) throw IoError("cannot move output into place: " + target_.string() + ": " + ec.message());
  committed_ = true;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace msmr::pipeline
