#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "dyclu/numerics.hpp"

namespace dyclu {

/// One logged interaction. Header: user,context,chosen,reward[,random_reward]
/// where `context` lists the candidate contexts as semicolon-separated groups
/// of comma-separated reals (quote the field, or leave it bare: the fixed
/// columns are taken from both ends of the row).
struct ReplayEvent {
  std::string user;
  Matrix candidates;  // one candidate per row
  std::size_t chosen = 0;
  double reward = 0.0;
  std::optional<double> random_reward;
  std::size_t line = 0;
};

/// Streaming reader; the context dimension is fixed by the first data row.
class ReplayReader {
 public:
  explicit ReplayReader(const std::filesystem::path& path);

  /// Next event, or nullopt at end of file. Throws ParseError with the
  /// 1-based line number on a malformed row.
  std::optional<ReplayEvent> next();

  bool has_random_reward() const noexcept { return has_random_; }
  std::optional<std::size_t> dim() const noexcept { return dim_; }

 private:
  ReplayEvent parse_row(const std::string& row);

  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_ = 0;
  bool has_header_ = false;
  bool has_random_ = false;
  std::optional<std::size_t> dim_;
};

std::vector<ReplayEvent> load_replay(const std::filesystem::path& path);

}  // namespace dyclu
