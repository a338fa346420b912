#include "dyclu/replay.hpp"

#include <charconv>
#include <string_view>

#include "dyclu/error.hpp"

namespace dyclu {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits on commas outside double quotes; quotes are removed.
std::vector<std::string> split_csv(std::string_view row) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const char c = row[i];
    if (c == '"') {
      if (quoted && i + 1 < row.size() && row[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == ',' && !quoted) {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_index(std::string_view text, std::size_t& out) {
  text = trim(text);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

ReplayReader::ReplayReader(const std::filesystem::path& path) : path_(path), in_(path) {
  if (!in_) throw Error(ErrorCode::IoError, "cannot open replay log " + path.string());
}

std::optional<ReplayEvent> ReplayReader::next() {
  std::string row;
  while (std::getline(in_, row)) {
    ++line_;
    if (trim(row).empty()) continue;
    if (!has_header_) {
      const auto fields = split_csv(row);
      std::vector<std::string> names;
      for (const auto& f : fields) names.emplace_back(trim(f));
      const bool base = names.size() >= 4 && names[0] == "user" && names[1] == "context" &&
                        names[2] == "chosen" && names[3] == "reward";
      const bool extra = names.size() == 5 && names[4] == "random_reward";
      if (!base || (names.size() != 4 && !extra)) {
        throw Error(ErrorCode::ParseError,
                    path_.string() + ":" + std::to_string(line_) +
                        ": expected header user,context,chosen,reward[,random_reward]");
      }
      has_header_ = true;
      has_random_ = extra;
      continue;
    }
    return parse_row(row);
  }
  return std::nullopt;
}

ReplayEvent ReplayReader::parse_row(const std::string& row) {
  auto fail = [&](const std::string& what) {
    return Error(ErrorCode::ParseError, path_.string() + ":" + std::to_string(line_) + ": " + what);
  };
  const std::size_t fixed_tail = has_random_ ? 3 : 2;
  const auto fields = split_csv(row);
  if (fields.size() < 2 + fixed_tail) throw fail("too few fields");

  ReplayEvent ev;
  ev.line = line_;
  ev.user = std::string(trim(fields.front()));
  if (ev.user.empty()) throw fail("empty user");

  // Bare context fields were split on their inner commas; glue them back.
  std::string context;
  for (std::size_t i = 1; i + fixed_tail < fields.size(); ++i) {
    if (i > 1) context.push_back(',');
    context += fields[i];
  }
  const std::size_t tail = fields.size() - fixed_tail;
  if (!parse_index(fields[tail], ev.chosen)) throw fail("chosen is not a non-negative integer");
  if (!parse_double(fields[tail + 1], ev.reward)) throw fail("reward is not a number");
  if (has_random_) {
    double r = 0.0;
    if (!parse_double(fields[tail + 2], r)) throw fail("random_reward is not a number");
    ev.random_reward = r;
  }

  std::vector<std::vector<double>> groups;
  std::string_view rest(context);
  while (true) {
    const auto semi = rest.find(';');
    const std::string_view group = trim(rest.substr(0, semi));
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= group.size()) {
      const auto comma = group.find(',', start);
      const auto piece = group.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - start);
      double v = 0.0;
      if (!parse_double(piece, v)) throw fail("context entry is not a number");
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    groups.push_back(std::move(values));
    if (semi == std::string_view::npos) break;
    rest.remove_prefix(semi + 1);
  }

  const std::size_t d = groups.front().size();
  if (!dim_) dim_ = d;
  for (const auto& g : groups) {
    if (g.size() != *dim_) {
      throw fail("context has dimension " + std::to_string(g.size()) + ", expected " +
                 std::to_string(*dim_));
    }
  }
  if (ev.chosen >= groups.size()) throw fail("chosen index exceeds candidate count");

  ev.candidates.resize(static_cast<Eigen::Index>(groups.size()), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < groups.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      ev.candidates(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = groups[r][c];
    }
  }
  return ev;
}

std::vector<ReplayEvent> load_replay(const std::filesystem::path& path) {
  ReplayReader reader(path);
  std::vector<ReplayEvent> out;
  while (auto ev = reader.next()) out.push_back(std::move(*ev));
  return out;
}

}  // namespace dyclu
