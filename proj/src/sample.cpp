#include "rmtl/sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rmtl/error.hpp"

namespace rmtl {

namespace {

// Events of interest, then competing events, then censorings.
int tie_rank(Status s) {
  switch (s) {
    case Status::Interest: return 0;
    case Status::Competing: return 1;
    case Status::Censored: return 2;
  }
  return 3;
}

}  // namespace

Status status_from_code(int code) {
  if (code < 0 || code > 2) {
    throw InputError("unknown status " + std::to_string(code));
  }
  return static_cast<Status>(code);
}

Sample::Sample(std::vector<SurvRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!std::isfinite(r.time) || r.time <= 0.0) {
      throw InputError("time must be positive and finite (record " + std::to_string(i + 1) + ")");
    }
    if (tie_rank(r.status) > 2) {
      throw InputError("unknown status (record " + std::to_string(i + 1) + ")");
    }
    if (r.group != 1 && r.group != 2) {
      throw InputError("unknown group " + std::to_string(r.group) + " (record " +
                       std::to_string(i + 1) + ")");
    }
  }
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = records[a];
    const auto& rb = records[b];
    if (ra.time != rb.time) return ra.time < rb.time;
    return tie_rank(ra.status) < tie_rank(rb.status);
  });
  records_.reserve(records.size());
  for (auto i : order) records_.push_back(records[i]);
}

std::size_t Sample::group_size(int group) const {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [group](const SurvRecord& r) { return r.group == group; }));
}

double Sample::max_time() const { return records_.empty() ? 0.0 : records_.back().time; }

Sample Sample::subset(int group) const {
  Sample out;
  for (const auto& r : records_) {
    if (r.group == group) out.records_.push_back(r);
  }
  return out;
}

Sample Sample::relabeled(std::span<const std::uint8_t> groups) const {
  if (groups.size() != records_.size()) {
    throw InputError("label count does not match sample size");
  }
  Sample out;
  out.records_ = records_;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] != 1 && groups[i] != 2) throw InputError("group label must be 1 or 2");
    out.records_[i].group = groups[i];
  }
  return out;
}

std::vector<std::uint8_t> Sample::group_labels() const {
  std::vector<std::uint8_t> out(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(records_[i].group);
  }
  return out;
}

void require_two_groups(const Sample& sample) {
  if (sample.empty()) throw InputError("empty input");
  if (!sample.has_both_groups()) throw InputError("both groups must be present");
}

}  // namespace rmtl
