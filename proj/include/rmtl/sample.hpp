#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rmtl {

enum class Status : std::uint8_t { Censored = 0, Interest = 1, Competing = 2 };

struct SurvRecord {
  double time = 0.0;
  Status status = Status::Censored;
  int group = 1;

  friend bool operator==(const SurvRecord&, const SurvRecord&) = default;
};

// Parses an integer status code, throwing InputError for anything outside {0,1,2}.
Status status_from_code(int code);
inline int status_code(Status s) { return static_cast<int>(s); }

/// Validated, time-ordered collection of subjects.
///
/// Records are kept sorted by ascending time. Ties are ordered events of
/// interest first, then competing events, then censorings, and finally by
/// input position, so every estimator sees the same risk sets regardless of
/// the order the data arrived in.
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::vector<SurvRecord> records);

  std::span<const SurvRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const SurvRecord& operator[](std::size_t i) const { return records_[i]; }

  std::size_t group_size(int group) const;
  bool has_both_groups() const { return group_size(1) > 0 && group_size(2) > 0; }
  double max_time() const;

  // Records of one group, still sorted.
  Sample subset(int group) const;

  // Same times and statuses with new group labels given in sorted order.
  // Relabelling never changes the sort order.
  Sample relabeled(std::span<const std::uint8_t> groups) const;

  std::vector<std::uint8_t> group_labels() const;

 private:
  std::vector<SurvRecord> records_;
};

// Throws InputError unless both groups are present.
void require_two_groups(const Sample& sample);

}  // namespace rmtl
