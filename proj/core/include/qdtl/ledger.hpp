#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace qdtl {

// Charged-query tags, one per emulated subroutine.
namespace tags {
inline constexpr const char* kAex = "aex";
inline constexpr const char* kQex = "qex";
inline constexpr const char* kMae = "mae";
inline constexpr const char* kRelativeEstimate = "relative_estimate";
inline constexpr const char* kAmplification = "amplification";
inline constexpr const char* kRcnMajority = "rcn_majority";
}  // namespace tags

// Running count of charged oracle invocations, partitioned by subroutine.
// Monotone; total always equals the sum of the per-tag counters.
class QueryLedger {
  public:
    void charge(std::string_view tag, std::uint64_t queries) {
        counters_[std::string(tag)] += queries;
        total_ += queries;
    }

    std::uint64_t total() const { return total_; }

    std::uint64_t count(std::string_view tag) const {
        auto it = counters_.find(std::string(tag));
        return it == counters_.end() ? 0 : it->second;
    }

    const std::map<std::string, std::uint64_t>& counters() const { return counters_; }

    // CSV "tag,count" snapshot.
    void write_csv(std::ostream& out) const;

  private:
    std::map<std::string, std::uint64_t> counters_;
    std::uint64_t total_ = 0;
};

}  // namespace qdtl
