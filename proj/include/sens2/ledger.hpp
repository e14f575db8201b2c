#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string_view>

namespace sens2 {

/// What a counted computation was performed for.
enum class Purpose : int {
  forward = 0,   ///< nominal solve and its post-convergence factorization
  fd_oracle,     ///< finite-difference probe work
  first_lass,    ///< first-level adjoint system
  first_lfss,    ///< first-level forward sensitivity system
  second_lass,   ///< second-level adjoint systems
  second_lfss,   ///< second-level forward sensitivity systems
};

enum class Counter : int {
  nonlinear_solves = 0,
  newton_iterations,
  newton_factorizations,  ///< factorizations performed inside Newton iterations
  newton_linear_solves,   ///< Newton step solves
  jacobian_factorizations,  ///< explicit factorize() calls (post-convergence)
  linear_solves_J,
  linear_solves_JT,
  residual_evals,
};

inline constexpr std::size_t kPurposeCount = 6;
inline constexpr std::size_t kCounterCount = 8;

inline constexpr std::array<Purpose, kPurposeCount> kAllPurposes = {
    Purpose::forward,    Purpose::fd_oracle,   Purpose::first_lass,
    Purpose::first_lfss, Purpose::second_lass, Purpose::second_lfss};

inline constexpr std::array<Counter, kCounterCount> kAllCounters = {
    Counter::nonlinear_solves,        Counter::newton_iterations,
    Counter::newton_factorizations,   Counter::newton_linear_solves,
    Counter::jacobian_factorizations, Counter::linear_solves_J,
    Counter::linear_solves_JT,        Counter::residual_evals};

constexpr std::string_view to_string(Purpose p) {
  switch (p) {
    case Purpose::forward: return "forward";
    case Purpose::fd_oracle: return "fd_oracle";
    case Purpose::first_lass: return "first_lass";
    case Purpose::first_lfss: return "first_lfss";
    case Purpose::second_lass: return "second_lass";
    case Purpose::second_lfss: return "second_lfss";
  }
  return "unknown";
}

constexpr std::string_view to_string(Counter c) {
  switch (c) {
    case Counter::nonlinear_solves: return "nonlinear_solves";
    case Counter::newton_iterations: return "newton_iterations";
    case Counter::newton_factorizations: return "newton_factorizations";
    case Counter::newton_linear_solves: return "newton_linear_solves";
    case Counter::jacobian_factorizations: return "jacobian_factorizations";
    case Counter::linear_solves_J: return "linear_solves_J";
    case Counter::linear_solves_JT: return "linear_solves_JT";
    case Counter::residual_evals: return "residual_evals";
  }
  return "unknown";
}

/// Plain copy of a ledger's counts.
struct LedgerSnapshot {
  std::array<std::array<std::uint64_t, kCounterCount>, kPurposeCount> by_purpose{};
  std::array<std::uint64_t, kCounterCount> totals{};

  std::uint64_t count(Counter c) const { return totals[static_cast<std::size_t>(c)]; }
  std::uint64_t count(Purpose p, Counter c) const {
    return by_purpose[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)];
  }

  /// Purpose-tagged counts sum to the untagged totals.
  bool conserved() const {
    for (std::size_t c = 0; c < kCounterCount; ++c) {
      std::uint64_t sum = 0;
      for (std::size_t p = 0; p < kPurposeCount; ++p) sum += by_purpose[p][c];
      if (sum != totals[c]) return false;
    }
    return true;
  }

  friend LedgerSnapshot operator-(const LedgerSnapshot& a, const LedgerSnapshot& b) {
    LedgerSnapshot d;
    for (std::size_t c = 0; c < kCounterCount; ++c) {
      d.totals[c] = a.totals[c] - b.totals[c];
      for (std::size_t p = 0; p < kPurposeCount; ++p) {
        d.by_purpose[p][c] = a.by_purpose[p][c] - b.by_purpose[p][c];
      }
    }
    return d;
  }

  friend bool operator==(const LedgerSnapshot&, const LedgerSnapshot&) = default;
};

/// Thread-safe solve counters, tagged by purpose. Counts never decrease.
class SolveLedger {
 public:
  SolveLedger() = default;
  SolveLedger(const SolveLedger&) = delete;
  SolveLedger& operator=(const SolveLedger&) = delete;

  void record(Purpose p, Counter c, std::uint64_t n = 1) {
    by_purpose_[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)].fetch_add(
        n, std::memory_order_relaxed);
    totals_[static_cast<std::size_t>(c)].fetch_add(n, std::memory_order_relaxed);
  }

  std::uint64_t count(Counter c) const {
    return totals_[static_cast<std::size_t>(c)].load(std::memory_order_relaxed);
  }
  std::uint64_t count(Purpose p, Counter c) const {
    return by_purpose_[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)].load(
        std::memory_order_relaxed);
  }

  LedgerSnapshot snapshot() const {
    LedgerSnapshot s;
    for (std::size_t c = 0; c < kCounterCount; ++c) {
      s.totals[c] = totals_[c].load(std::memory_order_relaxed);
      for (std::size_t p = 0; p < kPurposeCount; ++p) {
        s.by_purpose[p][c] = by_purpose_[p][c].load(std::memory_order_relaxed);
      }
    }
    return s;
  }

  /// Adds every count of `shard` under its own purpose.
  void merge(const LedgerSnapshot& shard) {
    for (Purpose p : kAllPurposes) {
      for (Counter c : kAllCounters) {
        if (auto n = shard.count(p, c)) record(p, c, n);
      }
    }
  }

  /// Adds every count of `shard` re-tagged as `as`.
  void merge_as(const LedgerSnapshot& shard, Purpose as) {
    for (Counter c : kAllCounters) {
      if (auto n = shard.count(c)) record(as, c, n);
    }
  }

 private:
  std::array<std::array<std::atomic<std::uint64_t>, kCounterCount>, kPurposeCount>
      by_purpose_{};
  std::array<std::atomic<std::uint64_t>, kCounterCount> totals_{};
};

}  // namespace sens2
