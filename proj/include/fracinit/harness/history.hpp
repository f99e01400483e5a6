#pragma once

// Output-dependent history design: the pre-initial segment is made of
// back-to-back copies of the first measured output cycle.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracinit/signal.hpp"

namespace fracinit::harness {

enum class HistoryMode { zero, duplicate_cycles, file };

inline HistoryMode parse_history_mode(const std::string& s) {
    if (s == "zero") return HistoryMode::zero;
    if (s == "duplicate" || s == "duplicate-cycles") return HistoryMode::duplicate_cycles;
    if (s == "file") return HistoryMode::file;
    throw std::invalid_argument("unknown history mode '" + s + "'");
}

struct HistorySpec {
    HistoryMode mode = HistoryMode::zero;
    std::size_t n_cycles = 0;      ///< N_C
    std::size_t cycle_length = 1;  ///< L, in samples
    std::string file;

    std::size_t history_length() const { return mode == HistoryMode::file ? 0 : n_cycles * cycle_length; }

    /// Duplicate mode needs L >= 1 and K a whole number of cycles.
    void validate(std::size_t record_length) const {
        if (mode != HistoryMode::duplicate_cycles) return;
        if (cycle_length == 0) throw std::invalid_argument("HistorySpec: cycle length must be at least 1");
        if (record_length % cycle_length != 0) {
            throw std::invalid_argument("HistorySpec: record length " + std::to_string(record_length) +
                                        " is not a whole number of cycles of " + std::to_string(cycle_length));
        }
    }
};

inline HistorySegment build_duplicate_history(std::span<const double> y, std::size_t cycle_length,
                                              std::size_t n_cycles) {
    if (cycle_length > y.size()) {
        throw std::invalid_argument("build_duplicate_history: cycle length exceeds the record");
    }
    std::vector<double> out;
    out.reserve(cycle_length * n_cycles);
    for (std::size_t c = 0; c < n_cycles; ++c) out.insert(out.end(), y.begin(), y.begin() + cycle_length);
    return HistorySegment(std::move(out));
}

inline HistorySegment build_duplicate_history(const SampledSignal& y, std::size_t cycle_length,
                                              std::size_t n_cycles) {
    return build_duplicate_history(y.values(), cycle_length, n_cycles);
}

}  // namespace fracinit::harness
