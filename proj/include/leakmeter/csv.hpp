#pragma once

// Locale-independent CSV output: '.' decimals, 17 significant digits, LF line endings.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>

#include "leakmeter/scenario.hpp"
#include "leakmeter/stats.hpp"

namespace leakmeter::csv {

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

inline constexpr const char* kTrajectoryHeader =
    "case_id,step,kl_learning_bits,entropy_learning_bits,map_error,span30,infinite_flag\n";

inline constexpr const char* kAggregateHeader =
    "step,mean_kl,median_kl,mean_entropy,median_entropy,mean_abs_map_error,mean_span30,"
    "corr_kl_maperr,corr_entropy_maperr,corr_kl_span,corr_entropy_span\n";

/// One row per (case, step); steps are 1-based.
inline void write_trajectories(std::ostream& out, const SimulationResult& result) {
    out << kTrajectoryHeader;
    for (std::size_t c = 0; c < result.per_case.size(); ++c) {
        const auto& m = result.per_case[c];
        for (std::size_t k = 0; k < m.steps(); ++k) {
            out << c << ',' << (k + 1) << ',' << format_real(m.kl_learning[k]) << ','
                << format_real(m.entropy_learning[k]) << ',' << m.map_error[k] << ','
                << m.span30[k] << ',' << (std::isfinite(m.kl_learning[k]) ? 0 : 1) << '\n';
        }
    }
}

inline void write_aggregates(std::ostream& out, const Aggregates& a) {
    out << kAggregateHeader;
    for (std::size_t k = 0; k < a.steps(); ++k) {
        out << (k + 1) << ',' << format_real(a.mean_kl[k]) << ',' << format_real(a.median_kl[k])
            << ',' << format_real(a.mean_entropy[k]) << ',' << format_real(a.median_entropy[k])
            << ',' << format_real(a.mean_abs_map_error[k]) << ',' << format_real(a.mean_span30[k])
            << ',' << format_real(a.corr_kl_maperr[k]) << ',' << format_real(a.corr_entropy_maperr[k])
            << ',' << format_real(a.corr_kl_span[k]) << ',' << format_real(a.corr_entropy_span[k])
            << '\n';
    }
}

}  // namespace leakmeter::csv
