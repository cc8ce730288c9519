#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "mhd/errors.hpp"

namespace mhd {

// Shortest round-trip decimal formatting so CSV output is platform-stable.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Trim to the shortest representation that still round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw ValueError("CsvWriter: cannot open " + path);
        columns_ = header.size();
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_)
            throw ValueError("CsvWriter: expected " + std::to_string(columns_) + " cells, got " +
                             std::to_string(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
    std::size_t columns_;
};

struct MeanCi {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

double mean_of(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);
// 95% confidence interval for the mean via the t-distribution.
MeanCi mean_ci95(const std::vector<double>& xs);

}  // namespace mhd
