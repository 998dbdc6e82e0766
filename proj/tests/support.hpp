#pragma once

// Generators and brute-force oracles shared by the unit and acceptance
// suites. Nothing here calls into the library's solver or metric code.

#include "fundbench/dea.hpp"
#include "fundbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

private:
    std::mt19937_64 engine_;
};

inline fundbench::dea::DeaDataset random_dataset(Rng& rng, int m, int t, int n, double lo = 0.5, double hi = 10.0) {
    fundbench::dea::DeaDataset d;
    for (int i = 0; i < m; ++i) d.input_names.push_back("x" + std::to_string(i));
    for (int r = 0; r < t; ++r) d.output_names.push_back("y" + std::to_string(r));
    d.inputs.resize(m, n);
    d.outputs.resize(t, n);
    for (int j = 0; j < n; ++j) {
        char id[16];
        std::snprintf(id, sizeof id, "d%02d", j);
        d.dmu_ids.emplace_back(id);
        for (int i = 0; i < m; ++i) d.inputs(i, j) = rng.uniform(lo, hi);
        for (int r = 0; r < t; ++r) d.outputs(r, j) = rng.uniform(lo, hi);
    }
    return d;
}

inline fundbench::dea::DeaDataset dataset_1x1(const std::vector<double>& x, const std::vector<double>& y) {
    fundbench::dea::DeaDataset d;
    d.input_names = {"x"};
    d.output_names = {"y"};
    d.inputs.resize(1, static_cast<Eigen::Index>(x.size()));
    d.outputs.resize(1, static_cast<Eigen::Index>(y.size()));
    for (std::size_t j = 0; j < x.size(); ++j) {
        d.dmu_ids.push_back(std::string(1, static_cast<char>('A' + j)));
        d.inputs(0, static_cast<Eigen::Index>(j)) = x[j];
        d.outputs(0, static_cast<Eigen::Index>(j)) = y[j];
    }
    return d;
}

/// Single-ratio CCR score: productivity over best productivity.
inline std::vector<double> productivity_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    double best = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) best = std::max(best, y[j] / x[j]);
    std::vector<double> out;
    for (std::size_t j = 0; j < x.size(); ++j) out.push_back((y[j] / x[j]) / best);
    return out;
}

/// Input-oriented VRS score for one input and one output by exhaustive search
/// over convex combinations of three DMUs on a grid with the given step
/// count. Returns the smallest x-ratio among combinations that produce at
/// least y0.
inline double vrs_grid_oracle_3(const std::vector<double>& x, const std::vector<double>& y, std::size_t j0,
                                int steps) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= steps; ++a) {
        for (int b = 0; a + b <= steps; ++b) {
            const double l0 = static_cast<double>(a) / steps;
            const double l1 = static_cast<double>(b) / steps;
            const double l2 = 1.0 - l0 - l1;
            const double yy = l0 * y[0] + l1 * y[1] + l2 * y[2];
            if (yy < y[j0] - 1e-12) continue;
            best = std::min(best, (l0 * x[0] + l1 * x[1] + l2 * x[2]) / x[j0]);
        }
    }
    return std::min(best, 1.0);
}

// ---------------------------------------------------------------------------
// Direct-formula metric oracles (population convention).

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double pop_var(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

inline double pop_cov(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - ma) * (b[k] - mb);
    return s / static_cast<double>(a.size());
}

struct OracleMetrics {
    double sharpe, sortino, beta, treynor, jensen, tracking_error, information_ratio;
};

inline OracleMetrics oracle_metrics(const std::vector<double>& rp, const std::vector<double>& rm, double rf,
                                    double mar) {
    OracleMetrics o{};
    const double mp = mean_of(rp);
    o.sharpe = (mp - rf) / std::sqrt(pop_var(rp));
    double dd = 0.0;
    for (double r : rp) {
        if (r < mar) dd += (r - mar) * (r - mar);
    }
    o.sortino = (mp - mar) / std::sqrt(dd / static_cast<double>(rp.size()));
    o.beta = pop_cov(rp, rm) / pop_var(rm);
    o.treynor = (mp - rf) / o.beta;
    o.jensen = mp - (rf + o.beta * (mean_of(rm) - rf));
    o.tracking_error = std::sqrt(std::max(0.0, pop_var(rp) - o.beta * o.beta * pop_var(rm)));
    o.information_ratio = o.jensen / o.tracking_error;
    return o;
}

inline fundbench::Date month_end(int index) {
    using namespace std::chrono;
    const year_month ym = year{2015} / January + months{index};
    return year_month_day{ym / last};
}

inline fundbench::metrics::ReturnSeries make_series(const std::string& id, const std::vector<double>& values,
                                                    int first_month = 0) {
    fundbench::metrics::ReturnSeries s;
    s.fund_id = id;
    for (std::size_t k = 0; k < values.size(); ++k) {
        s.observations.push_back({month_end(first_month + static_cast<int>(k)), values[k]});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Files

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("fundbench_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace testsupport
