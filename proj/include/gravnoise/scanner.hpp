#pragma once

// (D0, D2) exclusion scans for classical-quantum gravity.
//
// Each cell gets the predicted single-mass force noise of a cube of side ell
// and is labelled against the tradeoff D0 D2 >= 1, a measured acceleration
// noise level, and a (future) threshold-level detector.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gravnoise/errors.hpp"
#include "gravnoise/models.hpp"
#include "gravnoise/units.hpp"

namespace gravnoise {

enum class Label { forbidden_tradeoff, excluded_measured, excluded_at_threshold, open };

inline const char* to_string(Label l) {
    switch (l) {
        case Label::forbidden_tradeoff: return "FORBIDDEN_TRADEOFF";
        case Label::excluded_measured: return "EXCLUDED_MEASURED";
        case Label::excluded_at_threshold: return "EXCLUDED_AT_THRESHOLD";
        case Label::open: return "OPEN";
    }
    return "?";
}

inline Label label_from_string(const std::string& s) {
    for (Label l : {Label::forbidden_tradeoff, Label::excluded_measured, Label::excluded_at_threshold,
                    Label::open})
        if (s == to_string(l)) return l;
    throw DomainError("unknown grid label '" + s + "'");
}

struct LogAxis {
    double min = 1.0;
    double max = 10.0;
    int n = 8;

    double at(int i) const {
        if (n == 1) return min;
        const double f = static_cast<double>(i) / (n - 1);
        return std::pow(10.0, std::log10(min) + f * (std::log10(max) - std::log10(min)));
    }
};

struct Detector {
    double ell = 0.046;                  // m, side of the test mass
    std::optional<double> mass;          // kg; defaults to rho_solid * ell^3
    double rho_solid = 2e4;              // kg/m^3
    double measured_asd = 1e-15;         // m/s^2/sqrt(Hz)
    double threshold_asd = 1e-18;        // m/s^2/sqrt(Hz), hypothetical threshold-level detector

    double test_mass() const { return mass ? *mass : rho_solid * ell * ell * ell; }
};

struct ScanSpec {
    LogAxis d0{1e-6, 1e12, 128};  // m^2
    LogAxis d2{1e-6, 1e18, 128};  // 1/m^2
    Detector detector;

    void validate() const {
        for (const auto* ax : {&d0, &d2}) {
            if (ax->n < 8) throw DomainError("scan resolution must be at least 8 per axis");
            detail::require_positive(ax->min, "axis min");
            detail::require_positive(ax->max, "axis max");
            if (!(ax->max > ax->min)) throw DomainError("axis max must exceed axis min");
        }
        detail::require_positive(detector.ell, "ell");
        detail::require_positive(detector.test_mass(), "test mass");
        detail::require_positive(detector.measured_asd, "measured_asd");
        detail::require_positive(detector.threshold_asd, "threshold_asd");
    }
};

struct GridCell {
    double D0 = 0.0;
    double D2 = 0.0;
    double sff = 0.0;
    Label label = Label::open;

    bool operator==(const GridCell&) const = default;
};

/// Row-major: cell (i, j) with D0 index i and D2 index j sits at i * n_d2 + j.
struct ExclusionGrid {
    int n_d0 = 0;
    int n_d2 = 0;
    std::vector<GridCell> cells;

    const GridCell& at(int i, int j) const { return cells.at(static_cast<std::size_t>(i) * n_d2 + j); }
    bool operator==(const ExclusionGrid&) const = default;
};

inline Label classify(double D0, double D2, double sff, double measured_sff, double threshold_sff) {
    if (D0 * D2 < 1.0) return Label::forbidden_tradeoff;
    if (sff > measured_sff) return Label::excluded_measured;
    if (sff > threshold_sff) return Label::excluded_at_threshold;
    return Label::open;
}

inline unsigned scan_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GRAVNOISE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

inline ExclusionGrid scan_cq(const ScanSpec& spec, unsigned threads = scan_threads()) {
    spec.validate();
    const double m = spec.detector.test_mass();
    const double ell = spec.detector.ell;
    const double measured = m * m * spec.detector.measured_asd * spec.detector.measured_asd;
    const double threshold = m * m * spec.detector.threshold_asd * spec.detector.threshold_asd;

    ExclusionGrid g;
    g.n_d0 = spec.d0.n;
    g.n_d2 = spec.d2.n;
    g.cells.resize(static_cast<std::size_t>(g.n_d0) * g.n_d2);

    // Every worker writes only its own cells, so the merge is by index.
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const int i = static_cast<int>(idx / g.n_d2);
            const int j = static_cast<int>(idx % g.n_d2);
            GridCell c;
            c.D0 = spec.d0.at(i);
            c.D2 = spec.d2.at(j);
            c.sff = cq_sff_closed(CQParams{c.D0, c.D2, ell, 0.0}, m);
            c.label = classify(c.D0, c.D2, c.sff, measured, threshold);
            g.cells[idx] = c;
        }
    };

    const std::size_t total = g.cells.size();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
    if (threads == 1) {
        work(0, total);
        return g;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (total + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk, e = std::min(total, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e] {
            try {
                work(b, e);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return g;
}

/// Analytic exclusion boundary for a given ASD level: cells excluded iff
/// D0 + 5 ell^4 D2 > level_ratio. Useful for checking the grid asymptotes.
struct ExclusionBoundary {
    double level_ratio = 0.0;  // D0 value of the D2 -> 0 asymptote
    double d2_asymptote = 0.0; // D2 value of the D0 -> 0 asymptote
    double corner_slope = 0.0; // corner lies on D0 = corner_slope * D2
};

inline ExclusionBoundary exclusion_boundary(const Detector& det, double asd) {
    const double m = det.test_mass();
    const double l = det.ell;
    const double l4 = l * l * l * l;
    const double coef = 4.0 * G_N * m * m * hbar / (15.0 * pi * l4 * l);
    ExclusionBoundary b;
    b.level_ratio = m * m * asd * asd / coef;
    b.d2_asymptote = b.level_ratio / (5.0 * l4);
    b.corner_slope = 5.0 * l4;
    return b;
}

/// For each D2 column, the index of the smallest D0 whose label is excluded at
/// least at `level` (measured counts as threshold-excluded too); -1 if none.
inline std::vector<int> boundary_indices(const ExclusionGrid& g, Label level) {
    std::vector<int> out(static_cast<std::size_t>(g.n_d2), -1);
    auto excluded = [&](Label l) {
        return l == Label::excluded_measured ||
               (level == Label::excluded_at_threshold && l == Label::excluded_at_threshold);
    };
    for (int j = 0; j < g.n_d2; ++j)
        for (int i = 0; i < g.n_d0; ++i)
            if (excluded(g.at(i, j).label)) {
                out[static_cast<std::size_t>(j)] = i;
                break;
            }
    return out;
}

// ---------------------------------------------------------------------------
// Emission

inline std::string format_sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

/// Long-format CSV. `provenance` lines are written as '#' comments first.
inline void emit_grid_csv(const ExclusionGrid& g, std::ostream& os,
                          const std::vector<std::string>& provenance = {}) {
    for (const auto& line : provenance) os << "# " << line << '\n';
    os << "D0,D2,S_FF_pred,label\n";
    for (const auto& c : g.cells)
        os << format_sci(c.D0) << ',' << format_sci(c.D2) << ',' << format_sci(c.sff) << ','
           << to_string(c.label) << '\n';
}

inline nlohmann::json grid_to_json(const ExclusionGrid& g) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : g.cells)
        cells.push_back({{"D0", c.D0}, {"D2", c.D2}, {"S_FF_pred", c.sff}, {"label", to_string(c.label)}});
    return {{"n_d0", g.n_d0}, {"n_d2", g.n_d2}, {"cells", std::move(cells)}};
}

/// Inverse of emit_grid_csv. The grid shape is recovered from the number of
/// distinct D0 values (cells are row-major in D0).
inline ExclusionGrid parse_grid_csv(std::istream& is) {
    ExclusionGrid g;
    std::string line;
    bool header = false;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "D0,D2,S_FF_pred,label") throw IoError("unexpected grid CSV header: " + line);
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string f[4];
        for (auto& s : f)
            if (!std::getline(ls, s, ',')) throw IoError("short grid CSV row at line " + std::to_string(line_no));
        GridCell c;
        try {
            c.D0 = std::stod(f[0]);
            c.D2 = std::stod(f[1]);
            c.sff = std::stod(f[2]);
        } catch (const std::exception&) {
            throw IoError("bad number in grid CSV at line " + std::to_string(line_no));
        }
        try {
            c.label = label_from_string(f[3]);
        } catch (const DomainError& e) {
            throw IoError(std::string(e.what()) + " at line " + std::to_string(line_no));
        }
        g.cells.push_back(c);
    }
    if (!header) throw IoError("grid CSV has no header");
    if (g.cells.empty()) return g;
    int n_d2 = 1;
    while (n_d2 < static_cast<int>(g.cells.size()) && g.cells[n_d2].D0 == g.cells[0].D0) ++n_d2;
    if (g.cells.size() % n_d2 != 0) throw IoError("grid CSV is not rectangular");
    g.n_d2 = n_d2;
    g.n_d0 = static_cast<int>(g.cells.size()) / n_d2;
    return g;
}

}  // namespace gravnoise
