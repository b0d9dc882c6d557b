#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace finsler {

/// Per-identity residual statistics in the published report layout.
struct VerificationReport {
    std::string identity;
    long long n_samples = 0;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    nlohmann::json to_json() const {
        return nlohmann::json{{"identity", identity},
                              {"n_samples", n_samples},
                              {"max_residual", max_residual},
                              {"mean_residual", mean_residual},
                              {"tolerance", tolerance},
                              {"pass", pass}};
    }
};

/// Fold a residual series into a report against a fixed tolerance.
inline VerificationReport summarize(std::string identity, const std::vector<double>& residuals,
                                    double tolerance) {
    VerificationReport r;
    r.identity = std::move(identity);
    r.n_samples = static_cast<long long>(residuals.size());
    r.tolerance = tolerance;
    double acc = 0.0;
    for (double v : residuals) {
        r.max_residual = std::max(r.max_residual, v);
        acc += v;
    }
    r.mean_residual = residuals.empty() ? 0.0 : acc / static_cast<double>(residuals.size());
    r.pass = !residuals.empty() && r.max_residual <= tolerance;
    return r;
}

inline bool all_pass(const std::vector<VerificationReport>& reports) {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return !reports.empty();
}

}  // namespace finsler
