#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmfp/errors.hpp"

namespace pmfp {

/// One Picard iterate with its instrumented quantities. `step` and `ps_step`
/// measure the distance to the *next* iterate and are absent on the last
/// entry of a trace.
struct OrbitEntry {
    std::uint64_t n = 0;
    double x = 0.0;
    double self_distance = 0.0;     // p(x_n, x_n)
    double distance_to_start = 0.0; // p(x_n, x_0)
    double step = 0.0;              // p(x_n, x_{n+1})
    double ps_step = 0.0;           // p^s(x_n, x_{n+1})
    bool has_step = false;
};

enum class Termination { converged, max_iter, error };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iter: return "max_iter";
        default: return "error";
    }
}

/// Record of a Picard iteration x, Tx, T^2 x, ...
struct OrbitTrace {
    double start = 0.0;
    std::vector<OrbitEntry> entries;
    Termination termination = Termination::max_iter;

    /// Last iterate reached; the fixed-point candidate on converged traces.
    double candidate() const {
        if (entries.empty()) throw input_error("empty orbit trace");
        return entries.back().x;
    }

    /// Number of map applications performed.
    std::uint64_t iterations() const {
        if (entries.empty()) throw input_error("empty orbit trace");
        return entries.back().n;
    }
};

/// Orbit abort: carries the partial trace accumulated before the failure.
class orbit_error : public error {
public:
    orbit_error(const std::string& msg, OrbitTrace partial)
        : error(msg), partial_(std::move(partial)) {}

    const OrbitTrace& partial_trace() const noexcept { return partial_; }

private:
    OrbitTrace partial_;
};

}  // namespace pmfp
