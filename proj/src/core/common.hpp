#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace aftrl {

using Vec = std::vector<double>;

// Error taxonomy; the C API maps these to process exit codes.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double clip(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

inline void clip_inplace(Vec& v, double lo, double hi) {
    for (double& x : v) x = clip(x, lo, hi);
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double squared_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace aftrl
