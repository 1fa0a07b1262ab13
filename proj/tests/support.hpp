#pragma once

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "optomech/params.hpp"

namespace optomech::testing {

using mp = boost::multiprecision::cpp_bin_float_50;

inline PhysicalParams reference() { return load_params_file(OPTOMECH_REFERENCE_CONFIG); }

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(engine_); }
    double log_uniform(double lo_exp, double hi_exp) { return std::pow(10.0, uniform(lo_exp, hi_exp)); }

private:
    std::mt19937_64 engine_;
};

}  // namespace optomech::testing
