#pragma once

#include <cmath>
#include <cstdint>

namespace pe {

inline constexpr double kLn2 = 0.693147180559945309417232121458176568;
inline constexpr double kLog2e = 1.44269504088896340735992468100189214;
inline constexpr double kE = 2.71828182845904523536028747135266250;
inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Neumaier compensated summation.
class Sum {
public:
    void add(long double x) {
        long double t = s_ + x;
        if (std::fabs(s_) >= std::fabs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    Sum& operator+=(long double x) { add(x); return *this; }
    long double value() const { return s_ + c_; }

private:
    long double s_ = 0.0L;
    long double c_ = 0.0L;
};

inline double log2_factorial(double m) {
    if (m < 2.0) return 0.0;
    return std::lgamma(m + 1.0) * kLog2e;
}

// log2 of m!/(m-j)!
inline double log2_falling(double m, double j) {
    return log2_factorial(m) - log2_factorial(m - j);
}

inline double log2_binomial(double a, double b) {
    return log2_factorial(a) - log2_factorial(b) - log2_factorial(a - b);
}

// -p log2 p with 0 log 0 = 0.
inline double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

// (1-theta)^n without underflow-prone pow.
inline double pow_absent(double theta, double n) {
    if (theta >= 1.0) return 0.0;
    return std::exp(n * std::log1p(-theta));
}
inline double prob_present(double theta, double n) {
    if (theta >= 1.0) return 1.0;
    return -std::expm1(n * std::log1p(-theta));
}

// floor() that forgives rounding noise just below an integer.
inline double robust_floor(double x) {
    double r = std::round(x);
    if (std::fabs(x - r) <= 1e-9 * (1.0 + std::fabs(x))) return r;
    return std::floor(x);
}

}  // namespace pe
