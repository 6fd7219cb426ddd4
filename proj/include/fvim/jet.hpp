#pragma once

#include <cmath>

namespace fvim {

// Scalar carrying value plus first and second derivative with respect to a
// single underlying variable. Used to evaluate divergence activations and
// their derivatives from one definition, so the optimizer-side derivatives
// can never drift out of sync with the values under test.
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

inline Jet2 jet_var(double x) { return {x, 1.0, 0.0}; }
inline Jet2 jet_const(double x) { return {x, 0.0, 0.0}; }

inline Jet2 operator+(Jet2 a, Jet2 b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet2 operator-(Jet2 a, Jet2 b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet2 operator-(Jet2 a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet2 operator+(Jet2 a, double c) { return {a.v + c, a.d1, a.d2}; }
inline Jet2 operator+(double c, Jet2 a) { return a + c; }
inline Jet2 operator-(Jet2 a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet2 operator-(double c, Jet2 a) { return {c - a.v, -a.d1, -a.d2}; }
inline Jet2 operator*(Jet2 a, double c) { return {a.v * c, a.d1 * c, a.d2 * c}; }
inline Jet2 operator*(double c, Jet2 a) { return a * c; }

inline Jet2 operator*(Jet2 a, Jet2 b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

// Chain rule for f with known f(x), f'(x), f''(x).
inline Jet2 jet_chain(double f, double fp, double fpp, Jet2 x) {
    return {f, fp * x.d1, fp * x.d2 + fpp * x.d1 * x.d1};
}

inline Jet2 jet_exp(Jet2 x) {
    double e = std::exp(x.v);
    return jet_chain(e, e, e, x);
}

inline Jet2 jet_log(Jet2 x) {
    double inv = 1.0 / x.v;
    return jet_chain(std::log(x.v), inv, -inv * inv, x);
}

inline Jet2 jet_expm1(Jet2 x) {
    double e = std::exp(x.v);
    return jet_chain(std::expm1(x.v), e, e, x);
}

inline Jet2 jet_tanh(Jet2 x) {
    double t = std::tanh(x.v);
    double sech2 = 1.0 - t * t;
    return jet_chain(t, sech2, -2.0 * t * sech2, x);
}

inline double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    double e = std::exp(v);
    return e / (1.0 + e);
}

inline Jet2 jet_sigmoid(Jet2 x) {
    double s = sigmoid(x.v);
    double sp = s * (1.0 - s);
    return jet_chain(s, sp, sp * (1.0 - 2.0 * s), x);
}

// log(sigmoid(v)), evaluated without forming sigmoid(v) first.
inline Jet2 jet_log_sigmoid(Jet2 x) {
    double f = x.v < 0.0 ? x.v - std::log1p(std::exp(x.v)) : -std::log1p(std::exp(-x.v));
    double s = sigmoid(x.v);
    return jet_chain(f, 1.0 - s, -s * (1.0 - s), x);
}

// log(1 + exp(v)).
inline Jet2 jet_softplus(Jet2 x) {
    double f = x.v > 0.0 ? x.v + std::log1p(std::exp(-x.v)) : std::log1p(std::exp(x.v));
    double s = sigmoid(x.v);
    return jet_chain(f, s, s * (1.0 - s), x);
}

}  // namespace fvim
