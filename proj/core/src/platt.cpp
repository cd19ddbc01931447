#include <cmath>
#include <stdexcept>

#include "objclass/svm.hpp"

namespace objclass {
namespace {

struct Targets {
  std::vector<double> t;
};

Targets platt_targets(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw std::invalid_argument("platt_fit: length mismatch");
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw std::invalid_argument("platt_fit: non-finite decision value");
    if (labels[i] == 1) n_pos += 1.0;
    else if (labels[i] == -1) n_neg += 1.0;
    else throw std::invalid_argument("platt_fit: labels must be +1 or -1");
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw std::invalid_argument("platt_fit: both classes must be present");
  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  Targets out;
  out.t.reserve(labels.size());
  for (int y : labels) out.t.push_back(y == 1 ? hi : lo);
  return out;
}

double nll(double A, double B, std::span<const double> f, const std::vector<double>& t) {
  double value = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double z = f[i] * A + B;
    value += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
  }
  return value;
}

}  // namespace

double PlattParams::probability(double g) const {
  const double z = A * g + B;
  return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

double platt_nll(const PlattParams& params, std::span<const double> decision_values,
                 std::span<const int> labels) {
  const auto targets = platt_targets(decision_values, labels);
  return nll(params.A, params.B, decision_values, targets.t);
}

PlattParams platt_fit(std::span<const double> decision_values, std::span<const int> labels) {
  const auto targets = platt_targets(decision_values, labels);
  const auto& t = targets.t;
  const auto f = decision_values;

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;  // keeps the Hessian invertible
  constexpr double kGradTol = 1e-8;

  double n_pos = 0.0;
  for (int y : labels) n_pos += y == 1 ? 1.0 : 0.0;
  const double n_neg = static_cast<double>(labels.size()) - n_pos;

  double A = 0.0;
  double B = std::log((n_neg + 1.0) / (n_pos + 1.0));
  double fval = nll(A, B, f, t);

  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma;
    double h22 = kSigma;
    double h21 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * A + B;
      double p;
      double q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::hypot(g1, g2) < kGradTol) break;

    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;

    double step = 1.0;
    while (step >= kMinStep) {
      const double newA = A + step * dA;
      const double newB = B + step * dB;
      const double newf = nll(newA, newB, f, t);
      if (newf < fval + 1e-4 * step * gd) {
        A = newA;
        B = newB;
        fval = newf;
        break;
      }
      step *= 0.5;
    }
    if (step < kMinStep) break;  // line search failed; keep the current point
  }
  return {A, B};
}

}  // namespace objclass
