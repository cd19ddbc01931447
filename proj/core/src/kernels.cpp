#include "objclass/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace objclass {
namespace {

void check_lengths(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("kernel arguments have different lengths (" +
                                std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
  }
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double spectral_angle(std::span<const double> u, std::span<const double> v) {
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("sam kernel: zero vector");
  const double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
  return std::acos(c);
}

double spectral_information_divergence(std::span<const double> u, std::span<const double> v) {
  double su = 0.0;
  double sv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0) || !(v[i] > 0.0)) {
      throw std::invalid_argument("sid kernel: components must be positive");
    }
    su += u[i];
    sv += v[i];
  }
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double p = u[i] / su;
    const double q = v[i] / sv;
    d += (p - q) * (std::log(p) - std::log(q));  // p log(p/q) + q log(q/p), exactly symmetric
  }
  return d;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(key + ": '" + text + "' is not a number");
  }
  return v;
}

void read_base(const std::map<std::string, std::string>& kv, const std::string& prefix, BaseKernel& k) {
  if (auto it = kv.find(prefix + ".family"); it != kv.end()) k.family = kernel_family_from_string(it->second);
  if (auto it = kv.find(prefix + ".gamma"); it != kv.end()) k.gamma = parse_double(it->first, it->second);
  if (auto it = kv.find(prefix + ".degree"); it != kv.end()) {
    const double d = parse_double(it->first, it->second);
    if (d != std::floor(d)) throw std::invalid_argument(it->first + " must be an integer");
    k.degree = static_cast<int>(d);
  }
  if (auto it = kv.find(prefix + ".coef0"); it != kv.end()) k.coef0 = parse_double(it->first, it->second);
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear: return "linear";
    case KernelFamily::Polynomial: return "polynomial";
    case KernelFamily::Rbf: return "rbf";
    case KernelFamily::Sam: return "sam";
    case KernelFamily::Sid: return "sid";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "linear") return KernelFamily::Linear;
  if (name == "polynomial" || name == "poly") return KernelFamily::Polynomial;
  if (name == "rbf") return KernelFamily::Rbf;
  if (name == "sam") return KernelFamily::Sam;
  if (name == "sid") return KernelFamily::Sid;
  throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

void BaseKernel::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("kernel gamma must be > 0");
  if (degree < 1) throw std::invalid_argument("polynomial degree must be >= 1");
  if (!std::isfinite(coef0)) throw std::invalid_argument("coef0 must be finite");
}

void KernelSpec::validate() const {
  spectral.validate();
  spatial.validate();
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("composite weight mu must be in [0, 1]");
}

double eval_base(const BaseKernel& kernel, std::span<const double> u, std::span<const double> v) {
  check_lengths(u, v);
  switch (kernel.family) {
    case KernelFamily::Linear:
      return dot(u, v);
    case KernelFamily::Polynomial:
      return std::pow(dot(u, v) + kernel.coef0, kernel.degree);
    case KernelFamily::Rbf: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - v[i]) * (u[i] - v[i]);
      return std::exp(-kernel.gamma * d2);
    }
    case KernelFamily::Sam: {
      const double theta = spectral_angle(u, v);
      return std::exp(-kernel.gamma * theta * theta);
    }
    case KernelFamily::Sid:
      return std::exp(-kernel.gamma * spectral_information_divergence(u, v));
  }
  throw std::logic_error("unhandled kernel family");
}

double eval_composite(const KernelSpec& spec, std::span<const double> p_spectral,
                      std::span<const double> p_spatial, std::span<const double> q_spectral,
                      std::span<const double> q_spatial) {
  // The boundary weights skip the unused term entirely so mu = 1 is exactly Kx.
  if (spec.mu == 1.0) return eval_base(spec.spectral, p_spectral, q_spectral);
  if (spec.mu == 0.0) return eval_base(spec.spatial, p_spatial, q_spatial);
  return spec.mu * eval_base(spec.spectral, p_spectral, q_spectral) +
         (1.0 - spec.mu) * eval_base(spec.spatial, p_spatial, q_spatial);
}

Eigen::MatrixXd gram(const KernelSpec& spec, std::span<const PixelFeatures> samples) {
  if (samples.empty()) throw std::invalid_argument("gram matrix needs at least one sample");
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double k = eval_composite(spec, samples[static_cast<std::size_t>(i)],
                                      samples[static_cast<std::size_t>(j)]);
      G(i, j) = k;
      G(j, i) = k;
    }
  }
  return G;
}

PsdReport psd_check(const Eigen::MatrixXd& G, double tol) {
  if (G.rows() != G.cols()) throw std::invalid_argument("psd_check: matrix is not square");
  if (G.rows() == 0) throw std::invalid_argument("psd_check: empty matrix");
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < G.cols(); ++j) {
      if (G(i, j) != G(j, i)) throw std::invalid_argument("psd_check: matrix is not symmetric");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("psd_check: eigen solver failed");
  const double min_eig = solver.eigenvalues().minCoeff();
  return {min_eig, min_eig >= -tol};
}

std::string to_kv_block(const KernelSpec& spec) {
  std::string out;
  auto base = [&](const std::string& prefix, const BaseKernel& k) {
    out += prefix + ".family=" + std::string(to_string(k.family)) + "\n";
    out += prefix + ".gamma=" + shortest(k.gamma) + "\n";
    out += prefix + ".degree=" + std::to_string(k.degree) + "\n";
    out += prefix + ".coef0=" + shortest(k.coef0) + "\n";
  };
  base("spectral", spec.spectral);
  base("spatial", spec.spatial);
  out += "mu=" + shortest(spec.mu) + "\n";
  return out;
}

KernelSpec kernel_spec_from_kv(const std::map<std::string, std::string>& kv) {
  KernelSpec spec;
  read_base(kv, "spectral", spec.spectral);
  read_base(kv, "spatial", spec.spatial);
  if (auto it = kv.find("mu"); it != kv.end()) spec.mu = parse_double("mu", it->second);
  spec.validate();
  return spec;
}

}  // namespace objclass
