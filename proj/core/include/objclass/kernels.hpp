#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "objclass/raster.hpp"

namespace objclass {

enum class KernelFamily { Linear, Polynomial, Rbf, Sam, Sid };

std::string_view to_string(KernelFamily family);
/// Throws std::invalid_argument for an unknown name.
KernelFamily kernel_family_from_string(std::string_view name);

/// One kernel with its parameters. gamma is the width for rbf, sam and sid;
/// degree and coef0 apply to the polynomial family.
struct BaseKernel {
  KernelFamily family = KernelFamily::Rbf;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 1.0;

  void validate() const;
  friend bool operator==(const BaseKernel&, const BaseKernel&) = default;
};

/// Composite kernel K = mu * Kx(spectral) + (1 - mu) * Ky(spatial).
struct KernelSpec {
  BaseKernel spectral;
  BaseKernel spatial;
  double mu = 1.0;

  void validate() const;
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// linear:      u.v
/// polynomial:  (u.v + coef0)^degree
/// rbf:         exp(-gamma |u - v|^2)
/// sam:         exp(-gamma theta^2), theta the angle between u and v
/// sid:         exp(-gamma SID), SID the symmetric KL divergence of u/sum(u) and v/sum(v)
///
/// Throws std::invalid_argument on a length mismatch, a zero vector under
/// sam, or a non-positive component under sid.
double eval_base(const BaseKernel& kernel, std::span<const double> u, std::span<const double> v);

double eval_composite(const KernelSpec& spec, std::span<const double> p_spectral,
                      std::span<const double> p_spatial, std::span<const double> q_spectral,
                      std::span<const double> q_spatial);

inline double eval_composite(const KernelSpec& spec, const PixelFeatures& p, const PixelFeatures& q) {
  return eval_composite(spec, p.spectral, p.spatial, q.spectral, q.spatial);
}

/// Symmetric Gram matrix. The upper triangle is evaluated and mirrored, so
/// G == G^T bitwise.
Eigen::MatrixXd gram(const KernelSpec& spec, std::span<const PixelFeatures> samples);

struct PsdReport {
  double min_eigenvalue;
  bool passes;
};

/// Smallest eigenvalue of a symmetric matrix; passes iff it is >= -tol.
/// Throws std::invalid_argument if G is not exactly symmetric.
PsdReport psd_check(const Eigen::MatrixXd& G, double tol);

/// key=value lines: spectral.family, spectral.gamma, spectral.degree,
/// spectral.coef0, the same four for spatial.*, and mu. Doubles are written in
/// shortest round-trip form.
std::string to_kv_block(const KernelSpec& spec);
/// Reads the keys written by to_kv_block. Missing keys keep their defaults.
KernelSpec kernel_spec_from_kv(const std::map<std::string, std::string>& kv);

}  // namespace objclass
