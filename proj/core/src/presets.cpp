#include "hetbandit/presets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetbandit/rng.hpp"

namespace hetbandit {

namespace {

struct PresetName {
  Preset preset;
  const char* name;
};

constexpr PresetName kPresetNames[] = {
    {Preset::IntroKappa, "intro"},       {Preset::VarEstCompare, "varest"},
    {Preset::Example1, "example1"},      {Preset::Example2, "example2"},
    {Preset::MultivariateTest, "multivariate"}, {Preset::Custom, "custom"},
};

Vector basis(int d, int i) {
  Vector e = Vector::Zero(d);
  e(i) = 1.0;
  return e;
}

Matrix stack(const std::vector<Vector>& rows) {
  Matrix out(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = rows[i].transpose();
  return out;
}

Vector unit_sphere_point(CounterRng& rng, int d) {
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

}  // namespace

Preset parse_preset(std::string_view name) {
  for (const auto& entry : kPresetNames)
    if (name == entry.name) return entry.preset;
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
}

const char* to_string(Preset preset) noexcept {
  for (const auto& entry : kPresetNames)
    if (entry.preset == preset) return entry.name;
  return "unknown";
}

HeteroInstance intro_instance(double kappa) {
  if (!(kappa >= 1.0) || !std::isfinite(kappa))
    throw Error(ErrorCode::InvalidArgument, "kappa must be at least 1");
  const double c = std::cos(0.5), s = std::sin(0.5);
  Matrix arms(3, 2);
  arms << 1.0, 0.0, 0.0, 1.0, c, s;
  // Most negative covariance that keeps x3's variance at or above x1's.
  const double cov = std::max(-std::sqrt(kappa), (1.0 - c * c - s * s * kappa) / (2.0 * c * s));
  Matrix sigma(2, 2);
  sigma << 1.0, cov, cov, kappa;
  return HeteroInstance(arms, arms, basis(2, 0), sigma, 1.0, kappa);
}

HeteroInstance example1_instance(int d, double omega, double q) {
  if (d < 4) throw Error(ErrorCode::InvalidArgument, "example 1 needs d >= 4");
  std::vector<Vector> rows{basis(d, 0), basis(d, 1)};
  for (int i = 2; i < d; ++i) rows.push_back(q * basis(d, i));
  for (int i = 1; i < d; ++i)
    rows.push_back(std::cos(omega) * basis(d, 0) + std::sin(omega) * basis(d, i));
  const Vector half = 0.5 * (basis(d, 0) + basis(d, 1));
  rows.push_back(half + 0.1 * basis(d, 2));
  rows.push_back(half + 0.1 * (basis(d, 2) + basis(d, 3)));
  const Matrix arms = stack(rows);
  return HeteroInstance::with_tight_bounds(arms, arms, basis(d, 0), Matrix::Identity(d, d));
}

HeteroInstance example2_instance(int d, double omega, double alpha_sq, double beta_sq) {
  if (d < 3) throw Error(ErrorCode::InvalidArgument, "example 2 needs d >= 3");
  std::vector<Vector> rows{basis(d, 0),
                           std::cos(omega) * basis(d, 0) + std::sin(omega) * basis(d, 1)};
  for (int i = 2; i < d; ++i) rows.push_back(basis(d, i));
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) rows.push_back(r * (basis(d, i) + basis(d, j)));
  const Matrix arms = stack(rows);
  Vector diag = Vector::Constant(d, alpha_sq);
  diag(1) = beta_sq;
  diag(2) = beta_sq;
  return HeteroInstance::with_tight_bounds(arms, arms, basis(d, 0), diag.asDiagonal());
}

Vector multivariate_layout(int a1, int a2, int a3) {
  Vector x(7);
  x << 1.0, a1, a2, a3, a1 * a2, a1 * a3, a2 * a3;
  return x;
}

HeteroInstance multivariate_instance() {
  std::vector<Vector> rows;
  for (int code = 0; code < 8; ++code)
    rows.push_back(multivariate_layout((code >> 2) & 1, (code >> 1) & 1, code & 1));
  const Matrix arms = stack(rows);
  Vector diag = Vector::Constant(7, 1e-3);
  diag(0) = 0.3;
  diag(1) = 0.7;
  Vector theta(7);
  theta << 0.0, 0.01, 0.015, 0.02, -0.1, -0.1, -0.1;
  return HeteroInstance::with_tight_bounds(arms, arms, theta, diag.asDiagonal());
}

HeteroInstance varest_instance(int d, int n_unit, int n_small, std::uint64_t seed) {
  if (d < 1 || n_unit < 0 || n_small < 0 || n_unit + n_small < 1)
    throw Error(ErrorCode::InvalidArgument, "variance preset needs d >= 1 and some arms");
  CounterRng rng(seed, 0, 0x5EED);
  std::vector<Vector> rows;
  for (int i = 0; i < n_unit; ++i) rows.push_back(unit_sphere_point(rng, d));
  for (int i = 0; i < n_small; ++i) rows.push_back(0.1 * unit_sphere_point(rng, d));
  const Matrix arms = stack(rows);
  Vector diag(d);
  for (int i = 0; i < d; ++i) diag(i) = i % 2 == 0 ? 1.0 : 0.1;
  return HeteroInstance::with_tight_bounds(arms, arms, Vector::Ones(d), diag.asDiagonal());
}

}  // namespace hetbandit
