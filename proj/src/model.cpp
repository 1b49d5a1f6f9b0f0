#include "glrom/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace glrom {

ChannelLayout ChannelLayout::standard() {
  ChannelLayout layout;
  constexpr double half_width = 0.015;
  for (double yc : {0.22, 0.52, 0.82}) {
    layout.strips.push_back({0.05, 0.95, yc - half_width, yc + half_width});
  }
  // Short inclusions between the long channels.
  layout.strips.push_back({0.15, 0.35, 0.355, 0.385});
  layout.strips.push_back({0.60, 0.85, 0.345, 0.375});
  layout.strips.push_back({0.25, 0.45, 0.655, 0.685});
  layout.strips.push_back({0.55, 0.70, 0.075, 0.105});
  return layout;
}

PermeabilityField channel_permeability(const FineMesh& mesh, double eta,
                                       const ChannelLayout& layout) {
  if (!(eta >= 1.0)) {
    throw InvalidArgument("channel contrast eta must be >= 1");
  }
  for (const Strip& s : layout.strips) {
    if (s.x0 < 0.0 || s.x1 > 1.0 || s.y0 < 0.0 || s.y1 > 1.0 || s.x0 >= s.x1 || s.y0 >= s.y1) {
      throw InvalidArgument("channel strip lies outside the unit square or is empty");
    }
  }
  PermeabilityField field;
  field.kappa_min = 1.0;
  field.kappa_max = eta;
  field.values.assign(mesh.triangle_count(), 1.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    Point c = mesh.centroid(t);
    if (layout.rotated) {
      std::swap(c.x, c.y);
    }
    for (const Strip& s : layout.strips) {
      if (c.x >= s.x0 && c.x <= s.x1 && c.y >= s.y0 && c.y <= s.y1) {
        field.values[t] = eta;
        break;
      }
    }
  }
  return field;
}

PermeabilityField load_permeability_csv(const std::filesystem::path& path, const FineMesh& mesh) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open permeability file " + path.string());
  }
  PermeabilityField field;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto comma = line.rfind(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    double v = 0.0;
    std::istringstream ss(cell);
    if (!(ss >> v)) {
      continue;  // header row
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("permeability values must be positive and finite");
    }
    field.values.push_back(v);
  }
  if (static_cast<int>(field.values.size()) != mesh.triangle_count()) {
    throw InvalidArgument("permeability file has " + std::to_string(field.values.size()) +
                          " values, mesh has " + std::to_string(mesh.triangle_count()) +
                          " triangles");
  }
  const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
  field.kappa_min = *lo;
  field.kappa_max = *hi;
  return field;
}

void save_permeability_csv(const PermeabilityField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "triangle,kappa\n";
  for (size_t t = 0; t < field.values.size(); ++t) {
    out << t << ',' << field.values[t] << '\n';
  }
}

double Nonlinearity::value(double u, double mu) const {
  return std::exp(std::min(exponent(u, mu), exponent_bound));
}

double Nonlinearity::checked_value(double u, double mu) const {
  const double arg = exponent(u, mu);
  if (arg > exponent_bound) {
    throw OverflowError("nonlinearity exponent " + std::to_string(arg) + " exceeds bound " +
                        std::to_string(exponent_bound));
  }
  return std::exp(arg);
}

double source_term(Point p, SourceKind variant) {
  using std::numbers::pi;
  switch (variant) {
    case SourceKind::Sin2Pi:
      return 1.0 + std::sin(2.0 * pi * p.x) * std::sin(2.0 * pi * p.y);
    case SourceKind::Sin4Pi:
      return 1.0 + std::sin(4.0 * pi * p.x) * std::sin(4.0 * pi * p.y);
    case SourceKind::Constant:
      break;
  }
  throw InvalidArgument("source_term: constant source has no fixed formula");
}

double Source::operator()(Point p) const {
  return kind == SourceKind::Constant ? constant : source_term(p, kind);
}

void ParameterSet::validate() const {
  if (mu_values.empty()) {
    throw InvalidArgument("parameter set needs at least one mu value");
  }
}

}  // namespace glrom
