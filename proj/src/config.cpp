#include "glrom/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace glrom {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no") {
    return false;
  }
  throw InvalidArgument("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, std::string v) {
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream ss(v);
  std::vector<double> out;
  std::string item;
  while (ss >> item) {
    out.push_back(to_double(key, item));
  }
  if (out.empty()) {
    throw InvalidArgument("config: '" + key + "' is empty");
  }
  return out;
}

Source to_source(const std::string& key, const std::string& v) {
  if (v == "sin2pi") {
    return Source::sin2pi();
  }
  if (v == "sin4pi") {
    return Source::sin4pi();
  }
  if (v.rfind("const:", 0) == 0) {
    return Source::uniform(to_double(key, v.substr(6)));
  }
  throw InvalidArgument("config: '" + key + "' expects sin2pi, sin4pi or const:<c>");
}

InitialCondition to_initial(const std::string& key, const std::string& v) {
  if (v == "zero") {
    return InitialCondition::zero();
  }
  if (v == "w0") {
    return InitialCondition::scaled_w0(1.0);
  }
  if (v.rfind("w0:", 0) == 0) {
    return InitialCondition::scaled_w0(to_double(key, v.substr(3)));
  }
  throw InvalidArgument("config: '" + key + "' expects w0, w0:<scale> or zero");
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::string format_source(const Source& h) {
  switch (h.kind) {
    case SourceKind::Sin2Pi:
      return "sin2pi";
    case SourceKind::Sin4Pi:
      return "sin4pi";
    case SourceKind::Constant:
      return "const:" + format_number(h.constant);
  }
  return "sin2pi";
}

std::string format_initial(const InitialCondition& u0) {
  if (u0.kind == InitialCondition::Kind::Zero) {
    return "zero";
  }
  if (u0.kind == InitialCondition::Kind::Explicit) {
    throw InvalidArgument("config: explicit initial states cannot be written");
  }
  return "w0:" + format_number(u0.scale);
}

using Setter = std::function<void(ExperimentSpec&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"fine_cells", [](auto& s, auto& k, auto& v) { s.fine_cells = to_int(k, v); }},
      {"coarse_cells", [](auto& s, auto& k, auto& v) { s.coarse_cells = to_int(k, v); }},
      {"eta", [](auto& s, auto& k, auto& v) { s.eta = to_double(k, v); }},
      {"rotated", [](auto& s, auto& k, auto& v) { s.rotated = to_bool(k, v); }},
      {"permeability", [](auto& s, auto&, auto& v) { s.permeability_csv = v; }},
      {"nonlinearity",
       [](auto& s, auto& k, auto& v) {
         if (v == "exp") {
           s.nonlinearity = Nonlinearity::exp_mu_u();
         } else if (v == "exp_shifted") {
           s.nonlinearity = Nonlinearity::exp_mu_shifted(s.nonlinearity.shift != 0.0
                                                             ? s.nonlinearity.shift
                                                             : 0.9);
         } else {
           throw InvalidArgument("config: '" + k + "' expects exp or exp_shifted");
         }
       }},
      {"shift", [](auto& s, auto& k, auto& v) { s.nonlinearity.shift = to_double(k, v); }},
      {"mu_offline", [](auto& s, auto& k, auto& v) { s.mu_offline = to_list(k, v); }},
      {"mu_online", [](auto& s, auto& k, auto& v) { s.mu_online = to_double(k, v); }},
      {"source_offline", [](auto& s, auto& k, auto& v) { s.source_offline = to_source(k, v); }},
      {"source_online", [](auto& s, auto& k, auto& v) { s.source_online = to_source(k, v); }},
      {"u0_offline", [](auto& s, auto& k, auto& v) { s.u0_offline = to_initial(k, v); }},
      {"u0_online", [](auto& s, auto& k, auto& v) { s.u0_online = to_initial(k, v); }},
      {"offline_modes", [](auto& s, auto& k, auto& v) { s.offline_modes = to_int(k, v); }},
      {"pod_modes", [](auto& s, auto& k, auto& v) { s.pod_modes = to_int(k, v); }},
      {"local_points", [](auto& s, auto& k, auto& v) { s.local_points = to_int(k, v); }},
      {"global_points", [](auto& s, auto& k, auto& v) { s.global_points = to_int(k, v); }},
      {"dt", [](auto& s, auto& k, auto& v) { s.time.dt = to_double(k, v); }},
      {"t_final", [](auto& s, auto& k, auto& v) { s.time.t_final = to_double(k, v); }},
      {"newton_tol", [](auto& s, auto& k, auto& v) { s.time.newton_tol = to_double(k, v); }},
      {"max_newton", [](auto& s, auto& k, auto& v) { s.time.max_newton = to_int(k, v); }},
      {"steady_tol", [](auto& s, auto& k, auto& v) { s.time.steady_tol = to_double(k, v); }},
      {"stop_at_steady",
       [](auto& s, auto& k, auto& v) { s.time.stop_at_steady = to_bool(k, v); }},
      {"seed",
       [](auto& s, auto& k, auto& v) {
         std::uint64_t out = 0;
         const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
         if (ec != std::errc() || ptr != v.data() + v.size()) {
           throw InvalidArgument("config: '" + k + "' expects an unsigned integer");
         }
         s.seed = out;
       }},
      {"random_draws", [](auto& s, auto& k, auto& v) { s.random_draws = to_int(k, v); }},
      {"random_mean", [](auto& s, auto& k, auto& v) { s.random_mean = to_double(k, v); }},
      {"random_std", [](auto& s, auto& k, auto& v) { s.random_std = to_double(k, v); }},
  };
  return table;
}

}  // namespace

ExperimentSpec parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  ExperimentSpec spec;
  for (const auto& [key, value] : entries) {
    if (key == "example") {
      spec = example_spec(to_int(key, value));
    }
  }
  for (const auto& [key, value] : entries) {
    if (key == "example") {
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw InvalidArgument("config: unknown key '" + key + "'");
    }
    it->second(spec, key, value);
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot read config " + path.string());
  }
  return parse_config(in);
}

std::string format_config(const ExperimentSpec& s) {
  std::ostringstream out;
  std::string mus;
  for (double m : s.mu_offline) {
    mus += (mus.empty() ? "" : ", ") + format_number(m);
  }
  out << "example = " << s.example << '\n'
      << "fine_cells = " << s.fine_cells << '\n'
      << "coarse_cells = " << s.coarse_cells << '\n'
      << "eta = " << format_number(s.eta) << '\n'
      << "rotated = " << (s.rotated ? "true" : "false") << '\n';
  if (!s.permeability_csv.empty()) {
    out << "permeability = " << s.permeability_csv << '\n';
  }
  out << "nonlinearity = "
      << (s.nonlinearity.kind == NonlinearityKind::ExpMuU ? "exp" : "exp_shifted") << '\n'
      << "shift = " << format_number(s.nonlinearity.shift) << '\n'
      << "mu_offline = " << mus << '\n'
      << "mu_online = " << format_number(s.mu_online) << '\n'
      << "source_offline = " << format_source(s.source_offline) << '\n'
      << "source_online = " << format_source(s.source_online) << '\n'
      << "u0_offline = " << format_initial(s.u0_offline) << '\n'
      << "u0_online = " << format_initial(s.u0_online) << '\n'
      << "offline_modes = " << s.offline_modes << '\n'
      << "pod_modes = " << s.pod_modes << '\n'
      << "local_points = " << s.local_points << '\n'
      << "global_points = " << s.global_points << '\n'
      << "dt = " << format_number(s.time.dt) << '\n'
      << "t_final = " << format_number(s.time.t_final) << '\n'
      << "newton_tol = " << format_number(s.time.newton_tol) << '\n'
      << "max_newton = " << s.time.max_newton << '\n'
      << "steady_tol = " << format_number(s.time.steady_tol) << '\n'
      << "stop_at_steady = " << (s.time.stop_at_steady ? "true" : "false") << '\n'
      << "seed = " << s.seed << '\n'
      << "random_draws = " << s.random_draws << '\n'
      << "random_mean = " << format_number(s.random_mean) << '\n'
      << "random_std = " << format_number(s.random_std) << '\n';
  return out.str();
}

}  // namespace glrom
