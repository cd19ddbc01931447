#include "objclass/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "objclass/error.hpp"

namespace objclass {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

class Reader {
 public:
  explicit Reader(const ConfigMap& map) : map_(map) {}

  const std::string* find(const std::string& key) {
    used_.insert(key);
    const auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

  template <typename T>
  void number(const std::string& key, T& out) {
    if (const auto* v = find(key)) out = parse<T>(key, *v);
  }

  template <typename T>
  static T parse(const std::string& key, const std::string& text) {
    T value{};
    const auto t = trim(text);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      throw ConfigError("config key " + key + ": '" + text + "' is not a valid number");
    }
    return value;
  }

  void path(const std::string& key, std::filesystem::path& out) {
    if (const auto* v = find(key)) out = *v;
  }

  bool flag(const std::string& key, bool fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError("config key " + key + ": expected true/false, got '" + *v + "'");
  }

  void reject_unused() const {
    for (const auto& [key, _] : map_) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  const ConfigMap& map_;
  std::set<std::string> used_;
};

}  // namespace

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    out[full] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string dump_config(const ConfigMap& config) {
  std::map<std::string, std::map<std::string, std::string>> grouped;
  for (const auto& [key, value] : config) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) grouped[""][key] = value;
    else grouped[key.substr(0, dot)][key.substr(dot + 1)] = value;
  }
  std::string out;
  for (const auto& [section, entries] : grouped) {
    if (!section.empty()) out += (out.empty() ? "" : "\n") + ("[" + section + "]\n");
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  }
  return out;
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Mahalanobis: return "mahalanobis";
    case Method::MinDistance: return "mindist";
    case Method::MaxLikelihood: return "maxlik";
    case Method::Parallelepiped: return "pipiped";
    case Method::FeatureSpace: return "fspace";
    case Method::Svm: return "svm";
    case Method::Svrf: return "svrf";
  }
  return "unknown";
}

std::string_view method_title(Method m) {
  switch (m) {
    case Method::Mahalanobis: return "Mahalanobis";
    case Method::MinDistance: return "Minimum Distance";
    case Method::MaxLikelihood: return "Maximum Likelihood";
    case Method::Parallelepiped: return "Parallelepiped";
    case Method::FeatureSpace: return "Feature Space";
    case Method::Svm: return "SVM (spectral & spatial)";
    case Method::Svrf: return "SVRF (spectral & spatial)";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) +
                    "' (expected mindist, mahalanobis, maxlik, pipiped, fspace, svm or svrf)");
}

void PipelineConfig::validate() const {
  try {
    kernel.validate();
    if (!(smo.C > 0.0)) throw std::invalid_argument("kernel.C must be > 0");
    if (!(smo.tol > 0.0)) throw std::invalid_argument("kernel.tol must be > 0");
    if (segment_threshold && !(*segment_threshold >= 0.0)) {
      throw std::invalid_argument("segmentation.threshold must be >= 0");
    }
    if (min_size < 1) throw std::invalid_argument("segmentation.min_size must be >= 1");
    SvrfParams{beta, sigma_s.value_or(1.0), neighborhood, max_sweeps}.validate();
    if (ca) ca->validate();
    if (!(parallelepiped_k > 0.0)) throw std::invalid_argument("baselines.pipiped_k must be > 0");
    if (knn_k < 1) throw std::invalid_argument("baselines.knn_k must be >= 1");
    if (train_per_class < 1) throw std::invalid_argument("run.train_per_class must be >= 1");
    ga.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

PipelineConfig pipeline_config_from_map(const ConfigMap& config) {
  PipelineConfig c;
  Reader r(config);
  r.path("paths.raster", c.paths.raster);
  r.path("paths.reference", c.paths.reference);
  r.path("paths.training", c.paths.training);
  r.path("paths.samples", c.paths.samples);
  r.path("paths.model", c.paths.model);
  r.path("paths.output", c.paths.output);

  if (const auto* v = r.find("run.method")) c.method = method_from_string(*v);
  r.number("run.seed", c.seed);
  r.number("run.train_per_class", c.train_per_class);
  c.object_majority = r.flag("run.object_majority", c.object_majority);

  // Start from the pipeline's kernel defaults and overlay whatever the file sets.
  ConfigMap kernel_kv;
  {
    std::istringstream in(to_kv_block(c.kernel));
    for (std::string line; std::getline(in, line);) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) kernel_kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  for (const char* key : {"spectral.family", "spectral.gamma", "spectral.degree", "spectral.coef0", "spatial.family",
                          "spatial.gamma", "spatial.degree", "spatial.coef0", "mu"}) {
    if (const auto* v = r.find(std::string("kernel.") + key)) kernel_kv[key] = *v;
  }
  try {
    c.kernel = kernel_spec_from_kv(kernel_kv);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[kernel] ") + e.what());
  }
  r.number("kernel.C", c.smo.C);
  r.number("kernel.tol", c.smo.tol);
  r.number("kernel.max_passes", c.smo.max_passes);

  if (const auto* v = r.find("segmentation.threshold"); v && *v != "auto") {
    c.segment_threshold = Reader::parse<double>("segmentation.threshold", *v);
  }
  r.number("segmentation.min_size", c.min_size);

  r.number("svrf.beta", c.beta);
  if (const auto* v = r.find("svrf.sigma_s"); v && *v != "auto") {
    c.sigma_s = Reader::parse<double>("svrf.sigma_s", *v);
  }
  if (const auto* v = r.find("svrf.neighborhood")) {
    const int nb = Reader::parse<int>("svrf.neighborhood", *v);
    if (nb != 4 && nb != 8) throw ConfigError("svrf.neighborhood must be 4 or 8");
    c.neighborhood = nb == 4 ? Neighborhood::Four : Neighborhood::Eight;
  }
  r.number("svrf.max_sweeps", c.max_sweeps);

  if (const auto* v = r.find("ca.rule"); v && *v != "off") {
    try {
      c.ca = parse_ca_rule(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  r.number("baselines.pipiped_k", c.parallelepiped_k);
  r.number("baselines.knn_k", c.knn_k);

  r.number("ga.population", c.ga.population);
  r.number("ga.generations", c.ga.generations);
  r.number("ga.tournament_size", c.ga.tournament_size);
  r.number("ga.crossover_prob", c.ga.crossover_prob);
  r.number("ga.mutation_prob", c.ga.mutation_prob);
  r.number("ga.elitism", c.ga.elitism);
  r.number("ga.seed", c.ga.seed);
  r.number("ga.folds", c.ga.folds);

  r.reject_unused();
  c.validate();
  return c;
}

ConfigMap to_config_map(const PipelineConfig& c) {
  ConfigMap m;
  m["paths.raster"] = c.paths.raster.string();
  m["paths.reference"] = c.paths.reference.string();
  m["paths.training"] = c.paths.training.string();
  m["paths.samples"] = c.paths.samples.string();
  m["paths.model"] = c.paths.model.string();
  m["paths.output"] = c.paths.output.string();
  m["run.method"] = std::string(method_name(c.method));
  m["run.seed"] = std::to_string(c.seed);
  m["run.train_per_class"] = std::to_string(c.train_per_class);
  m["run.object_majority"] = c.object_majority ? "true" : "false";
  for (const auto& line : [&] {
         std::vector<std::string> lines;
         std::istringstream in(to_kv_block(c.kernel));
         for (std::string l; std::getline(in, l);) lines.push_back(l);
         return lines;
       }()) {
    const auto eq = line.find('=');
    m["kernel." + line.substr(0, eq)] = line.substr(eq + 1);
  }
  m["kernel.C"] = shortest(c.smo.C);
  m["kernel.tol"] = shortest(c.smo.tol);
  m["kernel.max_passes"] = std::to_string(c.smo.max_passes);
  m["segmentation.threshold"] = c.segment_threshold ? shortest(*c.segment_threshold) : "auto";
  m["segmentation.min_size"] = std::to_string(c.min_size);
  m["svrf.beta"] = shortest(c.beta);
  m["svrf.sigma_s"] = c.sigma_s ? shortest(*c.sigma_s) : "auto";
  m["svrf.neighborhood"] = c.neighborhood == Neighborhood::Four ? "4" : "8";
  m["svrf.max_sweeps"] = std::to_string(c.max_sweeps);
  m["ca.rule"] = c.ca ? std::to_string(c.ca->majority_threshold) + "," + shortest(c.ca->confidence_ceiling) + "," +
                            std::to_string(c.ca->steps)
                      : "off";
  m["baselines.pipiped_k"] = shortest(c.parallelepiped_k);
  m["baselines.knn_k"] = std::to_string(c.knn_k);
  m["ga.population"] = std::to_string(c.ga.population);
  m["ga.generations"] = std::to_string(c.ga.generations);
  m["ga.tournament_size"] = std::to_string(c.ga.tournament_size);
  m["ga.crossover_prob"] = shortest(c.ga.crossover_prob);
  m["ga.mutation_prob"] = shortest(c.ga.mutation_prob);
  m["ga.elitism"] = std::to_string(c.ga.elitism);
  m["ga.seed"] = std::to_string(c.ga.seed);
  m["ga.folds"] = std::to_string(c.ga.folds);
  return m;
}

}  // namespace objclass
