#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mallows/error.hpp"
#include "mallows/harness.hpp"

namespace mallows::config {

using nlohmann::json;

/// Collects every schema violation so a bad config is reported in one go.
class Issues {
 public:
  void add(const std::string& path, const std::string& message) { items_.push_back(path + ": " + message); }
  bool empty() const noexcept { return items_.empty(); }
  const std::vector<std::string>& items() const noexcept { return items_; }

  [[noreturn]] void raise() const {
    std::string text;
    for (const auto& item : items_) text += "\n  " + item;
    fail(Errc::config, std::to_string(items_.size()) + " schema violation(s):" + text);
  }

 private:
  std::vector<std::string> items_;
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known,
                           Issues& issues) {
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) issues.add(join(path, key), "unknown field");
  }
}

inline std::optional<double> number(const json& j, const std::string& key, const std::string& path, Issues& issues,
                                    std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) issues.add(join(path, key), "required number missing");
    return fallback;
  }
  if (!j[key].is_number()) {
    issues.add(join(path, key), "must be a number");
    return fallback;
  }
  return j[key].get<double>();
}

inline std::optional<std::uint64_t> count(const json& j, const std::string& key, const std::string& path,
                                          Issues& issues, std::optional<std::uint64_t> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) issues.add(join(path, key), "required integer missing");
    return fallback;
  }
  if (!j[key].is_number_unsigned()) {
    issues.add(join(path, key), "must be a nonnegative integer");
    return fallback;
  }
  return j[key].get<std::uint64_t>();
}

template <class T>
std::vector<T> array_of(const json& j, const std::string& key, const std::string& path, Issues& issues,
                        bool required) {
  std::vector<T> out;
  if (!j.contains(key)) {
    if (required) issues.add(join(path, key), "required array missing");
    return out;
  }
  if (!j[key].is_array()) {
    issues.add(join(path, key), "must be an array");
    return out;
  }
  for (std::size_t k = 0; k < j[key].size(); ++k) {
    const auto& e = j[key][k];
    const auto where = join(path, key) + "[" + std::to_string(k) + "]";
    if constexpr (std::is_same_v<T, double>) {
      if (!e.is_number()) {
        issues.add(where, "must be a number");
        continue;
      }
      out.push_back(e.get<double>());
    } else {
      if (!e.is_number_unsigned() || e.get<std::uint64_t>() == 0) {
        issues.add(where, "must be a positive integer");
        continue;
      }
      out.push_back(static_cast<T>(e.get<std::uint64_t>()));
    }
  }
  return out;
}

/// Runs a library validator, recording its failure as an issue.
template <class Check>
bool guard(Issues& issues, const std::string& path, Check&& check) {
  try {
    check();
    return true;
  } catch (const Error& e) {
    issues.add(path, e.what());
    return false;
  }
}

}  // namespace detail

/// [[location, probability], ...] with strictly increasing locations.
inline std::optional<DiscreteLaw> parse_discrete(const json& j, const std::string& path, Issues& issues) {
  if (!j.is_array()) {
    issues.add(path, "must be an array of [location, probability] pairs");
    return std::nullopt;
  }
  std::vector<Atom> atoms;
  bool ok = true;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto& a = j[k];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      issues.add(path + "[" + std::to_string(k) + "]", "must be [location, probability]");
      ok = false;
      continue;
    }
    atoms.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  if (!ok) return std::nullopt;
  std::optional<DiscreteLaw> law;
  detail::guard(issues, path, [&] { law.emplace(std::move(atoms)); });
  return law;
}

inline std::optional<StableParams> parse_stable(const json& j, const std::string& path, Issues& issues,
                                                std::optional<double> alpha) {
  if (!j.is_object()) {
    issues.add(path, "must be an object");
    return std::nullopt;
  }
  detail::reject_unknown(j, path, {"alpha", "sigma", "beta", "mu"}, issues);
  StableParams p;
  const auto a = detail::number(j, "alpha", path, issues, alpha);
  p.sigma = detail::number(j, "sigma", path, issues, 1.0).value_or(1.0);
  p.beta = detail::number(j, "beta", path, issues, 0.0).value_or(0.0);
  p.mu = detail::number(j, "mu", path, issues, 0.0).value_or(0.0);
  if (!a) return std::nullopt;
  p.alpha = *a;
  if (!detail::guard(issues, path, [&] { validate(p); })) return std::nullopt;
  return p;
}

inline std::optional<NoiseLaw> parse_noise(const json& j, const std::string& path, Issues& issues) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    issues.add(path, "must be an object with a string \"type\"");
    return std::nullopt;
  }
  const auto type = j["type"].get<std::string>();
  std::optional<NoiseLaw> law;
  if (type == "point") {
    detail::reject_unknown(j, path, {"type", "value"}, issues);
    if (auto v = detail::number(j, "value", path, issues, 0.0)) law = PointMass{*v};
  } else if (type == "uniform") {
    detail::reject_unknown(j, path, {"type", "lo", "hi"}, issues);
    const auto lo = detail::number(j, "lo", path, issues);
    const auto hi = detail::number(j, "hi", path, issues);
    if (lo && hi) law = UniformNoise{*lo, *hi};
  } else if (type == "pareto") {
    detail::reject_unknown(j, path, {"type", "scale", "tail_index", "p_positive"}, issues);
    const auto scale = detail::number(j, "scale", path, issues, 1.0);
    const auto tail = detail::number(j, "tail_index", path, issues);
    const auto pp = detail::number(j, "p_positive", path, issues, 0.5);
    if (scale && tail && pp) law = TwoSidedPareto{*scale, *tail, *pp};
  } else if (type == "discrete") {
    detail::reject_unknown(j, path, {"type", "atoms"}, issues);
    if (!j.contains("atoms")) {
      issues.add(path + ".atoms", "required array missing");
    } else if (auto d = parse_discrete(j["atoms"], path + ".atoms", issues)) {
      law = *d;
    }
  } else if (type == "stable") {
    json rest = j;
    rest.erase("type");
    if (auto s = parse_stable(rest, path, issues, std::nullopt)) law = *s;
  } else {
    issues.add(path + ".type", "unknown noise type \"" + type + "\" (point|uniform|pareto|discrete|stable)");
  }
  if (law && !detail::guard(issues, path, [&] { validate(*law); })) law.reset();
  return law;
}

inline std::optional<PairModel> parse_model(const json& j, const std::string& path, Issues& issues) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    issues.add(path, "must be an object with a string \"type\"");
    return std::nullopt;
  }
  const auto type = j["type"].get<std::string>();
  if (type == "additive_noise") {
    detail::reject_unknown(j, path, {"type", "noise", "index_exponent"}, issues);
    const auto exponent = detail::number(j, "index_exponent", path, issues, 0.0);
    if (!j.contains("noise")) {
      issues.add(path + ".noise", "required object missing");
      return std::nullopt;
    }
    auto noise = parse_noise(j["noise"], path + ".noise", issues);
    if (!noise || !exponent) return std::nullopt;
    return AdditiveNoise{*noise, *exponent};
  }
  if (type == "comonotone") {
    detail::reject_unknown(j, path, {"type", "scale", "shift"}, issues);
    const auto scale = detail::number(j, "scale", path, issues, 1.0);
    const auto shift = detail::number(j, "shift", path, issues, 0.0);
    if (scale && *scale < 0.0) issues.add(path + ".scale", "must be nonnegative");
    if (!scale || !shift || *scale < 0.0) return std::nullopt;
    return Comonotone{*scale, *shift};
  }
  if (type == "custom") {
    detail::reject_unknown(j, path, {"type", "laws"}, issues);
    if (!j.contains("laws") || !j["laws"].is_array() || j["laws"].empty()) {
      issues.add(path + ".laws", "required nonempty array of discrete laws");
      return std::nullopt;
    }
    CustomGaps custom;
    bool ok = true;
    for (std::size_t k = 0; k < j["laws"].size(); ++k) {
      auto law = parse_discrete(j["laws"][k], path + ".laws[" + std::to_string(k) + "]", issues);
      if (law) {
        custom.laws.push_back(*law);
      } else {
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return custom;
  }
  issues.add(path + ".type", "unknown model type \"" + type + "\" (additive_noise|comonotone|custom)");
  return std::nullopt;
}

inline ExperimentConfig parse_experiment(const json& input) {
  // A run manifest carries the resolved config under "config".
  const json& j = (input.is_object() && input.contains("config") && input.contains("tool_version"))
                      ? input["config"]
                      : input;
  Issues issues;
  if (!j.is_object()) {
    issues.add("<root>", "config must be a JSON object");
    issues.raise();
  }
  detail::reject_unknown(j, "",
                         {"alpha", "stable", "model", "n_ladder", "b_grid", "b", "bn_grid", "replicates",
                          "samples_per_distance", "prepass_replicates", "lindeberg_mode", "reference", "seed",
                          "threads"},
                         issues);
  ExperimentConfig c;
  const auto alpha = detail::number(j, "alpha", "", issues);
  if (alpha) {
    const json stable = j.contains("stable") ? j["stable"] : json::object();
    if (stable.is_object() && stable.contains("alpha")) issues.add("stable.alpha", "set alpha at the top level");
    json with_alpha = stable;
    if (with_alpha.is_object()) with_alpha.erase("alpha");
    if (auto s = parse_stable(with_alpha, "stable", issues, alpha)) c.stable = *s;
  }
  if (!j.contains("model")) {
    issues.add("model", "required object missing");
  } else if (auto m = parse_model(j["model"], "model", issues)) {
    c.model = *m;
  }
  c.n_ladder = detail::array_of<std::size_t>(j, "n_ladder", "", issues, true);
  for (std::size_t k = 1; k < c.n_ladder.size(); ++k) {
    if (c.n_ladder[k - 1] >= c.n_ladder[k]) issues.add("n_ladder", "must be strictly increasing");
  }
  if (j.contains("n_ladder") && c.n_ladder.empty()) issues.add("n_ladder", "must not be empty");
  if (j.contains("b_grid")) {
    c.b_grid = detail::array_of<double>(j, "b_grid", "", issues, false);
    if (c.b_grid.empty()) issues.add("b_grid", "must not be empty");
  }
  for (std::size_t k = 0; k < c.b_grid.size(); ++k) {
    if (!(c.b_grid[k] > 0.0)) issues.add("b_grid[" + std::to_string(k) + "]", "must be positive");
  }
  c.b = detail::number(j, "b", "", issues, 1.0).value_or(1.0);
  if (!(c.b > 0.0)) issues.add("b", "must be positive");
  c.bn_grid = detail::array_of<double>(j, "bn_grid", "", issues, false);
  for (std::size_t k = 0; k < c.bn_grid.size(); ++k) {
    if (!(c.bn_grid[k] > 0.0)) issues.add("bn_grid[" + std::to_string(k) + "]", "must be positive");
    if (k > 0 && !(c.bn_grid[k] < c.bn_grid[k - 1])) issues.add("bn_grid", "must be strictly decreasing");
  }
  c.replicates = detail::count(j, "replicates", "", issues, 5).value_or(5);
  if (c.replicates < 5) issues.add("replicates", "median-of-means needs at least 5 blocks");
  c.samples_per_distance = detail::count(j, "samples_per_distance", "", issues, 1000).value_or(1000);
  if (c.samples_per_distance < 1) issues.add("samples_per_distance", "must be at least 1");
  c.prepass_replicates = detail::count(j, "prepass_replicates", "", issues, 64).value_or(64);
  if (c.prepass_replicates < 2) issues.add("prepass_replicates", "must be at least 2");
  c.seed = detail::count(j, "seed", "", issues, 0).value_or(0);
  c.threads = static_cast<unsigned>(detail::count(j, "threads", "", issues, 1).value_or(1));
  if (j.contains("lindeberg_mode")) {
    const auto& m = j["lindeberg_mode"];
    if (m == "auto") c.lindeberg_mode = LindebergMode::automatic;
    else if (m == "exact") c.lindeberg_mode = LindebergMode::exact;
    else if (m == "monte_carlo") c.lindeberg_mode = LindebergMode::monte_carlo;
    else issues.add("lindeberg_mode", "must be one of auto|exact|monte_carlo");
  }
  if (j.contains("reference")) {
    const auto& r = j["reference"];
    if (r == "coupled") c.reference = ReferenceMode::coupled;
    else if (r == "independent") c.reference = ReferenceMode::independent;
    else issues.add("reference", "must be one of coupled|independent");
  }
  if (c.lindeberg_mode == LindebergMode::exact && issues.empty() && !has_exact_gaps(c.model)) {
    issues.add("lindeberg_mode", "exact mode needs a model with closed-form gap laws");
  }
  if (!issues.empty()) issues.raise();
  validate(c);
  return c;
}

// Serialization of the resolved config (every field explicit).

inline json to_json(const DiscreteLaw& law) {
  json atoms = json::array();
  for (const auto& a : law.atoms()) atoms.push_back({a.location, a.probability});
  return atoms;
}

inline json to_json(const NoiseLaw& law) {
  return std::visit(
      [](const auto& l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return {{"type", "point"}, {"value", l.value}};
        } else if constexpr (std::is_same_v<T, UniformNoise>) {
          return {{"type", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
        } else if constexpr (std::is_same_v<T, TwoSidedPareto>) {
          return {{"type", "pareto"}, {"scale", l.scale}, {"tail_index", l.tail_index}, {"p_positive", l.p_positive}};
        } else if constexpr (std::is_same_v<T, DiscreteLaw>) {
          return {{"type", "discrete"}, {"atoms", to_json(l)}};
        } else {
          return {{"type", "stable"}, {"alpha", l.alpha}, {"sigma", l.sigma}, {"beta", l.beta}, {"mu", l.mu}};
        }
      },
      law);
}

inline json to_json(const PairModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AdditiveNoise>) {
          return {{"type", "additive_noise"}, {"noise", to_json(m.noise)}, {"index_exponent", m.index_exponent}};
        } else if constexpr (std::is_same_v<T, Comonotone>) {
          return {{"type", "comonotone"}, {"scale", m.scale}, {"shift", m.shift}};
        } else {
          json laws = json::array();
          for (const auto& l : m.laws) laws.push_back(to_json(l));
          return {{"type", "custom"}, {"laws", laws}};
        }
      },
      model);
}

inline json to_json(const ExperimentConfig& c) {
  const char* mode = c.lindeberg_mode == LindebergMode::exact         ? "exact"
                     : c.lindeberg_mode == LindebergMode::monte_carlo ? "monte_carlo"
                                                                      : "auto";
  return {
      {"alpha", c.stable.alpha},
      {"stable", {{"sigma", c.stable.sigma}, {"beta", c.stable.beta}, {"mu", c.stable.mu}}},
      {"model", to_json(c.model)},
      {"n_ladder", c.n_ladder},
      {"b_grid", c.b_grid},
      {"b", c.b},
      {"bn_grid", bn_grid_of(c)},
      {"replicates", c.replicates},
      {"samples_per_distance", c.samples_per_distance},
      {"prepass_replicates", c.prepass_replicates},
      {"lindeberg_mode", mode},
      {"reference", c.reference == ReferenceMode::coupled ? "coupled" : "independent"},
      {"seed", c.seed},
      {"threads", c.threads},
  };
}

}  // namespace mallows::config
