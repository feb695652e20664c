#pragma once

// Run configuration: an INI file of sections and key/value pairs, with
// "section.key=value" overrides applied on top.
//
//   [dataset]      series = 2            classes = E1,E2,E3
//   [coincidence]  mode = fixed|adaptive tau = 5   tau.E1 = 5   tau.E1.E2 = 15
//                  fallback_tau = 5      iei = 25 | inf
//   [weights]      E1 = 1                (by derived class name)
//   [macro]        M1 = E1+E2
//   [sequence]     S1 = E1,E2,E3         (uses coincidence.iei)
//   [analysis]     classes = S1,E1       inter = true
//   [stream]       buff_dim = 8          n_overlapped = 0   length = 400   max_acc_dim = ...
//   [output]       dir = out

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mecs/event_model.hpp"
#include "mecs/macro.hpp"
#include "mecs/streaming.hpp"

namespace mecs {

struct NamedGroup {
  std::string name;
  std::vector<std::string> members;
};

struct RunConfig {
  std::size_t n_series{0};
  ClassRegistry classes;

  TauMode mode{TauMode::FixedPerClass};
  std::optional<double> tau;
  std::map<std::string, double> class_tau;
  std::map<std::pair<std::string, std::string>, double> pair_tau;
  std::optional<double> fallback_tau;
  std::optional<std::int64_t> iei;  // nullopt = unbounded

  std::map<std::string, double> weights;
  std::vector<NamedGroup> macros;
  std::vector<NamedGroup> sequences;
  std::vector<std::string> select;
  bool inter{true};

  std::size_t buff_dim{0};
  std::size_t n_overlapped{0};
  std::size_t max_acc_dim{BufferGeometry::kDefaultMaxAccDim};
  std::optional<std::size_t> length;

  std::string output_dir;
};

namespace config_detail {

using boost::property_tree::ptree;

[[noreturn]] inline void fail(const std::string& what) { throw Error(ErrorCode::Config, what); }

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at <= s.size()) {
    const auto next = s.find(sep, at);
    auto item = trim(std::string_view(s).substr(at, next == std::string::npos ? std::string::npos : next - at));
    if (!item.empty()) out.push_back(std::move(item));
    if (next == std::string::npos) break;
    at = next + 1;
  }
  return out;
}

template <typename T>
T number(const std::string& key, const std::string& text) {
  T value{};
  const auto t = trim(text);
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || end != t.data() + t.size())
    fail("invalid number for '" + key + "': '" + text + "'");
  return value;
}

inline bool boolean(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  fail("invalid boolean for '" + key + "': '" + text + "'");
}

inline ptree::path_type key_path(const std::string& section, const std::string& key) {
  return ptree::path_type(section + '\x1f' + key, '\x1f');
}

}  // namespace config_detail

/// Parses an INI document, then applies "section.key=value" overrides.
inline RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {}) {
  using namespace config_detail;
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(std::string("config: ") + e.what());
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      fail("override must look like section.key=value: '" + o + "'");
    tree.put(key_path(trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1))), trim(o.substr(eq + 1)));
  }

  RunConfig cfg;
  std::vector<std::string> class_names;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) fail("key '" + section + "' outside of a section");
    for (const auto& [key, node] : body) {
      const std::string value = node.data();
      const std::string where = section + "." + key;
      if (section == "dataset") {
        if (key == "series") cfg.n_series = number<std::size_t>(where, value);
        else if (key == "classes") class_names = split_list(value, ',');
        else fail("unknown key '" + where + "'");
      } else if (section == "coincidence") {
        if (key == "mode") {
          if (value == "fixed" || value == "fixed_class") cfg.mode = TauMode::FixedPerClass;
          else if (value == "fixed_pair") cfg.mode = TauMode::FixedPerClassPair;
          else if (value == "adaptive") cfg.mode = TauMode::Adaptive;
          else fail("unknown coincidence mode '" + value + "'");
        } else if (key == "tau") {
          cfg.tau = number<double>(where, value);
        } else if (key.rfind("tau.", 0) == 0) {
          const auto names = split_list(key.substr(4), '.');
          if (names.size() == 1) cfg.class_tau[names[0]] = number<double>(where, value);
          else if (names.size() == 2) cfg.pair_tau[std::minmax(names[0], names[1])] = number<double>(where, value);
          else fail("malformed window key '" + where + "'");
        } else if (key == "fallback_tau") {
          cfg.fallback_tau = number<double>(where, value);
        } else if (key == "iei") {
          if (value == "inf" || value == "unbounded") cfg.iei.reset();
          else {
            cfg.iei = number<std::int64_t>(where, value);
            if (*cfg.iei <= 0) fail("iei must be positive");
          }
        } else {
          fail("unknown key '" + where + "'");
        }
      } else if (section == "weights") {
        cfg.weights[key] = number<double>(where, value);
      } else if (section == "macro") {
        cfg.macros.push_back({key, split_list(value, '+')});
      } else if (section == "sequence") {
        cfg.sequences.push_back({key, split_list(value, ',')});
      } else if (section == "analysis") {
        if (key == "classes") cfg.select = split_list(value, ',');
        else if (key == "inter") cfg.inter = boolean(where, value);
        else fail("unknown key '" + where + "'");
      } else if (section == "stream") {
        if (key == "buff_dim") cfg.buff_dim = number<std::size_t>(where, value);
        else if (key == "n_overlapped") cfg.n_overlapped = number<std::size_t>(where, value);
        else if (key == "max_acc_dim") cfg.max_acc_dim = number<std::size_t>(where, value);
        else if (key == "length") cfg.length = number<std::size_t>(where, value);
        else fail("unknown key '" + where + "'");
      } else if (section == "output") {
        if (key == "dir") cfg.output_dir = value;
        else fail("unknown key '" + where + "'");
      } else {
        fail("unknown section '" + section + "'");
      }
    }
  }
  if (class_names.empty()) fail("dataset.classes is required");
  cfg.classes = ClassRegistry(class_names);
  if (cfg.n_series < 2) fail("dataset.series must be at least 2");
  for (const auto& group : cfg.macros)
    if (group.members.empty()) fail("macro class '" + group.name + "' has no members");
  for (const auto& group : cfg.sequences)
    if (group.members.empty()) fail("sequence '" + group.name + "' has no elements");
  return cfg;
}

struct DerivedData {
  EventDataset dataset;
  ClassRegistry classes;
};

/// Applies macro classes, sequence detection and class selection. Derived
/// classes are the macro classes (or the original classes when none are
/// configured) followed by one class per sequence.
inline DerivedData derive(const EventDataset& raw, const RunConfig& cfg) {
  auto resolve = [&](const std::string& name) {
    auto id = cfg.classes.find(name);
    if (!id) throw Error(ErrorCode::Config, "unknown class '" + name + "' in config");
    return EventClassId{*id};
  };
  std::vector<EventDataset> parts;
  std::vector<std::string> names;
  if (cfg.macros.empty()) {
    parts.push_back(raw);
    names = cfg.classes.names();
  } else {
    std::vector<MacroClassSpec> specs;
    for (const auto& g : cfg.macros) {
      MacroClassSpec spec{{}, g.name};
      for (const auto& m : g.members) spec.members.push_back(resolve(m));
      specs.push_back(std::move(spec));
      names.push_back(g.name);
    }
    parts.push_back(apply_macro_classes(raw, specs));
  }
  if (!cfg.sequences.empty()) {
    std::vector<SequenceSpec> specs;
    for (const auto& g : cfg.sequences) {
      SequenceSpec spec{{}, cfg.iei, g.name};
      for (const auto& m : g.members) spec.elements.push_back(resolve(m));
      specs.push_back(std::move(spec));
      names.push_back(g.name);
    }
    parts.push_back(detect_sequences(raw, specs));
  }
  DerivedData out{concat_classes(parts), ClassRegistry(names)};
  if (!cfg.select.empty()) {
    std::vector<std::size_t> keep;
    for (const auto& name : cfg.select) {
      auto id = out.classes.find(name);
      if (!id) throw Error(ErrorCode::Config, "analysis.classes names unknown class '" + name + "'");
      keep.push_back(*id);
    }
    out.dataset = select_classes(out.dataset, keep);
    out.classes = ClassRegistry(cfg.select);
  }
  return out;
}

/// Coincidence windows resolved against the (derived) class names.
inline CoincidenceParams coincidence_params(const RunConfig& cfg, const ClassRegistry& classes) {
  CoincidenceParams p;
  try {
    if (cfg.tau) p.set_default_tau(*cfg.tau);
    for (const auto& [name, tau] : cfg.class_tau) {
      if (auto id = classes.find(name)) p.set_class_tau(*id, tau);
      else throw Error(ErrorCode::Config, "window given for unknown class '" + name + "'");
    }
    for (const auto& [names, tau] : cfg.pair_tau) {
      auto a = classes.find(names.first);
      auto b = classes.find(names.second);
      if (!a || !b)
        throw Error(ErrorCode::Config, "window given for unknown class pair '" + names.first + "." + names.second + "'");
      p.set_pair_tau(*a, *b, tau);
    }
    if (cfg.fallback_tau) p.set_fallback_tau(*cfg.fallback_tau);
    if (cfg.iei) p.set_iei(*cfg.iei);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw Error(ErrorCode::Config, e.what());
  }
  p.set_mode(cfg.mode);
  if (cfg.mode == TauMode::Adaptive && !cfg.fallback_tau && cfg.tau) p.set_fallback_tau(*cfg.tau);
  if (cfg.mode != TauMode::Adaptive) {
    // Every class pair that may be evaluated needs a window.
    for (std::size_t a = 0; a < classes.size(); ++a)
      for (std::size_t b = 0; b < classes.size(); ++b) {
        if (!cfg.inter && a != b) continue;
        try {
          (void)p.tau(a, b);
        } catch (const Error& e) {
          throw Error(ErrorCode::Config, std::string(e.what()) + " (" + classes.name(a) + "," + classes.name(b) + ")");
        }
      }
  }
  return p;
}

inline std::optional<WeightVector> weights(const RunConfig& cfg, const ClassRegistry& classes) {
  if (cfg.weights.empty()) return std::nullopt;
  WeightVector w{std::vector<double>(classes.size(), 0.0)};
  for (const auto& [name, value] : cfg.weights) {
    auto id = classes.find(name);
    if (!id) throw Error(ErrorCode::Config, "weight given for unknown class '" + name + "'");
    if (value < 0.0) throw Error(ErrorCode::Config, "weights must be non-negative");
    w.weights[*id] = value;
  }
  return w;
}

}  // namespace mecs
