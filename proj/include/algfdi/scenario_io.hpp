#pragma once

#include "algfdi/sim.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace algfdi {

class ScenarioParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ScenarioParseError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void load_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ScenarioParseError(std::string("bad value for '") + key +
                               "': " + e.what());
    }
  }
}

} // namespace detail

/// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["params"] = {{"m1", s.params.m1},   {"m2", s.params.m2},
                 {"m3", s.params.m3},   {"J1", s.params.J1},
                 {"J2", s.params.J2},   {"J3", s.params.J3},
                 {"l1", s.params.l1},   {"l1s", s.params.l1s},
                 {"l2", s.params.l2},   {"l2s", s.params.l2s},
                 {"g", s.params.g}};
  j["waypoints"] = nlohmann::json::array();
  for (const auto& w : s.waypoints) {
    j["waypoints"].push_back(
        {{"t", w.t}, {"q", std::vector<double>(w.q.data(), w.q.data() + w.q.size())}});
  }
  j["lambda"] = s.lambda;
  j["ts"] = s.ts;
  j["window_samples"] = s.window_samples;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  j["order"] = s.order;
  j["product_order"] = s.product_order;
  j["delay"] = s.delay;
  j["faults"] = nlohmann::json::array();
  for (const auto& f : s.faults) {
    j["faults"].push_back({{"time", f.time}, {"amplitude", f.amplitude}});
  }
  j["disturbance"] = {{"onset", s.disturbance.onset},
                      {"offset", s.disturbance.offset},
                      {"amplitude", s.disturbance.amplitude},
                      {"frequency", s.disturbance.frequency}};
  j["noise"] = {
      {"sigma_y",
       std::vector<double>(s.sigma_y.data(), s.sigma_y.data() + s.sigma_y.size())},
      {"sigma_u",
       std::vector<double>(s.sigma_u.data(), s.sigma_u.data() + s.sigma_u.size())}};
  j["seed"] = s.seed;
  j["duration"] = s.duration;
  j["threshold"] = s.threshold;
  j["hold"] = s.hold;
  return j;
}

/// Parse a scenario from JSON. Missing keys keep the paper defaults;
/// unknown keys are rejected so typos cannot silently change a run.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::load_if;
  using detail::reject_unknown_keys;

  Scenario s;
  reject_unknown_keys(
      j,
      {"params", "waypoints", "lambda", "ts", "window_samples", "alpha",
       "beta", "order", "product_order", "delay", "faults", "disturbance",
       "noise", "seed", "duration", "threshold", "hold"},
      "scenario");

  if (j.contains("params")) {
    const auto& p = j.at("params");
    reject_unknown_keys(
        p, {"m1", "m2", "m3", "J1", "J2", "J3", "l1", "l1s", "l2", "l2s", "g"},
        "params");
    load_if(p, "m1", s.params.m1);
    load_if(p, "m2", s.params.m2);
    load_if(p, "m3", s.params.m3);
    load_if(p, "J1", s.params.J1);
    load_if(p, "J2", s.params.J2);
    load_if(p, "J3", s.params.J3);
    load_if(p, "l1", s.params.l1);
    load_if(p, "l1s", s.params.l1s);
    load_if(p, "l2", s.params.l2);
    load_if(p, "l2s", s.params.l2s);
    load_if(p, "g", s.params.g);
  }
  if (j.contains("waypoints")) {
    s.waypoints.clear();
    for (const auto& w : j.at("waypoints")) {
      reject_unknown_keys(w, {"t", "q"}, "waypoint");
      if (!w.contains("t") || !w.contains("q")) {
        throw ScenarioParseError("waypoint needs both 't' and 'q'");
      }
      std::vector<double> q;
      load_if(w, "q", q);
      if (q.size() != 3) {
        throw ScenarioParseError("waypoint 'q' must have 3 joint values");
      }
      Waypoint wp{0.0, Eigen::VectorXd(3)};
      load_if(w, "t", wp.t);
      for (int i = 0; i < 3; ++i) {
        wp.q(i) = q[static_cast<std::size_t>(i)];
      }
      s.waypoints.push_back(std::move(wp));
    }
  }
  load_if(j, "lambda", s.lambda);
  load_if(j, "ts", s.ts);
  load_if(j, "window_samples", s.window_samples);
  load_if(j, "alpha", s.alpha);
  load_if(j, "beta", s.beta);
  load_if(j, "order", s.order);
  load_if(j, "product_order", s.product_order);
  load_if(j, "delay", s.delay);
  if (j.contains("faults")) {
    s.faults.clear();
    for (const auto& f : j.at("faults")) {
      reject_unknown_keys(f, {"time", "amplitude"}, "fault");
      FaultStep step{0.0, 0.0};
      load_if(f, "time", step.time);
      load_if(f, "amplitude", step.amplitude);
      s.faults.push_back(step);
    }
  }
  if (j.contains("disturbance")) {
    const auto& d = j.at("disturbance");
    reject_unknown_keys(d, {"onset", "offset", "amplitude", "frequency"},
                        "disturbance");
    load_if(d, "onset", s.disturbance.onset);
    load_if(d, "offset", s.disturbance.offset);
    load_if(d, "amplitude", s.disturbance.amplitude);
    load_if(d, "frequency", s.disturbance.frequency);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    reject_unknown_keys(n, {"sigma_y", "sigma_u"}, "noise");
    std::vector<double> sy, su;
    load_if(n, "sigma_y", sy);
    load_if(n, "sigma_u", su);
    if (n.contains("sigma_y")) {
      if (sy.size() != 3) {
        throw ScenarioParseError("noise 'sigma_y' must have 3 values");
      }
      for (int i = 0; i < 3; ++i) {
        s.sigma_y(i) = sy[static_cast<std::size_t>(i)];
      }
    }
    if (n.contains("sigma_u")) {
      if (su.size() != 3) {
        throw ScenarioParseError("noise 'sigma_u' must have 3 values");
      }
      for (int i = 0; i < 3; ++i) {
        s.sigma_u(i) = su[static_cast<std::size_t>(i)];
      }
    }
  }
  load_if(j, "seed", s.seed);
  load_if(j, "duration", s.duration);
  load_if(j, "threshold", s.threshold);
  load_if(j, "hold", s.hold);

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(e.what());
  }
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioParseError("cannot open scenario file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioParseError("scenario file is not valid JSON: " +
                             std::string(e.what()));
  }
  return scenario_from_json(j);
}

inline void save_scenario_file(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write scenario file: " + path);
  }
  out << scenario_to_json(s).dump(2) << "\n";
}

/// Whitespace-delimited table with a fixed header row; numbers are written
/// in shortest round-trip form so the file parses back bit exactly.
inline void write_table(const RunRecord& rec, std::ostream& out) {
  const auto& names = RunRecord::column_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    out << (c ? " " : "") << names[c];
  }
  out << "\n";
  for (std::size_t r = 0; r < rec.rows(); ++r) {
    for (std::size_t c = 0; c < rec.columns.size(); ++c) {
      out << (c ? " " : "") << format_double(rec.columns[c][r]);
    }
    out << "\n";
  }
}

inline void write_table_file(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write output file: " + path);
  }
  write_table(rec, out);
}

inline RunRecord read_table(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("read_table: empty input");
  }
  std::istringstream hs(header);
  std::vector<std::string> names;
  for (std::string tok; hs >> tok;) {
    names.push_back(tok);
  }
  if (names != RunRecord::column_names()) {
    throw std::runtime_error("read_table: unexpected column header");
  }
  RunRecord rec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ls(line);
    for (std::size_t c = 0; c < rec.columns.size(); ++c) {
      double v = 0.0;
      if (!(ls >> v)) {
        throw std::runtime_error("read_table: short row");
      }
      rec.columns[c].push_back(v);
    }
  }
  return rec;
}

/// FIR weight dump: one "index weight" row per tap.
inline void write_weights(const FirFilter& filter, std::ostream& out) {
  out << "index weight\n";
  for (std::size_t j = 0; j < filter.weights.size(); ++j) {
    out << j << " " << format_double(filter.weights[j]) << "\n";
  }
}

} // namespace algfdi
