#include "hjnet/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace hjnet {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& token, const std::string& where) {
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  if (token == "inf" || token == "+inf")
    return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw ConfigError("expected a number for " + where + ", got '" + token + "'");
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream iss(s);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

struct RawEntry {
  std::string section, key;
  std::vector<std::string> tokens;
  std::string value_string;
};

}  // namespace

Config parse_config(std::istream& in) {
  std::vector<RawEntry> entries;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    RawEntry entry;
    entry.section = section;
    entry.key = trim(line.substr(0, eq));
    entry.value_string = trim(line.substr(eq + 1));
    entry.tokens = split(entry.value_string);
    if (entry.key.empty() || entry.tokens.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
    entries.push_back(std::move(entry));
  }

  Config config;
  config.problem.hamiltonians.clear();
  std::map<int, HamiltonianSpec> per_branch;
  HamiltonianSpec shared;
  bool has_shared = false;

  auto one_number = [&](const RawEntry& e) {
    if (e.tokens.size() != 1)
      throw ConfigError("key " + e.section + "." + e.key + " expects one value");
    return parse_number(e.tokens[0], e.section + "." + e.key);
  };
  auto one_word = [&](const RawEntry& e) {
    if (e.tokens.size() != 1)
      throw ConfigError("key " + e.section + "." + e.key + " expects one value");
    return e.tokens[0];
  };

  for (const auto& e : entries) {
    const std::string& s = e.section;
    if (s == "junction") {
      if (e.key == "branches")
        config.problem.branches = static_cast<int>(one_number(e));
      else
        throw ConfigError("unknown key junction." + e.key);
    } else if (s == "hamiltonian" || s.rfind("hamiltonian.", 0) == 0) {
      HamiltonianSpec* spec = &shared;
      if (s != "hamiltonian") {
        const int idx = static_cast<int>(
            parse_number(s.substr(std::string("hamiltonian.").size()), s));
        spec = &per_branch[idx];
      } else {
        has_shared = true;
      }
      if (e.key == "type")
        spec->type = one_word(e);
      else if (e.key == "center")
        spec->center = one_number(e);
      else if (e.key == "offset")
        spec->offset = one_number(e);
      else
        throw ConfigError("unknown key " + s + "." + e.key);
    } else if (s == "flux") {
      if (e.key == "type")
        config.problem.flux.type = one_word(e);
      else if (e.key == "name")
        config.problem.flux.name = one_word(e);
      else if (e.key == "A")
        config.problem.flux.limiter = one_number(e);
      else if (e.key == "scale")
        config.problem.flux.scale = one_number(e);
      else
        throw ConfigError("unknown key flux." + e.key);
    } else if (s == "initial") {
      auto& init = config.problem.initial;
      if (e.key == "type")
        init.type = one_word(e);
      else if (e.key == "slope")
        init.slope = one_number(e);
      else if (e.key == "height")
        init.height = one_number(e);
      else if (e.key == "width")
        init.width = one_number(e);
      else if (e.key == "lipschitz")
        init.lipschitz = one_number(e);
      else if (e.key.rfind("table.", 0) == 0) {
        const int idx = static_cast<int>(
            parse_number(e.key.substr(std::string("table.").size()), e.key));
        if (e.tokens.size() % 2 != 0)
          throw ConfigError("initial.table expects x value pairs");
        if (static_cast<int>(init.tables.size()) < idx)
          init.tables.resize(idx);
        auto& knots = init.tables[idx - 1];
        for (std::size_t k = 0; k < e.tokens.size(); k += 2)
          knots.push_back({parse_number(e.tokens[k], e.key),
                           parse_number(e.tokens[k + 1], e.key)});
      } else
        throw ConfigError("unknown key initial." + e.key);
    } else if (s == "grid") {
      if (e.key == "dx")
        config.problem.dx = one_number(e);
      else if (e.key == "T")
        config.problem.horizon = one_number(e);
      else if (e.key == "radius")
        config.problem.radius = one_number(e);
      else if (e.key == "cfl_safety")
        config.problem.cfl_safety = one_number(e);
      else
        throw ConfigError("unknown key grid." + e.key);
    } else if (s == "experiment") {
      if (e.key == "dx_list") {
        for (const auto& tok : e.tokens)
          config.experiment.dx_list.push_back(parse_number(tok, "dx_list"));
      } else if (e.key == "oracle")
        config.experiment.oracle = one_word(e);
      else if (e.key == "fine_ratio")
        config.experiment.fine_ratio = static_cast<int>(one_number(e));
      else
        throw ConfigError("unknown key experiment." + e.key);
    } else if (s == "vertex") {
      if (e.key == "gamma")
        config.vertex.gamma = one_number(e);
      else if (e.key == "A")
        config.vertex.limiter = one_number(e);
      else if (e.key == "K")
        config.vertex.radius = one_number(e);
      else if (e.key == "samples")
        config.vertex.samples = static_cast<long>(one_number(e));
      else
        throw ConfigError("unknown key vertex." + e.key);
    } else {
      throw ConfigError("unknown section [" + s + "]");
    }
  }

  if (config.problem.branches < 1)
    throw ConfigError("junction.branches must be at least 1");
  if (per_branch.empty()) {
    config.problem.hamiltonians.push_back(shared);
  } else {
    for (int b = 1; b <= config.problem.branches; ++b) {
      auto it = per_branch.find(b);
      if (it != per_branch.end())
        config.problem.hamiltonians.push_back(it->second);
      else if (has_shared)
        config.problem.hamiltonians.push_back(shared);
      else
        throw ConfigError("hamiltonian for branch " + std::to_string(b) +
                          " missing");
    }
  }
  return config;
}

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

}  // namespace hjnet
