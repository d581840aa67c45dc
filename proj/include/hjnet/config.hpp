#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hjnet/problem.hpp"

namespace hjnet {

struct ExperimentSpec {
  std::vector<double> dx_list;
  std::string oracle = "auto";  // auto | hopf_lax | self
  int fine_ratio = 8;
};

struct VertexSpec {
  double gamma = 0.1;
  double limiter = -std::numeric_limits<double>::infinity();
  double radius = 5.0;
  long samples = 10000;
};

struct Config {
  ProblemSpec problem;
  ExperimentSpec experiment;
  VertexSpec vertex;
};

/// Parse the key-value configuration format:
///   [section]
///   key = value ...          # numbers are doubles; "-inf" is accepted
/// Sections: junction, hamiltonian[.k], flux, initial, grid, experiment,
/// vertex.  Unknown sections or keys are rejected.
Config parse_config(std::istream& in);
Config parse_config_file(const std::string& path);

}  // namespace hjnet
