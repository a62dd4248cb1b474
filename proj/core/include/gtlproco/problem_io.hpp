#pragma once

#include "gtlproco/synthesis.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gtlproco {

/* FNV-1a over raw bytes; ties solution files to the exact problem text */
std::uint64_t fnv1a64(const std::string &bytes);
std::string hash_hex(std::uint64_t h);

std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);

/*
 * A problem document: the labeled graph under declared node names, the
 * instance to solve and any solver options the file pins down. The schema
 * is documented in the top-level README; parse errors carry the offending
 * key. content_hash is FNV-1a over the unparsed text.
 */
struct ProblemFile {
  std::string name;
  std::vector<std::string> node_names;
  ProblemInstance instance;
  SynthOptions options;
  std::vector<std::string> requirement_text; /* formulas as written */
  std::uint64_t content_hash = 0;

  NodeId node_index(const std::string &name) const;
};

ProblemFile parse_problem_text(const std::string &text);
ProblemFile load_problem_file(const std::string &path);

/* Solution document: the plan, its trajectory and the solve diagnostics. */
struct SolutionFile {
  std::uint64_t problem_hash = 0;
  std::string status;
  std::string path_taken;
  std::string message;
  MarkovPlan plan;
  GraphTrajectory trajectory;
  double objective = 0.0;
  double bilinear_gap = 0.0;
  double wall_time_sec = 0.0;
  bool verdict = false;
  std::vector<double> ergodicity;
  std::vector<double> convergence_rate;
};

std::string solution_to_text(const SynthesisResult &res, bool verdict,
                             std::uint64_t problem_hash);
void write_solution_file(const std::string &path, const SynthesisResult &res,
                         bool verdict, std::uint64_t problem_hash);
SolutionFile parse_solution_text(const std::string &text);
SolutionFile load_solution_file(const std::string &path);

} // namespace gtlproco
