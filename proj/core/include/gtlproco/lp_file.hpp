#pragma once

#include "gtlproco/model.hpp"

#include <map>
#include <string>

namespace gtlproco {

/*
 * Plain-text linear program exchange, in the widely used LP file format:
 * objective, Subject To, Bounds, Binaries sections, terminated by End.
 * Output is canonical (model ordering, fixed float formatting), so identical
 * models produce identical bytes.
 */
std::string to_lp_string(const Model &model);
void write_lp_file(const Model &model, const std::string &path);

/* parses a file produced by write_lp_file (or hand-written equivalents) */
Model read_lp_file(const std::string &path);
Model parse_lp_string(const std::string &text);

/*
 * Solution files are name/value pairs, one per line, with optional '#'
 * comments and an optional leading "status <word>" line. Unlisted variables
 * default to zero.
 */
struct ExternalSolution {
  SolveStatus status = SolveStatus::Optimal;
  std::map<std::string, double> values;
};
ExternalSolution read_solution_file(const std::string &path);

/*
 * Runs an external solver as a subprocess. The command template may contain
 * the placeholders {lp} and {sol}; when absent, the LP path and the expected
 * solution path are appended as two extra arguments. The subprocess must
 * write the solution file described above. A missing or malformed solution
 * file, or a nonzero exit status, is reported as a numerical failure.
 */
Solution solve_with_external(const Model &model,
                             const std::string &command_template,
                             const SolveOptions &opts = {});

} // namespace gtlproco
