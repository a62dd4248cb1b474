#include "gtlproco/problem_io.hpp"

#include "gtlproco/parser.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gtlproco {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string &bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw input_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw input_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw input_error("write to " + path + " failed");
}

NodeId ProblemFile::node_index(const std::string &n) const {
  auto it = std::find(node_names.begin(), node_names.end(), n);
  if (it == node_names.end())
    throw input_error("unknown node \"" + n + "\"");
  return static_cast<NodeId>(it - node_names.begin());
}

namespace {

[[noreturn]] void fail(const std::string &where, const std::string &what) {
  throw input_error(where + ": " + what);
}

void check_keys(const json &obj, const std::string &where,
                std::initializer_list<const char *> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char *k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(where, "unknown key \"" + it.key() + "\"");
  }
}

const json &need(const json &obj, const char *key, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing \"") + key + "\"");
  return *it;
}

double num(const json &j, const std::string &where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Eigen::VectorXd to_vector(const json &j, long size, const std::string &where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  if (size >= 0 && static_cast<long>(j.size()) != size)
    fail(where, "expected " + std::to_string(size) + " entries, got " +
                    std::to_string(j.size()));
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<long>(i)) = num(j[i], where);
  return v;
}

Eigen::MatrixXd to_matrix(const json &j, long rows, long cols,
                          const std::string &where) {
  if (!j.is_array() || j.empty()) fail(where, "expected an array of rows");
  if (rows >= 0 && static_cast<long>(j.size()) != rows)
    fail(where, "expected " + std::to_string(rows) + " rows, got " +
                    std::to_string(j.size()));
  const long c = cols >= 0 ? cols : static_cast<long>(j[0].size());
  Eigen::MatrixXd M(j.size(), c);
  for (std::size_t r = 0; r < j.size(); ++r)
    M.row(static_cast<long>(r)) =
        to_vector(j[r], c, where + "[" + std::to_string(r) + "]").transpose();
  return M;
}

std::vector<std::string> parse_nodes(const json &root) {
  const json &jn = need(root, "nodes", "problem");
  if (!jn.is_array() || jn.empty()) fail("nodes", "expected a non-empty array");
  std::vector<std::string> names;
  for (const auto &e : jn) {
    if (!e.is_string()) fail("nodes", "node names must be strings");
    names.push_back(e.get<std::string>());
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (names[i] == names[j]) fail("nodes", "duplicate node \"" + names[i] + "\"");
  return names;
}

NodeId index_of(const std::vector<std::string> &names, const json &e,
                const std::string &where) {
  if (!e.is_string()) fail(where, "expected a node name string");
  const std::string n = e.get<std::string>();
  auto it = std::find(names.begin(), names.end(), n);
  if (it == names.end()) fail(where, "unknown node \"" + n + "\"");
  return static_cast<NodeId>(it - names.begin());
}

std::vector<Eigen::MatrixXi>
parse_adjacency(const json &root, const std::vector<std::string> &names) {
  const json &ja = need(root, "adjacency", "problem");
  if (!ja.is_array() || ja.empty())
    fail("adjacency", "expected one successor map per sub-swarm");
  const int n = static_cast<int>(names.size());
  std::vector<Eigen::MatrixXi> adj;
  for (std::size_t s = 0; s < ja.size(); ++s) {
    const std::string where = "adjacency[" + std::to_string(s) + "]";
    if (!ja[s].is_object()) fail(where, "expected a node -> successors map");
    Eigen::MatrixXi A = Eigen::MatrixXi::Zero(n, n);
    for (auto it = ja[s].begin(); it != ja[s].end(); ++it) {
      const NodeId from = index_of(names, json(it.key()), where);
      if (!it.value().is_array()) fail(where + "." + it.key(), "expected an array");
      for (const auto &e : it.value())
        A(from, index_of(names, e, where + "." + it.key())) = 1;
    }
    adj.push_back(std::move(A));
  }
  return adj;
}

std::vector<AffineLabel> parse_labels(const json &root,
                                      const std::vector<std::string> &names,
                                      int sub_swarms) {
  const json &jl = need(root, "labels", "problem");
  const int n = static_cast<int>(names.size());
  std::vector<AffineLabel> labels(names.size());

  /* shortcut: every node labeled with its own densities, one row per
     sub-swarm */
  if (jl.is_string() && jl.get<std::string>() == "own-density") {
    for (int v = 0; v < n; ++v) {
      Eigen::MatrixXd C = Eigen::MatrixXd::Zero(sub_swarms, sub_swarms * n);
      for (int s = 0; s < sub_swarms; ++s) C(s, s * n + v) = 1.0;
      labels[v] = {C, Eigen::VectorXd::Zero(sub_swarms)};
    }
    return labels;
  }

  if (!jl.is_object())
    fail("labels", "expected \"own-density\" or a node -> rows map");
  for (const auto &name : names)
    if (jl.find(name) == jl.end()) fail("labels", "missing node \"" + name + "\"");
  for (auto it = jl.begin(); it != jl.end(); ++it) {
    const NodeId v = index_of(names, json(it.key()), "labels");
    const std::string where = "labels." + it.key();
    if (!it.value().is_array() || it.value().empty())
      fail(where, "expected a non-empty array of rows");
    const long dim = static_cast<long>(it.value().size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(dim, sub_swarms * n);
    Eigen::VectorXd c0 = Eigen::VectorXd::Zero(dim);
    for (long r = 0; r < dim; ++r) {
      const json &row = it.value()[static_cast<std::size_t>(r)];
      const std::string rw = where + "[" + std::to_string(r) + "]";
      check_keys(row, rw, {"coeff", "offset"});
      const json &jc = need(row, "coeff", rw);
      if (!jc.is_array() || static_cast<int>(jc.size()) != sub_swarms)
        fail(rw, "\"coeff\" needs one entry per sub-swarm");
      for (int s = 0; s < sub_swarms; ++s)
        C.block(r, s * n, 1, n) =
            to_vector(jc[s], n, rw + ".coeff").transpose();
      if (row.find("offset") != row.end())
        c0(r) = num(row["offset"], rw + ".offset");
    }
    labels[v] = {C, c0};
  }
  return labels;
}

DensityState parse_initial(const json &root, int sub_swarms, int n) {
  const json &ji = need(root, "initial", "problem");
  if (!ji.is_array() || static_cast<int>(ji.size()) != sub_swarms)
    fail("initial", "expected one density vector per sub-swarm");
  DensityState x0;
  for (int s = 0; s < sub_swarms; ++s)
    x0.x.push_back(to_vector(ji[s], n, "initial[" + std::to_string(s) + "]"));
  return x0;
}

CostSpec parse_cost(const json &root, int sub_swarms, int n) {
  CostSpec cost;
  auto it = root.find("cost");
  if (it == root.end()) return cost;
  const json &jc = *it;
  check_keys(jc, "cost", {"density", "matrix", "loop"});
  if (jc.find("density") != jc.end()) {
    const json &jd = jc["density"];
    if (!jd.is_array() || static_cast<int>(jd.size()) != sub_swarms)
      fail("cost.density", "expected one coefficient vector per sub-swarm");
    for (int s = 0; s < sub_swarms; ++s)
      cost.density_coeff.push_back(
          to_vector(jd[s], n, "cost.density[" + std::to_string(s) + "]"));
  }
  if (jc.find("matrix") != jc.end()) {
    const json &jm = jc["matrix"];
    if (!jm.is_array() || static_cast<int>(jm.size()) != sub_swarms)
      fail("cost.matrix", "expected one coefficient matrix per sub-swarm");
    for (int s = 0; s < sub_swarms; ++s)
      cost.matrix_coeff.push_back(
          to_matrix(jm[s], n, n, "cost.matrix[" + std::to_string(s) + "]"));
  }
  if (jc.find("loop") != jc.end()) {
    if (!jc["loop"].is_boolean()) fail("cost.loop", "expected a boolean");
    cost.loop_cost = jc["loop"].get<bool>();
  }
  return cost;
}

std::optional<ReachAvoidSpec> parse_reach_avoid(const json &root,
                                                int sub_swarms, int n) {
  auto it = root.find("reach_avoid");
  if (it == root.end()) return std::nullopt;
  const json &jr = *it;
  check_keys(jr, "reach_avoid", {"stationary", "weights", "safety"});
  ReachAvoidSpec spec;
  const json &js = need(jr, "stationary", "reach_avoid");
  if (!js.is_array() || static_cast<int>(js.size()) != sub_swarms)
    fail("reach_avoid.stationary", "expected one distribution per sub-swarm");
  for (int s = 0; s < sub_swarms; ++s)
    spec.nu.push_back(to_vector(
        js[s], n, "reach_avoid.stationary[" + std::to_string(s) + "]"));
  if (jr.find("weights") != jr.end())
    spec.weights = to_vector(jr["weights"], sub_swarms, "reach_avoid.weights");
  if (jr.find("safety") != jr.end()) {
    const json &jb = jr["safety"];
    if (!jb.is_array()) fail("reach_avoid.safety", "expected an array of blocks");
    for (std::size_t k = 0; k < jb.size(); ++k) {
      const std::string where = "reach_avoid.safety[" + std::to_string(k) + "]";
      check_keys(jb[k], where, {"A", "b"});
      ReachAvoidSpec::SafetyBlock blk;
      blk.A = to_matrix(need(jb[k], "A", where), -1, sub_swarms * n,
                        where + ".A");
      blk.b = to_vector(need(jb[k], "b", where), blk.A.rows(), where + ".b");
      spec.safety.push_back(std::move(blk));
    }
  }
  return spec;
}

void parse_solver(const json &root, SynthOptions &opts) {
  auto it = root.find("solver");
  if (it == root.end()) return;
  const json &js = *it;
  check_keys(js, "solver",
             {"time_limit_sec", "mip_rel_gap", "max_nodes", "feas_tol",
              "opt_tol", "int_tol", "max_iterations", "periodic_densities",
              "support_floor", "spectral_max_iters", "spectral_improve_tol",
              "trust"});
  auto dbl = [&](const char *k, double &out) {
    if (js.find(k) != js.end()) out = num(js[k], std::string("solver.") + k);
  };
  auto lng = [&](const char *k, long &out) {
    if (js.find(k) != js.end())
      out = static_cast<long>(num(js[k], std::string("solver.") + k));
  };
  dbl("time_limit_sec", opts.solve.time_limit_sec);
  dbl("mip_rel_gap", opts.solve.mip_rel_gap);
  lng("max_nodes", opts.solve.max_nodes);
  dbl("feas_tol", opts.solve.feas_tol);
  dbl("opt_tol", opts.solve.opt_tol);
  dbl("int_tol", opts.solve.int_tol);
  lng("max_iterations", opts.solve.max_iterations);
  if (js.find("periodic_densities") != js.end()) {
    if (!js["periodic_densities"].is_boolean())
      fail("solver.periodic_densities", "expected a boolean");
    opts.periodic_densities = js["periodic_densities"].get<bool>();
  }
  dbl("support_floor", opts.support_floor);
  if (js.find("spectral_max_iters") != js.end())
    opts.spectral_max_iters =
        static_cast<int>(num(js["spectral_max_iters"], "solver.spectral_max_iters"));
  dbl("spectral_improve_tol", opts.spectral_improve_tol);
  if (js.find("trust") != js.end()) {
    const json &jt = js["trust"];
    check_keys(jt, "solver.trust",
               {"lambda", "r0", "r_min", "r_exp", "r_con", "eps_tol",
                "eps_acc", "max_passes", "inf_norm"});
    auto tdbl = [&](const char *k, double &out) {
      if (jt.find(k) != jt.end())
        out = num(jt[k], std::string("solver.trust.") + k);
    };
    TrustRegionParams &tr = opts.trust;
    tdbl("lambda", tr.lambda);
    tdbl("r0", tr.r0);
    tdbl("r_min", tr.r_min);
    tdbl("r_exp", tr.r_exp);
    tdbl("r_con", tr.r_con);
    tdbl("eps_tol", tr.eps_tol);
    tdbl("eps_acc", tr.eps_acc);
    if (jt.find("max_passes") != jt.end())
      tr.max_passes =
          static_cast<int>(num(jt["max_passes"], "solver.trust.max_passes"));
    if (jt.find("inf_norm") != jt.end()) {
      if (!jt["inf_norm"].is_boolean())
        fail("solver.trust.inf_norm", "expected a boolean");
      tr.inf_norm = jt["inf_norm"].get<bool>();
    }
  }
}

json parsed(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw input_error(std::string("document is not well-formed: ") + e.what());
  }
}

} // namespace

ProblemFile parse_problem_text(const std::string &text) {
  const json root = parsed(text);
  if (!root.is_object()) fail("problem", "expected a key-value document");
  check_keys(root, "problem",
             {"name", "nodes", "adjacency", "labels", "initial", "horizon",
              "requirements", "cost", "reach_avoid", "solver"});

  ProblemFile pf;
  pf.content_hash = fnv1a64(text);
  if (root.find("name") != root.end()) {
    if (!root["name"].is_string()) fail("name", "expected a string");
    pf.name = root["name"].get<std::string>();
  }
  pf.node_names = parse_nodes(root);
  auto adj = parse_adjacency(root, pf.node_names);
  const int sub_swarms = static_cast<int>(adj.size());
  const int n = static_cast<int>(pf.node_names.size());
  auto labels = parse_labels(root, pf.node_names, sub_swarms);
  pf.instance.graph = LabeledGraph(std::move(adj), std::move(labels));
  pf.instance.x0 = parse_initial(root, sub_swarms, n);

  const json &jh = need(root, "horizon", "problem");
  if (!jh.is_number_integer() || jh.get<long>() < 1)
    fail("horizon", "expected an integer >= 1");
  pf.instance.k_p = static_cast<int>(jh.get<long>());

  if (root.find("requirements") != root.end()) {
    const json &jr = root["requirements"];
    if (!jr.is_array()) fail("requirements", "expected an array");
    for (std::size_t k = 0; k < jr.size(); ++k) {
      const std::string where = "requirements[" + std::to_string(k) + "]";
      check_keys(jr[k], where, {"formula", "nodes"});
      const json &jf = need(jr[k], "formula", where);
      if (!jf.is_string()) fail(where + ".formula", "expected a formula string");
      GtlRequirement req;
      try {
        req.phi = parse_formula(jf.get<std::string>(),
                                pf.instance.graph.label_dim());
      } catch (const syntax_error &e) {
        fail(where + ".formula", e.what());
      }
      const json &jn = need(jr[k], "nodes", where);
      if (!jn.is_array() || jn.empty())
        fail(where + ".nodes", "expected a non-empty array of node names");
      for (const auto &e : jn)
        req.nodes.push_back(index_of(pf.node_names, e, where + ".nodes"));
      std::sort(req.nodes.begin(), req.nodes.end());
      req.nodes.erase(std::unique(req.nodes.begin(), req.nodes.end()),
                      req.nodes.end());
      pf.requirement_text.push_back(jf.get<std::string>());
      pf.instance.requirements.push_back(std::move(req));
    }
  }

  pf.instance.cost = parse_cost(root, sub_swarms, n);
  pf.instance.reach_avoid = parse_reach_avoid(root, sub_swarms, n);
  parse_solver(root, pf.options);
  pf.instance.validate();
  return pf;
}

ProblemFile load_problem_file(const std::string &path) {
  return parse_problem_text(read_text_file(path));
}

std::string solution_to_text(const SynthesisResult &res, bool verdict,
                             std::uint64_t problem_hash) {
  json root;
  root["problem_hash"] = hash_hex(problem_hash);
  root["status"] = to_string(res.status);
  root["path"] = res.diagnostics.path;
  root["message"] = res.diagnostics.message;
  root["k_p"] = res.plan.k_p;
  if (res.plan.loop_index)
    root["loop_index"] = *res.plan.loop_index;
  else
    root["loop_index"] = nullptr;
  root["time_invariant"] = res.plan.time_invariant;

  json mats = json::array();
  for (const auto &per : res.plan.M) {
    json steps = json::array();
    for (const auto &M : per) {
      json rows = json::array();
      for (long i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (long j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
      }
      steps.push_back(std::move(rows));
    }
    mats.push_back(std::move(steps));
  }
  root["matrices"] = std::move(mats);

  json traj = json::array();
  for (const auto &per : res.trajectory.x) {
    json steps = json::array();
    for (const auto &x : per) {
      json v = json::array();
      for (long i = 0; i < x.size(); ++i) v.push_back(x(i));
      steps.push_back(std::move(v));
    }
    traj.push_back(std::move(steps));
  }
  root["trajectory"] = std::move(traj);

  root["objective"] = res.diagnostics.objective;
  root["bilinear_gap"] = res.diagnostics.bilinear_gap;
  root["wall_time_sec"] = res.diagnostics.wall_time_sec;
  root["verdict"] = verdict;
  root["ergodicity"] = res.ergodicity;
  root["convergence_rate"] = res.convergence_rate;

  json iters = json::array();
  for (const auto &rec : res.diagnostics.log)
    iters.push_back({{"k", rec.k},
                     {"radius", rec.radius},
                     {"linear_cost", rec.linear_cost},
                     {"accuracy", rec.accuracy},
                     {"ratio", rec.ratio},
                     {"accepted", rec.accepted}});
  root["iterations"] = std::move(iters);
  return root.dump(2) + "\n";
}

void write_solution_file(const std::string &path, const SynthesisResult &res,
                         bool verdict, std::uint64_t problem_hash) {
  write_text_file(path, solution_to_text(res, verdict, problem_hash));
}

SolutionFile parse_solution_text(const std::string &text) {
  const json root = parsed(text);
  if (!root.is_object()) fail("solution", "expected a key-value document");
  SolutionFile sf;
  const json &jh = need(root, "problem_hash", "solution");
  if (!jh.is_string()) fail("solution.problem_hash", "expected a hex string");
  sf.problem_hash = std::stoull(jh.get<std::string>(), nullptr, 16);
  sf.status = need(root, "status", "solution").get<std::string>();
  sf.path_taken = need(root, "path", "solution").get<std::string>();
  if (root.find("message") != root.end())
    sf.message = root["message"].get<std::string>();

  sf.plan.k_p = static_cast<int>(num(need(root, "k_p", "solution"), "k_p"));
  const json &jl = need(root, "loop_index", "solution");
  if (!jl.is_null()) sf.plan.loop_index = static_cast<int>(num(jl, "loop_index"));
  if (root.find("time_invariant") != root.end())
    sf.plan.time_invariant = root["time_invariant"].get<bool>();

  const json &jm = need(root, "matrices", "solution");
  for (std::size_t s = 0; s < jm.size(); ++s) {
    std::vector<Eigen::MatrixXd> per;
    for (std::size_t t = 0; t < jm[s].size(); ++t)
      per.push_back(to_matrix(jm[s][t], -1, -1,
                              "matrices[" + std::to_string(s) + "][" +
                                  std::to_string(t) + "]"));
    sf.plan.M.push_back(std::move(per));
  }

  const json &jt = need(root, "trajectory", "solution");
  for (std::size_t s = 0; s < jt.size(); ++s) {
    std::vector<Eigen::VectorXd> per;
    for (std::size_t t = 0; t < jt[s].size(); ++t)
      per.push_back(to_vector(jt[s][t], -1,
                              "trajectory[" + std::to_string(s) + "][" +
                                  std::to_string(t) + "]"));
    sf.trajectory.x.push_back(std::move(per));
  }
  sf.trajectory.loop_index = sf.plan.loop_index;

  sf.objective = num(need(root, "objective", "solution"), "objective");
  sf.bilinear_gap =
      num(need(root, "bilinear_gap", "solution"), "bilinear_gap");
  if (root.find("wall_time_sec") != root.end())
    sf.wall_time_sec = num(root["wall_time_sec"], "wall_time_sec");
  sf.verdict = need(root, "verdict", "solution").get<bool>();
  if (root.find("ergodicity") != root.end())
    sf.ergodicity = root["ergodicity"].get<std::vector<double>>();
  if (root.find("convergence_rate") != root.end())
    sf.convergence_rate = root["convergence_rate"].get<std::vector<double>>();
  return sf;
}

SolutionFile load_solution_file(const std::string &path) {
  return parse_solution_text(read_text_file(path));
}

} // namespace gtlproco
