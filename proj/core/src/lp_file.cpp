#include "gtlproco/lp_file.hpp"

#include "gtlproco/graph.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace gtlproco {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_terms(std::string &out, const std::vector<std::pair<int, double>> &terms,
                  const std::vector<std::string> &names, double constant) {
  int emitted = 0;
  for (auto [j, c] : terms) {
    if (c == 0.0) continue;
    out += c < 0 ? " - " : " + ";
    out += fmt(std::abs(c));
    out += ' ';
    out += names[j];
    if (++emitted % 8 == 0) out += "\n ";
  }
  if (constant != 0.0) {
    out += constant < 0 ? " - " : " + ";
    out += fmt(std::abs(constant));
    ++emitted;
  }
  if (emitted == 0) out += " 0";
}

} // namespace

std::string to_lp_string(const Model &model) {
  model.validate();
  std::string out;
  out += "\\ linear program\n";
  out += model.maximize ? "Maximize\n" : "Minimize\n";
  out += " obj:";
  {
    std::vector<std::pair<int, double>> obj_terms;
    for (int j = 0; j < model.var_count(); ++j)
      if (model.obj[j] != 0.0) obj_terms.emplace_back(j, model.obj[j]);
    append_terms(out, obj_terms, model.var_names, model.obj_offset);
  }
  out += "\nSubject To\n";
  for (int r = 0; r < model.row_count(); ++r) {
    const auto &row = model.rows[r];
    out += ' ';
    out += row.name;
    out += ':';
    append_terms(out, row.terms, model.var_names, 0.0);
    switch (row.sense) {
    case RowSense::LE: out += " <= "; break;
    case RowSense::GE: out += " >= "; break;
    case RowSense::EQ: out += " = "; break;
    }
    out += fmt(row.rhs);
    out += '\n';
  }
  out += "Bounds\n";
  for (int j = 0; j < model.var_count(); ++j) {
    const double lo = model.lb[j];
    const double hi = model.ub[j];
    out += ' ';
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out += model.var_names[j];
      out += " free";
    } else if (lo == hi) {
      out += model.var_names[j];
      out += " = ";
      out += fmt(lo);
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
      out += fmt(lo);
      out += " <= ";
      out += model.var_names[j];
      out += " <= ";
      out += fmt(hi);
    } else if (std::isfinite(lo)) {
      out += model.var_names[j];
      out += " >= ";
      out += fmt(lo);
    } else {
      out += model.var_names[j];
      out += " <= ";
      out += fmt(hi);
    }
    out += '\n';
  }
  bool any_bin = false;
  for (int j = 0; j < model.var_count(); ++j)
    if (model.binary[j]) any_bin = true;
  if (any_bin) {
    out += "Binaries\n";
    for (int j = 0; j < model.var_count(); ++j)
      if (model.binary[j]) {
        out += ' ';
        out += model.var_names[j];
        out += '\n';
      }
  }
  out += "End\n";
  return out;
}

void write_lp_file(const Model &model, const std::string &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw input_error("cannot open for writing: " + path);
  f << to_lp_string(model);
  if (!f) throw input_error("write failed: " + path);
}

namespace {

struct LpTok {
  enum Kind { Word, Number, Colon, Le, Ge, Eq, Plus, Minus, End } kind;
  std::string text;
  double num = 0.0;
};

class LpLexer {
public:
  explicit LpLexer(const std::string &text) : s_(text) { advance(); }
  const LpTok &peek() const { return tok_; }
  LpTok next() {
    LpTok t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\\') { /* comment to end of line */
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        continue;
      }
      break;
    }
    if (pos_ >= s_.size()) {
      tok_ = {LpTok::End, "", 0.0};
      return;
    }
    char c = s_[pos_];
    if (c == ':') {
      ++pos_;
      tok_ = {LpTok::Colon, ":", 0.0};
      return;
    }
    if (c == '+') {
      ++pos_;
      tok_ = {LpTok::Plus, "+", 0.0};
      return;
    }
    if (c == '-') {
      ++pos_;
      tok_ = {LpTok::Minus, "-", 0.0};
      return;
    }
    if (c == '<' || c == '>' || c == '=') {
      ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '=') ++pos_;
      tok_ = {c == '<' ? LpTok::Le : (c == '>' ? LpTok::Ge : LpTok::Eq),
              std::string(1, c), 0.0};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size()) {
        char d = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
          ++pos_;
        } else if ((d == 'e' || d == 'E') && pos_ + 1 < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
                    ((s_[pos_ + 1] == '+' || s_[pos_ + 1] == '-') &&
                     pos_ + 2 < s_.size() &&
                     std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))))) {
          pos_ += 2;
        } else {
          break;
        }
      }
      std::string text = s_.substr(start, pos_ - start);
      tok_ = {LpTok::Number, text, std::strtod(text.c_str(), nullptr)};
      return;
    }
    /* word: names and keywords */
    std::size_t start = pos_;
    while (pos_ < s_.size()) {
      char d = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == ':' ||
          d == '<' || d == '>' || d == '=' || d == '+' || d == '-' ||
          d == '\\')
        break;
      ++pos_;
    }
    tok_ = {LpTok::Word, s_.substr(start, pos_ - start), 0.0};
  }

  const std::string &s_;
  std::size_t pos_ = 0;
  LpTok tok_;
};

std::string lower(std::string s) {
  for (char &c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_section_word(const std::string &w) {
  const std::string l = lower(w);
  return l == "minimize" || l == "maximize" || l == "min" || l == "max" ||
         l == "subject" || l == "st" || l == "s.t." || l == "bounds" ||
         l == "bound" || l == "binaries" || l == "binary" || l == "bin" ||
         l == "general" || l == "generals" || l == "gen" || l == "end" ||
         l == "free" || l == "infinity" || l == "inf";
}

class LpParser {
public:
  explicit LpParser(const std::string &text) : lex_(text) {}

  Model parse() {
    expect_objective_header();
    parse_objective();
    expect_subject_to();
    parse_rows();
    parse_trailing_sections();
    finalize_bounds();
    return std::move(model_);
  }

private:
  int var_index(const std::string &name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const int j = model_.add_var(name, 0.0, kInf, false, 0.0);
    index_.emplace(name, j);
    seen_bounds_.push_back(false);
    return j;
  }

  void expect_objective_header() {
    LpTok t = lex_.next();
    if (t.kind != LpTok::Word)
      throw input_error("lp parse: expected objective sense keyword");
    const std::string l = lower(t.text);
    if (l == "maximize" || l == "max")
      model_.maximize = true;
    else if (l != "minimize" && l != "min")
      throw input_error("lp parse: unknown objective sense '" + t.text + "'");
  }

  /* expr := [name ':'] (sign? coeff? name | sign? constant)* ; fills terms */
  void parse_linear(std::vector<std::pair<int, double>> &terms,
                    double &constant) {
    while (true) {
      const LpTok &p = lex_.peek();
      if (p.kind == LpTok::End || p.kind == LpTok::Le || p.kind == LpTok::Ge ||
          p.kind == LpTok::Eq)
        return;
      if (p.kind == LpTok::Word && is_section_word(p.text)) return;
      double sign = 1.0;
      while (lex_.peek().kind == LpTok::Plus ||
             lex_.peek().kind == LpTok::Minus) {
        if (lex_.next().kind == LpTok::Minus) sign = -sign;
      }
      const LpTok &q = lex_.peek();
      if (q.kind == LpTok::Number) {
        double coeff = lex_.next().num;
        const LpTok &r = lex_.peek();
        if (r.kind == LpTok::Word && !is_section_word(r.text)) {
          terms.emplace_back(var_index(lex_.next().text), sign * coeff);
        } else {
          constant += sign * coeff;
        }
      } else if (q.kind == LpTok::Word && !is_section_word(q.text)) {
        terms.emplace_back(var_index(lex_.next().text), sign);
      } else {
        return;
      }
    }
  }

  void parse_objective() {
    /* optional label */
    if (lex_.peek().kind == LpTok::Word && !is_section_word(lex_.peek().text)) {
      LpLexer probe = lex_;
      probe.next();
      if (probe.peek().kind == LpTok::Colon) {
        lex_.next();
        lex_.next();
      }
    }
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;
    parse_linear(terms, constant);
    obj_terms_ = std::move(terms);
    model_.obj_offset = constant;
  }

  void expect_subject_to() {
    LpTok t = lex_.next();
    const std::string l = t.kind == LpTok::Word ? lower(t.text) : "";
    if (l == "subject") {
      LpTok t2 = lex_.next();
      if (t2.kind != LpTok::Word || lower(t2.text) != "to")
        throw input_error("lp parse: expected 'Subject To'");
    } else if (l != "st" && l != "s.t.") {
      throw input_error("lp parse: expected 'Subject To' section");
    }
  }

  void parse_rows() {
    while (true) {
      const LpTok &p = lex_.peek();
      if (p.kind == LpTok::End) return;
      if (p.kind == LpTok::Word && is_section_word(p.text)) {
        const std::string l = lower(p.text);
        if (l == "bounds" || l == "bound" || l == "binaries" || l == "binary" ||
            l == "bin" || l == "general" || l == "generals" || l == "gen" ||
            l == "end")
          return;
      }
      std::string row_name;
      if (p.kind == LpTok::Word && !is_section_word(p.text)) {
        LpLexer probe = lex_;
        probe.next();
        if (probe.peek().kind == LpTok::Colon) {
          row_name = lex_.next().text;
          lex_.next();
        }
      }
      std::vector<std::pair<int, double>> terms;
      double constant = 0.0;
      parse_linear(terms, constant);
      LpTok rel = lex_.next();
      RowSense sense;
      if (rel.kind == LpTok::Le)
        sense = RowSense::LE;
      else if (rel.kind == LpTok::Ge)
        sense = RowSense::GE;
      else if (rel.kind == LpTok::Eq)
        sense = RowSense::EQ;
      else
        throw input_error("lp parse: expected <=, >= or = in row");
      double sign = 1.0;
      while (lex_.peek().kind == LpTok::Plus ||
             lex_.peek().kind == LpTok::Minus) {
        if (lex_.next().kind == LpTok::Minus) sign = -sign;
      }
      LpTok rhs_tok = lex_.next();
      if (rhs_tok.kind != LpTok::Number)
        throw input_error("lp parse: expected numeric right-hand side");
      model_.add_row(std::move(terms), sense,
                     sign * rhs_tok.num - constant, row_name);
    }
  }

  void parse_trailing_sections() {
    while (true) {
      LpTok t = lex_.next();
      if (t.kind == LpTok::End) return;
      if (t.kind != LpTok::Word)
        throw input_error("lp parse: unexpected token '" + t.text + "'");
      const std::string l = lower(t.text);
      if (l == "end") return;
      if (l == "bounds" || l == "bound") {
        parse_bounds();
      } else if (l == "binaries" || l == "binary" || l == "bin") {
        parse_binaries();
      } else if (l == "general" || l == "generals" || l == "gen") {
        throw input_error("lp parse: general integers are not supported");
      } else {
        throw input_error("lp parse: unexpected section '" + t.text + "'");
      }
    }
  }

  double bound_number(const LpTok &t, double sign) {
    if (t.kind == LpTok::Number) return sign * t.num;
    if (t.kind == LpTok::Word) {
      const std::string l = lower(t.text);
      if (l == "infinity" || l == "inf") return sign * kInf;
    }
    throw input_error("lp parse: expected a bound value");
  }

  void parse_bounds() {
    while (true) {
      const LpTok &p = lex_.peek();
      if (p.kind == LpTok::End) return;
      if (p.kind == LpTok::Word && is_section_word(p.text)) {
        const std::string l = lower(p.text);
        if (l != "infinity" && l != "inf" && l != "free") return;
      }
      /* forms: N <= name <= N | name <= N | name >= N | name = N | name free */
      double sign = 1.0;
      while (lex_.peek().kind == LpTok::Plus ||
             lex_.peek().kind == LpTok::Minus) {
        if (lex_.next().kind == LpTok::Minus) sign = -sign;
      }
      LpTok first = lex_.next();
      if (first.kind == LpTok::Number ||
          (first.kind == LpTok::Word &&
           (lower(first.text) == "infinity" || lower(first.text) == "inf"))) {
        const double lo = bound_number(first, sign);
        if (lex_.next().kind != LpTok::Le)
          throw input_error("lp parse: expected <= after lower bound");
        LpTok name = lex_.next();
        if (name.kind != LpTok::Word)
          throw input_error("lp parse: expected variable name in bound");
        const int j = var_index(name.text);
        model_.lb[j] = lo;
        seen_bounds_[j] = true;
        if (lex_.peek().kind == LpTok::Le) {
          lex_.next();
          double s2 = 1.0;
          while (lex_.peek().kind == LpTok::Plus ||
                 lex_.peek().kind == LpTok::Minus) {
            if (lex_.next().kind == LpTok::Minus) s2 = -s2;
          }
          model_.ub[j] = bound_number(lex_.next(), s2);
        }
        continue;
      }
      if (first.kind != LpTok::Word)
        throw input_error("lp parse: malformed bound line");
      const int j = var_index(first.text);
      seen_bounds_[j] = true;
      const LpTok &rel = lex_.peek();
      if (rel.kind == LpTok::Word && lower(rel.text) == "free") {
        lex_.next();
        model_.lb[j] = -kInf;
        model_.ub[j] = kInf;
        continue;
      }
      LpTok op = lex_.next();
      double s2 = 1.0;
      while (lex_.peek().kind == LpTok::Plus ||
             lex_.peek().kind == LpTok::Minus) {
        if (lex_.next().kind == LpTok::Minus) s2 = -s2;
      }
      const double v = bound_number(lex_.next(), s2);
      if (op.kind == LpTok::Le) {
        model_.ub[j] = v;
      } else if (op.kind == LpTok::Ge) {
        model_.lb[j] = v;
      } else if (op.kind == LpTok::Eq) {
        model_.lb[j] = v;
        model_.ub[j] = v;
      } else {
        throw input_error("lp parse: malformed bound line");
      }
    }
  }

  void parse_binaries() {
    while (true) {
      const LpTok &p = lex_.peek();
      if (p.kind != LpTok::Word || is_section_word(p.text)) return;
      const int j = var_index(lex_.next().text);
      model_.binary[j] = 1;
      if (!seen_bounds_[j]) {
        model_.lb[j] = 0.0;
        model_.ub[j] = 1.0;
      } else {
        model_.lb[j] = std::max(model_.lb[j], 0.0);
        model_.ub[j] = std::min(model_.ub[j], 1.0);
      }
    }
  }

  void finalize_bounds() {
    model_.obj.assign(model_.var_count(), 0.0);
    for (auto [j, c] : obj_terms_) model_.obj[j] += c;
  }

  LpLexer lex_;
  Model model_;
  std::map<std::string, int> index_;
  std::vector<bool> seen_bounds_;
  std::vector<std::pair<int, double>> obj_terms_;
};

} // namespace

Model parse_lp_string(const std::string &text) {
  return LpParser(text).parse();
}

Model read_lp_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw input_error("cannot open lp file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_lp_string(ss.str());
}

ExternalSolution read_solution_file(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw input_error("cannot open solution file: " + path);
  ExternalSolution out;
  std::string line;
  bool first_content = true;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head[0] == '#') continue;
    if (first_content && (head == "status" || head == "Status")) {
      std::string word;
      if (!(ls >> word)) throw input_error("solution file: missing status word");
      bool matched = false;
      for (SolveStatus s :
           {SolveStatus::Optimal, SolveStatus::Infeasible,
            SolveStatus::Unbounded, SolveStatus::IterationLimit,
            SolveStatus::TimeLimit, SolveStatus::NumericalFailure}) {
        if (to_string(s) == word) {
          out.status = s;
          matched = true;
        }
      }
      if (!matched)
        throw input_error("solution file: unknown status '" + word + "'");
      first_content = false;
      continue;
    }
    first_content = false;
    if (head == "objective" || head == "Objective") continue;
    double v;
    if (!(ls >> v))
      throw input_error("solution file: malformed line '" + line + "'");
    out.values[head] = v;
  }
  return out;
}

Solution solve_with_external(const Model &model,
                             const std::string &command_template,
                             const SolveOptions &opts) {
  namespace fs = std::filesystem;
  Solution sol;
  sol.duals = Eigen::VectorXd::Zero(model.row_count());
  sol.x = Eigen::VectorXd::Zero(model.var_count());
  sol.objective = kInf;
  sol.status = SolveStatus::NumericalFailure;

  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("gtlproco-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter++));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw input_error("cannot create temp dir: " + dir.string());
  const std::string lp_path = (dir / "model.lp").string();
  const std::string sol_path = (dir / "model.sol").string();
  write_lp_file(model, lp_path);

  std::string cmd = command_template;
  bool substituted = false;
  auto replace_all = [&](const std::string &key, const std::string &value) {
    std::size_t pos = 0;
    while ((pos = cmd.find(key, pos)) != std::string::npos) {
      cmd.replace(pos, key.size(), value);
      pos += value.size();
      substituted = true;
    }
  };
  replace_all("{lp}", lp_path);
  replace_all("{sol}", sol_path);
  if (!substituted) cmd += " '" + lp_path + "' '" + sol_path + "'";

  const int rc = std::system(cmd.c_str());
  if (rc == 0 && fs::exists(sol_path)) {
    try {
      ExternalSolution ext = read_solution_file(sol_path);
      sol.status = ext.status;
      for (int j = 0; j < model.var_count(); ++j) {
        auto it = ext.values.find(model.var_names[j]);
        if (it != ext.values.end()) sol.x(j) = it->second;
      }
      if (sol.status == SolveStatus::Optimal ||
          sol.status == SolveStatus::TimeLimit ||
          sol.status == SolveStatus::IterationLimit) {
        sol.objective = model.objective_value(sol.x);
        sol.max_violation = model.max_violation(sol.x);
        if (sol.status == SolveStatus::Optimal &&
            sol.max_violation > opts.feas_tol * 100.0)
          sol.status = SolveStatus::NumericalFailure;
      }
    } catch (const input_error &) {
      sol.status = SolveStatus::NumericalFailure;
    }
  }
  fs::remove_all(dir, ec);
  return sol;
}

} // namespace gtlproco
