#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "acgn/capacity.hpp"
#include "acgn/linalg.hpp"
#include "acgn/noise.hpp"

namespace acgn {

struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Config grammar (see README for the full description):
//   file      := { statement }
//   statement := key '=' value | key '{' { statement } '}' | comment
//   value     := number | word | matrix
//   matrix    := '[' row { ';' row } ']'   rows are numbers, comma optional
//   comment   := '#' to end of line
struct ConfigValue {
  enum class Kind { number, word, matrix };
  Kind kind = Kind::number;
  double num = 0.0;
  std::string word;
  Mat mat;
  int line = 0;
};

struct ConfigBlock {
  std::vector<std::pair<std::string, ConfigValue>> values;
  std::vector<std::pair<std::string, ConfigBlock>> blocks;
  int line = 0;

  const ConfigValue* find(const std::string& key) const {
    for (const auto& kv : values)
      if (kv.first == key) return &kv.second;
    return nullptr;
  }
  const ConfigBlock* find_block(const std::string& key) const {
    for (const auto& kb : blocks)
      if (kb.first == key) return &kb.second;
    return nullptr;
  }
};

namespace detail {

struct ConfigLexer {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  explicit ConfigLexer(const std::string& t) : text(t) {}

  void skip_space() {
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (c == '\n') {
        ++line;
        ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_space();
    return pos >= text.size();
  }

  char peek() {
    skip_space();
    return pos < text.size() ? text[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw config_error("config line " + std::to_string(line) + ": " + msg);
  }

  std::string ident() {
    skip_space();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected identifier");
    return text.substr(start, pos - start);
  }

  void expect(char c) {
    skip_space();
    if (pos >= text.size() || text[pos] != c)
      fail(std::string("expected '") + c + "'");
    ++pos;
  }

  double number() {
    skip_space();
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos += static_cast<std::size_t>(end - begin);
    return v;
  }

  Mat matrix() {
    expect('[');
    std::vector<std::vector<double>> rows(1);
    while (true) {
      skip_space();
      if (pos >= text.size()) fail("unterminated matrix literal");
      const char c = text[pos];
      if (c == ']') {
        ++pos;
        break;
      }
      if (c == ';') {
        ++pos;
        rows.emplace_back();
        continue;
      }
      if (c == ',') {
        ++pos;
        continue;
      }
      rows.back().push_back(number());
    }
    if (rows.back().empty() && rows.size() > 1) rows.pop_back();
    const std::size_t nr = rows.size();
    const std::size_t nc = rows.empty() ? 0 : rows[0].size();
    if (nc == 0) fail("empty matrix literal");
    for (const auto& r : rows)
      if (r.size() != nc) fail("matrix rows have different lengths");
    Mat m(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) m(i, j) = rows[i][j];
    return m;
  }
};

inline void parse_block_body(ConfigLexer& lx, ConfigBlock* out, bool top_level) {
  while (true) {
    if (lx.eof()) {
      if (!top_level) lx.fail("unterminated block");
      return;
    }
    if (lx.peek() == '}') {
      if (top_level) lx.fail("unmatched '}'");
      return;
    }
    const int line = lx.line;
    std::string key = lx.ident();
    const char c = lx.peek();
    if (c == '{') {
      lx.expect('{');
      ConfigBlock child;
      child.line = line;
      parse_block_body(lx, &child, false);
      lx.expect('}');
      out->blocks.emplace_back(std::move(key), std::move(child));
      continue;
    }
    lx.expect('=');
    ConfigValue v;
    v.line = line;
    const char vc = lx.peek();
    if (vc == '[') {
      v.kind = ConfigValue::Kind::matrix;
      v.mat = lx.matrix();
    } else if (std::isalpha(static_cast<unsigned char>(vc)) || vc == '_' ||
               ((vc == '+' || vc == '-') &&
                !std::isdigit(static_cast<unsigned char>(
                    lx.pos + 1 < lx.text.size() ? lx.text[lx.pos + 1] : '\0')) &&
                (lx.pos + 1 >= lx.text.size() ||
                 lx.text[lx.pos + 1] != '.'))) {
      if (vc == '+' || vc == '-') {
        v.kind = ConfigValue::Kind::word;
        v.word = std::string(1, vc);
        ++lx.pos;
      } else {
        v.kind = ConfigValue::Kind::word;
        v.word = lx.ident();
      }
    } else {
      v.kind = ConfigValue::Kind::number;
      v.num = lx.number();
    }
    out->values.emplace_back(std::move(key), std::move(v));
  }
}

}  // namespace detail

inline ConfigBlock parse_config_text(const std::string& text) {
  detail::ConfigLexer lx(text);
  ConfigBlock root;
  detail::parse_block_body(lx, &root, true);
  return root;
}

/// Full problem description for the CLI: noise model, power budget, and
/// run options. Vhat may be given directly or as eigenvalues plus an
/// optional orthogonal basis; the given form is preserved on serialize.
struct ChannelConfig {
  ArmaNoiseModel model;
  double budget = 0.0;
  SignPolicy sign = SignPolicy::automatic;
  long steps = 1000000;
  std::uint64_t seed = 1;
  int nodes = 16384;
  int restarts = 0;
  bool vhat_eig_form = false;
  Vec vhat_eigs_in;
  Mat vhat_U_in;  // empty when not given
};

namespace detail {

inline double require_number(const ConfigBlock& b, const std::string& key,
                             const std::string& where) {
  const ConfigValue* v = b.find(key);
  if (!v) throw config_error(where + ": missing key '" + key + "'");
  if (v->kind != ConfigValue::Kind::number)
    throw config_error(where + ": '" + key + "' must be a number");
  return v->num;
}

inline Mat require_matrix(const ConfigBlock& b, const std::string& key,
                          const std::string& where) {
  const ConfigValue* v = b.find(key);
  if (!v) throw config_error(where + ": missing key '" + key + "'");
  if (v->kind != ConfigValue::Kind::matrix)
    throw config_error(where + ": '" + key + "' must be a matrix literal");
  return v->mat;
}

inline long checked_long(double v, const std::string& key) {
  if (v != std::floor(v) || v < 0 || v > 9.2e18)
    throw config_error("'" + key + "' must be a nonnegative integer");
  return static_cast<long>(v);
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_matrix(const Mat& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) s += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) s += ", ";
      s += fmt_double(m(i, j));
    }
  }
  return s + "]";
}

}  // namespace detail

inline ChannelConfig parse_channel_config(const std::string& text) {
  ConfigBlock root = parse_config_text(text);
  ChannelConfig cfg;

  for (const auto& kv : root.values)
    if (kv.first != "n" && kv.first != "budget")
      throw config_error("unknown top-level key '" + kv.first + "'");
  for (const auto& kb : root.blocks)
    if (kb.first != "noise" && kb.first != "options")
      throw config_error("unknown block '" + kb.first + "'");

  const long n = detail::checked_long(detail::require_number(root, "n", "config"), "n");
  if (n < 1 || n > 64) throw config_error("'n' must be between 1 and 64");
  cfg.budget = detail::require_number(root, "budget", "config");
  if (!(cfg.budget > 0.0)) throw config_error("budget must be positive");

  const ConfigBlock* noise = root.find_block("noise");
  if (!noise) throw config_error("missing 'noise' block");
  const long p = noise->find("p")
                     ? detail::checked_long(detail::require_number(*noise, "p", "noise"), "p")
                     : 0;
  const long q = noise->find("q")
                     ? detail::checked_long(detail::require_number(*noise, "q", "noise"), "q")
                     : 0;
  if (p > 32 || q > 32) throw config_error("'p' and 'q' must be at most 32");
  for (long i = 1; i <= p; ++i) {
    Mat f = detail::require_matrix(*noise, "F" + std::to_string(i), "noise");
    if (f.rows() != n || f.cols() != n)
      throw config_error("noise: F" + std::to_string(i) + " must be " +
                         std::to_string(n) + "x" + std::to_string(n));
    cfg.model.F.push_back(std::move(f));
  }
  for (long j = 1; j <= q; ++j) {
    Mat g = detail::require_matrix(*noise, "G" + std::to_string(j), "noise");
    if (g.rows() != n || g.cols() != n)
      throw config_error("noise: G" + std::to_string(j) + " must be " +
                         std::to_string(n) + "x" + std::to_string(n));
    cfg.model.G.push_back(std::move(g));
  }
  const bool has_full = noise->find("Vhat") != nullptr;
  const bool has_eigs = noise->find("Vhat_eigs") != nullptr;
  if (has_full == has_eigs)
    throw config_error("noise: give exactly one of 'Vhat' or 'Vhat_eigs'");
  if (has_full) {
    Mat v = detail::require_matrix(*noise, "Vhat", "noise");
    if (v.rows() != n || v.cols() != n)
      throw config_error("noise: Vhat must be " + std::to_string(n) + "x" + std::to_string(n));
    cfg.model.Vhat = std::move(v);
  } else {
    Mat ev = detail::require_matrix(*noise, "Vhat_eigs", "noise");
    if (ev.rows() != 1 && ev.cols() != 1)
      throw config_error("noise: Vhat_eigs must be a single row or column");
    Vec eigs = ev.rows() == 1 ? Vec(ev.transpose().col(0)) : Vec(ev.col(0));
    if (eigs.size() != n) throw config_error("noise: Vhat_eigs must have n entries");
    Mat U = Mat::Identity(n, n);
    if (noise->find("Vhat_U")) {
      U = detail::require_matrix(*noise, "Vhat_U", "noise");
      if (U.rows() != n || U.cols() != n)
        throw config_error("noise: Vhat_U must be " + std::to_string(n) + "x" + std::to_string(n));
      if (max_abs(U.transpose() * U - Mat::Identity(n, n)) > 1e-9)
        throw config_error("noise: Vhat_U must be orthogonal");
      cfg.vhat_U_in = U;
    }
    cfg.vhat_eig_form = true;
    cfg.vhat_eigs_in = eigs;
    cfg.model.Vhat = U * eigs.asDiagonal() * U.transpose();
    cfg.model.Vhat = 0.5 * (cfg.model.Vhat + cfg.model.Vhat.transpose());
  }
  for (const auto& kv : noise->values) {
    const std::string& k = kv.first;
    bool known = k == "p" || k == "q" || k == "Vhat" || k == "Vhat_eigs" || k == "Vhat_U";
    for (long i = 1; i <= p && !known; ++i) known = k == "F" + std::to_string(i);
    for (long j = 1; j <= q && !known; ++j) known = k == "G" + std::to_string(j);
    if (!known) throw config_error("noise: unknown key '" + k + "'");
  }
  if (!noise->blocks.empty())
    throw config_error("noise: unexpected nested block '" + noise->blocks[0].first + "'");

  if (const ConfigBlock* opt = root.find_block("options")) {
    for (const auto& kv : opt->values) {
      const std::string& k = kv.first;
      const ConfigValue& v = kv.second;
      if (k == "sign") {
        if (v.kind != ConfigValue::Kind::word ||
            (v.word != "auto" && v.word != "+" && v.word != "-"))
          throw config_error("options: sign must be auto, + or -");
        cfg.sign = v.word == "auto" ? SignPolicy::automatic
                                    : (v.word == "+" ? SignPolicy::plus : SignPolicy::minus);
      } else if (k == "steps") {
        cfg.steps = detail::checked_long(detail::require_number(*opt, k, "options"), k);
        if (cfg.steps < 1) throw config_error("options: steps must be positive");
      } else if (k == "seed") {
        cfg.seed = static_cast<std::uint64_t>(
            detail::checked_long(detail::require_number(*opt, k, "options"), k));
      } else if (k == "nodes") {
        cfg.nodes = static_cast<int>(
            detail::checked_long(detail::require_number(*opt, k, "options"), k));
        if (cfg.nodes < 16 || cfg.nodes % 2 != 0)
          throw config_error("options: nodes must be even and at least 16");
      } else if (k == "restarts") {
        cfg.restarts = static_cast<int>(
            detail::checked_long(detail::require_number(*opt, k, "options"), k));
      } else {
        throw config_error("options: unknown key '" + k + "'");
      }
    }
    if (!opt->blocks.empty())
      throw config_error("options: unexpected nested block");
  }

  try {
    require_valid(cfg.model);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  return cfg;
}

inline std::string serialize(const ChannelConfig& cfg) {
  std::string s;
  s += "n = " + std::to_string(cfg.model.n()) + "\n";
  s += "budget = " + detail::fmt_double(cfg.budget) + "\n";
  s += "noise {\n";
  s += "  p = " + std::to_string(cfg.model.p()) + "\n";
  s += "  q = " + std::to_string(cfg.model.q()) + "\n";
  for (int i = 1; i <= cfg.model.p(); ++i)
    s += "  F" + std::to_string(i) + " = " + detail::fmt_matrix(cfg.model.F[i - 1]) + "\n";
  for (int j = 1; j <= cfg.model.q(); ++j)
    s += "  G" + std::to_string(j) + " = " + detail::fmt_matrix(cfg.model.G[j - 1]) + "\n";
  if (cfg.vhat_eig_form) {
    s += "  Vhat_eigs = " + detail::fmt_matrix(cfg.vhat_eigs_in.transpose()) + "\n";
    if (cfg.vhat_U_in.size() > 0)
      s += "  Vhat_U = " + detail::fmt_matrix(cfg.vhat_U_in) + "\n";
  } else {
    s += "  Vhat = " + detail::fmt_matrix(cfg.model.Vhat) + "\n";
  }
  s += "}\n";
  s += "options {\n";
  s += std::string("  sign = ") +
       (cfg.sign == SignPolicy::automatic ? "auto" : (cfg.sign == SignPolicy::plus ? "+" : "-")) +
       "\n";
  s += "  steps = " + std::to_string(cfg.steps) + "\n";
  s += "  seed = " + std::to_string(cfg.seed) + "\n";
  s += "  nodes = " + std::to_string(cfg.nodes) + "\n";
  s += "  restarts = " + std::to_string(cfg.restarts) + "\n";
  s += "}\n";
  return s;
}

}  // namespace acgn
