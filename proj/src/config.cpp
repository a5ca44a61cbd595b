#include "mh/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mh/binary_io.hpp"
#include "mh/errors.hpp"
#include "mh/hash.hpp"

namespace mh {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void fail(const std::vector<std::string>& errors) {
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw ConfigError(msg);
}

// Typed access to one section; remembers which keys were read.
class Section {
 public:
  Section(const IniFile& ini, std::string name, std::vector<std::string>& errors)
      : name_(std::move(name)), errors_(errors) {
    auto it = ini.sections.find(name_);
    if (it != ini.sections.end()) values_ = &it->second;
  }

  bool present() const { return values_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!values_) return std::nullopt;
    auto it = values_->find(key);
    if (it == values_->end()) return std::nullopt;
    return it->second;
  }

  void get(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void get(const std::string& key, double& out) {
    auto v = raw(key);
    if (!v) return;
    double x = 0.0;
    const char* end = v->data() + v->size();
    auto [p, ec] = std::from_chars(v->data(), end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x))
      bad(key, *v, "a finite number");
    else
      out = x;
  }

  void get(const std::string& key, int& out) {
    auto v = raw(key);
    if (!v) return;
    int x = 0;
    const char* end = v->data() + v->size();
    auto [p, ec] = std::from_chars(v->data(), end, x);
    if (ec != std::errc() || p != end)
      bad(key, *v, "an integer");
    else
      out = x;
  }

  void get(const std::string& key, std::uint64_t& out) {
    auto v = raw(key);
    if (!v) return;
    std::uint64_t x = 0;
    const char* end = v->data() + v->size();
    auto [p, ec] = std::from_chars(v->data(), end, x);
    if (ec != std::errc() || p != end)
      bad(key, *v, "an unsigned 64-bit integer");
    else
      out = x;
  }

  void get(const std::string& key, bool& out) {
    auto v = raw(key);
    if (!v) return;
    const std::string s = lower(*v);
    if (s == "true" || s == "yes" || s == "on" || s == "1")
      out = true;
    else if (s == "false" || s == "no" || s == "off" || s == "0")
      out = false;
    else
      bad(key, *v, "a boolean");
  }

  void get(const std::string& key, std::vector<int>& out) {
    auto v = raw(key);
    if (!v) return;
    std::vector<int> xs;
    std::stringstream ss(*v);
    std::string item;
    bool ok = true;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      int x = 0;
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
      if (t.empty() || ec != std::errc() || p != t.data() + t.size()) ok = false;
      xs.push_back(x);
    }
    if (!ok)
      bad(key, *v, "a comma-separated list of integers");
    else
      out = std::move(xs);
  }

  void check_unknown() {
    if (!values_) return;
    for (const auto& [k, v] : *values_)
      if (!used_.count(k)) errors_.push_back("[" + name_ + "] unknown key '" + k + "'");
  }

  void require(bool cond, const std::string& msg) {
    if (!cond) errors_.push_back("[" + name_ + "] " + msg);
  }

 private:
  void bad(const std::string& key, const std::string& v, const char* what) {
    errors_.push_back("[" + name_ + "] " + key + " = '" + v + "' is not " + what);
  }

  std::string name_;
  std::vector<std::string>& errors_;
  const std::map<std::string, std::string>* values_ = nullptr;
  std::set<std::string> used_;
};

void check_sections(const IniFile& ini, std::initializer_list<const char*> allowed, std::vector<std::string>& errors) {
  for (const auto& [name, kv] : ini.sections) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return name == a; }))
      errors.push_back("unknown section [" + name + "]");
  }
}

void read_initial(Section& s, InitialSpec& init) {
  std::string kind = "random";
  s.get("kind", kind);
  s.get("L", init.L);
  s.get("gamma", init.gamma);
  s.get("seed", init.seed);
  s.get("zero_momentum", init.zero_momentum);
  s.get("path", init.path);
  s.get("expression", init.expression);
  if (kind == "random") {
    init.kind = InitialSpec::Kind::kRandom;
    s.require(init.L >= 1, "L must be >= 1");
    s.require(init.gamma >= 0.0, "gamma must be >= 0");
  } else if (kind == "file") {
    init.kind = InitialSpec::Kind::kFile;
    s.require(!init.path.empty(), "kind = file needs a path");
  } else if (kind == "expression") {
    init.kind = InitialSpec::Kind::kExpression;
    s.require(!init.expression.empty(), "kind = expression needs an expression");
    if (!init.expression.empty()) {
      try {
        parse_expression(init.expression);
      } catch (const ConfigError& e) {
        s.require(false, e.what());
      }
    }
  } else {
    s.require(false, "kind must be random, file or expression (got '" + kind + "')");
  }
}

void canonical_initial(std::ostringstream& os, const InitialSpec& init) {
  os << "[initial]\n";
  switch (init.kind) {
    case InitialSpec::Kind::kRandom:
      os << "kind = random\nL = " << init.L << "\ngamma = " << format_double(init.gamma) << "\nseed = " << init.seed
         << "\nzero_momentum = " << (init.zero_momentum ? "true" : "false") << "\n";
      break;
    case InitialSpec::Kind::kFile:
      os << "kind = file\npath = " << init.path << "\n";
      break;
    case InitialSpec::Kind::kExpression:
      os << "kind = expression\nexpression = " << init.expression << "\n";
      break;
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

IniFile IniFile::parse(std::string_view text) {
  IniFile ini;
  std::vector<std::string> errors;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      ini.sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    if (section.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": key outside of any section");
      continue;
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    auto& sec = ini.sections[section];
    if (sec.count(key)) errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    sec[key] = trim(std::string_view(t).substr(eq + 1));
  }
  if (!errors.empty()) fail(errors);
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

SphField parse_expression(std::string_view expr) {
  struct Term {
    double c;
    int l, m;
    bool constant;
  };
  std::vector<Term> terms;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < expr.size() && std::isspace(static_cast<unsigned char>(expr[i]))) ++i;
  };
  auto err = [&](const std::string& what) {
    throw ConfigError("expression '" + std::string(expr) + "': " + what + " at position " + std::to_string(i));
  };
  auto number = [&](double& out) {
    const char* b = expr.data() + i;
    auto [p, ec] = std::from_chars(b, expr.data() + expr.size(), out);
    if (ec != std::errc()) return false;
    i += static_cast<std::size_t>(p - b);
    return true;
  };
  auto integer = [&](int& out) {
    skip();
    const char* b = expr.data() + i;
    auto [p, ec] = std::from_chars(b, expr.data() + expr.size(), out);
    if (ec != std::errc()) err("expected integer");
    i += static_cast<std::size_t>(p - b);
    skip();
  };

  skip();
  if (i == expr.size()) err("empty expression");
  bool first = true;
  while (true) {
    skip();
    if (i == expr.size()) break;
    double sign = 1.0;
    if (expr[i] == '+' || expr[i] == '-') {
      sign = expr[i] == '-' ? -1.0 : 1.0;
      ++i;
      skip();
    } else if (!first) {
      err("expected + or -");
    }
    first = false;
    double c = 1.0;
    bool have_number = number(c);
    skip();
    if (have_number && (i == expr.size() || expr[i] == '+' || expr[i] == '-')) {
      terms.push_back({sign * c, 0, 0, true});
      continue;
    }
    if (have_number) {
      if (i >= expr.size() || expr[i] != '*') err("expected '*'");
      ++i;
      skip();
    }
    if (i >= expr.size() || expr[i] != 'Y') err("expected Y(l,m)");
    ++i;
    skip();
    if (i >= expr.size() || expr[i] != '(') err("expected '('");
    ++i;
    int l = 0, m = 0;
    integer(l);
    if (i >= expr.size() || expr[i] != ',') err("expected ','");
    ++i;
    integer(m);
    if (i >= expr.size() || expr[i] != ')') err("expected ')'");
    ++i;
    if (l < 0 || std::abs(m) > l) err("invalid degree/order (" + std::to_string(l) + "," + std::to_string(m) + ")");
    terms.push_back({sign * c, l, m, false});
  }
  int L = 0;
  for (const auto& t : terms) L = std::max(L, t.l);
  SphField f(L);
  for (const auto& t : terms) f(t.l, t.m) += t.constant ? t.c * std::sqrt(kSphereArea) : t.c;
  return f;
}

SphField make_initial(const InitialSpec& spec, const std::string& base_dir) {
  switch (spec.kind) {
    case InitialSpec::Kind::kRandom:
      return random_smooth_field(spec.L, spec.gamma, spec.seed, spec.zero_momentum);
    case InitialSpec::Kind::kFile: {
      std::filesystem::path p(spec.path);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      return read_sphfield(p);
    }
    case InitialSpec::Kind::kExpression:
      return parse_expression(spec.expression);
  }
  throw std::logic_error("make_initial: unknown kind");
}

long long RunConfig::total_steps() const { return std::llround(T / h); }

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "[run]\nN = " << N << "\nh = " << format_double(h) << "\nT = " << format_double(T)
     << "\noutput_cadence = " << output_cadence << "\ncheckpoint_cadence = " << checkpoint_cadence << "\n";
  canonical_initial(os, initial);
  os << "[diagnostics]\nsplit = " << (split ? "true" : "false") << "\ngrid_dumps = " << (grid_dumps ? "true" : "false")
     << "\n";
  os << "[numerics]\ncluster_tol = " << format_double(cluster_tol) << "\nfp_tol = " << format_double(fp_tol)
     << "\nmax_iters = " << max_iters << "\nrestore_momentum = " << (restore_momentum ? "true" : "false") << "\n";
  return os.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical()); }

RunConfig run_config_from_ini(const IniFile& ini, std::optional<std::uint64_t> seed_override) {
  std::vector<std::string> errors;
  check_sections(ini, {"run", "initial", "diagnostics", "numerics"}, errors);
  RunConfig c;

  Section run(ini, "run", errors);
  if (!run.present()) errors.push_back("missing section [run]");
  run.get("N", c.N);
  run.get("h", c.h);
  run.get("T", c.T);
  run.get("output_cadence", c.output_cadence);
  run.get("checkpoint_cadence", c.checkpoint_cadence);
  run.get("output_dir", c.output_dir);
  run.require(c.N >= 2, "N must be >= 2");
  run.require(c.h > 0.0, "h must be > 0");
  run.require(c.T > 0.0, "T must be > 0");
  run.require(c.output_cadence >= 1, "output_cadence must be >= 1");
  run.require(c.checkpoint_cadence >= 1, "checkpoint_cadence must be >= 1");
  if (c.h > 0.0 && c.T > 0.0) {
    const double n = c.T / c.h;
    run.require(std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n), "T must be an integer multiple of h");
  }
  run.check_unknown();

  Section init(ini, "initial", errors);
  read_initial(init, c.initial);
  if (seed_override) c.initial.seed = *seed_override;
  init.check_unknown();

  Section diag(ini, "diagnostics", errors);
  diag.get("split", c.split);
  diag.get("grid_dumps", c.grid_dumps);
  diag.check_unknown();

  Section num(ini, "numerics", errors);
  num.get("cluster_tol", c.cluster_tol);
  num.get("fp_tol", c.fp_tol);
  num.get("max_iters", c.max_iters);
  num.get("restore_momentum", c.restore_momentum);
  num.require(c.cluster_tol > 0.0 && c.cluster_tol < 1.0, "cluster_tol must be in (0, 1)");
  num.require(c.fp_tol > 0.0 && c.fp_tol < 1.0, "fp_tol must be in (0, 1)");
  num.require(c.max_iters >= 1, "max_iters must be >= 1");
  num.check_unknown();

  if (!errors.empty()) fail(errors);
  return c;
}

std::string ConvergeConfig::canonical() const {
  std::ostringstream os;
  os << "[converge]\nkind = " << kind << "\nN_list = ";
  for (std::size_t k = 0; k < N_list.size(); ++k) os << (k ? "," : "") << N_list[k];
  os << "\nN_ref = " << N_ref << "\nt = " << format_double(t) << "\nh = " << format_double(h) << "\nL = " << L
     << "\ngamma = " << format_double(gamma) << "\nseed = " << seed << "\nseed2 = " << seed2 << "\nfield = " << field
     << "\nnorm = " << norm << "\nm = " << m << "\nm_max = " << m_max << "\n";
  return os.str();
}

std::uint64_t ConvergeConfig::hash() const { return fnv1a64(canonical()); }

ConvergeConfig converge_config_from_ini(const IniFile& ini, std::optional<std::uint64_t> seed_override) {
  std::vector<std::string> errors;
  check_sections(ini, {"converge"}, errors);
  ConvergeConfig c;
  Section s(ini, "converge", errors);
  if (!s.present()) errors.push_back("missing section [converge]");
  s.get("kind", c.kind);
  s.get("N_list", c.N_list);
  s.get("N_ref", c.N_ref);
  s.get("t", c.t);
  s.get("h", c.h);
  s.get("L", c.L);
  s.get("gamma", c.gamma);
  s.get("seed", c.seed);
  s.get("seed2", c.seed2);
  s.get("field", c.field);
  s.get("norm", c.norm);
  s.get("m", c.m);
  s.get("m_max", c.m_max);
  s.get("output_dir", c.output_dir);
  if (seed_override) c.seed = *seed_override;

  s.require(c.kind == "solution" || c.kind == "bracket" || c.kind == "spectral" || c.kind == "power",
            "kind must be solution, bracket, spectral or power");
  s.require(!c.N_list.empty(), "N_list must not be empty");
  for (std::size_t k = 0; k < c.N_list.size(); ++k) {
    if (c.N_list[k] < 2) s.require(false, "N_list entries must be >= 2");
    if (k > 0 && c.N_list[k] <= c.N_list[k - 1]) s.require(false, "N_list must be strictly increasing");
  }
  if (c.kind == "solution" && !c.N_list.empty())
    s.require(c.N_ref > c.N_list.back(), "N_ref must exceed every entry of N_list");
  s.require(c.t >= 0.0, "t must be >= 0");
  s.require(c.h > 0.0, "h must be > 0");
  s.require(c.L >= 1, "L must be >= 1");
  s.require(c.norm == "spectral" || c.norm == "L2", "norm must be spectral or L2");
  s.require(c.m >= 1, "m must be >= 1");
  s.require(c.m_max >= 1, "m_max must be >= 1");
  if (!c.field.empty()) {
    try {
      parse_expression(c.field);
    } catch (const ConfigError& e) {
      s.require(false, e.what());
    }
  }
  s.check_unknown();
  if (!errors.empty()) fail(errors);
  return c;
}

}  // namespace mh
