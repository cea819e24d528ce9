#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcompat/compat.hpp"
#include "qcompat/maxent.hpp"
#include "qcompat/pooling.hpp"
#include "qcompat/scenarios.hpp"
#include "qcompat/state_io.hpp"

namespace qcompat::cli {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Rounded to 12 significant digits so JSON agrees with the text forms.
ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(fmt12(v).c_str(), nullptr);
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json r = ordered_json::array(), c = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      r.push_back(num(m(i, j).real()));
      c.push_back(num(m(i, j).imag()));
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return {{"matrix_re", std::move(re)}, {"matrix_im", std::move(im)}};
}

enum class Format { Text, Csv, Json };

// One record of scalar fields (all formats) plus structured extras (JSON only).
class Report {
 public:
  void add(const std::string& key, double v) { fields_.push_back({key, fmt12(v), num(v)}); }
  void add(const std::string& key, long long v) { fields_.push_back({key, std::to_string(v), v}); }
  void add(const std::string& key, int v) { add(key, static_cast<long long>(v)); }
  void add(const std::string& key, bool v) { fields_.push_back({key, v ? "true" : "false", v}); }
  void add(const std::string& key, const std::string& v) { fields_.push_back({key, v, v}); }
  void add(const std::string& key, const char* v) { add(key, std::string(v)); }
  void extra(const std::string& key, ordered_json v) { extra_[key] = std::move(v); }
  void summary(std::string line) { summary_ = std::move(line); }

  std::string render(Format f) const {
    std::ostringstream os;
    switch (f) {
      case Format::Text:
        if (!summary_.empty()) os << summary_ << '\n';
        for (const auto& fl : fields_) os << fl.key << ": " << fl.text << '\n';
        break;
      case Format::Csv:
        for (std::size_t i = 0; i < fields_.size(); ++i) os << (i ? "," : "") << fields_[i].key;
        os << '\n';
        for (std::size_t i = 0; i < fields_.size(); ++i) os << (i ? "," : "") << fields_[i].text;
        os << '\n';
        break;
      case Format::Json: {
        ordered_json doc;
        for (const auto& fl : fields_) doc[fl.key] = fl.value;
        for (const auto& [k, v] : extra_.items()) doc[k] = v;
        os << doc.dump(2) << '\n';
        break;
      }
    }
    return os.str();
  }

 private:
  struct Field {
    std::string key;
    std::string text;
    ordered_json value;
  };
  std::vector<Field> fields_;
  ordered_json extra_ = ordered_json::object();
  std::string summary_;
};

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void row(std::vector<double> values) { rows_.push_back(std::move(values)); }

  std::string render(Format f) const {
    std::ostringstream os;
    if (f == Format::Json) {
      ordered_json doc = ordered_json::array();
      for (const auto& r : rows_) {
        ordered_json obj;
        for (std::size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = num(r[i]);
        doc.push_back(std::move(obj));
      }
      os << doc.dump(2) << '\n';
      return os.str();
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt12(r[i]);
      os << '\n';
    }
    return os.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

struct Config {
  std::string input;
  std::string output;
  std::string format;
  double tol = 1e-8;
  double rank_tol = 1e-9;
  std::uint64_t seed = 42;
  int samples = 10000;
  int theta_steps = 64;
  int trials = 100;
};

Format parse_format(const std::string& s, Format fallback) {
  if (s.empty()) return fallback;
  if (s == "text") return Format::Text;
  if (s == "csv") return Format::Csv;
  return Format::Json;
}

void add_certificate_summary(Report& rep, const StateSet& s, const CompatibilityReport& r) {
  ordered_json certs = ordered_json::array();
  for (std::size_t i = 0; i < r.dual_certificate.size() && i < s.size(); ++i) {
    const Matrix& m = r.dual_certificate[i];
    rep.add("M_" + s.labels()[i] + "_trace", m.trace().real());
    rep.add("M_" + s.labels()[i] + "_min_eig", min_eigenvalue(m));
    ordered_json entry = matrix_json(m);
    entry["label"] = s.labels()[i];
    certs.push_back(std::move(entry));
  }
  rep.extra("dual_certificate", std::move(certs));
  rep.extra("primal_witness", matrix_json(r.primal_witness));
}

Report measure(const Config& cfg, Criterion criterion) {
  const StateSet s = parse_state_file(cfg.input);
  CompatibilityReport r;
  switch (criterion) {
    case Criterion::BFM:
      r = k_bfm(s, cfg.tol);
      break;
    case Criterion::PP:
      r = k_pp(s, cfg.tol);
      break;
    case Criterion::ES:
      r = k_es(s, cfg.tol, cfg.rank_tol);
      break;
  }
  Report rep;
  rep.add("criterion", to_string(criterion));
  rep.add("states", static_cast<long long>(s.size()));
  rep.add("dim", static_cast<long long>(s.dim()));
  rep.add("value", r.value);
  rep.add("raw_value", r.raw_value);
  rep.add("dual_value", r.dual_value);
  rep.add("gap", r.gap);
  rep.add("status", sdp::to_string(r.status));
  rep.add("iterations", r.iterations);
  rep.add("primal_residual", r.primal_residual);
  rep.add("dual_residual", r.dual_residual);
  rep.add("tol", cfg.tol);
  if (criterion == Criterion::ES) rep.add("rank_tol", cfg.rank_tol);
  if (r.upper_bound_trace_distance) {
    rep.add("upper_bound_1_minus_D", *r.upper_bound_trace_distance);
    rep.add("bound_attained", r.bound_attained.value_or(false));
  }
  add_certificate_summary(rep, s, r);
  if (criterion == Criterion::ES) {
    double sum = 0.0;
    ordered_json alphas = ordered_json::array();
    for (double a : r.alphas) {
      sum += a;
      alphas.push_back(num(a));
    }
    rep.add("alpha_sum", sum);
    rep.extra("alphas", std::move(alphas));
  }
  return rep;
}

Report check(const Config& cfg) {
  const StateSet s = parse_state_file(cfg.input);
  const Index dim = supports_intersection_dim(s.states(), cfg.rank_tol);
  Report rep;
  rep.summary(std::string(dim > 0 ? "compatible" : "incompatible") + ", intersection dim " +
              std::to_string(dim));
  rep.add("compatible", dim > 0);
  rep.add("intersection_dim", static_cast<long long>(dim));
  rep.add("states", static_cast<long long>(s.size()));
  rep.add("dim", static_cast<long long>(s.dim()));
  rep.add("rank_tol", cfg.rank_tol);
  return rep;
}

Report maxent(const Config& cfg) {
  const ConstraintSet cs = parse_constraints_file(cfg.input);
  const MaxEntResult r = maxent_estimate(cs.constraints, cs.dim);
  Report rep;
  rep.add("dim", static_cast<long long>(cs.dim));
  rep.add("constraints", static_cast<long long>(cs.constraints.size()));
  rep.add("entropy", r.entropy);
  rep.add("iterations", r.iterations);
  rep.add("identity_multiplier", r.identity_multiplier);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.multipliers.size(); ++i) {
    rep.add("lambda_" + std::to_string(i + 1), r.multipliers[i]);
    worst = std::max(worst, std::abs(r.residuals[i]));
  }
  rep.add("max_constraint_residual", worst);
  rep.add("gibbs_residual", gibbs_residual(r.state, cs.constraints));
  rep.add("residual_tol", MaxEntOptions{}.residual_tol);
  rep.extra("state", matrix_json(r.state.matrix()));
  return rep;
}

Report pool(const Config& cfg) {
  const StateSet s = parse_state_file(cfg.input);
  if (s.size() != 2) {
    throw ValidationError(cfg.input, "pool needs exactly two states", static_cast<double>(s.size()));
  }
  const PoolingResult r = pool_measurement(s[0], s[1], cfg.tol, cfg.rank_tol);
  const MaximalityReport m = verify_r_maximality(r, cfg.trials, cfg.seed);
  Report rep;
  rep.add("k_value", r.k_value);
  rep.add("c", r.c);
  rep.add("c_closed_form", r.c_closed_form);
  rep.add("closed_form_agrees", r.closed_form_agrees);
  rep.add("p00", r.p00);
  rep.add("e01_e10_overlap_dim", static_cast<long long>(r.e01_e10_overlap));
  rep.add("gap", r.gap);
  rep.add("maximality_trials", m.trials);
  rep.add("maximality_violations", m.violations);
  rep.add("maximality_seed", static_cast<long long>(m.seed));
  rep.add("tol", cfg.tol);
  rep.add("rank_tol", cfg.rank_tol);
  rep.extra("joint_state", matrix_json(r.joint_state.matrix()));
  rep.extra("R", matrix_json(r.R));
  rep.extra("E00", matrix_json(r.E00));
  rep.extra("E01", matrix_json(r.E01));
  rep.extra("E10", matrix_json(r.E10));
  rep.extra("E11", matrix_json(r.E11));
  return rep;
}

Table fig1(const Config& cfg) {
  Table t({"theta", "k_avg", "stderr", "third_formula", "sphere_formula", "discrepant", "samples",
           "seed", "tol"});
  for (const auto& p : scenarios::fig1_curve(cfg.theta_steps, cfg.samples, cfg.seed, cfg.tol)) {
    t.row({p.theta, p.mc_mean, p.mc_stderr, p.third_formula, p.sphere_formula,
           static_cast<double>(p.discrepant), static_cast<double>(p.samples),
           static_cast<double>(cfg.seed), cfg.tol});
  }
  return t;
}

Table fig2(const Config& cfg) {
  Table t({"theta", "k_avg", "k00", "k01", "k10", "k11", "p00", "p01", "p10", "p11", "max_gap",
           "tol"});
  for (const auto& p : scenarios::fig2_curve(cfg.theta_steps, cfg.tol)) {
    t.row({p.theta, p.k_avg, p.k_pairs[0][0], p.k_pairs[0][1], p.k_pairs[1][0], p.k_pairs[1][1],
           p.probs[0][0], p.probs[0][1], p.probs[1][0], p.probs[1][1], p.max_gap, cfg.tol});
  }
  return t;
}

ordered_json error_object(const std::string& kind, const std::string& message, int code) {
  return {{"error", kind}, {"message", message}, {"exit_code", code}};
}

void emit(const std::string& text, const Config& cfg, std::ostream& out) {
  if (cfg.output.empty()) {
    out << text;
    return;
  }
  // Written in one piece after the computation succeeded.
  const std::filesystem::path path(cfg.output);
  const std::filesystem::path tmp = path.string() + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ParseError("cannot write " + tmp.string());
    f << text;
    if (!f.flush()) {
      std::filesystem::remove(tmp);
      throw ParseError("cannot write " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compatibility of quantum state assignments"};
  app.name("qcompat");
  app.require_subcommand(1);
  Config cfg;

  const std::vector<std::string> formats{"text", "csv", "json"};
  auto common = [&](CLI::App* sc, bool input) {
    if (input) sc->add_option("-i,--input", cfg.input, "input JSON file")->required()->check(CLI::ExistingFile);
    sc->add_option("-o,--output", cfg.output, "write the report here instead of stdout");
    sc->add_option("--format", cfg.format, "text, csv or json")->check(CLI::IsMember(formats));
    sc->add_option("--tol", cfg.tol, "SDP tolerance")->check(CLI::PositiveNumber);
    sc->add_option("--rank-tol", cfg.rank_tol, "relative rank tolerance")->check(CLI::PositiveNumber);
  };

  CLI::App* bfm = app.add_subcommand("bfm", "BFM compatibility measure");
  CLI::App* pp = app.add_subcommand("pp", "Post-Peierls compatibility measure");
  CLI::App* es = app.add_subcommand("es", "equal-support compatibility measure");
  CLI::App* chk = app.add_subcommand("check", "support-intersection compatibility test");
  CLI::App* mx = app.add_subcommand("maxent", "maximum-entropy state from constraints");
  CLI::App* pl = app.add_subcommand("pool", "measurement pooling of two states");
  for (CLI::App* sc : {bfm, pp, es, chk, mx, pl}) common(sc, true);
  pl->add_option("--seed", cfg.seed, "seed for the maximality probe");
  pl->add_option("--trials", cfg.trials, "maximality probe trials")->check(CLI::NonNegativeNumber);

  CLI::App* scen = app.add_subcommand("scenario", "reproduce a theta-parameterized experiment");
  scen->require_subcommand(1);
  CLI::App* f1 = scen->add_subcommand("fig1", "observable-sharing experiment, Monte Carlo over pure states");
  CLI::App* f2 = scen->add_subcommand("fig2", "unknown-order measurement experiment");
  for (CLI::App* sc : {f1, f2}) {
    common(sc, false);
    sc->add_option("--theta-steps", cfg.theta_steps, "grid points on [0, pi]")->check(CLI::PositiveNumber);
  }
  f1->add_option("--samples", cfg.samples, "Monte Carlo samples per theta")->check(CLI::PositiveNumber);
  f1->add_option("--seed", cfg.seed, "Monte Carlo seed");

  const bool json_errors = [&] {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--format" && args[i + 1] == "json") return true;
    }
    for (const auto& a : args) {
      if (a == "--format=json") return true;
    }
    return false;
  }();

  auto fail = [&](const std::string& kind, const std::string& message, int code,
                  const ordered_json& details = {}) {
    if (json_errors) {
      ordered_json e = error_object(kind, message, code);
      if (details.is_object()) {
        for (const auto& [k, v] : details.items()) e[k] = v;
      }
      err << e.dump() << '\n';
    } else {
      err << "qcompat: " << kind << ": " << message << '\n';
    }
    return code;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kValidationError);
  }

  try {
    std::string text;
    if (*bfm) text = measure(cfg, Criterion::BFM).render(parse_format(cfg.format, Format::Text));
    if (*pp) text = measure(cfg, Criterion::PP).render(parse_format(cfg.format, Format::Text));
    if (*es) text = measure(cfg, Criterion::ES).render(parse_format(cfg.format, Format::Text));
    if (*chk) text = check(cfg).render(parse_format(cfg.format, Format::Text));
    if (*mx) text = maxent(cfg).render(parse_format(cfg.format, Format::Text));
    if (*pl) text = pool(cfg).render(parse_format(cfg.format, Format::Text));
    if (*f1) text = fig1(cfg).render(parse_format(cfg.format, Format::Csv));
    if (*f2) text = fig2(cfg).render(parse_format(cfg.format, Format::Csv));
    emit(text, cfg, out);
    return kSuccess;
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), kValidationError,
                {{"label", e.label()}, {"invariant", e.invariant()}, {"measured", num(e.measured())}});
  } catch (const Infeasible& e) {
    return fail("infeasible", e.what(), kValidationError, {{"violation", num(e.violation())}});
  } catch (const BoundaryState& e) {
    return fail("boundary_state", e.what(), kSolverFailure);
  } catch (const SolverError& e) {
    return fail("solver", e.what(), kSolverFailure);
  } catch (const Error& e) {
    // ParseError, DimensionMismatch, NonHermitian, Incompatible: bad input
    return fail("input", e.what(), kValidationError);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kSolverFailure);
  }
}

}  // namespace qcompat::cli
