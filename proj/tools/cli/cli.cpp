#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>

#include "output.hpp"
#include "typesize/codec.hpp"
#include "typesize/container.hpp"
#include "typesize/errors.hpp"
#include "typesize/family_io.hpp"
#include "typesize/markov.hpp"
#include "typesize/quantized_types.hpp"
#include "typesize/rate_analysis.hpp"

namespace typesize::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string spec;
  std::string mode = "quantized";
  double s = 1.0;
  std::vector<double> anchor;
  std::uint32_t n = 0;
  std::vector<std::uint32_t> n_grid;
  double epsilon = 0.1;
  std::uint64_t seed = 1;
  std::uint64_t budget_compositions = EnumerationBudget{}.compositions;
  std::uint64_t budget_paths = PathBudget{}.paths;
  std::string out;
  std::string in;
  std::vector<double> theta;
  std::uint64_t samples = 0;
};

enum class Command { validate, encode, decode, rate, fit, check, index };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::uint32_t> blocklengths(const RunConfig& cfg) {
  if (!cfg.n_grid.empty()) return cfg.n_grid;
  if (cfg.n > 0) return {cfg.n};
  return {};
}

double rho_of(const FamilyDocument& doc) {
  return doc.kind == FamilyKind::markov ? doc.markov->rho_max() : doc.family->rho_max();
}

// Every problem with the run configuration, reported together.
void validate_config(Command cmd, const RunConfig& cfg, const FamilyDocument& doc) {
  std::vector<std::string> problems;
  PartitionMode mode = PartitionMode::quantized;
  try {
    mode = parse_partition_mode(cfg.mode);
  } catch (const DomainError& e) {
    problems.emplace_back(e.what());
  }
  const bool markov_doc = doc.kind == FamilyKind::markov;
  if (markov_doc != (mode == PartitionMode::markov) && cmd != Command::validate && cmd != Command::decode) {
    problems.emplace_back(markov_doc ? "Markov family documents need --mode markov"
                                     : "--mode markov needs a Markov family document");
  }
  if (mode != PartitionMode::point && !(cfg.s > 0.0 && std::isfinite(cfg.s))) {
    problems.emplace_back("--s must be a positive finite real");
  }
  if (!cfg.anchor.empty() && cfg.anchor.size() != doc.dim()) {
    problems.emplace_back("--anchor needs " + std::to_string(doc.dim()) + " coordinates");
  }
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) problems.emplace_back("--epsilon must lie in (0, 1)");
  if (cfg.n > 0 && !cfg.n_grid.empty()) problems.emplace_back("--n and --n-grid are mutually exclusive");
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] == 0) problems.emplace_back("--n-grid entries must be positive");
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1]) problems.emplace_back("--n-grid must be strictly increasing");
  }
  const bool needs_n = cmd == Command::rate || cmd == Command::fit || cmd == Command::check || cmd == Command::index;
  if (needs_n && blocklengths(cfg).empty()) problems.emplace_back("--n or --n-grid is required");
  if (cmd == Command::fit && cfg.n_grid.size() < 3) problems.emplace_back("fit needs --n-grid with at least 3 values");
  if (cmd == Command::index && !cfg.n_grid.empty()) problems.emplace_back("index takes a single --n");
  const bool needs_theta = cmd == Command::rate || cmd == Command::fit;
  if (needs_theta && cfg.theta.empty()) problems.emplace_back("--theta is required");
  if (!cfg.theta.empty()) {
    if (cfg.theta.size() != doc.dim()) {
      problems.emplace_back("--theta needs " + std::to_string(doc.dim()) + " coordinates");
    } else if (to_vector(cfg.theta).norm() > rho_of(doc)) {
      problems.emplace_back("--theta lies outside the parameter ball of radius rho_max");
    }
  }
  if (cfg.samples > 0 && cfg.samples < 10'000) problems.emplace_back("--samples must be 0 or at least 10000");
  if ((cmd == Command::encode || cmd == Command::decode) && cfg.in.empty()) problems.emplace_back("--in is required");
  if ((cmd == Command::encode || cmd == Command::decode) && cfg.out.empty()) problems.emplace_back("--out is required");
  if (cfg.budget_compositions == 0) problems.emplace_back("--budget-compositions must be positive");
  if (cfg.budget_paths == 0) problems.emplace_back("--budget-paths must be positive");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw UsageError(msg);
  }
}

IndexConfig index_config(const RunConfig& cfg, const FamilyDocument& doc) {
  IndexConfig ic;
  ic.mode = parse_partition_mode(cfg.mode);
  ic.s = cfg.s;
  if (!cfg.anchor.empty()) ic.anchor = to_vector(cfg.anchor);
  ic.budget.compositions = cfg.budget_compositions;
  if (ic.mode == PartitionMode::point) {
    if (!doc.exact) {
      throw SchemaError("point mode needs an exact decomposition: an \"exact\" block or exact tau entries");
    }
    ic.lattice = derive_lattice(*doc.family, *doc.exact);
  }
  return ic;
}

Grid markov_grid(const RunConfig& cfg, const FamilyDocument& doc, std::uint32_t n) {
  Eigen::VectorXd anchor = cfg.anchor.empty() ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(doc.dim()))
                                              : to_vector(cfg.anchor);
  return make_grid(n, cfg.s, anchor);
}

PathBudget path_budget(const RunConfig& cfg) {
  PathBudget b;
  b.paths = cfg.budget_paths;
  return b;
}

void emit(const RunConfig& cfg, const std::string& name, const Report& report) {
  if (cfg.out.empty()) return;
  fs::create_directories(cfg.out);
  write_atomic(fs::path(cfg.out) / name, report.text());
}

Sequence parse_symbols(const std::string& text, std::size_t alphabet) {
  Sequence seq;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || v < 1 || v > alphabet) {
      throw SchemaError("symbol file: '" + token + "' is not a symbol in 1.." + std::to_string(alphabet));
    }
    seq.push_back(static_cast<Symbol>(v));
  }
  if (seq.empty()) throw SchemaError("symbol file is empty");
  return seq;
}

std::string format_symbols(const Sequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(seq[i]);
  }
  out += '\n';
  return out;
}

int cmd_validate(const FamilyDocument& doc, std::ostream& out) {
  Report r("validate");
  r.add("kind", doc.kind == FamilyKind::markov ? "markov" : "iid");
  r.add("spec_hash", to_hex(doc.hash));
  if (doc.kind == FamilyKind::iid) {
    r.add("alphabet_size", std::to_string(doc.family->alphabet_size()));
    r.add("d", std::to_string(doc.family->dim()));
    r.add("rho_max", doc.family->rho_max());
    r.add("kappa", doc.family->kappa());
    if (doc.exact) {
      const LatticeMap lmap = derive_lattice(*doc.family, *doc.exact);
      r.add("d_prime", std::to_string(lmap.d_prime));
      for (const auto& diag : lmap.diagnostics) r.add("diagnostic", diag);
    } else {
      r.add("d_prime", "unknown");
    }
  } else {
    r.add("alphabet_size", std::to_string(doc.markov->alphabet_size()));
    r.add("d", std::to_string(doc.markov->dim()));
    r.add("rho_max", doc.markov->rho_max());
    r.add("x0", std::to_string(doc.markov->x0()));
  }
  r.add("status", "valid");
  out << r.text();
  return kOk;
}

int cmd_encode(const RunConfig& cfg, const FamilyDocument& doc, std::ostream& out) {
  const std::size_t k = doc.kind == FamilyKind::markov ? doc.markov->alphabet_size() : doc.family->alphabet_size();
  const Sequence seq = parse_symbols(read_file(cfg.in), k);
  if (cfg.n > 0 && cfg.n != seq.size()) {
    throw SchemaError("symbol file holds " + std::to_string(seq.size()) + " symbols, --n says " + std::to_string(cfg.n));
  }
  const auto n = static_cast<std::uint32_t>(seq.size());
  Container c;
  c.spec_hash = doc.hash;
  c.mode = parse_partition_mode(cfg.mode);
  c.n = n;
  c.anchor = cfg.anchor.empty() ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(doc.dim())) : to_vector(cfg.anchor);
  std::size_t classes = 0;
  if (c.mode == PartitionMode::markov) {
    c.s = cfg.s;
    c.x0 = doc.markov->x0();
    auto index = std::make_shared<const MarkovTypeIndex>(
        MarkovTypeIndex::exhaustive(*doc.markov, markov_grid(cfg, doc, n), path_budget(cfg)));
    classes = index->class_count();
    c.word = MarkovCodec(index).encode(seq);
  } else {
    const IndexConfig ic = index_config(cfg, doc);
    if (c.mode == PartitionMode::point) {
      c.s = 0.0;
      c.anchor.setZero();
    } else {
      c.s = cfg.s;
    }
    auto index = std::make_shared<const TypeIndex>(build_index(*doc.family, ic, n));
    classes = index->class_count();
    c.word = TypeSizeCodec(index).encode(seq);
  }
  write_atomic(cfg.out, write_container(c));
  Report r("encode");
  r.add("mode", to_string(c.mode));
  r.add("n", std::to_string(n));
  r.add("classes", std::to_string(classes));
  r.add("bits", std::to_string(c.word.length()));
  out << r.text();
  return kOk;
}

int cmd_decode(const RunConfig& cfg, const FamilyDocument& doc, std::ostream& out) {
  const std::string bytes = read_file(cfg.in);
  // The hash sits right after the magic; check it before trusting the rest.
  if (bytes.size() >= 36 && bytes.compare(0, 4, "TSZ1") == 0 &&
      !std::equal(doc.hash.begin(), doc.hash.end(), bytes.begin() + 4,
                  [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
    throw CorruptInputError("container was written for a different family (spec hash mismatch); refusing to decode");
  }
  const Container c = read_container(bytes, doc.dim());
  require_spec_hash(c, doc.hash);
  Sequence seq;
  if (c.mode == PartitionMode::markov) {
    if (doc.kind != FamilyKind::markov) throw CorruptInputError("Markov container for an i.i.d. family");
    if (c.x0 != doc.markov->x0()) throw CorruptInputError("container x0 differs from the family's x0");
    const Grid grid = make_grid(c.n, c.s, c.anchor);
    auto index = std::make_shared<const MarkovTypeIndex>(MarkovTypeIndex::exhaustive(*doc.markov, grid, path_budget(cfg)));
    seq = MarkovCodec(index).decode(c.word);
  } else {
    if (doc.kind != FamilyKind::iid) throw CorruptInputError("i.i.d. container for a Markov family");
    RunConfig local = cfg;
    local.mode = to_string(c.mode);
    local.s = c.s;
    local.anchor.assign(c.anchor.data(), c.anchor.data() + c.anchor.size());
    if (c.mode == PartitionMode::quantized && !(c.s > 0.0 && std::isfinite(c.s))) {
      throw CorruptInputError("container grid side is not a positive finite real");
    }
    auto index = std::make_shared<const TypeIndex>(build_index(*doc.family, index_config(local, doc), c.n));
    seq = TypeSizeCodec(index).decode(c.word);
  }
  write_atomic(cfg.out, format_symbols(seq));
  Report r("decode");
  r.add("mode", to_string(c.mode));
  r.add("n", std::to_string(c.n));
  r.add("bits", std::to_string(c.word.length()));
  out << r.text();
  return kOk;
}

void add_rate_row(Report& report, const RateReport& r) {
  report.row({{"n", std::to_string(r.n)},
              {"M", r.M.get_str()},
              {"log2_M", fmt(log2(r.M))},
              {"gamma", fmt(r.gamma)},
              {"rate", fmt(r.rate)},
              {"closed_form_rate", fmt(r.closed_form_rate)}});
}

int cmd_rate(const RunConfig& cfg, const FamilyDocument& doc, std::ostream& out) {
  Report report("rate");
  report.add("spec_hash", to_hex(doc.hash));
  report.add("mode", cfg.mode);
  report.add("s", cfg.s);
  report.add("epsilon", cfg.epsilon);
  const Eigen::VectorXd theta = to_vector(cfg.theta);
  std::vector<RateReport> rows;
  for (std::uint32_t n : blocklengths(cfg)) {
    if (doc.kind == FamilyKind::markov) {
      const auto index = MarkovTypeIndex::exhaustive(*doc.markov, markov_grid(cfg, doc, n), path_budget(cfg));
      rows.push_back(markov_eps_rate(index, theta, cfg.epsilon));
    } else {
      const SourceSpec src{*doc.family, ParamVector(*doc.family, theta)};
      rows.push_back(m_eps(src, build_index(*doc.family, index_config(cfg, doc), n), cfg.epsilon));
    }
    add_rate_row(report, rows.back());
  }
  out << "       n  log2 M        gamma         rate  closed_form   M\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%8u  %-12.6g %-12.6g %-12.6g %-14.6g ", r.n, log2(r.M), r.gamma, r.rate,
                  r.closed_form_rate);
    out << line << r.M.get_str() << "\n";
  }
  emit(cfg, "rate.report", report);
  return kOk;
}

int cmd_fit(const RunConfig& cfg, const FamilyDocument& doc, std::ostream& out) {
  const Eigen::VectorXd theta = to_vector(cfg.theta);
  ThirdOrderFit fit;
  if (doc.kind == FamilyKind::markov) {
    fit = markov_third_order_fit(*doc.markov, theta, cfg.s, cfg.n_grid, cfg.epsilon, path_budget(cfg));
  } else {
    const SourceSpec src{*doc.family, ParamVector(*doc.family, theta)};
    fit = third_order_fit(src, index_config(cfg, doc), cfg.n_grid, cfg.epsilon);
  }
  Report report("fit");
  report.add("spec_hash", to_hex(doc.hash));
  report.add("mode", cfg.mode);
  report.add("s", cfg.s);
  report.add("epsilon", cfg.epsilon);
  report.add("entropy", fit.entropy);
  report.add("dispersion", fit.dispersion);
  report.add("slope", fit.slope);
  report.add("intercept", fit.intercept);
  for (std::size_t i = 0; i < fit.points.size(); ++i) {
    const auto& p = fit.points[i];
    report.row({{"n", std::to_string(p.n)},
                {"rate", fmt(p.rate)},
                {"closed_form_rate", fmt(p.closed_form_rate)},
                {"y", fmt(p.y)},
                {"residual", fmt(fit.residuals[i])}});
  }
  out << "slope " << fmt(fit.slope) << "  intercept " << fmt(fit.intercept) << "\n";
  out << "       n         rate            y     residual\n";
  for (std::size_t i = 0; i < fit.points.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "%8u %12.6g %12.6g %12.6g\n", fit.points[i].n, fit.points[i].rate,
                  fit.points[i].y, fit.residuals[i]);
    out << line;
  }
  emit(cfg, "fit.report", report);
  if (!cfg.out.empty()) {
    write_atomic(fs::path(cfg.out) / "fit.svg", fit_svg(fit, "third-order fit, mode " + cfg.mode));
  }
  return kOk;
}

int cmd_check(const RunConfig& cfg, const FamilyDocument& doc, std::ostream& out) {
  Report report("check");
  report.add("spec_hash", to_hex(doc.hash));
  report.add("s", cfg.s);
  if (doc.kind == FamilyKind::markov) {
    if (cfg.theta.empty()) throw UsageError("check on a Markov family needs --theta");
    const Eigen::MatrixXd P = transition_matrix(*doc.markov, to_vector(cfg.theta));
    report.add("entropy_rate", entropy_rate(P));
    report.add("varentropy_rate", varentropy_rate(P));
    out << report.text();
    emit(cfg, "check.report", report);
    return kOk;
  }
  const FamilySpec& spec = *doc.family;
  EnumerationBudget budget;
  budget.compositions = cfg.budget_compositions;
  out << "       n   ml_max_gap   bound(2ks)  violations  sandwich";
  if (cfg.samples > 0) out << "   normality  normality*sqrt(n)";
  out << "\n";
  for (std::uint32_t n : blocklengths(cfg)) {
    const Grid grid = cfg.anchor.empty() ? make_grid(spec.dim(), n, cfg.s) : make_grid(n, cfg.s, to_vector(cfg.anchor));
    const MlApproxReport ml = ml_approx_check(spec, grid, budget);
    const double sandwich = max_sandwich_gap(build_type_index(spec, grid, budget));
    std::vector<std::pair<std::string, std::string>> row{{"n", std::to_string(n)},
                                                         {"ml_max_gap", fmt(ml.max_gap)},
                                                         {"ml_min_gap", fmt(ml.min_gap)},
                                                         {"ml_bound", fmt(ml.bound)},
                                                         {"ml_violations", std::to_string(ml.violations)},
                                                         {"sandwich_max_gap", fmt(sandwich)}};
    char line[160];
    std::snprintf(line, sizeof line, "%8u %12.6g %12.6g %11zu %9.6g", n, ml.max_gap, ml.bound, ml.violations,
                  sandwich);
    out << line;
    if (cfg.samples > 0) {
      if (cfg.theta.empty()) throw UsageError("normality check needs --theta");
      const SourceSpec src{spec, ParamVector(spec, to_vector(cfg.theta))};
      const double dev = normality_check(src, n, cfg.samples, cfg.seed);
      row.emplace_back("normality", fmt(dev));
      row.emplace_back("normality_scaled", fmt(dev * std::sqrt(static_cast<double>(n))));
      std::snprintf(line, sizeof line, " %11.6g %18.6g", dev, dev * std::sqrt(static_cast<double>(n)));
      out << line;
    }
    out << "\n";
    report.row(row);
  }
  if (cfg.samples > 0) {
    report.add("samples", std::to_string(cfg.samples));
    report.add("seed", std::to_string(cfg.seed));
  }
  emit(cfg, "check.report", report);
  return kOk;
}

int cmd_index(const RunConfig& cfg, const FamilyDocument& doc, std::ostream& out) {
  const std::uint32_t n = blocklengths(cfg).front();
  std::ostringstream table;
  if (doc.kind == FamilyKind::markov) {
    const auto index = MarkovTypeIndex::exhaustive(*doc.markov, markov_grid(cfg, doc, n), path_budget(cfg));
    table << "# typesize type-index v1\n# mode=markov n=" << n << " classes=" << index.class_count()
          << " s=" << fmt(cfg.s) << "\n";
    for (std::size_t c = 0; c < index.class_count(); ++c) {
      const auto key = index.key(c);
      for (std::size_t j = 0; j < key.size(); ++j) table << (j ? "," : "") << key[j];
      table << "\t" << index.class_size(c) << "\n";
    }
  } else {
    write_type_index_table(build_index(*doc.family, index_config(cfg, doc), n), table);
  }
  if (cfg.out.empty()) {
    out << table.str();
  } else {
    write_atomic(cfg.out, table.str());
  }
  return kOk;
}

void add_options(CLI::App* sub, RunConfig& cfg, Command cmd) {
  sub->add_option("--spec", cfg.spec, "family document (JSON)")->required();
  if (cmd == Command::validate) return;
  sub->add_option("--mode", cfg.mode, "quantized | point | markov");
  sub->add_option("--s", cfg.s, "cuboid side multiplier");
  sub->add_option("--anchor", cfg.anchor, "grid anchor, comma-separated")->delimiter(',');
  sub->add_option("--n", cfg.n, "blocklength");
  sub->add_option("--n-grid", cfg.n_grid, "blocklengths, comma-separated")->delimiter(',');
  sub->add_option("--epsilon", cfg.epsilon, "excess-length probability");
  sub->add_option("--seed", cfg.seed, "Monte Carlo seed");
  sub->add_option("--budget-compositions", cfg.budget_compositions, "composition enumeration budget");
  sub->add_option("--budget-paths", cfg.budget_paths, "Markov path enumeration budget");
  sub->add_option("--out", cfg.out, "output file (encode, decode, index) or directory");
  sub->add_option("--in", cfg.in, "input symbol file (encode) or container (decode)");
  sub->add_option("--theta", cfg.theta, "true parameter, comma-separated")->delimiter(',');
  sub->add_option("--samples", cfg.samples, "Monte Carlo samples for the normality check");
}

int dispatch(Command cmd, const RunConfig& cfg, std::ostream& out) {
  const FamilyDocument doc = load_family_document(cfg.spec);
  if (cmd == Command::validate) return cmd_validate(doc, out);
  validate_config(cmd, cfg, doc);
  switch (cmd) {
    case Command::encode: return cmd_encode(cfg, doc, out);
    case Command::decode: return cmd_decode(cfg, doc, out);
    case Command::rate: return cmd_rate(cfg, doc, out);
    case Command::fit: return cmd_fit(cfg, doc, out);
    case Command::check: return cmd_check(cfg, doc, out);
    case Command::index: return cmd_index(cfg, doc, out);
    case Command::validate: break;
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Type Size code: universal one-to-one compression over exponential families", "tsz"};
  app.require_subcommand(1);
  RunConfig cfg;
  const std::vector<std::pair<Command, std::pair<const char*, const char*>>> commands = {
      {Command::validate, {"validate", "check a family document"}},
      {Command::encode, {"encode", "encode a symbol file into a container"}},
      {Command::decode, {"decode", "decode a container into a symbol file"}},
      {Command::rate, {"rate", "exact epsilon-rate and M(epsilon)"}},
      {Command::fit, {"fit", "third-order slope fit with an SVG plot"}},
      {Command::check, {"check", "ML approximation, sandwich and normality checks"}},
      {Command::index, {"index", "export the type-class table"}},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [cmd, names] : commands) {
    CLI::App* sub = app.add_subcommand(names.first, names.second);
    add_options(sub, cfg, cmd);
    subs.emplace_back(sub, cmd);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  Command cmd = Command::validate;
  for (const auto& [sub, c] : subs) {
    if (sub->parsed()) cmd = c;
  }
  try {
    return dispatch(cmd, cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kSchema;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << "\n";
    return kResource;
  } catch (const CorruptInputError& e) {
    err << "corrupt input: " << e.what() << "\n";
    return kCorrupt;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::bad_alloc&) {
    err << "resource error: out of memory\n";
    return kResource;
  } catch (const Error& e) {
    err << "invariant error: " << e.what() << "\n";
    return kInvariant;
  }
}

}  // namespace typesize::cli
