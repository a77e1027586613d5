// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "revlin/arena.hpp"
#include "revlin/baselines.hpp"
#include "revlin/error.hpp"
#include "revlin/inversion.hpp"
#include "revlin/kernels.hpp"
#include "revlin/matrix.hpp"
#include "revlin/program.hpp"
#include "revlin/regression.hpp"
#include "revlin/sampling.hpp"

namespace revlin::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kPivot = 2,
  kEngineFault = 3,
};

/// Raised by the commands to leave with a specific exit status.
struct Exit {
  int code;
  std::string message;
};

struct Options {
  std::vector<std::string> inputs;
  std::string metrics_path;
  bool verify = false;
  bool compare = false;
  bool timing = false;
  std::optional<int> decimal;
  // regress
  bool bias = false;
  std::string ridge = "0";
  // bench / verify
  std::string op = "all";
  std::size_t size = 4;
  std::size_t max_size = 32;
  std::size_t dim = 4;
  std::uint64_t seed = 1;
};

inline json report_json(const ResourceReport& r) {
  return json{{"primitive_ops", r.primitive_ops},     {"peak_live_cells", r.peak_live_cells},
              {"persistent_cells", r.persistent_cells}, {"transient_peak", r.transient_peak},
              {"garbage_cells", r.garbage_cells},     {"max_bits", r.max_bits}};
}

inline json trace_json(const TraceReport& t) {
  return json{{"destructive_writes", t.destructive_writes},
              {"irreversible_ops", t.irreversible_ops},
              {"peak_cells_irreversible", t.peak_cells_irreversible},
              {"peak_step_output", t.peak_step_output}};
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_string(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ArenaOptions arena_options_from_env() {
  ArenaOptions options;
  if (const char* limit = std::getenv("REVLIN_MAX_BITS"); limit != nullptr && *limit != '\0') {
    char* end = nullptr;
    const unsigned long long bits = std::strtoull(limit, &end, 10);
    if (*end != '\0' || bits == 0) {
      throw Exit{kUsage, std::string("REVLIN_MAX_BITS must be a positive integer, got '") + limit + "'"};
    }
    options.max_bits = static_cast<std::size_t>(bits);
  }
  return options;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Exit{kUsage, "cannot open '" + path + "'"};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Matrix load_matrix_file(const std::string& path) {
  try {
    return parse_matrix(read_file(path));
  } catch (const Error& e) {
    throw Exit{kUsage, path + ": " + e.what()};
  }
}

/// Header line, then one point per line: features..., target.
inline RegressionData parse_csv(const std::string& text, bool bias, const Rational& lambda) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  std::vector<std::vector<Rational>> rows;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (columns == 0) {
      columns = fields.size();
      continue;  // header
    }
    if (fields.size() != columns) {
      throw Error(Errc::kParse, "line " + std::to_string(line_no) + " has " +
                                    std::to_string(fields.size()) + " fields, header has " +
                                    std::to_string(columns));
    }
    std::vector<Rational> values;
    for (const auto& f : fields) values.push_back(parse_rational(f));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(Errc::kParse, "no data rows");
  const std::size_t features = columns - 1;
  if (features == 0 && !bias) {
    throw Error(Errc::kParse, "need at least one feature column (or --bias)");
  }
  Matrix points(rows.size(), features);
  std::vector<Rational> targets;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t f = 0; f < features; ++f) points(i, f) = rows[i][f];
    targets.push_back(rows[i].back());
  }
  return make_regression_data(points, targets, bias, lambda);
}

inline std::string join_values(const std::vector<Rational>& values, const std::optional<int>& decimal) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ", ";
    out += decimal ? to_decimal(values[i], *decimal) : to_string(values[i]);
  }
  return out;
}

inline void print_matrix(std::ostream& out, const Matrix& m, const std::optional<int>& decimal) {
  out << format_matrix(m);
  if (decimal) {
    out << "# approximate, " << *decimal << " decimal digits:\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
      out << "#";
      for (std::size_t j = 0; j < m.cols(); ++j) out << ' ' << to_decimal(m(i, j), *decimal);
      out << '\n';
    }
  }
}

/// Turns a SingularPivot into exit 2, using the pivoted oracle to tell a truly
/// singular matrix from one that only needs row exchanges.
[[noreturn]] inline void pivot_failure(const Error& e, const Matrix& eliminated, bool regression) {
  std::string message = e.what();
  bool singular = false;
  try {
    oracle_inverse(eliminated, true);
  } catch (const Error&) {
    singular = true;
  }
  if (singular) {
    message += "\nclassification: singular";
    if (regression) message += "\nhint: W^T W is singular; a ridge penalty (--ridge <lambda>) makes it invertible";
  } else {
    message +=
        "\nclassification: needs pivoting (the matrix is invertible, but elimination without "
        "row exchanges cannot process it)";
  }
  throw Exit{kPivot, message};
}

/// Frees `cells`; a nonzero cell is an engine fault.
inline void release(Arena& arena, const std::vector<CellId>& cells) {
  try {
    arena.free(cells);
  } catch (const Error& e) {
    throw Exit{kEngineFault, e.what()};
  }
}

/// Shared driver: snapshot, forward run, read outputs, optional backward run
/// with exact snapshot comparison.
struct Execution {
  ResourceReport report;
  std::optional<bool> verified;
};

template <typename ReadOutputs>
Execution execute_program(Arena& arena, const RevProgram& prog, bool verify, ReadOutputs&& read) {
  Execution exec;
  const Snapshot before = verify ? arena.snapshot() : Snapshot{};
  exec.report = run_checked(arena, prog, Direction::kForward);
  read();
  if (verify) {
    run_checked(arena, prog, Direction::kBackward);
    exec.verified = arena.snapshot() == before;
  }
  return exec;
}

inline json base_document(const std::string& command) {
  json doc;
  doc["command"] = command;
  return doc;
}

inline void finish_document(json& doc, const Execution& exec) {
  doc["resource"] = report_json(exec.report);
  if (exec.verified) doc["verified_roundtrip"] = *exec.verified;
}

inline json run_matmul(const Matrix& a, const Matrix& b, const Options& opt, Matrix* product) {
  if (a.cols() != b.rows()) {
    throw Exit{kUsage, "shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                           " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols())};
  }
  Arena arena(arena_options_from_env());
  const MatrixHandle ha = alloc_matrix(arena, a.rows(), a.cols());
  const MatrixHandle hb = alloc_matrix(arena, b.rows(), b.cols());
  const MatrixHandle hc = alloc_matrix(arena, a.rows(), b.cols());
  load_matrix(arena, ha, a);
  load_matrix(arena, hb, b);
  const RevProgram prog = build_matmul(arena, ha, hb, hc);

  Matrix c;
  const Execution exec = execute_program(arena, prog, opt.verify, [&] { c = read_matrix(arena, hc); });
  release(arena, collect_ancilla(prog));
  if (exec.verified) release(arena, hc.cells());

  json doc = base_document("matmul");
  doc["dims"] = {{"m", a.rows()}, {"n", a.cols()}, {"p", b.cols()}};
  finish_document(doc, exec);
  if (opt.compare) {
    const auto oracle = oracle_matmul(a, b);
    doc["oracle"] = trace_json(oracle.trace);
    doc["oracle_match"] = oracle.value == c;
  }
  doc["outputs"] = {{"product", matrix_json(c)}};
  if (product) *product = std::move(c);
  return doc;
}

inline json run_invert(const Matrix& a, const Options& opt, Matrix* inverse) {
  if (!a.square()) throw Exit{kUsage, "shape mismatch: cannot invert a non-square matrix"};
  Arena arena(arena_options_from_env());
  const MatrixHandle ha = alloc_matrix(arena, a.rows(), a.cols());
  load_matrix(arena, ha, a);
  auto [prog, plan] = build_inverse(arena, ha);

  Matrix inv;
  Execution exec;
  try {
    exec = execute_program(arena, prog, opt.verify, [&] { inv = read_matrix(arena, plan.inv); });
  } catch (const Error& e) {
    if (e.code() == Errc::kSingularPivot) pivot_failure(e, a, false);
    throw;
  }
  std::vector<CellId> workspace = plan.owned_cells();
  if (!exec.verified) {
    workspace.clear();
    for (const CellId c : plan.owned_cells()) {
      bool is_output = false;
      for (const CellId o : plan.inv.cells()) is_output = is_output || o == c;
      if (!is_output) workspace.push_back(c);
    }
  }
  release(arena, workspace);

  json doc = base_document("invert");
  doc["dims"] = {{"n", a.rows()}};
  finish_document(doc, exec);
  if (opt.compare) {
    const auto oracle = oracle_inverse(a, false);
    doc["oracle"] = trace_json(oracle.trace);
    doc["oracle_match"] = oracle.value == inv;
  }
  doc["outputs"] = {{"inverse", matrix_json(inv)}};
  if (inverse) *inverse = std::move(inv);
  return doc;
}

inline json run_regress(const RegressionData& data, const Options& opt, FittedModel* fitted) {
  Arena arena(arena_options_from_env());
  const RegressionProblem prob = load_problem(arena, data);
  const RegressionBuild build = build_ridge(arena, prob);

  FittedModel model;
  Execution exec;
  try {
    exec = execute_program(arena, build.program, opt.verify, [&] {
      model = read_model(arena, build, prob.bias, ResourceReport{});
    });
  } catch (const Error& e) {
    if (e.code() == Errc::kSingularPivot) pivot_failure(e, oracle_gram(data), true);
    throw;
  }
  model.report = exec.report;
  release(arena, build.workspace());
  if (exec.verified) release(arena, build.theta.cells());

  json doc = base_document("regress");
  doc["dims"] = {{"d", data.dims()}, {"n", data.points()}};
  doc["lambda"] = to_string(data.lambda);
  doc["bias"] = data.bias;
  finish_document(doc, exec);
  if (opt.compare) {
    doc["oracle"] = trace_json(oracle_ols_trace(data));
    doc["oracle_match"] = oracle_ols(data) == model.coefficients;
  }
  json theta = json::array();
  for (const auto& v : model.feature_coefficients()) theta.push_back(to_string(v));
  doc["outputs"] = {{"theta", theta}, {"theta0", to_string(model.theta0)},
                    {"loss", to_string(evaluate_loss(data, model))}};
  if (sgn(data.lambda) != 0) doc["outputs"]["ridge_loss"] = to_string(evaluate_ridge_loss(data, model));
  if (fitted) *fitted = std::move(model);
  return doc;
}

inline void write_metrics(const Options& opt, const json& doc) {
  if (opt.metrics_path.empty()) return;
  std::ofstream out(opt.metrics_path);
  if (!out) throw Exit{kUsage, "cannot write metrics to '" + opt.metrics_path + "'"};
  out << doc.dump(2) << '\n';
}

inline void check_verified(const json& doc) {
  if (doc.contains("verified_roundtrip") && !doc["verified_roundtrip"].get<bool>()) {
    throw Exit{kEngineFault, "round trip did not restore the pre-run state"};
  }
}

/// One randomized instance of `op` at `size`; used by bench and verify.
inline json run_sample(const std::string& op, std::size_t size, const Options& opt) {
  Rng rng(opt.seed * 1000003ULL + size);
  if (op == "matmul") {
    return run_matmul(random_matrix(rng, size, size), random_matrix(rng, size, size), opt, nullptr);
  }
  if (op == "invert") return run_invert(random_dominant_matrix(rng, size), opt, nullptr);
  if (op == "ols") return run_regress(random_regression(rng, opt.dim, size, false), opt, nullptr);
  throw Exit{kUsage, "unknown --op '" + op + "' (expected matmul, invert or ols)"};
}

inline int cmd_bench(const Options& opt, std::ostream& out) {
  std::vector<std::string> ops;
  if (opt.op == "all") {
    ops = {"matmul", "invert", "ols"};
  } else {
    ops = {opt.op};
  }
  std::vector<std::size_t> sizes;
  for (std::size_t s = 4; s <= opt.max_size; s *= 2) sizes.push_back(s);
  if (sizes.empty()) throw Exit{kUsage, "--max must be at least 4"};

  json doc = base_document("bench");
  doc["sizes"] = sizes;
  json runs = json::array();
  json summary = json::array();
  for (const auto& op : ops) {
    std::vector<std::future<json>> pending;
    for (const std::size_t s : sizes) {
      pending.push_back(std::async(std::launch::async, [&, s] {
        const auto start = std::chrono::steady_clock::now();
        json run = run_sample(op, s, opt);
        run["op"] = op;
        run["size"] = s;
        if (opt.timing) {
          const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
          run["timing"] = {{"wall_ms", ms.count()}};
        }
        return run;
      }));
    }
    std::vector<json> results;
    for (auto& f : pending) results.push_back(f.get());

    out << op << (op == "ols" ? " (d=" + std::to_string(opt.dim) + ", size = n)" : "") << '\n';
    out << "  size  primitive_ops  peak_live  transient  max_bits";
    if (opt.compare) out << "  destructive_writes";
    out << '\n';
    for (std::size_t i = 0; i < results.size(); ++i) {
      const json& r = results[i];
      const json& res = r["resource"];
      out << "  " << std::setw(4) << sizes[i] << "  " << std::setw(13) << res["primitive_ops"].get<std::size_t>()
          << "  " << std::setw(9) << res["peak_live_cells"].get<std::size_t>() << "  " << std::setw(9)
          << res["transient_peak"].get<std::size_t>() << "  " << std::setw(8) << res["max_bits"].get<std::size_t>();
      if (opt.compare) out << "  " << std::setw(18) << r["oracle"]["destructive_writes"].get<std::size_t>();
      out << '\n';
      if (i > 0) {
        const json& prev = results[i - 1]["resource"];
        auto ratio = [&](const char* key) {
          const double a = prev[key].get<double>();
          return a == 0 ? 0.0 : res[key].get<double>() / a;
        };
        summary.push_back({{"op", op},
                           {"from", sizes[i - 1]},
                           {"to", sizes[i]},
                           {"primitive_ops_ratio", ratio("primitive_ops")},
                           {"peak_live_cells_ratio", ratio("peak_live_cells")},
                           {"transient_peak_ratio", ratio("transient_peak")}});
        std::ostringstream line;
        line << std::fixed << std::setprecision(3) << "    growth " << sizes[i - 1] << "->" << sizes[i]
             << ": ops x" << ratio("primitive_ops") << ", peak_live x" << ratio("peak_live_cells")
             << ", transient x" << ratio("transient_peak") << '\n';
        out << line.str();
      }
      runs.push_back(r);
    }
  }
  doc["runs"] = std::move(runs);
  doc["summary"] = std::move(summary);
  write_metrics(opt, doc);
  return kOk;
}

inline int cmd_verify(const Options& opt, std::ostream& out) {
  Options o = opt;
  o.verify = true;
  json doc = run_sample(opt.op, opt.size, o);
  doc["command"] = "verify";
  doc["op"] = opt.op;
  doc["size"] = opt.size;
  write_metrics(opt, doc);
  const bool ok = doc["verified_roundtrip"].get<bool>();
  out << "verify " << opt.op << " size " << opt.size << ": "
      << (ok ? "round trip exact" : "ROUND TRIP FAILED") << " ("
      << doc["resource"]["primitive_ops"].get<std::size_t>() << " primitive ops forward)\n";
  if (doc.contains("oracle_match")) {
    out << "oracle match: " << (doc["oracle_match"].get<bool>() ? "yes" : "NO") << '\n';
  }
  return ok ? kOk : kEngineFault;
}

inline int dispatch(const std::string& command, const Options& opt, std::ostream& out) {
  if (command == "matmul") {
    Matrix c;
    json doc = run_matmul(load_matrix_file(opt.inputs.at(0)), load_matrix_file(opt.inputs.at(1)), opt, &c);
    print_matrix(out, c, opt.decimal);
    write_metrics(opt, doc);
    check_verified(doc);
    return kOk;
  }
  if (command == "invert") {
    Matrix inv;
    json doc = run_invert(load_matrix_file(opt.inputs.at(0)), opt, &inv);
    print_matrix(out, inv, opt.decimal);
    write_metrics(opt, doc);
    check_verified(doc);
    return kOk;
  }
  if (command == "regress") {
    RegressionData data;
    try {
      data = parse_csv(read_file(opt.inputs.at(0)), opt.bias, parse_rational(opt.ridge));
    } catch (const Error& e) {
      throw Exit{kUsage, opt.inputs.at(0) + ": " + e.what()};
    }
    FittedModel model;
    json doc = run_regress(data, opt, &model);
    const std::vector<Rational> theta(model.feature_coefficients().begin(),
                                      model.feature_coefficients().end());
    out << "theta = (" << join_values(theta, std::nullopt) << ")\n";
    if (data.bias) out << "theta0 = " << to_string(model.theta0) << '\n';
    if (opt.decimal) {
      out << "theta ~ (" << join_values(theta, opt.decimal) << ")  [approximate]\n";
      if (data.bias) out << "theta0 ~ " << to_decimal(model.theta0, *opt.decimal) << "  [approximate]\n";
    }
    write_metrics(opt, doc);
    check_verified(doc);
    return kOk;
  }
  if (command == "bench") return cmd_bench(opt, out);
  return cmd_verify(opt, out);
}

/// Runs the command line `args` (args[0] is the program name). Never throws.
inline int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"revlin: exact reversible linear algebra and least-squares regression"};
  app.require_subcommand(1);
  Options opt;
  int decimal_digits = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--metrics", opt.metrics_path, "Write a JSON metrics document to this path");
    sub->add_flag("--compare", opt.compare, "Add irreversible oracle and trace numbers");
  };
  auto add_run_flags = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_flag("--verify", opt.verify, "Run backward afterwards and check exact restoration");
    sub->add_option("--decimal", decimal_digits, "Also print values rounded to this many digits");
  };

  auto* regress = app.add_subcommand("regress", "Fit least squares (or ridge) on a CSV file");
  regress->add_option("csv", opt.inputs, "CSV with header; last column is the target")->required()->expected(1);
  regress->add_flag("--bias", opt.bias, "Append a constant feature and report its coefficient as theta0");
  regress->add_option("--ridge", opt.ridge, "Ridge penalty lambda (rational)");
  add_run_flags(regress);

  auto* invert = app.add_subcommand("invert", "Invert a square matrix file");
  invert->add_option("matrix", opt.inputs, "Matrix text file")->required()->expected(1);
  add_run_flags(invert);

  auto* matmul = app.add_subcommand("matmul", "Multiply two matrix files");
  matmul->add_option("matrices", opt.inputs, "Two matrix text files A and B")->required()->expected(2);
  add_run_flags(matmul);

  auto* bench = app.add_subcommand("bench", "Sweep sizes 4, 8, 16, ... up to --max and report growth");
  bench->add_option("--op", opt.op, "matmul, invert, ols or all")->check(CLI::IsMember({"matmul", "invert", "ols", "all"}));
  bench->add_option("--max", opt.max_size, "Largest size in the sweep");
  bench->add_option("--dim", opt.dim, "Feature dimension d for ols (size is the point count n)");
  bench->add_option("--seed", opt.seed, "Seed for the random instances");
  bench->add_flag("--timing", opt.timing, "Record wall time (makes the metrics nondeterministic)");
  add_common(bench);

  auto* verify = app.add_subcommand("verify", "Forward+backward round trip on a random instance");
  verify->add_option("--op", opt.op, "matmul, invert or ols")->required()->check(CLI::IsMember({"matmul", "invert", "ols"}));
  verify->add_option("--size", opt.size, "Instance size (n for ols)")->required();
  verify->add_option("--dim", opt.dim, "Feature dimension d for ols");
  verify->add_option("--seed", opt.seed, "Seed for the random instance");
  add_common(verify);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (decimal_digits >= 0) opt.decimal = decimal_digits;
  std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, opt, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << '\n';
    return e.code;
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::kParse:
      case Errc::kShapeMismatch:
      case Errc::kInvalidArgument:
      case Errc::kOverlapError:
      case Errc::kBitLimit:
        err << "error: " << e.what() << '\n';
        return kUsage;
      case Errc::kSingularPivot:
        err << "error: " << e.what() << '\n';
        return kPivot;
      default:
        err << "internal error: " << e.what() << '\n';
        return kEngineFault;
    }
  }
}

}  // namespace revlin::cli
