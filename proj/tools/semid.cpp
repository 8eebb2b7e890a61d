#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semid/flow.hpp"
#include "semid/identify.hpp"
#include "semid/io.hpp"
#include "semid/numeric.hpp"

namespace {

using nlohmann::json;
using namespace semid;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfiniteToOne = 2;
constexpr int kExitUnknown = 3;
constexpr int kExitVerification = 4;

struct Common {
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  int max_set_size = 0;
  std::string output;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
  cmd->add_option("--tolerance", c.tolerance, "Relative recovery tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-set-size", c.max_set_size, "Largest |S| searched by trek separation (default n)")
      ->envname("SEMID_MAX_SET_SIZE")
      ->check(CLI::PositiveNumber);
  cmd->add_option("-o,--output", c.output, "Write to this file instead of stdout");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
}

void emit(const Common& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw InputError("cannot write '" + c.output + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string edge_label(Edge e) { return std::to_string(e.from + 1) + "->" + std::to_string(e.to + 1); }

// --- identify ----------------------------------------------------------------

int run_identify(const std::string& input, const Common& c, bool verify, int verify_seeds) {
  const auto g = load_graph(input);
  CertifyOptions options;
  options.max_set_size = c.max_set_size;
  options.verify = verify;
  options.seed = c.seed;
  options.verify_seeds = verify_seeds;
  options.tolerance = c.tolerance;
  CertificationReport report;
  try {
    report = certify(g, options);
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kExitVerification;
  }
  emit(c, c.format == "json" ? report_to_json(g, report).dump(2) : report_to_table(g, report));
  if (report.any_unknown()) return kExitUnknown;
  if (report.any_infinite_to_one()) return kExitInfiniteToOne;
  return kExitOk;
}

// --- rank / cut --------------------------------------------------------------

int run_rank(const std::string& input, const std::string& rows_text, const std::string& cols_text, bool with_cut,
             const Common& c) {
  const auto g = load_graph(input);
  const auto rows = parse_vertex_list(rows_text, g.num_vertices());
  const auto cols = parse_vertex_list(cols_text, g.num_vertices());
  const int rank = generic_rank(g, rows, cols);
  json j{{"rank", rank}};
  std::ostringstream table;
  table << "rank " << rank << "\n";
  if (with_cut) {
    const auto sep = t_separating_cut(g, rows, cols);
    json left = json::array(), right = json::array();
    for (int v : sep.left) left.push_back(v + 1);
    for (int v : sep.right) right.push_back(v + 1);
    j["cut"] = {{"L", left}, {"R", right}};
    table << "L " << left.dump() << "\nR " << right.dump() << "\n";
  }
  emit(c, c.format == "json" ? j.dump(2) : table.str());
  return kExitOk;
}

// --- decode / encode ---------------------------------------------------------

int run_decode(const std::string& code, const Common& c) {
  MixedGraph g;
  try {
    g = decode_id(parse_graph_id(code));
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  emit(c, graph_to_json(g).dump(c.format == "json" ? 2 : -1));
  return kExitOk;
}

int run_encode(const std::string& input, const Common& c) {
  const auto g = load_graph(input);
  if (g.num_vertices() > kMaxCodecVertices)
    throw InputError("graph ids support at most " + std::to_string(kMaxCodecVertices) + " vertices");
  emit(c, format_graph_id(encode_id(g)));
  return kExitOk;
}

// --- verify ------------------------------------------------------------------

DeterminantalRow parse_joint_row(const std::string& text, int n) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw InputError("joint row must look like S/T, e.g. 3,5/1: '" + text + "'");
  DeterminantalRow row{parse_vertex_list(text.substr(0, slash), n), parse_vertex_list(text.substr(slash + 1), n)};
  if (row.rows.size() != row.cols.size() + 1) throw InputError("joint row needs |S| == |T| + 1: '" + text + "'");
  return row;
}

int run_verify(const std::string& input, const Common& c, int seeds, int joint_head,
               const std::string& joint_targets, const std::vector<std::string>& joint_rows) {
  const auto g = load_graph(input);
  const int n = g.num_vertices();
  SolverState state;
  if (!joint_rows.empty()) {
    if (joint_head < 1 || joint_head > n) throw InputError("--joint-head out of range");
    JointSystem joint;
    joint.head = joint_head - 1;
    const auto targets = parse_vertex_list(joint_targets, n);
    joint.targets.assign(targets.begin(), targets.end());
    for (const auto& r : joint_rows) joint.rows.push_back(parse_joint_row(r, n));
    if (joint.rows.size() != joint.targets.size()) throw InputError("need one joint row per target");
    IdentificationStep step;
    step.method = Method::joint;
    for (int w : joint.targets) {
      if (!g.has_directed(w, joint.head)) throw InputError("joint target is not a parent of the head");
      step.solved.push_back({w, joint.head});
    }
    step.witness = std::move(joint);
    state.apply(std::move(step));
  } else {
    state = eid_tsid_identify(g, c.max_set_size);
  }

  RecoveryErrors errors;
  try {
    errors = recovery_errors(g, state, c.seed, seeds);
  } catch (const NonGenericPoint& e) {
    std::cerr << "resampling budget exhausted: " << e.what() << "\n";
    return kExitVerification;
  }
  bool ok = true;
  json edges = json::array();
  std::ostringstream table;
  table << "edge    max_rel_err\n";
  for (const auto& [e, err] : errors.max_rel_err) {
    const bool pass = err <= c.tolerance;
    ok = ok && pass;
    edges.push_back({{"edge", {e.from + 1, e.to + 1}}, {"max_rel_err", err}, {"pass", pass}});
    table << edge_label(e) << std::string(8 - std::min<std::size_t>(7, edge_label(e).size()), ' ') << err
          << (pass ? "" : "  FAIL") << "\n";
  }
  json j{{"seeds", errors.seeds}, {"tolerance", c.tolerance}, {"edges", edges}, {"pass", ok}};
  emit(c, c.format == "json" ? j.dump(2) : table.str());
  return ok ? kExitOk : kExitVerification;
}

// --- corpus ------------------------------------------------------------------

int run_corpus(const std::string& path, const std::string& algorithm, const Common& c) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file '" + path + "'");
  const auto corpus = read_corpus(in);
  for (const auto& e : corpus.errors) std::cerr << path << ": " << e << "\n";

  std::vector<std::string> algorithms;
  if (algorithm == "all") algorithms = {"htc", "eid", "tsid", "eid+tsid"};
  else algorithms = {algorithm};

  struct Counts {
    int acyclic_full = 0, cyclic_full = 0;
  };
  std::map<std::string, Counts> counts;
  for (const auto& a : algorithms) counts[a];
  int acyclic = 0, cyclic = 0;

  json graphs = json::array();
  std::ostringstream table;
  for (const auto& entry : corpus.entries) {
    const auto g = decode_id(entry.id);
    const bool is_acyclic = g.is_acyclic();
    (is_acyclic ? acyclic : cyclic) += 1;
    json results = json::object();
    table << format_graph_id(entry.id) << (is_acyclic ? " acyclic" : " cyclic ");
    for (const auto& a : algorithms) {
      SolverState s;
      if (a == "htc") s = htc_identify(g);
      else if (a == "eid") s = eid_identify(g);
      else if (a == "tsid") s = tsid_identify(g, {}, c.max_set_size);
      else s = eid_tsid_identify(g, c.max_set_size);
      const bool full = s.solved().size() == g.num_directed();
      if (full) (is_acyclic ? counts[a].acyclic_full : counts[a].cyclic_full) += 1;
      results[a] = {{"solved", s.solved().size()}, {"edges", g.num_directed()}, {"full", full}};
      table << "  " << a << " " << s.solved().size() << "/" << g.num_directed();
    }
    table << "\n";
    graphs.push_back({{"id", format_graph_id(entry.id)}, {"line", entry.line}, {"acyclic", is_acyclic},
                      {"results", results}});
  }
  json summary = json::object();
  table << "graphs " << corpus.entries.size() << " (acyclic " << acyclic << ", cyclic " << cyclic << ")\n";
  for (const auto& a : algorithms) {
    summary[a] = {{"full_acyclic", counts[a].acyclic_full}, {"full_cyclic", counts[a].cyclic_full}};
    table << a << " fully identified: acyclic " << counts[a].acyclic_full << ", cyclic " << counts[a].cyclic_full
          << "\n";
  }
  json j{{"graphs", graphs},
         {"acyclic", acyclic},
         {"cyclic", cyclic},
         {"summary", summary},
         {"errors", corpus.errors}};
  emit(c, c.format == "json" ? j.dump(2) : table.str());
  return corpus.errors.empty() ? kExitOk : kExitInput;
}

// --- sample ------------------------------------------------------------------

int run_sample(const std::string& input, const Common& c) {
  const auto g = load_graph(input);
  for (int attempt = 0;; ++attempt) {
    const auto s = attempt == 0 ? c.seed : resample_seed(c.seed, attempt);
    try {
      const auto p = sample_parameters(g, s);
      const auto sigma = covariance(p);
      json j{{"seed", s}, {"lambda", matrix_json(p.lambda)}, {"omega", matrix_json(p.omega)},
             {"sigma", matrix_json(sigma)}};
      std::ostringstream table;
      table << "seed " << s << "\nlambda\n" << p.lambda << "\nomega\n" << p.omega << "\nsigma\n" << sigma << "\n";
      emit(c, c.format == "json" ? j.dump(2) : table.str());
      return kExitOk;
    } catch (const NonGenericPoint&) {
      if (attempt >= 5) throw;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identifiability certificates for linear structural equation models"};
  app.require_subcommand(1);

  Common common;
  std::string input, rows, cols, corpus_path, algorithm = "eid+tsid", joint_targets;
  bool with_cut = false, no_verify = false;
  int verify_seeds = 3, seeds = 100, joint_head = 0;
  std::vector<std::string> joint_rows;

  auto* identify = app.add_subcommand("identify", "Certify every directed edge");
  identify->add_option("input", input, "Graph JSON file or n:d:b code")->required();
  identify->add_flag("--no-verify", no_verify, "Skip numeric replay of certificates");
  identify->add_option("--verify-seeds", verify_seeds, "Seeds used for replay")->check(CLI::PositiveNumber);
  add_common(identify, common);

  auto* rank = app.add_subcommand("rank", "Generic rank of a covariance submatrix");
  rank->add_option("input", input)->required();
  rank->add_option("rows", rows, "Row vertices, e.g. 1,2,4")->required();
  rank->add_option("cols", cols, "Column vertices")->required();
  rank->add_flag("--cut", with_cut, "Also print a t-separating pair (L, R)");
  add_common(rank, common);

  auto* cut = app.add_subcommand("cut", "Minimal t-separating pair (L, R)");
  cut->add_option("input", input)->required();
  cut->add_option("rows", rows)->required();
  cut->add_option("cols", cols)->required();
  add_common(cut, common);

  auto* decode = app.add_subcommand("decode", "Graph JSON for an n:d:b code");
  decode->add_option("code", input)->required();
  add_common(decode, common);

  auto* encode = app.add_subcommand("encode", "n:d:b code for a graph");
  encode->add_option("input", input)->required();
  add_common(encode, common);

  auto* verify = app.add_subcommand("verify", "Replay certificates at sampled parameters");
  verify->add_option("input", input)->required();
  verify->add_option("--seeds", seeds, "Number of seeds")->check(CLI::PositiveNumber)->capture_default_str();
  verify->add_option("--joint-head", joint_head, "Head vertex of a joint determinantal system");
  verify->add_option("--joint-targets", joint_targets, "Parents solved jointly, e.g. 4,5");
  verify->add_option("--joint-row", joint_rows, "One S/T row per target, e.g. 3,5/1");
  add_common(verify, common);

  auto* corpus = app.add_subcommand("corpus", "Run the identification passes over a corpus file");
  corpus->add_option("file", corpus_path)->required();
  corpus->add_option("--algorithm", algorithm)
      ->check(CLI::IsMember({"htc", "eid", "tsid", "eid+tsid", "all"}))
      ->capture_default_str();
  add_common(corpus, common);

  auto* sample = app.add_subcommand("sample", "Sample parameters and the implied covariance");
  sample->add_option("input", input)->required();
  add_common(sample, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*identify) return run_identify(input, common, !no_verify, verify_seeds);
    if (*rank) return run_rank(input, rows, cols, with_cut, common);
    if (*cut) return run_rank(input, rows, cols, true, common);
    if (*decode) return run_decode(input, common);
    if (*encode) return run_encode(input, common);
    if (*verify) return run_verify(input, common, seeds, joint_head, joint_targets, joint_rows);
    if (*corpus) return run_corpus(corpus_path, algorithm, common);
    if (*sample) return run_sample(input, common);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
