#include "semid/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace semid {

using nlohmann::json;

namespace {

json one_based(const VertexSet& s) {
  json out = json::array();
  for (int v : s) out.push_back(v + 1);
  return out;
}

json one_based(const std::vector<Edge>& edges) {
  json out = json::array();
  for (auto e : edges) out.push_back({e.from + 1, e.to + 1});
  return out;
}

std::vector<std::pair<int, int>> read_pairs(const json& j, const char* key) {
  std::vector<std::pair<int, int>> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw InputError(std::string("\"") + key + "\" must be an array of pairs");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& p = arr[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
      throw InputError(std::string("\"") + key + "\"[" + std::to_string(i) + "] must be a pair of integers");
    out.emplace_back(p[0].get<int>() - 1, p[1].get<int>() - 1);
  }
  return out;
}

const char* reason_name(InfiniteToOneRecord::Reason r) {
  switch (r) {
    case InfiniteToOneRecord::Reason::sibling_of_head: return "sibling_of_head";
    case InfiniteToOneRecord::Reason::not_half_trek_reachable: return "not_half_trek_reachable";
    case InfiniteToOneRecord::Reason::violated: return "violated";
  }
  return "?";
}

}  // namespace

json graph_to_json(const MixedGraph& g) {
  return {{"n", g.num_vertices()},
          {"directed", one_based(g.directed_edges())},
          {"bidirected", one_based(g.bidirected_edges())}};
}

MixedGraph graph_from_json(const json& j) {
  if (!j.is_object()) throw InputError("graph JSON must be an object");
  if (!j.contains("n") || !j.at("n").is_number_integer()) throw InputError("graph JSON needs an integer \"n\"");
  GraphSpec spec;
  spec.n = j.at("n").get<int>();
  spec.directed = read_pairs(j, "directed");
  spec.bidirected = read_pairs(j, "bidirected");
  try {
    return MixedGraph::from_spec(spec);
  } catch (const GraphError& e) {
    throw InputError(e.what());
  }
}

MixedGraph parse_graph_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("malformed graph JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return graph_from_json(j);
}

MixedGraph load_graph(const std::string& input) {
  const bool looks_like_id =
      !input.empty() && input.find(':') != std::string::npos &&
      input.find_first_not_of("0123456789:") == std::string::npos;
  if (looks_like_id) {
    try {
      return decode_id(parse_graph_id(input));
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  }
  std::ifstream in(input, std::ios::binary);
  if (!in) throw InputError("cannot open graph file '" + input + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_graph_json(buffer.str());
  } catch (const InputError& e) {
    throw InputError(input + ": " + e.what());
  }
}

VertexSet parse_vertex_list(std::string_view text, int n) {
  VertexSet out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == ',' || std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
    if (ec != std::errc{} || ptr == text.data() + i)
      throw InputError("malformed vertex list at column " + std::to_string(i + 1));
    if (value < 1 || value > n)
      throw InputError("vertex " + std::to_string(value) + " out of range 1.." + std::to_string(n));
    out.push_back(value - 1);
    i = static_cast<std::size_t>(ptr - text.data());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

json certificate_to_json(const SolverState& state, const EdgeCertificate& cert) {
  json j;
  j["edge"] = {cert.edge.from + 1, cert.edge.to + 1};
  j["status"] = to_string(cert.status);
  j["method"] = cert.method ? json(to_string(*cert.method)) : json(nullptr);
  json witness = json::object();
  if (cert.step) {
    const auto& step = state.steps()[*cert.step];
    if (const auto* sys = std::get_if<HalfTrekSystem>(&step.witness)) {
      witness["S"] = one_based(sys->solved_parents);
      witness["Y"] = one_based(sys->instruments);
      witness["E"] = one_based(sys->targets);
      json h = json::array();
      for (const auto& hs : sys->instrument_parents) h.push_back(one_based(hs));
      witness["H"] = h;
    } else if (const auto* ratio = std::get_if<RatioFormula>(&step.witness)) {
      witness["S"] = one_based(ratio->rows);
      witness["T"] = one_based(ratio->cols);
    } else {
      const auto& joint = std::get<JointSystem>(step.witness);
      witness["E"] = one_based(joint.targets);
      json rows = json::array();
      for (const auto& r : joint.rows) rows.push_back({{"S", one_based(r.rows)}, {"T", one_based(r.cols)}});
      witness["rows"] = rows;
    }
  }
  witness["prerequisites"] = one_based(cert.prerequisites);
  if (cert.infinite_to_one) {
    json hyp = json::array();
    for (const auto& e : cert.infinite_to_one->entries) hyp.push_back({{"z", e.z + 1}, {"reason", reason_name(e.reason)}});
    witness["hypothesis"] = hyp;
  }
  j["witness"] = witness;
  if (cert.verification)
    j["verification"] = {{"seeds", cert.verification->seeds}, {"max_rel_err", cert.verification->max_rel_err}};
  return j;
}

json report_to_json(const MixedGraph& g, const CertificationReport& report) {
  json certs = json::array();
  for (const auto& c : report.certificates) certs.push_back(certificate_to_json(report.state, c));
  return {{"graph", graph_to_json(g)},
          {"certificates", certs},
          {"jacobian",
           {{"rank", report.jacobian.rank},
            {"parameters", report.jacobian.num_parameters},
            {"globally_infinite_to_one", report.globally_infinite_to_one}}}};
}

std::string report_to_table(const MixedGraph& g, const CertificationReport& report) {
  std::ostringstream out;
  out << "graph " << format_graph_id(encode_id(g)) << "  jacobian rank " << report.jacobian.rank << "/"
      << report.jacobian.num_parameters << (report.globally_infinite_to_one ? " (rank deficient)" : "") << "\n";
  out << std::left << std::setw(8) << "edge" << std::setw(17) << "status" << std::setw(7) << "method"
      << "max_rel_err\n";
  for (const auto& c : report.certificates) {
    std::ostringstream edge;
    edge << c.edge.from + 1 << "->" << c.edge.to + 1;
    out << std::setw(8) << edge.str() << std::setw(17) << to_string(c.status) << std::setw(7)
        << (c.method ? to_string(*c.method) : "-");
    if (c.verification) out << c.verification->max_rel_err;
    else out << "-";
    out << "\n";
  }
  return out.str();
}

CorpusFile read_corpus(std::istream& in) {
  CorpusFile file;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string text = line.substr(first, last - first + 1);
    try {
      file.entries.push_back({number, parse_graph_id(text)});
    } catch (const std::exception& e) {
      file.errors.push_back("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return file;
}

}  // namespace semid
