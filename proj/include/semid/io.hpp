#pragma once

#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semid/graph.hpp"
#include "semid/identify.hpp"

namespace semid {

// Malformed textual input; the message carries a position (byte offset,
// line or column) whenever one is known.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Graph JSON uses 1-based labels: {"n": 3, "directed": [[1,2]], "bidirected": [[2,3]]}.
nlohmann::json graph_to_json(const MixedGraph& g);
MixedGraph graph_from_json(const nlohmann::json& j);
MixedGraph parse_graph_json(std::string_view text);

// Accepts an inline "n:d:b" code or a path to a graph JSON file.
MixedGraph load_graph(const std::string& input);

// Comma or whitespace separated 1-based labels, e.g. "1,2,4"; returns 0-based.
VertexSet parse_vertex_list(std::string_view text, int n);

nlohmann::json certificate_to_json(const SolverState& state, const EdgeCertificate& cert);
nlohmann::json report_to_json(const MixedGraph& g, const CertificationReport& report);
std::string report_to_table(const MixedGraph& g, const CertificationReport& report);

struct CorpusEntry {
  int line = 0;
  GraphId id;
};

struct CorpusFile {
  std::vector<CorpusEntry> entries;
  std::vector<std::string> errors;  // "line N: ..." for skipped lines
};

// One "n:d:b" per line; '#' starts a comment; blank lines are ignored.
CorpusFile read_corpus(std::istream& in);

}  // namespace semid
