#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "semid/graph.hpp"

namespace semid::fixtures {

// Instrumental-variable model.
inline MixedGraph fig1() { return MixedGraph::from_one_based(3, {{1, 2}, {2, 3}}, {{2, 3}}); }

inline MixedGraph fig2a() {
  return MixedGraph::from_one_based(5, {{1, 2}, {1, 3}, {1, 4}, {4, 5}}, {{1, 2}, {1, 3}, {1, 4}, {1, 5}});
}

inline MixedGraph fig3() {
  return MixedGraph::from_one_based(5, {{1, 2}, {2, 3}, {4, 3}, {3, 5}}, {{1, 2}, {3, 5}, {1, 5}});
}

inline MixedGraph fig4() {
  return MixedGraph::from_one_based(5, {{1, 3}, {2, 3}, {3, 4}, {4, 5}}, {{1, 4}, {2, 3}, {2, 5}, {3, 5}, {4, 5}});
}

inline MixedGraph fig5() {
  return MixedGraph::from_one_based(6, {{1, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 6}, {5, 6}},
                                    {{2, 6}, {3, 6}, {4, 5}, {2, 5}, {3, 4}});
}

inline MixedGraph fig6a() {
  return MixedGraph::from_one_based(5, {{2, 3}, {2, 4}, {3, 1}, {4, 1}, {1, 5}}, {{1, 2}, {2, 3}, {2, 4}, {2, 5}});
}

inline MixedGraph fig6b() {
  return MixedGraph::from_one_based(5, {{1, 2}, {2, 3}, {2, 4}, {2, 5}, {3, 4}, {4, 1}, {5, 1}}, {{2, 3}, {2, 5}});
}

struct CodePair {
  std::uint64_t d;
  std::uint64_t b;
};

inline const std::vector<CodePair> kTable1Acyclic = {
    {4456, 113}, {360, 117}, {6275, 172}, {6307, 172}, {6275, 188}, {360, 369}, {4696, 401},
    {4936, 401}, {4936, 402}, {4680, 403}, {840, 466},  {5257, 658}, {5257, 659}, {4680, 914}};

inline const std::vector<CodePair> kTable1Cyclic = {
    {345, 440},   {71329, 18},  {81089, 0},   {4714, 41},   {70881, 80},  {74963, 512}, {74886, 268},
    {5058, 304},  {70821, 513}, {74915, 6},   {5267, 82},   {76852, 128}, {71075, 516}, {4397, 897},
    {6629, 512},  {74536, 788}, {5545, 96},   {75112, 72},  {74970, 4},   {4579, 384},  {70594, 65},
    {74921, 66},  {70474, 640}, {74922, 66},  {13160, 65},  {4938, 448},  {4730, 640},  {70358, 1},
    {75321, 516}, {75398, 20},  {70803, 896}, {4457, 592},  {74883, 522}, {350, 112},   {74883, 2},
    {74950, 260}, {74890, 38},  {81076, 0},   {70851, 32},  {1430, 120},  {5251, 418}};

inline std::vector<MixedGraph> table1() {
  std::vector<MixedGraph> out;
  for (const auto* list : {&kTable1Acyclic, &kTable1Cyclic})
    for (auto [d, b] : *list) out.push_back(decode_id({5, d, b}));
  return out;
}

// Random mixed graph; each ordered pair gets a directed edge with
// probability p_dir (acyclic: only from lower to higher label) and each
// unordered pair a bidirected edge with probability p_bi.
inline MixedGraph random_graph(std::mt19937_64& rng, int n, double p_dir, double p_bi, bool acyclic) {
  std::bernoulli_distribution dir(p_dir), bi(p_bi);
  MixedGraph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v || (acyclic && u > v)) continue;
      if (dir(rng)) g.add_directed(u, v);
    }
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (bi(rng)) g.add_bidirected(u, v);
  if (acyclic) {
    // relabel so that the topological order is not the identity
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    MixedGraph h(n);
    for (auto e : g.directed_edges()) h.add_directed(perm[e.from], perm[e.to]);
    for (auto e : g.bidirected_edges()) h.add_bidirected(perm[e.from], perm[e.to]);
    return h;
  }
  return g;
}

inline VertexSet random_subset(std::mt19937_64& rng, int n, int max_size) {
  std::uniform_int_distribution<int> size(1, std::min(n, max_size));
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  VertexSet s(all.begin(), all.begin() + size(rng));
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace semid::fixtures
