#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specdens/approximation.hpp"
#include "specdens/exact_linalg.hpp"
#include "specdens/ring.hpp"

namespace specdens {

/// Finite directed graph with edges labeled by the generators of a group.
/// For each label l the edge set is a partial matching: out[l][v] is the
/// head of the unique l-edge leaving v (-1 if absent) and in[l][v] its
/// mirror, so out[l][w] == v iff in[l][v] == w. Vertices in `good` carry a
/// certificate that their `radius`-ball is label-isomorphic to the ball in
/// the Cayley graph of `group` (left convention: an l-edge maps x to
/// s_l * x). `delta` is the fraction of vertices outside the good set.
struct LabeledGraph {
  GroupPtr group;
  long num_vertices = 0;
  long radius = 0;
  double delta = 0.0;
  std::vector<std::vector<long>> out;
  std::vector<std::vector<long>> in;
  std::vector<char> good;

  long num_good() const;
};

struct SoficParams {
  std::string family;  // cycle | torus | cayley | file
  long size = 0;       // cycle length / torus side
  long radius = 1;
  std::string path;    // family == file
};

/// Built-in approximation families. cycle: Z with an n-cycle. torus:
/// Z^d (optionally times a finite factor) on a side-n discrete torus.
/// cayley: a finite group on its own Cayley graph, exact at any radius.
/// file: read_sofic_graph_file. Every built graph is certified before it
/// is returned; an uncertifiable radius throws.
LabeledGraph build_sofic_stage(const GroupPtr& g, const SoficParams& p);

/// Recomputes which vertices pass the ball-isomorphism check at the given
/// radius, by explicit matching against the Cayley ball. Ignores gr.good.
std::vector<char> sofic_good_mask(const LabeledGraph& gr, long radius);

/// Verifies the graph's own claim: every vertex marked good passes the
/// ball check at gr.radius. Throws std::runtime_error with a reason.
void certify_sofic_graph(const LabeledGraph& gr);

/// Swaps the targets of random same-label edge pairs. This splices cycles
/// apart but keeps every neighborhood locally exact, so the good set is
/// typically unchanged; it is recomputed honestly either way.
LabeledGraph splice_sofic_graph(const LabeledGraph& gr, long swaps, unsigned seed);

/// Deletes random edges, leaving genuine local defects. The good set and
/// delta are recomputed from scratch.
LabeledGraph delete_sofic_edges(const LabeledGraph& gr, long deletions, unsigned seed);

// Plain text graph files: vertex count, labeled edge list, good list.
LabeledGraph read_sofic_graph(std::istream& is, const GroupPtr& g);
LabeledGraph read_sofic_graph_file(const std::string& path, const GroupPtr& g);
void write_sofic_graph(std::ostream& os, const LabeledGraph& gr);

/// Largest word length in the support of A across all matrix entries.
long operator_width(const RingMatrix<Cyclotomic>& A);

/// Kernel of A transported along the ball isomorphisms of a labeled
/// graph. Basis index = vertex * block_dim + k. Columns are populated for
/// good vertices y only; rows follow K(x, y) = A_g with x = psi_y(g).
struct SoficKernel {
  GroupPtr group;
  long num_vertices = 0;
  int block_dim = 1;
  long dim = 0;
  long width = 0;
  bool hermitian = false;
  bool all_real = true;
  Rational normalization;  // 1 / num_vertices
  std::vector<Triplet> entries;
  std::vector<ExactTriplet> exact_entries;
};

SoficKernel sofic_kernel(const RingMatrix<Cyclotomic>& A, const LabeledGraph& gr);

/// Eigenvalues of a Hermitian kernel, ascending.
std::vector<double> sofic_eigenvalues(const SoficKernel& K);

struct SoficDetStar {
  double log_value = 0;  // sum of ln over eigenvalues above tau
  double value = 1;      // exp(log_value); inf for large stages
  long kernel_dim = 0;
  std::optional<Int> certificate;  // exact det*, integer entries only
};

/// Product of the eigenvalues above tau (tau < 0 picks a scale-relative
/// default). Requires a Hermitian kernel with no eigenvalue below -tau.
/// When every entry is a rational integer and the kernel is small enough
/// for exact characteristic polynomials, also certifies det* as a
/// positive integer and cross-checks it against the float product.
SoficDetStar det_star(const SoficKernel& K, double tau = -1.0);

struct SoficLndetRow {
  long stage_index = 0;
  long vertices = 0;
  double lndet = 0;  // ln det* / |V|
  long kernel_dim = 0;
  bool certified = false;
  Int certificate;
};

/// Normalized log-determinants across a sequence of stages. Stages are
/// independent and run in parallel; rows come back in input order.
std::vector<SoficLndetRow> sofic_lndet_limit(const RingMatrix<Cyclotomic>& A,
                                             const std::vector<LabeledGraph>& stages);

}  // namespace specdens
