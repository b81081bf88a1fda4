#include "specdens/sofic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "specdens/spectral.hpp"

namespace specdens {

namespace {

constexpr long kDetStarExactLimit = 512;

// Cayley ball of the group within the word metric, BFS order, identity
// first. parent/parent_edge record how each element was first reached
// (edge l walks x -> s_l x, edge ~l walks the inverse), so a graph-side
// image of the ball can be rebuilt by replaying the same walks. fwd/bwd
// hold the ball index of every one-step neighbor, -1 when it lies outside.
struct BallTable {
  std::vector<GroupElement> elems;
  std::vector<long> parent;
  std::vector<int> parent_edge;
  std::vector<std::vector<long>> fwd, bwd;
};

BallTable cayley_ball(const GroupPtr& g, long radius) {
  int L = g->num_generators();
  BallTable bt;
  std::map<GroupElement, long, ElementLess> index;
  std::vector<long> depth;

  bt.elems.push_back(g->identity());
  bt.parent.push_back(-1);
  bt.parent_edge.push_back(0);
  depth.push_back(0);
  index[g->identity()] = 0;

  for (size_t i = 0; i < bt.elems.size(); i++) {
    if (depth[i] >= radius) continue;
    for (int l = 0; l < L; l++) {
      for (int dir = 0; dir < 2; dir++) {
        GroupElement s = g->generator(l);
        if (dir) s = g->inverse(s);
        GroupElement y = g->mul(s, bt.elems[i]);
        if (index.count(y)) continue;
        index[y] = static_cast<long>(bt.elems.size());
        bt.elems.push_back(y);
        bt.parent.push_back(static_cast<long>(i));
        bt.parent_edge.push_back(dir ? ~l : l);
        depth.push_back(depth[i] + 1);
      }
    }
  }

  size_t B = bt.elems.size();
  bt.fwd.assign(B, std::vector<long>(L, -1));
  bt.bwd.assign(B, std::vector<long>(L, -1));
  for (size_t i = 0; i < B; i++)
    for (int l = 0; l < L; l++) {
      auto it = index.find(g->mul(g->generator(l), bt.elems[i]));
      if (it != index.end()) bt.fwd[i][l] = it->second;
      it = index.find(g->mul(g->inverse(g->generator(l)), bt.elems[i]));
      if (it != index.end()) bt.bwd[i][l] = it->second;
    }
  return bt;
}

// Walks the ball image around v and checks it is a label isomorphism onto
// the graph ball: edges inside the ball must match exactly, edges leaving
// the Cayley ball must leave the image as well. rev/stamp are per-call
// scratch keyed by tick = v.
bool ball_matches(const LabeledGraph& gr, const BallTable& bt, long v,
                  std::vector<long>& psi, std::vector<long>& stamp) {
  long tick = v;
  size_t B = bt.elems.size();
  int L = static_cast<int>(gr.out.size());

  psi[0] = v;
  stamp[v] = tick;
  for (size_t i = 1; i < B; i++) {
    long x = psi[bt.parent[i]];
    int e = bt.parent_edge[i];
    long y = e >= 0 ? gr.out[e][x] : gr.in[~e][x];
    if (y < 0) return false;
    if (stamp[y] == tick) return false;  // two ball elements, one vertex
    stamp[y] = tick;
    psi[i] = y;
  }
  for (size_t i = 0; i < B; i++) {
    long x = psi[i];
    for (int l = 0; l < L; l++) {
      long j = bt.fwd[i][l];
      long y = gr.out[l][x];
      if (j >= 0) {
        if (y != psi[j]) return false;
      } else if (y >= 0 && stamp[y] == tick) {
        return false;  // extra edge folding back into the ball
      }
      j = bt.bwd[i][l];
      y = gr.in[l][x];
      if (j >= 0) {
        if (y != psi[j]) return false;
      } else if (y >= 0 && stamp[y] == tick) {
        return false;
      }
    }
  }
  return true;
}

void validate_graph_shape(const LabeledGraph& gr) {
  if (!gr.group) throw std::runtime_error("labeled graph has no group");
  long n = gr.num_vertices;
  size_t L = static_cast<size_t>(gr.group->num_generators());
  if (n < 1) throw std::runtime_error("labeled graph has no vertices");
  if (gr.out.size() != L || gr.in.size() != L)
    throw std::runtime_error("label count does not match the generators");
  if (gr.good.size() != static_cast<size_t>(n))
    throw std::runtime_error("good mask has the wrong size");
  for (size_t l = 0; l < L; l++) {
    if (gr.out[l].size() != static_cast<size_t>(n) ||
        gr.in[l].size() != static_cast<size_t>(n))
      throw std::runtime_error("adjacency array has the wrong size");
    for (long v = 0; v < n; v++) {
      long w = gr.out[l][v];
      if (w < -1 || w >= n) throw std::runtime_error("edge head out of range");
      if (w >= 0 && gr.in[l][w] != v)
        throw std::runtime_error("out/in arrays disagree");
      w = gr.in[l][v];
      if (w < -1 || w >= n) throw std::runtime_error("edge tail out of range");
      if (w >= 0 && gr.out[l][w] != v)
        throw std::runtime_error("in/out arrays disagree");
    }
  }
}

void rebuild_in_edges(LabeledGraph& gr) {
  for (size_t l = 0; l < gr.out.size(); l++) {
    gr.in[l].assign(gr.num_vertices, -1);
    for (long v = 0; v < gr.num_vertices; v++) {
      long w = gr.out[l][v];
      if (w >= 0) {
        if (gr.in[l][w] >= 0)
          throw std::runtime_error("two edges with one label share a head");
        gr.in[l][w] = v;
      }
    }
  }
}

void refresh_good(LabeledGraph& gr) {
  gr.good = sofic_good_mask(gr, gr.radius);
  gr.delta = 1.0 - static_cast<double>(gr.num_good()) / gr.num_vertices;
}

// Left Cayley graph of the group itself (finite) or of its mod-n quotient.
LabeledGraph quotient_cayley(const GroupPtr& g, long modulus, long radius) {
  GroupPtr q = g;
  std::vector<GroupElement> images;
  if (g->is_finite()) {
    for (int l = 0; l < g->num_generators(); l++) images.push_back(g->generator(l));
  } else {
    auto p = QuotientMap::mod_quotient(g, modulus);
    q = p.target;
    images = p.gen_images;
  }

  LabeledGraph gr;
  gr.group = g;
  gr.num_vertices = q->order();
  gr.radius = radius;
  int L = g->num_generators();
  gr.out.assign(L, std::vector<long>(gr.num_vertices, -1));
  gr.in.assign(L, std::vector<long>(gr.num_vertices, -1));
  for (int l = 0; l < L; l++)
    for (long v = 0; v < gr.num_vertices; v++)
      gr.out[l][v] = q->index_of(q->mul(images[l], q->element_at(v)));
  rebuild_in_edges(gr);
  gr.good.assign(gr.num_vertices, 1);
  gr.delta = 0.0;
  return gr;
}

bool scalar_is_real(const Cyclotomic& c) { return c == c.conj(); }

double log_int(const Int& v) {
  if (v <= 0) throw std::invalid_argument("log of a non-positive integer");
  unsigned bits = boost::multiprecision::msb(v);
  if (bits <= 52) return std::log(v.convert_to<double>());
  Int top = v >> (bits - 52);
  return std::log(top.convert_to<double>()) + (bits - 52) * std::log(2.0);
}

}  // namespace

long LabeledGraph::num_good() const {
  return std::count(good.begin(), good.end(), static_cast<char>(1));
}

std::vector<char> sofic_good_mask(const LabeledGraph& gr, long radius) {
  validate_graph_shape(gr);
  auto bt = cayley_ball(gr.group, radius);
  std::vector<long> psi(bt.elems.size());
  std::vector<long> stamp(gr.num_vertices, -1);
  std::vector<char> mask(gr.num_vertices, 0);
  for (long v = 0; v < gr.num_vertices; v++)
    mask[v] = ball_matches(gr, bt, v, psi, stamp) ? 1 : 0;
  return mask;
}

void certify_sofic_graph(const LabeledGraph& gr) {
  auto mask = sofic_good_mask(gr, gr.radius);
  for (long v = 0; v < gr.num_vertices; v++)
    if (gr.good[v] && !mask[v])
      throw std::runtime_error("vertex " + std::to_string(v) +
                               " is marked good but its ball does not match "
                               "the Cayley ball at radius " +
                               std::to_string(gr.radius));
  double claimed = 1.0 - static_cast<double>(gr.num_good()) / gr.num_vertices;
  if (std::abs(claimed - gr.delta) > 1e-12)
    throw std::runtime_error("declared delta does not match the good set");
}

LabeledGraph build_sofic_stage(const GroupPtr& g, const SoficParams& p) {
  if (p.family == "file") return read_sofic_graph_file(p.path, g);

  LabeledGraph gr;
  if (p.family == "cycle") {
    if (g->kind() != GroupKind::FreeAbelian || g->rank() != 1)
      throw std::invalid_argument("cycle family approximates Z only");
    gr = quotient_cayley(g, p.size, p.radius);
  } else if (p.family == "torus") {
    if (g->is_finite())
      throw std::invalid_argument("torus family needs an infinite group");
    gr = quotient_cayley(g, p.size, p.radius);
  } else if (p.family == "cayley") {
    if (!g->is_finite())
      throw std::invalid_argument("cayley family needs a finite group");
    gr = quotient_cayley(g, 0, p.radius);
  } else {
    throw std::invalid_argument("unknown sofic family: " + p.family);
  }
  certify_sofic_graph(gr);
  return gr;
}

LabeledGraph splice_sofic_graph(const LabeledGraph& gr, long swaps, unsigned seed) {
  LabeledGraph g2 = gr;
  std::mt19937 rng(seed);
  int L = static_cast<int>(g2.out.size());
  for (long s = 0; s < swaps; s++) {
    int l = rng() % L;
    for (int attempt = 0; attempt < 64; attempt++) {
      long a = rng() % g2.num_vertices;
      long b = rng() % g2.num_vertices;
      if (a == b) continue;
      if (g2.out[l][a] < 0 || g2.out[l][b] < 0) continue;
      if (g2.out[l][a] == g2.out[l][b]) continue;
      std::swap(g2.out[l][a], g2.out[l][b]);
      break;
    }
  }
  rebuild_in_edges(g2);
  refresh_good(g2);
  return g2;
}

LabeledGraph delete_sofic_edges(const LabeledGraph& gr, long deletions, unsigned seed) {
  LabeledGraph g2 = gr;
  std::mt19937 rng(seed);
  int L = static_cast<int>(g2.out.size());
  for (long s = 0; s < deletions; s++) {
    for (int attempt = 0; attempt < 64; attempt++) {
      int l = rng() % L;
      long v = rng() % g2.num_vertices;
      if (g2.out[l][v] < 0) continue;
      g2.in[l][g2.out[l][v]] = -1;
      g2.out[l][v] = -1;
      break;
    }
  }
  refresh_good(g2);
  return g2;
}

LabeledGraph read_sofic_graph(std::istream& is, const GroupPtr& g) {
  auto fail = [](const std::string& why) {
    throw std::runtime_error("sofic graph file: " + why);
  };
  std::string tok;
  if (!(is >> tok) || tok != "sofic-graph") fail("missing sofic-graph header");

  auto expect = [&](const char* key) {
    if (!(is >> tok) || tok != key) fail(std::string("expected ") + key);
    long v;
    if (!(is >> v)) fail(std::string("bad value for ") + key);
    return v;
  };
  long labels = expect("labels");
  if (labels != g->num_generators())
    fail("label count does not match the group generators");
  long n = expect("vertices");
  if (n < 1) fail("no vertices");
  long radius = expect("radius");
  if (radius < 0) fail("negative radius");
  long edges = expect("edges");

  LabeledGraph gr;
  gr.group = g;
  gr.num_vertices = n;
  gr.radius = radius;
  gr.out.assign(labels, std::vector<long>(n, -1));
  gr.in.assign(labels, std::vector<long>(n, -1));
  for (long i = 0; i < edges; i++) {
    long l, a, b;
    if (!(is >> l >> a >> b)) fail("truncated edge list");
    if (l < 0 || l >= labels || a < 0 || a >= n || b < 0 || b >= n)
      fail("edge indices out of range");
    if (gr.out[l][a] >= 0) fail("duplicate edge label at one tail");
    gr.out[l][a] = b;
  }
  rebuild_in_edges(gr);

  if (!(is >> tok) || tok != "good") fail("missing good list");
  if (!(is >> tok)) fail("truncated good list");
  if (tok == "all") {
    gr.good.assign(n, 1);
  } else {
    long k = std::stol(tok);
    if (k < 0 || k > n) fail("bad good count");
    gr.good.assign(n, 0);
    for (long i = 0; i < k; i++) {
      long v;
      if (!(is >> v)) fail("truncated good list");
      if (v < 0 || v >= n) fail("good vertex out of range");
      if (gr.good[v]) fail("duplicate good vertex");
      gr.good[v] = 1;
    }
  }
  gr.delta = 1.0 - static_cast<double>(gr.num_good()) / n;
  certify_sofic_graph(gr);
  return gr;
}

LabeledGraph read_sofic_graph_file(const std::string& path, const GroupPtr& g) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open sofic graph file: " + path);
  return read_sofic_graph(is, g);
}

void write_sofic_graph(std::ostream& os, const LabeledGraph& gr) {
  long edges = 0;
  for (const auto& row : gr.out)
    edges += std::count_if(row.begin(), row.end(), [](long w) { return w >= 0; });
  os << "sofic-graph\n";
  os << "labels " << gr.out.size() << "\n";
  os << "vertices " << gr.num_vertices << "\n";
  os << "radius " << gr.radius << "\n";
  os << "edges " << edges << "\n";
  for (size_t l = 0; l < gr.out.size(); l++)
    for (long v = 0; v < gr.num_vertices; v++)
      if (gr.out[l][v] >= 0) os << l << " " << v << " " << gr.out[l][v] << "\n";
  if (gr.num_good() == gr.num_vertices) {
    os << "good all\n";
  } else {
    os << "good " << gr.num_good();
    for (long v = 0; v < gr.num_vertices; v++)
      if (gr.good[v]) os << " " << v;
    os << "\n";
  }
}

long operator_width(const RingMatrix<Cyclotomic>& A) {
  long w = 0;
  for (int k = 0; k < A.dim(); k++)
    for (int l = 0; l < A.dim(); l++)
      for (const auto& [g, c] : A.at(k, l).terms())
        w = std::max(w, A.group()->word_length(g));
  return w;
}

SoficKernel sofic_kernel(const RingMatrix<Cyclotomic>& A, const LabeledGraph& gr) {
  if (!A.group()->same_descriptor(*gr.group))
    throw std::invalid_argument("matrix and graph approximate different groups");
  long width = operator_width(A);
  if (width > gr.radius)
    throw std::invalid_argument("operator width exceeds the certified radius");

  int d = A.dim();
  auto bt = cayley_ball(A.group(), width);
  std::map<GroupElement, long, ElementLess> index;
  for (size_t i = 0; i < bt.elems.size(); i++) index[bt.elems[i]] = i;

  // support of A regrouped by ball element
  struct Term {
    int k, l;
    Cyclotomic c;
    std::complex<double> cv;
  };
  std::vector<std::vector<Term>> support(bt.elems.size());
  for (int k = 0; k < d; k++)
    for (int l = 0; l < d; l++)
      for (const auto& [g, c] : A.at(k, l).terms())
        support[index.at(g)].push_back({k, l, c, c.to_complex()});

  SoficKernel K;
  K.group = A.group();
  K.num_vertices = gr.num_vertices;
  K.block_dim = d;
  K.dim = gr.num_vertices * d;
  K.width = width;
  K.hermitian = is_hermitian(A) && gr.num_good() == gr.num_vertices;
  K.normalization = Rational(1, gr.num_vertices);
  K.all_real = true;
  for (int k = 0; k < d; k++)
    for (int l = 0; l < d; l++)
      for (const auto& [g, c] : A.at(k, l).terms())
        if (!scalar_is_real(c)) K.all_real = false;

  std::vector<long> psi(bt.elems.size());
  for (long y = 0; y < gr.num_vertices; y++) {
    if (!gr.good[y]) continue;
    psi[0] = y;
    for (size_t i = 1; i < bt.elems.size(); i++) {
      long x = psi[bt.parent[i]];
      int e = bt.parent_edge[i];
      long w = e >= 0 ? gr.out[e][x] : gr.in[~e][x];
      if (w < 0)
        throw std::runtime_error("graph ball is incomplete at a good vertex");
      psi[i] = w;
    }
    for (size_t i = 0; i < bt.elems.size(); i++)
      for (const auto& t : support[i]) {
        long row = psi[i] * d + t.k;
        long col = y * d + t.l;
        K.entries.push_back({row, col, t.cv});
        K.exact_entries.push_back({row, col, t.c});
      }
  }
  return K;
}

std::vector<double> sofic_eigenvalues(const SoficKernel& K) {
  FiniteRealization shim;
  shim.dim = K.dim;
  shim.hermitian = K.hermitian;
  shim.all_real = K.all_real;
  shim.entries = K.entries;
  return eigh(shim).eigenvalues;
}

SoficDetStar det_star(const SoficKernel& K, double tau) {
  if (!K.hermitian)
    throw std::invalid_argument("det* needs a Hermitian kernel");
  auto ev = sofic_eigenvalues(K);
  double lmax = 0;
  for (double v : ev) lmax = std::max(lmax, std::abs(v));
  if (tau < 0) tau = 1e-10 * (1 + lmax);
  if (!ev.empty() && ev.front() < -tau)
    throw std::runtime_error("kernel has negative spectrum beyond -tau");

  SoficDetStar out;
  for (double v : ev) {
    if (v > tau)
      out.log_value += std::log(v);
    else
      out.kernel_dim++;
  }
  out.value = std::exp(out.log_value);
  if (out.kernel_dim == K.dim) return out;  // zero kernel, empty product

  if (K.dim <= kDetStarExactLimit) {
    std::map<std::pair<long, long>, Cyclotomic> acc;
    for (const auto& t : K.exact_entries) acc[{t.row, t.col}] += t.value;
    bool integral = true;
    for (const auto& [rc, c] : acc) {
      if (!c.is_rational() || denominator(c.rational_part()) != 1) {
        integral = false;
        break;
      }
    }
    if (integral) {
      std::vector<std::vector<Int>> M(K.dim, std::vector<Int>(K.dim, 0));
      for (const auto& [rc, c] : acc)
        M[rc.first][rc.second] = numerator(c.rational_part());
      auto cert = det_star_certificate(M);
      if (cert.kernel_dim != out.kernel_dim)
        throw std::runtime_error("exact and float kernel dimensions disagree");
      double lc = log_int(cert.value);
      if (std::abs(lc - out.log_value) > 1e-6 * (1 + std::abs(out.log_value)))
        throw std::runtime_error("exact det* disagrees with the eigenvalue product");
      out.certificate = cert.value;
    }
  }
  return out;
}

std::vector<SoficLndetRow> sofic_lndet_limit(const RingMatrix<Cyclotomic>& A,
                                             const std::vector<LabeledGraph>& stages) {
  std::vector<std::future<SoficLndetRow>> futs;
  for (size_t i = 0; i < stages.size(); i++) {
    const auto& st = stages[i];
    futs.push_back(std::async(std::launch::async, [&A, &st, i]() {
      auto ds = det_star(sofic_kernel(A, st));
      SoficLndetRow row;
      row.stage_index = static_cast<long>(i);
      row.vertices = st.num_vertices;
      row.lndet = ds.log_value / st.num_vertices;
      row.kernel_dim = ds.kernel_dim;
      row.certified = ds.certificate.has_value();
      if (row.certified) row.certificate = *ds.certificate;
      return row;
    }));
  }
  std::vector<SoficLndetRow> rows;
  for (auto& f : futs) rows.push_back(f.get());
  return rows;
}

}  // namespace specdens
