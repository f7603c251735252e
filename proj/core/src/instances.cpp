#include "lagcut/instances.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "lagcut/error.hpp"

namespace lagcut {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Largest multiple of n that fits; draws above it are rejected.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  while (true) {
    const std::uint64_t v = engine_();
    if (v < limit) return v % n;
  }
}

long Rng::uniform_int(long lo, long hi) {
  return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::grid(double lo, double hi, long steps) {
  const long k = uniform_int(0, steps);
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------- SSLP

SipInstance gen_sslp(const SslpParams& p) {
  if (p.m < 1 || p.n < 1 || p.n_scenarios < 1) {
    throw Error(ErrorCode::InvalidArgument, "sslp: m, n and scenario count must be >= 1");
  }
  Rng rng(derive_seed(p.seed, 1));
  const int m = p.m, n = p.n;
  SipInstance inst;
  inst.name = "sslp" + std::to_string(p.k) + "-" + std::to_string(m) + "-" + std::to_string(n) +
              "-" + std::to_string(p.n_scenarios);
  inst.n = m;
  inst.first.A = SparseMatrix(0, m);
  for (int j = 0; j < m; ++j) {
    inst.first.c.push_back(static_cast<double>(rng.uniform_int(40, 80)));
    inst.first.types.push_back(VarType::Binary);
    inst.first.lower.push_back(0.0);
    inst.first.upper.push_back(1.0);
  }
  std::vector<double> d(static_cast<std::size_t>(n) * m);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      d[i * m + j] = static_cast<double>(rng.uniform_int(0, 25));
      total += d[i * m + j];
    }
  }
  const double u = total / m;

  // y_ij at column i*m + j, shortage y_0j at n*m + j.
  const int ny = n * m + m;
  const int rows = m + 2 * n;
  std::vector<Triplet> w, t;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) w.push_back({j, i * m + j, -d[i * m + j]});
    w.push_back({j, n * m + j, 1.0});
    t.push_back({j, j, u});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      w.push_back({m + 2 * i, i * m + j, 1.0});
      w.push_back({m + 2 * i + 1, i * m + j, -1.0});
    }
  }
  const SparseMatrix W(rows, ny, w);
  const SparseMatrix T(rows, m, t);
  for (int s = 0; s < p.n_scenarios; ++s) {
    Scenario sc;
    sc.p = 1.0 / p.n_scenarios;
    sc.W = W;
    sc.T = T;
    sc.h.assign(rows, 0.0);
    for (int i = 0; i < n; ++i) {
      const double hi = rng.bernoulli_half() ? 1.0 : 0.0;
      sc.h[m + 2 * i] = hi;
      sc.h[m + 2 * i + 1] = -hi;
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        sc.q.push_back(-d[i * m + j]);
        sc.types.push_back(VarType::Binary);
        sc.lower.push_back(0.0);
        sc.upper.push_back(1.0);
      }
    }
    for (int j = 0; j < m; ++j) {
      sc.q.push_back(1000.0);
      sc.types.push_back(VarType::Continuous);
      sc.lower.push_back(0.0);
      sc.upper.push_back(kInf);
    }
    inst.scenarios.push_back(std::move(sc));
  }
  return inst;
}

// ---------------------------------------------------------------- SNIP

std::vector<double> max_reliability_to(int nodes, const std::vector<SnipArc>& arcs, int target) {
  // Dijkstra in the (max, *) semiring over reversed arcs; equivalent to
  // shortest paths on -log r since every r lies in (0, 1].
  std::vector<std::vector<int>> into(nodes);
  for (std::size_t a = 0; a < arcs.size(); ++a) into[arcs[a].head].push_back(static_cast<int>(a));
  std::vector<double> best(nodes, 0.0);
  std::vector<char> done(nodes, 0);
  best[target] = 1.0;
  std::priority_queue<std::pair<double, int>> heap;
  heap.push({1.0, target});
  while (!heap.empty()) {
    const auto [value, j] = heap.top();
    heap.pop();
    if (done[j]) continue;
    done[j] = 1;
    for (int a : into[j]) {
      const int i = arcs[a].tail;
      const double cand = value * arcs[a].r;
      if (!done[i] && cand > best[i]) {
        best[i] = cand;
        heap.push({cand, i});
      }
    }
  }
  return best;
}

namespace {

bool build_network(const SnipParams& p, Rng& rng, SnipNetwork& net) {
  const int nodes = p.nodes;
  const int layers = std::max(2, static_cast<int>(std::lround(std::sqrt(nodes))));
  std::vector<std::vector<int>> layer_nodes(layers);
  std::vector<int> layer_of(nodes);
  for (int v = 0; v < nodes; ++v) {
    layer_of[v] = v * layers / nodes;
    layer_nodes[layer_of[v]].push_back(v);
  }
  std::set<std::pair<int, int>> pairs;
  std::vector<std::pair<int, int>> order;
  auto add = [&](int i, int j) {
    if (pairs.insert({i, j}).second) order.push_back({i, j});
  };
  auto pick = [&](const std::vector<int>& v) { return v[rng.below(v.size())]; };
  for (int v = 0; v < nodes; ++v) {
    if (layer_of[v] + 1 < layers) add(v, pick(layer_nodes[layer_of[v] + 1]));
  }
  std::vector<char> has_in(nodes, 0);
  for (const auto& [i, j] : order) has_in[j] = 1;
  for (int v = 0; v < nodes; ++v) {
    if (layer_of[v] > 0 && !has_in[v]) add(pick(layer_nodes[layer_of[v] - 1]), v);
  }
  long attempts = 0;
  while (static_cast<int>(order.size()) < p.arcs && attempts++ < 100L * p.arcs) {
    const int i = static_cast<int>(rng.below(nodes));
    if (layer_of[i] + 1 >= layers) continue;
    const int hop = (layer_of[i] + 2 < layers && rng.below(4) == 0) ? 2 : 1;
    add(i, pick(layer_nodes[layer_of[i] + hop]));
  }

  net.nodes = nodes;
  net.arcs.clear();
  for (const auto& [i, j] : order) {
    SnipArc a;
    a.tail = i;
    a.head = j;
    a.r = rng.grid(p.r_lo, p.r_hi, 600);
    a.q = a.r * rng.grid(p.rho_lo, p.rho_hi, 400);
    net.arcs.push_back(a);
  }
  const int n_arcs = static_cast<int>(net.arcs.size());
  if (p.interdictable > n_arcs) return false;
  std::vector<int> idx(n_arcs);
  for (int a = 0; a < n_arcs; ++a) idx[a] = a;
  for (int k = 0; k < p.interdictable; ++k) {
    const int r = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_arcs - k)));
    std::swap(idx[k], idx[r]);
  }
  std::vector<int> chosen(idx.begin(), idx.begin() + p.interdictable);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t k = 0; k < chosen.size(); ++k) net.arcs[chosen[k]].sensor = static_cast<int>(k);

  net.origin.clear();
  net.destination.clear();
  net.u.clear();
  for (int s = 0; s < p.n_scenarios; ++s) {
    bool found = false;
    for (int tries = 0; tries < 32 && !found; ++tries) {
      const int o = pick(layer_nodes.front());
      const int d = pick(layer_nodes.back());
      auto u = max_reliability_to(nodes, net.arcs, d);
      if (u[o] > 0.0) {
        net.origin.push_back(o);
        net.destination.push_back(d);
        net.u.push_back(std::move(u));
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

SipInstance gen_snip(const SnipParams& p, SnipNetwork* network) {
  if (p.nodes < 2 || p.arcs < 1 || p.interdictable < 1 || p.n_scenarios < 1 || !(p.budget > 0)) {
    throw Error(ErrorCode::InvalidArgument, "snip: invalid size parameters");
  }
  if (!(0.0 < p.r_lo && p.r_lo <= p.r_hi && p.r_hi <= 1.0 && 0.0 < p.rho_lo &&
        p.rho_lo <= p.rho_hi && p.rho_hi < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "snip: reliability ranges must give 0 < q < r <= 1");
  }
  SnipNetwork net;
  bool ok = false;
  for (int attempt = 0; attempt < p.max_retries && !ok; ++attempt) {
    Rng rng(derive_seed(p.seed, 100 + static_cast<std::uint64_t>(attempt)));
    ok = build_network(p, rng, net);
  }
  if (!ok) {
    throw Error(ErrorCode::InvalidArgument, "snip: no connected network within retry budget");
  }

  SipInstance inst;
  std::ostringstream name;
  name << "snip-" << p.nodes << "-" << p.arcs << "-" << p.interdictable << "-"
       << format_double(p.budget) << "-" << p.n_scenarios << "-s" << p.seed;
  inst.name = name.str();
  const int nx = p.interdictable;
  inst.n = nx;
  std::vector<Triplet> a;
  for (int k = 0; k < nx; ++k) {
    a.push_back({0, k, -1.0});
    inst.first.c.push_back(0.0);
    inst.first.types.push_back(VarType::Binary);
    inst.first.lower.push_back(0.0);
    inst.first.upper.push_back(1.0);
  }
  inst.first.A = SparseMatrix(1, nx, a);
  inst.first.b = {-p.budget};

  for (int s = 0; s < p.n_scenarios; ++s) {
    Scenario sc;
    sc.p = 1.0 / p.n_scenarios;
    std::vector<Triplet> w, t;
    int row = 0;
    for (const auto& arc : net.arcs) {
      w.push_back({row, arc.tail, 1.0});
      w.push_back({row, arc.head, -arc.r});
      if (arc.sensor >= 0) {
        t.push_back({row, arc.sensor, (arc.r - arc.q) * net.u[s][arc.head]});
        sc.h.push_back(0.0);
        ++row;
        w.push_back({row, arc.tail, 1.0});
        w.push_back({row, arc.head, -arc.q});
      }
      sc.h.push_back(0.0);
      ++row;
    }
    const int v = net.destination[s];
    w.push_back({row, v, 1.0});
    sc.h.push_back(1.0);
    ++row;
    w.push_back({row, v, -1.0});
    sc.h.push_back(-1.0);
    ++row;
    sc.W = SparseMatrix(row, p.nodes, w);
    sc.T = SparseMatrix(row, nx, t);
    sc.q.assign(p.nodes, 0.0);
    sc.q[net.origin[s]] = 1.0;
    sc.types.assign(p.nodes, VarType::Continuous);
    sc.lower.assign(p.nodes, 0.0);
    sc.upper.assign(p.nodes, kInf);
    inst.scenarios.push_back(std::move(sc));
  }
  if (network != nullptr) *network = std::move(net);
  return inst;
}

// ---------------------------------------------------------------- tiny

SipInstance gen_tiny(const TinyParams& p) {
  if (p.n < 1 || p.n_scenarios < 1 || p.ny < 1 || p.rows < 1 || p.h_max < 1) {
    throw Error(ErrorCode::InvalidArgument, "tiny: sizes must be >= 1");
  }
  Rng rng(derive_seed(p.seed, 7));
  SipInstance inst;
  inst.name = "tiny-" + std::to_string(p.n) + "-" + std::to_string(p.n_scenarios) + "-" +
              std::to_string(p.ny) + "-s" + std::to_string(p.seed);
  inst.n = p.n;
  for (int j = 0; j < p.n; ++j) {
    inst.first.c.push_back(static_cast<double>(rng.uniform_int(-5, 5)));
    inst.first.types.push_back(VarType::Binary);
    inst.first.lower.push_back(0.0);
    inst.first.upper.push_back(1.0);
  }
  if (p.cardinality && p.n >= 2) {
    std::vector<Triplet> a;
    for (int j = 0; j < p.n; ++j) a.push_back({0, j, -1.0});
    inst.first.A = SparseMatrix(1, p.n, a);
    inst.first.b = {-static_cast<double>(rng.uniform_int(1, p.n - 1))};
  } else {
    inst.first.A = SparseMatrix(0, p.n);
  }
  std::vector<double> weight(p.n_scenarios);
  double total = 0.0;
  for (auto& w : weight) total += (w = static_cast<double>(rng.uniform_int(1, 4)));
  for (int s = 0; s < p.n_scenarios; ++s) {
    Scenario sc;
    sc.p = weight[s] / total;
    std::vector<Triplet> w, t;
    for (int r = 0; r < p.rows; ++r) {
      bool positive = false;
      for (int j = 0; j < p.ny; ++j) {
        const long v = rng.uniform_int(0, 3);
        if (v > 0) {
          w.push_back({r, j, static_cast<double>(v)});
          positive = true;
        }
      }
      if (!positive) {
        w.push_back({r, static_cast<int>(rng.below(p.ny)), static_cast<double>(rng.uniform_int(1, 3))});
      }
      for (int j = 0; j < p.n; ++j) {
        const long v = rng.uniform_int(0, 3);
        if (v > 0) t.push_back({r, j, static_cast<double>(v)});
      }
      sc.h.push_back(static_cast<double>(rng.uniform_int(1, p.h_max)));
    }
    sc.W = SparseMatrix(p.rows, p.ny, w);
    sc.T = SparseMatrix(p.rows, p.n, t);
    for (int j = 0; j < p.ny; ++j) {
      sc.q.push_back(static_cast<double>(rng.uniform_int(1, 10)));
      sc.types.push_back(p.integer_recourse ? VarType::Integer : VarType::Continuous);
      sc.lower.push_back(0.0);
      sc.upper.push_back(static_cast<double>(p.h_max));
    }
    inst.scenarios.push_back(std::move(sc));
  }
  return inst;
}

// ---------------------------------------------------------------- text format

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kMagic = "LAGCUT-SIP";
constexpr int kVersion = 1;

char type_letter(VarType t) {
  switch (t) {
    case VarType::Continuous: return 'C';
    case VarType::Integer: return 'I';
    case VarType::Binary: return 'B';
  }
  return '?';
}

void write_vars(std::ostream& out, const std::vector<VarType>& types, const std::vector<double>& lo,
                const std::vector<double>& hi, const std::vector<double>& cost) {
  for (std::size_t j = 0; j < types.size(); ++j) {
    out << type_letter(types[j]) << ' ' << format_double(lo[j]) << ' ' << format_double(hi[j])
        << ' ' << format_double(cost[j]) << '\n';
  }
}

void write_matrix(std::ostream& out, const char* tag, const SparseMatrix& m) {
  out << tag << ' ' << m.nnz() << '\n';
  for (const auto& t : m.entries()) {
    out << t.row << ' ' << t.col << ' ' << format_double(t.value) << '\n';
  }
}

void write_vector(std::ostream& out, const char* tag, const std::vector<double>& v) {
  out << tag << '\n';
  for (double x : v) out << format_double(x) << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  struct Token {
    std::string text;
    int line = 0;
    int column = 0;
  };

  Token next(const char* expected) {
    while (true) {
      while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
      if (pos_ < line_.size() && line_[pos_] != '#') break;
      if (!std::getline(in_, line_)) {
        throw ParseError(line_no_ == 0 ? 1 : line_no_, static_cast<int>(line_.size()) + 1,
                         std::string("unexpected end of file, expected ") + expected);
      }
      ++line_no_;
      pos_ = 0;
    }
    Token tok;
    tok.line = line_no_;
    tok.column = static_cast<int>(pos_) + 1;
    const auto start = pos_;
    while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    tok.text = line_.substr(start, pos_ - start);
    return tok;
  }

  /// Remainder of the current line after one separating space.
  std::string rest_of_line() {
    if (pos_ < line_.size() && line_[pos_] == ' ') ++pos_;
    std::string rest = line_.substr(std::min(pos_, line_.size()));
    pos_ = line_.size();
    return rest;
  }

  void keyword(const char* kw) {
    const auto tok = next(kw);
    if (tok.text != kw) {
      throw ParseError(tok.line, tok.column,
                       std::string("expected '") + kw + "', found '" + tok.text + "'");
    }
  }

  long integer(const char* what, long lo, long hi) {
    const auto tok = next(what);
    long v = 0;
    const auto* b = tok.text.data();
    const auto* e = b + tok.text.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
      throw ParseError(tok.line, tok.column, std::string("expected integer ") + what);
    }
    if (v < lo || v > hi) {
      throw ParseError(tok.line, tok.column, std::string(what) + " out of range");
    }
    return v;
  }

  double real(const char* what) {
    const auto tok = next(what);
    if (tok.text == "inf") return kInf;
    if (tok.text == "-inf") return -kInf;
    double v = 0.0;
    const auto* b = tok.text.data();
    const auto* e = b + tok.text.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
      throw ParseError(tok.line, tok.column, std::string("expected number for ") + what);
    }
    return v;
  }

  VarType type() {
    const auto tok = next("variable type");
    if (tok.text == "C") return VarType::Continuous;
    if (tok.text == "I") return VarType::Integer;
    if (tok.text == "B") return VarType::Binary;
    throw ParseError(tok.line, tok.column, "variable type must be C, I or B");
  }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

constexpr long kMaxDim = 100'000'000;

void read_vars(Reader& r, int count, std::vector<VarType>& types, std::vector<double>& lo,
               std::vector<double>& hi, std::vector<double>& cost) {
  for (int j = 0; j < count; ++j) {
    types.push_back(r.type());
    lo.push_back(r.real("lower bound"));
    hi.push_back(r.real("upper bound"));
    cost.push_back(r.real("cost"));
  }
}

SparseMatrix read_matrix(Reader& r, const char* tag, int rows, int cols) {
  r.keyword(tag);
  const long nnz = r.integer("nonzero count", 0, kMaxDim);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    const int i = static_cast<int>(r.integer("row index", 0, rows - 1));
    const int j = static_cast<int>(r.integer("column index", 0, cols - 1));
    t.push_back({i, j, r.real("matrix entry")});
  }
  return SparseMatrix(rows, cols, std::move(t));
}

std::vector<double> read_vector(Reader& r, const char* tag, int count) {
  r.keyword(tag);
  std::vector<double> v;
  for (int k = 0; k < count; ++k) v.push_back(r.real(tag));
  return v;
}

}  // namespace

void write_instance(const SipInstance& inst, std::ostream& out) {
  inst.validate();
  if (inst.name.find('\n') != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "instance name may not contain a newline");
  }
  out << kMagic << ' ' << kVersion << '\n';
  out << "NAME " << inst.name << '\n';
  out << "N " << inst.n << '\n';
  out << "FIRST " << inst.first.A.rows() << '\n';
  out << "VARS\n";
  write_vars(out, inst.first.types, inst.first.lower, inst.first.upper, inst.first.c);
  write_matrix(out, "A", inst.first.A);
  write_vector(out, "RHS", inst.first.b);
  out << "SCENARIOS " << inst.num_scenarios() << '\n';
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    const auto& sc = inst.scenarios[s];
    out << "SCEN " << s << '\n';
    out << "PROB " << format_double(sc.p) << '\n';
    out << "NY " << sc.num_y() << " ROWS " << sc.num_rows() << '\n';
    out << "YVARS\n";
    write_vars(out, sc.types, sc.lower, sc.upper, sc.q);
    write_matrix(out, "W", sc.W);
    write_matrix(out, "T", sc.T);
    write_vector(out, "H", sc.h);
  }
  out << "END\n";
}

void write_instance(const SipInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  write_instance(inst, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

SipInstance read_instance(std::istream& in) {
  Reader r(in);
  r.keyword(kMagic);
  {
    const auto version = r.integer("format version", 0, kMaxDim);
    if (version != kVersion) {
      throw Error(ErrorCode::VersionMismatch, "instance format version " +
                                                  std::to_string(version) + ", reader supports " +
                                                  std::to_string(kVersion));
    }
  }
  SipInstance inst;
  r.keyword("NAME");
  inst.name = r.rest_of_line();
  r.keyword("N");
  inst.n = static_cast<int>(r.integer("first-stage size", 0, kMaxDim));
  r.keyword("FIRST");
  const int m1 = static_cast<int>(r.integer("first-stage rows", 0, kMaxDim));
  r.keyword("VARS");
  read_vars(r, inst.n, inst.first.types, inst.first.lower, inst.first.upper, inst.first.c);
  inst.first.A = read_matrix(r, "A", m1, inst.n);
  inst.first.b = read_vector(r, "RHS", m1);
  r.keyword("SCENARIOS");
  const int ns = static_cast<int>(r.integer("scenario count", 1, kMaxDim));
  for (int s = 0; s < ns; ++s) {
    Scenario sc;
    r.keyword("SCEN");
    r.integer("scenario index", s, s);
    r.keyword("PROB");
    sc.p = r.real("probability");
    r.keyword("NY");
    const int ny = static_cast<int>(r.integer("second-stage size", 0, kMaxDim));
    r.keyword("ROWS");
    const int m = static_cast<int>(r.integer("second-stage rows", 0, kMaxDim));
    r.keyword("YVARS");
    read_vars(r, ny, sc.types, sc.lower, sc.upper, sc.q);
    sc.W = read_matrix(r, "W", m, ny);
    sc.T = read_matrix(r, "T", m, inst.n);
    sc.h = read_vector(r, "H", m);
    inst.scenarios.push_back(std::move(sc));
  }
  r.keyword("END");
  inst.validate();
  return inst;
}

SipInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_instance(in);
}

}  // namespace lagcut
