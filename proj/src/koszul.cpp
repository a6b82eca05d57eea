#include "chern/koszul.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace chern {

namespace {

void check_same(const HomogPoly& a, const HomogPoly& b) {
  if (a.nvars() != b.nvars()) throw std::invalid_argument("polynomials in different numbers of variables");
}

// Sign of dZ_a ^ dZ_b reordered into increasing order; 0 if they share a factor.
int wedge_sign(unsigned a, unsigned b) {
  if (a & b) return 0;
  int swaps = 0;
  for (unsigned m = b; m; m &= m - 1) {
    unsigned low = m & (~m + 1);
    swaps += std::popcount(a & ~(low | (low - 1)));
  }
  return swaps % 2 ? -1 : 1;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\n");
  return s.substr(a, b - a + 1);
}

int parse_index(const std::string& s, std::size_t& i, int nvars) {
  std::size_t start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == start) throw std::invalid_argument("expected an index in '" + s + "'");
  int v = std::stoi(s.substr(start, i - start));
  if (v >= nvars) throw std::invalid_argument("variable index out of range in '" + s + "'");
  return v;
}

HomogPoly parse_term(const std::string& term, int n) {
  std::size_t i = 0;
  auto skip = [&] {
    while (i < term.size() && std::isspace(static_cast<unsigned char>(term[i]))) ++i;
  };
  BigRational c = 1;
  skip();
  std::size_t start = i;
  if (i < term.size() && term[i] == '-') ++i;
  while (i < term.size() && (std::isdigit(static_cast<unsigned char>(term[i])) || term[i] == '/')) ++i;
  std::string coef = term.substr(start, i - start);
  if (coef == "-") {
    c = -1;
  } else if (!coef.empty()) {
    try {
      c = BigRational(coef);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad coefficient '" + coef + "'");
    }
  }
  skip();
  if (i < term.size() && term[i] == '*') ++i;
  Monomial m{std::vector<int>(n, 0), 0};
  int sign = 1;
  while (true) {
    skip();
    if (i >= term.size()) break;
    if (term[i] == 'Z') {
      ++i;
      int v = parse_index(term, i, n);
      int e = 1;
      if (i < term.size() && term[i] == '^') {
        ++i;
        std::size_t s0 = i;
        while (i < term.size() && std::isdigit(static_cast<unsigned char>(term[i]))) ++i;
        if (i == s0) throw std::invalid_argument("expected an exponent in '" + term + "'");
        e = std::stoi(term.substr(s0, i - s0));
      }
      m.exps[v] += e;
    } else if (term[i] == '[') {
      ++i;
      while (true) {
        skip();
        if (i < term.size() && term[i] == ']') {
          ++i;
          break;
        }
        if (term.compare(i, 2, "dZ") != 0) throw std::invalid_argument("expected dZ in '" + term + "'");
        i += 2;
        int v = parse_index(term, i, n);
        sign *= wedge_sign(m.dmask, 1u << v);
        m.dmask |= 1u << v;
        skip();
        if (i < term.size() && term[i] == '^') ++i;
      }
    } else {
      throw std::invalid_argument("unexpected character in '" + term + "'");
    }
  }
  HomogPoly r(n);
  if (sign != 0) r.add_term(m, sign * c);
  return r;
}

}  // namespace

HomogPoly HomogPoly::constant(int nvars, const BigRational& c) {
  HomogPoly r(nvars);
  r.add_term(Monomial{std::vector<int>(nvars, 0), 0}, c);
  return r;
}

HomogPoly HomogPoly::coordinate(int nvars, int i) {
  HomogPoly r(nvars);
  Monomial m{std::vector<int>(nvars, 0), 0};
  m.exps.at(i) = 1;
  r.add_term(m, 1);
  return r;
}

HomogPoly HomogPoly::differential(int nvars, int i) {
  if (i < 0 || i >= nvars) throw std::out_of_range("differential index");
  HomogPoly r(nvars);
  r.add_term(Monomial{std::vector<int>(nvars, 0), 1u << i}, 1);
  return r;
}

void HomogPoly::add_term(const Monomial& m, const BigRational& c) {
  if (static_cast<int>(m.exps.size()) != n_) throw std::invalid_argument("monomial has the wrong number of variables");
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

std::optional<int> HomogPoly::degree() const {
  std::optional<int> d;
  for (const auto& [m, c] : terms_) {
    int k = std::popcount(m.dmask);
    for (int e : m.exps) k += e;
    if (d && *d != k) return std::nullopt;
    d = k;
  }
  return d;
}

std::optional<int> HomogPoly::form_degree() const {
  std::optional<int> d;
  for (const auto& [m, c] : terms_) {
    int k = std::popcount(m.dmask);
    if (d && *d != k) return std::nullopt;
    d = k;
  }
  return d;
}

HomogPoly operator+(const HomogPoly& a, const HomogPoly& b) {
  check_same(a, b);
  HomogPoly r = a;
  for (const auto& [m, c] : b.terms_) r.add_term(m, c);
  return r;
}

HomogPoly operator-(const HomogPoly& a, const HomogPoly& b) {
  check_same(a, b);
  HomogPoly r = a;
  for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
  return r;
}

HomogPoly operator*(const BigRational& s, const HomogPoly& a) {
  HomogPoly r(a.n_);
  for (const auto& [m, c] : a.terms_) r.add_term(m, s * c);
  return r;
}

HomogPoly operator*(const HomogPoly& a, const HomogPoly& b) {
  check_same(a, b);
  HomogPoly r(a.n_);
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      int s = wedge_sign(ma.dmask, mb.dmask);
      if (s == 0) continue;
      Monomial m{ma.exps, ma.dmask | mb.dmask};
      for (int i = 0; i < a.n_; ++i) m.exps[i] += mb.exps[i];
      r.add_term(m, s * ca * cb);
    }
  return r;
}

HomogPoly HomogPoly::pow(int k) const {
  if (k < 0) throw std::invalid_argument("negative power of a polynomial");
  HomogPoly r = constant(n_, 1);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

std::string HomogPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) out << " + ";
    first = false;
    out << c.str();
    std::vector<std::string> parts;
    for (int i = 0; i < n_; ++i) {
      if (m.exps[i] == 0) continue;
      std::string f = "Z" + std::to_string(i);
      if (m.exps[i] > 1) f += "^" + std::to_string(m.exps[i]);
      parts.push_back(f);
    }
    if (m.dmask) {
      std::string d = "[";
      for (int i = 0; i < n_; ++i)
        if (m.dmask & (1u << i)) d += (d.size() > 1 ? " ^ dZ" : "dZ") + std::to_string(i);
      parts.push_back(d + "]");
    }
    if (!parts.empty()) {
      out << " *";
      for (const std::string& p : parts) out << ' ' << p;
    }
  }
  return out.str();
}

HomogPoly HomogPoly::parse(const std::string& text, int nvars) {
  if (nvars < 1 || nvars > 16) throw std::invalid_argument("polynomials need 1 to 16 variables");
  HomogPoly r(nvars);
  std::string t = trim(text);
  if (t.empty()) throw std::invalid_argument("empty polynomial");
  if (t == "0") return r;
  std::size_t start = 0;
  while (true) {
    std::size_t plus = t.find('+', start);
    std::string term = trim(t.substr(start, plus == std::string::npos ? std::string::npos : plus - start));
    if (term.empty()) throw std::invalid_argument("empty term in '" + text + "'");
    r = r + parse_term(term, nvars);
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return r;
}

HomogPoly KoszulCocycle::numerator(const std::vector<int>& t) const {
  if (static_cast<int>(t.size()) != q + 1) throw std::invalid_argument("tuple length does not match the cochain degree");
  std::vector<int> s = t;
  int sign = 1;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j + 1 < s.size() - i; ++j)
      if (s[j] > s[j + 1]) {
        std::swap(s[j], s[j + 1]);
        sign = -sign;
      }
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) return HomogPoly(nvars);
  auto it = numerators.find(s);
  if (it == numerators.end()) return HomogPoly(nvars);
  return sign == 1 ? it->second : BigRational(-1) * it->second;
}

bool KoszulCocycle::degree_balanced() const {
  for (const auto& [t, num] : numerators) {
    if (num.is_zero()) continue;
    auto d = num.degree();
    if (!d || *d != (q + 1) * level) return false;
    auto f = num.form_degree();
    if (!f || *f != p) return false;
  }
  return true;
}

namespace {

// Increasing tuples of `size` distinct indices below n.
std::vector<std::vector<int>> increasing_tuples(int n, int size) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(size);
  auto rec = [&](auto&& self, int pos, int from) -> void {
    if (pos == size) {
      out.push_back(t);
      return;
    }
    for (int v = from; v < n; ++v) {
      t[pos] = v;
      self(self, pos + 1, v + 1);
    }
  };
  rec(rec, 0, 0);
  return out;
}

}  // namespace

KoszulCheck koszul_delta_check(const KoszulCocycle& eta) {
  KoszulCheck res;
  res.witness = HomogPoly(eta.nvars);
  const int l = eta.level;
  for (const auto& t : increasing_tuples(eta.nvars, eta.q + 2)) {
    HomogPoly sum(eta.nvars);
    for (int j = 0; j < eta.q + 2; ++j) {
      std::vector<int> face = t;
      face.erase(face.begin() + j);
      HomogPoly term = HomogPoly::coordinate(eta.nvars, t[j]).pow(l) * eta.numerator(face);
      sum = j % 2 ? sum - term : sum + term;
    }
    ++res.tuples_checked;
    if (!sum.is_zero() && res.ok) {
      res.ok = false;
      res.tuple = t;
      res.witness = sum;
    }
  }
  return res;
}

KoszulCocycle level_raise(const KoszulCocycle& eta, int l) {
  if (l < eta.level) throw std::invalid_argument("level_raise needs l >= the current level");
  KoszulCocycle r = eta;
  r.level = l;
  for (auto& [t, num] : r.numerators) {
    HomogPoly f = HomogPoly::constant(eta.nvars, 1);
    for (int a : t) f = f * HomogPoly::coordinate(eta.nvars, a);
    num = f.pow(l - eta.level) * num;
  }
  return r;
}

KoszulCocycle algebraic_atiyah(int n, int k, int p) {
  if (n < 2 || n > 16) throw std::invalid_argument("algebraic Atiyah cocycles need 2 to 16 homogeneous coordinates");
  if (p < 1 || p > n) throw std::invalid_argument("algebraic Atiyah cocycles need 1 <= p <= n");
  KoszulCocycle eta;
  eta.nvars = n;
  eta.q = p;
  eta.p = p;
  eta.level = p == 1 ? 1 : 2;
  auto Z = [n](int i) { return HomogPoly::coordinate(n, i); };
  auto dZ = [n](int i) { return HomogPoly::differential(n, i); };
  // Numerator of k dlog(Z_b / Z_a) over Z_a Z_b.
  auto one = [&](int a, int b) { return BigRational(k) * (Z(a) * dZ(b) - Z(b) * dZ(a)); };
  const BigRational sign = (p * (p - 1) / 2) % 2 ? -1 : 1;
  for (const auto& t : increasing_tuples(n, p + 1)) {
    HomogPoly num = HomogPoly::constant(n, sign);
    for (int j = 0; j < p; ++j) num = num * one(t[j], t[j + 1]);
    // The chain denominators give Z_t0 Z_tp and the interior squared; bring
    // them to (Z_t0 ... Z_tp)^level.
    if (p > 1) num = Z(t.front()) * Z(t.back()) * num;
    eta.numerators.emplace(t, num);
  }
  return eta;
}

FormJet evaluate_fraction(const KoszulCocycle& eta, const std::vector<int>& t, const ProjectiveSpace& space,
                          const ChartPoint& p) {
  if (space.dim() + 1 != eta.nvars) throw std::invalid_argument("cocycle and projective space do not match");
  const int nv = space.nvar(), nc = space.ncplx();
  std::vector<Jet> seeds = space.seed(p, 1);
  std::vector<Jet> Z = space.homogeneous(p.chart, seeds);
  std::vector<cplx> z(eta.nvars);
  std::vector<FormJet> dZ;
  for (int i = 0; i < eta.nvars; ++i) {
    z[i] = Z[i].value();
    JetMatrix m(1, 1);
    m(0, 0) = Z[i];
    dZ.push_back(ext_d(FormJet::function(nv, nc, m)));
  }
  FormJet out = FormJet::zero(nv, nc, eta.p, 1);
  const HomogPoly num = eta.numerator(t);
  for (const auto& [m, c] : num.terms()) {
    cplx v = c.convert_to<double>();
    for (int i = 0; i < eta.nvars; ++i)
      for (int e = 0; e < m.exps[i]; ++e) v *= z[i];
    JetMatrix one(1, 1);
    one(0, 0) = Jet(1.0);
    FormJet f = FormJet::function(nv, nc, one);
    for (int i = 0; i < eta.nvars; ++i)
      if (m.dmask & (1u << i)) f = wedge(f, dZ[i]);
    out = out + v * f;
  }
  cplx den = 1;
  for (int a : t)
    for (int e = 0; e < eta.level; ++e) den *= z[a];
  return (1.0 / den) * out;
}

}  // namespace chern
