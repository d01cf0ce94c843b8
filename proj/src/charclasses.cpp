#include "riccibench/charclasses.hpp"

#include <sstream>
#include <stdexcept>

namespace rb {

namespace {

int binom_mod2(int n, int k) { return k >= 0 && k <= n && (n & k) == k ? 1 : 0; }

std::string power(const std::string& x, int k) {
    if (k == 0) return "1";
    if (k == 1) return x;
    return x + "^" + std::to_string(k);
}

void unit_sw(Mod2Ring& R) { R.sw.assign(R.size(), 0); }

}  // namespace

int Mod2Ring::index(const std::string& basis_name) const {
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis[i].name == basis_name) return static_cast<int>(i);
    return -1;
}

Bits add(const Bits& x, const Bits& y) {
    if (x.size() != y.size()) throw std::invalid_argument("mod2: classes from different rings");
    Bits z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] ^ y[i];
    return z;
}

Bits multiply(const Mod2Ring& R, const Bits& x, const Bits& y) {
    if (x.size() != R.size() || y.size() != R.size()) throw std::invalid_argument("mod2: class size does not match the ring");
    Bits z(R.size(), 0);
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (!x[i]) continue;
        for (std::size_t j = 0; j < R.size(); ++j) {
            if (!y[j]) continue;
            const int p = R.mult[i][j];
            if (p >= 0) z[p] ^= 1;
        }
    }
    return z;
}

Bits component(const Mod2Ring& R, const Bits& x, int degree) {
    Bits z(R.size(), 0);
    for (std::size_t i = 0; i < R.size(); ++i)
        if (R.basis[i].degree == degree) z[i] = x[i];
    return z;
}

std::string format(const Mod2Ring& R, const Bits& x) {
    std::string s;
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (!x[i]) continue;
        if (!s.empty()) s += " + ";
        s += R.basis[i].name;
    }
    return s.empty() ? "0" : s;
}

Mod2Ring ring_cpn(int n) {
    if (n < 1) throw std::invalid_argument("ring_cpn: n >= 1");
    Mod2Ring R;
    R.name = "CP^" + std::to_string(n);
    for (int j = 0; j <= n; ++j) R.basis.push_back({power("b", j), 2 * j});
    R.mult.assign(n + 1, std::vector<int>(n + 1, -1));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) R.mult[i][j] = i + j;
    R.top_degree = 2 * n;
    R.fundamental = n;
    unit_sw(R);
    for (int j = 0; j <= n; ++j) R.sw[j] = static_cast<std::uint8_t>(binom_mod2(n + 1, j));
    return R;
}

Mod2Ring ring_wi(int i) {
    if (i < 1) throw std::invalid_argument("ring_wi: i >= 1");
    const int m = 2 * i;  // a^k for k < m
    Mod2Ring R;
    R.name = "W_" + std::to_string(i);
    for (int k = 0; k < m; ++k) R.basis.push_back({power("a", k), 2 * k});
    auto star = [&](int k) { return m + k; };
    for (int k = 0; k < m; ++k) R.basis.push_back({k == 1 ? "a*" : "(a^" + std::to_string(k) + ")*", 2 * (m - k) + 1});
    const int n = 2 * m;
    R.mult.assign(n, std::vector<int>(n, -1));
    for (int x = 0; x < m; ++x) {
        for (int y = 0; y < m; ++y)
            if (x + y < m) R.mult[x][y] = x + y;
        for (int k = 0; k < m; ++k)
            if (k >= x) R.mult[x][star(k)] = R.mult[star(k)][x] = star(k - x);
    }
    R.top_degree = 4 * i + 1;
    R.fundamental = star(0);
    unit_sw(R);
    // w_{2j} = C(2i+1, j) a^j and w_{2j+1} = j C(2i+1, j) (a^{2i-j})*, wherever those classes exist
    for (int j = 0; j < m; ++j) R.sw[j] = static_cast<std::uint8_t>(binom_mod2(2 * i + 1, j));
    for (int j = 1; j <= m; ++j) R.sw[star(m - j)] = static_cast<std::uint8_t>((j & 1) * binom_mod2(2 * i + 1, j));
    return R;
}

namespace {

std::string tensor_name(const std::string& x, const std::string& y) {
    if (x == "1") return y;
    if (y == "1") return x;
    return x + "·" + y;
}

}  // namespace

Bits kunneth_sw(const Mod2Ring& A, const Mod2Ring& B) {
    Bits z(A.size() * B.size(), 0);
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < B.size(); ++j) z[i * B.size() + j] = A.sw[i] & B.sw[j];
    return z;
}

Mod2Ring product(const Mod2Ring& A, const Mod2Ring& B) {
    Mod2Ring R;
    R.name = A.name + " x " + B.name;
    const std::size_t nb = B.size(), n = A.size() * nb;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < nb; ++j)
            R.basis.push_back({tensor_name(A.basis[i].name, B.basis[j].name), A.basis[i].degree + B.basis[j].degree});
    R.mult.assign(n, std::vector<int>(n, -1));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            const int pa = A.mult[x / nb][y / nb], pb = B.mult[x % nb][y % nb];
            if (pa >= 0 && pb >= 0) R.mult[x][y] = pa * static_cast<int>(nb) + pb;
        }
    R.top_degree = A.top_degree + B.top_degree;
    R.fundamental = A.fundamental * static_cast<int>(nb) + B.fundamental;
    // pull both total classes back and multiply
    Bits wa(n, 0), wb(n, 0);
    for (std::size_t i = 0; i < A.size(); ++i) wa[i * nb] = A.sw[i];
    for (std::size_t j = 0; j < nb; ++j) wb[j] = B.sw[j];
    R.sw = multiply(R, wa, wb);
    return R;
}

Mod2Ring product(const std::vector<Mod2Ring>& factors) {
    if (factors.empty()) throw std::invalid_argument("product: no factors");
    Mod2Ring R = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) R = product(R, factors[i]);
    return R;
}

bool is_associative(const Mod2Ring& R) {
    const int n = static_cast<int>(R.size());
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                const int xy = R.mult[x][y], yz = R.mult[y][z];
                const int l = xy < 0 ? -1 : R.mult[xy][z], r = yz < 0 ? -1 : R.mult[x][yz];
                if (l != r) return false;
            }
    return true;
}

bool is_commutative(const Mod2Ring& R) {
    for (std::size_t x = 0; x < R.size(); ++x)
        for (std::size_t y = 0; y < R.size(); ++y)
            if (R.mult[x][y] != R.mult[y][x]) return false;
    return true;
}

bool is_graded(const Mod2Ring& R) {
    for (std::size_t x = 0; x < R.size(); ++x)
        for (std::size_t y = 0; y < R.size(); ++y) {
            const int p = R.mult[x][y];
            const int d = R.basis[x].degree + R.basis[y].degree;
            if (p >= 0 && R.basis[p].degree != d) return false;
            if (d > R.top_degree && p >= 0) return false;
        }
    return true;
}

int sw_number(const Mod2Ring& R, const std::vector<SWPower>& monomial) {
    int degree = 0;
    for (const auto& f : monomial) {
        if (f.k < 0 || f.exponent < 0) throw std::invalid_argument("sw_number: negative index or exponent");
        degree += f.k * f.exponent;
    }
    if (degree != R.top_degree)
        throw std::invalid_argument("sw_number: monomial " + format(monomial) + " has degree " + std::to_string(degree) +
                                    ", " + R.name + " has dimension " + std::to_string(R.top_degree));
    Bits acc(R.size(), 0);
    acc[0] = 1;
    for (const auto& f : monomial) {
        const Bits wk = component(R, R.sw, f.k);
        for (int e = 0; e < f.exponent; ++e) acc = multiply(R, acc, wk);
    }
    return acc[R.fundamental];
}

int sw_number(const std::vector<Mod2Ring>& factors, const std::vector<SWPower>& monomial) {
    return sw_number(product(factors), monomial);
}

std::string format(const std::vector<SWPower>& monomial) {
    std::string s;
    for (const auto& f : monomial) s += power("w" + std::to_string(f.k), f.exponent);
    return s;
}

int mod2_rank(std::vector<std::vector<int>> rows) {
    int rank = 0;
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
        std::size_t pivot = rank;
        while (pivot < rows.size() && !(rows[pivot][c] & 1)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pivot], rows[rank]);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (static_cast<int>(r) != rank && (rows[r][c] & 1))
                for (std::size_t k = 0; k < cols; ++k) rows[r][k] ^= rows[rank][k] & 1;
        ++rank;
    }
    return rank;
}

SWTable omega9_generator_table() {
    SWTable t;
    const std::vector<std::vector<SWPower>> numbers = {{{3, 1}, {2, 3}}, {{7, 1}, {2, 1}}};
    const std::vector<std::pair<std::string, Mod2Ring>> manifolds = {{"W_2", ring_wi(2)},
                                                                     {"W_1 x CP^2", product(ring_wi(1), ring_cpn(2))}};
    for (const auto& n : numbers) t.numbers.push_back(format(n));
    for (const auto& [name, R] : manifolds) {
        t.manifolds.push_back(name);
        std::vector<int> row;
        for (const auto& n : numbers) row.push_back(sw_number(R, n));
        t.values.push_back(row);
    }
    t.rank = mod2_rank(t.values);
    return t;
}

json to_json(const SWTable& t) {
    return {{"manifolds", t.manifolds}, {"numbers", t.numbers}, {"values", t.values}, {"rank", t.rank}};
}

std::string format_table(const SWTable& t) {
    std::size_t w = 0;
    for (const auto& m : t.manifolds) w = std::max(w, m.size());
    std::ostringstream os;
    os << std::string(w, ' ');
    for (const auto& n : t.numbers) os << "  " << n;
    os << '\n';
    for (std::size_t r = 0; r < t.manifolds.size(); ++r) {
        os << t.manifolds[r] << std::string(w - t.manifolds[r].size(), ' ');
        for (std::size_t c = 0; c < t.numbers.size(); ++c) {
            const std::string v = std::to_string(t.values[r][c]);
            os << "  " << std::string(t.numbers[c].size() - v.size(), ' ') << v;
        }
        os << '\n';
    }
    os << "rank " << t.rank << '\n';
    return os.str();
}

}  // namespace rb
