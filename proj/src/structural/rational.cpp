#include "acr/structural/rational.hpp"

#include <algorithm>

namespace acr {

std::vector<std::size_t> rref(RationalMatrix& m) {
    std::vector<std::size_t> pivots;
    if (m.empty()) return pivots;
    const std::size_t rows = m.size();
    const std::size_t cols = m.front().size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && m[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        const Rational inv = 1 / m[r][c];
        for (auto& e : m[r]) e *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            const Rational f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

std::size_t rank(RationalMatrix m) { return rref(m).size(); }

RationalMatrix null_space(const RationalMatrix& m, std::size_t cols) {
    RationalMatrix work = m;
    const auto pivots = rref(work);
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivots) is_pivot[c] = true;
    RationalMatrix basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        RationalVector v(cols, 0);
        v[free] = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -work[i][free];
        basis.push_back(primitive(std::move(v)));
    }
    return basis;
}

RationalVector primitive(RationalVector v) {
    using boost::multiprecision::cpp_int;
    cpp_int l = 1;
    for (const auto& e : v) {
        if (e != 0) l = boost::multiprecision::lcm(l, cpp_int(denominator(e)));
    }
    cpp_int g = 0;
    for (auto& e : v) {
        e *= l;
        g = boost::multiprecision::gcd(g, cpp_int(numerator(e)));
    }
    if (g == 0) return v;
    Rational sign = 1;
    for (const auto& e : v) {
        if (e != 0) {
            sign = e < 0 ? -1 : 1;
            break;
        }
    }
    for (auto& e : v) e = e * sign / Rational(g);
    return v;
}

Rational dot(const RationalVector& a, const RationalVector& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool feasible_nonnegative(const RationalMatrix& a, const RationalVector& b, RationalVector& x) {
    const std::size_t m = a.size();
    const std::size_t n = m ? a.front().size() : x.size();
    // Tableau columns: n structural, m artificial, 1 rhs.
    RationalMatrix t(m, RationalVector(n + m + 1, 0));
    for (std::size_t i = 0; i < m; ++i) {
        const Rational sign = b[i] < 0 ? -1 : 1;
        for (std::size_t j = 0; j < n; ++j) t[i][j] = sign * a[i][j];
        t[i][n + i] = 1;
        t[i][n + m] = sign * b[i];
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

    // Reduced costs of the phase-one objective (sum of artificials).
    auto reduced_cost = [&](std::size_t j) {
        Rational c = j >= n && j < n + m ? 1 : 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (basis[i] >= n) c -= t[i][j];
        }
        return c;
    };

    while (true) {
        std::size_t enter = n + m;
        for (std::size_t j = 0; j < n + m; ++j) {
            if (reduced_cost(j) < 0) {
                enter = j;  // Bland: lowest index
                break;
            }
        }
        if (enter == n + m) break;
        std::size_t leave = m;
        Rational best;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] <= 0) continue;
            const Rational ratio = t[i][n + m] / t[i][enter];
            if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
            }
        }
        if (leave == m) break;  // unbounded direction cannot occur in phase one
        const Rational inv = 1 / t[leave][enter];
        for (auto& e : t[leave]) e *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == leave || t[i][enter] == 0) continue;
            const Rational f = t[i][enter];
            for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }

    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] >= n && t[i][n + m] != 0) return false;
    }
    x.assign(n, 0);
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) x[basis[i]] = t[i][n + m];
    }
    return true;
}

std::string to_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace acr
