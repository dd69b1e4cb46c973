#include "acr/dynamics/ode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "acr/model/rates.hpp"

namespace acr {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Coefficients of the continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double interpolate(const double* rc, std::size_t dim, std::size_t i, double theta) {
    const double theta1 = 1.0 - theta;
    return rc[i] + theta * (rc[dim + i] +
                            theta1 * (rc[2 * dim + i] +
                                      theta * (rc[3 * dim + i] + theta1 * rc[4 * dim + i])));
}

}  // namespace

void OdeSolution::evaluate(double t, std::span<double> out) const {
    if (starts_.empty() || t <= t0_) {
        const auto& src = starts_.empty() && t >= t_end_ ? final_ : initial_;
        std::copy(src.begin(), src.end(), out.begin());
        return;
    }
    if (t >= t_end_) {
        std::copy(final_.begin(), final_.end(), out.begin());
        return;
    }
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - starts_.begin()) - 1;
    const double theta = (t - starts_[k]) / widths_[k];
    const double* rc = coeffs_.data() + k * 5 * dim_;
    for (std::size_t i = 0; i < dim_; ++i) out[i] = interpolate(rc, dim_, i, theta);
}

std::vector<double> OdeSolution::evaluate(double t) const {
    std::vector<double> out(dim_);
    evaluate(t, out);
    return out;
}

void OdeSolution::export_csv(const std::string& path, const std::vector<std::string>& names,
                             std::size_t points) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "t";
    for (const auto& n : names) out << "," << n;
    out << "\n";
    out.precision(12);
    std::vector<double> z(dim_);
    for (std::size_t k = 0; k <= points; ++k) {
        const double t = t0_ + (t_end_ - t0_) * static_cast<double>(k) / static_cast<double>(points);
        evaluate(t, z);
        out << t;
        for (double v : z) out << "," << v;
        out << "\n";
    }
}

OdeSolution integrate_ode(const OdeRhs& rhs, std::vector<double> z0, double t0, double t1,
                          const OdeOptions& opt) {
    const std::size_t n = z0.size();
    OdeSolution sol;
    sol.dim_ = n;
    sol.t0_ = t0;
    sol.t_end_ = t1;
    sol.initial_ = z0;
    sol.min_coordinate_ = n ? *std::min_element(z0.begin(), z0.end())
                            : std::numeric_limits<double>::infinity();
    if (!(t1 > t0)) {
        sol.final_ = z0;
        sol.t_end_ = t0;
        return sol;
    }

    std::vector<double> y = std::move(z0), y1(n), ytmp(n), k1(n), k2(n), k3(n), k4(n), k5(n),
                        k6(n), k7(n), err(n);
    auto scale = [&](std::size_t, double a, double b) {
        return opt.atol + opt.rtol * std::max(std::abs(a), std::abs(b));
    };
    auto norm = [&](const std::vector<double>& v, const std::vector<double>& ref) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double q = v[i] / scale(i, ref[i], ref[i]);
            s += q * q;
        }
        return n ? std::sqrt(s / static_cast<double>(n)) : 0.0;
    };

    double t = t0;
    rhs(t, y, k1);

    // Initial step guess (Hairer & Wanner, II.4).
    double h;
    {
        const double d0 = norm(y, y), dd1 = norm(k1, y);
        double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
        h0 = std::min(h0, t1 - t0);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h0 * k1[i];
        rhs(t + h0, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) err[i] = (k2[i] - k1[i]);
        const double dd2 = norm(err, y) / h0;
        const double h1 = std::max(dd1, dd2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                      : std::pow(0.01 / std::max(dd1, dd2), 0.2);
        h = std::min({100 * h0, h1, t1 - t0});
    }

    std::size_t steps = 0;
    bool last_rejected = false;
    while (t < t1) {
        if (++steps > opt.max_steps) throw StepSizeUnderflow(t, "ODE step budget exhausted");
        if (t + h > t1) h = t1 - t;
        if (h <= std::abs(t) * 1e-14 || h < 1e-300) {
            throw StepSizeUnderflow(t, "ODE step size underflow");
        }
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                a76 * k6[i]);
        rhs(t + h, y1, k7);

        double e = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            if (!std::isfinite(y1[i])) finite = false;
            const double q = d / scale(i, y[i], y1[i]);
            e += q * q;
        }
        e = n ? std::sqrt(e / static_cast<double>(n)) : 0.0;
        if (!finite || !std::isfinite(e)) {
            h *= 0.1;
            last_rejected = true;
            continue;
        }
        if (e > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
            last_rejected = true;
            continue;
        }

        const std::size_t base = sol.coeffs_.size();
        if (opt.dense) {
            sol.starts_.push_back(t);
            sol.widths_.push_back(h);
            sol.coeffs_.resize(base + 5 * n);
        }
        std::vector<double> local;
        double* rc;
        if (opt.dense) {
            rc = sol.coeffs_.data() + base;
        } else {
            local.resize(5 * n);
            rc = local.data();
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double ydiff = y1[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            rc[i] = y[i];
            rc[n + i] = ydiff;
            rc[2 * n + i] = bspl;
            rc[3 * n + i] = ydiff - h * k7[i] - bspl;
            rc[4 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                 d7 * k7[i]);
        }
        for (int s = 1; s <= opt.min_samples_per_step; ++s) {
            const double theta = static_cast<double>(s) / (opt.min_samples_per_step + 1);
            for (std::size_t i = 0; i < n; ++i) {
                sol.min_coordinate_ = std::min(sol.min_coordinate_, interpolate(rc, n, i, theta));
            }
        }
        for (std::size_t i = 0; i < n; ++i) sol.min_coordinate_ = std::min(sol.min_coordinate_, y1[i]);

        t = (t + h >= t1) ? t1 : t + h;
        std::swap(y, y1);
        std::swap(k1, k7);
        double factor = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(e, 1e-10), -0.2)));
        if (last_rejected) factor = std::min(factor, 1.0);
        last_rejected = false;
        h *= factor;
    }
    sol.final_ = y;
    return sol;
}

OdeRhs network_rhs(const ReactionNetwork& net) {
    return [net](double, std::span<const double> z, std::span<double> dz) {
        std::fill(dz.begin(), dz.end(), 0.0);
        for (std::size_t r = 0; r < net.num_reactions(); ++r) {
            const double rate = evaluate_deterministic_rate(net, r, z);
            const auto& xi = net.reactions()[r].reaction_vector;
            for (std::size_t i = 0; i < xi.size(); ++i) {
                if (xi[i] != 0) dz[i] += static_cast<double>(xi[i]) * rate;
            }
        }
    };
}

}  // namespace acr
