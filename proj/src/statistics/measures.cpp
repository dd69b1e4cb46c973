#include "acr/statistics/measures.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "acr/util/error.hpp"

namespace acr {

namespace {

void project(std::span<const std::size_t> projection, std::span<const Count> x,
             std::vector<Count>& out) {
    out.resize(projection.size());
    for (std::size_t i = 0; i < projection.size(); ++i) out[i] = x[projection[i]];
}

}  // namespace

void OccupationMeasure::add(std::span<const Count> state, double duration) {
    if (duration <= 0.0) return;
    weights_[std::vector<Count>(state.begin(), state.end())] += duration;
}

void OccupationMeasure::merge(const OccupationMeasure& other) {
    for (const auto& [s, w] : other.weights_) weights_[s] += w;
}

double OccupationMeasure::total() const {
    double sum = 0.0;
    for (const auto& [s, w] : weights_) sum += w;
    return sum;
}

double OccupationMeasure::time_average(const StateFunction& g) const {
    double sum = 0.0;
    for (const auto& [s, w] : weights_) sum += w * g(s);
    return sum / total();
}

OccupationObserver::OccupationObserver(std::vector<std::size_t> projection)
    : projection_(std::move(projection)) {}

void OccupationObserver::on_start(std::span<const Count> x0) {
    project(projection_, x0, current_);
    since_ = 0.0;
    measure_ = {};
}

void OccupationObserver::on_event(double t, std::size_t, std::span<const Count> x) {
    project(projection_, x, next_);
    if (next_ == current_) return;
    measure_.add(current_, t - since_);
    current_.swap(next_);
    since_ = t;
}

void OccupationObserver::on_finish(double t_end, std::span<const Count>) {
    measure_.add(current_, t_end - since_);
}

OccupationMeasure occupation_measure(const Trajectory& trajectory,
                                     std::span<const std::size_t> projection) {
    OccupationObserver obs({projection.begin(), projection.end()});
    if (trajectory.size() == 0) return {};
    obs.on_start(trajectory.state(0));
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        obs.on_event(trajectory.times[i], 0, trajectory.state(i));
    }
    obs.on_finish(trajectory.T, trajectory.state(trajectory.size() - 1));
    return obs.measure();
}

void EmpiricalMarginal::add(std::span<const Count> state, std::uint64_t count) {
    histogram[std::vector<Count>(state.begin(), state.end())] += count;
    replicas += count;
}

std::vector<double> EmpiricalMarginal::means() const {
    std::vector<double> m;
    if (histogram.empty()) return m;
    m.assign(histogram.begin()->first.size(), 0.0);
    for (const auto& [s, c] : histogram) {
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += static_cast<double>(c) * static_cast<double>(s[i]);
    }
    for (auto& v : m) v /= static_cast<double>(replicas);
    return m;
}

double EmpiricalMarginal::expectation(const StateFunction& g) const {
    double sum = 0.0;
    for (const auto& [s, c] : histogram) sum += static_cast<double>(c) * g(s);
    return sum / static_cast<double>(replicas);
}

DistanceReport poisson_distance(const EmpiricalMarginal& marginal, const Reference& reference,
                                int fitted_parameters) {
    if (marginal.replicas == 0) throw EvaluationError("empty marginal");
    DistanceReport out;
    const double n = static_cast<double>(marginal.replicas);

    double overlap = 0.0;
    for (const auto& [s, c] : marginal.histogram) {
        overlap += std::min(static_cast<double>(c) / n, reference.pmf(s));
    }
    out.total_variation = std::max(0.0, 1.0 - overlap);

    const auto ref_means = reference.means();
    const auto emp_means = marginal.means();
    for (std::size_t i = 0; i < ref_means.size() && i < emp_means.size(); ++i) {
        const double d = std::abs(emp_means[i] - ref_means[i]);
        out.mean_error = std::max(out.mean_error, ref_means[i] > 0.0 ? d / ref_means[i] : d);
    }
    const double max_mean =
        ref_means.empty() ? 0.0 : *std::max_element(ref_means.begin(), ref_means.end());
    out.degenerate = marginal.histogram.size() == 1 && max_mean > 0.1;

    // Cells in lexicographic order, then one cell for everything else.
    std::vector<std::pair<double, double>> cells;  // (observed, expected)
    auto support = reference.support();
    if (support.empty()) {
        for (const auto& [s, c] : marginal.histogram) support.push_back(s);
    }
    double covered_p = 0.0;
    double covered_obs = 0.0;
    for (const auto& s : support) {
        const auto it = marginal.histogram.find(s);
        const double obs = it == marginal.histogram.end() ? 0.0 : static_cast<double>(it->second);
        const double p = reference.pmf(s);
        cells.emplace_back(obs, n * p);
        covered_p += p;
        covered_obs += obs;
    }
    cells.emplace_back(n - covered_obs, n * std::max(0.0, 1.0 - covered_p));

    std::vector<std::pair<double, double>> pooled;
    std::pair<double, double> acc{0.0, 0.0};
    for (const auto& c : cells) {
        acc.first += c.first;
        acc.second += c.second;
        if (acc.second >= 5.0) {
            pooled.push_back(acc);
            acc = {0.0, 0.0};
        }
    }
    if (acc.first > 0.0 || acc.second > 0.0) {
        if (pooled.empty()) {
            pooled.push_back(acc);
        } else {
            pooled.back().first += acc.first;
            pooled.back().second += acc.second;
        }
    }
    for (const auto& [o, e] : pooled) {
        if (e > 0.0) {
            out.chi_square += (o - e) * (o - e) / e;
        } else if (o > 0.0) {
            out.chi_square = INFINITY;
        }
    }
    out.degrees_of_freedom = static_cast<int>(pooled.size()) - 1 - fitted_parameters;
    if (out.degrees_of_freedom <= 0) {
        out.degrees_of_freedom = 0;
        out.chi_square_pvalue = 1.0;
    } else if (!std::isfinite(out.chi_square)) {
        out.chi_square_pvalue = 0.0;
    } else {
        out.chi_square_pvalue =
            boost::math::gamma_q(0.5 * out.degrees_of_freedom, 0.5 * out.chi_square);
    }
    return out;
}

CumulativeCurve::CumulativeCurve(const std::function<double(double)>& f, double T, std::size_t cells)
    : T_(T), h_(T / static_cast<double>(std::max<std::size_t>(cells, 1))) {
    const std::size_t k = std::max<std::size_t>(cells, 1);
    values_.assign(k + 1, 0.0);
    double left = f(0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const double a = h_ * static_cast<double>(i);
        const double mid = f(a + 0.5 * h_);
        const double right = f(a + h_);
        values_[i + 1] = values_[i] + h_ / 6.0 * (left + 4.0 * mid + right);
        left = right;
    }
}

double CumulativeCurve::operator()(double t) const {
    if (t <= 0.0) return 0.0;
    const double pos = t / h_;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

RunningResidualObserver::RunningResidualObserver(std::vector<std::size_t> projection, StateFunction g,
                                                 const CumulativeCurve& reference,
                                                 std::size_t grid_points)
    : projection_(std::move(projection)),
      g_(std::move(g)),
      reference_(reference),
      grid_points_(std::max<std::size_t>(grid_points, 2)) {}

void RunningResidualObserver::on_start(std::span<const Count> x0) {
    project(projection_, x0, projected_);
    g_now_ = g_(projected_);
    t_now_ = 0.0;
    integral_ = 0.0;
    sup_ = 0.0;
    next_grid_ = 0;
}

void RunningResidualObserver::advance(double t) {
    const double T = reference_.T();
    while (next_grid_ < grid_points_) {
        const double s = T * static_cast<double>(next_grid_) / static_cast<double>(grid_points_ - 1);
        if (s > t) break;
        const double G = integral_ + g_now_ * (s - t_now_);
        sup_ = std::max(sup_, std::abs(G - reference_(s)));
        ++next_grid_;
    }
    integral_ += g_now_ * (t - t_now_);
    t_now_ = t;
    sup_ = std::max(sup_, std::abs(integral_ - reference_(t)));
}

void RunningResidualObserver::on_event(double t, std::size_t, std::span<const Count> x) {
    advance(t);
    project(projection_, x, projected_);
    g_now_ = g_(projected_);
}

void RunningResidualObserver::on_finish(double t_end, std::span<const Count>) { advance(t_end); }

double time_average_residual(const Trajectory& trajectory, std::span<const std::size_t> projection,
                             const StateFunction& g, const CumulativeCurve& reference,
                             std::size_t grid_points) {
    RunningResidualObserver obs({projection.begin(), projection.end()}, g, reference, grid_points);
    if (trajectory.size() == 0) return 0.0;
    obs.on_start(trajectory.state(0));
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        obs.on_event(trajectory.times[i], 0, trajectory.state(i));
    }
    obs.on_finish(trajectory.T, trajectory.state(trajectory.size() - 1));
    return obs.residual();
}

FixedTimeObserver::FixedTimeObserver(std::vector<std::size_t> projection, std::vector<double> times)
    : projection_(std::move(projection)), times_(std::move(times)) {
    if (!std::is_sorted(times_.begin(), times_.end())) throw ConfigError("sample times must be sorted");
}

void FixedTimeObserver::on_start(std::span<const Count> x0) {
    project(projection_, x0, current_);
    samples_.clear();
}

void FixedTimeObserver::on_event(double t, std::size_t, std::span<const Count> x) {
    while (samples_.size() < times_.size() && times_[samples_.size()] < t) samples_.push_back(current_);
    project(projection_, x, current_);
}

void FixedTimeObserver::on_finish(double, std::span<const Count>) {
    while (samples_.size() < times_.size()) samples_.push_back(current_);
}

}  // namespace acr
