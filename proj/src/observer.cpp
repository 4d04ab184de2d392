#include "thermoflex/observer.hpp"

#include <cmath>
#include <sstream>

#include "thermoflex/linalg.hpp"

namespace thermoflex {

double restricted_control(double u, const RateSet& r, double margin) {
    if (margin <= 0.0) throw ParameterError("restriction margin must be positive");
    const double lo = -r.beta + margin;
    const double hi = r.alpha - margin;
    if (lo > hi) throw ParameterError("restriction margin exceeds the control set");
    return u < lo ? lo : (u > hi ? hi : u);
}

double epsilon_rate(double u, const RateSet& r, double gamma) {
    return gamma * std::fmin(r.beta + u, r.alpha - u);
}

namespace {

// Error-dynamics matrix scaled by the mean jump rate so determinants stay
// well-conditioned for any chain size: (A + Bu + eps I)/rho - mu * e_2N c,
// where mu = L * Nc / rho and c is the on-block indicator row.
Matrix scaled_error_matrix(const BuildingParams& p, const RateSet& r, double u, double eps,
                           double mu) {
    const int n = p.n_bins;
    const int dim = 2 * n;
    const double rho = 0.5 * (r.alpha + r.beta);
    const double a = (r.alpha - u) / rho;
    const double b = (r.beta + u) / rho;
    const double e = eps / rho;
    Matrix m(dim, dim);
    for (int j = 0; j < n; ++j) {
        m(j, j) = -a + e;
        m(j + 1, j) = a;
    }
    for (int j = n; j < dim; ++j) {
        m(j, j) = -b + e;
        m((j + 1) % dim, j) = b;
    }
    for (int j = n; j < dim; ++j) m(dim - 1, j) -= mu;
    return m;
}

}  // namespace

double select_gain(const BuildingParams& p, const RateSet& r, double u, double eps) {
    const double rho = 0.5 * (r.alpha + r.beta);
    const double det0 = lu_determinant(scaled_error_matrix(p, r, u, eps, 0.0));
    const double det1 = lu_determinant(scaled_error_matrix(p, r, u, eps, 1.0));
    const double b = det1 - det0;
    if (std::fabs(b) < 1e-14) {
        std::ostringstream msg;
        msg << "determinant insensitive to the output gain (sensitivity " << b << ")";
        throw GainSelectionError(msg.str());
    }
    const double root = -det0 / b;
    const double dir = b > 0.0 ? 1.0 : -1.0;
    double mu = root + 0.1 * std::fabs(root) * dir;
    if (std::fabs(root) < 1e-30) mu = 0.1 * dir;

    const Matrix chosen = scaled_error_matrix(p, r, u, eps, mu);
    const std::vector<double> minors = leading_minors(chosen);
    for (std::size_t i = 0; i < minors.size(); ++i) {
        const double sign = (i % 2 == 0) ? -1.0 : 1.0;  // (-1)^k for 1-based k
        if (sign * minors[i] <= 0.0) {
            std::ostringstream msg;
            msg << "leading minor " << (i + 1) << " has the wrong sign (" << minors[i] << ")";
            throw GainSelectionError(msg.str());
        }
    }
    return mu * rho / p.population;
}

Observer::Observer(const BuildingParams& params, const RateSet& rates, ObserverConfig cfg)
    : params_(params), rates_(rates) {
    if (cfg.gamma <= 0.0 || cfg.gamma >= 1.0) throw ConfigError("observer gamma must be in (0, 1)");
    gamma_ = cfg.gamma;
    const double rate_min = std::fmin(rates_.alpha, rates_.beta);
    margin_ = cfg.margin > 0.0 ? cfg.margin : 0.05 * rate_min;
    if (margin_ > 0.5 * rate_min) {
        throw ConfigError("observer margin must not exceed half the smaller jump rate");
    }
    x_hat_.assign(static_cast<std::size_t>(2 * params_.n_bins), 1.0 / (2.0 * params_.n_bins));
}

void Observer::step(double u, double y_measured, double dt) {
    const double lo = -rates_.beta + margin_;
    const double hi = rates_.alpha - margin_;
    if (u < lo - 1e-12 || u > hi + 1e-12) {
        std::ostringstream msg;
        msg << "control u=" << u << " outside the restricted set [" << lo << ", " << hi << "]";
        throw ControlSaturationError(msg.str());
    }
    if (dt * (rates_.alpha + rates_.beta) >= 0.5) {
        throw ConfigError("tick violates dt*(alpha+beta) < 0.5");
    }
    epsilon_ = epsilon_rate(u, rates_, gamma_);
    const long long key = std::llround(u / 1e-6);
    auto it = gain_cache_.find(key);
    if (it == gain_cache_.end()) {
        it = gain_cache_.emplace(key, select_gain(params_, rates_, u, epsilon_)).first;
    }
    l_gain_ = it->second;

    const double innovation = y_measured - output(x_hat_, params_.population);
    static thread_local std::vector<double> dx;
    apply_generator(x_hat_, u, rates_, dx);
    for (std::size_t i = 0; i < x_hat_.size(); ++i) x_hat_[i] += dt * dx[i];
    x_hat_[x_hat_.size() - 1] += dt * l_gain_ * innovation;
    project_to_simplex(x_hat_);
}

}  // namespace thermoflex
